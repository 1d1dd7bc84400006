mod output;
mod selector;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use psl2_core::classify::{orders_table, trace_set};
use psl2_core::numtheory::prime_power;
use psl2_core::oracle::{class_square_brute, enumerate_group};
use psl2_core::products::{
    class_square_closed, expand_set_descr, generating_pair_in_class, generating_triple_in_class,
    product_of_conjugate_generators, FactorMode, GenCertificate,
};
use psl2_core::verify::{verify_all, VerifyReport};
use psl2_core::{ClassId, ElemType, GroupCtx, PElem};

use output::{Doc, Format};
use selector::{resolve, selector_of};

#[derive(Parser)]
#[command(
    name = "psl2q",
    version,
    about = "Conjugacy classes, class squares and generation in PSL2(q)"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List every conjugacy class.
    Classes {
        #[arg(long)]
        q: u64,
    },
    /// The classes making up the square of a class.
    Square {
        #[arg(long)]
        q: u64,
        #[arg(long = "class")]
        class: String,
        /// Use the closed form instead of brute-force products.
        #[arg(long)]
        closed_form: bool,
    },
    /// Traces of elements of order n, as enc integers.
    Traces {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
    },
    /// Unipotent order and q-minimal orders for every prime power up to qmax.
    Table1 {
        #[arg(long, default_value_t = 29)]
        qmax: u64,
    },
    /// Two elements of a class generating the group.
    GenPair(GenArgs),
    /// Three elements of a class with product 1, the first two generating.
    GenTriple(GenArgs),
    /// Write an element as a product of two conjugate generators.
    Factor {
        #[arg(long)]
        q: u64,
        /// Matrix entries a,b,c,d as enc integers, row-major.
        #[arg(long)]
        elem: String,
        #[arg(long)]
        unipotent_factors: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reconcile closed forms with brute force.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    q: u64,
    #[arg(long = "class")]
    class: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifyTarget {
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    all_q_upto: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    target: VerifyTarget,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A failure to run: bad input (exit 2).
struct Usage(String);

impl From<psl2_core::Error> for Usage {
    fn from(e: psl2_core::Error) -> Self {
        Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<(Doc, bool), Usage>;

fn group(q: u64) -> Result<GroupCtx, Usage> {
    Ok(GroupCtx::new(q)?)
}

fn kind_name(t: ElemType) -> &'static str {
    match t {
        ElemType::Identity => "identity",
        ElemType::Unipotent => "unipotent",
        ElemType::SplitSs => "split_ss",
        ElemType::NonsplitSs => "nonsplit_ss",
    }
}

fn enc4(x: &PElem) -> String {
    let e = x.rep().enc4();
    format!("[{},{},{},{}]", e[0], e[1], e[2], e[3])
}

fn join(xs: impl IntoIterator<Item = impl ToString>) -> String {
    let v: Vec<String> = xs.into_iter().map(|x| x.to_string()).collect();
    if v.is_empty() {
        "--".into()
    } else {
        v.join(",")
    }
}

fn class_entry(ctx: &GroupCtx, id: &ClassId) -> Result<(Value, Vec<String>), Usage> {
    let order = ctx.class_order(id)?;
    let size = ctx.class_size(id)?;
    let kind = kind_name(id.kind());
    let sel = selector_of(id);
    let row = vec![
        sel.clone(),
        kind.into(),
        order.to_string(),
        size.to_string(),
    ];
    Ok((
        json!({ "selector": sel, "kind": kind, "order": order, "size": size }),
        row,
    ))
}

fn cmd_classes(q: u64) -> CmdResult {
    let ctx = group(q)?;
    let mut doc = Doc::new(
        "classes",
        Some(&ctx),
        &["selector", "kind", "representative", "order", "size"],
    );
    let mut list = Vec::new();
    for (id, _) in ctx.all_class_ids() {
        let (mut v, mut row) = class_entry(&ctx, &id)?;
        let rep = ctx.class_rep(&id)?;
        v["representative"] = json!(rep);
        row.insert(2, enc4(&rep));
        list.push(v);
        doc.rows.push(row);
    }
    doc.result = Value::Array(list);
    Ok((doc, true))
}

fn cmd_square(q: u64, sel: &str, closed_form: bool) -> CmdResult {
    let ctx = group(q)?;
    let id = resolve(&ctx, sel).map_err(Usage)?;
    let (classes, descr) = if closed_form {
        let d = class_square_closed(&ctx, &id)?;
        (expand_set_descr(&ctx, d)?, Some(d))
    } else {
        if id == ClassId::Identity {
            return Err(Usage(psl2_core::Error::IdentityClass.to_string()));
        }
        (class_square_brute(&enumerate_group(&ctx)?, &id)?, None)
    };
    let mut doc = Doc::new("square", Some(&ctx), &["selector", "kind", "order", "size"]);
    let mut list = Vec::new();
    let mut total = 0;
    for c in &classes {
        let (v, row) = class_entry(&ctx, c)?;
        total += ctx.class_size(c)?;
        list.push(v);
        doc.rows.push(row);
    }
    doc.notes.push(format!(
        "square of {}: {} classes, {total} elements",
        selector_of(&id),
        classes.len()
    ));
    doc.result = json!({
        "class": selector_of(&id),
        "method": if closed_form { "closed_form" } else { "brute" },
        "descr": descr,
        "classes": list,
        "total": total,
    });
    Ok((doc, true))
}

fn cmd_traces(q: u64, n: u64) -> CmdResult {
    let ctx = group(q)?;
    let ts: Vec<u32> = trace_set(&ctx, n).iter().map(|t| t.enc()).collect();
    let mut doc = Doc::new("traces", Some(&ctx), &["n", "traces"]);
    doc.rows.push(vec![n.to_string(), join(&ts)]);
    doc.result = json!({ "n": n, "traces": ts });
    Ok((doc, true))
}

fn cmd_table1(qmax: u64) -> CmdResult {
    let mut doc = Doc::new(
        "table1",
        None,
        &[
            "q",
            "unipotent order",
            "q-minimal q-good",
            "q-minimal not q-good",
        ],
    );
    let mut rows = Vec::new();
    for q in (2..=qmax).filter(|&q| prime_power(q).is_some()) {
        let r = orders_table(q)?;
        doc.rows.push(vec![
            q.to_string(),
            r.unipotent_order.to_string(),
            join(&r.minimal_good),
            join(&r.minimal_not_good),
        ]);
        rows.push(r);
    }
    doc.result = json!(rows);
    Ok((doc, true))
}

fn pair_absence(ctx: &GroupCtx, id: &ClassId) -> Result<String, Usage> {
    Ok(if ctx.class_order(id)? == 2 {
        "order-2 class: two involutions generate a dihedral group".into()
    } else {
        "unipotent class of PSL2(9): no pair of its elements generates the group".into()
    })
}

fn triple_absence(ctx: &GroupCtx, id: &ClassId) -> Result<String, Usage> {
    if id.is_unipotent() {
        return Ok(format!("unipotent class and q={} is not prime", ctx.q()));
    }
    let n = ctx.class_order(id)?;
    Ok(if n <= 3 {
        format!("class order {n} is at most 3")
    } else {
        format!("class order {n} is not q-minimal for q={}", ctx.q())
    })
}

fn certificate_doc(
    ctx: &GroupCtx,
    command: &'static str,
    subject: Value,
    cert: Option<GenCertificate>,
    reason: impl FnOnce() -> Result<String, Usage>,
) -> CmdResult {
    let mut doc = Doc::new(command, Some(ctx), &["element", "matrix", "selector"]);
    let (certificate, reason) = match &cert {
        Some(c) => {
            for (i, x) in c.elements.iter().enumerate() {
                doc.rows.push(vec![
                    format!("x{}", i + 1),
                    enc4(x),
                    selector_of(&ctx.class_id(x)),
                ]);
            }
            if let Some(t) = &c.target {
                doc.rows.push(vec![
                    "target".into(),
                    enc4(t),
                    selector_of(&ctx.class_id(t)),
                ]);
            }
            doc.notes.push(format!("closure order {}", c.closure_order));
            (json!(c), Value::Null)
        }
        None => {
            let r = reason()?;
            doc.notes.push(format!("absent: {r}"));
            (Value::Null, json!(r))
        }
    };
    doc.result = json!({
        "subject": subject,
        "present": cert.is_some(),
        "certificate": certificate,
        "reason": reason,
    });
    Ok((doc, true))
}

fn cmd_gen(args: &GenArgs, triple: bool) -> CmdResult {
    let ctx = group(args.q)?;
    let id = resolve(&ctx, &args.class).map_err(Usage)?;
    let subject = json!(selector_of(&id));
    if triple {
        let cert = generating_triple_in_class(&ctx, &id, args.seed)?;
        certificate_doc(&ctx, "gen-triple", subject, cert, || {
            triple_absence(&ctx, &id)
        })
    } else {
        let cert = generating_pair_in_class(&ctx, &id, args.seed)?;
        certificate_doc(&ctx, "gen-pair", subject, cert, || pair_absence(&ctx, &id))
    }
}

fn parse_enc4(s: &str) -> Result<[u64; 4], Usage> {
    let parts: Vec<&str> = s
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .collect();
    let bad = || Usage(format!("malformed element '{s}': expected a,b,c,d"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let mut out = [0u64; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| bad())?;
    }
    Ok(out)
}

fn cmd_factor(q: u64, elem: &str, unipotent: bool, seed: u64) -> CmdResult {
    let ctx = group(q)?;
    let z = ctx.elem_from_enc(parse_enc4(elem)?)?;
    let mode = if unipotent {
        FactorMode::Unipotent
    } else {
        FactorMode::Semisimple
    };
    let cert = product_of_conjugate_generators(&ctx, &z, mode, seed)?;
    let subject = json!({ "element": z, "class": selector_of(&ctx.class_id(&z)), "mode": mode });
    certificate_doc(&ctx, "factor", subject, cert, || {
        let kind = if unipotent { "unipotent" } else { "semisimple" };
        Ok(format!(
            "{} is not a product of two conjugate {kind} generators",
            enc4(&z)
        ))
    })
}

fn report_rows(r: &VerifyReport) -> Vec<Vec<String>> {
    let status = |ok: bool| if ok { "ok" } else { "MISMATCH" }.to_string();
    let applies = |ok: Option<bool>| ok.map(status).unwrap_or_else(|| "n/a".into());
    let q = r.q.to_string();
    let small = r.q <= 3;
    let sections: Vec<(&str, String)> = vec![
        ("table1", status(r.table1.matches)),
        ("trace_sets", status(r.trace_sets.is_empty())),
        ("counts", status(r.counts.matches)),
        ("good_orders", status(r.good_orders.is_empty())),
        (
            "class_squares",
            applies((!small).then(|| r.class_squares.iter().all(|s| s.matches))),
        ),
        (
            "cardinalities",
            applies(r.cardinalities.as_ref().map(|c| c.matches)),
        ),
        (
            "generation",
            applies((!small).then(|| r.generation.iter().all(|g| g.matches))),
        ),
        (
            "unipotent_invariant",
            status(r.unipotent_invariant.is_empty()),
        ),
        ("macbeath", status(r.macbeath.failures.is_empty())),
    ];
    sections
        .into_iter()
        .map(|(s, v)| vec![q.clone(), s.into(), v])
        .collect()
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let qs: Vec<u64> = match (args.target.q, args.target.all_q_upto) {
        (Some(q), _) => vec![q],
        (None, Some(n)) => (2..=n).filter(|&q| prime_power(q).is_some()).collect(),
        (None, None) => unreachable!("clap requires one target"),
    };
    let single = args.target.q.map(group).transpose()?;
    let mut doc = Doc::new("verify", single.as_ref(), &["q", "section", "status"]);
    let mut reports = Vec::new();
    for &q in &qs {
        let r = verify_all(q, args.seed)?;
        doc.rows.extend(report_rows(&r));
        if let Some(eps) = r
            .cardinalities
            .as_ref()
            .and_then(|c| c.epsilon_observed.clone())
        {
            doc.notes
                .push(format!("q={q}: unipotent class squares support {eps}"));
        }
        reports.push(r);
    }
    let ok = reports.iter().all(|r| r.all_match);
    doc.notes.push(if ok {
        "all checks match".into()
    } else {
        "verification mismatch".into()
    });
    doc.result = if single.is_some() {
        json!(reports[0])
    } else {
        json!(reports)
    };
    Ok((doc, ok))
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Classes { q } => cmd_classes(*q),
        Cmd::Square {
            q,
            class,
            closed_form,
        } => cmd_square(*q, class, *closed_form),
        Cmd::Traces { q, n } => cmd_traces(*q, *n),
        Cmd::Table1 { qmax } => cmd_table1(*qmax),
        Cmd::GenPair(a) => cmd_gen(a, false),
        Cmd::GenTriple(a) => cmd_gen(a, true),
        Cmd::Factor {
            q,
            elem,
            unipotent_factors,
            seed,
        } => cmd_factor(*q, elem, *unipotent_factors, *seed),
        Cmd::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((doc, ok)) => {
            let text = doc.render(cli.format);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
