//! The `normone` command line. [`run`] takes the arguments and streams so the
//! binary stays a one-liner and tests can drive it in process.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or parse error.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cohomology::{reports_from_json, CohomologyReport, LatticeAction};
use crate::construction::{
    certify_chain, generate, step_counts, ChainDocument, ChainResult, GenerateOptions, Strategy,
    Verification,
};
use crate::context::GroupContext;
use crate::error::Error;
use crate::group_action::SubgroupSpec;
use crate::ncpoly::Poly;
use crate::oracle::{monomial_count, unit_chain_bound, CountMode, RelationSet};
use crate::proof_replay::check_identities;
use crate::ring_instances::{check_numeric, check_numeric_chain, random_instance, InstanceKind};

/// Largest group order accepted without `--force`.
pub const ORDER_LIMIT: u64 = 1 << 16;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "normone", version, about = "Explicit norm-one elements for cyclic p-groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the norm-one element for Z/p^n.
    Generate {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Also print z, w, a and the output of every step.
        #[arg(long)]
        steps: bool,
        /// Skip the universal-ring checks.
        #[arg(long)]
        no_verify: bool,
    },
    /// Check a polynomial or chain document for norm one.
    Verify {
        /// Path to the JSON document, or `-` for standard input.
        #[arg(long)]
        input: String,
        /// Exponent of the subgroup G_m to check against; defaults to n.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Monomial counts of every step against the size bounds.
    Count {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the final element on seeded concrete rings.
    Evaluate {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "matrix")]
        kind: KindArg,
        /// Matrix size for `--kind matrix`.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        json: bool,
    },
    /// Re-check the intermediate identities of every lift step.
    Replay {
        #[command(flatten)]
        group: GroupArgs,
        /// Only this step (1-based).
        #[arg(long)]
        step: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Tate cohomology of the regular representation and of given lattices.
    Cohomology {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: u32,
        /// JSON document `{"actions": [{"name", "order", "matrix"}]}`, or `-`.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub n: u32,
    /// `unit`, `doubling`, or an explicit list such as `2:1,4:2`.
    #[arg(long, default_value = "doubling")]
    pub strategy: String,
    /// Allow p^n above 65536.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Scalar,
    Matrix,
}

/// A finished command: what to print and how to exit.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn pass(text: String) -> Self {
        Outcome { text, code: EXIT_PASS }
    }

    fn verdict(text: String, ok: bool) -> Self {
        Outcome { text, code: if ok { EXIT_PASS } else { EXIT_FAIL } }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let outcome = match execute(&cli.command, stdin) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: cannot write output: {msg}");
        return EXIT_USAGE;
    }
    outcome.code
}

fn execute(command: &Command, stdin: &mut dyn Read) -> Result<Outcome, Error> {
    match command {
        Command::Generate { group, format, steps, no_verify } => cmd_generate(group, *format, *steps, *no_verify),
        Command::Verify { input, m } => cmd_verify(&read_input(input, stdin)?, *m),
        Command::Count { group, json } => cmd_count(group, *json),
        Command::Evaluate { group, kind, dim, seed, seeds, json } => {
            let kind = match kind {
                KindArg::Scalar => InstanceKind::Scalar,
                KindArg::Matrix => InstanceKind::Matrix(*dim),
            };
            cmd_evaluate(group, kind, *seed, *seeds, *json)
        }
        Command::Replay { group, step, json } => cmd_replay(group, *step, *json),
        Command::Cohomology { p, n, input, json } => {
            let doc = input.as_deref().map(|i| read_input(i, stdin)).transpose()?;
            cmd_cohomology(*p, *n, doc.as_deref(), *json)
        }
    }
}

fn read_input(input: &str, stdin: &mut dyn Read) -> Result<String, Error> {
    let mut buf = String::new();
    if input == "-" {
        stdin
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse { location: "standard input".into(), message: e.to_string() })?;
    } else {
        buf = fs::read_to_string(input)
            .map_err(|e| Error::Parse { location: input.to_string(), message: e.to_string() })?;
    }
    Ok(buf)
}

impl GroupArgs {
    fn context(&self) -> Result<GroupContext, Error> {
        let ctx = GroupContext::new(self.p, self.n)?;
        if u64::from(ctx.order()) > ORDER_LIMIT && !self.force {
            return Err(Error::Parameter(format!(
                "p^n = {} exceeds {ORDER_LIMIT}; pass --force to proceed",
                ctx.order()
            )));
        }
        Ok(ctx)
    }

    fn strategy(&self) -> Result<Strategy, Error> {
        self.strategy.parse()
    }

    fn chain(&self, verify: Verification) -> Result<ChainResult, Error> {
        self.context()?;
        generate(self.p, self.n, &self.strategy()?, GenerateOptions::with_verification(verify))
    }
}

fn render(poly: &Poly, format: Format) -> String {
    match format {
        Format::Latex => poly.to_latex(),
        _ => poly.to_text(),
    }
}

fn cmd_generate(group: &GroupArgs, format: Format, steps: bool, no_verify: bool) -> Result<Outcome, Error> {
    let verify = if no_verify { Verification::Off } else { Verification::On };
    let chain = group.chain(verify)?;
    if format == Format::Json {
        let text = match (&chain.final_poly, steps) {
            (Some(f), false) => f.to_json(),
            _ => chain.to_document(true).to_json(),
        };
        return Ok(Outcome::pass(text + "\n"));
    }
    let mut out = String::new();
    if steps {
        for (i, s) in chain.steps.iter().enumerate() {
            let check = |v: Option<bool>| match v {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "not run",
            };
            let _ = writeln!(
                out,
                "step {} (m={}, k={}): certificate {}, direct check {}",
                i + 1,
                s.m,
                s.k,
                check(s.checks.certificate),
                check(s.checks.direct)
            );
            let r = s.expanded.as_ref().unwrap_or(&s.symbolic);
            if s.expanded.is_none() {
                let _ = writeln!(out, "  (over the shifts of the step input)");
            }
            for (name, poly) in [("z", &r.z), ("w", &r.w), ("a", &r.a), ("output", &r.output)] {
                let _ = writeln!(out, "  {name} = {}", render(poly, format));
            }
        }
    }
    match &chain.final_poly {
        Some(f) => {
            if steps {
                out.push_str("final = ");
            }
            let _ = writeln!(out, "{}", render(f, format));
        }
        None => {
            let _ = writeln!(out, "final element not expanded; X_(i+1) = a_i(X_i) X_i with X_0 = x and");
            for s in &chain.steps {
                let _ = writeln!(out, "a (m={}, k={}) = {}", s.m, s.k, render(&s.symbolic.a, format));
            }
        }
    }
    Ok(Outcome::pass(out))
}

fn cmd_verify(doc: &str, m: Option<u32>) -> Result<Outcome, Error> {
    let value: serde_json::Value = serde_json::from_str(doc)
        .map_err(|e| Error::Parse { location: format!("line {} column {}", e.line(), e.column()), message: e.to_string() })?;
    if value.get("steps").is_some() {
        let chain = ChainDocument::from_json(doc)?;
        let ctx = chain.ctx()?;
        let target = m.unwrap_or(ctx.n());
        let verdict = certify_chain(ctx, &chain.factors()?, target)?;
        let text = match (&verdict.failed_step, &verdict.residual) {
            (None, _) => format!("PASS: chain of {} steps is norm-one for G_{target}\n", chain.steps.len()),
            (Some((sm, sk)), residual) => format!(
                "FAIL: step (m={sm}, k={sk}) residual {}\n",
                residual.as_deref().unwrap_or("?")
            ),
        };
        return Ok(Outcome::verdict(text, verdict.passed()));
    }
    let poly = Poly::from_json(doc)?;
    let ctx = poly.ctx();
    let h = SubgroupSpec::new(ctx, m.unwrap_or(ctx.n()))?;
    let nf = RelationSet::elementary(ctx).normal_form_of_norm(&poly, &h);
    let ok = nf.is_one();
    let text = if ok {
        format!("PASS: norm over G_{} is 1\n", h.exponent())
    } else {
        format!("FAIL: N - 1 reduces to {}\n", (nf - Poly::one(ctx)).to_text())
    };
    Ok(Outcome::verdict(text, ok))
}

fn cmd_count(group: &GroupArgs, json: bool) -> Result<Outcome, Error> {
    let ctx = group.context()?;
    let chain = group.chain(Verification::Off)?;
    let counts = step_counts(&chain)?;
    let chain_bound = unit_chain_bound(ctx.p(), ctx.n())?;
    let final_counts = chain
        .final_poly
        .as_ref()
        .map(|f| (monomial_count(f, CountMode::Expanded), monomial_count(f, CountMode::Reduced)));
    let ok = counts.iter().all(|c| c.within_bound());
    if json {
        let steps: Vec<_> = counts
            .iter()
            .map(|c| {
                json!({
                    "m": c.m, "k": c.k, "symbolic": c.symbolic, "expanded": c.expanded,
                    "reduced": c.reduced, "bound": c.bound.to_string(), "holds": c.within_bound(),
                })
            })
            .collect();
        let doc = json!({
            "p": ctx.p(), "n": ctx.n(), "strategy": chain.strategy.to_string(), "steps": steps,
            "unit_chain_bound": chain_bound.to_string(),
            "final": final_counts.map(|(e, r)| json!({"expanded": e, "reduced": r})),
        });
        return Ok(Outcome::verdict(doc.to_string() + "\n", ok));
    }
    let mut out = format!("p={} n={} strategy={}\n", ctx.p(), ctx.n(), chain.strategy);
    let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
    for c in &counts {
        let _ = writeln!(
            out,
            "step m={} k={}: a has {} monomials (expanded over x: {}, reduced: {}) {} bound {}",
            c.m,
            c.k,
            c.symbolic,
            opt(c.expanded),
            opt(c.reduced),
            if c.within_bound() { "<=" } else { ">" },
            c.bound
        );
    }
    let _ = writeln!(out, "unit chain bound: {chain_bound}");
    match final_counts {
        Some((e, r)) => {
            let _ = writeln!(out, "final: {e} monomials, {r} after reduction");
        }
        None => out.push_str("final: not expanded\n"),
    }
    Ok(Outcome::verdict(out, ok))
}

fn cmd_evaluate(group: &GroupArgs, kind: InstanceKind, seed: u64, seeds: u64, json: bool) -> Result<Outcome, Error> {
    let ctx = group.context()?;
    let chain = group.chain(Verification::Off)?;
    let whole = SubgroupSpec::whole(ctx);
    let x = Poly::var(ctx, 0);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for s in seed..seed.saturating_add(seeds) {
        let inst = random_instance(ctx, kind, s)?;
        let ok = check_numeric_chain(&chain, &inst)?;
        let x_alone = check_numeric(&x, &inst, &whole)?;
        let pair = inst.noncommuting_pair();
        all_ok &= ok;
        rows.push((s, ok, x_alone, pair));
    }
    let kind_name = match kind {
        InstanceKind::Scalar => "scalar".to_string(),
        InstanceKind::Matrix(d) => format!("matrix({d})"),
    };
    let text = if json {
        let items: Vec<_> = rows
            .iter()
            .map(|(s, ok, x_alone, pair)| {
                json!({"seed": s, "norm_one": ok, "x_norm_one": x_alone, "noncommuting_pair": pair})
            })
            .collect();
        json!({"p": ctx.p(), "n": ctx.n(), "kind": kind_name, "results": items}).to_string() + "\n"
    } else {
        let mut out = String::new();
        for (s, ok, x_alone, pair) in &rows {
            let pair = pair.map_or("commutative".to_string(), |(i, j)| format!("x[{i}], x[{j}] do not commute"));
            let _ = writeln!(
                out,
                "seed {s} {kind_name}: N_G(final) = 1 {}; N_G(x) = 1 {}; {pair}",
                if *ok { "PASS" } else { "FAIL" },
                if *x_alone { "yes" } else { "no" },
            );
        }
        out
    };
    Ok(Outcome::verdict(text, all_ok))
}

fn cmd_replay(group: &GroupArgs, only: Option<usize>, json: bool) -> Result<Outcome, Error> {
    let ctx = group.context()?;
    let chain = group.chain(Verification::Off)?;
    if let Some(i) = only {
        if i == 0 || i > chain.steps.len() {
            return Err(Error::Parameter(format!("step {i} out of range 1..={}", chain.steps.len())));
        }
    }
    let mut input = Poly::var(ctx, 0);
    let mut reports = Vec::new();
    for (i, s) in chain.steps.iter().enumerate() {
        if only.map_or(true, |o| o == i + 1) {
            reports.push((i + 1, check_identities(&input, s.m, s.k)?));
        }
        if only.is_some_and(|o| o <= i + 1) {
            break;
        }
        input = match &s.expanded {
            Some(e) => e.output.clone(),
            None => return Err(Error::Parameter(format!("step {} was not expanded; cannot replay later steps", i + 1))),
        };
    }
    let ok = reports.iter().all(|(_, r)| r.all_ok());
    let text = if json {
        let items: Vec<_> = reports
            .iter()
            .map(|(i, r)| json!({"step": i, "m": r.m, "k": r.k, "checks": r.checks}))
            .collect();
        serde_json::Value::Array(items).to_string() + "\n"
    } else {
        let mut out = String::new();
        for (i, r) in &reports {
            let _ = writeln!(out, "step {i} (m={}, k={}):", r.m, r.k);
            for c in &r.checks {
                let verdict = if c.ok { "ok".to_string() } else { format!("FAIL ({} residual terms)", c.residual_terms) };
                let _ = writeln!(out, "  {:<24} {verdict}", c.eq);
            }
        }
        out
    };
    Ok(Outcome::verdict(text, ok))
}

fn cmd_cohomology(p: u32, n: u32, doc: Option<&str>, json: bool) -> Result<Outcome, Error> {
    let ctx = GroupContext::new(p, n)?;
    if u64::from(ctx.order()) > 256 {
        return Err(Error::Parameter("the regular representation is limited to order 256".into()));
    }
    let regular = LatticeAction::regular(ctx.order())?;
    let mut reports = Vec::new();
    for e in 0..=n {
        let sub = regular.restrict(ctx.pow(e))?;
        reports.push(CohomologyReport::compute(format!("regular Z/{} on subgroup of order {}", ctx.order(), sub.order()), &sub));
    }
    if let Some(doc) = doc {
        reports.extend(reports_from_json(doc)?);
    }
    let text = if json {
        serde_json::to_string(&reports).expect("reports serialize") + "\n"
    } else {
        let fmt = |v: &[String]| if v.is_empty() { "0".to_string() } else { v.iter().map(|f| format!("Z/{f}")).collect::<Vec<_>>().join(" + ") };
        let mut out = String::new();
        for r in &reports {
            let _ = writeln!(out, "{}: H1 = {}, H2 = {}", r.name, fmt(&r.h1), fmt(&r.h2));
        }
        out
    };
    Ok(Outcome::pass(text))
}
