//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use normone::cohomology::{tate_h1, tate_h2, LatticeAction};
use normone::construction::{
    generate, coboundary_decompose, step_counts, ChainResult, GenerateOptions, Strategy,
};
use normone::oracle::{step_bound, unit_chain_bound};
use normone::proof_replay::check_identities;
use normone::ring_instances::{check_numeric, random_instance, InstanceKind};
use normone::{is_norm_one, normal_form, shift, GroupContext, Poly, SubgroupSpec};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ctx(p: u32, n: u32) -> GroupContext {
    GroupContext::new(p, n).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_secs),
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64()),
    )
}

/// Parses a formula in TeX notation such as `\sigma(x)x - \sigma^3(x) x^2`.
fn tex(c: GroupContext, s: &str) -> Poly {
    let s: Vec<char> = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    let mut i = 0;
    let mut terms: Vec<(BigInt, Vec<u32>)> = Vec::new();
    let exponent = |s: &[char], i: &mut usize| -> u32 {
        if s.get(*i) != Some(&'^') {
            return 1;
        }
        *i += 1;
        let braced = s[*i] == '{';
        if braced {
            *i += 1;
        }
        let start = *i;
        while *i < s.len() && s[*i].is_ascii_digit() {
            *i += 1;
        }
        let v = s[start..*i].iter().collect::<String>().parse().unwrap();
        if braced {
            *i += 1;
        }
        v
    };
    while i < s.len() {
        let mut sign = BigInt::from(1);
        match s[i] {
            '+' => i += 1,
            '-' => {
                sign = BigInt::from(-1);
                i += 1;
            }
            _ => {}
        }
        let start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        let coef: BigInt = if i > start { s[start..i].iter().collect::<String>().parse().unwrap() } else { 1.into() };
        let mut word = Vec::new();
        while i < s.len() && s[i] != '+' && s[i] != '-' {
            let letter = if s[i] == 'x' {
                i += 1;
                0
            } else {
                let head: String = s[i..i + 6].iter().collect();
                assert_eq!(head, "\\sigma", "unexpected input at {i}");
                i += 6;
                let j = exponent(&s, &mut i);
                let tail: String = s[i..i + 3].iter().collect();
                assert_eq!(tail, "(x)");
                i += 3;
                j
            };
            let times = exponent(&s, &mut i);
            word.extend(std::iter::repeat(letter).take(times as usize));
        }
        terms.push((sign * coef, word));
    }
    Poly::from_terms(c, terms).unwrap()
}

const P2_EXPECTED: &str =
    r"\sigma(x)x - \sigma(x) x^2 + x \sigma^2(x)x + x\sigma^3(x)x - \sigma(x)\sigma^3(x)x";
const P2_REDUCED: &str = r"2x^2 - x^3 - x\sigma(x)x - \sigma(x)x^2 +\sigma(x)^2x";
const P3_EXPECTED: &str = r"- x^2 + 2 \sigma(x)x - \sigma^3(x)x + \sigma^4(x)x
    + x\sigma^3(x)x + x\sigma^4(x)x + x\sigma^5(x)x + x\sigma^6(x)x + x\sigma^7(x)x + x\sigma^8(x)x
    - \sigma(x)\sigma^4(x)x - \sigma(x)\sigma^5(x)x - \sigma(x)\sigma^6(x)x - \sigma(x)\sigma^7(x)x
    - \sigma(x)\sigma^8(x)x - \sigma(x) x^2
    + \sigma^3(x)\sigma^6(x)x + \sigma^3(x)\sigma^7(x)x + \sigma^3(x)\sigma^8(x)x
    - \sigma^4(x)\sigma^7(x)x - \sigma^4(x)\sigma^8(x)x - \sigma^4(x)x^2";
const SHORT_P2: &str = r"x\sigma(x)x + x\sigma(x) - x^2\sigma(x)";

/// The generation matrix shared by several criteria.
const MATRIX: [(u32, u32, &str); 8] = [
    (2, 2, "unit"),
    (2, 3, "unit"),
    (2, 3, "doubling"),
    (2, 4, "unit"),
    (2, 4, "doubling"),
    (3, 2, "unit"),
    (3, 3, "unit"),
    (5, 2, "unit"),
];

struct Chains {
    chains: BTreeMap<(u32, u32, String), ChainResult>,
    elapsed: Duration,
}

impl Chains {
    fn build() -> Result<Self, String> {
        let start = Instant::now();
        let mut chains = BTreeMap::new();
        for (p, n, s) in MATRIX {
            let strategy: Strategy = s.parse().map_err(|e| format!("{e}"))?;
            let chain = generate(p, n, &strategy, GenerateOptions::default())
                .map_err(|e| format!("generate({p}, {n}, {s}): {e}"))?;
            chains.insert((p, n, s.to_string()), chain);
        }
        Ok(Chains { chains, elapsed: start.elapsed() })
    }

    fn get(&self, p: u32, n: u32, s: &str) -> &ChainResult {
        &self.chains[&(p, n, s.to_string())]
    }
}

fn final_matches(p: u32, expected: &str) -> Outcome {
    let start = Instant::now();
    let chain = generate(p, 2, &Strategy::Unit, GenerateOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let got = chain.final_poly.ok_or("final element not expanded")?;
    let want = tex(ctx(p, 2), expected);
    ensure(got == want, format!("mismatch:\n  got  {got}\n  want {want}"))?;
    within(elapsed, 1)?;
    let twos = got.terms().iter().filter(|(_, c)| c.magnitude() == &2u32.into()).count();
    Ok(format!("{} monomials, {twos} with coefficient ±2, exact match", got.len()))
}

fn c1() -> Outcome {
    final_matches(2, P2_EXPECTED)
}

fn c2() -> Outcome {
    final_matches(3, P3_EXPECTED)
}

fn c3() -> Outcome {
    let start = Instant::now();
    let c = ctx(2, 2);
    let reduced = normal_form(&tex(c, P2_EXPECTED));
    let elapsed = start.elapsed();
    ensure(reduced == tex(c, P2_REDUCED), format!("normal form is {reduced}"))?;
    within(elapsed, 1)?;
    Ok(format!("normal form {reduced}"))
}

fn c4() -> Outcome {
    let start = Instant::now();
    let c = ctx(2, 2);
    let ok = is_norm_one(&tex(c, SHORT_P2), &SubgroupSpec::whole(c)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(ok, "N_G is not 1")?;
    let control = is_norm_one(&tex(c, "x\\sigma(x)x + x\\sigma(x)"), &SubgroupSpec::whole(c)).unwrap();
    ensure(!control, "control polynomial unexpectedly passes")?;
    within(elapsed, 1)?;
    Ok("N_G = 1 in the universal ring".into())
}

fn c5(chains: &Chains) -> Outcome {
    let mut certified = 0;
    let mut direct = 0;
    let mut steps = 0;
    for ((p, n, s), chain) in &chains.chains {
        for step in &chain.steps {
            steps += 1;
            ensure(
                step.checks.certificate == Some(true),
                format!("({p},{n},{s}) step (m={}, k={}) not certified", step.m, step.k),
            )?;
            certified += 1;
            match step.checks.direct {
                Some(true) => direct += 1,
                Some(false) => return Err(format!("({p},{n},{s}) step {} direct check failed", step.m)),
                None => {}
            }
        }
    }
    within(chains.elapsed, 300)?;
    let mut routes = Vec::new();
    for ((p, n, s), chain) in &chains.chains {
        let r: Vec<&str> = chain
            .steps
            .iter()
            .map(|st| if st.checks.direct.is_some() { "C+D" } else { "C" })
            .collect();
        routes.push(format!("({p},{n},{s}):{}", r.join("/")));
    }
    Ok(format!(
        "{steps} steps, {certified} certified, {direct} also checked directly over x; {:.1}s\n        routes (C = step certificate, D = direct check): {}",
        chains.elapsed.as_secs_f64(),
        routes.join(" ")
    ))
}

fn c6(chains: &Chains) -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut cases: Vec<(String, Poly, u32, u32)> = vec![
        ("(2,2,1)".into(), Poly::var(ctx(2, 2), 0), 2, 1),
        ("(3,2,1)".into(), Poly::var(ctx(3, 2), 0), 2, 1),
    ];
    for s in ["unit", "doubling"] {
        let chain = chains.get(2, 4, s);
        let first = chain.steps[0].expanded.as_ref().ok_or("first step not expanded")?;
        let second = &chain.steps[1];
        cases.push((format!("(2,4 {s} step 2: m={}, k={})", second.m, second.k), first.output.clone(), second.m, second.k));
    }
    for (name, x, m, k) in cases {
        let report = check_identities(&x, m, k).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.checks.len() == 8, format!("{name}: {} checks", report.checks.len()))?;
        if let Some(bad) = report.checks.iter().find(|c| !c.ok) {
            return Err(format!("{name}: identity {} leaves {} terms", bad.eq, bad.residual_terms));
        }
        lines.push(name);
    }
    within(start.elapsed(), 120)?;
    Ok(format!("all 8 identities hold for {}", lines.join(", ")))
}

fn c7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0;
    for p in [2u32, 3] {
        let c = ctx(p, 2);
        let chain = generate(p, 2, &Strategy::Unit, GenerateOptions::default()).map_err(|e| e.to_string())?;
        let witnesses = [
            (SubgroupSpec::elementary(c), Poly::var(c, 0)),
            (SubgroupSpec::whole(c), chain.final_poly.clone().ok_or("final not expanded")?),
        ];
        for (h, witness) in &witnesses {
            let t = h.step() as i64;
            for trial in 0..200 {
                let terms: Vec<(i64, Vec<u32>)> = (0..rng.gen_range(1..=4))
                    .map(|_| {
                        let deg = rng.gen_range(0..=2);
                        (rng.gen_range(-4..=4), (0..deg).map(|_| rng.gen_range(0..c.order())).collect())
                    })
                    .collect();
                let v = Poly::from_terms(c, terms).map_err(|e| e.to_string())?;
                let z = shift(&v, t) - &v;
                let w = coboundary_decompose(witness, &z, h).map_err(|e| format!("p={p} trial {trial}: {e}"))?;
                let residual = normal_form(&(shift(&w, t) - &w - &z));
                ensure(residual.is_zero(), format!("p={p} |H|={} trial {trial}: residual {residual}", h.order()))?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} decompositions (200 per p and H), {:.2}s", start.elapsed().as_secs_f64()))
}

fn c8(chains: &Chains) -> Outcome {
    let mut worst = Vec::new();
    let mut observed = BTreeMap::new();
    for ((p, n, s), chain) in &chains.chains {
        for count in step_counts(chain).map_err(|e| e.to_string())? {
            ensure(
                count.within_bound(),
                format!("({p},{n},{s}) step (m={}, k={}): {} > {}", count.m, count.k, count.symbolic, count.bound),
            )?;
            observed.insert((*p, count.m, count.k), (count.symbolic, count.bound.clone()));
            if let Some(e) = count.expanded {
                if BigInt::from(e) > count.bound {
                    worst.push(format!("({p},{n},{s}) m={} k={}: {e}", count.m, count.k));
                }
            }
        }
    }
    let (a2, b2) = &observed[&(2, 2, 1)];
    let (a3, b3) = &observed[&(3, 2, 1)];
    ensure((*a2, b2.clone()) == (5, 7.into()), format!("(2,2,1) gives {a2} <= {b2}"))?;
    ensure((*a3, b3.clone()) == (22, 25.into()), format!("(3,2,1) gives {a3} <= {b3}"))?;
    let table: Vec<String> = observed.iter().map(|((p, m, k), (a, b))| format!("p={p} ({m},{k}): {a}<={b}")).collect();
    Ok(format!(
        "a counted over the shifts of the step input: {}\n        over the base generators these exceed the bound: {}",
        table.join(", "),
        if worst.is_empty() { "none".into() } else { worst.join(", ") }
    ))
}

fn c9() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for (p, n) in [(2u32, 2u32), (3, 2), (2, 3)] {
        let chain = generate(p, n, &Strategy::Unit, GenerateOptions::default()).map_err(|e| e.to_string())?;
        let f = chain.final_poly.as_ref().ok_or("final not expanded")?;
        let c = chain.ctx;
        let g = SubgroupSpec::whole(c);
        for kind in [InstanceKind::Scalar, InstanceKind::Matrix(2), InstanceKind::Matrix(3)] {
            for seed in 0..20 {
                let inst = random_instance(c, kind, seed).map_err(|e| e.to_string())?;
                let ok = check_numeric(f, &inst, &g).map_err(|e| e.to_string())?;
                ensure(ok, format!("({p},{n}) {kind:?} seed {seed}: N_G(final) != 1"))?;
                let guard = inst.noncommuting_pair().is_some();
                ensure(guard == (kind != InstanceKind::Scalar), format!("({p},{n}) {kind:?} seed {seed}: guard {guard}"))?;
                let control = check_numeric(&Poly::var(c, 0), &inst, &g).unwrap();
                ensure(!control, format!("({p},{n}) {kind:?} seed {seed}: x alone passes"))?;
                runs += 1;
            }
        }
    }
    within(start.elapsed(), 120)?;
    Ok(format!("{runs} instances pass, guard triggers on every matrix instance, {:.2}s", start.elapsed().as_secs_f64()))
}

fn c10() -> Outcome {
    let mut checked = 0;
    for p in [2u32, 3] {
        for n in 1..=3 {
            let reg = LatticeAction::regular(p.pow(n)).map_err(|e| e.to_string())?;
            for e in 0..=n {
                let sub = reg.restrict(p.pow(e)).map_err(|e| e.to_string())?;
                let (h1, h2) = (tate_h1(&sub), tate_h2(&sub));
                ensure(h1.is_empty() && h2.is_empty(), format!("Z/{}^{n} restricted by {}: {h1:?} {h2:?}", p, p.pow(e)))?;
                checked += 1;
            }
        }
    }
    for p in [2u32, 3, 5, 7] {
        let h2 = tate_h2(&LatticeAction::trivial(p).map_err(|e| e.to_string())?);
        ensure(h2 == vec![BigInt::from(p)], format!("trivial Z/{p}: H2 = {h2:?}"))?;
    }
    Ok(format!("{checked} regular restrictions vanish; H2(trivial Z/p) = (p) for p = 2, 3, 5, 7"))
}

fn c11(chains: &Chains) -> Outcome {
    let mut rows = Vec::new();
    for (p, n) in [(2u32, 2u32), (2, 3), (2, 4), (3, 2), (3, 3)] {
        let mut cells = Vec::new();
        for s in ["unit", "doubling"] {
            let chain = match chains.chains.get(&(p, n, s.to_string())) {
                Some(c) => c,
                // Same schedule as unit for these n.
                None => chains.get(p, n, "unit"),
            };
            let counts = step_counts(chain).map_err(|e| e.to_string())?;
            let total: usize = counts.iter().map(|c| c.symbolic).sum();
            let bound: BigInt = counts.iter().map(|c| c.bound.clone()).sum();
            let fin = chain.final_poly.as_ref().map_or("-".to_string(), |f| f.len().to_string());
            ensure(counts.iter().all(|c| c.within_bound()), format!("({p},{n},{s}) exceeds a step bound"))?;
            cells.push(format!("{s}: steps {} sum|a| {total} <= {bound}, final {fin}", counts.len()));
        }
        let unit = unit_chain_bound(p, n).map_err(|e| e.to_string())?;
        let asymptote = (p as f64).powf(0.5 + 1.5 * n as f64);
        rows.push(format!("({p},{n}) {}; unit chain bound {unit}; p^(1/2+3n/2) = {asymptote:.0}", cells.join("; ")));
    }
    let doubling_bound = step_bound(2, 4, 2).map_err(|e| e.to_string())? + step_bound(2, 2, 1).unwrap();
    Ok(format!(
        "asymptote not reproduced at desk scale; exact per-step bounds hold (doubling (2,4) bound {doubling_bound})\n        {}",
        rows.join("\n        ")
    ))
}

fn main() {
    // Panics are reported on the criterion's own line.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    let mut report = |id: &str, title: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {id:>3} {title} ({secs:.2}s): {detail}"),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {id:>3} {title} ({secs:.2}s): {why}");
            }
        }
    };

    report("1", "p=2 formula", &c1);
    report("2", "p=3 formula", &c2);
    report("3", "reduction equivalence", &c3);
    report("4", "short p=2 formula", &c4);
    let chains = Chains::build();
    let with_chains = |f: fn(&Chains) -> Outcome| {
        let chains = &chains;
        move || chains.as_ref().map_err(Clone::clone).and_then(f)
    };
    report("5", "norm one at every step", &with_chains(c5));
    report("6", "proof replay", &with_chains(c6));
    report("7", "coboundary decomposition", &c7);
    report("8", "step size bounds", &with_chains(c8));
    report("9", "numeric validation", &c9);
    report("10", "Tate cohomology of lattices", &c10);
    report("11", "size comparison across strategies", &with_chains(c11));

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
