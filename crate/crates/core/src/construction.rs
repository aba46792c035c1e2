//! Lift steps and their recursion from the elementary subgroup to `Z/p^n`.
//!
//! A lift step `(m, k)` takes `X` with `N_{G_{m-k}}(X) = 1` and produces
//! `a` with `N_{G_m}(a·X) = 1`. Inside the ambient group `Z/p^n` the
//! subgroup `G_m` is generated by `τ = σ^{p^{n-m}}`; with `m = n` this is the
//! plain statement for `G` itself.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::group_action::{apply_operator, shift, Operator, SubgroupSpec};
use crate::ncpoly::{Accumulator, Poly, PolyDocument, TermDocument};
use crate::oracle::{monomial_count, CountMode, RelationSet};

/// A validated lift step `(m, k)` with `1 ≤ k ≤ m/2`, `m ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftParams {
    ctx: GroupContext,
    m: u32,
    k: u32,
}

impl LiftParams {
    pub fn new(ctx: GroupContext, m: u32, k: u32) -> Result<Self> {
        if k < 1 || 2 * k > m || m > ctx.n() {
            return Err(Error::param(format!(
                "lift step (m={m}, k={k}) needs 1 ≤ k ≤ m/2 and m ≤ n = {}",
                ctx.n()
            )));
        }
        Ok(LiftParams { ctx, m, k })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Shift amount of `τ`, the generator of `G_m`.
    pub fn tau(&self) -> u32 {
        self.ctx.pow(self.ctx.n() - self.m)
    }

    /// Shift amount of `τ^{p^k}`, the generator of `G_{m-k}`.
    pub fn inner_step(&self) -> u32 {
        self.ctx.pow(self.ctx.n() - self.m + self.k)
    }

    /// `p^{m-2k}`, the scalar in front of `X`.
    pub fn scalar(&self) -> BigInt {
        BigInt::from(self.ctx.pow(self.m - 2 * self.k))
    }

    pub fn target(&self) -> SubgroupSpec {
        SubgroupSpec::new(self.ctx, self.m).expect("m ≤ n")
    }

    /// `G_{m-k}`, the subgroup the input is norm-one for.
    pub fn source(&self) -> SubgroupSpec {
        SubgroupSpec::new(self.ctx, self.m - self.k).expect("m - k ≤ n")
    }

    /// `Σ_{j < p^k} τ^j`, the relative norm `N_{G_m/G_{m-k}}`.
    pub fn relative_norm(&self) -> Operator {
        crate::group_action::partial_sum_op(self.ctx, self.tau(), self.ctx.pow(self.k))
    }
}

/// Everything produced by one lift step.
#[derive(Debug, Clone)]
pub struct LiftStepResult {
    pub m: u32,
    pub k: u32,
    /// Norm-one element for `G_{m-k}`.
    pub input: Poly,
    pub z: Poly,
    pub w: Poly,
    pub a: Poly,
    /// `a · input`, norm-one for `G_m`.
    pub output: Poly,
}

impl LiftStepResult {
    pub fn params(&self) -> LiftParams {
        LiftParams::new(self.input.ctx(), self.m, self.k).expect("validated at construction")
    }
}

fn residual_error(what: impl Into<String>, residual: &Poly) -> Error {
    Error::Precondition {
        what: what.into(),
        residual: residual.to_text(),
    }
}

/// `z = p^{m-2k} (1 + τ + ⋯ + τ^{p^k - 1})(X) - 1`.
pub fn build_z(x: &Poly, m: u32, k: u32) -> Result<Poly> {
    let params = LiftParams::new(x.ctx(), m, k)?;
    Ok(z_for(x, &params))
}

fn z_for(x: &Poly, params: &LiftParams) -> Poly {
    let orbit = apply_operator(&params.relative_norm(), x).expect("same context");
    orbit.scale(params.scalar()) - Poly::one(x.ctx())
}

/// `Σ_{i=1}^{r-1} (1 + t + ⋯ + t^{i-1})(x · t^{-i}(z))`, the explicit
/// preimage of `z` under `t - 1` when `N(x) = 1` and `N(z) = 0`.
fn coboundary_preimage(x: &Poly, z: &Poly, t: u32, r: u32) -> Poly {
    let ctx = x.ctx();
    if r < 2 {
        return Poly::zero(ctx);
    }
    // Regroup by the power of t: w = Σ_{l=0}^{r-2} t^l (Σ_{i>l} x·t^{-i}(z)).
    let y = |i: u32| x * &shift(z, -(i as i64) * t as i64);
    let mut acc = Accumulator::new();
    let mut suffix = Poly::zero(ctx);
    for l in (0..r - 1).rev() {
        suffix = &suffix + &y(l + 1);
        for (w, c) in shift(&suffix, l as i64 * t as i64).terms() {
            acc.add(w.clone(), c);
        }
    }
    acc.finish(ctx)
}

/// `w = Σ_{i=1}^{p^{m-k}-1} (1 + τ^{p^k} + ⋯ + τ^{(i-1)p^k})(X · τ^{-i p^k}(z))`.
pub fn build_w(x: &Poly, z: &Poly, m: u32, k: u32) -> Result<Poly> {
    x.ctx().ensure_same(&z.ctx())?;
    let params = LiftParams::new(x.ctx(), m, k)?;
    Ok(w_for(x, z, &params))
}

fn w_for(x: &Poly, z: &Poly, params: &LiftParams) -> Poly {
    coboundary_preimage(x, z, params.inner_step(), params.ctx.pow(params.m - params.k))
}

/// Whether lift steps check their input and output in the universal ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Off,
    On,
}

/// One lift step: `a = p^{m-2k} X + (1 - τ)(w)`, output `a·X`.
///
/// With verification on, `X` must be norm-one for `G_{m-k}` and the output
/// is checked to be norm-one for `G_m`.
pub fn build_a(x: &Poly, m: u32, k: u32, verify: Verification) -> Result<LiftStepResult> {
    let params = LiftParams::new(x.ctx(), m, k)?;
    let relations = RelationSet::elementary(x.ctx());
    if verify == Verification::On {
        let nf = relations.normal_form_of_norm(x, &params.source());
        if !nf.is_one() {
            return Err(residual_error(
                format!("input is not norm-one for the subgroup of order p^{}", m - k),
                &nf,
            ));
        }
    }
    let step = lift(x, &params);
    if verify == Verification::On {
        check_output(&step, &relations)?;
    }
    Ok(step)
}

fn check_output(step: &LiftStepResult, relations: &RelationSet) -> Result<()> {
    let nf = relations.normal_form_of_norm(&step.output, &step.params().target());
    if nf.is_one() {
        Ok(())
    } else {
        Err(residual_error(
            format!("lift step (m={}, k={}) output is not norm-one", step.m, step.k),
            &nf,
        ))
    }
}

fn lift(x: &Poly, params: &LiftParams) -> LiftStepResult {
    let z = z_for(x, params);
    let w = w_for(x, &z, params);
    let tau_w = shift(&w, params.tau() as i64);
    let a = x.scale(params.scalar()) + (&w - &tau_w);
    let output = &a * x;
    LiftStepResult {
        m: params.m,
        k: params.k,
        input: x.clone(),
        z,
        w,
        a,
        output,
    }
}

/// Writes `z` as `(t - 1)(w)` for `t` the generator of `H`, given a witness
/// with `N_H(x) = 1` and `N_H(z) = 0`.
pub fn coboundary_decompose(x_witness: &Poly, z: &Poly, h: &SubgroupSpec) -> Result<Poly> {
    x_witness.ctx().ensure_same(&z.ctx())?;
    x_witness.ctx().ensure_same(&h.ctx())?;
    let relations = RelationSet::elementary(h.ctx());
    let nx = relations.normal_form_of_norm(x_witness, h);
    if !nx.is_one() {
        return Err(residual_error("witness is not norm-one for the subgroup", &nx));
    }
    let nz = relations.normal_form_of_norm(z, h);
    if !nz.is_zero() {
        return Err(residual_error("the norm of z does not vanish", &nz));
    }
    Ok(coboundary_preimage(x_witness, z, h.step(), h.order()))
}

/// How the exponents `1 = m_0 < m_1 < ⋯ < m_r = n` are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// `m = 2, 3, …, n`, always `k = 1`.
    Unit,
    /// `m` doubles (capped at `n`), `k = m_next - m_prev`.
    Doubling,
    /// Explicit `(m, k)` steps.
    Explicit(Vec<(u32, u32)>),
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Doubling
    }
}

impl Strategy {
    /// The list of `(m, k)` steps for exponent `n`, validated.
    pub fn schedule(&self, n: u32) -> Result<Vec<(u32, u32)>> {
        let steps = match self {
            Strategy::Unit => (2..=n).map(|m| (m, 1)).collect(),
            Strategy::Doubling => {
                let mut out = Vec::new();
                let mut cur = 1;
                while cur < n {
                    let next = (2 * cur).min(n);
                    out.push((next, next - cur));
                    cur = next;
                }
                out
            }
            Strategy::Explicit(steps) => steps.clone(),
        };
        let mut cur = 1;
        for &(m, k) in &steps {
            if k < 1 || 2 * k > m {
                return Err(Error::param(format!("step (m={m}, k={k}) violates 1 ≤ k ≤ m/2")));
            }
            if m - k != cur {
                return Err(Error::param(format!(
                    "step (m={m}, k={k}) starts from exponent {} but the chain is at {cur}",
                    m - k
                )));
            }
            cur = m;
        }
        if cur != n {
            return Err(Error::param(format!("schedule ends at exponent {cur}, expected {n}")));
        }
        Ok(steps)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Unit => f.write_str("unit"),
            Strategy::Doubling => f.write_str("doubling"),
            Strategy::Explicit(steps) => {
                let parts: Vec<String> = steps.iter().map(|(m, k)| format!("{m}:{k}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `unit`, `doubling`, or a comma list of `m:k` pairs such as `2:1,4:2`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unit" => Ok(Strategy::Unit),
            "doubling" => Ok(Strategy::Doubling),
            "" => Ok(Strategy::Explicit(Vec::new())),
            list => list
                .split(',')
                .map(|pair| {
                    let (m, k) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::parse("strategy", format!("expected m:k, got {pair:?}")))?;
                    let parse = |v: &str| {
                        v.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::parse("strategy", format!("not an integer: {v:?}")))
                    };
                    Ok((parse(m)?, parse(k)?))
                })
                .collect::<Result<Vec<_>>>()
                .map(Strategy::Explicit),
        }
    }
}

/// Knobs for [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub verify: Verification,
    /// Expand a step over the base generators only while the estimated
    /// number of output terms stays below this.
    pub expand_limit: usize,
    /// Run the direct universal-ring check on an expanded output only while
    /// `terms × |G_m|` stays below this.
    pub direct_check_limit: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            verify: Verification::On,
            expand_limit: 4_000_000,
            direct_check_limit: 4_000_000,
        }
    }
}

impl GenerateOptions {
    pub fn with_verification(verify: Verification) -> Self {
        GenerateOptions { verify, ..Self::default() }
    }
}

/// Outcome of the checks run on one step. `None` means not run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepChecks {
    /// `N_{G_m}(a·y) = 1` modulo `N_{G_{m-k}}(y) = 1`, with `y` a free generator.
    pub certificate: Option<bool>,
    /// `N_{G_m}(output) = 1` modulo the elementary relations, on the expanded output.
    pub direct: Option<bool>,
}

/// One step of a chain.
///
/// `symbolic` is the lift of a free generator `y = x[0]`: its letters stand
/// for the shifts of the step input. `expanded` is the same step over the base
/// generators, present while it stays small enough to materialize.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub m: u32,
    pub k: u32,
    pub symbolic: LiftStepResult,
    pub expanded: Option<LiftStepResult>,
    pub checks: StepChecks,
}

/// A full chain of lift steps from `E` to `G`.
#[derive(Debug, Clone)]
pub struct ChainResult {
    pub ctx: GroupContext,
    pub strategy: Strategy,
    pub steps: Vec<ChainStep>,
    /// The norm-one element for `G` over the base generators, when expanded.
    pub final_poly: Option<Poly>,
}

impl ChainResult {
    /// The `a` factors of every step, each in the shifts of its step input.
    pub fn symbolic_factors(&self) -> Vec<(u32, u32, &Poly)> {
        self.steps.iter().map(|s| (s.m, s.k, &s.symbolic.a)).collect()
    }

    /// Whether every step is certified norm-one for its target subgroup.
    pub fn certified(&self) -> bool {
        self.steps.iter().all(|s| s.checks.certificate == Some(true))
    }
}

/// Relations of the universal ring for one step: `σ^j(N_{G_{m-k}}(y)) = 1`.
pub fn step_relations(params: &LiftParams) -> RelationSet {
    RelationSet::for_subgroup(&params.source())
}

/// Checks `N_{G_m}(a·y) = 1` in the step's universal ring.
///
/// Substituting `y ↦ X` for any `X` with `N_{G_{m-k}}(X) = 1` is a
/// σ-equivariant ring map into the elementary universal ring, so a passing
/// certificate proves the expanded output norm-one.
pub fn certify_step(ctx: GroupContext, m: u32, k: u32, a_symbolic: &Poly) -> Result<bool> {
    ctx.ensure_same(&a_symbolic.ctx())?;
    let params = LiftParams::new(ctx, m, k)?;
    let output = a_symbolic * &Poly::var(ctx, 0);
    Ok(step_relations(&params).is_norm_one(&output, &params.target()))
}

/// Upper estimate of the term count of `a(X)·X` expanded over `X`'s terms.
fn expansion_estimate(a_symbolic: &Poly, input_len: usize) -> usize {
    a_symbolic.terms().iter().fold(0usize, |acc, (w, _)| {
        let mut t = input_len;
        for _ in 0..w.degree() {
            t = t.saturating_mul(input_len);
        }
        acc.saturating_add(t)
    })
}

/// Norm-one element for `Z/p^n` as a polynomial in the `σ^j(x)`, where
/// `x` is norm-one for the elementary subgroup.
///
/// Every step is computed symbolically; steps are also expanded over the
/// base generators while the expansion stays within `expand_limit`. With
/// verification on, each step is certified, and expanded outputs are also
/// checked directly when affordable.
pub fn generate(p: u32, n: u32, strategy: &Strategy, options: GenerateOptions) -> Result<ChainResult> {
    let ctx = GroupContext::new(p, n)?;
    let schedule = strategy.schedule(n)?;
    let relations = RelationSet::elementary(ctx);
    let generic = Poly::var(ctx, 0);
    let mut current = Some(generic.clone());
    let mut steps = Vec::with_capacity(schedule.len());
    for (m, k) in schedule {
        let params = LiftParams::new(ctx, m, k)?;
        let symbolic = lift(&generic, &params);
        let expanded = match current.take() {
            Some(x) if expansion_estimate(&symbolic.a, x.len()) <= options.expand_limit => {
                Some(lift(&x, &params))
            }
            _ => None,
        };
        let mut checks = StepChecks::default();
        if options.verify == Verification::On {
            let ok = step_relations(&params).is_norm_one(&symbolic.output, &params.target());
            checks.certificate = Some(ok);
            if !ok {
                let nf = step_relations(&params).normal_form_of_norm(&symbolic.output, &params.target());
                return Err(residual_error(format!("lift step (m={m}, k={k}) fails its certificate"), &nf));
            }
            if let Some(e) = &expanded {
                if e.output.len().saturating_mul(params.target().order() as usize) <= options.direct_check_limit {
                    check_output(e, &relations)?;
                    checks.direct = Some(true);
                }
            }
        }
        current = expanded.as_ref().map(|e| e.output.clone());
        steps.push(ChainStep { m, k, symbolic, expanded, checks });
    }
    Ok(ChainResult {
        ctx,
        strategy: strategy.clone(),
        steps,
        final_poly: current,
    })
}

/// JSON form of a chain: the `a` factor of every step, each over the shifts
/// of its step input, plus the final element when it was expanded.
///
/// `{"p", "n", "strategy", "steps": [{"m", "k", "a": [terms]}], "final": [terms]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDocument {
    pub p: u32,
    pub n: u32,
    pub strategy: String,
    pub steps: Vec<StepDocument>,
    #[serde(rename = "final", default, skip_serializing_if = "Option::is_none")]
    pub final_terms: Option<Vec<TermDocument>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDocument {
    pub m: u32,
    pub k: u32,
    pub a: Vec<TermDocument>,
}

impl ChainResult {
    pub fn to_document(&self, include_final: bool) -> ChainDocument {
        ChainDocument {
            p: self.ctx.p(),
            n: self.ctx.n(),
            strategy: self.strategy.to_string(),
            steps: self
                .steps
                .iter()
                .map(|s| StepDocument { m: s.m, k: s.k, a: s.symbolic.a.to_document().terms })
                .collect(),
            final_terms: self
                .final_poly
                .as_ref()
                .filter(|_| include_final)
                .map(|f| f.to_document().terms),
        }
    }
}

fn poly_at(ctx: GroupContext, terms: &[TermDocument], prefix: &str) -> Result<Poly> {
    let doc = PolyDocument { p: ctx.p(), n: ctx.n(), terms: terms.to_vec() };
    Poly::from_document(&doc).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse { location: format!("{prefix}.{location}"), message },
        other => other,
    })
}

impl ChainDocument {
    pub fn from_json(s: &str) -> Result<ChainDocument> {
        serde_json::from_str(s)
            .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    pub fn ctx(&self) -> Result<GroupContext> {
        GroupContext::new(self.p, self.n)
    }

    /// The `(m, k, a)` steps with `a` parsed.
    pub fn factors(&self) -> Result<Vec<(u32, u32, Poly)>> {
        let ctx = self.ctx()?;
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((s.m, s.k, poly_at(ctx, &s.a, &format!("steps[{i}].a"))?)))
            .collect()
    }

    pub fn final_poly(&self) -> Result<Option<Poly>> {
        let ctx = self.ctx()?;
        self.final_terms.as_ref().map(|t| poly_at(ctx, t, "final")).transpose()
    }
}

/// Outcome of [`certify_chain`]: the first failing step, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainVerdict {
    pub failed_step: Option<(u32, u32)>,
    /// Normal form of the failing step's norm, as text.
    pub residual: Option<String>,
}

impl ChainVerdict {
    pub fn passed(&self) -> bool {
        self.failed_step.is_none()
    }
}

/// Certifies every step of a chain that must end at `G_{target_m}`.
///
/// The composed element `X_r` with `X_0 = x`, `X_{i+1} = a_i(X_i)·X_i` is then
/// norm-one for `G_{target_m}` in the elementary universal ring.
pub fn certify_chain(ctx: GroupContext, factors: &[(u32, u32, Poly)], target_m: u32) -> Result<ChainVerdict> {
    let schedule: Vec<(u32, u32)> = factors.iter().map(|(m, k, _)| (*m, *k)).collect();
    Strategy::Explicit(schedule).schedule(target_m)?;
    for (m, k, a) in factors {
        let params = LiftParams::new(ctx, *m, *k)?;
        let output = a.checked_mul(&Poly::var(ctx, 0))?;
        let relations = step_relations(&params);
        let nf = relations.normal_form_of_norm(&output, &params.target());
        if !nf.is_one() {
            return Ok(ChainVerdict {
                failed_step: Some((*m, *k)),
                residual: Some((nf - Poly::one(ctx)).to_text()),
            });
        }
    }
    Ok(ChainVerdict { failed_step: None, residual: None })
}

/// Substitutes the step factors into each other, giving the final element
/// over the base generators.
pub fn compose_chain(ctx: GroupContext, factors: &[(u32, u32, Poly)]) -> Result<Poly> {
    let mut x = Poly::var(ctx, 0);
    for (_, _, a) in factors {
        let shifts: Vec<Poly> = (0..ctx.order()).map(|j| shift(&x, j as i64)).collect();
        x = a.substitute(&shifts)?.checked_mul(&x)?;
    }
    Ok(x)
}

/// Monomial counts of `a` for one step, compared against its bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCount {
    pub m: u32,
    pub k: u32,
    /// `a` in the shifts of the step input, like terms combined.
    pub symbolic: usize,
    /// `a` over the base generators, like terms combined (when expanded).
    pub expanded: Option<usize>,
    /// `a` over the base generators after normal form (when expanded).
    pub reduced: Option<usize>,
    pub bound: BigInt,
}

impl StepCount {
    pub fn within_bound(&self) -> bool {
        BigInt::from(self.symbolic) <= self.bound
    }
}

pub fn step_counts(chain: &ChainResult) -> Result<Vec<StepCount>> {
    chain
        .steps
        .iter()
        .map(|s| {
            Ok(StepCount {
                m: s.m,
                k: s.k,
                symbolic: monomial_count(&s.symbolic.a, CountMode::Expanded),
                expanded: s.expanded.as_ref().map(|e| monomial_count(&e.a, CountMode::Expanded)),
                reduced: s.expanded.as_ref().map(|e| monomial_count(&e.a, CountMode::Reduced)),
                bound: crate::oracle::step_bound(chain.ctx.p(), s.m, s.k)?,
            })
        })
        .collect()
}
