//! Replays the correctness argument of a lift step inside the co-induced
//! module `B = Hom(Z[G_m], R)`.
//!
//! An element of `B` is stored as its values on the group elements
//! `τ^0, …, τ^{p^m - 1}`, each a universal-ring polynomial, so every identity
//! is checked exactly with the normal form.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::construction::{build_a, LiftParams, Verification};
use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::group_action::{shift, Operator};
use crate::ncpoly::Poly;
use crate::oracle::RelationSet;

/// A map `G_m → R`, with `G_m` generated by `τ = σ^step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BElem {
    ctx: GroupContext,
    step: u32,
    values: Vec<Poly>,
}

impl BElem {
    fn from_values(ctx: GroupContext, step: u32, values: Vec<Poly>) -> Self {
        debug_assert_eq!(values.len() as u64 * step as u64, ctx.order() as u64);
        BElem { ctx, step, values }
    }

    pub fn zero(ctx: GroupContext, m: u32) -> Self {
        let step = ctx.pow(ctx.n() - m);
        Self::from_values(ctx, step, vec![Poly::zero(ctx); ctx.pow(m) as usize])
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    /// Shift amount of the generator `τ`.
    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The value at `τ^i`.
    pub fn value(&self, i: usize) -> &Poly {
        &self.values[i]
    }

    pub fn values(&self) -> &[Poly] {
        &self.values
    }

    /// `(τ^e · φ)(τ^s) = φ(τ^{s+e})`.
    pub fn act(&self, e: i64) -> BElem {
        let len = self.values.len() as i64;
        let e = e.rem_euclid(len) as usize;
        let mut values = self.values.clone();
        values.rotate_left(e);
        Self::from_values(self.ctx, self.step, values)
    }

    fn zip_with(&self, other: &BElem, f: impl Fn(&Poly, &Poly) -> Poly) -> BElem {
        assert_eq!((self.ctx, self.step), (other.ctx, other.step), "elements of different modules");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect();
        Self::from_values(self.ctx, self.step, values)
    }

    pub fn add(&self, other: &BElem) -> BElem {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &BElem) -> BElem {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> BElem {
        let c = c.into();
        let values = self.values.iter().map(|v| v.scale(c.clone())).collect();
        Self::from_values(self.ctx, self.step, values)
    }

    /// Applies an element of `Z[G]` whose exponents lie in `G_m`.
    pub fn apply(&self, op: &Operator) -> Result<BElem> {
        self.ctx.ensure_same(&op.ctx())?;
        let mut out = BElem::zero(self.ctx, self.exponent());
        for (e, c) in op.terms() {
            if e % self.step != 0 {
                return Err(Error::param(format!("σ^{e} is not in the subgroup generated by σ^{}", self.step)));
            }
            out = out.add(&self.act((e / self.step) as i64).scale(c));
        }
        Ok(out)
    }

    fn exponent(&self) -> u32 {
        self.ctx.n() - log_p(self.ctx.p(), self.step)
    }

    /// Entrywise normal form.
    pub fn normal_form(&self, relations: &RelationSet) -> BElem {
        let values = self.values.iter().map(|v| relations.normal_form(v)).collect();
        Self::from_values(self.ctx, self.step, values)
    }

    /// Total number of terms over all entries.
    pub fn term_count(&self) -> usize {
        self.values.iter().map(Poly::len).sum()
    }
}

fn log_p(p: u32, mut v: u32) -> u32 {
    let mut e = 0;
    while v > 1 {
        v /= p;
        e += 1;
    }
    e
}

/// `φ_P` with `φ_P(τ^i) = τ^i(P)` on `G_m`.
pub fn embed_in(poly: &Poly, m: u32) -> Result<BElem> {
    let ctx = poly.ctx();
    if m > ctx.n() {
        return Err(Error::param(format!("subgroup exponent {m} exceeds n = {}", ctx.n())));
    }
    let step = ctx.pow(ctx.n() - m);
    let values = (0..ctx.pow(m)).map(|i| shift(poly, i as i64 * step as i64)).collect();
    Ok(BElem::from_values(ctx, step, values))
}

/// `φ_P` on the whole group.
pub fn embed(poly: &Poly) -> BElem {
    embed_in(poly, poly.ctx().n()).expect("m = n")
}

/// Indicator of the subgroup `G_{m-k}` inside `G_m`.
pub fn make_phi(ctx: GroupContext, m: u32, k: u32) -> Result<BElem> {
    let params = LiftParams::new(ctx, m, k)?;
    let stride = ctx.pow(params.k()) as usize;
    let mut phi = BElem::zero(ctx, m);
    for i in (0..phi.len()).step_by(stride) {
        phi.values[i] = Poly::one(ctx);
    }
    Ok(phi)
}

/// `ψ(τ^0) = 0`, `ψ(τ^i) = ψ(τ^{i-1}) - φ(τ^{i-1}) + p^{m-2k} τ^{i-1}(x)`.
pub fn make_psi(x: &Poly, m: u32, k: u32) -> Result<BElem> {
    let ctx = x.ctx();
    let params = LiftParams::new(ctx, m, k)?;
    let phi = make_phi(ctx, m, k)?;
    let c = params.scalar();
    let tau = params.tau() as i64;
    let mut psi = BElem::zero(ctx, m);
    for i in 1..psi.len() {
        let prev = &psi.values[i - 1];
        let next = prev - phi.value(i - 1) + shift(x, (i as i64 - 1) * tau).scale(c.clone());
        psi.values[i] = next;
    }
    Ok(psi)
}

/// Result of checking one identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub eq: String,
    pub ok: bool,
    /// Terms left in the normal form of `lhs - rhs`, summed over entries.
    pub residual_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub m: u32,
    pub k: u32,
    pub checks: Vec<IdentityCheck>,
}

impl ReplayReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn check(&self, eq: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.eq == eq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.checks).expect("report serializes")
    }
}

struct Checker<'a> {
    relations: &'a RelationSet,
    checks: Vec<IdentityCheck>,
}

impl Checker<'_> {
    fn vanishes(&mut self, eq: &str, diff: &BElem) {
        let residual_terms = diff.normal_form(self.relations).term_count();
        self.push(eq, residual_terms);
    }

    fn push(&mut self, eq: &str, residual_terms: usize) {
        self.checks.push(IdentityCheck {
            eq: eq.to_string(),
            ok: residual_terms == 0,
            residual_terms,
        });
    }
}

/// Checks every identity of the lift-step argument for the input `x`,
/// which must be norm-one for `G_{m-k}`.
///
/// Named checks:
/// - `indicator_relative_norm`: `N_{G/U}(φ) = φ_1`
/// - `indicator_norm`: `N_G(φ) = p^{m-k} φ_1`
/// - `norm_of_difference`: `N_G(φ - c·φ_x) = 0`
/// - `psi_coboundary`: `φ = (1-τ)(ψ) + c·φ_x`
/// - `psi_jump`: `(τ^{p^k} - 1)(ψ) = φ_z`
/// - `w_invariance`: `(τ^{p^k} - 1)(ψ - φ_w) = 0`
/// - `jump_in_image`: `(1 - τ^{p^k})(ψ)` lies in the image of `R`
/// - `a_norm_one`: `φ_a = φ - (1-τ)(ψ - φ_w)`, `a` is `U`-invariant and `N_{G/U}(a) = 1`
/// Here `G = G_m`, `U = G_{m-k}` and `c = p^{m-2k}`.
pub fn check_identities(x: &Poly, m: u32, k: u32) -> Result<ReplayReport> {
    let ctx = x.ctx();
    let params = LiftParams::new(ctx, m, k)?;
    let relations = RelationSet::elementary(ctx);
    let nf = relations.normal_form_of_norm(x, &params.source());
    if !nf.is_one() {
        return Err(Error::Precondition {
            what: format!("input is not norm-one for the subgroup of order p^{}", m - k),
            residual: nf.to_text(),
        });
    }

    let step = build_a(x, m, k, Verification::Off)?;
    let tau = params.tau() as i64;
    let pk = ctx.pow(k) as i64;
    let c = params.scalar();

    let phi = make_phi(ctx, m, k)?;
    let psi = make_psi(x, m, k)?;
    let phi_x = embed_in(x, m)?;
    let phi_1 = embed_in(&Poly::one(ctx), m)?;
    let phi_z = embed_in(&step.z, m)?;
    let phi_w = embed_in(&step.w, m)?;
    let phi_a = embed_in(&step.a, m)?;

    let rel_norm = params.relative_norm();
    let full_norm = crate::group_action::partial_sum_op(ctx, params.tau() as u32, ctx.pow(m));
    let one_minus_tau = Operator::from_pairs(ctx, [(1, 0), (-1, tau)])?;
    let tau_pk_minus_one = Operator::from_pairs(ctx, [(1, pk * tau), (-1, 0)])?;

    let mut ck = Checker { relations: &relations, checks: Vec::new() };

    ck.vanishes("indicator_relative_norm", &phi.apply(&rel_norm)?.sub(&phi_1));
    let p_mk = ctx.pow(m - k);
    ck.vanishes("indicator_norm", &phi.apply(&full_norm)?.sub(&phi_1.scale(p_mk)));
    ck.vanishes("norm_of_difference", &phi.sub(&phi_x.scale(c.clone())).apply(&full_norm)?);
    let coboundary = psi.apply(&one_minus_tau)?.add(&phi_x.scale(c.clone()));
    ck.vanishes("psi_coboundary", &phi.sub(&coboundary));
    ck.vanishes("psi_jump", &psi.apply(&tau_pk_minus_one)?.sub(&phi_z));
    let psi_minus_w = psi.sub(&phi_w);
    ck.vanishes("w_invariance", &psi_minus_w.apply(&tau_pk_minus_one)?);

    // Membership in the image of R: β = φ_{β(1)}.
    let beta = psi.apply(&tau_pk_minus_one)?.scale(-1);
    let beta_embedded = embed_in(beta.value(0), m)?;
    ck.vanishes("jump_in_image", &beta.sub(&beta_embedded));

    let l3_identity = phi.sub(&psi_minus_w.apply(&one_minus_tau)?).sub(&phi_a);
    let mut l3 = l3_identity.normal_form(&relations).term_count();
    let invariance = shift(&step.a, pk * tau) - &step.a;
    l3 += relations.normal_form(&invariance).len();
    let rel_norm_a = crate::group_action::apply_operator(&rel_norm, &step.a)? - Poly::one(ctx);
    l3 += relations.normal_form(&rel_norm_a).len();
    ck.push("a_norm_one", l3);

    Ok(ReplayReport { m, k, checks: ck.checks })
}
