//! The group ring `Z[Z/p^n]` acting on polynomials by index shifts.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::ncpoly::{Accumulator, Poly};

/// `σ^e` applied to `P`: every letter `j` becomes `(j + e) mod p^n`.
pub fn shift(poly: &Poly, e: i64) -> Poly {
    let ctx = poly.ctx();
    let e = ctx.reduce(e);
    if e == 0 {
        return poly.clone();
    }
    let order = ctx.order();
    poly.map_words(|j| {
        let s = j + e;
        if s >= order {
            s - order
        } else {
            s
        }
    })
}

/// A formal integer combination of powers of `σ`, exponents reduced mod `p^n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Operator {
    ctx: GroupContext,
    coeffs: BTreeMap<u32, i64>,
}

impl Operator {
    pub fn zero(ctx: GroupContext) -> Self {
        Operator { ctx, coeffs: BTreeMap::new() }
    }

    pub fn identity(ctx: GroupContext) -> Self {
        Self::power(ctx, 0)
    }

    /// `σ^e`; negative exponents denote the inverse automorphism.
    pub fn power(ctx: GroupContext, e: i64) -> Self {
        Self::from_pairs(ctx, [(1, e)]).expect("single coefficient cannot overflow")
    }

    /// Sums `c·σ^e` over the given `(c, e)` pairs.
    pub fn from_pairs(ctx: GroupContext, pairs: impl IntoIterator<Item = (i64, i64)>) -> Result<Self> {
        let mut op = Operator::zero(ctx);
        for (c, e) in pairs {
            op.add_term(ctx.reduce(e), c)?;
        }
        Ok(op)
    }

    fn add_term(&mut self, e: u32, c: i64) -> Result<()> {
        let slot = self.coeffs.entry(e).or_insert(0);
        *slot = slot.checked_add(c).ok_or(Error::Overflow("operator coefficient"))?;
        if *slot == 0 {
            self.coeffs.remove(&e);
        }
        Ok(())
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coeff(&self, e: i64) -> i64 {
        self.coeffs.get(&self.ctx.reduce(e)).copied().unwrap_or(0)
    }

    pub fn checked_add(&self, other: &Operator) -> Result<Operator> {
        self.ctx.ensure_same(&other.ctx)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c)?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Operator) -> Result<Operator> {
        self.ctx.ensure_same(&other.ctx)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c.checked_neg().ok_or(Error::Overflow("operator coefficient"))?)?;
        }
        Ok(out)
    }

    /// Convolution product: `(self ∘ other)(P) = self(other(P))`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.ctx.ensure_same(&other.ctx)?;
        let mut out = Operator::zero(self.ctx);
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                let c = c1.checked_mul(c2).ok_or(Error::Overflow("operator product"))?;
                out.add_term(self.ctx.reduce(e1 as i64 + e2 as i64), c)?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> Result<Operator> {
        let mut out = Operator::zero(self.ctx);
        for (e, a) in self.terms() {
            out.add_term(e, a.checked_mul(c).ok_or(Error::Overflow("operator scale"))?)?;
        }
        Ok(out)
    }

    pub fn to_document(&self) -> OperatorDocument {
        OperatorDocument {
            op: self.terms().map(|(e, c)| OperatorTerm { c, e }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("document serializes")
    }

    pub fn from_json(ctx: GroupContext, s: &str) -> Result<Operator> {
        let doc: OperatorDocument = serde_json::from_str(s).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Operator::from_pairs(ctx, doc.op.into_iter().map(|t| (t.c, t.e as i64)))
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms().map(|(e, c)| format!("{c}*σ^{e}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `{"op": [{"c": int, "e": int}, ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub op: Vec<OperatorTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub c: i64,
    pub e: u32,
}

/// `Σ_e A[e] · σ^e(P)`.
pub fn apply_operator(op: &Operator, poly: &Poly) -> Result<Poly> {
    op.ctx.ensure_same(&poly.ctx())?;
    let mut acc = Accumulator::with_capacity(poly.len() * op.coeffs.len());
    for (e, c) in op.terms() {
        let shifted = shift(poly, e as i64);
        for (w, a) in shifted.terms() {
            acc.add(w.clone(), &(a * BigInt::from(c)));
        }
    }
    Ok(acc.finish(poly.ctx()))
}

/// The subgroup `G_m = ⟨σ^{p^{n-m}}⟩` of order `p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgroupSpec {
    ctx: GroupContext,
    m: u32,
}

impl SubgroupSpec {
    pub fn new(ctx: GroupContext, m: u32) -> Result<Self> {
        if m > ctx.n() {
            return Err(Error::param(format!("subgroup exponent {m} exceeds n = {}", ctx.n())));
        }
        Ok(SubgroupSpec { ctx, m })
    }

    /// The whole group.
    pub fn whole(ctx: GroupContext) -> Self {
        SubgroupSpec { ctx, m: ctx.n() }
    }

    /// The unique subgroup of order `p`.
    pub fn elementary(ctx: GroupContext) -> Self {
        SubgroupSpec { ctx, m: 1 }
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn exponent(&self) -> u32 {
        self.m
    }

    /// `p^{n-m}`: the generator of the subgroup is `σ^step`.
    pub fn step(&self) -> u32 {
        self.ctx.pow(self.ctx.n() - self.m)
    }

    pub fn order(&self) -> u32 {
        self.ctx.pow(self.m)
    }
}

/// `N_H = Σ_{h ∈ H} h`.
pub fn norm_op(h: &SubgroupSpec) -> Operator {
    partial_sum_op(h.ctx, h.step(), h.order())
}

/// `Σ_{l < count} σ^{d·l}`; zero for `count = 0`, identity for `count = 1`.
pub fn partial_sum_op(ctx: GroupContext, d: u32, count: u32) -> Operator {
    let mut op = Operator::zero(ctx);
    for l in 0..count {
        op.add_term(ctx.reduce(d as i64 * l as i64), 1)
            .expect("coefficients bounded by count");
    }
    op
}
