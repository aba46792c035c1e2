//! Exact verification in the universal ring.
//!
//! The universal ring is the free ring on the `x[j]` modulo the two-sided
//! ideal generated by `σ^j(N_E(x) - 1)`. Each relation is linear in a
//! distinct coset of generators, so eliminating one generator per coset
//! presents the quotient as the free ring on the surviving generators. The
//! normal form is substitution of the eliminated letters followed by
//! expansion, which is unique.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::group_action::{norm_op, SubgroupSpec};
use crate::ncpoly::{Accumulator, Poly, Word};

/// Substitution rules `x[e] ↦ 1 - Σ (other members of e's coset)`.
///
/// The cosets are those of a base subgroup `G_u` (by default the elementary
/// subgroup, `u = 1`); the eliminated member is the largest index of each
/// coset, so the survivors are exactly `[0, (p^u - 1)·p^{n-u})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    ctx: GroupContext,
    base: u32,
    /// For each letter: `None` if it survives, else the coset members it is
    /// replaced by (with coefficient -1, plus the constant 1).
    rules: Vec<Option<Vec<u32>>>,
}

impl RelationSet {
    /// The relations `σ^j(N_E(x)) = 1`.
    pub fn elementary(ctx: GroupContext) -> Self {
        Self::for_subgroup(&SubgroupSpec::elementary(ctx))
    }

    /// The relations `σ^j(N_U(x)) = 1` for a subgroup `U` of order ≥ p.
    pub fn for_subgroup(base: &SubgroupSpec) -> Self {
        let ctx = base.ctx();
        assert!(base.exponent() >= 1, "base subgroup must be nontrivial");
        let step = base.step();
        let size = base.order();
        let mut rules = vec![None; ctx.order() as usize];
        for j in 0..step {
            let eliminated = j + (size - 1) * step;
            let others: Vec<u32> = (0..size - 1).map(|i| j + i * step).collect();
            rules[eliminated as usize] = Some(others);
        }
        RelationSet { ctx, base: base.exponent(), rules }
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    /// Exponent `u` of the base subgroup whose norm is set to 1.
    pub fn base_exponent(&self) -> u32 {
        self.base
    }

    /// Number of rules, one per coset.
    pub fn len(&self) -> usize {
        self.rules.iter().filter(|r| r.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_eliminated(&self, letter: u32) -> bool {
        self.rules[letter as usize].is_some()
    }

    /// The eliminated generators in increasing order.
    pub fn eliminated(&self) -> impl Iterator<Item = u32> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_some())
            .map(|(j, _)| j as u32)
    }

    /// The replacement of `x[letter]` as a polynomial, or `None` if it survives.
    pub fn replacement(&self, letter: u32) -> Option<Poly> {
        let others = self.rules[letter as usize].as_ref()?;
        let terms = std::iter::once((BigInt::one(), vec![]))
            .chain(others.iter().map(|&o| (-BigInt::one(), vec![o])));
        Some(Poly::from_terms(self.ctx, terms).expect("letters in range"))
    }

    /// Adds `c · nf(word)` to `acc`, where the word's letters are first
    /// shifted by `offset`.
    fn expand_into(&self, acc: &mut Accumulator, letters: &[u32], offset: u32, c: i128, buf: &mut Vec<u32>) {
        let order = self.ctx.order();
        let shifted = |l: u32| {
            let s = l + offset;
            if s >= order {
                s - order
            } else {
                s
            }
        };
        buf.clear();
        self.expand_rec(acc, letters, &shifted, c, buf);
    }

    fn expand_rec(
        &self,
        acc: &mut Accumulator,
        rest: &[u32],
        shifted: &dyn Fn(u32) -> u32,
        c: i128,
        buf: &mut Vec<u32>,
    ) {
        // Copy the surviving prefix in one go.
        let mut i = 0;
        while i < rest.len() && self.rules[shifted(rest[i]) as usize].is_none() {
            buf.push(shifted(rest[i]));
            i += 1;
        }
        if i == rest.len() {
            acc.add_small(Word::from_letters(buf), c);
            buf.truncate(buf.len() - i);
            return;
        }
        let mark = buf.len();
        let tail = &rest[i + 1..];
        let others = self.rules[shifted(rest[i]) as usize].as_ref().unwrap();
        self.expand_rec(acc, tail, shifted, c, buf);
        for &o in others {
            buf.push(o);
            self.expand_rec(acc, tail, shifted, -c, buf);
            buf.truncate(mark);
        }
        buf.truncate(mark - i);
    }

    fn reduce_terms_into(&self, acc: &mut Accumulator, poly: &Poly, offset: u32, scale: i64) {
        let mut buf = Vec::new();
        for (w, c) in poly.terms() {
            match c.to_i128().and_then(|c| c.checked_mul(scale as i128)) {
                Some(c) if c.unsigned_abs() < (1u128 << 100) => {
                    self.expand_into(acc, w.letters(), offset, c, &mut buf)
                }
                _ => {
                    // Rare: expand with unit coefficient, then rescale.
                    let mut local = Accumulator::new();
                    self.expand_into(&mut local, w.letters(), offset, 1, &mut buf);
                    let c = c * BigInt::from(scale);
                    for (ow, oc) in local.finish(self.ctx).terms() {
                        acc.add(ow.clone(), &(oc * &c));
                    }
                }
            }
        }
    }

    /// Normal form of `P`: eliminated generators substituted and expanded.
    pub fn normal_form(&self, poly: &Poly) -> Poly {
        let mut acc = Accumulator::with_capacity(poly.len());
        self.reduce_terms_into(&mut acc, poly, 0, 1);
        acc.finish(self.ctx)
    }

    /// `normal_form(N_H(P))` without materializing `N_H(P)`.
    pub fn normal_form_of_norm(&self, poly: &Poly, h: &SubgroupSpec) -> Poly {
        let mut acc = Accumulator::with_capacity(poly.len());
        for (e, c) in norm_op(h).terms() {
            self.reduce_terms_into(&mut acc, poly, e, c);
        }
        acc.finish(self.ctx)
    }

    /// Whether `N_H(P)` reduces to the unit.
    pub fn is_norm_one(&self, poly: &Poly, h: &SubgroupSpec) -> bool {
        self.normal_form_of_norm(poly, h).is_one()
    }
}

/// Normal form modulo the elementary relations `σ^j(N_E(x) - 1)`.
pub fn normal_form(poly: &Poly) -> Poly {
    RelationSet::elementary(poly.ctx()).normal_form(poly)
}

/// `normal_form(N_H(P)) = 1` in the universal ring.
pub fn is_norm_one(poly: &Poly, h: &SubgroupSpec) -> Result<bool> {
    poly.ctx().ensure_same(&h.ctx())?;
    Ok(RelationSet::elementary(poly.ctx()).is_norm_one(poly, h))
}

/// How monomials are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Distinct words after combining like terms, before rewriting.
    Expanded,
    /// Distinct words of the normal form.
    Reduced,
}

pub fn monomial_count(poly: &Poly, mode: CountMode) -> usize {
    match mode {
        CountMode::Expanded => poly.len(),
        CountMode::Reduced => normal_form(poly).len(),
    }
}

fn check_step(p: u32, m: u32, k: u32) -> Result<()> {
    if k < 1 || 2 * k > m {
        return Err(Error::param(format!("step (m={m}, k={k}) violates 1 ≤ k ≤ m/2")));
    }
    if !crate::context::is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    Ok(())
}

/// Monomial bound for the element `a` of one lift step:
/// `p^{m-k}(p^{m-k} - 1)(p^k + 1) + 1`.
pub fn step_bound(p: u32, m: u32, k: u32) -> Result<BigInt> {
    check_step(p, m, k)?;
    let p = BigInt::from(p);
    let q: BigInt = Pow::pow(&p, m - k);
    let pk: BigInt = Pow::pow(&p, k);
    Ok(&q * (&q - 1u32) * (pk + 1u32) + 1u32)
}

/// Closed form of the bound summed over the unit-step chain `m = 2..n`:
/// `p(p+1)(p^{n-1} - 1)(p^n - 1)/(p^2 - 1) + n - 1`.
pub fn unit_chain_bound(p: u32, n: u32) -> Result<BigInt> {
    if !crate::context::is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n < 1 {
        return Err(Error::param("n must be at least 1"));
    }
    let pb = BigInt::from(p);
    let num: BigInt = &pb
        * (&pb + 1u32)
        * (Pow::pow(&pb, n - 1) - 1u32)
        * (Pow::pow(&pb, n) - 1u32);
    let den: BigInt = &pb * &pb - 1u32;
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "closed-form bound is not integral for p={p}, n={n}");
    Ok(q + (n - 1))
}

/// Sum of [`step_bound`] over the unit schedule, for cross-checking the closed form.
pub fn unit_chain_bound_by_steps(p: u32, n: u32) -> Result<BigInt> {
    (2..=n).try_fold(BigInt::zero(), |acc, m| Ok(acc + step_bound(p, m, 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32, n: u32) -> GroupContext {
        GroupContext::new(p, n).unwrap()
    }

    fn t(c: GroupContext, s: &str) -> Poly {
        Poly::parse_text(c, s).unwrap()
    }

    #[test]
    fn relation_set_shape() {
        for (p, n) in [(2, 2), (3, 2), (2, 3), (5, 2), (3, 3)] {
            let c = ctx(p, n);
            let rs = RelationSet::elementary(c);
            assert_eq!(rs.len() as u32, c.pow(n - 1));
            let elim: Vec<u32> = rs.eliminated().collect();
            let expected: Vec<u32> = ((p - 1) * c.pow(n - 1)..c.order()).collect();
            assert_eq!(elim, expected);
            for e in rs.eliminated() {
                let rep = rs.replacement(e).unwrap();
                assert!(rep.terms().iter().all(|(w, _)| w.letters().iter().all(|&l| !rs.is_eliminated(l))));
            }
        }
    }

    #[test]
    fn basic_normal_forms() {
        let c = ctx(2, 2);
        assert_eq!(normal_form(&Poly::var(c, 2)), t(c, "1 - s0(x)"));
        assert_eq!(normal_form(&t(c, "s0(x) + s2(x)")), Poly::one(c));
        assert_eq!(normal_form(&t(c, "s3(x)*s2(x)")), t(c, "1 - s0(x) - s1(x) + s1(x)*s0(x)"));
    }

    #[test]
    fn norm_one_examples() {
        let c = ctx(2, 2);
        assert!(is_norm_one(&Poly::var(c, 0), &SubgroupSpec::elementary(c)).unwrap());
        let g = SubgroupSpec::whole(c);
        assert!(!is_norm_one(&Poly::var(c, 0), &g).unwrap());
        let rs = RelationSet::elementary(c);
        assert_eq!(rs.normal_form_of_norm(&Poly::var(c, 0), &g), Poly::constant(c, 2));
        for p in [3, 5] {
            let c = ctx(p, 2);
            assert!(is_norm_one(&Poly::var(c, 0), &SubgroupSpec::elementary(c)).unwrap());
            assert_eq!(
                rs_norm(&Poly::var(c, 0), &SubgroupSpec::whole(c)),
                Poly::constant(c, p as i64)
            );
        }
    }

    fn rs_norm(p: &Poly, h: &SubgroupSpec) -> Poly {
        RelationSet::elementary(p.ctx()).normal_form_of_norm(p, h)
    }

    #[test]
    fn larger_base_subgroup() {
        let c = ctx(2, 3);
        let rs = RelationSet::for_subgroup(&SubgroupSpec::new(c, 2).unwrap());
        assert_eq!(rs.len(), 2);
        assert_eq!(rs.eliminated().collect::<Vec<_>>(), vec![6, 7]);
        assert_eq!(rs.normal_form(&Poly::var(c, 7)), t(c, "1 - s1(x) - s3(x) - s5(x)"));
    }

    #[test]
    fn counts() {
        let c = ctx(2, 2);
        assert_eq!(monomial_count(&Poly::one(c), CountMode::Expanded), 1);
        assert_eq!(monomial_count(&Poly::one(c), CountMode::Reduced), 1);
        assert_eq!(monomial_count(&t(c, "s0(x) + s2(x)"), CountMode::Expanded), 2);
        assert_eq!(monomial_count(&t(c, "s0(x) + s2(x)"), CountMode::Reduced), 1);
    }

    #[test]
    fn step_bounds() {
        assert_eq!(step_bound(2, 2, 1).unwrap(), BigInt::from(7));
        assert_eq!(step_bound(3, 2, 1).unwrap(), BigInt::from(25));
        assert_eq!(step_bound(2, 4, 2).unwrap(), BigInt::from(61));
        assert!(step_bound(2, 3, 2).is_err());
        assert!(step_bound(2, 2, 0).is_err());
        assert!(step_bound(4, 2, 1).is_err());
    }

    #[test]
    fn chain_bounds() {
        assert_eq!(unit_chain_bound(2, 1).unwrap(), BigInt::zero());
        assert_eq!(unit_chain_bound(2, 2).unwrap(), BigInt::from(7));
        assert_eq!(unit_chain_bound(3, 2).unwrap(), BigInt::from(25));
        for p in [2, 3, 5, 7] {
            for n in 1..7 {
                assert_eq!(unit_chain_bound(p, n).unwrap(), unit_chain_bound_by_steps(p, n).unwrap());
            }
        }
    }
}
