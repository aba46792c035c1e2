//! Concrete rings satisfying the hypothesis: `R = Map(G, S)` with pointwise
//! multiplication and the translation action, `S` the integers or integer
//! matrices.
//!
//! The element `x ∈ R` is a function `f: G → S` whose sums over the cosets
//! of `E` are the unit of `S`, so `N_E(x) = 1` holds in `R`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::ChainResult;
use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::group_action::SubgroupSpec;
use crate::ncpoly::Poly;

/// Default bound on the free entries of a random instance.
pub const DEFAULT_ENTRY_BOUND: i64 = 3;

/// A square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMat {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(dim: usize) -> Self {
        IntMat { dim, entries: vec![BigInt::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        IntMat {
            dim,
            entries: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn add(&self, other: &IntMat) -> IntMat {
        IntMat {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &IntMat) -> IntMat {
        IntMat {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> IntMat {
        IntMat {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        let d = self.dim;
        let mut out = IntMat::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * &other.entries[k * d + j];
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMat::identity(self.dim)
    }

    fn to_i64_rows(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.entries.iter().map(|v| v.to_i64()).collect()
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// A function `G → S`, stored by its values at `σ^0, …, σ^{p^n - 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapValue(pub Vec<IntMat>);

impl MapValue {
    pub fn constant(order: usize, value: IntMat) -> Self {
        MapValue(vec![value; order])
    }

    /// `(σ^e f)(σ^s) = f(σ^{s+e})`.
    pub fn translate(&self, e: usize) -> MapValue {
        let mut v = self.0.clone();
        let len = v.len();
        v.rotate_left(e % len);
        MapValue(v)
    }

    pub fn is_constant_unit(&self) -> bool {
        self.0.iter().all(IntMat::is_identity)
    }

    fn add_assign(&mut self, other: &MapValue) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = a.add(b);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceKind {
    Scalar,
    Matrix(usize),
}

impl InstanceKind {
    pub fn dim(&self) -> usize {
        match self {
            InstanceKind::Scalar => 1,
            InstanceKind::Matrix(d) => *d,
        }
    }
}

/// A seeded choice of `f_x: G → S` with `N_E(f_x) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    ctx: GroupContext,
    kind: InstanceKind,
    seed: u64,
    values: Vec<IntMat>,
}

/// Draws `p - 1` free values per coset of `E` uniformly from `[-bound, bound]`
/// and sets the last coset member to `1 - (sum of the others)`.
pub fn random_instance(ctx: GroupContext, kind: InstanceKind, seed: u64) -> Result<InstanceSpec> {
    random_instance_with_bound(ctx, kind, seed, DEFAULT_ENTRY_BOUND)
}

pub fn random_instance_with_bound(
    ctx: GroupContext,
    kind: InstanceKind,
    seed: u64,
    bound: i64,
) -> Result<InstanceSpec> {
    let dim = kind.dim();
    if dim == 0 {
        return Err(Error::param("matrix dimension must be at least 1"));
    }
    if bound < 0 {
        return Err(Error::param("entry bound must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ctx.p() as usize;
    let coset_step = ctx.pow(ctx.n() - 1) as usize;
    let mut values = vec![IntMat::zero(dim); ctx.order() as usize];
    for j in 0..coset_step {
        let mut rest = IntMat::identity(dim);
        for i in 0..p - 1 {
            let rows: Vec<Vec<i64>> = (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect())
                .collect();
            let m = IntMat::from_rows(&rows);
            rest = rest.sub(&m);
            values[j + i * coset_step] = m;
        }
        values[j + (p - 1) * coset_step] = rest;
    }
    Ok(InstanceSpec { ctx, kind, seed, values })
}

impl InstanceSpec {
    /// An instance with explicitly given values; the coset constraint is checked.
    pub fn from_values(ctx: GroupContext, kind: InstanceKind, values: Vec<IntMat>) -> Result<Self> {
        if values.len() != ctx.order() as usize || values.iter().any(|v| v.dim() != kind.dim()) {
            return Err(Error::param("one matrix of the instance dimension per group element"));
        }
        let spec = InstanceSpec { ctx, kind, seed: 0, values };
        if !spec.satisfies_coset_constraint() {
            return Err(Error::param("values do not sum to the unit over every coset of E"));
        }
        Ok(spec)
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `f_x(σ^g)` for every `g`.
    pub fn values(&self) -> &[IntMat] {
        &self.values
    }

    pub fn x(&self) -> MapValue {
        MapValue(self.values.clone())
    }

    pub fn unit(&self) -> MapValue {
        MapValue::constant(self.values.len(), IntMat::identity(self.kind.dim()))
    }

    pub fn satisfies_coset_constraint(&self) -> bool {
        let coset_step = self.ctx.pow(self.ctx.n() - 1) as usize;
        let p = self.ctx.p() as usize;
        (0..self.values.len()).all(|g| {
            let sum = (0..p).fold(IntMat::zero(self.kind.dim()), |acc, i| {
                acc.add(&self.values[(g + i * coset_step) % self.values.len()])
            });
            sum.is_identity()
        })
    }

    /// A pair of generator translates `x[i]`, `x[j]` that fail to commute at
    /// some point, if any.
    pub fn noncommuting_pair(&self) -> Option<(u32, u32)> {
        let n = self.values.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.values[i], &self.values[j]);
                if a.mul(b) != b.mul(a) {
                    // At σ^0 the translates x[i] and x[j] take the values f(σ^i), f(σ^j).
                    return Some((i as u32, j as u32));
                }
            }
        }
        None
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            p: self.ctx.p(),
            n: self.ctx.n(),
            kind: match self.kind {
                InstanceKind::Scalar => "scalar".into(),
                InstanceKind::Matrix(_) => "matrix".into(),
            },
            dim: self.kind.dim(),
            seed: self.seed,
            values: self
                .values
                .iter()
                .map(|m| m.to_i64_rows().expect("instance entries are small"))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("document serializes")
    }

    pub fn from_json(s: &str) -> Result<InstanceSpec> {
        let doc: InstanceDocument = serde_json::from_str(s).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let ctx = GroupContext::new(doc.p, doc.n)?;
        let kind = match doc.kind.as_str() {
            "scalar" if doc.dim == 1 => InstanceKind::Scalar,
            "matrix" => InstanceKind::Matrix(doc.dim),
            other => {
                return Err(Error::Parse {
                    location: "kind".into(),
                    message: format!("unknown instance kind {other:?} with dim {}", doc.dim),
                })
            }
        };
        let d = doc.dim;
        let values = doc
            .values
            .iter()
            .enumerate()
            .map(|(g, flat)| {
                if flat.len() != d * d {
                    return Err(Error::Parse {
                        location: format!("values[{g}]"),
                        message: format!("expected {} entries", d * d),
                    });
                }
                Ok(IntMat::from_rows(&flat.chunks(d).map(<[i64]>::to_vec).collect::<Vec<_>>()))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec = InstanceSpec::from_values(ctx, kind, values)?;
        spec.seed = doc.seed;
        Ok(spec)
    }
}

/// `{"p", "n", "kind", "dim", "seed", "values": [[row-major entries], ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub p: u32,
    pub n: u32,
    pub kind: String,
    pub dim: usize,
    pub seed: u64,
    pub values: Vec<Vec<i64>>,
}

/// Evaluates `P` with letter `j` sent to `images[j]`: products pointwise in
/// `S` (order preserved), sums pointwise, integer coefficients by scaling.
pub fn evaluate_with(poly: &Poly, images: &[MapValue], dim: usize) -> MapValue {
    let points = images.first().map_or(0, |v| v.0.len());
    let mut out = MapValue::constant(points, IntMat::zero(dim));
    for (s, slot) in out.0.iter_mut().enumerate() {
        for (w, c) in poly.terms() {
            let mut prod = IntMat::identity(dim).scale(c);
            for &l in w.letters() {
                prod = prod.mul(&images[l as usize].0[s]);
            }
            *slot = slot.add(&prod);
        }
    }
    out
}

fn translates(base: &MapValue) -> Vec<MapValue> {
    (0..base.0.len()).map(|j| base.translate(j)).collect()
}

/// `x[j] ↦` the translate of `f_x` by `j`.
pub fn evaluate(poly: &Poly, inst: &InstanceSpec) -> Result<MapValue> {
    poly.ctx().ensure_same(&inst.ctx)?;
    Ok(evaluate_with(poly, &translates(&inst.x()), inst.kind.dim()))
}

/// Evaluates the final element of a chain step by step, without expanding
/// it over the base generators.
pub fn evaluate_chain(chain: &ChainResult, inst: &InstanceSpec) -> Result<MapValue> {
    chain.ctx.ensure_same(&inst.ctx)?;
    let mut value = inst.x();
    for step in &chain.steps {
        value = evaluate_with(&step.symbolic.output, &translates(&value), inst.kind.dim());
    }
    Ok(value)
}

/// `Σ_{h ∈ H} h(v)` as a function on `G`.
pub fn norm_value(value: &MapValue, h: &SubgroupSpec) -> MapValue {
    let mut sum = MapValue::constant(value.0.len(), IntMat::zero(value.0[0].dim()));
    for i in 0..h.order() as usize {
        sum.add_assign(&value.translate(i * h.step() as usize));
    }
    sum
}

/// Whether `N_H(P)` evaluates to the constant unit function on the instance.
pub fn check_numeric(poly: &Poly, inst: &InstanceSpec, h: &SubgroupSpec) -> Result<bool> {
    poly.ctx().ensure_same(&h.ctx())?;
    Ok(norm_value(&evaluate(poly, inst)?, h).is_constant_unit())
}

/// [`check_numeric`] for the final element of a chain.
pub fn check_numeric_chain(chain: &ChainResult, inst: &InstanceSpec) -> Result<bool> {
    let h = SubgroupSpec::whole(chain.ctx);
    Ok(norm_value(&evaluate_chain(chain, inst)?, &h).is_constant_unit())
}
