//! Sparse polynomials with integer coefficients in the free noncommutative
//! ring on the generators `x[j] = σ^j(x)`, `0 ≤ j < p^n`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::context::GroupContext;
use crate::error::{Error, Result};

/// A monomial: a finite sequence of generator indices. The empty word is 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(SmallVec<[u32; 8]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn letter(j: u32) -> Self {
        let mut v = SmallVec::new();
        v.push(j);
        Word(v)
    }

    pub fn from_letters(letters: &[u32]) -> Self {
        Word(SmallVec::from_slice(letters))
    }

    #[inline]
    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = SmallVec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub(crate) fn map_letters(&self, f: impl Fn(u32) -> u32) -> Word {
        Word(self.0.iter().map(|&l| f(l)).collect())
    }
}

impl From<SmallVec<[u32; 8]>> for Word {
    fn from(v: SmallVec<[u32; 8]>) -> Self {
        Word(v)
    }
}

impl Ord for Word {
    /// Degree first, then lexicographic on letters.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Collects `(word, coefficient)` contributions and combines like terms.
///
/// Coefficients stay in `i128` until a sum overflows, after which that word
/// moves to the arbitrary-precision map. A word lives in at most one map.
#[derive(Default)]
pub(crate) struct Accumulator {
    small: FxHashMap<Word, i128>,
    big: FxHashMap<Word, BigInt>,
}

impl Accumulator {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn with_capacity(n: usize) -> Self {
        Accumulator {
            small: FxHashMap::with_capacity_and_hasher(n, Default::default()),
            big: FxHashMap::default(),
        }
    }

    #[inline]
    pub(crate) fn add_small(&mut self, w: Word, c: i128) {
        if !self.big.is_empty() {
            if let Some(b) = self.big.get_mut(&w) {
                *b += c;
                return;
            }
        }
        match self.small.get_mut(&w) {
            Some(slot) => match slot.checked_add(c) {
                Some(s) => *slot = s,
                None => {
                    let prev = self.small.remove(&w).unwrap();
                    self.big.insert(w, BigInt::from(prev) + c);
                }
            },
            None => {
                self.small.insert(w, c);
            }
        }
    }

    pub(crate) fn add(&mut self, w: Word, c: &BigInt) {
        match c.to_i128() {
            Some(s) => self.add_small(w, s),
            None => {
                if let Some(prev) = self.small.remove(&w) {
                    self.big.insert(w, BigInt::from(prev) + c);
                } else {
                    *self.big.entry(w).or_default() += c;
                }
            }
        }
    }

    pub(crate) fn finish(self, ctx: GroupContext) -> Poly {
        let mut terms: Vec<(Word, BigInt)> = self
            .small
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(w, c)| (w, BigInt::from(c)))
            .chain(self.big.into_iter().filter(|(_, c)| !c.is_zero()))
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { ctx, terms }
    }
}

/// A sparse integer polynomial in noncommuting variables `x[j]`.
///
/// Terms are kept in canonical form: like terms combined, no zero
/// coefficients, sorted by `(degree, lex)`. Structural equality therefore
/// coincides with equality in the free ring.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    ctx: GroupContext,
    terms: Vec<(Word, BigInt)>,
}

impl Poly {
    pub fn zero(ctx: GroupContext) -> Self {
        Poly { ctx, terms: Vec::new() }
    }

    pub fn one(ctx: GroupContext) -> Self {
        Self::constant(ctx, 1)
    }

    pub fn constant(ctx: GroupContext, c: impl Into<BigInt>) -> Self {
        Self::monomial(ctx, c, Word::empty())
    }

    /// The generator `x[j] = σ^j(x)`, with `j` reduced modulo `p^n`.
    pub fn var(ctx: GroupContext, j: u32) -> Self {
        Self::monomial(ctx, 1, Word::letter(j % ctx.order()))
    }

    pub fn monomial(ctx: GroupContext, c: impl Into<BigInt>, w: Word) -> Self {
        let c = c.into();
        debug_assert!(w.letters().iter().all(|&l| l < ctx.order()));
        if c.is_zero() {
            Self::zero(ctx)
        } else {
            Poly { ctx, terms: vec![(w, c)] }
        }
    }

    /// Builds a polynomial from arbitrary `(coefficient, letters)` pairs.
    pub fn from_terms<C, I>(ctx: GroupContext, terms: I) -> Result<Self>
    where
        C: Into<BigInt>,
        I: IntoIterator<Item = (C, Vec<u32>)>,
    {
        let mut acc = Accumulator::new();
        for (c, letters) in terms {
            if let Some(&bad) = letters.iter().find(|&&l| l >= ctx.order()) {
                return Err(Error::param(format!(
                    "generator index {bad} out of range for order {}",
                    ctx.order()
                )));
            }
            acc.add(Word::from_letters(&letters), &c.into());
        }
        Ok(acc.finish(ctx))
    }

    #[inline]
    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    /// Canonically ordered terms.
    pub fn terms(&self) -> &[(Word, BigInt)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_empty() && self.terms[0].1.is_one()
    }

    pub fn degree(&self) -> usize {
        self.terms.last().map_or(0, |(w, _)| w.degree())
    }

    pub fn coeff(&self, w: &Word) -> BigInt {
        self.terms
            .binary_search_by(|(t, _)| t.cmp(w))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_default()
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.ctx.ensure_same(&other.ctx)?;
        Ok(self.linear_combination(&other, 1))
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.ctx.ensure_same(&other.ctx)?;
        Ok(self.linear_combination(&other, -1))
    }

    /// `self + sign * other` by merging the two sorted term lists.
    fn linear_combination(&self, other: &Poly, sign: i32) -> Poly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        let signed = |c: &BigInt| if sign < 0 { -c } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0.clone(), signed(&b[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if sign < 0 { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(w, c)| (w.clone(), signed(c))));
        Poly { ctx: self.ctx, terms: out }
    }

    /// Noncommutative product; the order of factors is preserved.
    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.ctx.ensure_same(&other.ctx)?;
        let mut acc = Accumulator::with_capacity(self.terms.len() * other.terms.len());
        let small_rhs: Option<Vec<i64>> = other.terms.iter().map(|(_, c)| c.to_i64()).collect();
        for (w1, c1) in &self.terms {
            match (c1.to_i64(), &small_rhs) {
                (Some(s1), Some(rhs)) => {
                    for ((w2, _), &s2) in other.terms.iter().zip(rhs) {
                        acc.add_small(w1.concat(w2), s1 as i128 * s2 as i128);
                    }
                }
                _ => {
                    for (w2, c2) in &other.terms {
                        acc.add(w1.concat(w2), &(c1 * c2));
                    }
                }
            }
        }
        Ok(acc.finish(self.ctx))
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> Poly {
        let c = c.into();
        if c.is_zero() {
            return Poly::zero(self.ctx);
        }
        Poly {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a * &c)).collect(),
        }
    }

    /// Applies a letter map to every word; the result is re-canonicalized.
    pub(crate) fn map_words(&self, f: impl Fn(u32) -> u32) -> Poly {
        let mut terms: Vec<(Word, BigInt)> = self
            .terms
            .iter()
            .map(|(w, c)| (w.map_letters(&f), c.clone()))
            .collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        // An injective letter map cannot merge terms, but check anyway.
        if terms.windows(2).any(|t| t[0].0 == t[1].0) {
            let mut acc = Accumulator::new();
            for (w, c) in terms {
                acc.add(w, &c);
            }
            return acc.finish(self.ctx);
        }
        Poly { ctx: self.ctx, terms }
    }

    /// Substitutes `images[j]` for every letter `j`.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.ctx.order() as usize {
            return Err(Error::param("one image per generator required"));
        }
        let target = images.first().map_or(self.ctx, |q| q.ctx);
        let mut acc = Accumulator::new();
        for (w, c) in &self.terms {
            let mut prod = Poly::constant(target, c.clone());
            for &l in w.letters() {
                prod = prod.checked_mul(&images[l as usize])?;
                if prod.is_zero() {
                    break;
                }
            }
            for (pw, pc) in prod.terms {
                acc.add(pw, &pc);
            }
        }
        Ok(acc.finish(target))
    }

    /// Plain-text rendering, e.g. `2*s1(x)*s0(x) - 1`.
    pub fn to_text(&self) -> String {
        render(self, TermStyle::Text)
    }

    /// LaTeX rendering with `\sigma^{j}(x)` factors; `\sigma^{0}(x)` is written `x`.
    pub fn to_latex(&self) -> String {
        render(self, TermStyle::Latex)
    }

    pub fn to_document(&self) -> PolyDocument {
        PolyDocument {
            p: self.ctx.p(),
            n: self.ctx.n(),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermDocument {
                    c: c.to_string(),
                    w: w.letters().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("document serializes")
    }

    pub fn from_document(doc: &PolyDocument) -> Result<Poly> {
        let ctx = GroupContext::new(doc.p, doc.n)?;
        let mut acc = Accumulator::new();
        for (i, t) in doc.terms.iter().enumerate() {
            let c: BigInt = t
                .c
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("terms[{i}].c"), format!("not an integer: {:?}", t.c)))?;
            if let Some(&bad) = t.w.iter().find(|&&l| l >= ctx.order()) {
                return Err(Error::parse(
                    format!("terms[{i}].w"),
                    format!("generator index {bad} out of range for order {}", ctx.order()),
                ));
            }
            acc.add(Word::from_letters(&t.w), &c);
        }
        Ok(acc.finish(ctx))
    }

    pub fn from_json(s: &str) -> Result<Poly> {
        let doc: PolyDocument = serde_json::from_str(s).map_err(|e| {
            Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        Self::from_document(&doc)
    }

    /// Parses the text form produced by [`Poly::to_text`].
    pub fn parse_text(ctx: GroupContext, s: &str) -> Result<Poly> {
        parse_text(ctx, s)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly(p={}, n={}; {})", self.ctx.p(), self.ctx.n(), self.to_text())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

// Operator sugar. These panic on a context mismatch; use the `checked_*`
// methods where the inputs are not known to agree.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).expect("polynomials from different group contexts")
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// JSON interchange form: `{"p": .., "n": .., "terms": [{"c": "..", "w": [..]}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDocument {
    pub p: u32,
    pub n: u32,
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDocument {
    pub c: String,
    pub w: Vec<u32>,
}

#[derive(Clone, Copy)]
enum TermStyle {
    Text,
    Latex,
}

fn render(p: &Poly, style: TermStyle) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (w, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        let factors = render_factors(w, style);
        if factors.is_empty() {
            out.push_str(&mag.to_string());
        } else {
            if !mag.is_one() {
                out.push_str(&mag.to_string());
                if let TermStyle::Text = style {
                    out.push('*');
                }
            }
            out.push_str(&factors);
        }
    }
    out
}

fn render_factors(w: &Word, style: TermStyle) -> String {
    match style {
        TermStyle::Text => w
            .letters()
            .iter()
            .map(|l| format!("s{l}(x)"))
            .collect::<Vec<_>>()
            .join("*"),
        TermStyle::Latex => {
            let mut s = String::new();
            let letters = w.letters();
            let mut i = 0;
            while i < letters.len() {
                let l = letters[i];
                let run = letters[i..].iter().take_while(|&&m| m == l).count();
                if l == 0 {
                    s.push('x');
                } else {
                    s.push_str(&format!("\\sigma^{{{l}}}(x)"));
                }
                if run > 1 {
                    s.push_str(&format!("^{{{run}}}"));
                }
                i += run;
            }
            s
        }
    }
}

fn parse_text(ctx: GroupContext, src: &str) -> Result<Poly> {
    let s: Vec<char> = src.chars().collect();
    let mut pos = 0usize;
    let mut acc = Accumulator::new();
    let skip_ws = |pos: &mut usize| {
        while *pos < s.len() && s[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    let err = |pos: usize, msg: &str| Error::parse(format!("offset {pos}"), msg.to_string());

    skip_ws(&mut pos);
    if pos == s.len() {
        return Err(err(pos, "empty input"));
    }
    if s[pos] == '0' && s[pos + 1..].iter().all(|c| c.is_whitespace()) {
        return Ok(Poly::zero(ctx));
    }
    let mut first = true;
    while pos < s.len() {
        skip_ws(&mut pos);
        let mut sign = BigInt::one();
        if pos < s.len() && (s[pos] == '+' || s[pos] == '-') {
            if s[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
            skip_ws(&mut pos);
        } else if !first {
            return Err(err(pos, "expected '+' or '-'"));
        }
        first = false;

        let mut coeff = sign;
        let mut letters: Vec<u32> = Vec::new();
        let mut expect_factor = true;
        while expect_factor {
            skip_ws(&mut pos);
            if pos < s.len() && s[pos].is_ascii_digit() {
                let start = pos;
                while pos < s.len() && s[pos].is_ascii_digit() {
                    pos += 1;
                }
                let lit: String = s[start..pos].iter().collect();
                coeff *= BigInt::from_str(&lit).map_err(|_| err(start, "bad integer"))?;
            } else if pos < s.len() && s[pos] == 's' {
                let start = pos;
                pos += 1;
                let dstart = pos;
                while pos < s.len() && s[pos].is_ascii_digit() {
                    pos += 1;
                }
                if dstart == pos {
                    return Err(err(pos, "expected generator index after 's'"));
                }
                let idx: String = s[dstart..pos].iter().collect();
                let j: u32 = idx.parse().map_err(|_| err(dstart, "generator index too large"))?;
                if s.get(pos..pos + 3) != Some(&['(', 'x', ')'][..]) {
                    return Err(err(pos, "expected '(x)'"));
                }
                pos += 3;
                if j >= ctx.order() {
                    return Err(err(start, "generator index out of range"));
                }
                letters.push(j);
            } else {
                return Err(err(pos, "expected a coefficient or a factor sJ(x)"));
            }
            skip_ws(&mut pos);
            if pos < s.len() && s[pos] == '*' {
                pos += 1;
            } else {
                expect_factor = false;
            }
        }
        acc.add(Word::from_letters(&letters), &coeff);
        skip_ws(&mut pos);
    }
    Ok(acc.finish(ctx))
}
