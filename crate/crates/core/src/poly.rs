//! Exact multivariate polynomials over the rationals.
//!
//! Variables come in three groups: base-point coordinates `x_1..x_m`, fiber
//! coordinates `xi_1..xi_m`, and an optional formal shift variable `delta`.
//! Exponents are stored densely; terms live in a `BTreeMap` keyed by a
//! graded-lexicographic monomial order so iteration and serialization are
//! deterministic.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar. Always reduced with a positive denominator.
pub type Scalar = BigRational;

/// Largest supported dimension `m`.
pub const MAX_DIM: usize = 8;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_scalar(s: &str) -> Result<Scalar, PolyError> {
    let s = s.trim();
    let bad = || PolyError::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(PolyError::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Scalar::new(n, d))
        }
        None => Ok(Scalar::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("variable {var} out of range for dimension {dim}")]
    VarOutOfRange { var: Var, dim: usize },
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A single polynomial variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Xi(usize),
    Delta,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Xi(i) => write!(f, "xi{}", i + 1),
            Var::Delta => write!(f, "delta"),
        }
    }
}

/// Exponent vector of a monomial `x^a xi^b delta^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    x: [u8; MAX_DIM],
    xi: [u8; MAX_DIM],
    delta: u8,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn new(x: &[u8], xi: &[u8]) -> Self {
        let mut mono = Self::default();
        mono.x[..x.len()].copy_from_slice(x);
        mono.xi[..xi.len()].copy_from_slice(xi);
        mono
    }

    pub fn with_delta(mut self, e: u8) -> Self {
        self.delta = e;
        self
    }

    pub fn x(&self) -> &[u8; MAX_DIM] {
        &self.x
    }

    pub fn xi(&self) -> &[u8; MAX_DIM] {
        &self.xi
    }

    pub fn delta(&self) -> u8 {
        self.delta
    }

    pub fn exponent(&self, var: Var) -> u8 {
        match var {
            Var::X(i) => self.x[i],
            Var::Xi(i) => self.xi[i],
            Var::Delta => self.delta,
        }
    }

    fn exponent_mut(&mut self, var: Var) -> &mut u8 {
        match var {
            Var::X(i) => &mut self.x[i],
            Var::Xi(i) => &mut self.xi[i],
            Var::Delta => &mut self.delta,
        }
    }

    pub fn xi_degree(&self) -> u32 {
        self.xi.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn x_degree(&self) -> u32 {
        self.x.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.x[i] = out.x[i].checked_add(other.x[i]).ok_or(PolyError::ExponentOverflow)?;
            out.xi[i] = out.xi[i].checked_add(other.xi[i]).ok_or(PolyError::ExponentOverflow)?;
        }
        out.delta = out.delta.checked_add(other.delta).ok_or(PolyError::ExponentOverflow)?;
        Ok(out)
    }

    /// The xi-part only, as a derivative multi-index.
    pub fn xi_part(&self) -> Self {
        Self { xi: self.xi, ..Self::default() }
    }

    /// The x- and delta-part, with xi exponents cleared.
    pub fn coefficient_part(&self) -> Self {
        Self { xi: [0; MAX_DIM], ..*self }
    }

    fn order_key(&self) -> (u32, Reverse<[u8; MAX_DIM]>, u32, Reverse<[u8; MAX_DIM]>, u8) {
        (self.xi_degree(), Reverse(self.xi), self.x_degree(), Reverse(self.x), self.delta)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `x`, `xi` (and optionally `delta`) with rational coefficients.
///
/// Canonical form: no stored term has a zero coefficient, so structural
/// equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} outside 1..={MAX_DIM}");
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        Self::term(dim, Monomial::one(), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Scalar::one())
    }

    pub fn term(dim: usize, mono: Monomial, c: Scalar) -> Self {
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn var(dim: usize, var: Var) -> Result<Self, PolyError> {
        check_var(dim, var)?;
        let mut mono = Monomial::one();
        *mono.exponent_mut(var) = 1;
        Ok(Self::term(dim, mono, Scalar::one()))
    }

    pub fn x(dim: usize, i: usize) -> Self {
        Self::var(dim, Var::X(i)).expect("x index in range")
    }

    pub fn xi(dim: usize, i: usize) -> Self {
        Self::var(dim, Var::Xi(i)).expect("xi index in range")
    }

    /// The formal shift variable `delta`.
    pub fn delta(dim: usize) -> Self {
        Self::var(dim, Var::Delta).expect("delta always valid")
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Scalar)>,
    {
        let mut p = Self::zero(dim);
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> Scalar {
        self.terms.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Adds `c * mono` in place, keeping canonical form.
    pub fn add_term(&mut self, mono: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), PolyError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch { left: self.dim, right: other.dim })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.add_assign_ref(other);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub(crate) fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (m, c) in &other.terms {
            self.add_term(*m, c.clone());
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &Scalar) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(*m, v * c);
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Multiplies by a single monomial.
    pub fn mul_monomial(&self, mono: &Monomial, c: &Scalar) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, v) in &self.terms {
            out.add_term(m.mul(mono).expect("exponent overflow"), v * c);
        }
        out
    }

    pub fn mul_var(&self, var: Var) -> Self {
        let mut mono = Monomial::one();
        *mono.exponent_mut(var) = 1;
        self.mul_monomial(&mono, &Scalar::one())
    }

    /// Formal partial derivative.
    pub fn partial(&self, var: Var) -> Result<Self, PolyError> {
        check_var(self.dim, var)?;
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            *dm.exponent_mut(var) = e - 1;
            out.add_term(dm, c * int(i64::from(e)));
        }
        Ok(out)
    }

    pub fn dx(&self, i: usize) -> Self {
        self.partial(Var::X(i)).expect("x index in range")
    }

    pub fn dxi(&self, i: usize) -> Self {
        self.partial(Var::Xi(i)).expect("xi index in range")
    }

    /// Sum of the terms whose xi-degree is exactly `k`.
    pub fn xi_degree_part(&self, k: u32) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.xi_degree() == k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Splits into xi-homogeneous components, keyed by degree.
    pub fn xi_homogeneous_parts(&self) -> BTreeMap<u32, Poly> {
        let mut parts: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.xi_degree())
                .or_insert_with(|| Poly::zero(self.dim))
                .terms
                .insert(*m, c.clone());
        }
        parts
    }

    /// Highest xi-degree present, `None` for the zero polynomial.
    pub fn xi_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::xi_degree).max()
    }

    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::x_degree).max()
    }

    pub fn delta_degree(&self) -> Option<u8> {
        self.terms.keys().map(Monomial::delta).max()
    }

    pub fn is_x_free(&self) -> bool {
        self.terms.keys().all(|m| m.x_degree() == 0)
    }

    pub fn has_delta(&self) -> bool {
        self.terms.keys().any(|m| m.delta > 0)
    }

    /// Substitutes a value for the formal `delta`.
    pub fn substitute_delta(&self, value: &Scalar) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut pow = Scalar::one();
            for _ in 0..m.delta {
                pow *= value;
            }
            out.add_term(m.with_delta(0), c * pow);
        }
        out
    }

    /// Evaluates all `x` variables at the given point, leaving xi and delta.
    pub fn evaluate_x(&self, point: &[Scalar]) -> Self {
        assert_eq!(point.len(), self.dim, "point dimension");
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, xi) in point.iter().enumerate() {
                for _ in 0..m.x[i] {
                    v *= xi;
                }
            }
            let mut rest = *m;
            rest.x = [0; MAX_DIM];
            out.add_term(rest, v);
        }
        out
    }

    /// Directional fiber derivative `sum_a v_a d/dxi_a`.
    pub fn xi_directional(&self, v: &[Scalar]) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, va) in v.iter().enumerate() {
            if !va.is_zero() {
                out.add_scaled(&self.dxi(a), va);
            }
        }
        out
    }

    /// The linear form `sum_a v_a xi_a`.
    pub fn xi_linear(dim: usize, v: &[Scalar]) -> Self {
        let mut out = Self::zero(dim);
        for (a, va) in v.iter().enumerate() {
            let mut mono = Monomial::one();
            mono.xi[a] = 1;
            out.add_term(mono, va.clone());
        }
        out
    }

    /// Leading term in the monomial order, if any.
    pub fn leading_term(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn map_coefficients<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&Monomial, &Scalar) -> Scalar,
    {
        Self::from_terms(self.dim, self.terms.iter().map(|(m, c)| (*m, f(m, c))))
    }

    /// Parses the canonical textual form for a known dimension; a missing
    /// leading coefficient means 1.
    pub fn parse(dim: usize, text: &str) -> Result<Self, PolyError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(PolyError::BadDimension(dim));
        }
        let text = text.trim();
        let mut out = Self::zero(dim);
        if text == "0" {
            return Ok(out);
        }
        for raw in text.split(" + ") {
            let mut factors = raw.split('*').map(str::trim).peekable();
            let coeff = match factors.peek() {
                Some(first) if first.contains('^') => Scalar::one(),
                _ => parse_scalar(factors.next().unwrap_or(""))?,
            };
            let mut mono = Monomial::one();
            for factor in factors {
                let (name, exps) = factor
                    .split_once('^')
                    .ok_or_else(|| PolyError::Parse(format!("bad factor {factor:?}")))?;
                match name.trim() {
                    "x" => parse_exponents(exps, dim, &mut mono.x)?,
                    "xi" => parse_exponents(exps, dim, &mut mono.xi)?,
                    "delta" => {
                        mono.delta = exps
                            .trim()
                            .parse()
                            .map_err(|_| PolyError::Parse(format!("bad delta exponent {exps:?}")))?
                    }
                    other => return Err(PolyError::Parse(format!("unknown variable group {other:?}"))),
                }
            }
            out.add_term(mono, coeff);
        }
        Ok(out)
    }
}

fn parse_exponents(text: &str, dim: usize, dst: &mut [u8; MAX_DIM]) -> Result<(), PolyError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| PolyError::Parse(format!("bad exponent tuple {text:?}")))?;
    let exps: Vec<u8> = inner
        .split(',')
        .map(|e| e.trim().parse::<u8>())
        .collect::<Result<_, _>>()
        .map_err(|_| PolyError::Parse(format!("bad exponent tuple {text:?}")))?;
    if exps.len() != dim {
        return Err(PolyError::Parse(format!("exponent tuple {text:?} has length {} != {dim}", exps.len())));
    }
    dst[..dim].copy_from_slice(&exps);
    Ok(())
}

fn check_var(dim: usize, var: Var) -> Result<(), PolyError> {
    match var {
        Var::X(i) | Var::Xi(i) if i >= dim => Err(PolyError::VarOutOfRange { var, dim }),
        _ => Ok(()),
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, exps: &[u8]) -> fmt::Result {
    write!(f, "(")?;
    for (i, e) in exps.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{e}")?;
    }
    write!(f, ")")
}

/// Canonical form: `coeff * x^(a..) * xi^(b..)` terms joined by ` + `, in
/// monomial order; ` * delta^k` is appended only when `k > 0`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c} * x^")?;
            write_tuple(f, &m.x[..self.dim])?;
            write!(f, " * xi^")?;
            write_tuple(f, &m.xi[..self.dim])?;
            if m.delta > 0 {
                write!(f, " * delta^{}", m.delta)?;
            }
        }
        Ok(())
    }
}

/// Parses a dimension-tagged form `m: <canonical text>`.
impl FromStr for Poly {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (dim, body) = s
            .split_once(':')
            .ok_or_else(|| PolyError::Parse("expected `m: <terms>`".into()))?;
        let dim: usize = dim.trim().parse().map_err(|_| PolyError::Parse(format!("bad dimension {dim:?}")))?;
        Poly::parse(dim, body)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Scalar::one())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Univariate polynomial in the shift `delta`, coefficients low to high.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaPoly {
    coeffs: Vec<Scalar>,
}

impl DeltaPoly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Reads a polynomial that only involves `delta`.
    pub fn from_poly(p: &Poly) -> Option<Self> {
        let mut coeffs = Vec::new();
        for (m, c) in p.terms() {
            if m.x_degree() != 0 || m.xi_degree() != 0 {
                return None;
            }
            let d = usize::from(m.delta());
            if coeffs.len() <= d {
                coeffs.resize(d + 1, Scalar::zero());
            }
            coeffs[d] = c.clone();
        }
        Some(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, delta: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| acc * delta + c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }
}

impl fmt::Display for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "delta")?,
                1 => write!(f, "{a}*delta")?,
                _ if a.is_one() => write!(f, "delta^{i}")?,
                _ => write!(f, "{a}*delta^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::x(2, i)
    }
    fn xi(i: usize) -> Poly {
        Poly::xi(2, i)
    }

    #[test]
    fn additive_inverse_is_zero() {
        let p = x(0);
        assert!((&p + &(-&p)).is_zero());
    }

    #[test]
    fn monomial_product() {
        let p = &(&x(0) * &xi(1)) * &xi(1);
        let expected = Poly::term(2, Monomial::new(&[1, 0], &[0, 2]), int(1));
        assert_eq!(p, expected);
    }

    #[test]
    fn scaling() {
        let p = xi(0).scale(&ratio(3, 2));
        assert_eq!(p.coeff(&Monomial::new(&[0, 0], &[1, 0])), ratio(3, 2));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn partials() {
        let p = &(&x(0) * &x(0)) * &xi(1);
        assert_eq!(p.dx(0), (&x(0) * &xi(1)).scale(&int(2)));
        assert!(xi(1).dxi(0).is_zero());
        let q = &(&xi(0) * &xi(0)) * &xi(1);
        assert_eq!(q.dxi(0), (&xi(0) * &xi(1)).scale(&int(2)));
    }

    #[test]
    fn partial_out_of_range() {
        assert!(matches!(x(0).partial(Var::X(5)), Err(PolyError::VarOutOfRange { .. })));
    }

    #[test]
    fn degree_parts() {
        let p = &(&xi(0) * &xi(0)) + &(&x(1) * &xi(0));
        assert_eq!(p.xi_degree_part(1), &x(1) * &xi(0));
        assert!((&xi(0) * &xi(0)).xi_degree_part(0).is_zero());
        let five = Poly::constant(2, int(5));
        assert_eq!(five.xi_degree_part(0), five);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Poly::x(2, 0);
        let b = Poly::x(3, 0);
        assert_eq!(a.try_add(&b), Err(PolyError::DimensionMismatch { left: 2, right: 3 }));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p = &(&x(0) * &xi(1)).scale(&ratio(-3, 2)) + &Poly::delta(2).scale(&int(4));
        let text = p.to_string();
        assert_eq!(Poly::parse(2, &text).unwrap(), p);
        assert_eq!(Poly::parse(2, "0").unwrap(), Poly::zero(2));
        assert_eq!(format!("2: {text}").parse::<Poly>().unwrap(), p);
        assert!(Poly::parse(2, "1 * x^(1) * xi^(0,0)").is_err());
    }

    #[test]
    fn canonical_order_is_graded() {
        let p = &(&xi(0) * &xi(0)) + &(&xi(1) + &Poly::one(2));
        let degrees: Vec<u32> = p.terms().map(|(m, _)| m.xi_degree()).collect();
        assert_eq!(degrees, vec![0, 1, 2]);
    }

    #[test]
    fn delta_poly_eval_and_display() {
        let d = DeltaPoly::new(vec![int(3), int(-3), int(1)]);
        assert_eq!(d.eval(&int(1)), int(1));
        assert_eq!(d.to_string(), "delta^2 - 3*delta + 3");
        assert_eq!(d.degree(), Some(2));
        let p = &Poly::delta(2) * &Poly::delta(2);
        assert_eq!(DeltaPoly::from_poly(&p).unwrap().degree(), Some(2));
    }
}
