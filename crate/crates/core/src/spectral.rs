//! Trace decomposition of symbols, the Casimir operator and its eigenvalues,
//! the degree-lowering operator `N`, and critical shift values.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{ConformalAlgebra, ConformalVectorField, Signature};
use crate::poly::{int, DeltaPoly, Monomial, Poly, Scalar};
use crate::symbol::{gamma_poly, lie_derivative_symbol_poly, WeightedSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("symbol is not homogeneous of xi-degree {0}")]
    NotHomogeneous(u32),
    #[error("invalid isotypic index (k,s) = ({k},{s})")]
    BadIndex { k: u32, s: u32 },
    #[error("the isotypic space ({k},{s}) is zero in dimension {m}")]
    EmptyComponent { k: u32, s: u32, m: usize },
    #[error("Casimir output is not proportional to its input for ({k},{s})")]
    NotScalar { k: u32, s: u32 },
    #[error("Casimir eigenvalue for ({k},{s}) has delta-degree {degree} > 2")]
    DegreeTooHigh { k: u32, s: u32, degree: usize },
}

/// `|xi|^{2s} H` with `H` harmonic of degree `k - 2s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsotypicComponent {
    pub k: u32,
    pub s: u32,
    pub part: WeightedSymbol,
}

/// Splits a homogeneous symbol of xi-degree `k` into its components for
/// `s = 0..=k/2`, pointwise in `x`.
pub fn harmonic_decompose(t: &WeightedSymbol, k: u32) -> Result<Vec<IsotypicComponent>, SpectralError> {
    if t.poly().terms().any(|(m, _)| m.xi_degree() != k) {
        return Err(SpectralError::NotHomogeneous(k));
    }
    let parts = decompose_poly(t.signature(), t.poly(), k);
    Ok(parts
        .into_iter()
        .enumerate()
        .map(|(s, p)| IsotypicComponent { k, s: s as u32, part: t.with_poly(p) })
        .collect())
}

/// Components `|xi|^{2s} H_{k-2s}` of a homogeneous polynomial, indexed by `s`.
///
/// Uses `Delta_J(|xi|^{2s} H_d) = 2s(m + 2d + 2s - 2) |xi|^{2(s-1)} H_d`
/// recursively on `Delta_J T`.
pub fn decompose_poly(sig: Signature, t: &Poly, k: u32) -> Vec<Poly> {
    let m = t.dim();
    if k < 2 {
        return vec![t.clone()];
    }
    let lap = sig.laplacian_xi(t);
    let inner = decompose_poly(sig, &lap, k - 2);
    let r2 = sig.norm2_xi();
    let mut out = vec![Poly::zero(m)];
    let mut rest = t.clone();
    for (s_inner, c) in inner.into_iter().enumerate() {
        let s = s_inner as i64 + 1;
        let d = i64::from(k) - 2 * s;
        let denom = int(2 * s * (m as i64 + 2 * d + 2 * s - 2));
        let comp = (&r2 * &c).scale(&(Scalar::one() / denom));
        rest = &rest - &comp;
        out.push(comp);
    }
    out[0] = rest;
    out
}

/// `C(T) = sum_{a,b} K^{ab} L_a L_b T` over the standard basis, for a
/// numeric weight.
pub fn casimir(alg: &ConformalAlgebra, t: &WeightedSymbol) -> WeightedSymbol {
    let w = Poly::constant(t.poly().dim(), t.weight().clone());
    t.with_poly(casimir_poly(alg, &w, t.poly()))
}

/// [`casimir`] with a weight polynomial that may involve the formal `delta`.
pub fn casimir_poly(alg: &ConformalAlgebra, weight: &Poly, t: &Poly) -> Poly {
    let fields = alg.basis_fields();
    let kinv = alg.killing_inverse();
    let n = fields.len();
    let first: Vec<Poly> = fields.iter().map(|x| lie_derivative_symbol_poly(x, weight, t)).collect();
    let mut out = Poly::zero(t.dim());
    for a in 0..n {
        let mut inner = Poly::zero(t.dim());
        for b in 0..n {
            let c = &kinv[(a, b)];
            if !c.is_zero() {
                inner.add_scaled(&first[b], c);
            }
        }
        if !inner.is_zero() {
            out.add_assign_ref(&lie_derivative_symbol_poly(&fields[a], weight, &inner));
        }
    }
    out
}

/// Constant-coefficient representative of the `(k,s)` component:
/// `|xi|^{2s}` times the harmonic part of `xi_1^{k-2s}`.
pub fn isotypic_representative(sig: Signature, k: u32, s: u32) -> Result<Poly, SpectralError> {
    if 2 * s > k {
        return Err(SpectralError::BadIndex { k, s });
    }
    let m = sig.dim();
    let d = k - 2 * s;
    let mut exps = vec![0u8; m];
    exps[0] = d as u8;
    let seed = Poly::term(m, Monomial::new(&[], &exps), Scalar::one());
    let harmonic = decompose_poly(sig, &seed, d).swap_remove(0);
    if harmonic.is_zero() {
        return Err(SpectralError::EmptyComponent { k, s, m });
    }
    let r2 = sig.norm2_xi();
    Ok((0..s).fold(harmonic, |acc, _| &acc * &r2))
}

/// Eigenvalue of the Casimir on the `(k,s)` component as a polynomial in
/// `delta`, computed by applying the Casimir with symbolic weight to a
/// representative.
pub fn casimir_eigenvalue(alg: &ConformalAlgebra, k: u32, s: u32) -> Result<DeltaPoly, SpectralError> {
    let sig = alg.signature();
    let rep = isotypic_representative(sig, k, s)?;
    let m = sig.dim();
    let image = casimir_poly(alg, &Poly::delta(m), &rep);
    let alpha = proportionality_factor(&rep, &image).ok_or(SpectralError::NotScalar { k, s })?;
    let degree = alpha.degree().unwrap_or(0);
    if degree > 2 {
        return Err(SpectralError::DegreeTooHigh { k, s, degree });
    }
    Ok(alpha)
}

/// The `alpha(delta)` with `image = alpha * rep`, if any.
pub fn proportionality_factor(rep: &Poly, image: &Poly) -> Option<DeltaPoly> {
    let (mono0, c0) = rep.leading_term()?;
    let mut coeffs: Vec<Scalar> = Vec::new();
    for (mono, c) in image.terms() {
        if mono.with_delta(0) == *mono0 {
            let e = usize::from(mono.delta());
            if coeffs.len() <= e {
                coeffs.resize(e + 1, Scalar::zero());
            }
            coeffs[e] = c / c0;
        }
    }
    let alpha = DeltaPoly::new(coeffs);
    let alpha_poly = Poly::from_terms(
        rep.dim(),
        alpha
            .coeffs()
            .iter()
            .enumerate()
            .map(|(e, c)| (Monomial::one().with_delta(e as u8), c.clone())),
    );
    if &alpha_poly * rep == *image {
        Some(alpha)
    } else {
        None
    }
}

/// Casimir eigenvalues `alpha_{k,s}(delta)` for all non-empty components
/// with `k <= kmax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueTable {
    sig: Signature,
    entries: BTreeMap<(u32, u32), DeltaPoly>,
}

impl EigenvalueTable {
    pub fn build(alg: &ConformalAlgebra, kmax: u32) -> Result<Self, SpectralError> {
        let mut entries = BTreeMap::new();
        for k in 0..=kmax {
            for s in 0..=k / 2 {
                match casimir_eigenvalue(alg, k, s) {
                    Ok(a) => {
                        entries.insert((k, s), a);
                    }
                    Err(SpectralError::EmptyComponent { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Self { sig: alg.signature(), entries })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn get(&self, k: u32, s: u32) -> Option<&DeltaPoly> {
        self.entries.get(&(k, s))
    }

    pub fn entries(&self) -> &BTreeMap<(u32, u32), DeltaPoly> {
        &self.entries
    }

    pub fn kmax(&self) -> u32 {
        self.entries.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }
}

/// `sign * 2 sum_i gamma(eps^i) L_{X^{e_i}} T`.
pub fn n_operator(alg: &ConformalAlgebra, t: &WeightedSymbol, lambda: &Scalar, sign: i8) -> WeightedSymbol {
    t.with_poly(n_operator_poly(alg, t.poly(), lambda, sign))
}

pub fn n_operator_poly(alg: &ConformalAlgebra, t: &Poly, lambda: &Scalar, sign: i8) -> Poly {
    let sig = alg.signature();
    let m = sig.dim();
    let mut out = Poly::zero(m);
    for i in 0..m {
        let field: &ConformalVectorField = &alg.basis_fields()[i];
        // constant field: the density term drops out
        let lt = field.apply(t);
        if lt.is_zero() {
            continue;
        }
        let eps = &alg.killing_dual_g1(i).grade_decompose().covector;
        out.add_assign_ref(&gamma_poly(sig, eps, &lt, lambda));
    }
    out.scale(&int(2 * i64::from(sign)))
}

/// Tree-like index set below `(k,s)`: `l < k`, `0 <= s - t <= k - l`,
/// `2t <= l`.
pub fn tree_indices(k: u32, s: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for l in 0..k {
        for t in 0..=l / 2 {
            if t <= s && s - t <= k - l {
                out.push((l, t));
            }
        }
    }
    out
}

/// A root of `alpha_{l,t} - alpha_{k,s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriticalRoot {
    Rational(Scalar),
    /// Irrational root of `a delta^2 + b delta + c`, `+` or `-` branch.
    Quadratic { a: Scalar, b: Scalar, c: Scalar, plus: bool },
    /// The difference vanishes identically.
    All,
}

impl CriticalRoot {
    pub fn as_rational(&self) -> Option<&Scalar> {
        match self {
            Self::Rational(r) => Some(r),
            _ => None,
        }
    }

    fn sort_key(&self) -> (u8, Option<&Scalar>) {
        match self {
            Self::Rational(r) => (0, Some(r)),
            Self::Quadratic { .. } => (1, None),
            Self::All => (2, None),
        }
    }
}

impl fmt::Display for CriticalRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rational(r) => write!(f, "{r}"),
            Self::Quadratic { a, b, c, plus } => {
                let sign = if *plus { "+" } else { "-" };
                write!(f, "root{sign}({a}*delta^2 + {b}*delta + {c})")
            }
            Self::All => write!(f, "all"),
        }
    }
}

/// A critical shift value with the pair of components that produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalValue {
    pub delta: CriticalRoot,
    pub from: (u32, u32),
    pub to: (u32, u32),
}

impl fmt::Display for CriticalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "delta={} from ({},{})->({},{})",
            self.delta, self.from.0, self.from.1, self.to.0, self.to.1
        )
    }
}

impl Ord for CriticalValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta
            .sort_key()
            .cmp(&other.delta.sort_key())
            .then_with(|| self.delta.to_string().cmp(&other.delta.to_string()))
            .then_with(|| self.from.cmp(&other.from))
            .then_with(|| self.to.cmp(&other.to))
    }
}

impl PartialOrd for CriticalValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Roots of `alpha_{l,t} - alpha_{k,s}` over the tree-like indices of
/// `(k,s)`, sorted. Each rational root is re-verified by substitution.
pub fn critical_deltas(table: &EigenvalueTable, k: u32, s: u32) -> Vec<CriticalValue> {
    let Some(top) = table.get(k, s) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (l, t) in tree_indices(k, s) {
        let Some(low) = table.get(l, t) else {
            continue;
        };
        let diff = low.sub(top);
        for root in poly_roots(&diff) {
            if let CriticalRoot::Rational(r) = &root {
                assert!(diff.eval(r).is_zero(), "root verification failed");
            }
            out.push(CriticalValue { delta: root, from: (k, s), to: (l, t) });
        }
    }
    out.sort();
    out
}

/// All critical values for components with `k <= kmax`.
pub fn critical_table(table: &EigenvalueTable, kmax: u32) -> Vec<CriticalValue> {
    let mut out: Vec<CriticalValue> = table
        .entries()
        .keys()
        .filter(|&&(k, _)| k <= kmax)
        .flat_map(|&(k, s)| critical_deltas(table, k, s))
        .collect();
    out.sort();
    out
}

/// One entry per distinct critical value, keeping the smallest witness.
pub fn distinct_criticals(values: &[CriticalValue]) -> Vec<CriticalValue> {
    let mut out: Vec<CriticalValue> = Vec::new();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| {
        a.delta
            .sort_key()
            .cmp(&b.delta.sort_key())
            .then_with(|| a.delta.to_string().cmp(&b.delta.to_string()))
            .then_with(|| (a.from, a.to).cmp(&(b.from, b.to)))
    });
    for v in sorted {
        if out.last().is_none_or(|prev| prev.delta != v.delta) {
            out.push(v);
        }
    }
    out
}

fn poly_roots(p: &DeltaPoly) -> Vec<CriticalRoot> {
    match p.degree() {
        None => vec![CriticalRoot::All],
        Some(0) => Vec::new(),
        Some(1) => vec![CriticalRoot::Rational(-p.coeff(0) / p.coeff(1))],
        Some(2) => {
            let (a, b, c) = (p.coeff(2), p.coeff(1), p.coeff(0));
            let disc = &b * &b - int(4) * &a * &c;
            if disc.is_negative() {
                return Vec::new();
            }
            let two_a = int(2) * &a;
            match rational_sqrt(&disc) {
                Some(r) if r.is_zero() => vec![CriticalRoot::Rational(-&b / &two_a)],
                Some(r) => vec![
                    CriticalRoot::Rational((-&b - &r) / &two_a),
                    CriticalRoot::Rational((-&b + &r) / &two_a),
                ],
                None => vec![
                    CriticalRoot::Quadratic { a: a.clone(), b: b.clone(), c: c.clone(), plus: false },
                    CriticalRoot::Quadratic { a, b, c, plus: true },
                ],
            }
        }
        Some(_) => unreachable!("eigenvalues have delta-degree at most 2"),
    }
}

fn rational_sqrt(x: &Scalar) -> Option<Scalar> {
    let sqrt_int = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    let n = sqrt_int(x.numer())?;
    let d = sqrt_int(x.denom())?;
    Some(Scalar::new(n, d))
}
