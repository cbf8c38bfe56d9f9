//! Weighted symbols, normal-ordered differential operators, Lie derivatives,
//! the standard-ordering quantization and the transferred action.
//!
//! An operator `sum_alpha C_alpha(x) d^alpha` is stored as the polynomial
//! `sum_alpha C_alpha(x) xi^alpha`, with the convention that every `xi_i`
//! stands for a derivative acting after multiplication by the coefficient.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use thiserror::Error;

use crate::algebra::{vector_field_of, AlgebraElement, AlgebraError, ConformalVectorField, Signature};
use crate::poly::{int, ratio, Monomial, Poly, Scalar, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("polynomial dimension {got} does not match signature dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("weight mismatch: expected {expected}, got {got}")]
    WeightMismatch { expected: Scalar, got: Scalar },
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("operator coefficients must not involve the formal delta")]
    SymbolicWeight,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A symbol `T(x, xi)` of density weight `delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSymbol {
    sig: Signature,
    weight: Scalar,
    poly: Poly,
}

impl WeightedSymbol {
    pub fn new(sig: Signature, weight: Scalar, poly: Poly) -> Result<Self, SymbolError> {
        if poly.dim() != sig.dim() {
            return Err(SymbolError::Dimension { expected: sig.dim(), got: poly.dim() });
        }
        Ok(Self { sig, weight, poly })
    }

    pub fn zero(sig: Signature, weight: Scalar) -> Self {
        Self { sig, weight, poly: Poly::zero(sig.dim()) }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn weight(&self) -> &Scalar {
        &self.weight
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Maximal xi-degree; `None` for the zero symbol.
    pub fn degree(&self) -> Option<u32> {
        self.poly.xi_degree()
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        self.with_poly(self.poly.xi_degree_part(k))
    }

    /// Same signature and weight, new polynomial.
    pub fn with_poly(&self, poly: Poly) -> Self {
        assert_eq!(poly.dim(), self.sig.dim(), "dimension mismatch");
        Self { sig: self.sig, weight: self.weight.clone(), poly }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        self.with_poly(&self.poly + &other.poly)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        self.with_poly(&self.poly - &other.poly)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.with_poly(self.poly.scale(c))
    }
}

/// A finite-order operator from `lambda`-densities to `mu`-densities in
/// normal order (coefficients left, derivatives right).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearDiffOp {
    sig: Signature,
    source: Scalar,
    target: Scalar,
    normal: Poly,
}

impl LinearDiffOp {
    pub fn from_normal_poly(
        sig: Signature,
        source: Scalar,
        target: Scalar,
        normal: Poly,
    ) -> Result<Self, SymbolError> {
        if normal.dim() != sig.dim() {
            return Err(SymbolError::Dimension { expected: sig.dim(), got: normal.dim() });
        }
        if normal.has_delta() {
            return Err(SymbolError::SymbolicWeight);
        }
        Ok(Self { sig, source, target, normal })
    }

    /// Assembles an operator from `(derivative multi-index, coefficient)` pairs.
    pub fn from_coefficients<I>(sig: Signature, source: Scalar, target: Scalar, coeffs: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = (Vec<u8>, Poly)>,
    {
        let m = sig.dim();
        let mut normal = Poly::zero(m);
        for (alpha, c) in coeffs {
            if alpha.len() != m || c.dim() != m {
                return Err(SymbolError::Dimension { expected: m, got: alpha.len().max(c.dim()) });
            }
            normal.add_assign_ref(&c.xi_degree_part(0).mul_monomial(&Monomial::new(&[], &alpha), &Scalar::one()));
        }
        Self::from_normal_poly(sig, source, target, normal)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn source_weight(&self) -> &Scalar {
        &self.source
    }

    pub fn target_weight(&self) -> &Scalar {
        &self.target
    }

    /// The normal-ordered form with `xi` standing for derivatives.
    pub fn normal_poly(&self) -> &Poly {
        &self.normal
    }

    pub fn order(&self) -> Option<u32> {
        self.normal.xi_degree()
    }

    pub fn is_zero(&self) -> bool {
        self.normal.is_zero()
    }

    /// Coefficient functions keyed by derivative multi-index.
    pub fn coefficients(&self) -> BTreeMap<Vec<u8>, Poly> {
        let m = self.sig.dim();
        let mut out: BTreeMap<Vec<u8>, Poly> = BTreeMap::new();
        for (mono, c) in self.normal.terms() {
            let alpha = mono.xi()[..m].to_vec();
            out.entry(alpha)
                .or_insert_with(|| Poly::zero(m))
                .add_term(mono.coefficient_part(), c.clone());
        }
        out
    }

    /// Applies the operator to a function of `x`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let m = self.sig.dim();
        let mut out = Poly::zero(m);
        for (alpha, c) in self.coefficients() {
            let mut d = f.clone();
            for (i, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    d = d.dx(i);
                }
            }
            if !d.is_zero() {
                out.add_assign_ref(&(&c * &d));
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check_same_weights(other)?;
        Ok(Self { normal: &self.normal + &other.normal, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check_same_weights(other)?;
        Ok(Self { normal: &self.normal - &other.normal, ..self.clone() })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self { normal: self.normal.scale(c), ..self.clone() }
    }

    fn check_same_weights(&self, other: &Self) -> Result<(), SymbolError> {
        if self.sig != other.sig {
            return Err(SymbolError::SignatureMismatch);
        }
        if self.source != other.source {
            return Err(SymbolError::WeightMismatch { expected: self.source.clone(), got: other.source.clone() });
        }
        if self.target != other.target {
            return Err(SymbolError::WeightMismatch { expected: self.target.clone(), got: other.target.clone() });
        }
        Ok(())
    }
}

/// `f -> X(f) + w div(X) f` on `w`-densities.
pub fn lie_derivative_density(x: &ConformalVectorField, sig: Signature, w: &Scalar) -> LinearDiffOp {
    let normal = density_operator_poly(x, &Poly::constant(sig.dim(), w.clone()));
    LinearDiffOp { sig, source: w.clone(), target: w.clone(), normal }
}

/// Normal-ordered form of the density Lie derivative with a weight that may
/// involve the formal `delta`.
pub fn density_operator_poly(x: &ConformalVectorField, w: &Poly) -> Poly {
    let m = x.dim();
    let mut out = w * &x.divergence();
    for (i, c) in x.components().iter().enumerate() {
        out.add_assign_ref(&c.mul_var(crate::poly::Var::Xi(i)));
    }
    debug_assert_eq!(out.dim(), m);
    out
}

/// Lie derivative of a symbol of weight `delta`:
/// `X(T) - (d_j X^i) xi_i dT/dxi_j + delta div(X) T`.
pub fn lie_derivative_symbol(x: &ConformalVectorField, t: &WeightedSymbol) -> WeightedSymbol {
    let w = Poly::constant(t.sig.dim(), t.weight.clone());
    t.with_poly(lie_derivative_symbol_poly(x, &w, &t.poly))
}

/// [`lie_derivative_symbol`] with a weight polynomial (possibly in `delta`).
pub fn lie_derivative_symbol_poly(x: &ConformalVectorField, weight: &Poly, t: &Poly) -> Poly {
    let m = x.dim();
    let mut out = x.apply(t);
    for j in 0..m {
        let dt = t.dxi(j);
        if dt.is_zero() {
            continue;
        }
        let mut lin = Poly::zero(m);
        for (i, c) in x.components().iter().enumerate() {
            lin.add_assign_ref(&c.dx(j).mul_var(crate::poly::Var::Xi(i)));
        }
        if !lin.is_zero() {
            out = &out - &(&lin * &dt);
        }
    }
    let div = x.divergence();
    if !div.is_zero() {
        out.add_assign_ref(&(&(weight * &div) * t));
    }
    out
}

/// Standard ordering: `xi^alpha -> d^alpha`, coefficients on the left.
pub fn q_aff(t: &WeightedSymbol, lambda: &Scalar) -> LinearDiffOp {
    LinearDiffOp {
        sig: t.sig,
        source: lambda.clone(),
        target: lambda + &t.weight,
        normal: t.poly.clone(),
    }
}

/// Inverse of [`q_aff`]; the weight is `mu - lambda`.
pub fn q_aff_inv(d: &LinearDiffOp) -> WeightedSymbol {
    WeightedSymbol { sig: d.sig, weight: &d.target - &d.source, poly: d.normal.clone() }
}

/// `D1 o D2`, requiring the target weight of `D2` to be the source weight
/// of `D1`.
pub fn compose(d1: &LinearDiffOp, d2: &LinearDiffOp) -> Result<LinearDiffOp, SymbolError> {
    if d1.sig != d2.sig {
        return Err(SymbolError::SignatureMismatch);
    }
    if d2.target != d1.source {
        return Err(SymbolError::WeightMismatch { expected: d1.source.clone(), got: d2.target.clone() });
    }
    Ok(LinearDiffOp {
        sig: d1.sig,
        source: d2.source.clone(),
        target: d1.target.clone(),
        normal: compose_normal(&d1.normal, &d2.normal),
    })
}

/// Leibniz composition of two normal-ordered operator polynomials:
/// `a(x) d^alpha o B = sum_{g <= alpha} binom(alpha, g) a(x) (d^g_x B) d^{alpha-g}`.
pub fn compose_normal(a: &Poly, b: &Poly) -> Poly {
    let m = a.dim();
    assert_eq!(m, b.dim(), "dimension mismatch");
    let mut derivs: HashMap<[u8; MAX_DIM], Poly> = HashMap::new();
    let mut out = Poly::zero(m);
    for (mono, c) in a.terms() {
        let alpha = *mono.xi();
        for g in sub_indices(&alpha[..m]) {
            let mut key = [0u8; MAX_DIM];
            key[..m].copy_from_slice(&g);
            let db = derivs.entry(key).or_insert_with(|| {
                let mut d = b.clone();
                for (i, &e) in g.iter().enumerate() {
                    for _ in 0..e {
                        d = d.dx(i);
                    }
                }
                d
            });
            if db.is_zero() {
                continue;
            }
            let mut rest = alpha;
            let mut binom = Scalar::one();
            for i in 0..m {
                rest[i] -= g[i];
                binom *= int(binomial(alpha[i], g[i]));
            }
            let shift = Monomial::new(&mono.x()[..m], &rest[..m]).with_delta(mono.delta());
            out.add_assign_ref(&db.mul_monomial(&shift, &(c * binom)));
        }
    }
    out
}

fn binomial(n: u8, k: u8) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * i64::from(n - i) / i64::from(i + 1))
}

/// All multi-indices `g <= alpha` componentwise.
fn sub_indices(alpha: &[u8]) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |e| {
                    let mut p = prefix.clone();
                    p.push(e);
                    p
                })
            })
            .collect();
    }
    out
}

/// The action on symbols transported from operators through [`q_aff`]:
/// `q_aff_inv(L^mu o q_aff(T) - q_aff(T) o L^lambda)` with `mu = lambda + delta`.
pub fn transferred_action(h: &AlgebraElement, t: &WeightedSymbol, lambda: &Scalar) -> WeightedSymbol {
    let x = vector_field_of(h);
    transferred_action_field(&x, t, lambda)
}

/// [`transferred_action`] for a precomputed vector field.
pub fn transferred_action_field(x: &ConformalVectorField, t: &WeightedSymbol, lambda: &Scalar) -> WeightedSymbol {
    let sig = t.sig;
    let d = q_aff(t, lambda);
    let mu = d.target.clone();
    let l_mu = lie_derivative_density(x, sig, &mu);
    let l_lambda = lie_derivative_density(x, sig, lambda);
    let left = compose(&l_mu, &d).expect("weights match by construction");
    let right = compose(&d, &l_lambda).expect("weights match by construction");
    q_aff_inv(&left.sub(&right).expect("same weights"))
}

/// The grade-one defect `transferred_action - lie_derivative_symbol`, from
/// its closed algebraic form on each homogeneous degree `k`:
/// `-(lambda m + k - 1) d_h T + 1/2 (h^flat . xi) Delta_J T`.
pub fn gamma(h: &AlgebraElement, t: &WeightedSymbol, lambda: &Scalar) -> Result<WeightedSymbol, SymbolError> {
    if h.signature() != t.sig {
        return Err(SymbolError::SignatureMismatch);
    }
    if h.grade() != Some(1) && !h.is_zero() {
        return Err(AlgebraError::NotInG1.into());
    }
    let cov = h.grade_decompose().covector.clone();
    Ok(t.with_poly(gamma_poly(t.sig, &cov, &t.poly, lambda)))
}

/// [`gamma`] for a covector `h` given by its components.
pub fn gamma_poly(sig: Signature, h: &[Scalar], t: &Poly, lambda: &Scalar) -> Poly {
    let m = sig.dim();
    let h_flat = Poly::xi_linear(m, &sig.flat(h));
    let lm = lambda * int(m as i64);
    let mut out = Poly::zero(m);
    for (k, part) in t.xi_homogeneous_parts() {
        if k == 0 {
            continue;
        }
        let c = -(&lm + int(i64::from(k) - 1));
        out.add_scaled(&part.xi_directional(h), &c);
        let lap = sig.laplacian_xi(&part);
        if !lap.is_zero() {
            out.add_scaled(&(&h_flat * &lap), &ratio(1, 2));
        }
    }
    out
}

/// Symmetrized iterated-derivative quantization in the flat frame:
/// each homogeneous part is read as a symmetric tensor `t_{i_1..i_k}` and
/// sent to the average over orderings of `t_{i_1..i_k} d_{i_1} o ... o d_{i_k}`.
pub fn flat_frame_quantization(t: &WeightedSymbol, lambda: &Scalar) -> LinearDiffOp {
    let sig = t.sig;
    let m = sig.dim();
    let mu = lambda + &t.weight;
    let partials: Vec<Poly> = (0..m).map(|i| Poly::xi(m, i)).collect();
    let mut normal = Poly::zero(m);
    for (k, part) in t.poly.xi_homogeneous_parts() {
        let k = k as usize;
        let tuples = index_tuples(m, k);
        let perms = permutations(k);
        let norm = Scalar::one() / int(perms.len() as i64);
        for tuple in &tuples {
            let comp = tensor_component(&part, tuple, m);
            if comp.is_zero() {
                continue;
            }
            let mut sym = Poly::zero(m);
            for perm in &perms {
                let chain = perm
                    .iter()
                    .fold(Poly::one(m), |acc, &s| compose_normal(&acc, &partials[tuple[s]]));
                sym.add_assign_ref(&chain);
            }
            normal.add_assign_ref(&compose_normal(&comp, &sym.scale(&norm)));
        }
    }
    LinearDiffOp { sig, source: lambda.clone(), target: mu, normal }
}

/// Symmetric tensor component `t_{i_1..i_k}` (an `x`-polynomial) of a
/// homogeneous symbol: the coefficient of `xi^alpha` divided by the
/// multinomial count of `alpha`.
fn tensor_component(part: &Poly, tuple: &[usize], m: usize) -> Poly {
    let mut alpha = [0u8; MAX_DIM];
    for &i in tuple {
        alpha[i] += 1;
    }
    let mut count = Scalar::one();
    let mut fact = 1i64;
    for (n, _) in tuple.iter().enumerate() {
        fact *= n as i64 + 1;
    }
    count *= int(fact);
    for &a in &alpha[..m] {
        for f in 1..=a {
            count /= int(i64::from(f));
        }
    }
    let mut out = Poly::zero(m);
    for (mono, c) in part.terms() {
        if mono.xi()[..m] == alpha[..m] {
            out.add_term(mono.coefficient_part(), c / &count);
        }
    }
    out
}

fn index_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `sum_i d_{x_i} d_{xi_i} T`, the flat divergence of a symbol.
pub fn flat_divergence(t: &Poly) -> Poly {
    let mut out = Poly::zero(t.dim());
    for i in 0..t.dim() {
        out.add_assign_ref(&t.dxi(i).dx(i));
    }
    out
}
