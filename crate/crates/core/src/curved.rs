//! Pointwise degree-4 curvature terms: the operators adding to `gamma` on
//! quartic symbols, the symbol corrections built from divergences of
//! curvature contractions, and checks on the curvature data.
//!
//! All operators act on values and jets at one point. Interior products are
//! tensor-normalized: on a symbol of degree `k`, `i(eta) T = (1/k) eta . dT/dxi`.

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::algebra::{AlgebraElement, AlgebraError, Signature};
use crate::linalg::Matrix;
use crate::poly::{int, Monomial, Poly, Scalar, MAX_DIM};
use crate::sample::{scalar, SampleRng};
use crate::symbol::{gamma_poly, WeightedSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurvedError {
    #[error("critical denominator at delta={delta} ({label})")]
    CriticalDenominator { delta: Scalar, label: &'static str },
    #[error("symbol degree {0} exceeds 4")]
    DegreeTooHigh(u32),
    #[error("jet of order {0} is required")]
    MissingJet(usize),
    #[error("second jet is not symmetric in ({0},{1})")]
    JetNotSymmetric(usize, usize),
    #[error("jet has {got} directions, expected {expected}")]
    JetShape { expected: usize, got: usize },
    #[error("curvature array has wrong shape: {0}")]
    Shape(String),
    #[error("symbol must have constant coefficients at the evaluation point")]
    NotPointwise,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `kappa0[j][k][i][l]`: entry `(l, i)` of `kappa0(e_j, e_k)`.
pub type Kappa0Array = Vec<Vec<Vec<Vec<Scalar>>>>;
/// `kappa1[j][k][l]`: component `l` of `kappa1(e_j, e_k)`.
pub type Kappa1Array = Vec<Vec<Vec<Scalar>>>;

/// Curvature data at a point: a `co(p,q)`-valued and a covector-valued
/// antisymmetric 2-form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvatureData {
    sig: Signature,
    /// `k0[j * m + k]` is the matrix of `kappa0(e_j, e_k)` acting on column vectors.
    k0: Vec<Matrix>,
    /// `k1[j * m + k][l] = <kappa1(e_j, e_k), e_l>`.
    k1: Vec<Vec<Scalar>>,
}

impl CurvatureData {
    pub fn zero(sig: Signature) -> Self {
        let m = sig.dim();
        Self {
            sig,
            k0: vec![Matrix::zeros(m, m); m * m],
            k1: vec![vec![Scalar::zero(); m]; m * m],
        }
    }

    /// From arrays `kappa0[j][k][i][l]` (the `(l,i)` entry of the matrix
    /// `kappa0(e_j, e_k)`, i.e. input index `i`, output index `l`) and
    /// `kappa1[j][k][l]`.
    pub fn from_arrays(
        sig: Signature,
        kappa0: &[Vec<Vec<Vec<Scalar>>>],
        kappa1: &[Vec<Vec<Scalar>>],
    ) -> Result<Self, CurvedError> {
        let m = sig.dim();
        let shape = |what: &str| CurvedError::Shape(what.to_string());
        if kappa0.len() != m || kappa1.len() != m {
            return Err(shape("outer length must be m"));
        }
        let mut out = Self::zero(sig);
        for j in 0..m {
            if kappa0[j].len() != m || kappa1[j].len() != m {
                return Err(shape("second index length must be m"));
            }
            for k in 0..m {
                if kappa0[j][k].len() != m || kappa1[j][k].len() != m {
                    return Err(shape("third index length must be m"));
                }
                for i in 0..m {
                    if kappa0[j][k][i].len() != m {
                        return Err(shape("fourth index length must be m"));
                    }
                    for l in 0..m {
                        out.k0[j * m + k][(l, i)] = kappa0[j][k][i][l].clone();
                    }
                }
                out.k1[j * m + k] = kappa1[j][k].clone();
            }
        }
        Ok(out)
    }

    /// Inverse of [`CurvatureData::from_arrays`].
    pub fn to_arrays(&self) -> (Kappa0Array, Kappa1Array) {
        let m = self.sig.dim();
        let k0 = (0..m)
            .map(|j| {
                (0..m)
                    .map(|k| (0..m).map(|i| (0..m).map(|l| self.k0[j * m + k][(l, i)].clone()).collect()).collect())
                    .collect()
            })
            .collect();
        let k1 = (0..m).map(|j| (0..m).map(|k| self.k1[j * m + k].clone()).collect()).collect();
        (k0, k1)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.k0.iter().all(Matrix::is_zero) && self.k1.iter().flatten().all(Zero::is_zero)
    }

    pub fn kappa0_basis(&self, j: usize, k: usize) -> &Matrix {
        &self.k0[j * self.sig.dim() + k]
    }

    pub fn kappa1_basis(&self, j: usize, k: usize) -> &[Scalar] {
        &self.k1[j * self.sig.dim() + k]
    }

    pub fn set_kappa0(&mut self, j: usize, k: usize, value: Matrix) {
        let m = self.sig.dim();
        self.k0[j * m + k] = value;
    }

    pub fn set_kappa1(&mut self, j: usize, k: usize, value: Vec<Scalar>) {
        let m = self.sig.dim();
        self.k1[j * m + k] = value;
    }

    /// `kappa0(x, y)` as a matrix.
    pub fn kappa0(&self, x: &[Scalar], y: &[Scalar]) -> Matrix {
        let m = self.sig.dim();
        let mut out = Matrix::zeros(m, m);
        for j in 0..m {
            if x[j].is_zero() {
                continue;
            }
            for k in 0..m {
                if !y[k].is_zero() {
                    out = out.add(&self.k0[j * m + k].scale(&(&x[j] * &y[k])));
                }
            }
        }
        out
    }

    /// `kappa1(x, y)` as a covector.
    pub fn kappa1(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let m = self.sig.dim();
        let mut out = vec![Scalar::zero(); m];
        for j in 0..m {
            for k in 0..m {
                let c = &x[j] * &y[k];
                if c.is_zero() {
                    continue;
                }
                for l in 0..m {
                    out[l] += &c * &self.k1[j * m + k][l];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            sig: self.sig,
            k0: self.k0.iter().zip(&other.k0).map(|(a, b)| a.add(b)).collect(),
            k1: self
                .k1
                .iter()
                .zip(&other.k1)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self {
            sig: self.sig,
            k0: self.k0.iter().map(|a| a.scale(c)).collect(),
            k1: self.k1.iter().map(|a| a.iter().map(|x| x * c).collect()).collect(),
        }
    }

    /// Contraction `sum_a kappa0(e_a, e_l)^a_j`, indexed `[j][l]`.
    pub fn contraction(&self) -> Matrix {
        let m = self.sig.dim();
        let mut out = Matrix::zeros(m, m);
        for j in 0..m {
            for l in 0..m {
                let mut acc = Scalar::zero();
                for a in 0..m {
                    acc += &self.k0[a * m + l][(a, j)];
                }
                out[(j, l)] = acc;
            }
        }
        out
    }
}

/// One violated condition found by [`check_normality`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalityViolation {
    Kappa0NotAntisymmetric { j: usize, k: usize },
    Kappa1NotAntisymmetric { j: usize, k: usize },
    NotConformal { j: usize, k: usize },
    NonzeroTrace { j: usize, k: usize },
    NonzeroContraction { j: usize, l: usize, value: Scalar },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalityReport {
    pub violations: Vec<NormalityViolation>,
}

impl NormalityReport {
    pub fn is_normal(&self) -> bool {
        self.violations.is_empty()
    }

    /// First `(j,l)` with a nonzero contraction.
    pub fn contraction_witness(&self) -> Option<(usize, usize)> {
        self.violations.iter().find_map(|v| match v {
            NormalityViolation::NonzeroContraction { j, l, .. } => Some((*j, *l)),
            _ => None,
        })
    }
}

/// Checks antisymmetry, `co(p,q)` membership, vanishing trace of `kappa0`
/// and vanishing of every contraction `sum_i kappa^i_{j i l}`.
pub fn check_normality(kappa: &CurvatureData) -> NormalityReport {
    let sig = kappa.sig;
    let m = sig.dim();
    let mut violations = Vec::new();
    for j in 0..m {
        for k in 0..m {
            let a = kappa.kappa0_basis(j, k);
            if !a.add(kappa.kappa0_basis(k, j)).is_zero() {
                violations.push(NormalityViolation::Kappa0NotAntisymmetric { j, k });
            }
            let b = kappa.kappa1_basis(j, k);
            if b.iter().zip(kappa.kappa1_basis(k, j)).any(|(x, y)| !(x + y).is_zero()) {
                violations.push(NormalityViolation::Kappa1NotAntisymmetric { j, k });
            }
            if !sig.is_co(a) {
                violations.push(NormalityViolation::NotConformal { j, k });
            }
            if !a.trace().is_zero() {
                violations.push(NormalityViolation::NonzeroTrace { j, k });
            }
        }
    }
    let c = kappa.contraction();
    for j in 0..m {
        for l in 0..m {
            if !c[(j, l)].is_zero() {
                violations.push(NormalityViolation::NonzeroContraction { j, l, value: c[(j, l)].clone() });
            }
        }
    }
    NormalityReport { violations }
}

/// Projects onto normal curvature: antisymmetrizes, drops the trace part of
/// `kappa0`, then subtracts the unique term
/// `z -> P(y,z)x - P(x,z)y + g(y,z)P^sharp x - g(x,z)P^sharp y`
/// that carries all contractions. In dimension `m <= 2` the result has
/// `kappa0 = 0`.
pub fn project_normal(kappa: &CurvatureData) -> CurvatureData {
    let sig = kappa.sig;
    let m = sig.dim();
    let half = Scalar::one() / int(2);
    let mut out = CurvatureData::zero(sig);
    for j in 0..m {
        for k in 0..m {
            let a = kappa.kappa0_basis(j, k).sub(kappa.kappa0_basis(k, j)).scale(&half);
            let c = a.trace() / int(m as i64);
            out.set_kappa0(j, k, a.sub(&Matrix::identity(m).scale(&c)));
            let b = kappa
                .kappa1_basis(j, k)
                .iter()
                .zip(kappa.kappa1_basis(k, j))
                .map(|(x, y)| (x - y) * &half)
                .collect();
            out.set_kappa1(j, k, b);
        }
    }
    if m <= 2 {
        for j in 0..m {
            for k in 0..m {
                out.set_kappa0(j, k, Matrix::zeros(m, m));
            }
        }
        return out;
    }
    // (m-2) P + g tr P = Ric with tr P = sum_a J_aa P_aa
    let ric = out.contraction();
    let jm = sig.metric_matrix();
    let tr_ric = jm.mul(&ric).trace();
    let tr_p = tr_ric / int(2 * m as i64 - 2);
    // contraction[(z, y)] = (m-2) P(y, z) + g(y, z) tr P
    let pt = ric.sub(&jm.scale(&tr_p)).scale(&(Scalar::one() / int(m as i64 - 2)));
    let p = pt.transpose();
    let p_sharp = jm.mul(&pt); // column a: P^sharp e_a
    for j in 0..m {
        for k in 0..m {
            let mut corr = Matrix::zeros(m, m);
            for z in 0..m {
                // K(e_j, e_k) e_z
                corr[(j, z)] += &p[(k, z)];
                corr[(k, z)] -= &p[(j, z)];
                for row in 0..m {
                    if k == z {
                        corr[(row, z)] += sig.metric(k) * &p_sharp[(row, j)];
                    }
                    if j == z {
                        corr[(row, z)] -= sig.metric(j) * &p_sharp[(row, k)];
                    }
                }
            }
            let cur = out.kappa0_basis(j, k).sub(&corr);
            out.set_kappa0(j, k, cur);
        }
    }
    out
}

/// Random curvature data: `kappa0` antisymmetric with values in `co(p,q)`
/// (including a trace part) and `kappa1` antisymmetric.
pub fn random_curvature(rng: &mut SampleRng, sig: Signature) -> CurvatureData {
    let m = sig.dim();
    let jm = sig.metric_matrix();
    let mut out = CurvatureData::zero(sig);
    for j in 0..m {
        for k in j + 1..m {
            let mut w = Matrix::zeros(m, m);
            for a in 0..m {
                for b in a + 1..m {
                    if rng.gen_bool(0.6) {
                        let v = scalar(rng);
                        w[(a, b)] = v.clone();
                        w[(b, a)] = -v;
                    }
                }
            }
            let mut a = jm.mul(&w);
            if rng.gen_bool(0.5) {
                a = a.add(&Matrix::identity(m).scale(&scalar(rng)));
            }
            out.set_kappa0(k, j, a.scale(&-Scalar::one()));
            out.set_kappa0(j, k, a);
            let v: Vec<Scalar> = (0..m).map(|_| scalar(rng)).collect();
            out.set_kappa1(k, j, v.iter().map(|x| -x).collect());
            out.set_kappa1(j, k, v);
        }
    }
    out
}

/// Random curvature passed through [`project_normal`].
pub fn random_normal_curvature(rng: &mut SampleRng, sig: Signature) -> CurvatureData {
    project_normal(&random_curvature(rng, sig))
}

/// Adds `eps` to the `(output a, input i)` entry of `kappa0(e_a, e_l)` and
/// subtracts it from `kappa0(e_l, e_a)`, changing the `(i,l)` contraction.
pub fn perturb_contraction(kappa: &CurvatureData, a: usize, i: usize, l: usize, eps: &Scalar) -> CurvatureData {
    assert_ne!(a, l, "perturbation needs two distinct directions");
    let mut out = kappa.clone();
    let mut x = out.kappa0_basis(a, l).clone();
    x[(a, i)] += eps;
    out.set_kappa0(a, l, x);
    let mut y = out.kappa0_basis(l, a).clone();
    y[(a, i)] -= eps;
    out.set_kappa0(l, a, y);
    out
}

/// `rho_*(kappa0(x, y))` on `lambda`-densities: `-lambda tr kappa0(x, y)`.
pub fn density_action(kappa: &CurvatureData, x: &[Scalar], y: &[Scalar], lambda: &Scalar) -> Scalar {
    -(lambda * kappa.kappa0(x, y).trace())
}

/// Derivative of the curvature along the fundamental field of `h` in `g_1`:
/// `kappa0` is annihilated and `kappa1(x,y) -> [kappa0(x,y), h] = -h o kappa0(x,y)`.
pub fn derkappa(kappa: &CurvatureData, h: &[Scalar]) -> CurvatureData {
    let m = kappa.sig.dim();
    let mut out = CurvatureData::zero(kappa.sig);
    for j in 0..m {
        for k in 0..m {
            let a = kappa.kappa0_basis(j, k);
            let v = (0..m)
                .map(|l| -(0..m).fold(Scalar::zero(), |acc, r| acc + &h[r] * &a[(r, l)]))
                .collect();
            out.set_kappa1(j, k, v);
        }
    }
    out
}

/// Value with first and optionally second derivatives along the frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet<V> {
    pub value: V,
    pub d1: Vec<V>,
    pub d2: Option<Vec<Vec<V>>>,
}

impl<V: PartialEq + Clone> Jet<V> {
    pub fn new(value: V, d1: Vec<V>, d2: Option<Vec<Vec<V>>>) -> Result<Self, CurvedError> {
        if let Some(d2) = &d2 {
            if d2.len() != d1.len() || d2.iter().any(|r| r.len() != d1.len()) {
                return Err(CurvedError::JetShape { expected: d1.len(), got: d2.len() });
            }
            for a in 0..d2.len() {
                for b in a + 1..d2.len() {
                    if d2[a][b] != d2[b][a] {
                        return Err(CurvedError::JetNotSymmetric(a, b));
                    }
                }
            }
        }
        Ok(Self { value, d1, d2 })
    }

    /// Jet of a constant: all derivatives zero.
    pub fn constant(value: V, zero: V, m: usize) -> Self {
        Self { value, d1: vec![zero.clone(); m], d2: Some(vec![vec![zero; m]; m]) }
    }

    fn second(&self) -> Result<&Vec<Vec<V>>, CurvedError> {
        self.d2.as_ref().ok_or(CurvedError::MissingJet(2))
    }
}

/// Jet of a symbol at a point, read off from polynomial coefficients at `x`.
pub fn symbol_jet_at(t: &Poly, x: &[Scalar]) -> Jet<Poly> {
    let m = t.dim();
    Jet {
        value: t.evaluate_x(x),
        d1: (0..m).map(|j| t.dx(j).evaluate_x(x)).collect(),
        d2: Some((0..m).map(|j| (0..m).map(|l| t.dx(j).dx(l).evaluate_x(x)).collect()).collect()),
    }
}

fn jet_degree(jet: &Jet<Poly>) -> Option<u32> {
    let mut polys: Vec<&Poly> = vec![&jet.value];
    polys.extend(jet.d1.iter());
    if let Some(d2) = &jet.d2 {
        polys.extend(d2.iter().flatten());
    }
    polys.into_iter().filter_map(Poly::xi_degree).max()
}

/// `div^omega T = sum_j L_{e_j} i(eta^j) T`.
pub fn div_omega(jet: &Jet<Poly>) -> Poly {
    let m = jet.d1.len();
    let dim = jet.value.dim();
    let k = match jet_degree(jet) {
        Some(k) if k > 0 => k,
        _ => return Poly::zero(dim),
    };
    let mut out = Poly::zero(dim);
    for j in 0..m {
        out.add_assign_ref(&jet.d1[j].dxi(j));
    }
    out.scale(&(Scalar::one() / int(i64::from(k))))
}

/// `div^{omega^2} T = sum_{j,l} L_{e_j} L_{e_l} i(eta^j) i(eta^l) T`.
pub fn div2_omega(jet: &Jet<Poly>) -> Result<Poly, CurvedError> {
    let d2 = jet.second()?;
    let m = jet.d1.len();
    let dim = jet.value.dim();
    let k = match jet_degree(jet) {
        Some(k) if k > 1 => k,
        _ => return Ok(Poly::zero(dim)),
    };
    let mut out = Poly::zero(dim);
    for j in 0..m {
        for l in 0..m {
            out.add_assign_ref(&d2[j][l].dxi(j).dxi(l));
        }
    }
    Ok(out.scale(&(Scalar::one() / int(i64::from(k * (k - 1))))))
}

/// `(1/24) sum_{S nonempty} (-1)^{4-|S|} q(sum_{i in S} h_i)`, the symmetric
/// 4-linear form of a quartic `q`.
pub fn polarize4<F>(q: F, h: [&[Scalar]; 4]) -> Poly
where
    F: Fn(&[Scalar]) -> Poly,
{
    let m = h[0].len();
    let mut out: Option<Poly> = None;
    for mask in 1u32..16 {
        let mut v = vec![Scalar::zero(); m];
        for (i, hi) in h.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for a in 0..m {
                    v[a] += &hi[a];
                }
            }
        }
        let sign = if (4 - mask.count_ones()) % 2 == 0 { Scalar::one() } else { -Scalar::one() };
        let val = q(&v).scale(&sign);
        out = Some(match out {
            None => val,
            Some(acc) => &acc + &val,
        });
    }
    out.expect("nonempty").scale(&(Scalar::one() / int(24)))
}

fn unit(m: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); m];
    v[i] = Scalar::one();
    v
}

fn mat_vec(a: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    a.mul_vec(v)
}

/// Extends a quartic `X -> q(X)` to a degree-4 symbol by reading each
/// monomial `xi_{i1}..xi_{i4}` as `M(e_{i1},..,e_{i4})`, coefficients
/// carried along. Terms of other degrees contribute nothing.
fn extend_quartic<F>(t: &Poly, q: F) -> Result<Poly, CurvedError>
where
    F: Fn(&[Scalar]) -> Poly,
{
    let m = t.dim();
    let mut out = Poly::zero(m);
    let mut cache: std::collections::HashMap<[u8; MAX_DIM], Poly> = std::collections::HashMap::new();
    for (mono, c) in t.terms() {
        let k = mono.xi_degree();
        if k > 4 {
            return Err(CurvedError::DegreeTooHigh(k));
        }
        if k < 4 {
            continue;
        }
        let key = *mono.xi();
        let value = cache.entry(key).or_insert_with(|| {
            let mut idx = Vec::new();
            for (i, &e) in key[..m].iter().enumerate() {
                for _ in 0..e {
                    idx.push(unit(m, i));
                }
            }
            polarize4(&q, [&idx[0], &idx[1], &idx[2], &idx[3]])
        });
        out.add_assign_ref(&value.mul_monomial(&mono.coefficient_part(), c));
    }
    Ok(out)
}

fn g1_covector(h: &AlgebraElement) -> Result<Vec<Scalar>, CurvedError> {
    if h.grade() != Some(1) && !h.is_zero() {
        return Err(AlgebraError::NotInG1.into());
    }
    Ok(h.grade_decompose().covector.clone())
}

/// `gamma3(h)(X^4) = |X|^2 kappa0(h^flat, X) X`, as a degree-1 symbol.
pub fn gamma3_quartic(kappa: &CurvatureData, h: &[Scalar], x: &[Scalar]) -> Poly {
    let sig = kappa.sig;
    let hf = sig.flat(h);
    let v = mat_vec(&kappa.kappa0(&hf, x), x);
    Poly::xi_linear(sig.dim(), &v).scale(&sig.norm2(x))
}

/// `gamma4(h)(X^4) = -lambda m |X|^2 <kappa1(h^flat, X), X>`.
pub fn gamma4_quartic(kappa: &CurvatureData, h: &[Scalar], x: &[Scalar], lambda: &Scalar) -> Poly {
    let sig = kappa.sig;
    let m = sig.dim();
    let hf = sig.flat(h);
    let pairing = kappa.kappa1(&hf, x).iter().zip(x).fold(Scalar::zero(), |a, (u, v)| a + u * v);
    Poly::constant(m, -(lambda * int(m as i64) * sig.norm2(x) * pairing))
}

pub fn gamma3(h: &AlgebraElement, t: &WeightedSymbol, kappa: &CurvatureData) -> Result<WeightedSymbol, CurvedError> {
    let hc = g1_covector(h)?;
    let out = extend_quartic(t.poly(), |x| gamma3_quartic(kappa, &hc, x))?;
    Ok(t.with_poly(out))
}

pub fn gamma4(
    h: &AlgebraElement,
    t: &WeightedSymbol,
    kappa: &CurvatureData,
    lambda: &Scalar,
) -> Result<WeightedSymbol, CurvedError> {
    let hc = g1_covector(h)?;
    let out = extend_quartic(t.poly(), |x| gamma4_quartic(kappa, &hc, x, lambda))?;
    Ok(t.with_poly(out))
}

/// `gamma + gamma3 + gamma4` on symbols of degree at most 4.
pub fn gamma_prime(
    h: &AlgebraElement,
    t: &WeightedSymbol,
    kappa: &CurvatureData,
    lambda: &Scalar,
) -> Result<WeightedSymbol, CurvedError> {
    if let Some(k) = t.degree() {
        if k > 4 {
            return Err(CurvedError::DegreeTooHigh(k));
        }
    }
    let hc = g1_covector(h)?;
    let flat = gamma_poly(t.signature(), &hc, t.poly(), lambda);
    let g3 = gamma3(h, t, kappa)?;
    let g4 = gamma4(h, t, kappa, lambda)?;
    Ok(t.with_poly(&(&flat + g3.poly()) + g4.poly()))
}

fn guard(delta: &Scalar, m: usize, offsets: &[(i64, &'static str)]) -> Result<(), CurvedError> {
    for &(off, label) in offsets {
        if int(m as i64) * delta == int(m as i64 + off) {
            return Err(CurvedError::CriticalDenominator { delta: delta.clone(), label });
        }
    }
    Ok(())
}

/// Degree-2 symbol `sum_j (kappa0(eta^{j flat}, X) X . xi) xi_j`.
fn kappa_contraction_symbol(kappa: &CurvatureData, x: &[Scalar]) -> Poly {
    let sig = kappa.sig;
    let m = sig.dim();
    let mut out = Poly::zero(m);
    for j in 0..m {
        let mut ej = unit(m, j);
        ej[j] = sig.metric(j);
        let v = mat_vec(&kappa.kappa0(&ej, x), x);
        out.add_assign_ref(&(&Poly::xi_linear(m, &v) * &Poly::xi(m, j)));
    }
    out
}

/// Jet of `t * S(kappa)` by the product rule.
fn product_jet(t: &Jet<Scalar>, kappa: &Jet<CurvatureData>, x: &[Scalar], second: bool) -> Result<Jet<Poly>, CurvedError> {
    let m = kappa.value.sig.dim();
    if t.d1.len() != m || kappa.d1.len() != m {
        return Err(CurvedError::JetShape { expected: m, got: t.d1.len().min(kappa.d1.len()) });
    }
    let s0 = kappa_contraction_symbol(&kappa.value, x);
    let s1: Vec<Poly> = kappa.d1.iter().map(|k| kappa_contraction_symbol(k, x)).collect();
    let value = s0.scale(&t.value);
    let d1 = (0..m).map(|j| &s0.scale(&t.d1[j]) + &s1[j].scale(&t.value)).collect();
    let d2 = if second {
        let t2 = t.second()?;
        let k2 = kappa.second()?;
        Some(
            (0..m)
                .map(|j| {
                    (0..m)
                        .map(|l| {
                            let s2 = kappa_contraction_symbol(&k2[j][l], x);
                            let mut acc = s0.scale(&t2[j][l]);
                            acc.add_assign_ref(&s1[l].scale(&t.d1[j]));
                            acc.add_assign_ref(&s1[j].scale(&t.d1[l]));
                            acc.add_assign_ref(&s2.scale(&t.value));
                            acc
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(Jet { value, d1, d2 })
}

/// `Q3(t X^4) = -|X|^2 [ t sum_j <kappa1(eta^{j flat}, X), X> xi_j
///   + 2/(m+2-m delta) div^omega(t sum_j kappa0(eta^{j flat}, X) X v e_j) ]`.
pub fn q3_correction(
    t: &Jet<Scalar>,
    kappa: &Jet<CurvatureData>,
    x: &[Scalar],
    delta: &Scalar,
) -> Result<Poly, CurvedError> {
    let sig = kappa.value.sig;
    let m = sig.dim();
    guard(delta, m, &[(2, "m + 2 - m delta = 0")])?;
    let mut first = vec![Scalar::zero(); m];
    for (j, fj) in first.iter_mut().enumerate() {
        let mut ej = unit(m, j);
        ej[j] = sig.metric(j);
        let pairing = kappa.value.kappa1(&ej, x).iter().zip(x).fold(Scalar::zero(), |a, (u, v)| a + u * v);
        *fj = &t.value * pairing;
    }
    let jet = product_jet(t, kappa, x, false)?;
    let c = int(2) / (int(m as i64 + 2) - int(m as i64) * delta);
    let inner = &Poly::xi_linear(m, &first) + &div_omega(&jet).scale(&c);
    Ok(inner.scale(&-sig.norm2(x)))
}

/// `Q4(t X^4) = -m lambda / ((m+1-m delta)(m+2-m delta)) |X|^2
///   div^{omega^2}(t sum_j kappa0(eta^{j flat}, X) X v e_j)`.
pub fn q4_correction(
    t: &Jet<Scalar>,
    kappa: &Jet<CurvatureData>,
    x: &[Scalar],
    delta: &Scalar,
    lambda: &Scalar,
) -> Result<Poly, CurvedError> {
    let sig = kappa.value.sig;
    let m = sig.dim() as i64;
    guard(delta, sig.dim(), &[(1, "m + 1 - m delta = 0"), (2, "m + 2 - m delta = 0")])?;
    let jet = product_jet(t, kappa, x, true)?;
    let md = int(m) * delta;
    let c = -(int(m) * lambda) / ((int(m + 1) - &md) * (int(m + 2) - &md));
    Ok(div2_omega(&jet)?.scale(&(c * sig.norm2(x))))
}

/// Coefficient jet of `xi^alpha` in a symbol jet.
fn coefficient_jet(jet: &Jet<Poly>, alpha: &Monomial) -> Jet<Scalar> {
    Jet {
        value: jet.value.coeff(alpha),
        d1: jet.d1.iter().map(|p| p.coeff(alpha)).collect(),
        d2: jet.d2.as_ref().map(|d2| d2.iter().map(|r| r.iter().map(|p| p.coeff(alpha)).collect()).collect()),
    }
}

fn quartic_monomials(jet: &Jet<Poly>) -> Result<Vec<Monomial>, CurvedError> {
    let mut polys: Vec<&Poly> = vec![&jet.value];
    polys.extend(jet.d1.iter());
    if let Some(d2) = &jet.d2 {
        polys.extend(d2.iter().flatten());
    }
    let mut out: Vec<Monomial> = Vec::new();
    for p in polys {
        for (mono, _) in p.terms() {
            if mono.x_degree() > 0 || mono.delta() > 0 {
                return Err(CurvedError::NotPointwise);
            }
            match mono.xi_degree() {
                4 => {
                    if !out.contains(mono) {
                        out.push(*mono);
                    }
                }
                k if k > 4 => return Err(CurvedError::DegreeTooHigh(k)),
                _ => {}
            }
        }
    }
    out.sort();
    Ok(out)
}

fn polarized_correction<F>(jet: &Jet<Poly>, f: F) -> Result<Poly, CurvedError>
where
    F: Fn(&Jet<Scalar>, &[Scalar]) -> Result<Poly, CurvedError>,
{
    let m = jet.value.dim();
    let mut out = Poly::zero(m);
    for alpha in quartic_monomials(jet)? {
        let tj = coefficient_jet(jet, &alpha);
        let mut idx = Vec::new();
        for (i, &e) in alpha.xi()[..m].iter().enumerate() {
            for _ in 0..e {
                idx.push(unit(m, i));
            }
        }
        // evaluate once to surface guard errors, then polarize
        f(&tj, &idx[0])?;
        let val = polarize4(|x| f(&tj, x).expect("checked above"), [&idx[0], &idx[1], &idx[2], &idx[3]]);
        out.add_assign_ref(&val);
    }
    Ok(out)
}

/// [`q3_correction`] extended to a general quartic symbol jet.
pub fn q3_polarized(jet: &Jet<Poly>, kappa: &Jet<CurvatureData>, delta: &Scalar) -> Result<Poly, CurvedError> {
    guard(delta, kappa.value.sig.dim(), &[(2, "m + 2 - m delta = 0")])?;
    polarized_correction(jet, |t, x| q3_correction(t, kappa, x, delta))
}

/// [`q4_correction`] extended to a general quartic symbol jet.
pub fn q4_polarized(
    jet: &Jet<Poly>,
    kappa: &Jet<CurvatureData>,
    delta: &Scalar,
    lambda: &Scalar,
) -> Result<Poly, CurvedError> {
    guard(delta, kappa.value.sig.dim(), &[(1, "m + 1 - m delta = 0"), (2, "m + 2 - m delta = 0")])?;
    polarized_correction(jet, |t, x| q4_correction(t, kappa, x, delta, lambda))
}

/// `(m+2k-2-m delta) i(h)T - (k-1) i(eta^j) i(e_j^sharp) T v h^flat` for
/// homogeneous `T` of degree `k`.
pub fn div_commutator(sig: Signature, h: &[Scalar], t: &Poly, delta: &Scalar) -> Poly {
    let m = sig.dim();
    let Some(k) = t.xi_degree() else {
        return Poly::zero(m);
    };
    if k == 0 {
        return Poly::zero(m);
    }
    let kk = int(i64::from(k));
    let ih = t.xi_directional(h).scale(&(Scalar::one() / &kk));
    let c1 = int(m as i64 + 2 * i64::from(k) - 2) - int(m as i64) * delta;
    let mut out = ih.scale(&c1);
    if k >= 2 {
        let trace = sig.laplacian_xi(t).scale(&(Scalar::one() / (&kk * int(i64::from(k) - 1))));
        let hf = Poly::xi_linear(m, &sig.flat(h));
        out = &out - &(&trace * &hf).scale(&int(i64::from(k) - 1));
    }
    out
}

/// Second-order companion of [`div_commutator`], in jet form:
/// `(2m+4k-6-2m delta) i(h) div^omega T - 2/(k-1) h^flat v Delta(div^omega T)
///   - L_{h^flat} i(eta^j) i(e_j^sharp) T`.
/// For `k = 2` this is `2(m+1-m delta) i(h) div^omega T - L_{h^flat} i(eta^j) i(e_j^sharp) T`.
pub fn div_commutator_second(sig: Signature, h: &[Scalar], jet: &Jet<Poly>, delta: &Scalar) -> Poly {
    let m = sig.dim();
    let Some(k) = jet_degree(jet) else {
        return Poly::zero(m);
    };
    if k < 2 {
        return Poly::zero(m);
    }
    let k1 = int(i64::from(k) - 1);
    let div = div_omega(jet);
    let ih = div.xi_directional(h).scale(&(Scalar::one() / &k1));
    let c = int(2 * m as i64 + 4 * i64::from(k) - 6) - int(2 * m as i64) * delta;
    let hf = sig.flat(h);
    let hf_xi = Poly::xi_linear(m, &hf);
    let inner = (&hf_xi * &sig.laplacian_xi(&div)).scale(&(int(2) / &k1));
    let mut along = Poly::zero(m);
    for (a, ha) in hf.iter().enumerate() {
        along.add_scaled(&jet.d1[a], ha);
    }
    let trace = sig.laplacian_xi(&along).scale(&(Scalar::one() / int(i64::from(k * (k - 1)))));
    &(&ih.scale(&c) - &inner) - &trace
}
