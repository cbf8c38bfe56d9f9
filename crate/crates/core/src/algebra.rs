//! The conformal algebra `so(p+1, q+1)` in its `(m+2) x (m+2)` matrix
//! realization, graded as `g_{-1} + g_0 + g_1 = R^m + co(p,q) + R^{m*}`.
//!
//! Matrix layout, with `v` a vector, `xi` a covector, `A` in `so(p,q)` and
//! `a` a scalar:
//!
//! ```text
//! [ -a      v^sharp   0 ]
//! [ xi^flat  A        v ]
//! [  0       xi       a ]
//! ```
//!
//! The `co(p,q)` component of such a matrix is `A - a Id`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::poly::{int, ratio, Poly, Scalar, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("invalid signature ({p},{q}): need 1 <= p+q <= {MAX_DIM}")]
    BadSignature { p: usize, q: usize },
    #[error("cannot parse signature {0:?}, expected `p,q`")]
    SignatureParse(String),
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error("matrix is not in so(p+1,q+1)")]
    NotInAlgebra,
    #[error("matrix is not in co(p,q)")]
    NotInCo,
    #[error("element is not in g_1")]
    NotInG1,
    #[error("expected {expected} components, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("realization is neither a homomorphism nor an anti-homomorphism on basis pair ({0},{1})")]
    InconsistentRealization(usize, usize),
}

/// Metric signature `(p, q)` of `g_0 = diag(I_p, -I_q)` on `R^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self, AlgebraError> {
        let m = p + q;
        if m == 0 || m > MAX_DIM {
            return Err(AlgebraError::BadSignature { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn euclidean(m: usize) -> Self {
        Self::new(m, 0).expect("valid dimension")
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal entry `J_ii` as `+1` or `-1`.
    pub fn metric(&self, i: usize) -> Scalar {
        if i < self.p {
            Scalar::one()
        } else {
            -Scalar::one()
        }
    }

    pub fn metric_matrix(&self) -> Matrix {
        let m = self.dim();
        let mut j = Matrix::zeros(m, m);
        for i in 0..m {
            j[(i, i)] = self.metric(i);
        }
        j
    }

    /// `x -> x^sharp = g_0(x, .)`; numerically `J x` since `J` is diagonal.
    pub fn sharp(&self, v: &[Scalar]) -> Vec<Scalar> {
        v.iter().enumerate().map(|(i, c)| c * self.metric(i)).collect()
    }

    /// Inverse of [`Signature::sharp`]; also `J xi` because `J^2 = I`.
    pub fn flat(&self, xi: &[Scalar]) -> Vec<Scalar> {
        self.sharp(xi)
    }

    /// `g_0(u, v)`.
    pub fn inner(&self, u: &[Scalar], v: &[Scalar]) -> Scalar {
        u.iter()
            .zip(v)
            .enumerate()
            .fold(Scalar::zero(), |acc, (i, (a, b))| acc + self.metric(i) * a * b)
    }

    /// `|x|^2 = g_0(x, x)`.
    pub fn norm2(&self, v: &[Scalar]) -> Scalar {
        self.inner(v, v)
    }

    /// `|x|^2` as a polynomial in the base-point variables.
    pub fn norm2_x(&self) -> Poly {
        let m = self.dim();
        let mut out = Poly::zero(m);
        for i in 0..m {
            out.add_scaled(&(&Poly::x(m, i) * &Poly::x(m, i)), &self.metric(i));
        }
        out
    }

    /// `|xi|^2_J = sum J^{ab} xi_a xi_b`.
    pub fn norm2_xi(&self) -> Poly {
        let m = self.dim();
        let mut out = Poly::zero(m);
        for i in 0..m {
            out.add_scaled(&(&Poly::xi(m, i) * &Poly::xi(m, i)), &self.metric(i));
        }
        out
    }

    /// Fiber Laplacian `Delta_J = sum J^{ab} d_{xi_a} d_{xi_b}`.
    pub fn laplacian_xi(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(p.dim());
        for i in 0..self.dim() {
            out.add_scaled(&p.dxi(i).dxi(i), &self.metric(i));
        }
        out
    }

    /// Base Laplacian `sum J^{ab} d_{x_a} d_{x_b}`.
    pub fn laplacian_x(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(p.dim());
        for i in 0..self.dim() {
            out.add_scaled(&p.dx(i).dx(i), &self.metric(i));
        }
        out
    }

    /// `J`-antisymmetry `A^T J + J A = 0`.
    pub fn is_so(&self, a: &Matrix) -> bool {
        let j = self.metric_matrix();
        a.transpose().mul(&j).add(&j.mul(a)).is_zero()
    }

    /// Membership in `co(p,q) = so(p,q) + R Id`.
    pub fn is_co(&self, b: &Matrix) -> bool {
        let m = self.dim();
        if b.rows() != m || b.cols() != m {
            return false;
        }
        let c = b.trace() / int(m as i64);
        self.is_so(&b.sub(&Matrix::identity(m).scale(&c)))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

impl FromStr for Signature {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AlgebraError::SignatureParse(s.to_string());
        let (p, q) = s.split_once(',').ok_or_else(bad)?;
        let p = p.trim().parse().map_err(|_| bad())?;
        let q = q.trim().parse().map_err(|_| bad())?;
        Signature::new(p, q)
    }
}

/// Graded components `(v, B, xi)` with `B in co(p,q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedParts {
    pub vector: Vec<Scalar>,
    pub co: Matrix,
    pub covector: Vec<Scalar>,
}

/// One graded piece, as accepted by [`AlgebraElement::embed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GradedPart {
    Vector(Vec<Scalar>),
    Co(Matrix),
    Covector(Vec<Scalar>),
}

/// An element of `so(p+1, q+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    sig: Signature,
    matrix: Matrix,
    parts: GradedParts,
}

impl AlgebraElement {
    pub fn zero(sig: Signature) -> Self {
        let n = sig.dim() + 2;
        Self::from_matrix(sig, Matrix::zeros(n, n)).expect("zero is in the algebra")
    }

    /// Wraps a matrix after checking `X^T S + S X = 0`.
    pub fn from_matrix(sig: Signature, matrix: Matrix) -> Result<Self, AlgebraError> {
        let n = sig.dim() + 2;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(AlgebraError::NotInAlgebra);
        }
        let s = form_matrix(sig);
        if !matrix.transpose().mul(&s).add(&s.mul(&matrix)).is_zero() {
            return Err(AlgebraError::NotInAlgebra);
        }
        let parts = decompose(sig, &matrix);
        Ok(Self { sig, matrix, parts })
    }

    pub fn embed(sig: Signature, part: GradedPart) -> Result<Self, AlgebraError> {
        let m = sig.dim();
        let n = m + 2;
        let mut x = Matrix::zeros(n, n);
        match part {
            GradedPart::Vector(v) => {
                check_len(&v, m)?;
                let vs = sig.sharp(&v);
                for i in 0..m {
                    x[(1 + i, n - 1)] = v[i].clone();
                    x[(0, 1 + i)] = vs[i].clone();
                }
            }
            GradedPart::Covector(xi) => {
                check_len(&xi, m)?;
                let xf = sig.flat(&xi);
                for i in 0..m {
                    x[(n - 1, 1 + i)] = xi[i].clone();
                    x[(1 + i, 0)] = xf[i].clone();
                }
            }
            GradedPart::Co(b) => {
                if !sig.is_co(&b) {
                    return Err(AlgebraError::NotInCo);
                }
                // B = A - a Id with tr A = 0
                let a = -b.trace() / int(m as i64);
                x[(0, 0)] = -a.clone();
                x[(n - 1, n - 1)] = a.clone();
                for i in 0..m {
                    for j in 0..m {
                        x[(1 + i, 1 + j)] = b[(i, j)].clone();
                    }
                    x[(1 + i, 1 + i)] += &a;
                }
            }
        }
        Self::from_matrix(sig, x)
    }

    pub fn vector(sig: Signature, v: Vec<Scalar>) -> Result<Self, AlgebraError> {
        Self::embed(sig, GradedPart::Vector(v))
    }

    pub fn covector(sig: Signature, xi: Vec<Scalar>) -> Result<Self, AlgebraError> {
        Self::embed(sig, GradedPart::Covector(xi))
    }

    pub fn co(sig: Signature, b: Matrix) -> Result<Self, AlgebraError> {
        Self::embed(sig, GradedPart::Co(b))
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn grade_decompose(&self) -> &GradedParts {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// `Some(-1 | 0 | 1)` when the element lies in a single graded piece
    /// (zero counts as grade 0).
    pub fn grade(&self) -> Option<i8> {
        let GradedParts { vector, co, covector } = &self.parts;
        let v = vector.iter().any(|c| !c.is_zero());
        let b = !co.is_zero();
        let x = covector.iter().any(|c| !c.is_zero());
        match (v, b, x) {
            (true, false, false) => Some(-1),
            (false, _, false) => Some(0),
            (false, false, true) => Some(1),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        Self::from_matrix(self.sig, self.matrix.add(&other.matrix)).expect("closed under addition")
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_matrix(self.sig, self.matrix.scale(c)).expect("closed under scaling")
    }

    /// Matrix commutator `XY - YX`.
    pub fn bracket(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        let c = self.matrix.mul(&other.matrix).sub(&other.matrix.mul(&self.matrix));
        Self::from_matrix(self.sig, c).expect("closed under bracket")
    }
}

fn check_len(v: &[Scalar], m: usize) -> Result<(), AlgebraError> {
    if v.len() == m {
        Ok(())
    } else {
        Err(AlgebraError::WrongLength { expected: m, got: v.len() })
    }
}

/// The matrix `S` of the invariant form `B(x, y) = y^T S x`.
pub fn form_matrix(sig: Signature) -> Matrix {
    let m = sig.dim();
    let n = m + 2;
    let mut s = Matrix::zeros(n, n);
    s[(0, n - 1)] = -Scalar::one();
    s[(n - 1, 0)] = -Scalar::one();
    for i in 0..m {
        s[(1 + i, 1 + i)] = sig.metric(i);
    }
    s
}

fn decompose(sig: Signature, x: &Matrix) -> GradedParts {
    let m = sig.dim();
    let n = m + 2;
    let a = x[(n - 1, n - 1)].clone();
    let mut co = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            co[(i, j)] = x[(1 + i, 1 + j)].clone();
        }
        co[(i, i)] -= &a;
    }
    GradedParts {
        vector: (0..m).map(|i| x[(1 + i, n - 1)].clone()).collect(),
        co,
        covector: (0..m).map(|j| x[(n - 1, 1 + j)].clone()).collect(),
    }
}

/// Polynomial vector field on `R^m`, components in the `x` variables only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformalVectorField {
    components: Vec<Poly>,
}

impl ConformalVectorField {
    pub fn new(components: Vec<Poly>) -> Self {
        assert!(!components.is_empty(), "empty vector field");
        let m = components.len();
        assert!(components.iter().all(|c| c.dim() == m && c.xi_degree().unwrap_or(0) == 0));
        Self { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn divergence(&self) -> Poly {
        let mut out = Poly::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            out.add_assign_ref(&c.dx(i));
        }
        out
    }

    /// `X(f) = sum X^i d_i f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            let d = f.dx(i);
            if !d.is_zero() {
                out.add_assign_ref(&(c * &d));
            }
        }
        out
    }

    /// `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn bracket(&self, other: &Self) -> Self {
        Self::new(
            (0..self.dim())
                .map(|i| &self.apply(&other.components[i]) - &other.apply(&self.components[i]))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::new(self.components.iter().map(|p| p.scale(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }
}

/// Realizes `h` as a vector field on `R^m`: `-h` on `g_{-1}`, `-[h,x]` on
/// `g_0` and `-1/2 [[h,x],x]` on `g_1`, extended linearly.
pub fn vector_field_of(h: &AlgebraElement) -> ConformalVectorField {
    let sig = h.signature();
    let m = sig.dim();
    let parts = h.grade_decompose();
    let mut comps: Vec<Poly> = parts.vector.iter().map(|c| Poly::constant(m, -c.clone())).collect();
    let unit = |j: usize| {
        let mut v = vec![Scalar::zero(); m];
        v[j] = Scalar::one();
        AlgebraElement::vector(sig, v).expect("basis vector")
    };
    if !parts.co.is_zero() {
        let b = AlgebraElement::co(sig, parts.co.clone()).expect("co part");
        for j in 0..m {
            let w = b.bracket(&unit(j));
            for (i, c) in w.grade_decompose().vector.iter().enumerate() {
                comps[i].add_scaled(&Poly::x(m, j), &-c.clone());
            }
        }
    }
    if parts.covector.iter().any(|c| !c.is_zero()) {
        let g1 = AlgebraElement::covector(sig, parts.covector.clone()).expect("g1 part");
        let half = ratio(1, 2);
        for j in 0..m {
            let inner = g1.bracket(&unit(j));
            for k in 0..m {
                let w = inner.bracket(&unit(k));
                let xx = &Poly::x(m, j) * &Poly::x(m, k);
                for (i, c) in w.grade_decompose().vector.iter().enumerate() {
                    comps[i].add_scaled(&xx, &-(c * &half));
                }
            }
        }
    }
    ConformalVectorField::new(comps)
}

/// The algebra for a fixed signature with its standard basis, Killing form
/// (computed from structure constants) and Killing-dual basis of `g_1`.
#[derive(Debug, Clone)]
pub struct ConformalAlgebra {
    sig: Signature,
    basis: Vec<AlgebraElement>,
    killing: Matrix,
    killing_inv: Matrix,
    eps: Vec<AlgebraElement>,
    fields: Vec<ConformalVectorField>,
}

impl ConformalAlgebra {
    pub fn new(sig: Signature) -> Self {
        let basis = standard_basis(sig);
        let ad: Vec<Matrix> = basis
            .iter()
            .map(|u| {
                let cols: Vec<Vec<Scalar>> =
                    basis.iter().map(|w| coordinates(&u.bracket(w))).collect();
                Matrix::from_rows(cols).transpose()
            })
            .collect();
        let n = basis.len();
        let mut killing = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = ad[a].mul(&ad[b]).trace();
                killing[(a, b)] = v.clone();
                killing[(b, a)] = v;
            }
        }
        let killing_inv = killing.inverse().expect("Killing form of a semisimple algebra is nondegenerate");
        let m = sig.dim();
        let g1 = n - m; // index of the first g_1 basis element
        let mut pairing = Matrix::zeros(m, m);
        for j in 0..m {
            for l in 0..m {
                pairing[(j, l)] = killing[(j, g1 + l)].clone();
            }
        }
        let pinv = pairing.inverse().expect("Killing pairing g_{-1} x g_1 is nondegenerate");
        // eps^i = sum_l c_l f^l with sum_l K(e_j, f^l) c_l = delta_ij
        let eps = (0..m)
            .map(|i| {
                let c = pinv.column(i);
                c.iter()
                    .enumerate()
                    .fold(AlgebraElement::zero(sig), |acc, (l, cl)| acc.add(&basis[g1 + l].scale(cl)))
            })
            .collect();
        let fields = basis.iter().map(vector_field_of).collect();
        Self { sig, basis, killing, killing_inv, eps, fields }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    /// Vector fields of the standard basis, in basis order.
    pub fn basis_fields(&self) -> &[ConformalVectorField] {
        &self.fields
    }

    /// Grade of each basis element, in basis order.
    pub fn basis_grades(&self) -> Vec<i8> {
        self.basis.iter().map(|b| b.grade().expect("homogeneous basis")).collect()
    }

    pub fn killing_matrix(&self) -> &Matrix {
        &self.killing
    }

    pub fn killing_inverse(&self) -> &Matrix {
        &self.killing_inv
    }

    pub fn killing_form(&self, x: &AlgebraElement, y: &AlgebraElement) -> Scalar {
        let cx = coordinates(x);
        let cy = coordinates(y);
        let ky = self.killing.mul_vec(&cy);
        cx.iter().zip(&ky).fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
    }

    /// `eps^i in g_1` with `K(e_j, eps^i) = delta_j^i`.
    pub fn killing_dual_g1(&self, i: usize) -> &AlgebraElement {
        &self.eps[i]
    }

    /// Standard basis vector `e_i` of `g_{-1}`.
    pub fn e(&self, i: usize) -> &AlgebraElement {
        &self.basis[i]
    }
}

/// Basis `{e_i} + {so(p,q) generators, lexicographic} + {Id} + {e_i^sharp}`.
pub fn standard_basis(sig: Signature) -> Vec<AlgebraElement> {
    let m = sig.dim();
    let mut out = Vec::with_capacity((m + 2) * (m + 1) / 2);
    for i in 0..m {
        let mut v = vec![Scalar::zero(); m];
        v[i] = Scalar::one();
        out.push(AlgebraElement::vector(sig, v).expect("basis vector"));
    }
    for i in 0..m {
        for j in i + 1..m {
            out.push(AlgebraElement::co(sig, so_generator(sig, i, j)).expect("so generator"));
        }
    }
    out.push(AlgebraElement::co(sig, Matrix::identity(m)).expect("identity"));
    for i in 0..m {
        let mut xi = vec![Scalar::zero(); m];
        xi[i] = sig.metric(i);
        out.push(AlgebraElement::covector(sig, xi).expect("basis covector"));
    }
    out
}

/// `E_ij - J_ii J_jj E_ji`, the `J`-antisymmetrized elementary matrix.
pub fn so_generator(sig: Signature, i: usize, j: usize) -> Matrix {
    let m = sig.dim();
    let mut a = Matrix::zeros(m, m);
    a[(i, j)] = Scalar::one();
    a[(j, i)] = -(sig.metric(i) * sig.metric(j));
    a
}

/// Coordinates in [`standard_basis`].
pub fn coordinates(x: &AlgebraElement) -> Vec<Scalar> {
    let sig = x.signature();
    let m = sig.dim();
    let GradedParts { vector, co, covector } = x.grade_decompose();
    let mut out = vector.clone();
    let c = co.trace() / int(m as i64);
    for i in 0..m {
        for j in i + 1..m {
            out.push(co[(i, j)].clone());
        }
    }
    out.push(c);
    for (i, xi) in covector.iter().enumerate() {
        out.push(xi * sig.metric(i));
    }
    out
}

/// Compares `X^{[g,h]}` with `[X^g, X^h]` on every basis pair and returns
/// the single sign `s` with `X^{[g,h]} = s [X^g, X^h]`.
pub fn realization_sign(alg: &ConformalAlgebra) -> Result<i8, AlgebraError> {
    let basis = alg.basis();
    let fields = alg.basis_fields();
    let mut sign: Option<i8> = None;
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            let lhs = vector_field_of(&basis[a].bracket(&basis[b]));
            let rhs = fields[a].bracket(&fields[b]);
            if lhs.is_zero() && rhs.is_zero() {
                continue;
            }
            let s = if lhs == rhs {
                1
            } else if lhs == rhs.scale(&-Scalar::one()) {
                -1
            } else {
                return Err(AlgebraError::InconsistentRealization(a, b));
            };
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return Err(AlgebraError::InconsistentRealization(a, b)),
                _ => {}
            }
        }
    }
    Ok(sign.unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigs() -> Vec<Signature> {
        [(2, 0), (1, 1), (3, 0), (2, 1), (1, 0)]
            .iter()
            .map(|&(p, q)| Signature::new(p, q).unwrap())
            .collect()
    }

    fn unit(m: usize, i: usize) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); m];
        v[i] = Scalar::one();
        v
    }

    #[test]
    fn metric_squares_to_identity() {
        for sig in sigs() {
            let j = sig.metric_matrix();
            assert_eq!(j.mul(&j), Matrix::identity(sig.dim()));
        }
    }

    #[test]
    fn embed_examples() {
        let sig = Signature::euclidean(2);
        let e1 = AlgebraElement::vector(sig, unit(2, 0)).unwrap();
        let mut expected = Matrix::zeros(4, 4);
        expected[(1, 3)] = int(1);
        expected[(0, 1)] = int(1);
        assert_eq!(e1.matrix(), &expected);
        assert_eq!(e1.grade_decompose().vector, unit(2, 0));

        assert!(AlgebraElement::co(sig, Matrix::zeros(2, 2)).unwrap().is_zero());

        // Id in co(p,q) has a = -1: diag(1, 0, 0, -1)
        let id = AlgebraElement::co(sig, Matrix::identity(2)).unwrap();
        let mut expected = Matrix::zeros(4, 4);
        expected[(0, 0)] = int(1);
        expected[(3, 3)] = int(-1);
        assert_eq!(id.matrix(), &expected);
        assert_eq!(id.grade_decompose().co, Matrix::identity(2));
    }

    #[test]
    fn embed_rejects_non_conformal() {
        let sig = Signature::euclidean(2);
        let mut b = Matrix::zeros(2, 2);
        b[(0, 1)] = int(1);
        assert_eq!(AlgebraElement::co(sig, b), Err(AlgebraError::NotInCo));
    }

    #[test]
    fn grade_round_trip() {
        for sig in sigs() {
            for u in standard_basis(sig) {
                let p = u.grade_decompose().clone();
                let rebuilt = AlgebraElement::vector(sig, p.vector.clone())
                    .unwrap()
                    .add(&AlgebraElement::co(sig, p.co.clone()).unwrap())
                    .add(&AlgebraElement::covector(sig, p.covector.clone()).unwrap());
                assert_eq!(rebuilt, u);
            }
        }
    }

    #[test]
    fn bracket_of_g1_with_g_minus1() {
        let sig = Signature::euclidean(2);
        let h = AlgebraElement::covector(sig, unit(2, 0)).unwrap();
        let x = AlgebraElement::vector(sig, unit(2, 1)).unwrap();
        let b = h.bracket(&x);
        assert_eq!(b.grade(), Some(0));
        // -x (x) h + h^flat (x) x^sharp - <h,x> Id with <h,x> = 0
        let mut expected = Matrix::zeros(2, 2);
        expected[(0, 1)] = int(1);
        expected[(1, 0)] = int(-1);
        assert_eq!(b.grade_decompose().co, expected);
    }

    #[test]
    fn bracket_formula_general() {
        for sig in sigs() {
            let m = sig.dim();
            let h: Vec<Scalar> = (0..m).map(|i| ratio(i as i64 + 2, 3)).collect();
            let x: Vec<Scalar> = (0..m).map(|i| ratio(1 - i as i64, 2)).collect();
            let b = AlgebraElement::covector(sig, h.clone())
                .unwrap()
                .bracket(&AlgebraElement::vector(sig, x.clone()).unwrap());
            let hx = h.iter().zip(&x).fold(Scalar::zero(), |a, (u, v)| a + u * v);
            let hf = sig.flat(&h);
            let xs = sig.sharp(&x);
            let mut expected = Matrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    expected[(i, j)] = -(&x[i] * &h[j]) + &hf[i] * &xs[j];
                }
                expected[(i, i)] -= &hx;
            }
            assert_eq!(b.grade_decompose().co, expected);
            assert_eq!(b.grade_decompose().co.trace(), -(int(m as i64) * hx));
        }
    }

    #[test]
    fn abelian_pieces() {
        let sig = Signature::euclidean(2);
        let e1 = AlgebraElement::vector(sig, unit(2, 0)).unwrap();
        let e2 = AlgebraElement::vector(sig, unit(2, 1)).unwrap();
        assert!(e1.bracket(&e2).is_zero());
        let f1 = AlgebraElement::covector(sig, unit(2, 0)).unwrap();
        let f2 = AlgebraElement::covector(sig, unit(2, 1)).unwrap();
        assert!(f1.bracket(&f2).is_zero());
    }

    #[test]
    fn basis_size_and_membership() {
        for sig in sigs() {
            let m = sig.dim();
            let basis = standard_basis(sig);
            assert_eq!(basis.len(), (m + 2) * (m + 1) / 2);
            let s = form_matrix(sig);
            for u in &basis {
                assert!(u.matrix().transpose().mul(&s).add(&s.mul(u.matrix())).is_zero());
                assert!(u.grade().is_some());
            }
        }
    }

    #[test]
    fn closure_and_grading() {
        for sig in sigs() {
            let alg = ConformalAlgebra::new(sig);
            let basis = alg.basis();
            let grades = alg.basis_grades();
            for (a, u) in basis.iter().enumerate() {
                for (b, w) in basis.iter().enumerate() {
                    let c = u.bracket(w);
                    let coords = coordinates(&c);
                    let rebuilt = coords
                        .iter()
                        .zip(basis)
                        .fold(AlgebraElement::zero(sig), |acc, (k, e)| acc.add(&e.scale(k)));
                    assert_eq!(rebuilt, c);
                    let g = grades[a] + grades[b];
                    if g.abs() > 1 {
                        assert!(c.is_zero());
                    } else if !c.is_zero() {
                        assert_eq!(c.grade(), Some(g));
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_identity() {
        for sig in sigs() {
            let basis = standard_basis(sig);
            for a in &basis {
                for b in &basis {
                    for c in &basis {
                        let j = a
                            .bracket(&b.bracket(c))
                            .add(&b.bracket(&c.bracket(a)))
                            .add(&c.bracket(&a.bracket(b)));
                        assert!(j.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn killing_form_properties() {
        for sig in sigs() {
            let alg = ConformalAlgebra::new(sig);
            let basis = alg.basis();
            let m = sig.dim();
            assert!(alg.killing_form(alg.e(0), &basis[m.min(basis.len() - 1)]).is_zero() || m == 1);
            for u in basis {
                for w in basis {
                    assert_eq!(alg.killing_form(u, w), alg.killing_form(w, u));
                    // so(n) Killing form is (n-2) tr(XY) with n = m+2
                    let trace = u.matrix().mul(w.matrix()).trace();
                    assert_eq!(alg.killing_form(u, w), trace * int(m as i64));
                    for z in basis {
                        assert_eq!(
                            alg.killing_form(u, &w.bracket(z)),
                            alg.killing_form(&u.bracket(w), z)
                        );
                    }
                }
            }
            if m >= 2 {
                assert!(alg.killing_form(alg.e(0), alg.e(1)).is_zero());
            }
        }
    }

    #[test]
    fn killing_dual_basis() {
        for sig in sigs() {
            let alg = ConformalAlgebra::new(sig);
            let m = sig.dim();
            for i in 0..m {
                let eps = alg.killing_dual_g1(i);
                assert_eq!(eps.grade(), Some(1));
                for j in 0..m {
                    let expected = if i == j { int(1) } else { int(0) };
                    assert_eq!(alg.killing_form(alg.e(j), eps), expected);
                }
            }
        }
        // m = 2 Euclidean: K(e_1, f^1) = 4, so eps^1 = f^1 / 4
        let alg = ConformalAlgebra::new(Signature::euclidean(2));
        assert_eq!(alg.killing_dual_g1(0).grade_decompose().covector, vec![ratio(1, 4), int(0)]);
    }

    #[test]
    fn vector_field_examples() {
        let sig = Signature::euclidean(2);
        let e1 = AlgebraElement::vector(sig, unit(2, 0)).unwrap();
        let x = vector_field_of(&e1);
        assert_eq!(x.components(), &[Poly::constant(2, int(-1)), Poly::zero(2)]);

        let id = AlgebraElement::co(sig, Matrix::identity(2)).unwrap();
        let x = vector_field_of(&id);
        assert_eq!(x.components(), &[-Poly::x(2, 0), -Poly::x(2, 1)]);

        let f1 = AlgebraElement::covector(sig, unit(2, 0)).unwrap();
        let x = vector_field_of(&f1);
        let x1 = Poly::x(2, 0);
        let x2 = Poly::x(2, 1);
        let c0 = (&(&x1 * &x1) - &(&x2 * &x2)).scale(&ratio(1, 2));
        assert_eq!(x.components(), &[c0, &x1 * &x2]);
    }

    #[test]
    fn g1_fields_have_inversion_shape() {
        for sig in sigs() {
            let m = sig.dim();
            let h: Vec<Scalar> = (0..m).map(|i| int(i as i64 + 1)).collect();
            let field = vector_field_of(&AlgebraElement::covector(sig, h.clone()).unwrap());
            let hx = (0..m).fold(Poly::zero(m), |acc, i| acc + Poly::x(m, i).scale(&h[i]));
            let hf = sig.flat(&h);
            let xx = sig.norm2_x();
            for i in 0..m {
                let expected = &(&hx * &Poly::x(m, i)) - &xx.scale(&(&hf[i] * ratio(1, 2)));
                assert_eq!(field.components()[i], expected);
            }
        }
    }

    #[test]
    fn realization_is_a_homomorphism() {
        for sig in sigs() {
            let alg = ConformalAlgebra::new(sig);
            assert_eq!(realization_sign(&alg), Ok(1));
        }
    }

    #[test]
    fn signature_parsing() {
        assert_eq!("2,1".parse::<Signature>().unwrap(), Signature::new(2, 1).unwrap());
        assert!("0,0".parse::<Signature>().is_err());
        assert!("x".parse::<Signature>().is_err());
    }
}
