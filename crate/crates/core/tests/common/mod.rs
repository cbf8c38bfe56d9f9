//! Helpers shared by the integration tests: an undetermined-coefficients
//! solver for equivariant lifts in low degree.

#![allow(dead_code)]

use std::collections::BTreeMap;

use confquant::algebra::{vector_field_of, ConformalAlgebra, Signature};
use confquant::linalg::Matrix;
use confquant::poly::{Monomial, Poly, Scalar};
use confquant::spectral::decompose_poly;
use confquant::symbol::{flat_divergence, lie_derivative_symbol, transferred_action, WeightedSymbol};
use num_traits::{One, Zero};

/// `sum_i J_ii xi_i d/dx_i (Delta_J T)`.
fn gradient_trace(sig: Signature, t: &Poly) -> Poly {
    let lap = sig.laplacian_xi(t);
    let mut out = Poly::zero(t.dim());
    for i in 0..t.dim() {
        let term = &lap.dx(i) * &Poly::xi(t.dim(), i);
        out.add_scaled(&term, &sig.metric(i));
    }
    out
}

pub type Operator = Box<dyn Fn(&Poly) -> Poly>;

/// Candidate correction operators for a homogeneous symbol of degree `k`:
/// every translation- and `co(p,q)`-invariant operator lowering the degree
/// with the matching number of `x`-derivatives.
pub fn ansatz_operators(sig: Signature, k: u32) -> Vec<Operator> {
    match k {
        0 => vec![],
        1 => vec![Box::new(flat_divergence)],
        2 => vec![
            Box::new(flat_divergence),
            Box::new(move |t: &Poly| gradient_trace(sig, t)),
            Box::new(|t: &Poly| flat_divergence(&flat_divergence(t))),
            Box::new(move |t: &Poly| sig.laplacian_x(&sig.laplacian_xi(t))),
        ],
        _ => panic!("ansatz only implemented up to degree 2"),
    }
}

/// Monomials `x^a xi^b` with `|b| = k` and `|a| <= 2`, projected onto the
/// isotypic components present in `t`; the undetermined coefficients are
/// solved on these.
fn probes(sig: Signature, t: &Poly, k: u32) -> Vec<Poly> {
    let m = sig.dim();
    let present: Vec<bool> = decompose_poly(sig, t, k).iter().map(|p| !p.is_zero()).collect();
    let xs: Vec<Vec<u8>> = (0..=2).flat_map(|d| exponent_vectors(m, d)).collect();
    let mut out = Vec::new();
    for b in exponent_vectors(m, k) {
        let seed = Poly::term(m, Monomial::new(&[], &b), Scalar::one());
        let kept = decompose_poly(sig, &seed, k)
            .into_iter()
            .zip(&present)
            .filter(|(_, &on)| on)
            .fold(Poly::zero(m), |acc, (p, _)| &acc + &p);
        if kept.is_zero() {
            continue;
        }
        for a in &xs {
            out.push(&kept * &Poly::term(m, Monomial::new(a, &vec![0; m]), Scalar::one()));
        }
    }
    out
}

fn exponent_vectors(m: usize, d: u32) -> Vec<Vec<u8>> {
    if m == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in exponent_vectors(m - 1, d - first) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// Solves for constants `c` such that `T + sum_i c_i D_i T` intertwines the
/// Lie derivative with the transferred action for every basis element and
/// every probe symbol in the components of `t`, then applies them to `t`. Returns
/// `None` when the equations are inconsistent.
pub fn ansatz_lift(sig: Signature, t: &Poly, k: u32, lambda: &Scalar, delta: &Scalar) -> Option<Poly> {
    let alg = ConformalAlgebra::new(sig);
    let ops = ansatz_operators(sig, k);
    let sym = |p: Poly| WeightedSymbol::new(sig, delta.clone(), p).expect("delta-free symbol");
    type Key = (usize, usize, Monomial);
    let mut e0: Vec<(Key, Scalar)> = Vec::new();
    let mut cols: Vec<Vec<(Key, Scalar)>> = vec![Vec::new(); ops.len()];
    for (n, probe) in probes(sig, t, k).iter().enumerate() {
        for (g, h) in alg.basis().iter().enumerate() {
            let moved = lie_derivative_symbol(&vector_field_of(h), &sym(probe.clone())).into_poly();
            let base = transferred_action(h, &sym(probe.clone()), lambda).into_poly();
            e0.extend((&base - &moved).terms().map(|(mono, c)| ((n, g, *mono), c.clone())));
            for (i, op) in ops.iter().enumerate() {
                let lhs = transferred_action(h, &sym(op(probe)), lambda).into_poly();
                cols[i].extend((&lhs - &op(&moved)).terms().map(|(mono, c)| ((n, g, *mono), c.clone())));
            }
        }
    }
    let mut rows: BTreeMap<Key, usize> = BTreeMap::new();
    for (key, _) in e0.iter().chain(cols.iter().flatten()) {
        let n = rows.len();
        rows.entry(key.clone()).or_insert(n);
    }
    let nrows = rows.len();
    let column = |entries: &[(Key, Scalar)]| {
        let mut v = vec![Scalar::zero(); nrows];
        for (key, c) in entries {
            v[rows[key]] = c.clone();
        }
        v
    };
    let rhs: Vec<Scalar> = column(&e0).into_iter().map(|c| -c).collect();
    let all_cols: Vec<Vec<Scalar>> = cols.iter().map(|c| column(c)).collect();
    // keep a maximal independent set of columns
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..all_cols.len() {
        let mut trial = kept.clone();
        trial.push(i);
        if build(&all_cols, &trial, nrows).rank() == trial.len() {
            kept = trial;
        }
    }
    let coeffs = if kept.is_empty() {
        if rhs.iter().all(Zero::is_zero) {
            Vec::new()
        } else {
            return None;
        }
    } else {
        build(&all_cols, &kept, nrows).solve(&rhs).ok()?.expect("independent columns")
    };
    let mut out = t.clone();
    for (c, &i) in coeffs.iter().zip(&kept) {
        out.add_scaled(&ops[i](t), c);
    }
    Some(out)
}

fn build(cols: &[Vec<Scalar>], which: &[usize], nrows: usize) -> Matrix {
    let mut m = Matrix::zeros(nrows, which.len());
    for (j, &i) in which.iter().enumerate() {
        for r in 0..nrows {
            m[(r, j)] = cols[i][r].clone();
        }
    }
    m
}
