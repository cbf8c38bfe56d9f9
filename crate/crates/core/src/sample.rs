//! Seeded random generators for symbols, algebra elements and vectors.

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraElement, ConformalAlgebra, Signature};
use crate::poly::{ratio, Monomial, Poly, Scalar};
use crate::spectral::decompose_poly;

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero rational with numerator in `-4..=4` and denominator in `1..=3`.
pub fn scalar(rng: &mut SampleRng) -> Scalar {
    loop {
        let n: i64 = rng.gen_range(-4..=4);
        if n != 0 {
            return ratio(n, rng.gen_range(1..=3));
        }
    }
}

pub fn vector(rng: &mut SampleRng, m: usize) -> Vec<Scalar> {
    (0..m).map(|_| if rng.gen_bool(0.2) { Scalar::zero() } else { scalar(rng) }).collect()
}

/// Random exponent vector of total degree exactly `d`.
fn exponents(rng: &mut SampleRng, m: usize, d: u32) -> Vec<u8> {
    let mut e = vec![0u8; m];
    for _ in 0..d {
        e[rng.gen_range(0..m)] += 1;
    }
    e
}

/// Random polynomial in `x` of degree at most `max_deg`.
pub fn x_poly(rng: &mut SampleRng, m: usize, max_deg: u32, nterms: usize) -> Poly {
    let mut out = Poly::zero(m);
    for _ in 0..nterms {
        let d = rng.gen_range(0..=max_deg);
        out.add_term(Monomial::new(&exponents(rng, m, d), &[]), scalar(rng));
    }
    out
}

/// Random symbol homogeneous of xi-degree `k` with coefficients of
/// `x`-degree at most `max_x_deg`; never zero.
pub fn homogeneous_symbol(rng: &mut SampleRng, m: usize, k: u32, max_x_deg: u32, nterms: usize) -> Poly {
    loop {
        let mut out = Poly::zero(m);
        for _ in 0..nterms.max(1) {
            let xi = exponents(rng, m, k);
            let dx = rng.gen_range(0..=max_x_deg);
            out.add_term(Monomial::new(&exponents(rng, m, dx), &xi), scalar(rng));
        }
        if !out.is_zero() {
            return out;
        }
    }
}

/// Random symbol of top xi-degree exactly `k` plus a few lower-degree terms.
pub fn symbol(rng: &mut SampleRng, m: usize, k: u32, max_x_deg: u32, nterms: usize) -> Poly {
    let mut out = homogeneous_symbol(rng, m, k, max_x_deg, nterms);
    for l in 0..k {
        if rng.gen_bool(0.5) {
            out = &out + &homogeneous_symbol(rng, m, l, max_x_deg, 1);
        }
    }
    out
}

/// Random element of the `(k,s)` component with polynomial coefficients;
/// zero only when that component is empty.
pub fn isotypic(rng: &mut SampleRng, sig: Signature, k: u32, s: u32, max_x_deg: u32, nterms: usize) -> Poly {
    let m = sig.dim();
    let d = k - 2 * s;
    let r2 = sig.norm2_xi();
    for _ in 0..64 {
        let raw = homogeneous_symbol(rng, m, d, max_x_deg, nterms);
        let h = decompose_poly(sig, &raw, d).swap_remove(0);
        if !h.is_zero() {
            return (0..s).fold(h, |acc, _| &acc * &r2);
        }
    }
    Poly::zero(m)
}

/// Random combination of the standard basis.
pub fn element(rng: &mut SampleRng, alg: &ConformalAlgebra) -> AlgebraElement {
    alg.basis().iter().fold(AlgebraElement::zero(alg.signature()), |acc, b| {
        if rng.gen_bool(0.3) {
            acc
        } else {
            acc.add(&b.scale(&scalar(rng)))
        }
    })
}

/// Random nonzero element of `g_1`.
pub fn g1_element(rng: &mut SampleRng, sig: Signature) -> AlgebraElement {
    loop {
        let v = vector(rng, sig.dim());
        if v.iter().any(|c| !c.is_zero()) {
            return AlgebraElement::covector(sig, v).expect("length matches");
        }
    }
}
