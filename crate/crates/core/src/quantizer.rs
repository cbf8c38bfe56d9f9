//! The recursive lift `T -> T_k + ... + T_0`, the flat quantization map and
//! the equivariance check.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{vector_field_of, AlgebraElement, ConformalAlgebra, Signature};
use crate::poly::{Poly, Scalar};
use crate::spectral::{
    decompose_poly, n_operator_poly, tree_indices, CriticalRoot, CriticalValue, EigenvalueTable, SpectralError,
};
use crate::symbol::{lie_derivative_symbol, q_aff, transferred_action, LinearDiffOp, SymbolError, WeightedSymbol};

/// Default cap on the xi-degree accepted by [`Quantizer`].
pub const DEFAULT_DEGREE_CAP: u32 = 4;

/// Sign of `N` for which `C + N` commutes with the transferred action.
pub const N_SIGN: i8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantizerError {
    #[error("critical shift value delta={delta}: alpha({l},{t}) = alpha({k},{s})")]
    Critical { delta: Scalar, k: u32, s: u32, l: u32, t: u32 },
    #[error("symbol degree {degree} exceeds the supported cap {cap}; pass allow_high_degree to override")]
    DegreeTooHigh { degree: u32, cap: u32 },
    #[error("N produced a ({l},{t}) component outside the tree below ({k},{s})")]
    TreeViolation { k: u32, s: u32, l: u32, t: u32 },
    #[error("signature mismatch")]
    SignatureMismatch,
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl QuantizerError {
    /// The witness of a critical-value failure.
    pub fn critical_witness(&self) -> Option<CriticalValue> {
        match self {
            Self::Critical { delta, k, s, l, t } => Some(CriticalValue {
                delta: CriticalRoot::Rational(delta.clone()),
                from: (*k, *s),
                to: (*l, *t),
            }),
            _ => None,
        }
    }
}

/// Algebra and Casimir data for one signature, shared by every problem.
#[derive(Debug, Clone)]
pub struct Quantizer {
    alg: ConformalAlgebra,
    table: EigenvalueTable,
    degree_cap: u32,
    allow_high_degree: bool,
    fuzz: bool,
}

impl Quantizer {
    pub fn new(sig: Signature) -> Result<Self, QuantizerError> {
        Self::with_options(sig, DEFAULT_DEGREE_CAP, false)
    }

    /// `kmax` bounds the eigenvalue table; degrees above
    /// [`DEFAULT_DEGREE_CAP`] need `allow_high_degree`.
    pub fn with_options(sig: Signature, kmax: u32, allow_high_degree: bool) -> Result<Self, QuantizerError> {
        let alg = ConformalAlgebra::new(sig);
        let table = EigenvalueTable::build(&alg, kmax.max(DEFAULT_DEGREE_CAP))?;
        Ok(Self { alg, table, degree_cap: DEFAULT_DEGREE_CAP, allow_high_degree, fuzz: false })
    }

    /// Negative control: the lift adds `x_1` to its degree-0 part.
    pub fn with_fuzz(mut self, fuzz: bool) -> Self {
        self.fuzz = fuzz;
        self
    }

    pub fn algebra(&self) -> &ConformalAlgebra {
        &self.alg
    }

    pub fn table(&self) -> &EigenvalueTable {
        &self.table
    }

    pub fn signature(&self) -> Signature {
        self.alg.signature()
    }

    /// Validates a problem: degree cap and non-criticality of `delta` for
    /// every isotypic component present in the symbol.
    pub fn problem(&self, lambda: Scalar, mu: Scalar, poly: Poly) -> Result<QuantizationProblem, QuantizerError> {
        let sig = self.signature();
        let delta = &mu - &lambda;
        let symbol = WeightedSymbol::new(sig, delta.clone(), poly)?;
        if let Some(degree) = symbol.degree() {
            let cap = if self.allow_high_degree { self.table.kmax() } else { self.degree_cap.min(self.table.kmax()) };
            if degree > cap {
                return Err(QuantizerError::DegreeTooHigh { degree, cap });
            }
        }
        for (k, part) in symbol.poly().xi_homogeneous_parts() {
            for (s, comp) in decompose_poly(sig, &part, k).iter().enumerate() {
                if !comp.is_zero() {
                    self.check_noncritical(k, s as u32, &delta)?;
                }
            }
        }
        Ok(QuantizationProblem { lambda, mu, symbol, truncated: false })
    }

    /// Like [`Quantizer::problem`] without the criticality check. The lift
    /// drops every component whose denominator vanishes, so the result is
    /// only guaranteed to commute with translations and `co(p,q)`.
    pub fn problem_unchecked(
        &self,
        lambda: Scalar,
        mu: Scalar,
        poly: Poly,
    ) -> Result<QuantizationProblem, QuantizerError> {
        let sig = self.signature();
        let symbol = WeightedSymbol::new(sig, &mu - &lambda, poly)?;
        if let Some(degree) = symbol.degree() {
            let cap = if self.allow_high_degree { self.table.kmax() } else { self.degree_cap.min(self.table.kmax()) };
            if degree > cap {
                return Err(QuantizerError::DegreeTooHigh { degree, cap });
            }
        }
        Ok(QuantizationProblem { lambda, mu, symbol, truncated: true })
    }

    fn check_noncritical(&self, k: u32, s: u32, delta: &Scalar) -> Result<(), QuantizerError> {
        let top = self.table.get(k, s).expect("non-empty component has an eigenvalue").eval(delta);
        for (l, t) in tree_indices(k, s) {
            if let Some(a) = self.table.get(l, t) {
                if a.eval(delta) == top {
                    return Err(QuantizerError::Critical { delta: delta.clone(), k, s, l, t });
                }
            }
        }
        Ok(())
    }

    /// `T_l = sum_t N(T_{l+1})_{(l,t)} / (alpha_{k,s} - alpha_{l,t})`, per
    /// isotypic component `(k,s)` of the input, summed.
    pub fn lift(&self, problem: &QuantizationProblem) -> Result<QuantizedLift, QuantizerError> {
        let sig = self.signature();
        let m = sig.dim();
        let delta = problem.delta();
        let mut components: BTreeMap<u32, Poly> = BTreeMap::new();
        let mut provenance = Vec::new();
        for (k, part) in problem.symbol.poly().xi_homogeneous_parts() {
            for (s, top) in decompose_poly(sig, &part, k).into_iter().enumerate() {
                if top.is_zero() {
                    continue;
                }
                let s = s as u32;
                provenance.push((k, s));
                let alpha = self.table.get(k, s).expect("eigenvalue").eval(&delta);
                add_into(&mut components, k, &top);
                let mut current = top;
                for l in (0..k).rev() {
                    let r = n_operator_poly(&self.alg, &current, &problem.lambda, N_SIGN);
                    let mut next = Poly::zero(m);
                    for (t, rt) in decompose_poly(sig, &r, l).into_iter().enumerate() {
                        if rt.is_zero() {
                            continue;
                        }
                        let t = t as u32;
                        if !tree_indices(k, s).contains(&(l, t)) {
                            return Err(QuantizerError::TreeViolation { k, s, l, t });
                        }
                        let denom = &alpha - self.table.get(l, t).expect("eigenvalue").eval(&delta);
                        if denom.is_zero() {
                            if problem.truncated {
                                continue;
                            }
                            return Err(QuantizerError::Critical { delta, k, s, l, t });
                        }
                        next.add_scaled(&rt, &(Scalar::one() / denom));
                    }
                    if next.is_zero() {
                        break;
                    }
                    add_into(&mut components, l, &next);
                    current = next;
                }
            }
        }
        if self.fuzz {
            add_into(&mut components, 0, &Poly::x(m, 0));
        }
        let components = components
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(l, p)| (l, problem.symbol.with_poly(p)))
            .collect();
        Ok(QuantizedLift { components, provenance })
    }

    /// The operator `q_aff(T_k + ... + T_0)`.
    pub fn quantize(&self, problem: &QuantizationProblem) -> Result<LinearDiffOp, QuantizerError> {
        let lift = self.lift(problem)?;
        Ok(q_aff(&lift.total(self.signature(), problem.delta()), &problem.lambda))
    }

    /// Symbol of `L_{X^h} o Q(T) - Q(L_{X^h} T)` transported back through
    /// the standard ordering; zero iff `Q` is equivariant for `h`.
    pub fn verify_equivariance(
        &self,
        problem: &QuantizationProblem,
        h: &AlgebraElement,
    ) -> Result<WeightedSymbol, QuantizerError> {
        if h.signature() != self.signature() {
            return Err(QuantizerError::SignatureMismatch);
        }
        let sig = self.signature();
        let delta = problem.delta();
        let hat = self.lift(problem)?.total(sig, delta.clone());
        let lhs = transferred_action(h, &hat, &problem.lambda);
        let moved = lie_derivative_symbol(&vector_field_of(h), &problem.symbol);
        let moved_problem = QuantizationProblem {
            lambda: problem.lambda.clone(),
            mu: problem.mu.clone(),
            symbol: moved,
            truncated: problem.truncated,
        };
        let rhs = self.lift(&moved_problem)?.total(sig, delta);
        Ok(lhs.sub(&rhs))
    }
}

fn add_into(map: &mut BTreeMap<u32, Poly>, degree: u32, p: &Poly) {
    match map.get_mut(&degree) {
        Some(acc) => acc.add_assign_ref(p),
        None => {
            map.insert(degree, p.clone());
        }
    }
}

/// A validated quantization request; build with [`Quantizer::problem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizationProblem {
    lambda: Scalar,
    mu: Scalar,
    symbol: WeightedSymbol,
    truncated: bool,
}

impl QuantizationProblem {
    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn mu(&self) -> &Scalar {
        &self.mu
    }

    pub fn delta(&self) -> Scalar {
        &self.mu - &self.lambda
    }

    pub fn symbol(&self) -> &WeightedSymbol {
        &self.symbol
    }

    /// Whether this problem skipped the criticality check.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }
}

/// Homogeneous pieces `T_l` of the lift, keyed by xi-degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedLift {
    pub components: BTreeMap<u32, WeightedSymbol>,
    /// Isotypic components `(k,s)` of the input that were lifted.
    pub provenance: Vec<(u32, u32)>,
}

impl QuantizedLift {
    pub fn total(&self, sig: Signature, delta: Scalar) -> WeightedSymbol {
        self.components
            .values()
            .fold(WeightedSymbol::zero(sig, delta), |acc, c| acc.add(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, ratio};
    use crate::symbol::flat_divergence;

    fn q2() -> Quantizer {
        Quantizer::new(Signature::euclidean(2)).unwrap()
    }

    fn p(text: &str) -> Poly {
        Poly::parse(2, text).unwrap()
    }

    #[test]
    fn constant_coefficients_need_no_correction() {
        let q = q2();
        let prob = q.problem(ratio(1, 3), ratio(1, 2), p("xi^(1,0)")).unwrap();
        assert_eq!(q.quantize(&prob).unwrap().normal_poly(), &p("xi^(1,0)"));
        let prob = q.problem(ratio(1, 3), ratio(1, 3), p("1")).unwrap();
        assert_eq!(q.quantize(&prob).unwrap().normal_poly(), &p("1"));
    }

    #[test]
    fn degree_one_correction_is_divergence() {
        // T_0 = lambda / (1 - delta) * div T
        let q = q2();
        let (lambda, mu) = (ratio(1, 3), ratio(1, 2));
        let t = p("x^(1,0) * xi^(1,0) + x^(0,2) * xi^(0,1) + 3 * x^(1,1) * xi^(0,1)");
        let prob = q.problem(lambda.clone(), mu.clone(), t.clone()).unwrap();
        let lift = q.lift(&prob).unwrap();
        let delta = &mu - &lambda;
        let expected = flat_divergence(&t).scale(&(&lambda / (int(1) - delta)));
        assert_eq!(lift.components[&0].poly(), &expected);
    }

    #[test]
    fn equivariance_for_all_generators() {
        let q = q2();
        let t = p("x^(1,0) * xi^(2,0) + x^(0,2) * xi^(1,1) + xi^(0,2) + x^(1,1) * xi^(1,0)");
        let prob = q.problem(ratio(1, 2), ratio(7, 10), t).unwrap();
        for h in q.algebra().basis() {
            assert!(q.verify_equivariance(&prob, h).unwrap().is_zero());
        }
    }

    #[test]
    fn critical_delta_is_rejected() {
        let q = q2();
        let err = q.problem(ratio(1, 2), ratio(3, 2), p("x^(1,0) * xi^(1,0)")).unwrap_err();
        assert!(matches!(err, QuantizerError::Critical { k: 1, s: 0, l: 0, t: 0, .. }));
        assert_eq!(err.critical_witness().unwrap().to_string(), "delta=1 from (1,0)->(0,0)");
    }

    #[test]
    fn degree_cap() {
        let q = q2();
        assert!(matches!(
            q.problem(int(0), ratio(1, 5), p("xi^(5,0)")),
            Err(QuantizerError::DegreeTooHigh { degree: 5, cap: 4 })
        ));
        let q = Quantizer::with_options(Signature::euclidean(2), 5, true).unwrap();
        let prob = q.problem(int(0), ratio(1, 5), p("x^(1,0) * xi^(5,0)")).unwrap();
        for h in q.algebra().basis() {
            assert!(q.verify_equivariance(&prob, h).unwrap().is_zero());
        }
    }

    #[test]
    fn fuzz_is_detected() {
        let q = q2().with_fuzz(true);
        let prob = q.problem(ratio(1, 2), ratio(7, 10), p("x^(0,1) * xi^(1,1)")).unwrap();
        let failures = q
            .algebra()
            .basis()
            .iter()
            .filter(|h| !q.verify_equivariance(&prob, h).unwrap().is_zero())
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn truncated_lift_is_affine_equivariant_at_critical_delta() {
        let q = q2();
        let problem = q.problem_unchecked(int(0), int(1), p("x^(0,1) * xi^(1,0) + xi^(2,0)")).unwrap();
        let alg = q.algebra().clone();
        for (b, g) in alg.basis().iter().zip(alg.basis_grades()) {
            if g <= 0 {
                assert!(q.verify_equivariance(&problem, b).unwrap().is_zero());
            }
        }
    }
}
