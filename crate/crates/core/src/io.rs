//! JSON file formats for problems, operators and curvature data. Exact
//! rationals are written as strings `"n"` or `"n/d"`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Signature;
use crate::curved::CurvatureData;
use crate::poly::{parse_scalar, Monomial, Poly, Scalar};
use crate::symbol::LinearDiffOp;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::Invalid(msg.into())
}

pub fn scalar_from_str(s: &str) -> Result<Scalar, IoError> {
    parse_scalar(s).map_err(|_| IoError::Rational(s.to_string()))
}

pub fn scalar_to_string(c: &Scalar) -> String {
    c.to_string()
}

fn signature_of(m: usize, p: usize, q: usize) -> Result<Signature, IoError> {
    if p + q != m {
        return Err(invalid(format!("p + q = {} does not match m = {m}", p + q)));
    }
    Signature::new(p, q).map_err(|e| invalid(e.to_string()))
}

fn exponents(v: &[u8], m: usize, what: &str) -> Result<(), IoError> {
    if v.len() != m {
        return Err(invalid(format!("{what} has length {}, expected {m}", v.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolTerm {
    pub coeff: String,
    pub x_exponents: Vec<u8>,
    pub xi_exponents: Vec<u8>,
}

/// A quantization request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub lambda: String,
    pub mu: String,
    pub symbol: Vec<SymbolTerm>,
}

/// A problem with parsed fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProblem {
    pub signature: Signature,
    pub lambda: Scalar,
    pub mu: Scalar,
    pub symbol: Poly,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn parse(&self) -> Result<ParsedProblem, IoError> {
        let signature = signature_of(self.m, self.p, self.q)?;
        let m = self.m;
        let mut symbol = Poly::zero(m);
        for (i, t) in self.symbol.iter().enumerate() {
            exponents(&t.x_exponents, m, &format!("symbol[{i}].x_exponents"))?;
            exponents(&t.xi_exponents, m, &format!("symbol[{i}].xi_exponents"))?;
            let c = scalar_from_str(&t.coeff)?;
            if c.is_zero() {
                return Err(invalid(format!("symbol[{i}] has a zero coefficient")));
            }
            symbol.add_term(Monomial::new(&t.x_exponents, &t.xi_exponents), c);
        }
        Ok(ParsedProblem {
            signature,
            lambda: scalar_from_str(&self.lambda)?,
            mu: scalar_from_str(&self.mu)?,
            symbol,
        })
    }

    /// Problem file for a `delta`-free polynomial symbol.
    pub fn from_parts(sig: Signature, lambda: &Scalar, mu: &Scalar, symbol: &Poly) -> Self {
        let m = sig.dim();
        Self {
            m,
            p: sig.p(),
            q: sig.q(),
            lambda: scalar_to_string(lambda),
            mu: scalar_to_string(mu),
            symbol: symbol
                .terms()
                .map(|(mono, c)| SymbolTerm {
                    coeff: scalar_to_string(c),
                    x_exponents: mono.x()[..m].to_vec(),
                    xi_exponents: mono.xi()[..m].to_vec(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffTerm {
    pub coeff: String,
    pub x_exponents: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorTerm {
    pub coeff_poly: Vec<CoeffTerm>,
    pub derivative_exponents: Vec<u8>,
}

/// A differential operator `sum_alpha c_alpha(x) d^alpha`, coefficients on
/// the left, between densities of weights `lambda` and `mu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub lambda: String,
    pub mu: String,
    pub terms: Vec<OperatorTerm>,
    /// Pointwise degree-4 curvature correction at the origin, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature_correction: Option<Vec<SymbolTerm>>,
}

fn coeff_terms(p: &Poly, m: usize) -> Vec<CoeffTerm> {
    p.terms()
        .map(|(mono, c)| CoeffTerm { coeff: scalar_to_string(c), x_exponents: mono.x()[..m].to_vec() })
        .collect()
}

pub fn symbol_terms(p: &Poly) -> Vec<SymbolTerm> {
    let m = p.dim();
    p.terms()
        .map(|(mono, c)| SymbolTerm {
            coeff: scalar_to_string(c),
            x_exponents: mono.x()[..m].to_vec(),
            xi_exponents: mono.xi()[..m].to_vec(),
        })
        .collect()
}

impl OperatorFile {
    pub fn from_operator(op: &LinearDiffOp) -> Self {
        let sig = op.signature();
        let m = sig.dim();
        let terms = op
            .coefficients()
            .into_iter()
            .map(|(alpha, c)| OperatorTerm { coeff_poly: coeff_terms(&c, m), derivative_exponents: alpha })
            .collect();
        Self {
            m,
            p: sig.p(),
            q: sig.q(),
            lambda: scalar_to_string(op.source_weight()),
            mu: scalar_to_string(op.target_weight()),
            terms,
            curvature_correction: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_operator(&self) -> Result<LinearDiffOp, IoError> {
        let sig = signature_of(self.m, self.p, self.q)?;
        let m = self.m;
        let mut coeffs = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            exponents(&t.derivative_exponents, m, &format!("terms[{i}].derivative_exponents"))?;
            let mut c = Poly::zero(m);
            for (j, ct) in t.coeff_poly.iter().enumerate() {
                exponents(&ct.x_exponents, m, &format!("terms[{i}].coeff_poly[{j}].x_exponents"))?;
                c.add_term(Monomial::new(&ct.x_exponents, &[]), scalar_from_str(&ct.coeff)?);
            }
            coeffs.push((t.derivative_exponents.clone(), c));
        }
        LinearDiffOp::from_coefficients(sig, scalar_from_str(&self.lambda)?, scalar_from_str(&self.mu)?, coeffs)
            .map_err(|e| invalid(e.to_string()))
    }

    /// Re-serialization through the in-memory operator.
    pub fn canonical(&self) -> Result<Self, IoError> {
        let mut out = Self::from_operator(&self.to_operator()?);
        out.curvature_correction = self.curvature_correction.clone();
        Ok(out)
    }
}

/// Curvature data: `kappa0[j][k][i][l]` is the `l`-th output component of
/// `kappa0(e_j, e_k) e_i`; `kappa1[j][k][l] = <kappa1(e_j, e_k), e_l>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureFile {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub kappa0: Vec<Vec<Vec<Vec<String>>>>,
    pub kappa1: Vec<Vec<Vec<String>>>,
}

impl CurvatureFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_data(k: &CurvatureData) -> Self {
        let sig = k.signature();
        let (a0, a1) = k.to_arrays();
        let s = |c: &Scalar| scalar_to_string(c);
        Self {
            m: sig.dim(),
            p: sig.p(),
            q: sig.q(),
            kappa0: a0
                .iter()
                .map(|a| a.iter().map(|b| b.iter().map(|c| c.iter().map(s).collect()).collect()).collect())
                .collect(),
            kappa1: a1.iter().map(|a| a.iter().map(|b| b.iter().map(s).collect()).collect()).collect(),
        }
    }

    pub fn to_data(&self) -> Result<CurvatureData, IoError> {
        let sig = signature_of(self.m, self.p, self.q)?;
        let conv = |v: &Vec<String>| v.iter().map(|c| scalar_from_str(c)).collect::<Result<Vec<_>, _>>();
        let a0 = self
            .kappa0
            .iter()
            .map(|a| a.iter().map(|b| b.iter().map(conv).collect::<Result<Vec<_>, _>>()).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let a1 = self
            .kappa1
            .iter()
            .map(|a| a.iter().map(conv).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        CurvatureData::from_arrays(sig, &a0, &a1).map_err(|e| invalid(e.to_string()))
    }
}
