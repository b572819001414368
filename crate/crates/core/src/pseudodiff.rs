//! Pseudo-differential operators `A = F^{-1}[A(xi) F[.]]` on Lizorkin
//! functions, and their action on wavelet bases.
//!
//! A wavelet with index `(s, j, a)` is an eigenfunction of `A` exactly when
//! the symbol is constant on `p^j (-s + Z_p^n)`; the eigenvalue is then
//! `A(-p^j s)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic::{cartesian, int_pow, valuation_of, Ball, PadicVector, Valuation};
use crate::schwartz::{SchwartzFunction, DEFAULT_TERM_BUDGET};
use crate::wavelets::{CoefficientField, FamilySpec, WaveletIndex};

pub type CustomSymbol = Arc<dyn Fn(&PadicVector) -> Complex64 + Send + Sync>;

/// One term `coeff * xi_1^{e_1} ... xi_n^{e_n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: BigRational,
    pub exps: Vec<u32>,
}

/// Sparse polynomial over `Q` in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub n: usize,
    pub monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(n: usize, monomials: Vec<Monomial>) -> Result<Self> {
        if monomials.iter().any(|mono| mono.exps.len() != n) {
            return Err(Error::InvalidSymbol(format!("every monomial needs {n} exponents")));
        }
        Ok(Polynomial { n, monomials })
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.monomials.iter().fold(BigRational::zero(), |acc, mono| {
            let term = mono
                .exps
                .iter()
                .zip(x)
                .fold(mono.coeff.clone(), |t, (&e, xi)| t * num_traits::pow(xi.clone(), e as usize));
            acc + term
        })
    }
}

#[derive(Clone)]
pub enum SymbolKind {
    /// `|xi|_p^alpha`.
    Taibleson { alpha: Complex64 },
    /// `|f(xi)|_p^alpha`.
    PolyNorm { poly: Polynomial, alpha: Complex64 },
    /// Any callable; must be safe to call from several threads at once.
    Custom(CustomSymbol),
}

impl fmt::Debug for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Taibleson { alpha } => f.debug_struct("Taibleson").field("alpha", alpha).finish(),
            SymbolKind::PolyNorm { poly, alpha } => {
                f.debug_struct("PolyNorm").field("poly", poly).field("alpha", alpha).finish()
            }
            SymbolKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A symbol with its declared constancy depth. Built-in Taibleson symbols
/// are handled exactly and need no depth.
#[derive(Clone, Debug)]
pub struct SymbolSpec {
    pub kind: SymbolKind,
    pub depth: Option<u32>,
}

/// `p^{alpha k}` on the principal branch, `exp(alpha k ln p)`.
pub fn p_pow_complex(p: u32, alpha: Complex64, k: i64) -> Complex64 {
    if alpha.im == 0.0 {
        Complex64::new((p as f64).powf(alpha.re * k as f64), 0.0)
    } else {
        (alpha * (k as f64 * (p as f64).ln())).exp()
    }
}

impl SymbolSpec {
    pub fn taibleson(alpha: Complex64) -> Self {
        SymbolSpec { kind: SymbolKind::Taibleson { alpha }, depth: None }
    }

    pub fn poly_norm(poly: Polynomial, alpha: Complex64, depth: u32) -> Self {
        SymbolSpec { kind: SymbolKind::PolyNorm { poly, alpha }, depth: Some(depth) }
    }

    pub fn custom(f: CustomSymbol, depth: u32) -> Self {
        SymbolSpec { kind: SymbolKind::Custom(f), depth: Some(depth) }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, SymbolKind::Taibleson { .. })
    }

    fn declared_depth(&self) -> Result<u32> {
        self.depth
            .ok_or_else(|| Error::InvalidSymbol("non-built-in symbols need a declared constancy depth".into()))
    }

    pub fn eval(&self, xi: &PadicVector) -> Result<Complex64> {
        let p = xi.prime();
        match &self.kind {
            SymbolKind::Taibleson { alpha } => match xi.valuation() {
                Valuation::Infinite => Err(Error::SymbolUndefined(xi.to_string())),
                Valuation::Finite(v) => Ok(p_pow_complex(p, *alpha, -v)),
            },
            SymbolKind::PolyNorm { poly, alpha } => {
                if poly.n != xi.dim() {
                    return Err(Error::DimensionMismatch(poly.n, xi.dim()));
                }
                match valuation_of(&poly.eval(xi.coords()), p) {
                    Valuation::Infinite => Err(Error::SymbolUndefined(xi.to_string())),
                    Valuation::Finite(v) => Ok(p_pow_complex(p, *alpha, -v)),
                }
            }
            SymbolKind::Custom(f) => {
                let z = f(xi);
                if z.re.is_finite() && z.im.is_finite() {
                    Ok(z)
                } else {
                    Err(Error::SymbolUndefined(xi.to_string()))
                }
            }
        }
    }

    /// The symbol on a ball not containing zero, as (sub-ball, value) pairs.
    fn on_ball(&self, ball: &Ball) -> Result<Vec<(Ball, Complex64)>> {
        if ball.contains(&PadicVector::zero(ball.prime(), ball.dim())?) {
            return Err(Error::SymbolUndefined(format!("0 lies in {ball}")));
        }
        if self.is_exact() {
            // |xi|_p is constant on a ball avoiding 0
            return Ok(vec![(ball.clone(), self.eval(&ball.center())?)]);
        }
        let depth = self.declared_depth()?;
        let parts = if depth == 0 { vec![ball.clone()] } else { ball.decompose(ball.radius_exp() - depth as i64)? };
        parts.into_iter().map(|b| Ok((b.clone(), self.eval(&b.center())?))).collect()
    }
}

/// `F^{-1}[A(xi) F[f](xi)]` for Lizorkin `f`.
pub fn apply(symbol: &SymbolSpec, f: &SchwartzFunction) -> Result<SchwartzFunction> {
    let integral = f.integrate();
    if !f.is_lizorkin(f.tol()) {
        return Err(Error::NotLizorkin { re: integral.re, im: integral.im });
    }
    let spectrum = f.fourier()?;
    if !symbol.is_exact() {
        let depth = symbol.declared_depth()?;
        let per_ball = int_pow(spectrum.prime(), depth * spectrum.dim() as u32).to_u128().unwrap_or(u128::MAX);
        let needed = per_ball.saturating_mul(spectrum.len() as u128);
        if needed > DEFAULT_TERM_BUDGET as u128 {
            return Err(Error::BudgetExceeded { needed, budget: DEFAULT_TERM_BUDGET });
        }
    }
    let parts: Vec<Vec<(Ball, Complex64)>> = spectrum
        .terms()
        .par_iter()
        .map(|(ball, c)| Ok(symbol.on_ball(ball)?.into_iter().map(|(b, a)| (b, a * c)).collect()))
        .collect::<Result<_>>()?;
    let product = SchwartzFunction::from_terms_with_tol(
        spectrum.prime(),
        spectrum.dim(),
        parts.into_iter().flatten().collect(),
        f.tol(),
    )?;
    product.fourier_inverse()
}

#[derive(Clone, Debug, PartialEq)]
pub enum EigenStatus {
    /// Constancy proven analytically.
    ProvenExact,
    /// Constancy checked on all `eta` modulo `p^depth`.
    VerifiedToDepth(u32),
    /// `A(p^j (-s + witness)) = value` differs from the eigenvalue.
    Failed { witness: PadicVector, value: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenReport {
    pub index: WaveletIndex,
    pub eigenvalue: Complex64,
    pub status: EigenStatus,
}

impl EigenReport {
    pub fn passed(&self) -> bool {
        !matches!(self.status, EigenStatus::Failed { .. })
    }
}

/// Relative tolerance for comparing symbol values on one coset.
const EIGEN_RTOL: f64 = 1e-12;

/// Tests whether the symbol is constant on `p^j (-s + Z_p^n)`.
pub fn eigencheck(symbol: &SymbolSpec, spec: &FamilySpec, idx: &WaveletIndex) -> Result<EigenReport> {
    spec.validate_index(idx)?;
    let p = spec.p;
    let base = idx.s.neg().dilate(&idx.j)?;
    let eigenvalue = symbol.eval(&base)?;
    if let SymbolKind::Taibleson { alpha } = symbol.kind {
        // |-s + eta|_p = |s|_p for eta in Z_p^n, so |p^j (-s + eta)|_p is
        // max_k p^{m_k - j_k} throughout
        let k = (0..spec.n).map(|r| spec.m[r] as i64 - idx.j[r]).max().expect("n >= 1");
        return Ok(EigenReport { index: idx.clone(), eigenvalue: p_pow_complex(p, alpha, k), status: EigenStatus::ProvenExact });
    }
    let depth = symbol.declared_depth()?;
    let count = int_pow(p, depth * spec.n as u32).to_u128().unwrap_or(u128::MAX);
    if count > DEFAULT_TERM_BUDGET as u128 {
        return Err(Error::BudgetExceeded { needed: count, budget: DEFAULT_TERM_BUDGET });
    }
    let digits: Vec<BigRational> = (0..int_pow(p, depth).to_u64().expect("checked above"))
        .map(|e| BigRational::from_integer(BigInt::from(e)))
        .collect();
    let scale = eigenvalue.norm().max(1.0);
    for eta in cartesian(&vec![digits; spec.n]) {
        let eta = PadicVector::from_rationals(p, eta)?;
        let xi = idx.s.neg().try_add(&eta)?.dilate(&idx.j)?;
        let value = match symbol.eval(&xi) {
            Ok(v) => v,
            Err(Error::SymbolUndefined(_)) => Complex64::new(f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        if !((value - eigenvalue).norm() <= EIGEN_RTOL * scale) {
            return Ok(EigenReport { index: idx.clone(), eigenvalue, status: EigenStatus::Failed { witness: eta, value } });
        }
    }
    Ok(EigenReport { index: idx.clone(), eigenvalue, status: EigenStatus::VerifiedToDepth(depth) })
}

/// Eigenvalues for every `(s, j)` occurring in the field; fails on the first
/// index that is not an eigenfunction.
pub fn certify(symbol: &SymbolSpec, field: &CoefficientField) -> Result<BTreeMap<WaveletIndex, Complex64>> {
    let spec = &field.spec;
    let scales: BTreeSet<(PadicVector, Vec<i64>)> = field.iter().map(|(idx, _)| (idx.s.clone(), idx.j.clone())).collect();
    let reports: Vec<((PadicVector, Vec<i64>), EigenReport)> = scales
        .into_par_iter()
        .map(|(s, j)| {
            let zero = PadicVector::zero(spec.p, spec.n)?;
            let idx = WaveletIndex::new(s.clone(), j.clone(), zero);
            Ok(((s, j), eigencheck(symbol, spec, &idx)?))
        })
        .collect::<Result<_>>()?;
    let mut by_scale = BTreeMap::new();
    for (key, report) in reports {
        if let EigenStatus::Failed { witness, .. } = &report.status {
            return Err(Error::NotEigenfunction { index: report.index.to_string(), witness: witness.to_string() });
        }
        by_scale.insert(key, report.eigenvalue);
    }
    Ok(field
        .iter()
        .map(|(idx, _)| (idx.clone(), by_scale[&(idx.s.clone(), idx.j.clone())]))
        .collect())
}

/// The diagonal action `c_idx -> lambda(idx) c_idx`.
pub fn eigen_apply(symbol: &SymbolSpec, field: &CoefficientField) -> Result<CoefficientField> {
    let eigen = certify(symbol, field)?;
    field.map(|idx, c| Ok(c * eigen[idx]))
}

/// The monomial `xi_var`.
pub fn unit_monomial(n: usize, var: usize) -> Monomial {
    let mut exps = vec![0; n];
    exps[var] = 1;
    Monomial { coeff: BigRational::one(), exps }
}
