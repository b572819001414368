//! Locally constant, compactly supported functions `Q_p^n -> C`.
//!
//! A [`SchwartzFunction`] is a finite sum of ball indicators with complex
//! coefficients, always kept in normal form: balls pairwise disjoint, no
//! negligible coefficients, no complete set of equal siblings left unmerged,
//! terms sorted by [`Ball`] order.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::error::{Error, Result};
use crate::padic::{
    canonical_center, cartesian, check_prime, fractional_part, int_pow, p_power, polydisc_balls, Ball, PadicVector, UnitPhase,
};

/// Absolute tolerance below which a coefficient counts as zero.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Maximum number of balls a single Fourier transform may produce.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct SchwartzFunction {
    p: u32,
    n: usize,
    terms: Vec<(Ball, Complex64)>,
    tol: f64,
    index: HashMap<Ball, usize>,
    levels: Vec<i64>,
}

impl PartialEq for SchwartzFunction {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.terms == other.terms
    }
}

impl SchwartzFunction {
    pub fn zero(p: u32, n: usize) -> Result<Self> {
        check_prime(p)?;
        if n == 0 {
            return Err(Error::DimensionMismatch(0, 1));
        }
        Ok(Self::from_normal(p, n, Vec::new(), DEFAULT_TOL))
    }

    pub fn indicator(ball: &Ball) -> Self {
        Self::from_normal(ball.prime(), ball.dim(), vec![(ball.clone(), Complex64::new(1.0, 0.0))], DEFAULT_TOL)
    }

    /// Sum of `coeff * 1_ball` over the given terms; balls may overlap or repeat.
    pub fn from_terms(p: u32, n: usize, terms: Vec<(Ball, Complex64)>) -> Result<Self> {
        Self::from_terms_with_tol(p, n, terms, DEFAULT_TOL)
    }

    pub fn from_terms_with_tol(p: u32, n: usize, terms: Vec<(Ball, Complex64)>, tol: f64) -> Result<Self> {
        check_prime(p)?;
        if n == 0 {
            return Err(Error::DimensionMismatch(0, 1));
        }
        for (b, c) in &terms {
            if b.prime() != p {
                return Err(Error::PrimeMismatch(p, b.prime()));
            }
            if b.dim() != n {
                return Err(Error::DimensionMismatch(n, b.dim()));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self::build(p, n, terms, tol))
    }

    pub(crate) fn build(p: u32, n: usize, terms: Vec<(Ball, Complex64)>, tol: f64) -> Self {
        Self::from_normal(p, n, normalize(p, n, terms, tol), tol)
    }

    fn from_normal(p: u32, n: usize, terms: Vec<(Ball, Complex64)>, tol: f64) -> Self {
        let index = terms.iter().enumerate().map(|(i, (b, _))| (b.clone(), i)).collect();
        let mut levels: Vec<i64> = terms.iter().map(|(b, _)| b.radius_exp()).collect();
        levels.sort_unstable();
        levels.dedup();
        SchwartzFunction { p, n, terms, tol, index, levels }
    }

    /// Re-normalizes under a different zero tolerance.
    pub fn with_tol(&self, tol: f64) -> Self {
        Self::build(self.p, self.n, self.terms.clone(), tol)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn terms(&self) -> &[(Ball, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient stored on exactly this ball, if it is a term.
    pub fn coefficient(&self, ball: &Ball) -> Option<Complex64> {
        self.index.get(ball).map(|&i| self.terms[i].1)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    fn check_point(&self, x: &PadicVector) -> Result<()> {
        if x.prime() != self.p {
            return Err(Error::PrimeMismatch(self.p, x.prime()));
        }
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch(self.n, x.dim()));
        }
        Ok(())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::build(self.p, self.n, terms, self.tol))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(b, c)| (b.clone(), -c)));
        Ok(Self::build(self.p, self.n, terms, self.tol))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(b, c)| (b.clone(), c * factor)).collect();
        Self::build(self.p, self.n, terms, self.tol)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Pairs of overlapping terms: the smaller ball with both coefficients.
    fn overlaps(&self, other: &Self) -> Vec<(Ball, Complex64, Complex64)> {
        let mut out = Vec::new();
        for (b, c) in &self.terms {
            for &l in other.levels.iter().filter(|&&l| l >= b.radius_exp()) {
                if let Some(&i) = other.index.get(&b.ancestor(l)) {
                    out.push((b.clone(), *c, other.terms[i].1));
                    break;
                }
            }
        }
        for (b, d) in &other.terms {
            for &l in self.levels.iter().filter(|&&l| l > b.radius_exp()) {
                if let Some(&i) = self.index.get(&b.ancestor(l)) {
                    out.push((b.clone(), self.terms[i].1, *d));
                    break;
                }
            }
        }
        out
    }

    /// Pointwise product.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let terms = self.overlaps(other).into_iter().map(|(b, c, d)| (b, c * d)).collect();
        Ok(Self::build(self.p, self.n, terms, self.tol))
    }

    /// `integral f(x) conj(g(x)) dx`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.compatible(other)?;
        Ok(self
            .overlaps(other)
            .into_iter()
            .map(|(b, c, d)| c * d.conj() * b.measure_f64())
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.iter().map(|(b, c)| c.norm_sqr() * b.measure_f64()).sum()
    }

    pub fn evaluate(&self, x: &PadicVector) -> Result<Complex64> {
        self.check_point(x)?;
        for &l in &self.levels {
            if let Some(&i) = self.index.get(&Ball::around(self.p, x.coords(), l)) {
                return Ok(self.terms[i].1);
            }
        }
        Ok(Complex64::zero())
    }

    /// `x -> f(x - t)`.
    pub fn translate(&self, t: &PadicVector) -> Result<Self> {
        self.check_point(t)?;
        let terms = self
            .terms
            .iter()
            .map(|(b, c)| {
                let center: Vec<BigRational> =
                    b.center_coords().iter().zip(t.coords()).map(|(a, s)| a + s).collect();
                (Ball::around(self.p, &center, b.radius_exp()), *c)
            })
            .collect();
        Ok(Self::build(self.p, self.n, terms, self.tol))
    }

    /// `x -> f(p^{j_1} x_1, ..., p^{j_n} x_n)`.
    pub fn dilate(&self, j: &[i64]) -> Result<Self> {
        if j.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, j.len()));
        }
        let mut terms = Vec::new();
        for (b, c) in &self.terms {
            let centers: Vec<BigRational> = b
                .center_coords()
                .iter()
                .zip(j)
                .map(|(a, &jk)| a * crate::padic::p_power(self.p, -jk))
                .collect();
            let radii: Vec<i64> = j.iter().map(|&jk| b.radius_exp() + jk).collect();
            terms.extend(polydisc_balls(self.p, &centers, &radii).into_iter().map(|ball| (ball, *c)));
        }
        Ok(Self::build(self.p, self.n, terms, self.tol))
    }

    /// Haar integral with the unit ball normalized to measure one.
    pub fn integrate(&self) -> Complex64 {
        self.terms.iter().map(|(b, c)| c * b.measure_f64()).sum()
    }

    pub fn is_lizorkin(&self, tol: f64) -> bool {
        self.integrate().norm() <= tol
    }

    pub fn sup_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Same balls in the same order, coefficients within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.p == other.p
            && self.n == other.n
            && self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|((b, c), (b2, c2))| b == b2 && (c - c2).norm() <= tol)
    }

    /// Largest pointwise difference, `sup |f - g|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.with_tol(0.0).sub(other)?.sup_norm())
    }

    /// Smallest and largest radius exponents among the terms.
    pub fn radius_range(&self) -> Option<(i64, i64)> {
        Some((*self.levels.first()?, *self.levels.last()?))
    }

    /// `F[f](xi) = integral chi_p(xi . x) f(x) dx`.
    pub fn fourier(&self) -> Result<Self> {
        self.fourier_with_budget(DEFAULT_TERM_BUDGET, false)
    }

    /// `F^{-1}[g](x) = integral chi_p(-x . xi) g(xi) dxi`.
    pub fn fourier_inverse(&self) -> Result<Self> {
        self.fourier_with_budget(DEFAULT_TERM_BUDGET, true)
    }

    /// Transform visiting at most `budget` frequency balls.
    pub fn fourier_with_budget(&self, budget: usize, inverse: bool) -> Result<Self> {
        let (p, n) = (self.p, self.n);
        let mut by_level: BTreeMap<i64, Vec<(Vec<BigRational>, Complex64)>> = BTreeMap::new();
        let mut mass = 0.0;
        for (b, c) in &self.terms {
            let m = c * b.measure_f64();
            mass += m.norm();
            by_level.entry(b.radius_exp()).or_default().push((b.center_coords().to_vec(), m));
        }
        let dual = Dual { p, n, inverse, floor: MASS_FLOOR * mass, budget, visited: AtomicUsize::new(0) };
        let parts = by_level
            .into_par_iter()
            .map(|(gamma, masses)| dual.descend(vec![BigRational::zero(); n], -gamma, masses))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(p, n, parts.concat(), self.tol))
    }
}

/// Partial sums below this fraction of `sum |c| vol(B)` are treated as
/// cancelled when pruning the frequency tree.
const MASS_FLOOR: f64 = 1e-14;

/// Above this many (mass, child) pairs the children are visited in parallel.
const PAR_WORK: usize = 256;

/// Frequency-side recursion. On `Q = B_r(eta)`,
/// `F[f](eta + z) = sum_Y chi_p(z . y_Y) M(Y)` over balls `Y` of radius `-r`
/// with `M(Y) = integral_Y f(x) chi_p(eta . x) dx`; `F[f]` is constant on `Q`
/// exactly when only `Y = B_{-r}(0)` carries mass.
struct Dual {
    p: u32,
    n: usize,
    inverse: bool,
    floor: f64,
    budget: usize,
    visited: AtomicUsize,
}

impl Dual {
    fn descend(
        &self,
        eta: Vec<BigRational>,
        r: i64,
        masses: Vec<(Vec<BigRational>, Complex64)>,
    ) -> Result<Vec<(Ball, Complex64)>> {
        if self.visited.fetch_add(1, AtomicOrdering::Relaxed) >= self.budget {
            return Err(Error::BudgetExceeded { needed: self.budget as u128 + 1, budget: self.budget });
        }
        let masses: Vec<_> = masses.into_iter().filter(|(_, m)| m.norm() > self.floor).collect();
        match masses.as_slice() {
            [] => return Ok(Vec::new()),
            [(y, m)] if y.iter().all(Zero::is_zero) => return Ok(vec![(Ball::from_canonical(self.p, eta, r), *m)]),
            _ => {}
        }
        let p = self.p;
        let step = p_power(p, -r);
        // frac(p^{-r} y_k): the child offset d p^{-r} pairs with y to d . u
        let units: Vec<Vec<BigRational>> =
            masses.iter().map(|(y, _)| y.iter().map(|c| fractional_part(&(c * &step), p)).collect()).collect();
        let parents: Vec<Vec<BigRational>> =
            masses.iter().map(|(y, _)| y.iter().map(|c| canonical_center(c, 1 - r, p)).collect()).collect();
        let digits: Vec<Vec<u32>> = vec![(0..p).collect(); self.n];
        let child = |d: Vec<u32>| -> Result<Vec<(Ball, Complex64)>> {
            let mut merged: BTreeMap<&Vec<BigRational>, Complex64> = BTreeMap::new();
            for ((u, parent), (_, m)) in units.iter().zip(&parents).zip(&masses) {
                let mut phase = BigRational::zero();
                for (uk, &dk) in u.iter().zip(&d) {
                    if dk != 0 {
                        phase += uk * BigRational::from_integer(dk.into());
                    }
                }
                if self.inverse {
                    phase = -phase;
                }
                *merged.entry(parent).or_default() += m * UnitPhase::new(phase).to_complex();
            }
            let center = eta
                .iter()
                .zip(&d)
                .map(|(e, &dk)| canonical_center(&(e + &step * BigRational::from_integer(dk.into())), r - 1, p))
                .collect();
            self.descend(center, r - 1, merged.into_iter().map(|(y, m)| (y.clone(), m)).collect())
        };
        let children = cartesian(&digits);
        let parts = if masses.len() * children.len() > PAR_WORK {
            children.into_par_iter().map(child).collect::<Result<Vec<_>>>()?
        } else {
            children.into_iter().map(child).collect::<Result<Vec<_>>>()?
        };
        Ok(parts.concat())
    }
}

/// Puts a sum of (possibly nested or repeated) ball terms into normal form.
pub(crate) fn normalize(p: u32, n: usize, raw: Vec<(Ball, Complex64)>, tol: f64) -> Vec<(Ball, Complex64)> {
    let mut own: HashMap<Ball, Complex64> = HashMap::with_capacity(raw.len());
    for (b, c) in raw {
        *own.entry(b).or_default() += c;
    }
    let flat = flatten(own);
    let kept: Vec<(Ball, Complex64)> = flat.into_iter().filter(|(_, c)| c.norm() > tol).collect();
    let mut out = merge_siblings(p, n, kept, tol);
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Resolves nesting: every point gets the sum of the coefficients of all
/// balls containing it, on a disjoint partition.
fn flatten(own: HashMap<Ball, Complex64>) -> HashMap<Ball, Complex64> {
    let mut levels: Vec<i64> = own.keys().map(Ball::radius_exp).collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() <= 1 {
        return own;
    }
    let mut order: Vec<&Ball> = own.keys().collect();
    order.sort();

    let mut cum: HashMap<Ball, Complex64> = HashMap::with_capacity(own.len());
    let mut has_desc: HashSet<Ball> = HashSet::new();
    let mut between: HashSet<Ball> = HashSet::new();
    for b in order {
        let mut value = own[b];
        for &l in levels.iter().filter(|&&l| l > b.radius_exp()) {
            let anc = b.ancestor(l);
            if let Some(v) = cum.get(&anc) {
                value += v;
                for mid in b.radius_exp() + 1..l {
                    between.insert(b.ancestor(mid));
                }
                has_desc.insert(anc);
                break;
            }
        }
        cum.insert(b.clone(), value);
    }

    let mut out = HashMap::with_capacity(cum.len());
    for (b, v) in &cum {
        if has_desc.contains(b) {
            fill_complement(b, *v, &cum, &between, &mut out);
        } else {
            out.insert(b.clone(), *v);
        }
    }
    out
}

fn fill_complement(
    b: &Ball,
    v: Complex64,
    present: &HashMap<Ball, Complex64>,
    between: &HashSet<Ball>,
    out: &mut HashMap<Ball, Complex64>,
) {
    for child in b.children() {
        if present.contains_key(&child) {
            continue;
        }
        if between.contains(&child) {
            fill_complement(&child, v, present, between, out);
        } else {
            out.insert(child, v);
        }
    }
}

/// Replaces complete sets of `p^n` sibling balls carrying equal coefficients
/// by their parent, repeatedly from the finest level up.
fn merge_siblings(p: u32, n: usize, terms: Vec<(Ball, Complex64)>, tol: f64) -> Vec<(Ball, Complex64)> {
    let group_size = int_pow(p, n as u32).to_usize().unwrap_or(usize::MAX);
    let mut by_level: BTreeMap<i64, Vec<(Ball, Complex64)>> = BTreeMap::new();
    for t in terms {
        by_level.entry(t.0.radius_exp()).or_default().push(t);
    }
    let mut out = Vec::new();
    while let Some((lvl, items)) = by_level.pop_first() {
        if items.len() < group_size {
            out.extend(items);
            continue;
        }
        let mut groups: HashMap<Ball, Vec<(Ball, Complex64)>> = HashMap::new();
        for t in items {
            groups.entry(t.0.parent()).or_default().push(t);
        }
        for (parent, mut kids) in groups {
            if kids.len() == group_size {
                kids.sort_by(|x, y| x.0.cmp(&y.0));
                let first = kids[0].1;
                if kids.iter().all(|(_, c)| (c - first).norm() <= tol) {
                    let avg = kids.iter().map(|(_, c)| c).sum::<Complex64>() / group_size as f64;
                    by_level.entry(lvl + 1).or_default().push((parent, avg));
                    continue;
                }
            }
            out.extend(kids);
        }
    }
    out
}
