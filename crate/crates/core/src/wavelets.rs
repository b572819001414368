//! Non-Haar wavelet families on `Q_p^n`.
//!
//! One-dimensional generators are `theta_s(x) = chi_p(s x) Omega(|x|_p)` for
//! `s` in `J_{p;m}`; basis elements are
//! `p^{-j/2} theta_s(p^j x - a)` with `j` in `Z` and `a` in `I_p`. The
//! `psi` families recombine the `p^nu` shifts `theta_s(x - k/p^nu)` with a
//! unitary circulant-like matrix. In `n` dimensions every basis element is
//! the product of one-dimensional ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic::{
    canonical_center, cartesian, check_prime, fractional_part, int_pow, p_power, polydisc_balls,
    shift_depth, shifts_1d, sub_centers_1d, valuation_of, Ball, PadicVector, UnitPhase, Valuation,
};
use crate::schwartz::{SchwartzFunction, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Theta,
    /// `gammas` maps a one-dimensional frequency `s` to its `p^nu` unit
    /// parameters; frequencies not listed use all ones.
    Psi { nu: u32, gammas: BTreeMap<BigRational, Vec<Complex64>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub p: u32,
    pub n: usize,
    pub m: Vec<u32>,
    pub family: Family,
}

impl FamilySpec {
    pub fn theta(p: u32, m: Vec<u32>) -> Result<Self> {
        let spec = FamilySpec { p, n: m.len(), m, family: Family::Theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn psi(p: u32, m: Vec<u32>, nu: u32, gammas: BTreeMap<BigRational, Vec<Complex64>>) -> Result<Self> {
        let spec = FamilySpec { p, n: m.len(), m, family: Family::Psi { nu, gammas } };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_prime(self.p)?;
        if self.n == 0 || self.m.len() != self.n {
            return Err(Error::InvalidFamily(format!("need one m per dimension, got n={} and {} values", self.n, self.m.len())));
        }
        if self.m.iter().any(|&mk| mk == 0) {
            return Err(Error::InvalidFamily("every m_k must be at least 1".into()));
        }
        if let Family::Psi { nu, gammas } = &self.family {
            if *nu == 0 {
                return Err(Error::InvalidFamily("nu must be at least 1".into()));
            }
            let len = int_pow(self.p, *nu).to_usize().unwrap_or(usize::MAX);
            for (s, g) in gammas {
                if !self.m.iter().any(|&mk| in_frequency_set(s, self.p, mk)) {
                    return Err(Error::InvalidFamily(format!("gamma key {} is not a frequency of this family", fmt_q(s))));
                }
                if g.len() != len {
                    return Err(Error::InvalidFamily(format!("expected {len} gamma values for s={}, got {}", fmt_q(s), g.len())));
                }
                if g.iter().any(|z| (z.norm() - 1.0).abs() > DEFAULT_TOL) {
                    return Err(Error::InvalidFamily(format!("gamma values for s={} must have modulus 1", fmt_q(s))));
                }
            }
        }
        Ok(())
    }

    pub fn nu(&self) -> u32 {
        match &self.family {
            Family::Theta => 0,
            Family::Psi { nu, .. } => *nu,
        }
    }

    pub fn is_theta(&self) -> bool {
        matches!(self.family, Family::Theta)
    }

    /// All `s` in `J_{p;m_1} x ... x J_{p;m_n}`.
    pub fn frequencies(&self) -> Vec<PadicVector> {
        crate::padic::enumerate_frequencies(self.p, &self.m).expect("validated spec")
    }

    /// Number of generators `prod_k (p-1) p^{m_k-1}`.
    pub fn generator_count(&self) -> usize {
        self.m.iter().map(|&mk| (self.p as usize - 1) * (self.p as usize).pow(mk - 1)).product()
    }

    pub fn validate_index(&self, idx: &WaveletIndex) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidIndex(format!("{idx}: {msg}")));
        if idx.s.prime() != self.p || idx.a.prime() != self.p {
            return Err(Error::PrimeMismatch(self.p, if idx.s.prime() != self.p { idx.s.prime() } else { idx.a.prime() }));
        }
        if idx.s.dim() != self.n || idx.j.len() != self.n || idx.a.dim() != self.n {
            return bad(format!("expected dimension {}", self.n));
        }
        for k in 0..self.n {
            if !in_frequency_set(&idx.s.coords()[k], self.p, self.m[k]) {
                return bad(format!("s_{} is not in J_(p;{})", k + 1, self.m[k]));
            }
            let a = &idx.a.coords()[k];
            if &canonical_center(a, 0, self.p) != a {
                return bad(format!("a_{} is not a canonical element of I_p", k + 1));
            }
        }
        Ok(())
    }

    fn gammas_for(&self, s: &BigRational) -> Option<&[Complex64]> {
        match &self.family {
            Family::Theta => None,
            Family::Psi { gammas, .. } => gammas.get(s).map(Vec::as_slice),
        }
    }
}

/// Whether `s` has reduced denominator exactly `p^m` and lies in `(0, 1)`.
fn in_frequency_set(s: &BigRational, p: u32, m: u32) -> bool {
    s > &BigRational::zero() && s < &BigRational::from_integer(1.into()) && s.denom() == &int_pow(p, m)
}

fn fmt_q(x: &BigRational) -> String {
    crate::padic::format_rational(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    pub s: PadicVector,
    pub j: Vec<i64>,
    pub a: PadicVector,
}

impl WaveletIndex {
    pub fn new(s: PadicVector, j: Vec<i64>, a: PadicVector) -> Self {
        WaveletIndex { s, j, a }
    }

    /// `|j| = j_1 + ... + j_n`.
    pub fn j_sum(&self) -> i64 {
        self.j.iter().sum()
    }

    pub fn parse(p: u32, s: &[&str], j: &[i64], a: &[&str]) -> Result<Self> {
        Ok(WaveletIndex { s: PadicVector::parse(p, s)?, j: j.to_vec(), a: PadicVector::parse(p, a)? })
    }
}

impl fmt::Display for WaveletIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={} j={:?} a={}", self.s, self.j, self.a)
    }
}

/// `p^{e/2}` as a float.
pub(crate) fn half_power(p: u32, e: i64) -> f64 {
    let pf = p as f64;
    if e % 2 == 0 {
        pf.powi((e / 2) as i32)
    } else {
        pf.powi(((e - 1) / 2) as i32) * pf.sqrt()
    }
}

/// A piece of a one-dimensional factor: `weight * exp(2 pi i phase)` on the
/// ball of radius `p^radius` around `center`.
#[derive(Clone, Debug)]
struct Cell {
    center: BigRational,
    radius: i64,
    weight: Complex64,
    phase: BigRational,
}

/// Cells of `x -> theta_s(p^j x - a)` without the `p^{-j/2}` factor: on
/// `p^j x - a` in `B_{-m}(b)` the value is `chi_p(s b)`. The shift `a` need
/// not be canonical.
fn theta_cells(p: u32, m: u32, s: &BigRational, j: i64, a: &BigRational, weight: Complex64) -> Vec<Cell> {
    let scale = p_power(p, -j);
    let count = int_pow(p, m).to_u64().expect("p^m fits in u64");
    (0..count)
        .map(|b| {
            let b = BigRational::from_integer(BigInt::from(b));
            Cell {
                center: &scale * (a + &b),
                radius: j - m as i64,
                weight,
                phase: fractional_part(&(s * &b), p),
            }
        })
        .collect()
}

fn assemble(p: u32, factors: &[Vec<Cell>], amplitude: f64) -> Vec<(Ball, Complex64)> {
    let mut out = Vec::new();
    for combo in cartesian(factors) {
        let centers: Vec<BigRational> = combo.iter().map(|c| c.center.clone()).collect();
        let radii: Vec<i64> = combo.iter().map(|c| c.radius).collect();
        let mut weight = Complex64::new(amplitude, 0.0);
        let mut phase = BigRational::zero();
        for c in &combo {
            weight *= c.weight;
            phase += &c.phase;
        }
        let value = weight * UnitPhase::new(phase).to_complex();
        out.extend(polydisc_balls(p, &centers, &radii).into_iter().map(|b| (b, value)));
    }
    out
}

/// Exact description of a theta wavelet: the amplitude `p^{-|j|/2}` and the
/// phase carried by each ball of its support.
pub fn theta_table(spec: &FamilySpec, idx: &WaveletIndex) -> Result<(f64, Vec<(Ball, UnitPhase)>)> {
    spec.validate_index(idx)?;
    let p = spec.p;
    let one = Complex64::new(1.0, 0.0);
    let factors: Vec<Vec<Cell>> = (0..spec.n)
        .map(|k| theta_cells(p, spec.m[k], &idx.s.coords()[k], idx.j[k], &idx.a.coords()[k], one))
        .collect();
    let mut table = Vec::new();
    for combo in cartesian(&factors) {
        let centers: Vec<BigRational> = combo.iter().map(|c| c.center.clone()).collect();
        let radii: Vec<i64> = combo.iter().map(|c| c.radius).collect();
        let phase = UnitPhase::new(combo.iter().fold(BigRational::zero(), |acc, c| acc + &c.phase));
        table.extend(polydisc_balls(p, &centers, &radii).into_iter().map(|b| (b, phase.clone())));
    }
    table.sort_by(|x, y| x.0.cmp(&y.0));
    Ok((half_power(p, -idx.j_sum()), table))
}

/// `p^{-|j|/2} prod_k theta_{s_k}(p^{j_k} x_k - a_k)`.
pub fn theta(spec: &FamilySpec, idx: &WaveletIndex) -> Result<SchwartzFunction> {
    spec.validate_index(idx)?;
    let p = spec.p;
    let one = Complex64::new(1.0, 0.0);
    let factors: Vec<Vec<Cell>> = (0..spec.n)
        .map(|k| theta_cells(p, spec.m[k], &idx.s.coords()[k], idx.j[k], &idx.a.coords()[k], one))
        .collect();
    Ok(SchwartzFunction::build(p, spec.n, assemble(p, &factors, half_power(p, -idx.j_sum())), DEFAULT_TOL))
}

/// `alpha_k = p^{-nu} sum_r gamma_r exp(-2 pi i (-s + r) k / p^nu)`.
///
/// With `gammas` absent (all ones) the result is exactly `(1, 0, ..., 0)`.
pub fn alpha_coeffs(p: u32, nu: u32, s: &BigRational, gammas: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    check_prime(p)?;
    let len = int_pow(p, nu).to_usize().expect("p^nu fits in usize");
    let Some(gammas) = gammas else {
        let mut e0 = vec![Complex64::zero(); len];
        e0[0] = Complex64::new(1.0, 0.0);
        return Ok(e0);
    };
    if gammas.len() != len {
        return Err(Error::InvalidFamily(format!("expected {len} gamma values, got {}", gammas.len())));
    }
    if gammas.iter().any(|z| (z.norm() - 1.0).abs() > DEFAULT_TOL) {
        return Err(Error::InvalidFamily("gamma values must have modulus 1".into()));
    }
    let den = BigRational::from_integer(int_pow(p, nu));
    let scale = 1.0 / len as f64;
    Ok((0..len)
        .map(|k| {
            let kq = BigRational::from_integer(BigInt::from(k));
            let sum: Complex64 = gammas
                .iter()
                .enumerate()
                .map(|(r, g)| {
                    let rq = BigRational::from_integer(BigInt::from(r));
                    let turns = -((&rq - s) * &kq / &den);
                    g * UnitPhase::new(turns).to_complex()
                })
                .sum();
            sum * scale
        })
        .collect())
}

/// The matrix expressing `psi(x - r/p^nu)` through `theta(x - l/p^nu)`:
/// `D[r][l] = alpha_{l-r}` for `l >= r`, else `chi_p(-s) alpha_{l-r+p^nu}`.
pub fn d_matrix(p: u32, nu: u32, s: &BigRational, gammas: Option<&[Complex64]>) -> Result<Vec<Vec<Complex64>>> {
    let alpha = alpha_coeffs(p, nu, s, gammas)?;
    let len = alpha.len();
    let wrap = UnitPhase::new(-fractional_part(s, p)).to_complex();
    Ok((0..len)
        .map(|r| (0..len).map(|l| if l >= r { alpha[l - r] } else { wrap * alpha[l + len - r] }).collect())
        .collect())
}

/// `prod_k p^{-j_k/2} psi_{s_k}(p^{j_k} x_k - a_k)` with
/// `psi_s(y) = sum_k alpha_{s;k} theta_s(y - k/p^nu)`.
pub fn psi(spec: &FamilySpec, idx: &WaveletIndex) -> Result<SchwartzFunction> {
    spec.validate_index(idx)?;
    let p = spec.p;
    let nu = spec.nu();
    if nu == 0 {
        return Err(Error::InvalidFamily("psi requires a PSI family".into()));
    }
    let den = BigRational::from_integer(int_pow(p, nu));
    let mut factors = Vec::with_capacity(spec.n);
    for k in 0..spec.n {
        let s = &idx.s.coords()[k];
        let alpha = alpha_coeffs(p, nu, s, spec.gammas_for(s))?;
        let mut cells = Vec::new();
        for (shift, w) in alpha.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let a = &idx.a.coords()[k] + BigRational::from_integer(BigInt::from(shift)) / &den;
            cells.extend(theta_cells(p, spec.m[k], s, idx.j[k], &a, *w));
        }
        factors.push(cells);
    }
    Ok(SchwartzFunction::build(p, spec.n, assemble(p, &factors, half_power(p, -idx.j_sum())), DEFAULT_TOL))
}

/// The basis element of the given family.
pub fn wavelet(spec: &FamilySpec, idx: &WaveletIndex) -> Result<SchwartzFunction> {
    match spec.family {
        Family::Theta => theta(spec, idx),
        Family::Psi { .. } => psi(spec, idx),
    }
}

/// `F[theta_{s;j,a}](xi) = p^{|j|/2} chi_p(p^{-j} a . xi) Omega(|s + p^{-j} xi|_p)`,
/// assembled directly from its ball decomposition.
pub fn fourier_closed_form(spec: &FamilySpec, idx: &WaveletIndex) -> Result<SchwartzFunction> {
    spec.validate_index(idx)?;
    if !spec.is_theta() {
        return Err(Error::InvalidFamily("closed-form transform is available for THETA only".into()));
    }
    let p = spec.p;
    let one = Complex64::new(1.0, 0.0);
    let zero = BigRational::zero();
    let factors: Vec<Vec<Cell>> = (0..spec.n)
        .map(|k| {
            let (s, j, a) = (&idx.s.coords()[k], idx.j[k], &idx.a.coords()[k]);
            // chi_p(a eta) is constant on balls of radius p^delta in Z_p
            let delta = match valuation_of(a, p) {
                Valuation::Finite(v) => v.min(0),
                Valuation::Infinite => 0,
            };
            let pj = p_power(p, j);
            sub_centers_1d(&zero, 0, delta, p)
                .into_iter()
                .map(|eta| Cell {
                    center: &pj * (&eta - s),
                    radius: delta - j,
                    weight: one,
                    phase: fractional_part(&(a * (&eta - s)), p),
                })
                .collect()
        })
        .collect();
    Ok(SchwartzFunction::build(p, spec.n, assemble(p, &factors, half_power(p, idx.j_sum())), DEFAULT_TOL))
}

/// Phases of Kozyrev's generator `theta_k(x) = chi_p(k x / p) Omega(|x|_p)`
/// on the balls `B_{-1}(r)`, read off its refinement form
/// `theta_k(x) = sum_r h_{kr} Omega(|x/p - r/p|_p)` with `h_{kr} = exp(2 pi i k r / p)`.
pub fn kozyrev_table(p: u32, k: u32) -> Result<Vec<(Ball, UnitPhase)>> {
    check_prime(p)?;
    if k == 0 || k >= p {
        return Err(Error::InvalidIndex(format!("Kozyrev index k={k} must lie in 1..{p}")));
    }
    Ok((0..p)
        .map(|r| {
            let ball = Ball::new(&PadicVector::from_raw(p, vec![BigRational::from_integer(r.into())]), -1);
            let turns = BigRational::new(BigInt::from((k as u64 * r as u64) % p as u64), BigInt::from(p));
            (ball, UnitPhase::new(turns))
        })
        .collect())
}

/// Kozyrev's wavelet `p^{-j/2} theta_k(p^j x - a)` built from the
/// refinement form by dilation and translation of the unit-ball indicator.
pub fn kozyrev(p: u32, k: u32, j: i64, a: &BigRational) -> Result<SchwartzFunction> {
    let unit = SchwartzFunction::indicator(&Ball::unit(p, 1)?);
    let mut generator = SchwartzFunction::zero(p, 1)?;
    for (r, (_, h)) in kozyrev_table(p, k)?.into_iter().enumerate() {
        let shift = PadicVector::from_raw(p, vec![BigRational::from_integer(BigInt::from(r))]);
        let piece = unit.dilate(&[-1])?.translate(&shift)?.scale(h.to_complex());
        generator = generator.add(&piece)?;
    }
    let shifted = generator.translate(&PadicVector::from_raw(p, vec![a.clone()]))?;
    Ok(shifted.dilate(&[j])?.scale(Complex64::new(half_power(p, -j), 0.0)))
}

/// Finite map from wavelet indices to coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub spec: FamilySpec,
    entries: BTreeMap<WaveletIndex, Complex64>,
}

impl CoefficientField {
    pub fn new(spec: FamilySpec) -> Self {
        CoefficientField { spec, entries: BTreeMap::new() }
    }

    /// Adds `c` to the coefficient of `idx`; entries that become negligible
    /// are removed.
    pub fn insert(&mut self, idx: WaveletIndex, c: Complex64) -> Result<()> {
        self.spec.validate_index(&idx)?;
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite);
        }
        let slot = self.entries.entry(idx.clone()).or_default();
        *slot += c;
        if slot.norm() <= DEFAULT_TOL {
            self.entries.remove(&idx);
        }
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, idx: WaveletIndex, c: Complex64) {
        if c.norm() > DEFAULT_TOL {
            self.entries.insert(idx, c);
        }
    }

    pub fn from_entries(spec: FamilySpec, entries: impl IntoIterator<Item = (WaveletIndex, Complex64)>) -> Result<Self> {
        let mut field = CoefficientField::new(spec);
        for (idx, c) in entries {
            field.insert(idx, c)?;
        }
        Ok(field)
    }

    pub fn get(&self, idx: &WaveletIndex) -> Complex64 {
        self.entries.get(idx).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> &BTreeMap<WaveletIndex, Complex64> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveletIndex, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(Complex64::norm_sqr).sum()
    }

    /// Largest coefficient difference over the union of both index sets.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&WaveletIndex> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter().map(|k| (self.get(k) - other.get(k)).norm()).fold(0.0, f64::max)
    }

    /// Applies `f` to every coefficient, dropping entries that become negligible.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&WaveletIndex, Complex64) -> Result<Complex64> + Sync,
    {
        let mapped: Vec<(WaveletIndex, Complex64)> = self
            .entries
            .par_iter()
            .map(|(idx, c)| Ok((idx.clone(), f(idx, *c)?)))
            .collect::<Result<_>>()?;
        let mut out = CoefficientField::new(self.spec.clone());
        for (idx, c) in mapped {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite);
            }
            out.insert_unchecked(idx, c);
        }
        Ok(out)
    }
}

/// Index window for analysis: every `j_k` in `[j_min, j_max]` and every
/// shift with at most `shift_depth` fractional digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub j_min: i64,
    pub j_max: i64,
    pub shift_depth: u32,
}

impl Window {
    pub fn new(j_min: i64, j_max: i64, shift_depth: u32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidIndex(format!("empty scale window [{j_min}, {j_max}]")));
        }
        Ok(Window { j_min, j_max, shift_depth })
    }

    /// All indices of the family inside the window.
    pub fn indices(&self, spec: &FamilySpec) -> Vec<WaveletIndex> {
        let js: Vec<Vec<i64>> = vec![(self.j_min..=self.j_max).collect(); spec.n];
        let shifts = crate::padic::enumerate_shifts(spec.p, spec.n, self.shift_depth).expect("validated spec");
        let mut out = Vec::new();
        for s in spec.frequencies() {
            for j in cartesian(&js) {
                for a in &shifts {
                    out.push(WaveletIndex { s: s.clone(), j: j.clone(), a: a.clone() });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub field: CoefficientField,
    /// Whether the window provably contains every nonzero coefficient.
    pub complete: bool,
    /// Whether `f` has zero integral; otherwise its constant part is invisible.
    pub lizorkin: bool,
}

/// Shifts `a` (canonical, depth at most `depth`) with `|a - x|_p <= p^r`,
/// `r >= 0`, plus whether deeper shifts were left out.
fn shift_candidates(p: u32, x: &BigRational, r: i64, depth: u32) -> (Vec<BigRational>, bool) {
    let x0 = canonical_center(x, 0, p);
    let near_zero = match valuation_of(&x0, p) {
        Valuation::Infinite => true,
        Valuation::Finite(v) => v >= -r,
    };
    if near_zero {
        let reach = r.max(0) as u32;
        return (shifts_1d(p, reach.min(depth)), reach > depth);
    }
    // every candidate has the same norm as x0
    if shift_depth(&x0, p) > depth {
        return (Vec::new(), true);
    }
    (sub_centers_1d(&canonical_center(&x0, r, p), r, 0, p), false)
}

/// Scales `j_k` at which some wavelet can meet the Fourier support of `f`,
/// per coordinate; `None` when unbounded.
fn required_scales(spec: &FamilySpec, fourier: &SchwartzFunction) -> Vec<Option<BTreeSet<i64>>> {
    let mut out: Vec<Option<BTreeSet<i64>>> = vec![Some(BTreeSet::new()); spec.n];
    for (ball, _) in fourier.terms() {
        for k in 0..spec.n {
            let c = &ball.center_coords()[k];
            let slot = &mut out[k];
            match valuation_of(c, spec.p) {
                // |xi_k|_p = |c_k|_p on the whole ball; wavelets at scale j
                // live on |xi_k|_p = p^{m_k - j}
                Valuation::Finite(v) if -v > ball.radius_exp() => {
                    if let Some(set) = slot {
                        set.insert(spec.m[k] as i64 + v);
                    }
                }
                _ => *slot = None,
            }
        }
    }
    out
}

/// Coefficients `<f, w_idx>` for all indices in the window whose support
/// meets the support of `f`.
pub fn analyze(f: &SchwartzFunction, spec: &FamilySpec, window: &Window) -> Result<Analysis> {
    spec.validate()?;
    if f.prime() != spec.p {
        return Err(Error::PrimeMismatch(spec.p, f.prime()));
    }
    if f.dim() != spec.n {
        return Err(Error::DimensionMismatch(spec.n, f.dim()));
    }
    let p = spec.p;
    let nu = spec.nu() as i64;
    let lizorkin = f.is_lizorkin(f.tol().max(DEFAULT_TOL));

    let required = required_scales(spec, &f.fourier()?);
    let mut complete = required
        .iter()
        .all(|r| r.as_ref().is_some_and(|set| set.iter().all(|j| (window.j_min..=window.j_max).contains(j))));

    let js: Vec<Vec<i64>> = vec![(window.j_min..=window.j_max).collect(); spec.n];
    let mut candidates: BTreeSet<(Vec<i64>, Vec<BigRational>)> = BTreeSet::new();
    for j in cartesian(&js) {
        let relevant = j
            .iter()
            .zip(&required)
            .all(|(jk, r)| r.as_ref().is_none_or(|set| set.contains(jk)));
        for (ball, _) in f.terms() {
            // a support inside a ball where f is constant gives zero
            if j.iter().all(|&jk| jk + nu <= ball.radius_exp()) {
                continue;
            }
            let mut per = Vec::with_capacity(spec.n);
            for k in 0..spec.n {
                // support of the wavelet factor: |x_k - p^{-j_k} a_k| <= p^{j_k + nu}
                let reach = ball.radius_exp().max(j[k] + nu);
                let x = &ball.center_coords()[k] * p_power(p, j[k]);
                let (list, truncated) = shift_candidates(p, &x, reach - j[k], window.shift_depth);
                if truncated && relevant {
                    complete = false;
                }
                per.push(list);
            }
            for a in cartesian(&per) {
                candidates.insert((j.clone(), a));
            }
        }
    }

    let freqs = spec.frequencies();
    let work: Vec<WaveletIndex> = candidates
        .into_iter()
        .flat_map(|(j, a)| {
            let a = PadicVector::from_raw(p, a);
            freqs.iter().map(move |s| WaveletIndex { s: s.clone(), j: j.clone(), a: a.clone() })
        })
        .collect();
    let coeffs: Vec<(WaveletIndex, Complex64)> = work
        .into_par_iter()
        .map(|idx| {
            let w = wavelet(spec, &idx)?;
            let c = f.inner_product(&w)?;
            Ok((idx, c))
        })
        .collect::<Result<_>>()?;
    let mut field = CoefficientField::new(spec.clone());
    for (idx, c) in coeffs {
        field.insert_unchecked(idx, c);
    }
    Ok(Analysis { field, complete, lizorkin })
}

#[derive(Clone, Debug)]
pub struct GramReport {
    pub count: usize,
    /// `max |<w_x, w_y> - delta_xy|` over the window.
    pub max_defect: f64,
    pub worst: Option<(WaveletIndex, WaveletIndex)>,
}

/// Gram matrix of the family on a window, compared with the identity.
pub fn gram_report(spec: &FamilySpec, window: &Window) -> Result<GramReport> {
    spec.validate()?;
    let indices = window.indices(spec);
    let funcs = indices.par_iter().map(|idx| wavelet(spec, idx)).collect::<Result<Vec<_>>>()?;
    let rows = (0..funcs.len())
        .into_par_iter()
        .map(|x| {
            let mut worst = (0.0, x);
            for y in x..funcs.len() {
                let delta = if x == y { 1.0 } else { 0.0 };
                let defect = (funcs[x].inner_product(&funcs[y])? - delta).norm();
                if defect > worst.0 {
                    worst = (defect, y);
                }
            }
            Ok((worst.0, x, worst.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let top = rows.into_iter().max_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GramReport {
        count: indices.len(),
        max_defect: top.map_or(0.0, |t| t.0),
        worst: top.filter(|t| t.0 > 0.0).map(|t| (indices[t.1].clone(), indices[t.2].clone())),
    })
}

/// `sum_idx c_idx w_idx` in normal form.
pub fn synthesize(field: &CoefficientField) -> Result<SchwartzFunction> {
    let spec = &field.spec;
    let parts: Vec<Vec<(Ball, Complex64)>> = field
        .entries
        .par_iter()
        .map(|(idx, c)| Ok(wavelet(spec, idx)?.terms().iter().map(|(b, v)| (b.clone(), v * c)).collect()))
        .collect::<Result<_>>()?;
    let terms = parts.into_iter().flatten().collect();
    Ok(SchwartzFunction::build(spec.p, spec.n, terms, DEFAULT_TOL))
}
