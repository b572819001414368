//! Cauchy problems solved mode by mode in a wavelet basis.
//!
//! Every wavelet mode evolves independently once the operator acts
//! diagonally on it:
//!
//! * linear: `u_t + A u = 0`, each coefficient decays as `exp(-lambda t)`;
//! * Schrödinger-type: `i u_t - A u = 0`, each coefficient rotates as `exp(-i lambda t)`;
//! * semilinear: `u_t + A u + u |u|^{2m} = 0` with pairwise disjoint wavelet
//!   supports, each coefficient obeys `L' + lambda L + p^{-m|j|} L^{2m+1} = 0`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::padic::{p_power, Ball, PadicVector};
use crate::pseudodiff::{certify, eigen_apply, SymbolSpec};
use crate::schwartz::{SchwartzFunction, DEFAULT_TOL};
use crate::wavelets::{synthesize, CoefficientField, FamilySpec, WaveletIndex, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionKind {
    Linear,
    Schrodinger,
    /// Nonlinearity `u |u|^{2 degree}`.
    Semilinear { degree: u32 },
}

#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub kind: EvolutionKind,
    pub symbol: SymbolSpec,
    pub initial: CoefficientField,
    pub times: Vec<f64>,
    /// Index window the initial data was truncated to, if any.
    pub window: Option<Window>,
    /// Known bound on the squared L2 norm of the discarded tail.
    pub tail_bound: Option<f64>,
}

impl EvolutionProblem {
    pub fn new(kind: EvolutionKind, symbol: SymbolSpec, initial: CoefficientField, times: Vec<f64>) -> Result<Self> {
        let prob = EvolutionProblem { kind, symbol, initial, times, window: None, tail_bound: None };
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_truncation(mut self, window: Window, tail_bound: Option<f64>) -> Self {
        self.window = Some(window);
        self.tail_bound = tail_bound;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::InvalidProblem("time grid is empty".into()));
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidProblem("times must be finite and nonnegative".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProblem("times must be strictly increasing".into()));
        }
        if let EvolutionKind::Semilinear { degree } = self.kind {
            if degree == 0 {
                return Err(Error::InvalidProblem("nonlinearity degree must be at least 1".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: EvolutionKind,
    pub times: Vec<f64>,
    pub fields: Vec<CoefficientField>,
    pub eigenvalues: BTreeMap<WaveletIndex, Complex64>,
    pub window: Option<Window>,
    pub tail_bound: Option<f64>,
}

impl Trajectory {
    /// The solution at the `i`-th time point as a function on `Q_p^n`.
    pub fn synthesize_at(&self, i: usize) -> Result<SchwartzFunction> {
        synthesize(&self.fields[i])
    }

    /// `sum_idx |L_idx(t)|^2` at each time point.
    pub fn energies(&self) -> Vec<f64> {
        self.fields.iter().map(CoefficientField::norm_sq).collect()
    }
}

pub fn solve(prob: &EvolutionProblem) -> Result<Trajectory> {
    match prob.kind {
        EvolutionKind::Linear => solve_linear(prob),
        EvolutionKind::Schrodinger => solve_schrodinger(prob),
        EvolutionKind::Semilinear { .. } => solve_semilinear(prob),
    }
}

fn evolve<F>(prob: &EvolutionProblem, eigen: BTreeMap<WaveletIndex, Complex64>, mode: F) -> Result<Trajectory>
where
    F: Fn(&WaveletIndex, Complex64, Complex64, f64) -> Result<Complex64> + Sync,
{
    let fields = prob
        .times
        .iter()
        .map(|&t| prob.initial.map(|idx, c| mode(idx, c, eigen[idx], t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        kind: prob.kind,
        times: prob.times.clone(),
        fields,
        eigenvalues: eigen,
        window: prob.window,
        tail_bound: prob.tail_bound,
    })
}

fn expect_kind(prob: &EvolutionProblem, ok: bool) -> Result<()> {
    prob.validate()?;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("solver does not handle {:?}", prob.kind)))
    }
}

/// `L(t) = L(0) exp(-lambda t)`.
pub fn solve_linear(prob: &EvolutionProblem) -> Result<Trajectory> {
    expect_kind(prob, prob.kind == EvolutionKind::Linear)?;
    let eigen = certify(&prob.symbol, &prob.initial)?;
    evolve(prob, eigen, |_, c, lambda, t| Ok(c * (-lambda * t).exp()))
}

/// `L(t) = L(0) exp(-i lambda t)`.
pub fn solve_schrodinger(prob: &EvolutionProblem) -> Result<Trajectory> {
    expect_kind(prob, prob.kind == EvolutionKind::Schrodinger)?;
    let eigen = certify(&prob.symbol, &prob.initial)?;
    let minus_i = Complex64::new(0.0, -1.0);
    evolve(prob, eigen, |_, c, lambda, t| Ok(c * (minus_i * lambda * t).exp()))
}

/// Closed-form solution of `L' + lambda L + q L^{2m+1} = 0`, `L(0) = c`:
/// `c lambda^{1/2m} e^{-lambda t} / (lambda + c^{2m} q (1 - e^{-2m lambda t}))^{1/2m}`,
/// continued to `lambda = 0` as `c / (1 + 2m q t c^{2m})^{1/2m}`.
pub fn semilinear_mode(c: f64, lambda: f64, degree: u32, q: f64, t: f64) -> f64 {
    let two_m = 2.0 * degree as f64;
    let c2m = c.powi(2 * degree as i32);
    if lambda == 0.0 {
        return c / (1.0 + two_m * q * t * c2m).powf(1.0 / two_m);
    }
    // 1 - e^{-2m lambda t} without cancellation for small lambda t
    let growth = -(-two_m * lambda * t).exp_m1();
    // divide through by lambda so that small lambda stays well conditioned
    let denom = 1.0 + c2m * q * growth / lambda;
    c * (-lambda * t).exp() / denom.powf(1.0 / two_m)
}

/// The nonlinear weight `p^{-m |j|}`.
pub fn semilinear_weight(p: u32, degree: u32, idx: &WaveletIndex) -> f64 {
    (p as f64).powi(-(degree as i32) * idx.j_sum() as i32)
}

pub fn solve_semilinear(prob: &EvolutionProblem) -> Result<Trajectory> {
    let degree = match prob.kind {
        EvolutionKind::Semilinear { degree } => degree,
        _ => return Err(Error::InvalidProblem(format!("solver does not handle {:?}", prob.kind))),
    };
    prob.validate()?;
    let spec = &prob.initial.spec;
    if !spec.is_theta() {
        return Err(Error::InvalidProblem("the semilinear solver needs the THETA family (|wavelet| constant on its support)".into()));
    }
    let report = check_disjointness(&prob.initial);
    if let Some((first, second)) = report.witness {
        return Err(Error::NotDisjoint { first: first.to_string(), second: second.to_string() });
    }
    for (idx, c) in prob.initial.iter() {
        if c.im.abs() > DEFAULT_TOL * c.norm().max(1.0) {
            return Err(Error::InvalidProblem(format!("coefficient of {idx} is not real")));
        }
    }
    let eigen = certify(&prob.symbol, &prob.initial)?;
    for (idx, lambda) in &eigen {
        if lambda.im.abs() > DEFAULT_TOL * lambda.norm().max(1.0) || lambda.re < 0.0 {
            return Err(Error::InvalidProblem(format!("eigenvalue {lambda} of {idx} is not real and nonnegative")));
        }
    }
    let p = spec.p;
    evolve(prob, eigen, |idx, c, lambda, t| {
        let q = semilinear_weight(p, degree, idx);
        Ok(Complex64::new(semilinear_mode(c.re, lambda.re, degree, q, t), 0.0))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisjointnessReport {
    pub disjoint: bool,
    pub witness: Option<(WaveletIndex, WaveletIndex)>,
}

/// Support of a THETA wavelet: the polydisc `|x_k - p^{-j_k} a_k|_p <= p^{j_k}`.
fn support(idx: &WaveletIndex) -> Vec<Ball> {
    let p = idx.a.prime();
    idx.a
        .coords()
        .iter()
        .zip(&idx.j)
        .map(|(a, &j)| {
            let center = PadicVector::from_rationals(p, vec![a * p_power(p, -j)]).expect("prime checked");
            Ball::new(&center, j)
        })
        .collect()
}

/// Checks that the supports `{x : |p^j x - a|_p <= 1}` of all entries are
/// pairwise disjoint, returning an overlapping pair otherwise.
pub fn check_disjointness(field: &CoefficientField) -> DisjointnessReport {
    let entries: Vec<(&WaveletIndex, Vec<Ball>)> = field.iter().map(|(idx, _)| (idx, support(idx))).collect();
    for (i, (x, sx)) in entries.iter().enumerate() {
        for (y, sy) in &entries[i + 1..] {
            if sx.iter().zip(sy).all(|(bx, by)| bx.intersects(by)) {
                return DisjointnessReport { disjoint: false, witness: Some(((*x).clone(), (*y).clone())) };
            }
        }
    }
    DisjointnessReport { disjoint: true, witness: None }
}

/// `sum_{j > J} (p-1) p^{m-1} p^{-j} = p^{m-J-1}`: squared L2 mass of the
/// one-dimensional unit-ball indicator above scale `J`.
pub fn omega_tail_bound(p: u32, m: u32, j_max: i64) -> f64 {
    (p as f64).powi(m as i32 - j_max as i32 - 1)
}

/// The same tail as an exact rational.
pub fn omega_tail_bound_exact(p: u32, m: u32, j_max: i64) -> BigRational {
    p_power(p, m as i64 - j_max - 1)
}

/// Wavelet coefficients of `Omega(|x|_p)` on `Q_p^n`: `prod_k p^{-j_k/2}`
/// at `a = 0` for `m_k <= j_k <= j_max`, every `s`. Requires THETA.
pub fn omega_coefficients(spec: &FamilySpec, j_max: i64) -> Result<CoefficientField> {
    if !spec.is_theta() {
        return Err(Error::InvalidFamily("unit-ball coefficients are tabulated for THETA only".into()));
    }
    let ranges: Vec<Vec<i64>> = spec.m.iter().map(|&mk| (mk as i64..=j_max).collect()).collect();
    let zero = PadicVector::zero(spec.p, spec.n)?;
    let mut field = CoefficientField::new(spec.clone());
    for j in crate::padic::cartesian(&ranges) {
        let sum: i64 = j.iter().sum();
        let c = Complex64::new(crate::wavelets::half_power(spec.p, -sum), 0.0);
        for s in spec.frequencies() {
            field.insert(WaveletIndex::new(s, j.clone(), zero.clone()), c)?;
        }
    }
    Ok(field)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub sample_times: Vec<f64>,
    /// Largest residual of each mode over the sample times.
    pub per_mode: BTreeMap<WaveletIndex, f64>,
    pub max: f64,
}

/// Finite-difference check that the trajectory solves its equation: the
/// time derivative is a three-point (second-order) difference on the grid,
/// the operator acts through `eigen_apply`, and the semilinear term is
/// `p^{-m|j|} L^{2m+1}`. Sample times must be interior grid points; an
/// empty list means all of them.
pub fn residual(traj: &Trajectory, prob: &EvolutionProblem, sample_times: &[f64]) -> Result<ResidualReport> {
    let times = &traj.times;
    if times.len() < 3 {
        return Err(Error::InvalidProblem("residual needs at least 3 time points".into()));
    }
    let interior: Vec<usize> = if sample_times.is_empty() {
        (1..times.len() - 1).collect()
    } else {
        sample_times
            .iter()
            .map(|&t| {
                let scale = t.abs().max(1.0);
                times[1..times.len() - 1]
                    .iter()
                    .position(|&g| (g - t).abs() <= 1e-12 * scale)
                    .map(|i| i + 1)
                    .ok_or_else(|| Error::InvalidProblem(format!("sample time {t} is not an interior grid point")))
            })
            .collect::<Result<_>>()?
    };

    let p = prob.initial.spec.p;
    let mut per_mode: BTreeMap<WaveletIndex, f64> = BTreeMap::new();
    for &i in &interior {
        let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
        let w_prev = -h2 / (h1 * (h1 + h2));
        let w_mid = (h2 - h1) / (h1 * h2);
        let w_next = h1 / (h2 * (h1 + h2));
        let (prev, mid, next) = (&traj.fields[i - 1], &traj.fields[i], &traj.fields[i + 1]);
        let applied = eigen_apply(&prob.symbol, mid)?;
        for (idx, _) in prob.initial.iter() {
            let value = mid.get(idx);
            let dt = prev.get(idx) * w_prev + value * w_mid + next.get(idx) * w_next;
            let op = applied.get(idx);
            let r = match prob.kind {
                EvolutionKind::Linear => dt + op,
                EvolutionKind::Schrodinger => Complex64::i() * dt - op,
                EvolutionKind::Semilinear { degree } => {
                    dt + op + value.powu(2 * degree + 1) * semilinear_weight(p, degree, idx)
                }
            };
            let slot = per_mode.entry(idx.clone()).or_insert(0.0);
            *slot = slot.max(r.norm());
        }
    }
    let max = per_mode.values().copied().fold(0.0, f64::max);
    Ok(ResidualReport { sample_times: interior.iter().map(|&i| times[i]).collect(), per_mode, max })
}

/// Uniform grid `0, tmax/steps, ..., tmax`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidProblem("need tmax > 0 and at least one step".into()));
    }
    Ok((0..=steps).map(|i| t_max * i as f64 / steps as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudodiff::SymbolSpec;
    use num_traits::Zero;
    use std::sync::Arc;

    fn spec1(p: u32, m: u32) -> FamilySpec {
        FamilySpec::theta(p, vec![m]).unwrap()
    }

    fn idx(p: u32, s: &str, j: i64, a: &str) -> WaveletIndex {
        WaveletIndex::parse(p, &[s], &[j], &[a]).unwrap()
    }

    fn taibleson(a: f64) -> SymbolSpec {
        SymbolSpec::taibleson(Complex64::new(a, 0.0))
    }

    #[test]
    fn linear_at_time_zero_is_initial() {
        let field = omega_coefficients(&spec1(2, 1), 4).unwrap();
        let prob = EvolutionProblem::new(EvolutionKind::Linear, taibleson(1.0), field.clone(), vec![0.0, 1.0]).unwrap();
        let traj = solve(&prob).unwrap();
        assert_eq!(traj.fields[0], field);
        assert!(traj.fields[1].norm_sq() < field.norm_sq());
    }

    #[test]
    fn zero_symbol_keeps_field_constant() {
        let field = omega_coefficients(&spec1(3, 1), 3).unwrap();
        let zero = SymbolSpec::custom(Arc::new(|_: &PadicVector| Complex64::zero()), 1);
        let prob = EvolutionProblem::new(EvolutionKind::Linear, zero, field.clone(), vec![0.0, 2.0, 5.0]).unwrap();
        for f in solve(&prob).unwrap().fields {
            assert!(f.max_diff(&field) < 1e-15);
        }
    }

    #[test]
    fn schrodinger_phase() {
        let spec = spec1(2, 2);
        let i0 = idx(2, "1/4", 0, "0");
        let field = CoefficientField::from_entries(spec, [(i0.clone(), Complex64::new(1.0, 0.0))]).unwrap();
        let prob = EvolutionProblem::new(EvolutionKind::Schrodinger, taibleson(1.0), field, vec![0.0, 0.3]).unwrap();
        let traj = solve(&prob).unwrap();
        let expected = Complex64::new(0.0, -4.0 * 0.3).exp();
        assert!((traj.fields[1].get(&i0) - expected).norm() < 1e-14);
    }

    #[test]
    fn semilinear_closed_form_at_zero_and_sign() {
        for c in [-0.7, 0.3, 2.0] {
            assert_eq!(semilinear_mode(c, 1.5, 2, 0.5, 0.0), c);
            for t in [0.1, 1.0, 10.0] {
                let v = semilinear_mode(c, 1.5, 1, 0.5, t);
                assert_eq!(v.signum(), c.signum());
                assert!(v.abs() <= c.abs() * (-1.5 * t).exp() + 1e-15);
            }
        }
        // continuity at lambda = 0
        let a = semilinear_mode(0.8, 1e-12, 1, 2.0, 1.0);
        let b = semilinear_mode(0.8, 0.0, 1, 2.0, 1.0);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn disjointness_examples() {
        let spec = spec1(2, 1);
        let one = Complex64::new(1.0, 0.0);
        let single = CoefficientField::from_entries(spec.clone(), [(idx(2, "1/2", 0, "0"), one)]).unwrap();
        assert!(check_disjointness(&single).disjoint);
        let same_scale =
            CoefficientField::from_entries(spec.clone(), [(idx(2, "1/2", 0, "0"), one), (idx(2, "1/2", 0, "1/2"), one)])
                .unwrap();
        assert!(check_disjointness(&same_scale).disjoint);
        let nested =
            CoefficientField::from_entries(spec.clone(), [(idx(2, "1/2", 0, "0"), one), (idx(2, "1/2", 1, "0"), one)]).unwrap();
        let report = check_disjointness(&nested);
        assert!(!report.disjoint);
        assert!(report.witness.is_some());
        let prob =
            EvolutionProblem::new(EvolutionKind::Semilinear { degree: 1 }, taibleson(1.0), nested, vec![0.0, 1.0]).unwrap();
        assert!(matches!(solve(&prob), Err(Error::NotDisjoint { .. })));
    }

    #[test]
    fn linear_residual_is_small() {
        let field = omega_coefficients(&spec1(2, 1), 3).unwrap();
        let prob = EvolutionProblem::new(EvolutionKind::Linear, taibleson(1.0), field, uniform_grid(1.0, 100).unwrap()).unwrap();
        let traj = solve(&prob).unwrap();
        let r = residual(&traj, &prob, &[0.5]).unwrap();
        assert!(r.max < 1e-3);
        assert!(residual(&traj, &prob, &[0.0]).is_err());
    }

    #[test]
    fn omega_tail() {
        let spec = spec1(3, 2);
        let field = omega_coefficients(&spec, 6).unwrap();
        assert!((field.norm_sq() - (1.0 - omega_tail_bound(3, 2, 6))).abs() < 1e-14);
        assert_eq!(omega_tail_bound_exact(3, 2, 6), BigRational::new(1.into(), 243.into()));
    }
}
