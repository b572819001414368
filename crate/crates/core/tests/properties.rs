use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use padic_wavelets::cauchy::{semilinear_mode, solve, EvolutionKind, EvolutionProblem};
use padic_wavelets::padic::{fractional_part, norm_of, p_power, valuation_of};
use padic_wavelets::pseudodiff::{apply, eigen_apply, SymbolSpec};
use padic_wavelets::wavelets::{synthesize, theta, wavelet, CoefficientField, FamilySpec, WaveletIndex};
use padic_wavelets::{Ball, PadicRational, PadicVector, SchwartzFunction, UnitPhase};

const TOL: f64 = 1e-9;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn prime() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

/// Numerator and denominator of a small nonzero rational.
fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-500i64..500, 1i64..400).prop_filter("nonzero", |(n, _)| *n != 0)
}

/// Oracle for `{x}_p`: the unique `r / p^k` in `[0, 1)` with `x - r / p^k` a
/// p-adic integer, found by search.
fn frac_oracle(x: &BigRational, p: u32) -> BigRational {
    let pb = BigInt::from(p);
    let mut k = 0u32;
    let mut den = x.denom().clone();
    while (&den % &pb).is_zero() {
        den /= &pb;
        k += 1;
    }
    let scale = pb.pow(k);
    let mut r = BigInt::zero();
    while r < scale {
        let diff = x - BigRational::new(r.clone(), scale.clone());
        if diff.is_zero() || !(diff.denom() % &pb).is_zero() {
            return BigRational::new(r, scale);
        }
        r += 1;
    }
    unreachable!("some residue works")
}

/// Small random functions on `Q_p^n`.
fn schwartz(p: u32, n: usize) -> impl Strategy<Value = SchwartzFunction> {
    let term = (
        prop::collection::vec((-20i64..20, 0u32..3), n),
        -2i64..2,
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 1..5).prop_map(move |terms| {
        let terms = terms
            .into_iter()
            .map(|(coords, r, re, im)| {
                let center = coords.into_iter().map(|(a, k)| BigRational::new(a.into(), BigInt::from(p).pow(k))).collect();
                (Ball::new(&PadicVector::from_rationals(p, center).unwrap(), r), Complex64::new(re, im))
            })
            .collect();
        SchwartzFunction::from_terms(p, n, terms).unwrap()
    })
}

fn small_prime_fn() -> impl Strategy<Value = SchwartzFunction> {
    (prop::sample::select(vec![2u32, 3]), 1usize..=2).prop_flat_map(|(p, n)| schwartz(p, n))
}

/// Points on a grid fine enough to see every term of functions from [`schwartz`].
fn sample_points(p: u32, n: usize) -> Vec<PadicVector> {
    let pf = p as i64;
    let one_dim: Vec<BigRational> = (-(pf * pf * pf)..=pf * pf * pf).map(|a| rat(a, pf * pf * pf)).collect();
    let mut out = Vec::new();
    if n == 1 {
        for x in &one_dim {
            out.push(PadicVector::from_rationals(p, vec![x.clone()]).unwrap());
        }
    } else {
        for x in one_dim.iter().step_by(3) {
            for y in one_dim.iter().step_by(5) {
                out.push(PadicVector::from_rationals(p, vec![x.clone(), y.clone()]).unwrap());
            }
        }
    }
    out
}

fn theta_index(p: u32, m: u32) -> impl Strategy<Value = (FamilySpec, WaveletIndex)> {
    let spec = FamilySpec::theta(p, vec![m]).unwrap();
    let freqs = spec.frequencies();
    (0..freqs.len(), -2i64..=2, 0i64..(p as i64).pow(2)).prop_map(move |(s, j, a)| {
        let a = PadicVector::from_rationals(p, vec![rat(a, (p as i64).pow(2))]).unwrap();
        (spec.clone(), WaveletIndex::new(freqs[s].clone(), vec![j], a))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ultrametric_inequality(p in prime(), (a, b) in rational(), (c, d) in rational()) {
        let x = rat(a, b);
        let y = rat(c, d);
        let sum = &x + &y;
        let bound = norm_of(&x, p).max(norm_of(&y, p));
        prop_assert!(sum.is_zero() || norm_of(&sum, p) <= bound);
        if norm_of(&x, p) != norm_of(&y, p) {
            prop_assert_eq!(norm_of(&sum, p), bound);
        }
    }

    #[test]
    fn norm_is_multiplicative(p in prime(), (a, b) in rational(), (c, d) in rational()) {
        let (x, y) = (rat(a, b), rat(c, d));
        prop_assert_eq!(norm_of(&(&x * &y), p), norm_of(&x, p) * norm_of(&y, p));
    }

    #[test]
    fn fractional_part_matches_search(p in prime(), (a, b) in rational(), k in 0u32..4) {
        let x = rat(a, b * (p as i64).pow(k));
        prop_assert_eq!(fractional_part(&x, p), frac_oracle(&x, p));
    }

    #[test]
    fn fractional_part_is_additive_mod_one(p in prime(), (a, b) in rational(), (c, d) in rational()) {
        let (x, y) = (rat(a, b), rat(c, d));
        let lhs = UnitPhase::new(fractional_part(&(&x + &y), p));
        let rhs = UnitPhase::new(fractional_part(&x, p) + fractional_part(&y, p));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn digits_reconstruct_value(p in prime(), (a, b) in rational()) {
        let x = PadicRational::new(p, a, b).unwrap();
        let v = valuation_of(x.value(), p).finite().unwrap();
        // p^v (x_0 + x_1 p + ... + x_7 p^7) agrees with x modulo p^{v+8}
        let mut partial = BigRational::zero();
        for (i, d) in x.digits(8).iter().enumerate() {
            partial += p_power(p, v + i as i64) * BigRational::from_integer(BigInt::from(*d));
        }
        let rest = x.value() - partial;
        prop_assert!(rest.is_zero() || valuation_of(&rest, p).finite().unwrap() >= v + 8);
    }

    #[test]
    fn decomposition_preserves_measure(p in prime(), (a, b) in rational(), r in -2i64..2, depth in 1i64..3) {
        let ball = Ball::new(&PadicVector::from_rationals(p, vec![rat(a, b)]).unwrap(), r);
        let parts = ball.decompose(r - depth).unwrap();
        prop_assert_eq!(parts.len(), (p as usize).pow(depth as u32));
        let total: BigRational = parts.iter().map(Ball::measure).sum();
        prop_assert_eq!(total, ball.measure());
        prop_assert!(parts.iter().all(|c| ball.contains_ball(c)));
    }

    #[test]
    fn normal_form_is_idempotent(f in small_prime_fn()) {
        let again = SchwartzFunction::from_terms(f.prime(), f.dim(), f.terms().to_vec()).unwrap();
        prop_assert_eq!(&again, &f);
    }

    #[test]
    fn equal_functions_share_normal_form(f in small_prime_fn(), seed in 0u64..1000) {
        // refine every term and rebuild: same function, same normal form
        let refined: Vec<(Ball, Complex64)> = f
            .terms()
            .iter()
            .flat_map(|(b, c)| {
                let depth = (seed % 2) as i64 + 1;
                b.decompose(b.radius_exp() - depth).unwrap().into_iter().map(move |x| (x, *c))
            })
            .collect();
        let g = SchwartzFunction::from_terms(f.prime(), f.dim(), refined).unwrap();
        prop_assert!(g.approx_eq(&f, 1e-12));
    }

    #[test]
    fn evaluation_is_linear(f in schwartz(3, 1), g in schwartz(3, 1)) {
        let sum = f.add(&g).unwrap();
        for x in sample_points(3, 1) {
            let lhs = sum.evaluate(&x).unwrap();
            let rhs = f.evaluate(&x).unwrap() + g.evaluate(&x).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn product_is_pointwise(f in schwartz(2, 2), g in schwartz(2, 2)) {
        let prod = f.mul(&g).unwrap();
        for x in sample_points(2, 2) {
            let lhs = prod.evaluate(&x).unwrap();
            let rhs = f.evaluate(&x).unwrap() * g.evaluate(&x).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn parseval(f in schwartz(2, 1), g in schwartz(2, 1)) {
        let lhs = f.inner_product(&g).unwrap();
        let rhs = f.fourier().unwrap().inner_product(&g.fourier().unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= TOL, "{lhs} vs {rhs}");
    }

    #[test]
    fn parseval_two_dims(f in schwartz(3, 2)) {
        let lhs = f.norm_sq();
        let rhs = f.fourier().unwrap().norm_sq();
        prop_assert!((lhs - rhs).abs() <= TOL * lhs.max(1.0));
    }

    #[test]
    fn double_transform_reflects(f in small_prime_fn()) {
        let twice = f.fourier().unwrap().fourier().unwrap();
        let minus = PadicVector::zero(f.prime(), f.dim()).unwrap();
        for x in sample_points(f.prime(), f.dim()) {
            let neg = minus.try_sub(&x).unwrap();
            let lhs = twice.evaluate(&x).unwrap();
            let rhs = f.evaluate(&neg).unwrap();
            prop_assert!((lhs - rhs).norm() <= TOL);
        }
    }

    #[test]
    fn inverse_undoes_transform(f in small_prime_fn()) {
        let back = f.fourier().unwrap().fourier_inverse().unwrap();
        prop_assert!(back.distance(&f).unwrap() <= TOL);
    }

    #[test]
    fn translation_shifts_values(f in schwartz(3, 1), (a, k) in (-30i64..30, 0u32..3)) {
        let t = PadicVector::from_rationals(3, vec![rat(a, 3i64.pow(k))]).unwrap();
        let g = f.translate(&t).unwrap();
        prop_assert!((g.integrate() - f.integrate()).norm() <= 1e-12);
        for x in sample_points(3, 1).into_iter().step_by(7) {
            let back = x.try_sub(&t).unwrap();
            prop_assert!((g.evaluate(&x).unwrap() - f.evaluate(&back).unwrap()).norm() <= 1e-12);
        }
    }

    #[test]
    fn dilation_scales_integral(f in small_prime_fn(), j in prop::collection::vec(-2i64..=2, 2)) {
        // integral of f(p^j x) is p^{|j|} integral of f, |j| = sum_k j_k
        let j = &j[..f.dim()];
        let g = f.dilate(j).unwrap();
        let factor = (f.prime() as f64).powi(j.iter().sum::<i64>() as i32);
        prop_assert!((g.integrate() - f.integrate() * factor).norm() <= 1e-9 * factor.max(1.0));
    }

    #[test]
    fn refinement_identity(p in prop::sample::select(vec![2u32, 3, 5, 7])) {
        let omega = SchwartzFunction::indicator(&Ball::unit(p, 1).unwrap());
        let mut sum = SchwartzFunction::zero(p, 1).unwrap();
        for r in 0..p as i64 {
            let shift = PadicVector::from_rationals(p, vec![rat(r, p as i64)]).unwrap();
            sum = sum.add(&omega.translate(&shift).unwrap().dilate(&[-1]).unwrap()).unwrap();
        }
        prop_assert_eq!(sum, omega);
    }

    #[test]
    fn wavelets_are_orthonormal((spec, x) in theta_index(3, 1), (_, y) in theta_index(3, 1)) {
        let (f, g) = (theta(&spec, &x).unwrap(), theta(&spec, &y).unwrap());
        let ip = f.inner_product(&g).unwrap();
        let want = if x == y { 1.0 } else { 0.0 };
        prop_assert!((ip - want).norm() <= 1e-12);
        prop_assert!(f.is_lizorkin(1e-12));
    }

    #[test]
    fn wavelets_in_two_dims_are_orthonormal(s in 0usize..2, j in prop::collection::vec(-1i64..=1, 4), a in prop::collection::vec(0i64..4, 4)) {
        let spec = FamilySpec::theta(2, vec![2, 1]).unwrap();
        let freqs = spec.frequencies();
        let mk = |s: usize, j: &[i64], a: &[i64]| {
            let a = PadicVector::from_rationals(2, vec![rat(a[0], 4), rat(a[1], 4)]).unwrap();
            WaveletIndex::new(freqs[s % freqs.len()].clone(), j.to_vec(), a)
        };
        let x = mk(s, &j[..2], &a[..2]);
        let y = mk(s + 1, &j[2..], &a[2..]);
        let ip = wavelet(&spec, &x).unwrap().inner_product(&wavelet(&spec, &y).unwrap()).unwrap();
        let want = if x == y { 1.0 } else { 0.0 };
        prop_assert!((ip - want).norm() <= 1e-12);
    }

    #[test]
    fn taibleson_keeps_lizorkin_and_composes(
        (spec, x) in theta_index(2, 2),
        (_, y) in theta_index(2, 2),
        a in 0.1f64..2.0,
        b in 0.1f64..2.0,
    ) {
        let f = synthesize(&CoefficientField::from_entries(
            spec,
            [(x, Complex64::new(1.0, 0.5)), (y, Complex64::new(-0.3, 0.0))],
        ).unwrap()).unwrap();
        prop_assume!(!f.is_empty());
        let da = SymbolSpec::taibleson(Complex64::new(a, 0.0));
        let db = SymbolSpec::taibleson(Complex64::new(b, 0.0));
        let dab = SymbolSpec::taibleson(Complex64::new(a + b, 0.0));
        let g = apply(&da, &f).unwrap();
        prop_assert!(g.is_lizorkin(1e-9));
        let lhs = apply(&db, &g).unwrap();
        let rhs = apply(&dab, &f).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-9 * rhs.sup_norm().max(1.0));
    }

    #[test]
    fn semilinear_keeps_sign_and_bound(
        c in -3.0f64..3.0,
        lambda in 0.0f64..3.0,
        degree in 1u32..=3,
        q in 0.01f64..1.0,
        t in 0.0f64..5.0,
    ) {
        let v = semilinear_mode(c, lambda, degree, q, t);
        prop_assert!(v == 0.0 || v.signum() == c.signum());
        prop_assert!(v.abs() <= c.abs() * (-lambda * t).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn semilinear_decreases_in_time(c in 0.1f64..3.0, lambda in 0.0f64..3.0, degree in 1u32..=2, t in 0.0f64..5.0, dt in 0.01f64..1.0) {
        let q = 0.5;
        prop_assert!(semilinear_mode(c, lambda, degree, q, t + dt) <= semilinear_mode(c, lambda, degree, q, t));
    }

    #[test]
    fn linear_evolution_superposes(
        (spec, x) in theta_index(3, 1),
        (_, y) in theta_index(3, 1),
        alpha in 0.1f64..2.0,
    ) {
        prop_assume!(x != y);
        let symbol = SymbolSpec::taibleson(Complex64::new(alpha, 0.0));
        let times = vec![0.0, 0.3, 1.0];
        let one = |idx: &WaveletIndex, c: Complex64| {
            let field = CoefficientField::from_entries(spec.clone(), [(idx.clone(), c)]).unwrap();
            solve(&EvolutionProblem::new(EvolutionKind::Linear, symbol.clone(), field, times.clone()).unwrap()).unwrap()
        };
        let both = CoefficientField::from_entries(
            spec.clone(),
            [(x.clone(), Complex64::new(1.0, 0.0)), (y.clone(), Complex64::new(0.0, 2.0))],
        ).unwrap();
        let joint = solve(&EvolutionProblem::new(EvolutionKind::Linear, symbol.clone(), both, times.clone()).unwrap()).unwrap();
        let (tx, ty) = (one(&x, Complex64::new(1.0, 0.0)), one(&y, Complex64::new(0.0, 2.0)));
        for i in 0..times.len() {
            prop_assert_eq!(joint.fields[i].get(&x), tx.fields[i].get(&x));
            prop_assert_eq!(joint.fields[i].get(&y), ty.fields[i].get(&y));
            // magnitudes never grow for a positive real symbol
            if i > 0 {
                prop_assert!(joint.fields[i].get(&x).norm() <= joint.fields[i - 1].get(&x).norm());
            }
            let u = joint.synthesize_at(i).unwrap();
            prop_assert!(u.is_lizorkin(1e-12));
        }
    }

    #[test]
    fn eigen_apply_matches_eigenvalue((spec, x) in theta_index(5, 1), alpha in 0.1f64..2.0) {
        let field = CoefficientField::from_entries(spec.clone(), [(x.clone(), Complex64::new(1.0, 0.0))]).unwrap();
        let applied = eigen_apply(&SymbolSpec::taibleson(Complex64::new(alpha, 0.0)), &field).unwrap();
        let want = 5f64.powf(alpha * (1 - x.j[0]) as f64);
        prop_assert!((applied.get(&x).re - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn valuation_of_power(p in prime(), e in -10i64..10) {
        prop_assert_eq!(valuation_of(&p_power(p, e), p).finite(), Some(e));
        prop_assert!(p_power(p, e).is_positive());
    }
}
