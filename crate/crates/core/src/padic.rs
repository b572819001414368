//! Exact p-adic arithmetic on rational numbers.
//!
//! Every quantity handled by the wavelet machinery (ball centers, shifts,
//! frequencies) is a rational number whose denominator is a power of `p`, so
//! all of it is representable exactly with arbitrary-precision rationals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial-division primality test; primes used here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::NotPrime(p as u64))
    }
}

pub(crate) fn int_pow(p: u32, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// `p^e` as an exact rational, for any integer exponent.
pub fn p_power(p: u32, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(int_pow(p, e as u32))
    } else {
        BigRational::new(BigInt::one(), int_pow(p, (-e) as u32))
    }
}

/// `p^e` as a float.
pub(crate) fn p_power_f64(p: u32, e: i64) -> f64 {
    (p as f64).powi(e as i32)
}

/// Exponent of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u32) -> u32 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// The p-adic valuation; zero has infinite valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

pub fn valuation_of(x: &BigRational, p: u32) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let vn = int_valuation(x.numer(), p) as i64;
    let vd = int_valuation(x.denom(), p) as i64;
    Valuation::Finite(vn - vd)
}

/// `|x|_p` as an exact rational.
pub fn norm_of(x: &BigRational, p: u32) -> BigRational {
    match valuation_of(x, p) {
        Valuation::Infinite => BigRational::zero(),
        Valuation::Finite(v) => p_power(p, -v),
    }
}

fn modinv(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// `{x}_p`: the unique `r / p^k` in `[0, 1)` with `x - r/p^k` a p-adic integer.
pub fn fractional_part(x: &BigRational, p: u32) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let vd = int_valuation(x.denom(), p);
    if vd == 0 {
        return BigRational::zero();
    }
    // reduced form: p divides the denominator, so not the numerator
    let pk = int_pow(p, vd);
    let unit_den = x.denom() / &pk;
    let r = if unit_den.is_one() {
        x.numer().mod_floor(&pk)
    } else {
        (x.numer().mod_floor(&pk) * modinv(&unit_den.mod_floor(&pk), &pk)).mod_floor(&pk)
    };
    BigRational::new(r, pk)
}

/// Canonical representative of the class of `c` modulo `p^{-radius_exp} Z_p`:
/// the nonnegative rational below `p^{-radius_exp}` with p-power denominator.
pub fn canonical_center(c: &BigRational, radius_exp: i64, p: u32) -> BigRational {
    if c.is_zero() {
        return BigRational::zero();
    }
    let scaled = c * p_power(p, radius_exp);
    let fr = fractional_part(&scaled, p);
    if fr.is_zero() {
        fr
    } else {
        fr * p_power(p, -radius_exp)
    }
}

/// Number of p-adic fractional digits of a shift, `max(0, -v_p(a))`.
pub fn shift_depth(a: &BigRational, p: u32) -> u32 {
    match valuation_of(a, p) {
        Valuation::Finite(v) if v < 0 => (-v) as u32,
        _ => 0,
    }
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::ParseRational(s.to_string()))
}

/// Parses `"num/den"` or a plain integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// Formats as `"num/den"`, always with an explicit denominator.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// A rational number viewed as an element of `Q_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicRational {
    p: u32,
    value: BigRational,
}

impl PadicRational {
    pub fn new(p: u32, numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::from_rational(p, BigRational::new(numer.into(), denom))
    }

    pub fn from_rational(p: u32, value: BigRational) -> Result<Self> {
        check_prime(p)?;
        Ok(PadicRational { p, value })
    }

    pub fn integer(p: u32, n: i64) -> Result<Self> {
        Self::new(p, n, 1)
    }

    pub fn zero(p: u32) -> Result<Self> {
        Self::integer(p, 0)
    }

    pub fn parse(p: u32, s: &str) -> Result<Self> {
        Self::from_rational(p, parse_rational(s)?)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        valuation_of(&self.value, self.p)
    }

    pub fn norm(&self) -> BigRational {
        norm_of(&self.value, self.p)
    }

    pub fn frac_part(&self) -> BigRational {
        fractional_part(&self.value, self.p)
    }

    /// The additive character `chi_p(x) = exp(2 pi i {x}_p)`.
    pub fn character(&self) -> UnitPhase {
        UnitPhase::new(self.frac_part())
    }

    /// The first `count` digits `x_0, x_1, ...` of the canonical expansion
    /// `x = p^gamma (x_0 + x_1 p + ...)`. Empty for zero.
    pub fn digits(&self, count: usize) -> Vec<u32> {
        let Valuation::Finite(v) = self.valuation() else {
            return Vec::new();
        };
        let pb = BigInt::from(self.p);
        let mut unit = &self.value * p_power(self.p, -v);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let den = unit.denom().mod_floor(&pb);
            let d = (unit.numer().mod_floor(&pb) * modinv(&den, &pb)).mod_floor(&pb);
            out.push(d.to_u32().expect("digit below p"));
            unit = (unit - BigRational::from_integer(d)) / BigRational::from_integer(pb.clone());
        }
        out
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.p, other.p))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PadicRational { p: self.p, value: &self.value + &other.value })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PadicRational { p: self.p, value: &self.value - &other.value })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        Ok(PadicRational { p: self.p, value: &self.value * &other.value })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PadicRational { p: self.p, value: &self.value / &other.value })
    }

    pub fn neg(&self) -> Self {
        PadicRational { p: self.p, value: -&self.value }
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.value))
    }
}

/// `exp(2 pi i q)` with `q` an exact rational in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPhase(BigRational);

impl UnitPhase {
    pub fn new(q: BigRational) -> Self {
        let fl = q.floor();
        UnitPhase(q - fl)
    }

    pub fn one() -> Self {
        UnitPhase(BigRational::zero())
    }

    pub fn turns(&self) -> &BigRational {
        &self.0
    }

    pub fn mul(&self, other: &UnitPhase) -> UnitPhase {
        UnitPhase::new(&self.0 + &other.0)
    }

    pub fn conj(&self) -> UnitPhase {
        UnitPhase::new(-&self.0)
    }

    pub fn pow(&self, k: i64) -> UnitPhase {
        UnitPhase::new(&self.0 * BigRational::from_integer(BigInt::from(k)))
    }

    pub fn to_complex(&self) -> Complex64 {
        let q = &self.0;
        if q.is_zero() {
            return Complex64::new(1.0, 0.0);
        }
        if q.denom() == &BigInt::from(2) {
            return Complex64::new(-1.0, 0.0);
        }
        if q.denom() == &BigInt::from(4) {
            let im = if q.numer() == &BigInt::one() { 1.0 } else { -1.0 };
            return Complex64::new(0.0, im);
        }
        let t = q.to_f64().expect("finite phase");
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// A point of `Q_p^n` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PadicVector {
    p: u32,
    coords: Vec<BigRational>,
}

impl PadicVector {
    pub fn new(coords: Vec<PadicRational>) -> Result<Self> {
        let first = coords.first().ok_or(Error::DimensionMismatch(0, 1))?;
        let p = first.p;
        for c in &coords {
            if c.p != p {
                return Err(Error::PrimeMismatch(p, c.p));
            }
        }
        Ok(PadicVector { p, coords: coords.into_iter().map(|c| c.value).collect() })
    }

    pub fn from_rationals(p: u32, coords: Vec<BigRational>) -> Result<Self> {
        check_prime(p)?;
        if coords.is_empty() {
            return Err(Error::DimensionMismatch(0, 1));
        }
        Ok(PadicVector { p, coords })
    }

    pub(crate) fn from_raw(p: u32, coords: Vec<BigRational>) -> Self {
        PadicVector { p, coords }
    }

    pub fn zero(p: u32, n: usize) -> Result<Self> {
        Self::from_rationals(p, vec![BigRational::zero(); n])
    }

    pub fn parse(p: u32, coords: &[&str]) -> Result<Self> {
        let coords = coords.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Self::from_rationals(p, coords)
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> PadicRational {
        PadicRational { p: self.p, value: self.coords[i].clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Minimum of the coordinate valuations.
    pub fn valuation(&self) -> Valuation {
        self.coords.iter().map(|c| valuation_of(c, self.p)).min().unwrap_or(Valuation::Infinite)
    }

    /// Maximum of the coordinate norms.
    pub fn norm(&self) -> BigRational {
        match self.valuation() {
            Valuation::Infinite => BigRational::zero(),
            Valuation::Finite(v) => p_power(self.p, -v),
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(PadicVector { p: self.p, coords })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        Ok(PadicVector { p: self.p, coords })
    }

    pub fn neg(&self) -> Self {
        PadicVector { p: self.p, coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn dot(&self, other: &Self) -> Result<BigRational> {
        self.compatible(other)?;
        Ok(self.coords.iter().zip(&other.coords).fold(BigRational::zero(), |acc, (a, b)| acc + a * b))
    }

    /// The multi-dilation `(p^{j_1} x_1, ..., p^{j_n} x_n)`.
    pub fn dilate(&self, j: &[i64]) -> Result<Self> {
        if j.len() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), j.len()));
        }
        let coords = self.coords.iter().zip(j).map(|(c, &e)| c * p_power(self.p, e)).collect();
        Ok(PadicVector { p: self.p, coords })
    }

    /// `chi_p(x . xi)`, the product of coordinate characters.
    pub fn character_pairing(&self, other: &Self) -> Result<UnitPhase> {
        self.compatible(other)?;
        let q = self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(BigRational::zero(), |acc, (a, b)| acc + fractional_part(&(a * b), self.p));
        Ok(UnitPhase::new(q))
    }
}

impl fmt::Display for PadicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(c))?;
        }
        f.write_str(")")
    }
}

/// The closed ball `{x : |x - center|_p <= p^radius_exp}` with a canonical center.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    p: u32,
    center: Vec<BigRational>,
    radius_exp: i64,
}

impl Ball {
    pub fn new(center: &PadicVector, radius_exp: i64) -> Self {
        Self::around(center.p, &center.coords, radius_exp)
    }

    /// The unit ball `Z_p^n`.
    pub fn unit(p: u32, n: usize) -> Result<Self> {
        Ok(Self::new(&PadicVector::zero(p, n)?, 0))
    }

    pub(crate) fn around(p: u32, coords: &[BigRational], radius_exp: i64) -> Self {
        let center = coords.iter().map(|c| canonical_center(c, radius_exp, p)).collect();
        Ball { p, center, radius_exp }
    }

    /// Caller guarantees `center` is already canonical at `radius_exp`.
    pub(crate) fn from_canonical(p: u32, center: Vec<BigRational>, radius_exp: i64) -> Self {
        debug_assert!(center.iter().all(|c| &canonical_center(c, radius_exp, p) == c));
        Ball { p, center, radius_exp }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn radius_exp(&self) -> i64 {
        self.radius_exp
    }

    pub fn center(&self) -> PadicVector {
        PadicVector { p: self.p, coords: self.center.clone() }
    }

    pub fn center_coords(&self) -> &[BigRational] {
        &self.center
    }

    /// Haar measure `p^{n * radius_exp}`.
    pub fn measure(&self) -> BigRational {
        p_power(self.p, self.dim() as i64 * self.radius_exp)
    }

    pub(crate) fn measure_f64(&self) -> f64 {
        p_power_f64(self.p, self.dim() as i64 * self.radius_exp)
    }

    pub(crate) fn contains_coords(&self, x: &[BigRational]) -> bool {
        self.center.iter().zip(x).all(|(c, xi)| match valuation_of(&(xi - c), self.p) {
            Valuation::Infinite => true,
            Valuation::Finite(v) => v >= -self.radius_exp,
        })
    }

    pub fn contains(&self, x: &PadicVector) -> bool {
        x.p == self.p && x.dim() == self.dim() && self.contains_coords(&x.coords)
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.radius_exp <= self.radius_exp && self.contains_coords(&other.center)
    }

    /// Balls either nest or are disjoint.
    pub fn intersects(&self, other: &Ball) -> bool {
        self.contains_ball(other) || other.contains_ball(self)
    }

    pub fn parent(&self) -> Ball {
        Ball::around(self.p, &self.center, self.radius_exp + 1)
    }

    /// The ball of radius `p^radius_exp` containing this one.
    pub fn ancestor(&self, radius_exp: i64) -> Ball {
        debug_assert!(radius_exp >= self.radius_exp);
        Ball::around(self.p, &self.center, radius_exp)
    }

    /// The `p^n` maximal proper sub-balls.
    pub fn children(&self) -> Vec<Ball> {
        self.split_unchecked(self.radius_exp - 1)
    }

    /// Splits into `p^{n (radius_exp - target)}` disjoint balls of radius
    /// `p^target`, ordered lexicographically by center.
    pub fn decompose(&self, target: i64) -> Result<Vec<Ball>> {
        if target >= self.radius_exp {
            return Err(Error::NotARefinement { radius: self.radius_exp, target });
        }
        Ok(self.split_unchecked(target))
    }

    pub(crate) fn split_unchecked(&self, target: i64) -> Vec<Ball> {
        let per_coord: Vec<Vec<BigRational>> = self
            .center
            .iter()
            .map(|c| sub_centers_1d(c, self.radius_exp, target, self.p))
            .collect();
        cartesian(&per_coord)
            .into_iter()
            .map(|center| Ball::from_canonical(self.p, center, target))
            .collect()
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Radius descending, then center lexicographic.
impl Ord for Ball {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .radius_exp
            .cmp(&self.radius_exp)
            .then_with(|| self.center.cmp(&other.center))
            .then_with(|| self.p.cmp(&other.p))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{}{}", self.radius_exp, self.center())
    }
}

/// Canonical centers of the sub-balls of radius `target` inside the 1-D ball
/// `(center, radius)`, in increasing order. `center` must be canonical.
pub(crate) fn sub_centers_1d(center: &BigRational, radius: i64, target: i64, p: u32) -> Vec<BigRational> {
    debug_assert!(target <= radius);
    let count = int_pow(p, (radius - target) as u32).to_usize().expect("sub-ball count fits in memory");
    let step = p_power(p, -radius);
    (0..count)
        .map(|t| center + &step * BigRational::from_integer(BigInt::from(t)))
        .collect()
}

/// Balls of the common minimum radius tiling the polydisc
/// `prod_k {|x_k - centers_k| <= p^{radii_k}}`.
pub(crate) fn polydisc_balls(p: u32, centers: &[BigRational], radii: &[i64]) -> Vec<Ball> {
    let r = *radii.iter().min().expect("nonempty polydisc");
    let per: Vec<Vec<BigRational>> = centers
        .iter()
        .zip(radii)
        .map(|(c, &rk)| sub_centers_1d(&canonical_center(c, rk, p), rk, r, p))
        .collect();
    cartesian(&per).into_iter().map(|c| Ball::from_canonical(p, c, r)).collect()
}

pub(crate) fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for item in list {
                let mut v = prefix.clone();
                v.push(item.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `I_p` truncated at depth: `r / p^depth` for `0 <= r < p^depth`, ascending.
pub fn shifts_1d(p: u32, depth: u32) -> Vec<BigRational> {
    let den = int_pow(p, depth);
    let count = den.to_usize().expect("shift count fits in memory");
    (0..count).map(|r| BigRational::new(BigInt::from(r), den.clone())).collect()
}

/// `J_{p;m}`: `r / p^m` with `p` not dividing `r`, ascending.
pub fn frequencies_1d(p: u32, m: u32) -> Vec<BigRational> {
    let den = int_pow(p, m);
    let count = den.to_usize().expect("frequency count fits in memory");
    (1..count)
        .filter(|r| r % p as usize != 0)
        .map(|r| BigRational::new(BigInt::from(r), den.clone()))
        .collect()
}

/// All shifts in `I_p^n` with at most `depth` fractional digits per coordinate.
pub fn enumerate_shifts(p: u32, n: usize, depth: u32) -> Result<Vec<PadicVector>> {
    check_prime(p)?;
    let per = vec![shifts_1d(p, depth); n];
    Ok(cartesian(&per).into_iter().map(|c| PadicVector::from_raw(p, c)).collect())
}

/// All frequencies in `J_{p;m_1} x ... x J_{p;m_n}`.
pub fn enumerate_frequencies(p: u32, m: &[u32]) -> Result<Vec<PadicVector>> {
    check_prime(p)?;
    if m.iter().any(|&mk| mk == 0) {
        return Err(Error::InvalidFamily("every m_k must be at least 1".into()));
    }
    let per: Vec<_> = m.iter().map(|&mk| frequencies_1d(p, mk)).collect();
    Ok(cartesian(&per).into_iter().map(|c| PadicVector::from_raw(p, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(PadicRational::integer(3, 0).unwrap().valuation(), Valuation::Infinite);
        assert!(PadicRational::integer(3, 0).unwrap().norm().is_zero());
        let x = PadicRational::new(3, 1, 3).unwrap();
        assert_eq!(x.valuation(), Valuation::Finite(-1));
        assert_eq!(x.norm(), q(3, 1));
        let y = PadicRational::new(2, 12, 5).unwrap();
        assert_eq!(y.valuation(), Valuation::Finite(2));
        assert_eq!(y.norm(), q(1, 4));
    }

    #[test]
    fn infinite_valuation_sorts_above_finite() {
        assert!(Valuation::Finite(i64::MAX) < Valuation::Infinite);
    }

    #[test]
    fn vector_norm_examples() {
        let v = PadicVector::parse(3, &["1/9", "3"]).unwrap();
        assert_eq!(v.norm(), q(9, 1));
        assert!(PadicVector::zero(2, 2).unwrap().norm().is_zero());
        let w = PadicVector::parse(5, &["2", "1/5", "25"]).unwrap();
        assert_eq!(w.norm(), q(5, 1));
    }

    #[test]
    fn frac_part_examples() {
        assert!(PadicRational::integer(5, 7).unwrap().frac_part().is_zero());
        assert_eq!(PadicRational::new(2, 3, 2).unwrap().frac_part(), q(1, 2));
        assert_eq!(PadicRational::new(2, 1, 6).unwrap().frac_part(), q(1, 2));
        assert_eq!(PadicRational::new(3, -1, 3).unwrap().frac_part(), q(2, 3));
    }

    #[test]
    fn character_examples() {
        assert_eq!(PadicRational::integer(7, 3).unwrap().character(), UnitPhase::one());
        let half = PadicRational::new(2, 1, 2).unwrap().character();
        assert_eq!(half.turns(), &q(1, 2));
        assert_eq!(half.to_complex(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn mixing_primes_is_an_error() {
        let a = PadicRational::integer(2, 1).unwrap();
        let b = PadicRational::integer(3, 1).unwrap();
        assert_eq!(a.try_add(&b), Err(Error::PrimeMismatch(2, 3)));
        assert!(PadicVector::new(vec![a, b]).is_err());
        assert_eq!(PadicRational::integer(4, 1), Err(Error::NotPrime(4)));
    }

    #[test]
    fn digits_follow_canonical_form() {
        // -1 = (p-1) + (p-1)p + ... in Z_p
        let x = PadicRational::integer(3, -1).unwrap();
        assert_eq!(x.digits(4), vec![2, 2, 2, 2]);
        // -1/3 = 1/(1 - 4) = 1 + 4 + 16 + ... in Z_2
        let y = PadicRational::new(2, -1, 3).unwrap();
        assert_eq!(y.digits(6), vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn canonical_centers() {
        assert_eq!(canonical_center(&q(1, 1), 0, 3), q(0, 1));
        assert_eq!(canonical_center(&q(4, 1), -1, 3), q(1, 1));
        assert_eq!(canonical_center(&q(7, 3), 0, 3), q(1, 3));
        assert_eq!(canonical_center(&q(-1, 2), 0, 2), q(1, 2));
        // radius p^1: centers live in [0, 1/p)
        assert_eq!(canonical_center(&q(5, 4), 1, 2), q(1, 4));
    }

    #[test]
    fn decompose_unit_ball() {
        let b = Ball::unit(3, 1).unwrap();
        let parts = b.decompose(-1).unwrap();
        let centers: Vec<_> = parts.iter().map(|b| b.center_coords()[0].clone()).collect();
        assert_eq!(centers, vec![q(0, 1), q(1, 1), q(2, 1)]);
        assert!(b.decompose(0).is_err());
        assert!(matches!(b.decompose(1), Err(Error::NotARefinement { .. })));

        let b2 = Ball::unit(2, 2).unwrap();
        let parts: Vec<Vec<BigRational>> =
            b2.decompose(-1).unwrap().iter().map(|b| b.center_coords().to_vec()).collect();
        assert_eq!(
            parts,
            vec![vec![q(0, 1), q(0, 1)], vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]]
        );
    }

    #[test]
    fn decompose_two_levels_covers_parent() {
        let b = Ball::new(&PadicVector::parse(2, &["1/4"]).unwrap(), 1);
        let parts = b.decompose(-1).unwrap();
        assert_eq!(parts.len(), 4);
        let total = parts.iter().fold(BigRational::zero(), |acc, c| acc + c.measure());
        assert_eq!(total, b.measure());
        for (i, x) in parts.iter().enumerate() {
            assert!(b.contains_ball(x));
            for y in &parts[i + 1..] {
                assert!(!x.intersects(y));
            }
        }
    }

    #[test]
    fn shift_and_frequency_sets() {
        assert_eq!(frequencies_1d(2, 1), vec![q(1, 2)]);
        assert_eq!(frequencies_1d(3, 1), vec![q(1, 3), q(2, 3)]);
        assert_eq!(frequencies_1d(2, 3), vec![q(1, 8), q(3, 8), q(5, 8), q(7, 8)]);
        assert_eq!(shifts_1d(3, 0), vec![q(0, 1)]);
        assert_eq!(enumerate_shifts(2, 2, 2).unwrap().len(), 16);
        assert_eq!(enumerate_frequencies(3, &[2, 1]).unwrap().len(), 6 * 2);
        for (p, m) in [(2u32, 4u32), (3, 2), (5, 2)] {
            assert_eq!(frequencies_1d(p, m).len() as u32, (p - 1) * p.pow(m - 1));
        }
        for (p, depth) in [(2u32, 3u32), (3, 2), (5, 1)] {
            let expected = 1 + (1..=depth).map(|g| (p - 1) * p.pow(g - 1)).sum::<u32>();
            assert_eq!(shifts_1d(p, depth).len() as u32, expected);
        }
    }

    #[test]
    fn unit_phase_arithmetic() {
        let a = UnitPhase::new(q(3, 4));
        let b = UnitPhase::new(q(1, 2));
        assert_eq!(a.mul(&b).turns(), &q(1, 4));
        assert_eq!(a.conj().turns(), &q(1, 4));
        assert_eq!(UnitPhase::new(q(-1, 3)).turns(), &q(2, 3));
        assert_eq!(a.pow(3).turns(), &q(1, 4));
    }
}
