//! Exact/floating scalar helpers: decimal parsing into rationals, best rational
//! approximation and the scalar abstraction used by the simplex solver.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A parsed coefficient: the exact rational value when the text allowed one,
/// always accompanied by its floating value.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub exact: Option<(BigRational, BigRational)>,
    pub value: Complex64,
}

impl Coefficient {
    pub fn exact(re: BigRational, im: BigRational) -> Self {
        let value = Complex64::new(to_f64(&re), to_f64(&im));
        Self { exact: Some((re, im)), value }
    }

    pub fn real(re: BigRational) -> Self {
        Self::exact(re, BigRational::zero())
    }

    pub fn float(value: Complex64) -> Self {
        Self { exact: None, value }
    }

    pub fn one() -> Self {
        Self::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some((re, im)) => re.is_zero() && im.is_zero(),
            None => self.value.norm() == 0.0,
        }
    }

    /// Exact real value, if the coefficient is exact with zero imaginary part.
    pub fn exact_real(&self) -> Option<&BigRational> {
        match &self.exact {
            Some((re, im)) if im.is_zero() => Some(re),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some((a, b)), Some((c, e))) => Self::exact(a + c, b + e),
            _ => Self::float(self.value + other.value),
        }
    }

    /// `self / other`; exact whenever both sides are exact.
    pub fn div(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some((a, b)), Some((c, e))) => {
                let den = c * c + e * e;
                let re = (a * c + b * e) / &den;
                let im = (b * c - a * e) / &den;
                Self::exact(re, im)
            }
            _ => Self::float(self.value / other.value),
        }
    }

    pub fn conj(&self) -> Self {
        match &self.exact {
            Some((re, im)) => Self::exact(re.clone(), -im.clone()),
            None => Self::float(self.value.conj()),
        }
    }

    /// Renders as `<re> <im>`; exact values use decimal notation when the
    /// denominator allows it and `p/q` otherwise.
    pub fn render(&self) -> String {
        match &self.exact {
            Some((re, im)) => format!("{} {}", render_rational(re), render_rational(im)),
            None => format!("{:?} {:?}", self.value.re, self.value.im),
        }
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `12`, `-0.25`, `1.5e-3` or `3/7` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Parses a coefficient pair, exactly when possible.
pub fn parse_coefficient(re: &str, im: &str) -> Option<Coefficient> {
    match (parse_rational(re), parse_rational(im)) {
        (Some(r), Some(i)) => Some(Coefficient::exact(r, i)),
        _ => {
            let r: f64 = re.trim().parse().ok()?;
            let i: f64 = im.trim().parse().ok()?;
            if !r.is_finite() || !i.is_finite() {
                return None;
            }
            Some(Coefficient::float(Complex64::new(r, i)))
        }
    }
}

pub fn render_rational(x: &BigRational) -> String {
    if x.is_integer() {
        return x.numer().to_string();
    }
    // decimal rendering terminates iff the reduced denominator is 2^a 5^b
    let mut den = x.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut a = 0usize;
    let mut b = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        a += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        b += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let places = a.max(b);
    let scaled = x * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if x.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Closest fraction to `x` whose denominator does not exceed `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn best_rational_approximation(x: &BigRational, max_den: &BigInt) -> BigRational {
    if x.denom() <= max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
    }
    let k = (max_den - &q0).div_floor(&q1);
    let semi = BigRational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = BigRational::new(p1, q1);
    if (&conv - x).abs() <= (&semi - x).abs() {
        conv
    } else {
        semi
    }
}

/// Best approximation of a float; the float is first converted exactly.
pub fn best_rational_approximation_f64(x: f64, max_den: u64) -> Option<BigRational> {
    let exact = BigRational::from_float(x)?;
    Some(best_rational_approximation(&exact, &BigInt::from(max_den)))
}

/// Field operations needed by the simplex solver, with a sign test that is
/// exact for rationals and tolerance-based for floats.
pub trait LpScalar: Clone + std::fmt::Debug + Send + Sync {
    fn lp_zero() -> Self;
    fn lp_one() -> Self;
    fn lp_add(&self, other: &Self) -> Self;
    fn lp_sub(&self, other: &Self) -> Self;
    fn lp_mul(&self, other: &Self) -> Self;
    fn lp_div(&self, other: &Self) -> Self;
    fn lp_neg(&self) -> Self;
    fn lp_is_positive(&self) -> bool;
    fn lp_is_negative(&self) -> bool;
    fn lp_is_zero_value(&self) -> bool {
        !self.lp_is_positive() && !self.lp_is_negative()
    }
    fn lp_lt(&self, other: &Self) -> bool;
    fn lp_to_f64(&self) -> f64;
}

impl LpScalar for BigRational {
    fn lp_zero() -> Self {
        Zero::zero()
    }
    fn lp_one() -> Self {
        One::one()
    }
    fn lp_add(&self, other: &Self) -> Self {
        self + other
    }
    fn lp_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn lp_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn lp_div(&self, other: &Self) -> Self {
        self / other
    }
    fn lp_neg(&self) -> Self {
        -self.clone()
    }
    fn lp_is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn lp_is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn lp_lt(&self, other: &Self) -> bool {
        self < other
    }
    fn lp_to_f64(&self) -> f64 {
        to_f64(self)
    }
}

/// Pivot tolerance of the floating simplex.
pub const FLOAT_PIVOT_TOL: f64 = 1e-9;

impl LpScalar for f64 {
    fn lp_zero() -> Self {
        0.0
    }
    fn lp_one() -> Self {
        1.0
    }
    fn lp_add(&self, other: &Self) -> Self {
        self + other
    }
    fn lp_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn lp_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn lp_div(&self, other: &Self) -> Self {
        self / other
    }
    fn lp_neg(&self) -> Self {
        -self
    }
    fn lp_is_positive(&self) -> bool {
        *self > FLOAT_PIVOT_TOL
    }
    fn lp_is_negative(&self) -> bool {
        *self < -FLOAT_PIVOT_TOL
    }
    fn lp_lt(&self, other: &Self) -> bool {
        self < other
    }
    fn lp_to_f64(&self) -> f64 {
        *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    /// Brute-force scan over every denominator up to `max_den`.
    fn scan_best(x: f64, max_den: i64) -> (f64, i64) {
        let mut best = (f64::INFINITY, 1);
        for den in 1..=max_den {
            let num = (x * den as f64).round();
            let err = (num / den as f64 - x).abs();
            if err < best.0 - 1e-15 {
                best = (err, den);
            }
        }
        best
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.5"), Some(q(1, 2)));
        assert_eq!(parse_rational("-1.25e1"), Some(q(-25, 2)));
        assert_eq!(parse_rational("3/12"), Some(q(1, 4)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("7"), Some(q(7, 1)));
        assert_eq!(parse_rational("1e-3"), Some(q(1, 1000)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn coefficient_falls_back_to_float() {
        let c = parse_coefficient("inf", "0");
        assert!(c.is_none());
        let c = parse_coefficient("0.1", "0").unwrap();
        assert_eq!(c.exact_real(), Some(&q(1, 10)));
    }

    #[test]
    fn renders_rationals() {
        assert_eq!(render_rational(&q(1, 2)), "0.5");
        assert_eq!(render_rational(&q(-3, 4)), "-0.75");
        assert_eq!(render_rational(&q(1, 3)), "1/3");
        assert_eq!(render_rational(&q(-5, 1)), "-5");
        assert_eq!(render_rational(&q(1, 100)), "0.01");
    }

    #[test]
    fn best_approximation_third() {
        let x = best_rational_approximation_f64(0.333_333_33, 64).unwrap();
        assert_eq!(x, q(1, 3));
        assert!((to_f64(&x) - 0.333_333_33).abs() < 1e-4);
    }

    #[test]
    fn best_approximation_keeps_small_denominators() {
        assert_eq!(best_rational_approximation(&q(3, 12), &BigInt::from(64)), q(1, 4));
        assert_eq!(best_rational_approximation(&q(355, 113), &BigInt::from(7)), q(22, 7));
    }

    #[test]
    fn best_approximation_matches_scan() {
        let values = [0.1234567, std::f64::consts::FRAC_1_SQRT_2, 0.5772156649, 0.918273, 0.0012, 0.99991, 0.414213562];
        for &x in &values {
            for max_den in [1i64, 2, 7, 16, 64, 100] {
                let approx = best_rational_approximation_f64(x, max_den as u64).unwrap();
                let err = (to_f64(&approx) - x).abs();
                let (scan_err, _) = scan_best(x, max_den);
                assert!((err - scan_err).abs() < 1e-12, "x={x} max_den={max_den}: {err} vs {scan_err}");
                assert!(approx.denom() <= &BigInt::from(max_den));
            }
        }
    }
}
