//! Truncated power series: exact rational coefficients for coefficient
//! extraction at small n, and arbitrary-precision float coefficients for the
//! larger-n paths where exact rationals blow up.

use astro_float::{BigFloat, Radix, RoundingMode, Sign, WORD_BIT_SIZE};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Cap on the truncation order of any series built here.
pub const MAX_ORDER: usize = 2000;

const RM: RoundingMode = RoundingMode::ToEven;

/// Σ c_i x^i truncated past x^N, with exact rational coefficients.
///
/// All arithmetic is exact on retained coefficients: coefficient i ≤ N of a
/// result depends only on the inputs' coefficients ≤ i and involves no
/// rounding. Binary operations require both operands to share the same order
/// (they always do in this crate) and panic otherwise, as does violating the
/// `exp`/`log1p` constant-term preconditions: those are programming errors,
/// not data errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn zero(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(domain(format!("series order {order} exceeds cap {MAX_ORDER}")));
        }
        Ok(RationalSeries {
            coeffs: vec![BigRational::zero(); order + 1],
        })
    }

    pub fn one(order: usize) -> Result<Self> {
        let mut s = Self::zero(order)?;
        s.coeffs[0] = BigRational::one();
        Ok(s)
    }

    /// The monomial x (or the zero series when order = 0).
    pub fn x(order: usize) -> Result<Self> {
        let mut s = Self::zero(order)?;
        if order >= 1 {
            s.coeffs[1] = BigRational::one();
        }
        Ok(s)
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() - 1 > MAX_ORDER {
            return Err(domain(format!(
                "series must have between 1 and {} coefficients",
                MAX_ORDER + 1
            )));
        }
        Ok(RationalSeries { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn check_same_order(&self, other: &Self) {
        assert_eq!(
            self.order(),
            other.order(),
            "series arithmetic requires matching truncation orders"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        RationalSeries { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        RationalSeries { coeffs }
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        RationalSeries {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let n = self.order();
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        RationalSeries { coeffs }
    }

    /// Integer power by binary exponentiation (truncation commutes with
    /// multiplication, so this is exact on retained coefficients).
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order()).expect("order already validated");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// exp(S) for S with zero constant term, via the standard recurrence
    /// e_n = (1/n) Σ_{j=1..n} j·s_j·e_{n−j}.
    pub fn exp(&self) -> Self {
        assert!(
            self.coeffs[0].is_zero(),
            "exp requires a zero constant term"
        );
        let n = self.order();
        let mut e = vec![BigRational::zero(); n + 1];
        e[0] = BigRational::one();
        for m in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=m {
                if !self.coeffs[j].is_zero() && !e[m - j].is_zero() {
                    acc += BigRational::from_integer(BigInt::from(j)) * &self.coeffs[j] * &e[m - j];
                }
            }
            e[m] = acc / BigRational::from_integer(BigInt::from(m));
        }
        RationalSeries { coeffs: e }
    }

    /// log(1 + S) for S with zero constant term, via
    /// l_n = s_n − (1/n) Σ_{j=1..n−1} j·l_j·s_{n−j}.
    pub fn log1p(&self) -> Self {
        assert!(
            self.coeffs[0].is_zero(),
            "log1p requires a zero constant term"
        );
        let n = self.order();
        let mut l = vec![BigRational::zero(); n + 1];
        for m in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..m {
                if !l[j].is_zero() && !self.coeffs[m - j].is_zero() {
                    acc += BigRational::from_integer(BigInt::from(j)) * &l[j] * &self.coeffs[m - j];
                }
            }
            l[m] = &self.coeffs[m] - acc / BigRational::from_integer(BigInt::from(m));
        }
        RationalSeries { coeffs: l }
    }

    /// self ∘ inner by Horner's scheme; inner must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Self {
        self.check_same_order(inner);
        assert!(
            inner.coeffs[0].is_zero(),
            "composition requires the inner series to have a zero constant term"
        );
        let n = self.order();
        let mut acc = Self::zero(n).expect("order already validated");
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        acc
    }
}

/// Σ c_i x^i truncated past x^N with `prec`-bit floating coefficients.
/// Used where exact rationals are too slow and a controlled precision
/// suffices (every series this crate feeds in has nonnegative coefficients,
/// so these recurrences are cancellation-free).
#[derive(Debug, Clone)]
pub struct FloatSeries {
    prec: usize,
    coeffs: Vec<BigFloat>,
}

impl FloatSeries {
    pub fn zero(order: usize, prec: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(domain(format!("series order {order} exceeds cap {MAX_ORDER}")));
        }
        Ok(FloatSeries {
            prec,
            coeffs: vec![BigFloat::new(prec); order + 1],
        })
    }

    pub fn one(order: usize, prec: usize) -> Result<Self> {
        let mut s = Self::zero(order, prec)?;
        s.coeffs[0] = BigFloat::from_u64(1, prec);
        Ok(s)
    }

    pub fn from_rational(r: &RationalSeries, prec: usize) -> Self {
        FloatSeries {
            prec,
            coeffs: r.coeffs().iter().map(|c| ratio_to_bigfloat(c, prec)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn coeff(&self, i: usize) -> &BigFloat {
        &self.coeffs[i]
    }

    fn check_same_order(&self, other: &Self) {
        assert_eq!(
            self.order(),
            other.order(),
            "series arithmetic requires matching truncation orders"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let p = self.prec;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b, p, RM))
            .collect();
        FloatSeries { prec: p, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let p = self.prec;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.sub(b, p, RM))
            .collect();
        FloatSeries { prec: p, coeffs }
    }

    pub fn scale(&self, factor: &BigFloat) -> Self {
        let p = self.prec;
        FloatSeries {
            prec: p,
            coeffs: self.coeffs.iter().map(|c| c.mul(factor, p, RM)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same_order(other);
        let n = self.order();
        let p = self.prec;
        let zero = BigFloat::new(p);
        let mut coeffs = vec![zero; n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                if !b.is_zero() {
                    let t = a.mul(b, p, RM);
                    coeffs[i + j] = coeffs[i + j].add(&t, p, RM);
                }
            }
        }
        FloatSeries { prec: p, coeffs }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order(), self.prec).expect("order already validated");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn exp(&self) -> Self {
        assert!(
            self.coeffs[0].is_zero(),
            "exp requires a zero constant term"
        );
        let n = self.order();
        let p = self.prec;
        let mut e = vec![BigFloat::new(p); n + 1];
        e[0] = BigFloat::from_u64(1, p);
        for m in 1..=n {
            let mut acc = BigFloat::new(p);
            for j in 1..=m {
                if !self.coeffs[j].is_zero() && !e[m - j].is_zero() {
                    let t = self.coeffs[j].mul(&e[m - j], p, RM);
                    let t = t.mul(&BigFloat::from_u64(j as u64, p), p, RM);
                    acc = acc.add(&t, p, RM);
                }
            }
            e[m] = acc.div(&BigFloat::from_u64(m as u64, p), p, RM);
        }
        FloatSeries { prec: p, coeffs: e }
    }

    pub fn log1p(&self) -> Self {
        assert!(
            self.coeffs[0].is_zero(),
            "log1p requires a zero constant term"
        );
        let n = self.order();
        let p = self.prec;
        let mut l = vec![BigFloat::new(p); n + 1];
        for m in 1..=n {
            let mut acc = BigFloat::new(p);
            for j in 1..m {
                if !l[j].is_zero() && !self.coeffs[m - j].is_zero() {
                    let t = l[j].mul(&self.coeffs[m - j], p, RM);
                    let t = t.mul(&BigFloat::from_u64(j as u64, p), p, RM);
                    acc = acc.add(&t, p, RM);
                }
            }
            let corr = acc.div(&BigFloat::from_u64(m as u64, p), p, RM);
            l[m] = self.coeffs[m].sub(&corr, p, RM);
        }
        FloatSeries { prec: p, coeffs: l }
    }
}

/// x ≈ m·2^e with m carrying the top 53 bits of the integer (m, e) = (x, 0)
/// when x already fits exactly.
fn bigint_mant_exp(x: &BigInt) -> (f64, i64) {
    if x.is_zero() {
        return (0.0, 0);
    }
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_f64().expect("fits in 53 bits"), 0);
    }
    let shift = bits - 53;
    let top = x >> shift;
    (top.to_f64().expect("top bits fit"), shift as i64)
}

/// x·2^e with saturating behaviour outside the f64 range.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i32 = 1000;
    while e > STEP as i64 {
        x *= 2f64.powi(STEP);
        e -= STEP as i64;
        if !x.is_finite() {
            return x;
        }
    }
    while e < -(STEP as i64) {
        x *= 2f64.powi(-STEP);
        e += STEP as i64;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Nearest-f64 value of an exact rational, robust to numerator/denominator
/// magnitudes far beyond the f64 range.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    let (mn, en) = bigint_mant_exp(q.numer());
    let (md, ed) = bigint_mant_exp(q.denom());
    if md == 0.0 {
        return f64::NAN;
    }
    ldexp(mn / md, en - ed)
}

/// ln of a positive rational, robust to huge numerators/denominators.
pub fn ratio_ln(q: &BigRational) -> f64 {
    assert!(q.is_positive(), "ratio_ln requires a positive rational");
    let (mn, en) = bigint_mant_exp(q.numer());
    let (md, ed) = bigint_mant_exp(q.denom());
    mn.ln() - md.ln() + (en - ed) as f64 * std::f64::consts::LN_2
}

/// Exact conversion of a rational to a `prec`-bit float (one rounded division).
pub fn ratio_to_bigfloat(q: &BigRational, prec: usize) -> BigFloat {
    let num = bigint_to_bigfloat(q.numer(), prec);
    let den = bigint_to_bigfloat(q.denom(), prec);
    num.div(&den, prec, RM)
}

pub fn bigint_to_bigfloat(x: &BigInt, prec: usize) -> BigFloat {
    // Decimal round-trip: exact up to the final rounding into `prec` bits.
    let mut cc = astro_float::Consts::new().expect("context allocation");
    BigFloat::parse(&x.to_string(), Radix::Dec, prec, RM, &mut cc)
}

/// Nearest-f64 value of a BigFloat (astro-float does not expose one).
/// Saturates to ±∞/0 outside the f64 exponent range.
pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _prec, sign, exp, _inexact)) => {
            let frac = mantissa_fraction(words);
            let v = ldexp(frac, exp as i64);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// ln|x| of a nonzero BigFloat as f64, usable far outside the f64 range
/// (the value is sign·fraction·2^exp with fraction ∈ [0.5, 1)).
pub fn bigfloat_ln_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _prec, _sign, exp, _inexact)) => {
            let frac = mantissa_fraction(words);
            frac.ln() + exp as f64 * std::f64::consts::LN_2
        }
    }
}

/// Top ~two words of a normalized mantissa as a fraction in [0.5, 1).
fn mantissa_fraction(words: &[astro_float::Word]) -> f64 {
    let wbits = WORD_BIT_SIZE as i32;
    let mut frac = 0.0f64;
    let k = words.len();
    if k >= 1 {
        frac += words[k - 1] as f64 * 2f64.powi(-wbits);
    }
    if k >= 2 {
        frac += words[k - 2] as f64 * 2f64.powi(-2 * wbits);
    }
    frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_traits::FromPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn geom(order: usize) -> RationalSeries {
        // S = x + x² + … (so 1+S = 1/(1−x) − something? no: just a test payload)
        let coeffs = (0..=order)
            .map(|i| if i == 0 { BigRational::zero() } else { q(1, i as i64) })
            .collect();
        RationalSeries::from_coeffs(coeffs).unwrap()
    }

    #[test]
    fn mul_truncates_exactly() {
        // (1+x)² = 1 + 2x + x²
        let mut one_plus_x = RationalSeries::one(4).unwrap();
        one_plus_x = one_plus_x.add(&RationalSeries::x(4).unwrap());
        let sq = one_plus_x.mul(&one_plus_x);
        assert_eq!(*sq.coeff(0), q(1, 1));
        assert_eq!(*sq.coeff(1), q(2, 1));
        assert_eq!(*sq.coeff(2), q(1, 1));
        assert_eq!(*sq.coeff(3), q(0, 1));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let s = geom(8);
        let p3 = s.pow(3);
        let m3 = s.mul(&s).mul(&s);
        assert_eq!(p3, m3);
        assert_eq!(s.pow(0), RationalSeries::one(8).unwrap());
    }

    #[test]
    fn exp_log_round_trip() {
        let s = geom(12);
        let back = s.exp().sub(&RationalSeries::one(12).unwrap()).log1p();
        assert_eq!(back, s);
        let forward = s.log1p().exp().sub(&RationalSeries::one(12).unwrap());
        // exp(log(1+S)) = 1+S
        assert_eq!(forward, s);
    }

    #[test]
    fn exp_of_x_is_the_exponential_series() {
        let e = RationalSeries::x(6).unwrap().exp();
        for i in 0..=6usize {
            let fact: i64 = (1..=i as i64).product::<i64>().max(1);
            assert_eq!(*e.coeff(i), q(1, fact));
        }
    }

    #[test]
    fn log1p_of_x_alternates() {
        let l = RationalSeries::x(5).unwrap().log1p();
        assert_eq!(*l.coeff(1), q(1, 1));
        assert_eq!(*l.coeff(2), q(-1, 2));
        assert_eq!(*l.coeff(3), q(1, 3));
        assert_eq!(*l.coeff(4), q(-1, 4));
    }

    #[test]
    fn compose_substitutes() {
        // f(y) = 1 + y + y², g = x + x² → f(g) = 1 + x + 2x² + …
        let f = RationalSeries::from_coeffs(vec![q(1, 1), q(1, 1), q(1, 1), q(0, 1)]).unwrap();
        let g = RationalSeries::from_coeffs(vec![q(0, 1), q(1, 1), q(1, 1), q(0, 1)]).unwrap();
        let fg = f.compose(&g);
        assert_eq!(*fg.coeff(0), q(1, 1));
        assert_eq!(*fg.coeff(1), q(1, 1));
        assert_eq!(*fg.coeff(2), q(2, 1)); // from g² and the x² of g
        assert_eq!(*fg.coeff(3), q(2, 1)); // 2·x·x² from g²
    }

    #[test]
    fn order_cap_is_enforced() {
        assert!(RationalSeries::zero(MAX_ORDER).is_ok());
        assert!(RationalSeries::zero(MAX_ORDER + 1).is_err());
        assert!(FloatSeries::zero(MAX_ORDER + 1, 64).is_err());
    }

    #[test]
    fn float_series_tracks_rational_series() {
        let s = geom(10);
        let fs = FloatSeries::from_rational(&s, 192);
        let fe = fs.exp();
        let re = s.exp();
        for i in 0..=10usize {
            let want = ratio_to_f64(re.coeff(i));
            let got = bigfloat_to_f64(fe.coeff(i));
            assert_abs_diff_eq!(got, want, epsilon = 1e-14 * want.abs().max(1.0));
        }
        let fl = fs.log1p();
        let rl = s.log1p();
        for i in 0..=10usize {
            let want = ratio_to_f64(rl.coeff(i));
            let got = bigfloat_to_f64(fl.coeff(i));
            assert_abs_diff_eq!(got, want, epsilon = 1e-14 * want.abs().max(1.0));
        }
        let fp = fs.pow(5);
        let rp = s.pow(5);
        let want = ratio_to_f64(rp.coeff(10));
        assert_abs_diff_eq!(bigfloat_to_f64(fp.coeff(10)), want, epsilon = 1e-13 * want);
    }

    #[test]
    fn ratio_to_f64_handles_huge_entries() {
        // 10^400 / (3·10^397) = 1000/3 — both sides overflow f64 alone.
        let big = BigInt::from(10).pow(400);
        let den = BigInt::from(3) * BigInt::from(10).pow(397);
        let r = BigRational::new(big.clone(), den.clone());
        assert_abs_diff_eq!(ratio_to_f64(&r), 1000.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            ratio_ln(&BigRational::new(big, BigInt::one())),
            400.0 * 10f64.ln(),
            epsilon = 1e-9
        );
        assert_eq!(ratio_to_f64(&BigRational::from_f64(0.0).unwrap()), 0.0);
        let neg = BigRational::new(BigInt::from(-7), BigInt::from(2));
        assert_abs_diff_eq!(ratio_to_f64(&neg), -3.5, epsilon = 0.0);
    }

    #[test]
    fn bigfloat_f64_round_trip() {
        for &v in &[
            0.0,
            1.0,
            -1.0,
            0.5,
            1.5e-30,
            -7.25e40,
            3.141592653589793,
            1e300,
            -1e-300,
        ] {
            let b = BigFloat::from_f64(v, 128);
            assert_eq!(bigfloat_to_f64(&b), v, "round trip of {v}");
        }
    }

    #[test]
    fn bigfloat_ln_abs_tracks_ln() {
        for &v in &[1.0, 2.0, 0.125, 9.5e102, 3.3e-200] {
            let b = BigFloat::from_f64(v, 128);
            assert_abs_diff_eq!(bigfloat_ln_abs(&b), v.ln(), epsilon = 1e-12 * v.ln().abs().max(1.0));
        }
        // Far beyond the f64 range: 2^5000.
        let two = BigFloat::from_f64(2.0, 128);
        let huge = two.powi(5000, 128, RM);
        assert_abs_diff_eq!(
            bigfloat_ln_abs(&huge),
            5000.0 * std::f64::consts::LN_2,
            epsilon = 1e-9
        );
        assert_eq!(bigfloat_ln_abs(&BigFloat::new(64)), f64::NEG_INFINITY);
    }

    #[test]
    fn ldexp_saturates() {
        assert_eq!(ldexp(1.0, 10), 1024.0);
        assert_eq!(ldexp(1.0, 100000), f64::INFINITY);
        assert_eq!(ldexp(1.0, -100000), 0.0);
        assert_eq!(ldexp(-1.0, 100000), f64::NEG_INFINITY);
    }
}
