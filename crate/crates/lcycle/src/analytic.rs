//! Exact EGF series (T, W₋₁, W₀, λ_L(T)), Wright constants e_r, the special
//! function A(y,μ) weighting the excess law in the critical window, the
//! saddle-equation solver α(μ), and the Poisson-to-Gaussian pmf approximation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, numeric, Result};
use crate::lengthset::LengthSet;
use crate::series::{FloatSeries, RationalSeries};

/// T(x) = Σ_{n≥1} n^{n−1}/n! · xⁿ, the EGF of rooted labeled trees
/// (T = x·e^T).
pub fn tree_series(order: usize) -> Result<RationalSeries> {
    let mut coeffs = vec![BigRational::zero(); order + 1];
    let mut fact = BigInt::one();
    for (n, c) in coeffs.iter_mut().enumerate().skip(1) {
        fact *= BigInt::from(n);
        *c = BigRational::new(BigInt::from(n).pow(n as u32 - 1), fact.clone());
    }
    RationalSeries::from_coeffs(coeffs)
}

/// W₋₁(x) = T − T²/2, the EGF of unrooted labeled trees (coefficients
/// n^{n−2}/n!).
pub fn unrooted_series(order: usize) -> Result<RationalSeries> {
    let t = tree_series(order)?;
    Ok(unrooted_from_tree(&t))
}

pub(crate) fn unrooted_from_tree(t: &RationalSeries) -> RationalSeries {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    t.sub(&t.mul(t).scale(&half))
}

/// W₀(x) = −½log(1−T) − T/2 − T²/4, the EGF of connected unicyclic graphs.
pub fn unicyclic_series(order: usize) -> Result<RationalSeries> {
    let t = tree_series(order)?;
    let minus_t = t.scale(&BigRational::from_integer(BigInt::from(-1)));
    let log_part = minus_t.log1p().scale(&BigRational::new(BigInt::from(-1), BigInt::from(2)));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    Ok(log_part.sub(&t.scale(&half)).sub(&t.mul(&t).scale(&quarter)))
}

/// λ_L(T(x)) = Σ_{ℓ∈L, ℓ≤N} T^ℓ/(2ℓ), exact through x^N. Lengths beyond N
/// cannot contribute below x^{N+1} because T starts at x.
pub fn lambda_of_t_series(l: &LengthSet, order: usize) -> Result<RationalSeries> {
    let t = tree_series(order)?;
    let mut acc = RationalSeries::zero(order)?;
    match l {
        // Sparse sets: a few direct powers beat the incremental sweep.
        LengthSet::Finite(values) => {
            for &len in values.iter().take_while(|&&len| len <= order as u64) {
                let term = t.pow(len).scale(&inv2l(len));
                acc = acc.add(&term);
            }
        }
        _ => {
            if order >= 3 {
                let mut p = t.pow(3);
                for len in 3..=order as u64 {
                    if l.contains_unchecked(len) {
                        acc = acc.add(&p.scale(&inv2l(len)));
                    }
                    if len < order as u64 {
                        p = p.mul(&t);
                    }
                }
            }
        }
    }
    Ok(acc)
}

fn inv2l(len: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2 * len))
}

/// One sweep computing both λ_L(T) and λ_{Lᶜ}(T) as float series (each
/// coefficient is a sum of nonnegative terms, so no cancellation occurs).
pub(crate) fn lambda_pair_of_t_float(
    l: &LengthSet,
    t: &FloatSeries,
) -> (FloatSeries, FloatSeries) {
    let order = t.order();
    let prec = t.prec();
    let mut in_l = FloatSeries::zero(order, prec).expect("order already validated");
    let mut out_l = in_l.clone();
    if order >= 3 {
        let mut p = t.pow(3);
        for len in 3..=order as u64 {
            let w = astro_float::BigFloat::from_f64(1.0, prec)
                .div(&astro_float::BigFloat::from_u64(2 * len, prec), prec, astro_float::RoundingMode::ToEven);
            let term = p.scale(&w);
            if l.contains_unchecked(len) {
                in_l = in_l.add(&term);
            } else {
                out_l = out_l.add(&term);
            }
            if len < order as u64 {
                p = p.mul(t);
            }
        }
    }
    (in_l, out_l)
}

/// Exact Wright constant e_r = (6r)!/(2^{5r}·3^{2r}·(3r)!·(2r)!).
pub fn wright_e(r: u64) -> BigRational {
    let num = factorial(6 * r);
    let den = (BigInt::from(2).pow(5 * r as u32))
        * BigInt::from(3).pow(2 * r as u32)
        * factorial(3 * r)
        * factorial(2 * r);
    BigRational::new(num, den)
}

/// ln e_r via log-gamma, usable far past f64 overflow (e_r ≈ e^937 at r=200).
pub fn wright_e_ln(r: u64) -> f64 {
    let rf = r as f64;
    ln_gamma(6.0 * rf + 1.0)
        - 5.0 * rf * std::f64::consts::LN_2
        - 2.0 * rf * 3f64.ln()
        - ln_gamma(3.0 * rf + 1.0)
        - ln_gamma(2.0 * rf + 1.0)
}

pub(crate) fn factorial(n: u64) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    f
}

/// C(n, k) over big integers.
pub(crate) fn big_binomial(n: &BigInt, k: &BigInt) -> BigInt {
    num_integer::binomial(n.clone(), k.clone())
}

/// (sign, ln|1/Γ(a)|). The reciprocal gamma has removable zeros at
/// nonpositive integers, reported as (0, −∞). Arguments a ≤ ½ go through the
/// reflection formula 1/Γ(a) = sin(πa)·Γ(1−a)/π, evaluated in log space.
fn ln_rgamma(a: f64) -> (f64, f64) {
    if a > 0.5 {
        return (1.0, -ln_gamma(a));
    }
    let m = a.floor();
    if a == m {
        return (0.0, f64::NEG_INFINITY);
    }
    let frac = a - m; // in (0,1), so sin(π·frac) > 0
    let s = (std::f64::consts::PI * frac).sin();
    let sign = if (m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (
        sign,
        s.ln() + ln_gamma(1.0 - a) - std::f64::consts::PI.ln(),
    )
}

/// A(y,μ) = (e^{−μ³/6}/3^{(y+1)/3}) Σ_{k≥0} (½·3^{2/3}·μ)^k / (k!·Γ((y+1−2k)/3)).
///
/// Terms whose Γ-argument is a nonpositive integer contribute 0 (the
/// reciprocal gamma's removable zeros). Summation stops once the term has
/// stayed below `tol` times the largest term seen for 3 consecutive k, which
/// guards against that zero pattern; the error is therefore O(tol) *relative
/// to the peak term*, which is what the excess-law consumer needs (A itself
/// decays superexponentially in y).
pub fn big_a(y: f64, mu: f64, tol: f64) -> Result<f64> {
    if !y.is_finite() || !mu.is_finite() {
        return Err(domain(format!("non-finite argument to A: y={y}, mu={mu}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance {tol} must be positive")));
    }
    let ln_pref = -mu.powi(3) / 6.0 - (y + 1.0) / 3.0 * 3f64.ln();
    let b = 0.5 * 3f64.powf(2.0 / 3.0) * mu;
    // k = 0 term (b⁰ = 1 even when μ = 0).
    let (s0, lr0) = ln_rgamma((y + 1.0) / 3.0);
    let first = s0 * (ln_pref + lr0).exp();
    if b == 0.0 {
        // Only k = 0 survives at μ = 0: all higher powers of 0 vanish.
        return Ok(first);
    }
    let ln_abs_b = b.abs().ln();
    let mut sum = first;
    let mut peak = first.abs();
    let mut below = 0u32;
    for k in 1..10_000u64 {
        let a = (y + 1.0 - 2.0 * k as f64) / 3.0;
        let (sgn, ln_rg) = ln_rgamma(a);
        let sign_bk = if b < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let term =
            sgn * sign_bk * (ln_pref + k as f64 * ln_abs_b - ln_gamma(k as f64 + 1.0) + ln_rg).exp();
        sum += term;
        peak = peak.max(term.abs());
        if peak > 0.0 && term.abs() <= tol * peak {
            below += 1;
            if below >= 3 {
                return Ok(sum);
            }
        } else {
            below = 0;
        }
    }
    Err(numeric(format!(
        "series for A({y}, {mu}) did not settle within 10000 terms"
    )))
}

/// The unique positive solution α of μ = 1/α − α, in a cancellation-free
/// form on each sign of μ.
pub fn solve_alpha(mu: f64) -> f64 {
    let root = (mu * mu + 4.0).sqrt();
    if mu >= 0.0 {
        2.0 / (mu + root)
    } else {
        (root - mu) / 2.0
    }
}

/// Maximum r accepted by `excess_dist`: beyond this A(3r+½,·) leaves the f64
/// range (the law's mass is concentrated on small r anyway).
pub const EXCESS_RMAX: u64 = 120;

/// The limiting law of the total excess in the critical window:
/// p_r = √(2π)·e_r·A(3r+½, μ) for r = 0..=rmax.
pub fn excess_dist(mu: f64, rmax: u64, tol: f64) -> Result<Vec<f64>> {
    if rmax > EXCESS_RMAX {
        return Err(domain(format!(
            "rmax {rmax} exceeds {EXCESS_RMAX}, beyond which the weights underflow"
        )));
    }
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let mut out = Vec::with_capacity(rmax as usize + 1);
    for r in 0..=rmax {
        let er = crate::series::ratio_to_f64(&wright_e(r));
        let a = big_a(3.0 * r as f64 + 0.5, mu, tol)?;
        let p = sqrt_2pi * er * a;
        if p < -tol {
            return Err(numeric(format!(
                "excess weight p_{r} = {p} is negative beyond tolerance"
            )));
        }
        out.push(p);
    }
    Ok(out)
}

/// Main term of the Poisson(λ) pmf at k = λ + ρ√λ in its Gaussian window:
/// (1/√(2πλ))·e^{−ρ²/2}·(1 + He₃(ρ)/(6√λ)) with He₃(ρ) = ρ³ − 3ρ.
///
/// The −3ρ (rather than −ρ) is forced: expanding −½·ln(2πk) around k = λ
/// contributes −ρ/(2√λ) on top of the ρ³/(6√λ) from Stirling, and only the
/// combined ρ³ − 3ρ keeps the relative error at O((1+ρ⁶)/λ).
pub fn kolchin_approx(lambda: f64, k: u64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!("lambda {lambda} must be positive and finite")));
    }
    let sqrt_l = lambda.sqrt();
    let rho = (k as f64 - lambda) / sqrt_l;
    Ok((-rho * rho / 2.0).exp() / (2.0 * std::f64::consts::PI * lambda).sqrt()
        * (1.0 + (rho.powi(3) - 3.0 * rho) / (6.0 * sqrt_l)))
}

/// Exact Poisson pmf via log-gamma (the reference kolchin_approx is tested
/// against).
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}
