//! Trapezoid quadrature of the coefficient integrals on a circle through
//! the saddle point. One engine serves both regimes: the integrand is
//! e^{n·h(z)} times smooth factors, where n·h(z) = n·z − M·Ln z +
//! (n−M)·Ln(2−z). Because the log multipliers are integers, branch jumps of
//! the principal logs contribute e^{2πi·integer} = 1 and the integrand stays
//! smooth around the full circle, preserving the trapezoid rule's spectral
//! accuracy. The exponential is evaluated at `bits` precision relative to the
//! peak value at θ = 0; everything smooth is evaluated in f64.

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::analytic::{solve_alpha, wright_e_ln};
use crate::error::{domain, numeric, Result};
use crate::lengthset::LengthSet;
use crate::sampler::edge_count;
use crate::series::bigfloat_to_f64;

pub const DEFAULT_NODES: usize = 4096;
pub const DEFAULT_BITS: usize = 128;
/// Hard ceiling on the automatically raised node count.
pub const MAX_NODES: usize = 1 << 19;

/// Tolerance used for λ evaluations inside the quadrature.
const LAMBDA_TOL: f64 = 1e-14;
/// |Im/Re| of the quadrature mean beyond which the result is rejected.
const IM_RE_LIMIT: f64 = 1e-10;
/// Quadrature means this far below the accumulated magnitude are reported as
/// zero: the smooth factors g·u^r·λ^k are f64, so their roundoff leaves noise
/// of order (k + 3r)·ε·|integrand| ≲ 1e−13 in the mean, and any mass below
/// the clamp is unresolvable (and utterly negligible as a probability).
/// Resolved masses keep |mean|/magnitude many orders above this.
const ZERO_CLAMP: f64 = 1e-12;

/// Integration circle: radius, number of trapezoid nodes, and the bit
/// precision used for the exponential factor and the accumulators.
///
/// `nodes` is a floor, not an exact count: with Q nodes the trapezoid rule
/// returns the wanted coefficient plus aliases from coefficients Q indices
/// away, and the row-r integrand carries a pole of order 3r at z = 1 whose
/// Fourier tail decays only like j^{3r}·radius^j. The evaluator therefore
/// raises the count to whatever the (radius, rmax) combination needs; the
/// count actually used is reported in every [`SaddleResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContourSpec {
    radius_bits: u64,
    pub nodes: usize,
    pub bits: usize,
}

impl ContourSpec {
    pub fn new(radius: f64, nodes: usize, bits: usize) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) || !radius.is_finite() {
            return Err(domain(format!(
                "contour radius must lie strictly inside (0, 1), got {radius}"
            )));
        }
        if nodes < 256 || !nodes.is_power_of_two() {
            return Err(domain(format!(
                "node count must be a power of two ≥ 256, got {nodes}"
            )));
        }
        if !(64..=1 << 20).contains(&bits) {
            return Err(domain(format!("precision must be 64..=2^20 bits, got {bits}")));
        }
        Ok(Self {
            radius_bits: radius.to_bits(),
            nodes,
            bits,
        })
    }

    pub fn radius(&self) -> f64 {
        f64::from_bits(self.radius_bits)
    }

    /// Circle through the subcritical saddle z = 2M/n.
    pub fn for_subcritical(n: u64, m: u64) -> Result<Self> {
        if n == 0 || m == 0 || 2 * m >= n {
            return Err(domain(format!(
                "subcritical contour needs 0 < 2M < n, got n = {n}, M = {m}"
            )));
        }
        Self::new(2.0 * m as f64 / n as f64, DEFAULT_NODES, DEFAULT_BITS)
    }

    /// Circle of radius e^{−α·n^{−1/3}} through the real point of the
    /// critical-window path.
    pub fn for_critical(n: u64, m: u64) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(domain(format!(
                "critical contour needs 0 < M ≤ n, got n = {n}, M = {m}"
            )));
        }
        let nf = n as f64;
        let mu = (2.0 * m as f64 / nf - 1.0) * nf.cbrt();
        let alpha = solve_alpha(mu);
        Self::new((-alpha * nf.powf(-1.0 / 3.0)).exp(), DEFAULT_NODES, DEFAULT_BITS)
    }
}

/// One evaluated probability plus the quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleResult {
    pub value: f64,
    /// |Im/Re| of the quadrature mean; 0 for clamped structural zeros.
    pub im_over_re: f64,
    pub nodes: usize,
    pub bits: usize,
}

/// h(z) = z − log z + (1 − M/n)·log(2z − z²), the exponent whose saddle
/// points are z = 2M/n and z = 1.
pub fn h_subcritical(z: Complex64, n: u64, m: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    if z.norm() >= 1.0 || z == Complex64::new(0.0, 0.0) {
        return Err(domain(format!(
            "h is evaluated strictly inside the unit disk away from 0, got {z}"
        )));
    }
    let coeff = 1.0 - m as f64 / n as f64;
    Ok(z - z.ln() + (2.0 * z - z * z).ln() * coeff)
}

/// h₁(z) = h(z) − 1, normalized so that h₁(1) = h₁′(1) = 0 at M = n/2.
pub fn h1_critical(z: Complex64, n: u64, m: u64) -> Result<Complex64> {
    Ok(h_subcritical(z, n, m)? - 1.0)
}

/// g(z) = (1 − z)·e^{λ(z) − λ_L(z)}, the cycle-free weight of the integrand;
/// the exponent is evaluated as λ_{Lᶜ}(z), never by subtraction.
pub fn g_subcritical(z: Complex64, l: &LengthSet) -> Result<Complex64> {
    let lc = l.complemented().lambda(z, LAMBDA_TOL)?;
    Ok((Complex64::new(1.0, 0.0) - z) * lc.exp())
}

const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    p: usize,
    cc: Consts,
}

impl Ctx {
    fn new(bits: usize) -> Result<Self> {
        let cc = Consts::new()
            .map_err(|e| numeric(format!("cannot allocate constants cache: {e:?}")))?;
        Ok(Self { p: bits, cc })
    }

    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn u(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.p)
    }
}

/// Sum with compensated (Kahan) accumulation.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Term count up to which log-factorials and log-binomials are computed by
/// compensated summation of logs (absolute error ~1e−10 even at n = 10⁶,
/// where a single log-gamma call would already cost ~1e−7 absolute).
const LN_SUM_CAP: u64 = 2_000_000;

/// ln k! by direct summation for small k, log-gamma beyond the cap.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else if k <= LN_SUM_CAP {
        kahan_sum((2..=k).map(|i| (i as f64).ln()))
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// ln C(n, k), accurate to ~1e−10 absolute for k ≤ 2·10⁶ even when n is of
/// order n²/2 for million-vertex graphs (where log-gamma alone drifts).
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= LN_SUM_CAP {
        kahan_sum((0..k).map(|i| ((n - i) as f64).ln())) - ln_factorial(k)
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0) - ln_gamma(k as f64 + 1.0)
    }
}

/// ln of n! / (C(C(n,2), M) · (n−M)! · k!), the exact coefficient-to-
/// probability normalization.
pub fn exact_prefactor_ln(n: u64, m: u64, k: u64) -> Result<f64> {
    if m > n {
        return Err(domain(format!("prefactor needs M ≤ n, got n = {n}, M = {m}")));
    }
    let pairs = edge_count(n)?;
    if m > pairs {
        return Err(domain(format!("M = {m} exceeds C(n,2) = {pairs}")));
    }
    let falling = kahan_sum((n - m + 1..=n).map(|i| (i as f64).ln()));
    Ok(falling - ln_factorial(k) - ln_binom(pairs, m))
}

/// Closed-form Stirling approximation of `exact_prefactor_ln`, in logs:
/// ln[(1/k!)·√(2πnM/(n−M))·2^M·nⁿM^M·n^{−2M}·(n−M)^{−(n−M)}·e^{−2M+M/n+M²/n²}].
pub fn stirling_prefactor_ln(n: u64, m: u64, k: u64) -> Result<f64> {
    if m == 0 || m >= n {
        return Err(domain(format!(
            "Stirling prefactor needs 0 < M < n, got n = {n}, M = {m}"
        )));
    }
    let (nf, mf) = (n as f64, m as f64);
    let root = 0.5 * (2.0 * std::f64::consts::PI * nf * mf / (nf - mf)).ln();
    let powers = mf * std::f64::consts::LN_2 + nf * nf.ln() + mf * mf.ln()
        - 2.0 * mf * nf.ln()
        - (nf - mf) * (nf - mf).ln();
    let exponential = -2.0 * mf + mf / nf + (mf / nf).powi(2);
    Ok(root + powers + exponential - ln_factorial(k))
}

/// exp of the above; finite for moderate n, provided as the displayed form.
pub fn stirling_prefactor(n: u64, m: u64, k: u64) -> Result<f64> {
    Ok(stirling_prefactor_ln(n, m, k)?.exp())
}

/// Node floor keeping trapezoid aliasing negligible. With Q nodes the rule
/// computes Σ_{j ≡ N (mod Q)} c_j·radius^{j−N} instead of c_N alone, and the
/// alias terms of the row-r integrand (pole of order 3r at z = 1, Fourier
/// tail ~ j^{3r}·radius^j) die off only once Q·(−ln radius) comfortably
/// clears the pole order. Requiring Q·(−ln radius) ≥ 6·rmax + 100 was
/// calibrated so that doubling the count moves results only within the f64
/// noise floor of the highest surrogate rows (~1e−6 relative), instead of
/// the sixteen orders of magnitude an aliased row can contribute.
fn required_nodes(radius: f64, rmax: u64) -> Result<usize> {
    let x = -radius.ln();
    let need = ((6.0 * rmax as f64 + 100.0) / x).ceil();
    if !(need <= MAX_NODES as f64) {
        return Err(numeric(format!(
            "contour at radius {radius} with {rmax} surrogate rows needs more \
             than {MAX_NODES} quadrature nodes; reduce rmax or move the radius \
             away from 1"
        )));
    }
    Ok(((need as usize).max(256)).next_power_of_two())
}

/// Probabilities Pr[X = k ∧ total excess = r] for k ≤ kmax, r ≤ rmax by
/// quadrature on the circle of `spec`, as `out[r][k]`. The r = 0 slice is
/// the forest-plus-unicyclic law; r ≥ 1 slices use the Wright surrogate.
pub fn contour_table(
    n: u64,
    m: u64,
    l: &LengthSet,
    kmax: u64,
    rmax: u64,
    spec: &ContourSpec,
) -> Result<Vec<Vec<SaddleResult>>> {
    if n == 0 || m > n {
        return Err(domain(format!(
            "contour evaluation needs 0 < n and M ≤ n, got n = {n}, M = {m}"
        )));
    }
    let pairs = edge_count(n)?;
    if m > pairs {
        return Err(domain(format!("M = {m} exceeds C(n,2) = {pairs}")));
    }
    let lc = l.complemented();
    let radius = spec.radius();
    let nodes = spec.nodes.max(required_nodes(radius, rmax)?);
    let ctx = &mut Ctx::new(spec.bits)?;
    let p = ctx.p;

    let nf = ctx.u(n);
    let mf = ctx.u(m);
    let nmf = ctx.u(n - m);
    let two = ctx.u(2);
    let big_r = ctx.f(radius);
    let ln_r = big_r.ln(p, RM, &mut ctx.cc);
    let step = ctx
        .cc
        .pi(p, RM)
        .mul(&two, p, RM)
        .div(&ctx.u(nodes as u64), p, RM);

    let kn = kmax as usize + 1;
    let rn = rmax as usize + 1;
    let mut acc_re = vec![BigFloat::new(p); rn * kn];
    let mut acc_im = vec![BigFloat::new(p); rn * kn];
    let mut acc_abs = vec![0.0f64; rn * kn];
    // Peak log-magnitude n·h(R), fixed at the θ = 0 node below.
    let mut nh_peak = BigFloat::new(p);

    for j in 0..nodes {
        let theta = step.mul(&ctx.u(j as u64), p, RM);
        let sin_t = theta.sin(p, RM, &mut ctx.cc);
        let cos_t = theta.cos(p, RM, &mut ctx.cc);
        let z_re = big_r.mul(&cos_t, p, RM);
        let z_im = big_r.mul(&sin_t, p, RM);
        let w_re = two.sub(&z_re, p, RM);
        let w_im = z_im.neg();
        // Ln z = ln R + iθ (the 2π excess over the principal branch is
        // invisible under the integer multiplier M). Ln(2−z) is principal
        // outright since Re(2−z) > 1.
        let w_norm2 = w_re.mul(&w_re, p, RM).add(&w_im.mul(&w_im, p, RM), p, RM);
        let ln_w = w_norm2
            .ln(p, RM, &mut ctx.cc)
            .div(&two, p, RM);
        let arg_w = w_im.div(&w_re, p, RM).atan(p, RM, &mut ctx.cc);
        let nh_re = nf
            .mul(&z_re, p, RM)
            .sub(&mf.mul(&ln_r, p, RM), p, RM)
            .add(&nmf.mul(&ln_w, p, RM), p, RM);
        let nh_im = nf
            .mul(&z_im, p, RM)
            .sub(&mf.mul(&theta, p, RM), p, RM)
            .add(&nmf.mul(&arg_w, p, RM), p, RM);
        if j == 0 {
            nh_peak = nh_re.clone();
        }
        let delta_re = nh_re.sub(&nh_peak, p, RM);
        let e_mag = delta_re.exp(p, RM, &mut ctx.cc);
        let e_re = e_mag.mul(&nh_im.cos(p, RM, &mut ctx.cc), p, RM);
        let e_im = e_mag.mul(&nh_im.sin(p, RM, &mut ctx.cc), p, RM);
        let e_mag64 = bigfloat_to_f64(&e_mag);

        let z = Complex64::new(bigfloat_to_f64(&z_re), bigfloat_to_f64(&z_im));
        let one = Complex64::new(1.0, 0.0);
        let lam_l = l.lambda(z, LAMBDA_TOL)?;
        let lam_c = lc.lambda(z, LAMBDA_TOL)?;
        let g = (one - z) * lam_c.exp();
        let u = if rmax > 0 {
            z * (2.0 * one - z) / (one - z).powu(3)
        } else {
            one
        };
        let mut f_r = g;
        for r in 0..rn {
            let mut f = f_r;
            for k in 0..kn {
                let idx = r * kn + k;
                let f_re = ctx.f(f.re);
                let f_im = ctx.f(f.im);
                let t_re = e_re.mul(&f_re, p, RM).sub(&e_im.mul(&f_im, p, RM), p, RM);
                let t_im = e_re.mul(&f_im, p, RM).add(&e_im.mul(&f_re, p, RM), p, RM);
                acc_re[idx] = acc_re[idx].add(&t_re, p, RM);
                acc_im[idx] = acc_im[idx].add(&t_im, p, RM);
                acc_abs[idx] += e_mag64 * f.norm();
                if k + 1 < kn {
                    f *= lam_l;
                }
            }
            if r + 1 < rn {
                f_r *= u;
            }
        }
    }

    let nh_peak64 = bigfloat_to_f64(&nh_peak);
    let ln_choices = ln_binom(pairs, m);
    // ln n! − ln (n−M+r)!, walked down as r grows.
    let mut ln_falling = kahan_sum((n - m + 1..=n).map(|i| (i as f64).ln()));
    let nodes_f = nodes as f64;
    let mut out = Vec::with_capacity(rn);
    for r in 0..rn {
        if r > 0 {
            ln_falling -= ((n - m + r as u64) as f64).ln();
        }
        let ln_scale_r = ln_falling - ln_choices
            + (m as f64 - n as f64 - r as f64) * std::f64::consts::LN_2
            + wright_e_ln(r as u64)
            + nh_peak64;
        let mut row = Vec::with_capacity(kn);
        for k in 0..kn {
            let idx = r * kn + k;
            let mean_re = bigfloat_to_f64(&acc_re[idx]) / nodes_f;
            let mean_im = bigfloat_to_f64(&acc_im[idx]) / nodes_f;
            let mean_abs = acc_abs[idx] / nodes_f;
            if mean_re.abs() <= ZERO_CLAMP * mean_abs {
                // Structural zero of the coefficient: the quadrature mean
                // sits at the accumulation noise floor.
                row.push(SaddleResult {
                    value: 0.0,
                    im_over_re: 0.0,
                    nodes,
                    bits: spec.bits,
                });
                continue;
            }
            if mean_re < 0.0 {
                return Err(numeric(format!(
                    "quadrature returned a negative mass {mean_re:.3e} at r={r}, k={k} \
                     (|integrand| mean {mean_abs:.3e}); increase nodes or bits"
                )));
            }
            let im_over_re = (mean_im / mean_re).abs();
            if im_over_re > IM_RE_LIMIT {
                return Err(numeric(format!(
                    "quadrature mean is not real: |Im/Re| = {im_over_re:.3e} at r={r}, k={k}"
                )));
            }
            let value = (ln_scale_r - ln_factorial(k as u64) + mean_re.ln()).exp();
            row.push(SaddleResult {
                value,
                im_over_re,
                nodes,
                bits: spec.bits,
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Pr[X = k ∧ no complex component] by quadrature at the given contour.
pub fn contour_prob_subcritical(
    n: u64,
    m: u64,
    l: &LengthSet,
    k: u64,
    spec: &ContourSpec,
) -> Result<SaddleResult> {
    Ok(contour_dist_subcritical(n, m, l, k, spec)?
        .pop()
        .expect("kmax+1 entries"))
}

/// The k = 0..=kmax row of the forest-plus-unicyclic law.
pub fn contour_dist_subcritical(
    n: u64,
    m: u64,
    l: &LengthSet,
    kmax: u64,
    spec: &ContourSpec,
) -> Result<Vec<SaddleResult>> {
    Ok(contour_table(n, m, l, kmax, 0, spec)?.swap_remove(0))
}

fn sum_over_r(columns: Vec<Vec<SaddleResult>>, spec: &ContourSpec) -> Vec<SaddleResult> {
    let kn = columns[0].len();
    (0..kn)
        .map(|k| SaddleResult {
            value: columns.iter().map(|row| row[k].value).sum(),
            im_over_re: columns
                .iter()
                .map(|row| row[k].im_over_re)
                .fold(0.0, f64::max),
            nodes: columns[0][k].nodes,
            bits: spec.bits,
        })
        .collect()
}

fn guard_rmax(n: u64, rmax: u64) -> Result<()> {
    if (rmax as f64) > (n as f64).cbrt() + 1e-9 {
        return Err(domain(format!(
            "excess cut-off rmax = {rmax} exceeds n^(1/3) = {:.2}",
            (n as f64).cbrt()
        )));
    }
    Ok(())
}

/// Pr[X = k] in the critical window: Σ_{r=0}^{rmax} of the excess-r
/// integrals, each with the Wright surrogate weight.
pub fn contour_prob_critical(
    n: u64,
    m: u64,
    l: &LengthSet,
    k: u64,
    rmax: u64,
    spec: &ContourSpec,
) -> Result<SaddleResult> {
    Ok(contour_dist_critical(n, m, l, k, rmax, spec)?
        .pop()
        .expect("kmax+1 entries"))
}

/// Critical-window distribution over k ≤ kmax, summed over excess ≤ rmax.
pub fn contour_dist_critical(
    n: u64,
    m: u64,
    l: &LengthSet,
    kmax: u64,
    rmax: u64,
    spec: &ContourSpec,
) -> Result<Vec<SaddleResult>> {
    guard_rmax(n, rmax)?;
    let table = contour_table(n, m, l, kmax, rmax, spec)?;
    Ok(sum_over_r(table, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{egf_dist, egf_dist_critical, egf_prob};
    use crate::series::{ratio_ln, ratio_to_f64};

    fn l34() -> LengthSet {
        LengthSet::finite(vec![3, 4]).unwrap()
    }

    #[test]
    fn contour_spec_validation() {
        assert!(ContourSpec::new(0.5, 4096, 128).is_ok());
        assert!(ContourSpec::new(1.0, 4096, 128).is_err());
        assert!(ContourSpec::new(0.0, 4096, 128).is_err());
        assert!(ContourSpec::new(0.5, 1000, 128).is_err());
        assert!(ContourSpec::new(0.5, 128, 128).is_err());
        assert!(ContourSpec::new(0.5, 4096, 32).is_err());
        assert!(ContourSpec::for_subcritical(100, 50).is_err());
        let c = ContourSpec::for_critical(1_000_000, 500_000).unwrap();
        // μ = 0 ⟹ α = 1 ⟹ radius e^{−n^{−1/3}} = e^{−0.01}.
        assert!((c.radius() - (-0.01f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn saddle_condition_holds_numerically() {
        // h′(2c) = 0 via central differences at c = 0.25.
        let (n, m) = (1000u64, 250u64);
        let eps = 1e-5;
        let hp = h_subcritical(Complex64::new(0.5 + eps, 0.0), n, m).unwrap();
        let hm = h_subcritical(Complex64::new(0.5 - eps, 0.0), n, m).unwrap();
        assert!(((hp - hm) / (2.0 * eps)).norm() <= 1e-10);
        // |h₁′(1)| at M = n/2, approached from inside the disk.
        let h1p = h1_critical(Complex64::new(1.0 - eps, 0.0), 1000, 500).unwrap();
        let h1m = h1_critical(Complex64::new(1.0 - 3.0 * eps, 0.0), 1000, 500).unwrap();
        assert!(((h1p - h1m) / (2.0 * eps)).norm() <= 1e-4);
        // h₁(1⁻) → 0 at M = n/2.
        let h1 = h1_critical(Complex64::new(1.0 - 1e-9, 0.0), 1000, 500).unwrap();
        assert!(h1.norm() <= 1e-15, "h1(1) = {h1}");
        assert!(h_subcritical(Complex64::new(1.2, 0.0), 10, 3).is_err());
    }

    #[test]
    fn g_reduces_to_one_minus_z_for_the_full_length_set() {
        let l = LengthSet::all();
        for &z in &[
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.7, 0.1),
            Complex64::new(0.0, 0.9),
        ] {
            let g = g_subcritical(z, &l).unwrap();
            assert_eq!(g, Complex64::new(1.0, 0.0) - z);
        }
    }

    #[test]
    fn subcritical_contour_matches_rational_oracle() {
        let l3 = LengthSet::finite(vec![3]).unwrap();
        let spec = ContourSpec::for_subcritical(30, 9).unwrap();
        for k in 0..2 {
            let got = contour_prob_subcritical(30, 9, &l3, k, &spec).unwrap();
            let want = ratio_to_f64(&egf_prob(30, 9, &l3, k).unwrap());
            assert!(
                (got.value / want - 1.0).abs() <= 1e-10,
                "k={k}: {} vs {want}",
                got.value
            );
            assert!(got.im_over_re <= 1e-10);
        }
    }

    #[test]
    fn off_saddle_radius_still_integrates_exactly() {
        // The Cauchy integral is radius-independent inside the disk; a
        // non-saddle circle must reproduce the same rational value.
        let l = l34();
        let spec = ContourSpec::new(0.8, 4096, 128).unwrap();
        let got = contour_prob_subcritical(120, 48, &l, 1, &spec).unwrap();
        let want = ratio_to_f64(&egf_prob(120, 48, &l, 1).unwrap());
        assert!((got.value / want - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn structural_zero_is_clamped() {
        let l3 = LengthSet::finite(vec![3]).unwrap();
        let spec = ContourSpec::for_subcritical(30, 9).unwrap();
        let got = contour_prob_subcritical(30, 9, &l3, 11, &spec).unwrap();
        assert_eq!(got.value, 0.0);
        assert_eq!(got.im_over_re, 0.0);
    }

    #[test]
    fn node_doubling_is_spectrally_converged() {
        let l = l34();
        let coarse = ContourSpec::new(0.5, 2048, 128).unwrap();
        let fine = ContourSpec::new(0.5, 4096, 128).unwrap();
        let a = contour_prob_subcritical(500, 125, &l, 1, &coarse).unwrap();
        let b = contour_prob_subcritical(500, 125, &l, 1, &fine).unwrap();
        assert!(
            (a.value / b.value - 1.0).abs() <= 1e-12,
            "2048 → 4096 moved the value by {:e}",
            (a.value / b.value - 1.0).abs()
        );
    }

    #[test]
    fn critical_assembly_matches_series_route() {
        // Same quantity, two routes: 200-bit series coefficients vs
        // quadrature at the critical radius, including surrogate rows.
        let l = LengthSet::all();
        let spec = ContourSpec::for_critical(100, 50).unwrap();
        let table = contour_table(100, 50, &l, 3, 3, &spec).unwrap();
        let series = egf_dist_critical(100, 50, &l, 3, 3).unwrap();
        for r in 0..=3usize {
            for k in 0..=3usize {
                let got = table[r][k].value;
                let want = series[r][k];
                assert!(
                    (got / want - 1.0).abs() < 1e-9,
                    "r={r} k={k}: {got} vs {want}"
                );
            }
        }
        // And the r = 0 row against the exact rational law.
        let rational = egf_dist(100, 50, &l, 3).unwrap();
        for k in 0..=3usize {
            let want = ratio_to_f64(&rational[k]);
            assert!((table[0][k].value / want - 1.0).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn critical_ten_thousand_matches_limit_law() {
        let n = 10_000u64;
        let l = LengthSet::all();
        let spec = ContourSpec::for_critical(n, n / 2).unwrap();
        let dist = contour_dist_critical(n, n / 2, &l, 20, 12, &spec).unwrap();
        // k = 0 against e^{−λ(e^{−n^{−1/3}})}, within the O(n^{−1/12}) slack.
        let zstar = (-(n as f64).powf(-1.0 / 3.0)).exp();
        let lambda = -0.5 * (1.0 - zstar).ln() - zstar / 2.0 - zstar * zstar / 4.0;
        let want = (-lambda).exp();
        assert!(
            (dist[0].value / want - 1.0).abs() < 0.10,
            "k=0: {} vs {want}",
            dist[0].value
        );
        // Completeness over k. The excess surrogate overshoots each r ≥ 1
        // slice by O(r^{3/2}·n^{−1/2}), so the total lands slightly above 1
        // (measured 1.061 here, down from 1.24 at n = 100).
        let total: f64 = dist.iter().map(|s| s.value).sum();
        assert!(total > 0.97 && total < 1.10, "Σ_k = {total}");
        // r-term decay at k = 0 for r ≥ 5.
        let table = contour_table(n, n / 2, &l, 0, 12, &spec).unwrap();
        for r in 5..12 {
            assert!(
                table[r + 1][0].value <= table[r][0].value,
                "r-terms must decay beyond r = 5: term({}) = {:e} > term({r}) = {:e}",
                r + 1,
                table[r + 1][0].value,
                table[r][0].value
            );
        }
    }

    #[test]
    fn critical_rmax_guard() {
        let l = LengthSet::all();
        let spec = ContourSpec::for_critical(100, 50).unwrap();
        assert!(contour_dist_critical(100, 50, &l, 2, 5, &spec).is_err());
        assert!(contour_dist_critical(100, 50, &l, 2, 4, &spec).is_ok());
    }

    // At n = 10⁵ the r = 20 row's pole of order 60 sits 0.0213 from the
    // contour; at the 4096-node default its aliases used to drown the true
    // coefficient by sixteen orders of magnitude. The floor must raise the
    // count and land on the same value as an explicitly doubled request.
    #[test]
    fn node_floor_protects_high_surrogate_rows() {
        let (n, m) = (100_000u64, 50_000u64);
        let l = LengthSet::all();
        let auto = ContourSpec::for_critical(n, m).unwrap();
        assert_eq!(auto.nodes, DEFAULT_NODES);
        let floored = contour_prob_critical(n, m, &l, 0, 20, &auto).unwrap();
        assert!(
            floored.nodes > DEFAULT_NODES,
            "floor must engage: used {} nodes",
            floored.nodes
        );
        assert!(floored.value > 0.2 && floored.value < 0.4);
        let double = ContourSpec::new(auto.radius(), 2 * floored.nodes, auto.bits).unwrap();
        let check = contour_prob_critical(n, m, &l, 0, 20, &double).unwrap();
        assert_eq!(check.nodes, 2 * floored.nodes);
        // The residual between the two counts is the f64 noise floor of the
        // barely-resolved high-r rows, not aliasing (which would be huge).
        let rel = (floored.value / check.value - 1.0).abs();
        assert!(rel < 1e-6, "doubled nodes moved the value by {rel:e}");
    }

    #[test]
    fn node_floor_rejects_unresolvable_configurations() {
        let l = LengthSet::all();
        let spec = ContourSpec::new(1.0 - 1e-9, 4096, 128).unwrap();
        let err = contour_table(1000, 500, &l, 1, 3, &spec).unwrap_err();
        assert_eq!(err.kind(), "numeric");
    }

    #[test]
    fn prefactor_ln_matches_big_integer_arithmetic() {
        use crate::analytic::{big_binomial, factorial};
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let (n, m, k) = (100u64, 30u64, 2u64);
        let exact = BigRational::new(
            factorial(n),
            factorial(n - m) * factorial(k) * big_binomial(&BigInt::from(4950u64), &BigInt::from(m)),
        );
        let got = exact_prefactor_ln(n, m, k).unwrap();
        assert!((got - ratio_ln(&exact)).abs() < 1e-10);
    }

    #[test]
    fn stirling_prefactor_tracks_exact_form() {
        assert!(stirling_prefactor(10, 3, 0).unwrap() > 0.0);
        // |ratio − 1| = O(1/n) at c = 1/4.
        let ratio_err = |n: u64| -> f64 {
            let m = n / 4;
            let diff = stirling_prefactor_ln(n, m, 0).unwrap()
                - exact_prefactor_ln(n, m, 0).unwrap();
            (diff.exp() - 1.0).abs()
        };
        assert!(ratio_err(1_000) <= 1e-2);
        assert!(ratio_err(10_000) <= 1e-3);
        let halving = ratio_err(2_000) / ratio_err(1_000);
        assert!(
            (0.3..=0.8).contains(&halving),
            "doubling n should roughly halve the error, got {halving}"
        );
        assert!(stirling_prefactor(10, 0, 0).is_err());
        assert!(stirling_prefactor(10, 10, 0).is_err());
    }
}
