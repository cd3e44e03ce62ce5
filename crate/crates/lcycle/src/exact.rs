//! Exact distribution of the cycle-count statistic, two independent ways:
//! brute-force enumeration of every M-edge graph (small n), and coefficient
//! extraction from the tree/unicyclic generating functions (exact rationals
//! for forests-plus-unicyclic graphs, high-precision floats when complex
//! components of a given excess are included via the Wright surrogate).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use statrs::function::gamma::ln_gamma;

use crate::analytic::{
    big_binomial, factorial, lambda_of_t_series, lambda_pair_of_t_float, tree_series,
    unrooted_from_tree, wright_e_ln,
};
use crate::components::{census, Scratch};
use crate::error::{domain, Result};
use crate::lengthset::LengthSet;
use crate::sampler::{edge_count, edge_unrank, GraphSample};
use crate::series::{
    bigfloat_ln_abs, bigint_to_bigfloat, FloatSeries, RationalSeries,
};

/// Largest number of edge subsets `brute_force_dist` will enumerate.
pub const BRUTE_FORCE_CAP: f64 = 1e7;

/// Ground-truth distribution from exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceDist {
    /// Pr[X = k ∧ no complex component], exact, keyed by k.
    pub dist: BTreeMap<u64, BigRational>,
    /// Pr[some complex component present], exact.
    pub prob_complex: BigRational,
}

impl BruteForceDist {
    /// Pr[X = k ∧ no complex component]; zero for absent keys.
    pub fn prob(&self, k: u64) -> BigRational {
        self.dist.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }
}

fn binom_f64(n: u64, m: u64) -> f64 {
    if m > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..m.min(n - m) {
        acc *= (n - i) as f64 / (i + 1) as f64;
        if acc > 1e18 {
            return f64::INFINITY;
        }
    }
    acc
}

/// Enumerate every M-subset of the C(n,2) possible edges and tally the
/// cycle statistic over samples free of complex components.
pub fn brute_force_dist(n: u64, m: u64, l: &LengthSet) -> Result<BruteForceDist> {
    if n > 8 {
        return Err(domain(format!(
            "brute force enumeration is limited to n ≤ 8, got n = {n}"
        )));
    }
    let pairs = edge_count(n)?;
    if m > pairs {
        return Err(domain(format!(
            "M = {m} exceeds the number of vertex pairs {pairs}"
        )));
    }
    if binom_f64(pairs, m) > BRUTE_FORCE_CAP {
        return Err(domain(format!(
            "C({pairs}, {m}) exceeds the enumeration cap {BRUTE_FORCE_CAP:e}"
        )));
    }
    let table: Vec<(u32, u32)> = (0..pairs)
        .map(|i| edge_unrank(n, i))
        .collect::<Result<Vec<_>>>()?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut complex_count: u64 = 0;
    let mut total: u64 = 0;
    let mut scratch = Scratch::new();
    let mut idx: Vec<usize> = (0..m as usize).collect();
    let mut g = GraphSample {
        n,
        edges: Vec::with_capacity(m as usize),
    };
    loop {
        g.edges.clear();
        g.edges.extend(idx.iter().map(|&i| table[i]));
        let stats = census(&g, l, &mut scratch);
        if stats.num_complex > 0 {
            complex_count += 1;
        } else {
            *counts.entry(stats.x_l).or_insert(0) += 1;
        }
        total += 1;
        // Advance the index vector to the next M-combination of 0..pairs.
        let mut pos = m as usize;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if idx[pos] != pairs as usize - (m as usize - pos) {
                idx[pos] += 1;
                for j in pos + 1..m as usize {
                    idx[j] = idx[j - 1] + 1;
                }
                pos = usize::MAX;
                break;
            }
        }
        if pos != usize::MAX {
            break;
        }
    }
    let denom = BigRational::from_integer(BigInt::from(total));
    let dist = counts
        .into_iter()
        .map(|(k, c)| (k, BigRational::from_integer(BigInt::from(c)) / &denom))
        .collect();
    Ok(BruteForceDist {
        dist,
        prob_complex: BigRational::from_integer(BigInt::from(complex_count)) / &denom,
    })
}

fn guard_egf_args(n: u64, m: u64) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    if m > n {
        return Err(domain(format!(
            "M = {m} > n = {n}: a complex component is then forced and the \
             forest-plus-unicyclic formula has empty support"
        )));
    }
    Ok(())
}

/// Shared series state for the generating-function evaluations at one (n, M).
struct EgfSeries {
    lam_l: RationalSeries,
    /// W₋₁^{n−M}·exp(λ_{Lᶜ}(T)), the k-independent factor.
    base: RationalSeries,
}

fn egf_series(n: u64, m: u64, l: &LengthSet) -> Result<EgfSeries> {
    let order = n as usize;
    let t = tree_series(order)?;
    let w = unrooted_from_tree(&t);
    let lam_l = lambda_of_t_series(l, order)?;
    let lam_lc = lambda_of_t_series(&l.complemented(), order)?;
    let base = w.pow(n - m).mul(&lam_lc.exp());
    Ok(EgfSeries { lam_l, base })
}

/// n! / ((n−M)! · k! · C(C(n,2), M)) as an exact rational.
fn egf_prefactor(n: u64, m: u64, k: u64) -> Result<BigRational> {
    let pairs = edge_count(n)?;
    let choices = big_binomial(&BigInt::from(pairs), &BigInt::from(m));
    let numer = factorial(n);
    let denom = factorial(n - m) * factorial(k) * choices;
    Ok(BigRational::new(numer, denom))
}

/// Pr[X = k ∧ no complex component] as an exact rational, from
/// n!/C(C(n,2),M) · [xⁿ] (W₋₁^{n−M}/(n−M)!) · (λ_L(T)^k/k!) · e^{λ_{Lᶜ}(T)}.
pub fn egf_prob(n: u64, m: u64, l: &LengthSet, k: u64) -> Result<BigRational> {
    Ok(egf_dist(n, m, l, k)?.pop().expect("kmax entries"))
}

/// `egf_prob` for every k in 0..=kmax, sharing the series work.
pub fn egf_dist(n: u64, m: u64, l: &LengthSet, kmax: u64) -> Result<Vec<BigRational>> {
    guard_egf_args(n, m)?;
    let s = egf_series(n, m, l)?;
    let mut cur = s.base;
    let mut out = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let coeff = cur.coeff(n as usize) * egf_prefactor(n, m, k)?;
        out.push(coeff);
        if k < kmax {
            cur = cur.mul(&s.lam_l);
        }
    }
    Ok(out)
}

/// Bits of floating-point precision for the excess-r evaluations.
pub const CRITICAL_BITS: usize = 200;

/// Pr[X = k ∧ total excess = r], approximately: complex components of total
/// excess r enter through the Wright surrogate e_r/(1−T)^{3r}, which is
/// exact at r = 0 and asymptotically correct as n grows.
pub fn egf_prob_critical(n: u64, m: u64, l: &LengthSet, k: u64, r: u64) -> Result<f64> {
    let row = egf_dist_critical(n, m, l, k, r)?;
    Ok(row[r as usize][k as usize])
}

/// Full table Pr[X = k ∧ total excess = r] for r ≤ rmax, k ≤ kmax,
/// indexed as `out[r][k]`.
pub fn egf_dist_critical(
    n: u64,
    m: u64,
    l: &LengthSet,
    kmax: u64,
    rmax: u64,
) -> Result<Vec<Vec<f64>>> {
    guard_egf_args(n, m)?;
    if (rmax as f64) > (n as f64).sqrt() {
        return Err(domain(format!(
            "excess bound r = {rmax} out of the surrogate's validity range \
             (require r ≤ √n = {:.2})",
            (n as f64).sqrt()
        )));
    }
    let order = n as usize;
    let prec = CRITICAL_BITS;
    let t = tree_series(order)?;
    let tf = FloatSeries::from_rational(&t, prec);
    let wf = FloatSeries::from_rational(&unrooted_from_tree(&t), prec);
    let (lam_l, lam_lc) = lambda_pair_of_t_float(l, &tf);
    // (1−T)^{−3} = exp(−3·ln(1+(−T))); raised to r by iterated multiplication.
    let minus3 = astro_float::BigFloat::from_i64(-3, prec);
    let inv_cubed = tf
        .scale(&astro_float::BigFloat::from_i64(-1, prec))
        .log1p()
        .scale(&minus3)
        .exp();
    let elamc = lam_lc.exp();

    let pairs = edge_count(n)?;
    let ln_choices = bigfloat_ln_abs(&bigint_to_bigfloat(
        &big_binomial(&BigInt::from(pairs), &BigInt::from(m)),
        prec,
    ));
    let ln_n_fact = ln_gamma(n as f64 + 1.0);

    let mut out = Vec::with_capacity(rmax as usize + 1);
    let mut w_pow = wf.pow(n - m);
    let mut surrogate = FloatSeries::one(order, prec)?;
    for r in 0..=rmax {
        if r > 0 {
            w_pow = w_pow.mul(&wf);
            surrogate = surrogate.mul(&inv_cubed);
        }
        let base = w_pow.mul(&surrogate).mul(&elamc);
        let ln_scale = ln_n_fact - ln_choices + wright_e_ln(r)
            - ln_gamma((n - m + r) as f64 + 1.0);
        let mut cur = base;
        let mut row = Vec::with_capacity(kmax as usize + 1);
        for k in 0..=kmax {
            let c = cur.coeff(order);
            let p = if c.is_zero() {
                0.0
            } else {
                (ln_scale - ln_gamma(k as f64 + 1.0) + bigfloat_ln_abs(c)).exp()
            };
            row.push(p);
            if k < kmax {
                cur = cur.mul(&lam_l);
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ratio_to_f64;
    use num_traits::One;
    use approx::assert_abs_diff_eq;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn brute_force_forced_triangle() {
        let l = LengthSet::finite(vec![3]).unwrap();
        let bf = brute_force_dist(3, 3, &l).unwrap();
        assert_eq!(bf.prob(1), q(1, 1));
        assert_eq!(bf.prob(0), q(0, 1));
        assert_eq!(bf.prob_complex, q(0, 1));
    }

    #[test]
    fn brute_force_four_vertices_three_edges() {
        let l3 = LengthSet::finite(vec![3]).unwrap();
        let bf = brute_force_dist(4, 3, &l3).unwrap();
        assert_eq!(bf.prob(1), q(4, 20));
        assert_eq!(bf.prob(0), q(16, 20));
        assert_eq!(bf.prob_complex, q(0, 1));
        let l4 = LengthSet::finite(vec![4]).unwrap();
        let bf4 = brute_force_dist(4, 3, &l4).unwrap();
        assert_eq!(bf4.prob(0), q(1, 1));
        assert_eq!(bf4.prob(1), q(0, 1));
    }

    #[test]
    fn brute_force_guards() {
        let l = LengthSet::all();
        assert!(brute_force_dist(9, 3, &l).is_err());
        assert!(brute_force_dist(4, 7, &l).is_err());
        // C(28, 14) ≈ 4·10⁷ blows the cap.
        assert!(brute_force_dist(8, 14, &l).is_err());
    }

    #[test]
    fn brute_force_total_mass_with_complex() {
        let l = LengthSet::all();
        let bf = brute_force_dist(5, 5, &l).unwrap();
        let mass: BigRational = bf.dist.values().sum();
        assert_eq!(mass + &bf.prob_complex, q(1, 1));
        assert!(bf.prob_complex > q(0, 1));
    }

    #[test]
    fn egf_prob_examples() {
        let l = LengthSet::finite(vec![3]).unwrap();
        assert_eq!(egf_prob(4, 3, &l, 1).unwrap(), q(1, 5));
        assert_eq!(egf_prob(4, 3, &l, 0).unwrap(), q(4, 5));
        // Support bound: k cycles of length ≥ 3 need 3k ≤ n vertices.
        assert_eq!(egf_prob(7, 7, &l, 3).unwrap(), q(0, 1));
        assert!(egf_prob(4, 5, &l, 0).is_err());
        assert!(egf_prob(0, 0, &l, 0).is_err());
    }

    #[test]
    fn egf_handles_tiny_graphs() {
        // n=2, M=1: the single edge is a tree, so X=0 with certainty.
        assert_eq!(egf_prob(2, 1, &LengthSet::all(), 0).unwrap(), q(1, 1));
    }

    #[test]
    fn egf_matches_brute_force_spot_checks() {
        for (n, m) in [(5u64, 4u64), (6, 5), (6, 6), (7, 5)] {
            for l in [
                LengthSet::finite(vec![3]).unwrap(),
                LengthSet::finite(vec![3, 4]).unwrap(),
                LengthSet::all(),
            ] {
                let bf = brute_force_dist(n, m, &l).unwrap();
                for k in 0..=2 {
                    assert_eq!(
                        egf_prob(n, m, &l, k).unwrap(),
                        bf.prob(k),
                        "n={n} M={m} k={k} L={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn critical_r0_equals_rational_formula() {
        let l = LengthSet::finite(vec![3]).unwrap();
        let p = egf_prob_critical(4, 3, &l, 1, 0).unwrap();
        assert_abs_diff_eq!(p, 0.2, epsilon = 1e-14);
        let l2 = LengthSet::all_at_least(4).unwrap();
        for k in 0..3 {
            let float = egf_prob_critical(20, 10, &l2, k, 0).unwrap();
            let exact = ratio_to_f64(&egf_prob(20, 10, &l2, k).unwrap());
            assert!(
                (float / exact - 1.0).abs() < 1e-12,
                "k={k}: {float} vs {exact}"
            );
        }
    }

    #[test]
    fn critical_completeness_and_excess_split_at_n_100() {
        let l = LengthSet::all();
        let table = egf_dist_critical(100, 50, &l, 20, 10).unwrap();
        let per_r: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
        // The r=0 row uses no surrogate; it must reproduce the exact
        // rational mass of the no-complex event (0.943569…).
        let rational: f64 = egf_dist(100, 50, &l, 20)
            .unwrap()
            .iter()
            .map(ratio_to_f64)
            .sum();
        assert!(
            (per_r[0] / rational - 1.0).abs() < 1e-12,
            "r=0 row {} vs exact {}",
            per_r[0],
            rational
        );
        // The r ≥ 1 rows carry the surrogate's O(r^{3/2}/√n) overshoot; at
        // n=100 the summed mass lands near 1.239 (Monte Carlo puts the true
        // Pr[excess=1] at 0.047 vs the surrogate's 0.186). Completeness is
        // therefore only coarse here, and tightens as n grows (next test).
        let total: f64 = per_r.iter().sum();
        assert!(
            (total - 1.0).abs() < 0.35,
            "surrogate completeness at n=100: {total}"
        );
        let ratio = per_r[0] / total;
        let target = (2.0f64 / 3.0).sqrt();
        assert!(
            (ratio - target).abs() < 0.1,
            "Pr[excess 0] share {ratio} vs {target}"
        );
    }

    #[test]
    fn surrogate_error_shrinks_with_n() {
        let l = LengthSet::all();
        let err_at = |n: u64| -> f64 {
            let table = egf_dist_critical(n, n / 2, &l, 20, 10).unwrap();
            (table.iter().flatten().sum::<f64>() - 1.0).abs()
        };
        let (e100, e256) = (err_at(100), err_at(256));
        assert!(
            e256 < e100 && e256 < 0.20,
            "completeness defect should shrink: {e100} → {e256}"
        );
    }

    #[test]
    fn critical_guards_excess_range() {
        let l = LengthSet::all();
        assert!(egf_dist_critical(100, 50, &l, 3, 11).is_err());
        assert!(egf_dist_critical(100, 101, &l, 3, 0).is_err());
    }

    #[test]
    fn normalization_matches_brute_force_no_complex_mass() {
        let l = LengthSet::finite(vec![3, 4]).unwrap();
        for (n, m) in [(6u64, 4u64), (7, 6)] {
            let bf = brute_force_dist(n, m, &l).unwrap();
            let no_complex = BigRational::one() - &bf.prob_complex;
            let sum: BigRational = egf_dist(n, m, &l, n / 3)
                .unwrap()
                .into_iter()
                .sum();
            assert_eq!(sum, no_complex, "n={n} M={m}");
        }
    }

    #[test]
    fn brute_force_accepts_m_zero() {
        let bf = brute_force_dist(4, 0, &LengthSet::all()).unwrap();
        assert_eq!(bf.prob(0), q(1, 1));
    }
}
