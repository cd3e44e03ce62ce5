//! Monte Carlo harness over the sampler and component census, plus the
//! goodness-of-fit statistics used to compare empirical cycle counts with
//! their Poisson/Gaussian predictions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma_ur;

use crate::components::{census, Scratch};
use crate::error::{domain, numeric, Result};
use crate::lengthset::LengthSet;
use crate::predictor::{predict, Prediction};
use crate::sampler::sample_gnm_stream;

/// Empirical distribution of a nonnegative integer statistic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
    pub trials: u64,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: BTreeMap<u64, u64>) -> Self {
        let trials = counts.values().sum();
        Self { counts, trials }
    }

    pub fn record(&mut self, value: u64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.trials += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.trials += other.trials;
        self
    }

    /// Empirical frequency of `value`.
    pub fn freq(&self, value: u64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        *self.counts.get(&value).unwrap_or(&0) as f64 / self.trials as f64
    }

    pub fn mean(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let s: u128 = self
            .counts
            .iter()
            .map(|(&k, &c)| k as u128 * c as u128)
            .sum();
        s as f64 / self.trials as f64
    }

    /// Population variance of the empirical law.
    pub fn variance(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let mean = self.mean();
        let s2: u128 = self
            .counts
            .iter()
            .map(|(&k, &c)| k as u128 * k as u128 * c as u128)
            .sum();
        s2 as f64 / self.trials as f64 - mean * mean
    }
}

/// Pearson chi-square summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2 {
    pub stat: f64,
    pub dof: u64,
    pub pvalue: f64,
}

/// Total-variation distance ½Σ|empirical − pmf| over the observed support,
/// plus ½·(pmf mass living outside it) so the result is a true distance
/// against the whole pmf. The pmf must sum to ≤ 1 over the support.
pub fn tv_distance(h: &Histogram, pmf: impl Fn(u64) -> f64) -> f64 {
    let trials = h.trials as f64;
    let mut gap = 0.0;
    let mut seen = 0.0;
    for (&k, &c) in &h.counts {
        let p = pmf(k);
        gap += (c as f64 / trials - p).abs();
        seen += p;
    }
    debug_assert!(seen <= 1.0 + 1e-9, "pmf mass {seen} exceeds 1");
    0.5 * (gap + (1.0 - seen).abs())
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Kolmogorov–Smirnov statistic between the empirical law of (X − λ)/√λ and
/// the standard normal: the larger one-sided gap on each side of every
/// observed atom.
pub fn ks_normalized(h: &Histogram, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(format!(
            "normalization needs a positive finite λ, got {lambda}"
        )));
    }
    if h.trials == 0 {
        return Err(domain("KS statistic needs at least one trial"));
    }
    let sd = lambda.sqrt();
    let trials = h.trials as f64;
    let mut cum = 0u64;
    let mut sup = 0.0f64;
    for (&k, &c) in &h.counts {
        let gauss = phi((k as f64 - lambda) / sd);
        let below = cum as f64 / trials;
        cum += c;
        let at = cum as f64 / trials;
        sup = sup.max((below - gauss).abs()).max((at - gauss).abs());
    }
    Ok(sup)
}

/// Survival function of the chi-square law: Q(dof/2, stat/2).
pub fn chi2_pvalue(dof: u64, stat: f64) -> f64 {
    if stat <= 0.0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, stat / 2.0)
    }
}

/// Pearson chi-square of `h` against `pmf`. Bins are pooled left to right
/// until each expected count reaches `min_expected`; one final bin absorbs
/// the pooled remainder plus all pmf mass beyond the largest observed value.
pub fn chi_square(h: &Histogram, pmf: impl Fn(u64) -> f64, min_expected: f64) -> Result<Chi2> {
    if h.trials == 0 {
        return Err(domain("chi-square needs at least one trial"));
    }
    if !(min_expected > 0.0) || !min_expected.is_finite() {
        return Err(domain(format!(
            "pooling threshold must be positive, got {min_expected}"
        )));
    }
    let trials = h.trials as f64;
    let kmax = *h.counts.keys().next_back().expect("nonempty");
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..=kmax {
        obs_acc += *h.counts.get(&k).unwrap_or(&0) as f64;
        let p = pmf(k);
        exp_acc += trials * p;
        mass += p;
        if exp_acc >= min_expected {
            bins.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    exp_acc += trials * (1.0 - mass).max(0.0);
    if obs_acc > 0.0 || exp_acc > 0.0 {
        bins.push((obs_acc, exp_acc));
    }
    if bins.len() < 2 {
        return Err(domain(format!(
            "chi-square needs at least 2 pooled bins, got {} \
             (raise the trial count or lower min_expected)",
            bins.len()
        )));
    }
    let mut stat = 0.0;
    for &(obs, exp) in &bins {
        if exp <= 0.0 {
            return Err(numeric(format!(
                "{obs} observations fell in a bin with zero expected mass"
            )));
        }
        let d = obs - exp;
        stat += d * d / exp;
    }
    let dof = (bins.len() - 1) as u64;
    Ok(Chi2 {
        stat,
        dof,
        pvalue: chi2_pvalue(dof, stat),
    })
}

/// Aggregates of one Monte Carlo run, with goodness-of-fit statistics
/// against the Poisson(λ) prediction where a prediction exists.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n: u64,
    pub m: u64,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads actually requested; 0 means the pool default.
    pub workers: usize,
    /// Distribution of the number of isolated cycles with length in L.
    pub x_hist: Histogram,
    /// Distribution of the total excess Σ(edges − vertices) over complex
    /// components.
    pub excess_hist: Histogram,
    /// Fraction of trials containing at least one complex component.
    pub complex_fraction: f64,
    pub mean_x: f64,
    pub var_x: f64,
    /// Absent (with `regime_error` set) when n, M fall outside the supported
    /// regimes — the simulation itself still runs.
    pub prediction: Option<Prediction>,
    pub regime_error: Option<String>,
    /// Total variation against Poisson(λ); needs a prediction.
    pub tv: Option<f64>,
    /// Pooled chi-square against Poisson(λ); absent for runs too small to
    /// fill two bins.
    pub chi2: Option<Chi2>,
    /// KS on the (X−λ)/√λ scale; absent when λ = 0.
    pub ks_normalized: Option<f64>,
}

#[derive(Default)]
struct Partial {
    x: Histogram,
    excess: Histogram,
    complex_trials: u64,
}

impl Partial {
    fn absorb(mut self, x: u64, excess: u64, complex: bool) -> Self {
        self.x.record(x);
        self.excess.record(excess);
        self.complex_trials += complex as u64;
        self
    }

    fn merge(self, other: Self) -> Self {
        Self {
            x: self.x.merge(other.x),
            excess: self.excess.merge(other.excess),
            complex_trials: self.complex_trials + other.complex_trials,
        }
    }
}

/// Samples `trials` graphs on per-trial RNG streams, runs the component
/// census on each, and aggregates. Deterministic for fixed inputs whatever
/// the worker count: trial t always uses stream(seed, t), and the integer
/// aggregates merge associatively.
pub fn run_trials(
    n: u64,
    m: u64,
    l: &LengthSet,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<RunReport> {
    if trials == 0 {
        return Err(domain("trials must be ≥ 1"));
    }
    let (prediction, regime_error) = match predict(n, m, l) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| numeric(format!("cannot build a worker pool: {e}")))?;
    let partial: Partial = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map_init(Scratch::new, |scratch, t| -> Result<(u64, u64, bool)> {
                let g = sample_gnm_stream(n, m, seed, t)?;
                let s = census(&g, l, scratch);
                Ok((s.x_l, s.total_excess, s.num_complex > 0))
            })
            .try_fold(Partial::default, |p, item| {
                let (x, excess, complex) = item?;
                Ok(p.absorb(x, excess, complex))
            })
            .try_reduce(Partial::default, |a, b| Ok(a.merge(b)))
    })?;

    let complex_fraction = partial.complex_trials as f64 / trials as f64;
    let mean_x = partial.x.mean();
    let var_x = partial.x.variance();
    let (tv, chi2, ks) = match &prediction {
        Some(p) => {
            let pmf = |k: u64| p.poisson_pmf(k);
            let tv = tv_distance(&partial.x, pmf);
            // Too few trials to fill two pooled bins is the only way this
            // fails with a Poisson target, which has full support.
            let chi2 = chi_square(&partial.x, pmf, 5.0).ok();
            let ks = if p.lambda > 0.0 {
                Some(ks_normalized(&partial.x, p.lambda)?)
            } else {
                None
            };
            (Some(tv), chi2, ks)
        }
        None => (None, None, None),
    };
    Ok(RunReport {
        n,
        m,
        trials,
        seed,
        workers,
        x_hist: partial.x,
        excess_hist: partial.excess,
        complex_fraction,
        mean_x,
        var_x,
        prediction,
        regime_error,
        tv,
        chi2,
        ks_normalized: ks,
    })
}
