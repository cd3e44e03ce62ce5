//! Regime classification for (n, M) and the predicted limit law of the
//! number of isolated L-cycles: a saddle argument z* and λ = λ_L(z*), which
//! parametrize both the Poisson pmf and the Gaussian normalization.

use crate::analytic::solve_alpha;
use crate::error::{domain, Error, Result};
use crate::lengthset::LengthSet;
use crate::sampler::edge_count;

/// Half-width of the critical window in μ = (2M/n − 1)·n^{1/3}. The theory
/// gives asymptotic classes, not finite-n boundaries; this default is
/// documented and overridable in `regime_of`.
pub const DEFAULT_MU_CRIT: f64 = 1.0;

/// Density threshold M/n separating "subcritical" from "barely subcritical"
/// below the critical window.
pub const DEFAULT_SUBCRIT_CUT: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    Subcritical,
    BarelySubcritical,
    Critical,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::Subcritical => "subcritical",
            RegimeTag::BarelySubcritical => "barely_subcritical",
            RegimeTag::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// Edge density c = M/n.
    pub c: f64,
    /// Window parameter μ = (2M/n − 1)·n^{1/3}.
    pub mu: f64,
    /// Positive solution of μ = 1/α − α; present only in the critical window.
    pub alpha: Option<f64>,
}

/// Classify (n, M). Supercritical inputs (μ > mu_crit) are rejected — the
/// theory provides no prediction there.
pub fn regime_of(n: u64, m: u64, mu_crit: f64) -> Result<Regime> {
    if n < 3 {
        return Err(domain(format!("n = {n} must be at least 3")));
    }
    if m > edge_count(n)? {
        return Err(domain(format!(
            "M = {m} exceeds the number of vertex pairs {}",
            edge_count(n)?
        )));
    }
    if !(mu_crit > 0.0) {
        return Err(domain(format!("mu_crit = {mu_crit} must be positive")));
    }
    let nf = n as f64;
    let c = m as f64 / nf;
    let mu = (2.0 * m as f64 - nf) / nf * nf.cbrt();
    if mu.abs() <= mu_crit {
        let alpha = solve_alpha(mu);
        Ok(Regime {
            tag: RegimeTag::Critical,
            c,
            mu,
            alpha: Some(alpha),
        })
    } else if mu < 0.0 {
        let tag = if c > DEFAULT_SUBCRIT_CUT {
            RegimeTag::BarelySubcritical
        } else {
            RegimeTag::Subcritical
        };
        Ok(Regime {
            tag,
            c,
            mu,
            alpha: None,
        })
    } else {
        Err(Error::Regime(format!(
            "mu = {mu:.6} exceeds mu_crit = {mu_crit}: (n = {n}, M = {m}) is supercritical and unsupported"
        )))
    }
}

/// The predicted law of X: Poisson(λ) with λ = λ_L(z*), or equivalently the
/// Gaussian (X−λ)/√λ → N(0,1) when λ is large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub regime: Regime,
    /// Saddle argument: 2M/n below the window, e^{−αn^{−1/3}} inside it.
    pub zstar: f64,
    /// λ_L(z*), the Poisson mean (and Gaussian mean; the Gaussian sd is √λ).
    pub lambda: f64,
}

impl Prediction {
    /// (mean, sd) of the Gaussian normalization.
    pub fn gaussian(&self) -> (f64, f64) {
        (self.lambda, self.lambda.sqrt())
    }

    /// Poisson(λ) pmf at k.
    pub fn poisson_pmf(&self, k: u64) -> f64 {
        crate::analytic::poisson_pmf(self.lambda, k)
    }
}

pub fn predict(n: u64, m: u64, l: &LengthSet) -> Result<Prediction> {
    let regime = regime_of(n, m, DEFAULT_MU_CRIT)?;
    let zstar = match regime.tag {
        RegimeTag::Critical => {
            let alpha = regime.alpha.expect("critical regime carries alpha");
            (-alpha * (n as f64).powf(-1.0 / 3.0)).exp()
        }
        _ => 2.0 * m as f64 / n as f64,
    };
    let lambda = l.lambda_real(zstar, 1e-12)?;
    Ok(Prediction {
        regime,
        zstar,
        lambda,
    })
}

/// Limit probability that G(n,M) has no L-cycle: e^{−λ_L(z*)}.
pub fn prob_no_l_cycle(n: u64, m: u64, l: &LengthSet) -> Result<f64> {
    Ok((-predict(n, m, l)?.lambda).exp())
}
