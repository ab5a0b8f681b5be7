//! The relative-loss equation and its ingredients.
//!
//! Efficiency grows as `E(t) = E0 · 2^(γt)` and, under a constant mean-field
//! power `P0`, the compute accumulated beyond the one-year baseline
//! `C0 = E0 · P0 · 1 yr` is
//!
//! ```text
//! ΔC(t) / C0 = (2^(γt) − 1) / (γ · ln 2)      (γ > 0)
//!            = t                               (γ = 0)
//! ```
//!
//! The relative loss is then `R(t) = (1 + ΔC(t)/C0)^(−κ)` and the absolute
//! loss `L(t) = L0 · R(t)`.
//!
//! Units are fixed across the crate: time in years, power in MW, efficiency in
//! PFLOPs/(yr·MW), compute in PFLOPs, loss in nats/token.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, non_negative, positive, Error, Result};

/// Above this exponent `exp_m1` is close to overflowing; switch to logs.
const LOG_DOMAIN_THRESHOLD: f64 = 700.0;

fn default_l0() -> f64 {
    1.0
}

/// Parameters of one relative-loss curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Scaling exponent linking loss to cumulative compute.
    pub kappa: f64,
    /// Efficiency-doubling rate, 1/yr.
    pub gamma: f64,
    /// Baseline loss, nats/token.
    #[serde(default = "default_l0")]
    pub l0: f64,
    /// Baseline efficiency, PFLOPs/(yr·MW).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    /// Mean-field power, MW.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
}

impl ScalingConfig {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        let config = Self {
            kappa,
            gamma,
            l0: default_l0(),
            e0: None,
            p0: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_l0(mut self, l0: f64) -> Result<Self> {
        self.l0 = l0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_anchors(mut self, e0: f64, p0: f64) -> Result<Self> {
        self.e0 = Some(e0);
        self.p0 = Some(p0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("kappa", self.kappa)?;
        non_negative("gamma", self.gamma)?;
        positive("l0", self.l0)?;
        if let Some(e0) = self.e0 {
            positive("e0", e0)?;
        }
        if let Some(p0) = self.p0 {
            positive("p0", p0)?;
        }
        Ok(())
    }

    /// `C0 = E0 · P0 · 1 yr`, in PFLOPs.
    pub fn baseline_compute(&self) -> Result<f64> {
        match (self.e0, self.p0) {
            (Some(e0), Some(p0)) => Ok(e0 * p0),
            _ => Err(Error::Config("baseline compute needs both e0 and p0")),
        }
    }
}

/// Efficiency at time `t`: `e0 · 2^(γt)`.
pub fn efficiency_at(e0: f64, gamma: f64, t: f64) -> Result<f64> {
    positive("e0", e0)?;
    non_negative("gamma", gamma)?;
    non_negative("t", t)?;
    Ok(e0 * (gamma * t).exp2())
}

/// Compute accumulated over `[0, t]` relative to the one-year baseline,
/// `∫₀ᵗ 2^(γτ) dτ`.
///
/// Continuous across `γ = 0`: the ratio is written as `t · expm1(x) / x` with
/// `x = γ·t·ln 2`, which stays accurate as `x → 0`. Returns `+inf` once the
/// value no longer fits in a double (γt beyond ~1024).
pub fn delta_compute_ratio(gamma: f64, t: f64) -> Result<f64> {
    non_negative("gamma", gamma)?;
    non_negative("t", t)?;
    Ok(delta_ratio_unchecked(gamma, t))
}

fn delta_ratio_unchecked(gamma: f64, t: f64) -> f64 {
    let x = gamma * t * LN_2;
    if x == 0.0 {
        t
    } else {
        t * (x.exp_m1() / x)
    }
}

/// `ln(1 + ΔC/(scale·C0))`, finite for every finite `γt`.
fn ln_growth(gamma: f64, t: f64, scale: f64) -> f64 {
    let x = gamma * t * LN_2;
    if x < LOG_DOMAIN_THRESHOLD {
        return (delta_ratio_unchecked(gamma, t) / scale).ln_1p();
    }
    // ln(ΔC/C0) = x + ln(1 − e^(−x)) − ln(γ ln 2)
    let ln_delta = x + (-(-x).exp()).ln_1p() - (gamma * LN_2).ln() - scale.ln();
    ln_delta + (-ln_delta).exp().ln_1p()
}

fn clamp_underflow(r: f64) -> Evaluation {
    if r < f64::MIN_POSITIVE {
        Evaluation {
            relative_loss: 0.0,
            underflow: true,
        }
    } else {
        Evaluation {
            relative_loss: r,
            underflow: false,
        }
    }
}

/// A single evaluation of the relative-loss equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub relative_loss: f64,
    /// Set when R fell below the smallest normal double and was clamped to 0.
    pub underflow: bool,
}

/// Evaluates `R(t)`, flagging underflow instead of returning subnormals.
pub fn evaluate(config: &ScalingConfig, t: f64) -> Result<Evaluation> {
    config.validate()?;
    non_negative("t", t)?;
    let r = (-config.kappa * ln_growth(config.gamma, t, 1.0)).exp();
    Ok(clamp_underflow(r))
}

/// `R(t)` when the baseline identity is perturbed to `C0/(E0·P0) = 1 + τ`
/// years, i.e. accumulated compute is measured against a baseline scaled by
/// `1 + τ`: `(1 + ΔC/(C0·(1+τ)))^(−κ)`.
pub fn relative_loss_perturbed(config: &ScalingConfig, t: f64, tau: f64) -> Result<f64> {
    config.validate()?;
    non_negative("t", t)?;
    finite("tau", tau)?;
    if tau <= -1.0 {
        return Err(domain("tau", tau, "must be > -1 (baseline vanishes at -1)"));
    }
    let r = (-config.kappa * ln_growth(config.gamma, t, 1.0 + tau)).exp();
    Ok(clamp_underflow(r).relative_loss)
}

/// `R(t) = (1 + ΔC(t)/C0)^(−κ)`.
pub fn relative_loss(config: &ScalingConfig, t: f64) -> Result<f64> {
    evaluate(config, t).map(|e| e.relative_loss)
}

/// `L(t) = L0 · R(t)`, in nats/token.
pub fn loss_at(config: &ScalingConfig, t: f64) -> Result<f64> {
    Ok(config.l0 * relative_loss(config, t)?)
}

/// The `γ = 0` form `(1 + t)^(−κ)`.
pub fn static_relative_loss(kappa: f64, t: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    non_negative("t", t)?;
    Ok((-kappa * t.ln_1p()).exp())
}

/// Large-t halving time of R. Since `R ∝ 2^(−κγt)` asymptotically, this is
/// `1 / (κγ)`.
pub fn asymptotic_halving_time(config: &ScalingConfig) -> Result<f64> {
    config.validate()?;
    if config.gamma == 0.0 {
        return Err(domain(
            "gamma",
            config.gamma,
            "no exponential regime at gamma = 0",
        ));
    }
    Ok(1.0 / (config.kappa * config.gamma))
}

/// Total compute `C0 + ΔC(t)` in PFLOPs; needs the `e0`/`p0` anchors.
pub fn cumulative_compute(config: &ScalingConfig, t: f64) -> Result<f64> {
    config.validate()?;
    let c0 = config.baseline_compute()?;
    Ok(c0 * (1.0 + delta_compute_ratio(config.gamma, t)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t_years: f64,
    pub relative_loss: f64,
    pub loss: f64,
}

/// Sampled `(t, R(t), L(t))` points of one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeries {
    pub config: ScalingConfig,
    pub points: Vec<TrajectoryPoint>,
    /// True if any point was clamped by underflow.
    #[serde(default)]
    pub underflow: bool,
}

impl TrajectorySeries {
    /// Evaluates the curve at the given times, which must be non-negative
    /// and strictly increasing.
    pub fn at_times(config: &ScalingConfig, times: &[f64]) -> Result<Self> {
        config.validate()?;
        if times.is_empty() {
            return Err(Error::Empty("time grid must not be empty"));
        }
        let mut points = Vec::with_capacity(times.len());
        let mut underflow = false;
        let mut prev = f64::NEG_INFINITY;
        for &t in times {
            finite("t", t)?;
            if t <= prev {
                return Err(domain("t", t, "time grid must be strictly increasing"));
            }
            prev = t;
            let eval = evaluate(config, t)?;
            underflow |= eval.underflow;
            points.push(TrajectoryPoint {
                t_years: t,
                relative_loss: eval.relative_loss,
                loss: config.l0 * eval.relative_loss,
            });
        }
        Ok(Self {
            config: *config,
            points,
            underflow,
        })
    }

    /// First pair of consecutive samples whose relative loss brackets `level`.
    pub fn crossing(&self, level: f64) -> Option<(TrajectoryPoint, TrajectoryPoint)> {
        self.points
            .windows(2)
            .find(|w| w[0].relative_loss >= level && w[1].relative_loss <= level)
            .map(|w| (w[0], w[1]))
    }
}

/// `n` evenly spaced samples on `[0, t_max]`.
pub fn sample_trajectory(config: &ScalingConfig, t_max: f64, n: usize) -> Result<TrajectorySeries> {
    positive("t_max", t_max)?;
    if n < 2 {
        return Err(domain("n", n as f64, "need at least two samples"));
    }
    let last = (n - 1) as f64;
    let times: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                t_max
            } else {
                t_max * i as f64 / last
            }
        })
        .collect();
    TrajectorySeries::at_times(config, &times)
}
