//! Closed-form inversions of the relative-loss equation.
//!
//! With `Y = y^(−1/κ)` for a target relative loss `y`, the time to reach it is
//!
//! ```text
//! t* = log2(1 + γ·ln2·(Y − 1)) / γ      (γ > 0)
//! t* = Y − 1                            (γ = 0)
//! ```
//!
//! `Y − 1` is formed as `expm1(−ln y / κ)` so targets close to 1 keep full
//! precision, and large `Y` is handled in the log domain.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, non_negative, positive, Error, Result};
use crate::scaling::{self, ScalingConfig};

const LOG_DOMAIN_THRESHOLD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// γ > 0: efficiency compounds.
    Exponential,
    /// γ = 0: classical static scaling.
    Static,
}

/// Answer of a time-to-target solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Years until `R` reaches the target.
    pub time_to_target: f64,
    pub branch: Branch,
    /// `|R(t*) − target| / target`, from re-evaluating the curve at `t*`.
    pub residual: f64,
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// Offset `τ` (years) in the baseline identity `C0/(E0·P0) = 1 + τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Perturbation(f64);

impl Perturbation {
    pub fn new(tau: f64) -> Result<Self> {
        finite("tau", tau)?;
        if tau <= -1.0 {
            return Err(domain("tau", tau, "must be > -1 (baseline vanishes at -1)"));
        }
        Ok(Self(tau))
    }

    pub fn tau(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Perturbation {
    type Error = Error;

    fn try_from(tau: f64) -> Result<Self> {
        Self::new(tau)
    }
}

impl From<Perturbation> for f64 {
    fn from(p: Perturbation) -> f64 {
        p.0
    }
}

fn check_target(target: f64) -> Result<f64> {
    finite("target", target)?;
    if target <= 0.0 || target > 1.0 {
        return Err(domain("target", target, "must lie in (0, 1]"));
    }
    if target < f64::MIN_POSITIVE {
        return Err(Error::UnreachableTarget { target });
    }
    Ok(target)
}

/// `ln Y = −ln(y)/κ`.
fn ln_required(kappa: f64, target: f64) -> f64 {
    -target.ln() / kappa
}

/// Time to target with accumulated compute measured against `scale · C0`.
fn closed_form(kappa: f64, gamma: f64, target: f64, scale: f64) -> Result<f64> {
    let s = ln_required(kappa, target);
    if gamma == 0.0 {
        let t = scale * s.exp_m1();
        return if t.is_finite() {
            Ok(t)
        } else {
            Err(Error::UnreachableTarget { target })
        };
    }
    let rate = gamma * LN_2;
    if s < LOG_DOMAIN_THRESHOLD {
        let a = scale * rate * s.exp_m1();
        if a.is_finite() {
            return Ok(a.ln_1p() / rate);
        }
    }
    // ln a = ln(scale) + ln(γ ln2) + s + ln(1 − e^(−s))
    let ln_a = scale.ln() + rate.ln() + s + (-(-s).exp()).ln_1p();
    Ok((ln_a + (-ln_a).exp().ln_1p()) / rate)
}

fn solve(config: &ScalingConfig, target: f64, tau: Option<Perturbation>) -> Result<SolveResult> {
    config.validate()?;
    let target = check_target(target)?;
    let scale = tau.map_or(1.0, |p| 1.0 + p.tau());
    let time_to_target = closed_form(config.kappa, config.gamma, target, scale)?;
    let achieved = match tau {
        None => scaling::relative_loss(config, time_to_target)?,
        Some(p) => scaling::relative_loss_perturbed(config, time_to_target, p.tau())?,
    };
    Ok(SolveResult {
        time_to_target,
        branch: if config.gamma > 0.0 {
            Branch::Exponential
        } else {
            Branch::Static
        },
        residual: (achieved - target).abs() / target,
        target,
        tau: tau.map(Perturbation::tau),
    })
}

/// Years until `R(t)` falls to `target`. A target of 1 returns 0.
pub fn time_to_target(config: &ScalingConfig, target: f64) -> Result<SolveResult> {
    solve(config, target, None)
}

/// Time to target when the effective baseline compute is scaled by `1 + τ`:
/// `t(τ) = log2(1 + (1+τ)·γ·ln2·(Y − 1)) / γ`. Requires γ > 0.
pub fn time_to_target_perturbed(
    config: &ScalingConfig,
    target: f64,
    tau: Perturbation,
) -> Result<SolveResult> {
    config.validate()?;
    if config.gamma == 0.0 {
        return Err(domain("gamma", 0.0, "perturbed solve needs gamma > 0"));
    }
    solve(config, target, Some(tau))
}

/// Exact `dt/dτ` at `τ = 0`: `(Y − 1) / (1 + γ·ln2·(Y − 1))`.
///
/// Tends to `1/(γ ln 2)` as `Y` grows; see [`first_order_sensitivity`].
pub fn sensitivity_slope(config: &ScalingConfig, target: f64) -> Result<f64> {
    config.validate()?;
    if config.gamma == 0.0 {
        return Err(domain("gamma", 0.0, "sensitivity needs gamma > 0"));
    }
    let target = check_target(target)?;
    if target == 1.0 {
        return Err(domain("target", target, "slope of a zero-length solve"));
    }
    let y_minus_one = ln_required(config.kappa, target).exp_m1();
    // 1/inf = 0 keeps the large-Y limit exact
    Ok(1.0 / (y_minus_one.recip() + config.gamma * LN_2))
}

/// Large-Y approximation of [`sensitivity_slope`]: `1/(γ ln 2)`.
pub fn first_order_sensitivity(gamma: f64) -> Result<f64> {
    positive("gamma", gamma)?;
    Ok(1.0 / (gamma * LN_2))
}

/// Required `ΔC/C0` to reach `target` within one static year, `y^(−1/κ) − 1`.
/// The fleet needed is `baseline_fleet · (1 + factor)`.
pub fn space_unfold_factor(kappa: f64, target: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    let target = check_target(target)?;
    let factor = ln_required(kappa, target).exp_m1();
    if factor.is_finite() {
        Ok(factor)
    } else {
        Err(Error::UnreachableTarget { target })
    }
}

/// Fleet size that reaches `target` in one year with no efficiency growth.
pub fn space_unfold_fleet(baseline_fleet: f64, kappa: f64, target: f64) -> Result<f64> {
    positive("baseline_fleet", baseline_fleet)?;
    Ok(baseline_fleet * (1.0 + space_unfold_factor(kappa, target)?))
}

/// Time-to-target over a `gammas × targets` grid at fixed κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonGrid {
    pub kappa: f64,
    pub gammas: Vec<f64>,
    pub targets: Vec<f64>,
    /// `years[i][j]` is the time for `gammas[i]` to reach `targets[j]`.
    pub years: Vec<Vec<f64>>,
}

pub fn horizon_grid(kappa: f64, gammas: &[f64], targets: &[f64]) -> Result<HorizonGrid> {
    if gammas.is_empty() {
        return Err(Error::Empty("gamma list must not be empty"));
    }
    if targets.is_empty() {
        return Err(Error::Empty("target list must not be empty"));
    }
    positive("kappa", kappa)?;
    let years = gammas
        .iter()
        .map(|&gamma| {
            non_negative("gamma", gamma)?;
            let config = ScalingConfig::new(kappa, gamma)?;
            targets
                .iter()
                .map(|&y| time_to_target(&config, y).map(|r| r.time_to_target))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HorizonGrid {
        kappa,
        gammas: gammas.to_vec(),
        targets: targets.to_vec(),
        years,
    })
}
