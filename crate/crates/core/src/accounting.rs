//! Logical compute, hardware-normalized GPU-hours and compute-optimal
//! allocation.
//!
//! Logical compute is always the dense, full-precision `6·N·D` count;
//! sparsity or low-precision speedups show up only as fewer GPU-hours.
//! Compute is carried in FLOPs.

use serde::{Deserialize, Serialize};

use crate::error::{domain, finite, non_negative, positive, Error, Result};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// H800 hours expressed as H100 hours (2.224 M / 2.78 M).
pub const H800_TO_H100: f64 = 0.8;

pub const DEFAULT_GPU_POWER_KW: f64 = 1.0;

fn default_equivalence() -> f64 {
    1.0
}

/// One training run as recorded in GPU-hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelAccount {
    pub name: String,
    pub params_n: f64,
    pub tokens_d: f64,
    /// Hours on the native hardware.
    pub gpu_hours: f64,
    /// Native → reference hardware multiplier.
    #[serde(default = "default_equivalence")]
    pub equivalence_factor: f64,
    /// kW per GPU.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_gpu_power: Option<f64>,
}

impl ModelAccount {
    pub fn new(
        name: &str,
        params_n: f64,
        tokens_d: f64,
        gpu_hours: f64,
        equivalence_factor: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            params_n,
            tokens_d,
            gpu_hours,
            equivalence_factor,
            per_gpu_power: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("params_n", self.params_n)?;
        positive("tokens_d", self.tokens_d)?;
        positive("gpu_hours", self.gpu_hours)?;
        positive("equivalence_factor", self.equivalence_factor)?;
        if self.equivalence_factor > 2.0 {
            return Err(domain(
                "equivalence_factor",
                self.equivalence_factor,
                "must be <= 2",
            ));
        }
        if let Some(kw) = self.per_gpu_power {
            positive("per_gpu_power", kw)?;
        }
        Ok(())
    }

    pub fn logical_compute(&self) -> Result<f64> {
        logical_compute(self.params_n, self.tokens_d)
    }

    /// Average power over `horizon` years, MW.
    pub fn mean_field_power(&self, horizon: f64) -> Result<f64> {
        mean_field_power(
            reference_gpu_hours(self)?,
            self.per_gpu_power.unwrap_or(DEFAULT_GPU_POWER_KW),
            horizon,
        )
    }
}

/// `6 · N · D` FLOPs.
pub fn logical_compute(params_n: f64, tokens_d: f64) -> Result<f64> {
    non_negative("params_n", params_n)?;
    non_negative("tokens_d", tokens_d)?;
    Ok(6.0 * params_n * tokens_d)
}

/// GPU-hours on the reference hardware.
pub fn reference_gpu_hours(account: &ModelAccount) -> Result<f64> {
    account.validate()?;
    Ok(account.gpu_hours * account.equivalence_factor)
}

/// Logical FLOPs per reference GPU-hour of `subject`, normalized to
/// `baseline`.
pub fn relative_efficiency(subject: &ModelAccount, baseline: &ModelAccount) -> Result<f64> {
    let per_hour =
        |a: &ModelAccount| -> Result<f64> { Ok(a.logical_compute()? / reference_gpu_hours(a)?) };
    Ok(per_hour(subject)? / per_hour(baseline)?)
}

/// Energy of `gpu_hours` at `per_gpu_power` kW spread evenly over
/// `horizon` years, in MW.
pub fn mean_field_power(gpu_hours: f64, per_gpu_power: f64, horizon: f64) -> Result<f64> {
    positive("gpu_hours", gpu_hours)?;
    positive("per_gpu_power", per_gpu_power)?;
    positive("horizon", horizon)?;
    Ok(gpu_hours * per_gpu_power / (horizon * HOURS_PER_YEAR) / 1000.0)
}

/// Instantaneous draw of `gpus` devices, MW.
pub fn peak_power(gpus: f64, per_gpu_power: f64) -> Result<f64> {
    positive("gpus", gpus)?;
    positive("per_gpu_power", per_gpu_power)?;
    Ok(gpus * per_gpu_power / 1000.0)
}

/// `κ = α / (α + β)`.
pub fn kappa_from_exponents(alpha: f64, beta: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    non_negative("beta", beta)?;
    Ok(alpha / (alpha + beta))
}

/// `L(N, D) = A·N^(−α) + B·D^(−β) + E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSurface {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub e_floor: f64,
}

impl LossSurface {
    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        positive("b", self.b)?;
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        non_negative("e_floor", self.e_floor)?;
        Ok(())
    }

    pub fn loss(&self, n: f64, d: f64) -> f64 {
        self.a * n.powf(-self.alpha) + self.b * d.powf(-self.beta) + self.e_floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub n_star: f64,
    pub d_star: f64,
    pub loss: f64,
}

impl Allocation {
    /// Relative gap in `α·A·N^(−α) = β·B·D^(−β)`.
    pub fn stationarity_residual(&self, surface: &LossSurface) -> f64 {
        let lhs = surface.alpha * surface.a * self.n_star.powf(-surface.alpha);
        let rhs = surface.beta * surface.b * self.d_star.powf(-surface.beta);
        (lhs - rhs).abs() / lhs
    }
}

/// Minimizes the surface under `6·N·D = C`:
/// `N* = (αA/(βB))^(1/(α+β)) · K^(β/(α+β))`, `D* = K/N*`, `K = C/6`.
pub fn optimal_allocation(surface: &LossSurface, compute_c: f64) -> Result<Allocation> {
    surface.validate()?;
    positive("compute_c", compute_c)?;
    let LossSurface {
        a, b, alpha, beta, ..
    } = *surface;
    let sum = alpha + beta;
    let k = compute_c / 6.0;
    // in logs to keep large budgets finite
    let ln_n = ((alpha * a) / (beta * b)).ln() / sum + (beta / sum) * k.ln();
    let n_star = ln_n.exp();
    let d_star = k / n_star;
    if !n_star.is_finite() || !d_star.is_finite() || n_star == 0.0 || d_star == 0.0 {
        return Err(domain("compute_c", compute_c, "allocation overflows"));
    }
    Ok(Allocation {
        n_star,
        d_star,
        loss: surface.loss(n_star, d_star),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Magnitude of the least-squares slope of `ln L*` against `ln C`.
    pub exponent: f64,
    /// Set when the surface has an irreducible floor, which bends the fit.
    pub floor_present: bool,
}

/// Fits the power-law exponent of the compute-optimal loss over `c_grid`.
pub fn optimal_loss_exponent_check(surface: &LossSurface, c_grid: &[f64]) -> Result<ExponentFit> {
    surface.validate()?;
    if c_grid.len() < 2 {
        return Err(Error::Empty("compute grid needs at least two points"));
    }
    for &c in c_grid {
        positive("compute_c", c)?;
    }
    let lo = c_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c_grid.iter().copied().fold(0.0, f64::max);
    if hi / lo < 1e3 {
        return Err(domain("c_grid", hi / lo, "must span at least 3 decades"));
    }
    let pts = c_grid
        .iter()
        .map(|&c| Ok((c.ln(), optimal_allocation(surface, c)?.loss.ln())))
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(ExponentFit {
        exponent: finite("exponent", -sxy / sxx)?,
        floor_present: surface.e_floor > 0.0,
    })
}

pub fn deepseek_v3() -> ModelAccount {
    ModelAccount::new("DeepSeek-V3", 671e9, 14.8e12, 2.78e6, H800_TO_H100)
}

pub fn llama3_405b() -> ModelAccount {
    ModelAccount::new("Llama 3 (405B)", 405e9, 2.0e12, 30.84e6, 1.0)
}

/// One row of the accounting table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountRow {
    pub name: String,
    pub params_n: f64,
    pub tokens_d: f64,
    pub logical_compute: f64,
    pub reference_gpu_hours: f64,
    pub relative_efficiency: f64,
}

/// Table rows with the last account as the efficiency baseline.
pub fn account_table(accounts: &[ModelAccount]) -> Result<Vec<AccountRow>> {
    let baseline = accounts
        .last()
        .ok_or(Error::Empty("account list must not be empty"))?;
    accounts
        .iter()
        .map(|a| {
            Ok(AccountRow {
                name: a.name.clone(),
                params_n: a.params_n,
                tokens_d: a.tokens_d,
                logical_compute: a.logical_compute()?,
                reference_gpu_hours: reference_gpu_hours(a)?,
                relative_efficiency: relative_efficiency(a, baseline)?,
            })
        })
        .collect()
}
