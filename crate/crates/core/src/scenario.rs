//! Multi-year planning scenarios.
//!
//! Every scenario spends one initial year on its own fleet. Measured against
//! a reference fleet that defines `C0`, the first year gives
//! `1 + ΔC/C0 = initial_fleet / baseline_fleet`, so the post-year baseline
//! loss is `L0 = L_init · (initial/baseline)^(−κ)`. From there the
//! relative-loss dynamics decide how long the target loss takes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::scaling::{sample_trajectory, ScalingConfig, TrajectorySeries};
use crate::solve::{space_unfold_fleet, time_to_target, Branch};

const TRAJECTORY_SAMPLES: usize = 121;
const TRAJECTORY_OVERSHOOT: f64 = 1.2;

/// Cap applied by front ends that accept scenario lists.
pub const MAX_SCENARIOS: usize = 100;

/// Values published alongside each built-in scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperReported {
    pub initial_gpus: f64,
    pub l0: f64,
    pub relative_loss: f64,
    /// Approximate time to the target as published, in years.
    pub time_years: f64,
}

/// A named planning case. Serialized form is the scenario file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub initial_fleet: u64,
    /// Reference cluster whose one-year run defines `C0`.
    pub baseline_fleet: u64,
    pub gamma: f64,
    pub kappa: f64,
    /// Loss before the first training year, nats/token.
    pub l_init: f64,
    pub target_loss: f64,
    #[serde(skip)]
    pub paper_reported: Option<PaperReported>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        positive("initial_fleet", self.initial_fleet as f64)?;
        positive("baseline_fleet", self.baseline_fleet as f64)?;
        ScalingConfig::new(self.kappa, self.gamma)?;
        positive("l_init", self.l_init)?;
        positive("target_loss", self.target_loss)?;
        Ok(())
    }

    /// Lower-case, dash-separated form of the name, used for preset lookup.
    pub fn slug(&self) -> String {
        self.name.to_lowercase().replace(' ', "-")
    }
}

/// Where `L0` and the required ratio come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    /// Computed from the fleet ratio.
    #[default]
    Formula,
    /// The published `(L0, R)` pair where the scenario carries one.
    PaperReported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub initial_fleet: u64,
    pub baseline_fleet: u64,
    pub gamma: f64,
    pub kappa: f64,
    pub source: ValueSource,
    /// Post-first-year baseline loss used for the solve.
    pub l0: f64,
    /// `L0` from the fleet-ratio formula, kept for side-by-side display.
    pub l0_formula: f64,
    pub required_ratio: f64,
    /// Loss actually targeted, `l0 · required_ratio`.
    pub target_loss: f64,
    /// Years after the first year.
    pub time_to_target: f64,
    /// Including the front-loaded first year.
    pub calendar_years: f64,
    pub branch: Branch,
    pub residual: f64,
    /// The first year alone already reaches the target.
    pub target_already_met: bool,
    /// GPUs needed to reach the target within the first year at γ = 0.
    pub static_fleet_requirement: f64,
    pub trajectory: TrajectorySeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_reported: Option<PaperReported>,
}

/// `L_init · (initial_fleet / baseline_fleet)^(−κ)`.
pub fn initial_loss(
    l_init: f64,
    initial_fleet: f64,
    baseline_fleet: f64,
    kappa: f64,
) -> Result<f64> {
    positive("l_init", l_init)?;
    positive("initial_fleet", initial_fleet)?;
    positive("baseline_fleet", baseline_fleet)?;
    positive("kappa", kappa)?;
    Ok(l_init * (initial_fleet / baseline_fleet).powf(-kappa))
}

/// Runs a scenario with fleet-ratio values.
pub fn run_scenario(s: &Scenario) -> Result<ScenarioResult> {
    run_scenario_with(s, ValueSource::Formula)
}

pub fn run_scenario_with(s: &Scenario, source: ValueSource) -> Result<ScenarioResult> {
    s.validate()?;
    let l0_formula = initial_loss(
        s.l_init,
        s.initial_fleet as f64,
        s.baseline_fleet as f64,
        s.kappa,
    )?;
    let (l0, required_ratio, target_loss) = match (source, &s.paper_reported) {
        (ValueSource::PaperReported, Some(p)) => (p.l0, p.relative_loss, p.l0 * p.relative_loss),
        _ => (l0_formula, s.target_loss / l0_formula, s.target_loss),
    };

    let config = ScalingConfig::new(s.kappa, s.gamma)?.with_l0(l0)?;
    let target_already_met = required_ratio >= 1.0;
    let (time_to_target, residual) = if target_already_met {
        (0.0, 0.0)
    } else {
        let r = time_to_target(&config, required_ratio)?;
        (r.time_to_target, r.residual)
    };

    let t_max = if time_to_target > 0.0 {
        TRAJECTORY_OVERSHOOT * time_to_target
    } else {
        1.0
    };
    let trajectory = sample_trajectory(&config, t_max, TRAJECTORY_SAMPLES)?;
    let static_ratio = (s.target_loss / s.l_init).min(1.0);

    Ok(ScenarioResult {
        name: s.name.clone(),
        initial_fleet: s.initial_fleet,
        baseline_fleet: s.baseline_fleet,
        gamma: s.gamma,
        kappa: s.kappa,
        source,
        l0,
        l0_formula,
        required_ratio,
        target_loss,
        time_to_target,
        calendar_years: 1.0 + time_to_target,
        branch: if s.gamma > 0.0 {
            Branch::Exponential
        } else {
            Branch::Static
        },
        residual,
        target_already_met,
        static_fleet_requirement: space_unfold_fleet(
            s.baseline_fleet as f64,
            s.kappa,
            static_ratio,
        )?,
        trajectory,
        paper_reported: s.paper_reported.clone(),
    })
}

/// Runs every scenario against a shared target loss, sorted by time to
/// target (ties by name).
pub fn compare(
    scenarios: &[Scenario],
    common_target: f64,
    source: ValueSource,
) -> Result<Vec<ScenarioResult>> {
    if scenarios.is_empty() {
        return Err(Error::Empty("scenario list must not be empty"));
    }
    positive("common_target", common_target)?;
    let mut rows = scenarios
        .iter()
        .map(|s| {
            let s = Scenario {
                target_loss: common_target,
                ..s.clone()
            };
            run_scenario_with(&s, source)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(row_order);
    Ok(rows)
}

const KAPPA: f64 = 0.048;
const BASELINE_FLEET: u64 = 100_000;
const TARGET: f64 = 0.68;

fn preset(name: &str, initial_fleet: u64, gamma: f64, paper: PaperReported) -> Scenario {
    Scenario {
        name: name.to_string(),
        initial_fleet,
        baseline_fleet: BASELINE_FLEET,
        gamma,
        kappa: KAPPA,
        l_init: 1.0,
        target_loss: TARGET,
        paper_reported: Some(paper),
    }
}

/// The five reference scenarios, all targeting 0.68 nats/token from
/// `L_init = 1.0` on a 100k-GPU reference fleet.
pub fn presets() -> Vec<Scenario> {
    // Smallest whole fleet that reaches the target inside the first year.
    let space_fleet = space_unfold_fleet(BASELINE_FLEET as f64, KAPPA, TARGET)
        .expect("static preset target is reachable")
        .ceil() as u64;
    vec![
        preset(
            "Unfold in Space",
            space_fleet,
            0.0,
            PaperReported {
                initial_gpus: 3e8,
                l0: 0.68,
                relative_loss: 1.0,
                time_years: 1.0,
            },
        ),
        preset(
            "Unfold in Time",
            BASELINE_FLEET,
            0.0,
            PaperReported {
                initial_gpus: 1e5,
                l0: 1.0,
                relative_loss: 0.68,
                time_years: 3000.0,
            },
        ),
        preset(
            "Baseline",
            BASELINE_FLEET,
            0.5,
            PaperReported {
                initial_gpus: 1e5,
                l0: 1.0,
                relative_loss: 0.68,
                time_years: 20.0,
            },
        ),
        preset(
            "Turtle",
            10_000,
            3.0,
            PaperReported {
                initial_gpus: 1e4,
                l0: 1.12,
                relative_loss: 0.61,
                time_years: 5.0,
            },
        ),
        preset(
            "Hare",
            150_000,
            2.0,
            PaperReported {
                initial_gpus: 1.5e5,
                l0: 0.95,
                relative_loss: 0.71,
                time_years: 5.0,
            },
        ),
    ]
}

/// Looks a preset up by name or slug, case-insensitively.
pub fn find_preset(name: &str) -> Option<Scenario> {
    let key = name.to_lowercase().replace(' ', "-");
    presets().into_iter().find(|s| s.slug() == key)
}

/// Attaches the published values of the preset with the same name, provided
/// the fleets, rates and initial loss match it. The target is not compared
/// since comparisons override it.
pub fn attach_paper_values(s: &mut Scenario) {
    if s.paper_reported.is_some() {
        return;
    }
    if let Some(p) = find_preset(&s.name) {
        let same = p.initial_fleet == s.initial_fleet
            && p.baseline_fleet == s.baseline_fleet
            && p.gamma == s.gamma
            && p.kappa == s.kappa
            && p.l_init == s.l_init;
        if same {
            s.paper_reported = p.paper_reported;
        }
    }
}

/// Orders rows by time, then name.
pub fn row_order(a: &ScenarioResult, b: &ScenarioResult) -> Ordering {
    a.time_to_target
        .total_cmp(&b.time_to_target)
        .then_with(|| a.name.cmp(&b.name))
}
