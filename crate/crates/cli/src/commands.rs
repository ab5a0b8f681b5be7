use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use scaling_horizon::accounting::{deepseek_v3, llama3_405b};
use scaling_horizon::scenario::attach_paper_values;
use scaling_horizon::solve::first_order_sensitivity;
use scaling_horizon::{
    account_table, compare, presets, run_scenario_with, sample_trajectory, sensitivity_slope,
    time_to_target, time_to_target_perturbed, ModelAccount, Perturbation, ScalingConfig, Scenario,
    ScenarioResult, TrajectorySeries, ValueSource,
};
use scaling_horizon_service::SolveResponse;

use crate::error::{CliError, CliResult};
use crate::render::{json, pairs, Format, Table};
use crate::{AccountArgs, EvalArgs, OutputArgs, ScenarioArgs, SolveArgs};

/// Reads a JSON file holding either one `T` or an array of them.
pub fn read_list<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let raw = fs::read_to_string(path).map_err(|e| CliError::io(path, &e))?;
    let parsed = if raw.trim_start().starts_with('[') {
        serde_json::from_str(&raw)
    } else {
        serde_json::from_str(&raw).map(|one| vec![one])
    };
    parsed.map_err(|e| CliError::json(path, &e))
}

pub fn eval(a: &EvalArgs, out: &OutputArgs) -> CliResult<String> {
    let mut config = ScalingConfig::new(a.kappa, a.gamma)?;
    if let Some(l0) = a.l0 {
        config = config.with_l0(l0)?;
    }
    let series = match a.t_max {
        Some(t_max) => sample_trajectory(&config, t_max, a.samples)?,
        None => TrajectorySeries::at_times(&config, &a.t)?,
    };
    if series.underflow {
        eprintln!("warning: relative loss underflowed to the smallest normal value at some times");
    }
    Ok(match out.format {
        Format::Json => json(&series),
        Format::Text if series.points.len() == 1 => {
            let p = series.points[0];
            let mut items = vec![
                ("t_years", out.g(p.t_years)),
                ("relative_loss", out.g(p.relative_loss)),
            ];
            if a.l0.is_some() {
                items.push(("loss", out.g(p.loss)));
            }
            pairs(&items)
        }
        format => {
            let mut table = Table::new(["t_years", "relative_loss", "loss"]);
            for p in &series.points {
                table.push(vec![
                    out.g(p.t_years),
                    out.g(p.relative_loss),
                    out.g(p.loss),
                ]);
            }
            table.render(format)
        }
    })
}

pub fn solve(a: &SolveArgs, out: &OutputArgs) -> CliResult<String> {
    let config = ScalingConfig::new(a.kappa, a.gamma)?;
    let solve = match a.tau {
        Some(tau) => time_to_target_perturbed(&config, a.target, Perturbation::new(tau)?)?,
        None => time_to_target(&config, a.target)?,
    };
    let response = SolveResponse {
        sensitivity_slope: a
            .sensitivity
            .then(|| sensitivity_slope(&config, a.target))
            .transpose()?,
        first_order_slope: (a.sensitivity && a.gamma > 0.0)
            .then(|| first_order_sensitivity(a.gamma))
            .transpose()?,
        solve,
    };
    if out.format == Format::Json {
        return Ok(json(&response));
    }
    let s = &response.solve;
    let mut items = vec![
        ("time_to_target", out.g(s.time_to_target)),
        ("target", out.g(s.target)),
        ("branch", branch_name(s)),
        ("residual", out.g(s.residual)),
    ];
    if let Some(tau) = s.tau {
        items.push(("tau", out.g(tau)));
    }
    if let Some(slope) = response.sensitivity_slope {
        items.push(("sensitivity_slope", out.g(slope)));
    }
    if let Some(slope) = response.first_order_slope {
        items.push(("first_order_slope", out.g(slope)));
    }
    Ok(match out.format {
        Format::Csv => {
            let mut table = Table::new(items.iter().map(|(k, _)| *k));
            table.push(items.into_iter().map(|(_, v)| v).collect());
            table.to_csv()
        }
        _ => pairs(&items),
    })
}

fn branch_name(s: &scaling_horizon::SolveResult) -> String {
    serde_json::to_value(s.branch)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Built-in presets followed by any scenarios found in `dir`.
pub fn catalogue(dir: Option<&Path>) -> CliResult<Vec<Scenario>> {
    let mut all = presets();
    if let Some(dir) = dir {
        let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, &e))?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for file in files {
            all.extend(read_list::<Scenario>(&file)?);
        }
    }
    Ok(all)
}

fn select_presets(name: &str, catalogue: Vec<Scenario>) -> CliResult<Vec<Scenario>> {
    if name.eq_ignore_ascii_case("all") {
        return Ok(catalogue);
    }
    let key = name.to_lowercase().replace(' ', "-");
    let names: Vec<String> = catalogue.iter().map(Scenario::slug).collect();
    match catalogue.into_iter().find(|s| s.slug() == key) {
        Some(s) => Ok(vec![s]),
        None => Err(CliError::Usage(format!(
            "unknown preset '{name}'; valid presets: all, {}",
            names.join(", ")
        ))),
    }
}

pub fn scenario(a: &ScenarioArgs, out: &OutputArgs) -> CliResult<String> {
    let source = if a.paper_values {
        ValueSource::PaperReported
    } else {
        ValueSource::Formula
    };
    let prepare = |mut list: Vec<Scenario>| {
        if a.paper_values {
            list.iter_mut().for_each(attach_paper_values);
        }
        list
    };
    let rows = if let Some(path) = &a.compare {
        let list = prepare(read_list(path)?);
        compare(&list, a.target.unwrap_or(0.68), source)?
    } else {
        let list = match (&a.file, &a.preset) {
            (Some(path), _) => prepare(read_list(path)?),
            (None, Some(name)) => select_presets(name, catalogue(a.preset_dir.as_deref())?)?,
            (None, None) => unreachable!("clap requires a scenario source"),
        };
        if list.is_empty() {
            return Err(CliError::Input("no scenarios to run".into()));
        }
        list.into_iter()
            .map(|mut s| {
                if let Some(target) = a.target {
                    s.target_loss = target;
                }
                run_scenario_with(&s, source)
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(match out.format {
        Format::Json => json(&rows),
        format => scenario_table(&rows, out).render(format),
    })
}

fn scenario_table(rows: &[ScenarioResult], out: &OutputArgs) -> Table {
    let mut table = Table::new([
        "scenario",
        "initial_gpus",
        "gamma",
        "l0",
        "l0_formula",
        "l0_paper",
        "required_ratio",
        "ratio_paper",
        "time_to_target",
        "calendar_years",
        "paper_years",
    ]);
    let paper = |f: fn(&scaling_horizon::scenario::PaperReported) -> f64, r: &ScenarioResult| {
        r.paper_reported
            .as_ref()
            .map(|p| out.g(f(p)))
            .unwrap_or_else(|| "-".into())
    };
    for r in rows {
        table.push(vec![
            r.name.clone(),
            r.initial_fleet.to_string(),
            out.g(r.gamma),
            out.g(r.l0),
            out.g(r.l0_formula),
            paper(|p| p.l0, r),
            out.g(r.required_ratio),
            paper(|p| p.relative_loss, r),
            out.g(r.time_to_target),
            out.g(r.calendar_years),
            paper(|p| p.time_years, r),
        ]);
    }
    table
}

pub fn account(a: &AccountArgs, out: &OutputArgs) -> CliResult<String> {
    let accounts: Vec<ModelAccount> = match &a.file {
        Some(path) => read_list(path)?,
        None => vec![deepseek_v3(), llama3_405b()],
    };
    let rows = account_table(&accounts)?;
    if out.format == Format::Json {
        return Ok(json(&rows));
    }
    let mut table = Table::new([
        "model",
        "params_n",
        "tokens_d",
        "logical_compute",
        "reference_gpu_hours",
        "relative_efficiency",
    ]);
    for r in &rows {
        table.push(vec![
            r.name.clone(),
            out.g(r.params_n),
            out.g(r.tokens_d),
            out.g(r.logical_compute),
            out.g(r.reference_gpu_hours),
            out.g(r.relative_efficiency),
        ]);
    }
    Ok(table.render(out.format))
}
