//! Data series behind the three figures, one row per point in long format.

use serde_json::{Map, Value};

use scaling_horizon::{
    horizon_grid, sample_trajectory, time_to_target_perturbed, Perturbation, ScalingConfig,
};

use crate::error::CliResult;
use crate::render::{json, Format, Table};
use crate::OutputArgs;

const KAPPA: f64 = 0.048;
const TARGET: f64 = 0.68;

enum Cell {
    Label(String),
    Num(f64),
}

struct Data {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

fn figure1() -> CliResult<Data> {
    let mut curves: Vec<(f64, f64)> = [0.0, 0.5, 1.0, 2.0, 3.0].map(|g| (KAPPA, g)).to_vec();
    curves.push((0.4, 0.5));
    let mut rows = Vec::new();
    for (kappa, gamma) in curves {
        let series = sample_trajectory(&ScalingConfig::new(kappa, gamma)?, 25.0, 251)?;
        let label = format!("kappa={kappa} gamma={gamma}");
        for p in series.points {
            rows.push(vec![
                Cell::Label(label.clone()),
                Cell::Num(kappa),
                Cell::Num(gamma),
                Cell::Num(p.t_years),
                Cell::Num(p.relative_loss),
                Cell::Num(TARGET),
            ]);
        }
    }
    Ok(Data {
        header: vec![
            "series",
            "kappa",
            "gamma",
            "t_years",
            "relative_loss",
            "reference",
        ],
        rows,
    })
}

fn figure2() -> CliResult<Data> {
    let mut rows = Vec::new();
    for gamma in [0.5, 1.0, 2.0, 3.0] {
        let config = ScalingConfig::new(KAPPA, gamma)?;
        for k in -99..=200 {
            let tau = k as f64 / 100.0;
            let t = time_to_target_perturbed(&config, TARGET, Perturbation::new(tau)?)?;
            rows.push(vec![
                Cell::Label(format!("gamma={gamma}")),
                Cell::Num(gamma),
                Cell::Num(tau),
                Cell::Num(t.time_to_target),
            ]);
        }
    }
    Ok(Data {
        header: vec!["series", "gamma", "tau", "time_to_target"],
        rows,
    })
}

fn figure3() -> CliResult<Data> {
    let gammas: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
    let targets = [0.5, 0.6, 0.7, 0.8, 0.9];
    let grid = horizon_grid(KAPPA, &gammas, &targets)?;
    let mut rows = Vec::new();
    for (gamma, years) in grid.gammas.iter().zip(&grid.years) {
        for (target, t) in grid.targets.iter().zip(years) {
            rows.push(vec![Cell::Num(*gamma), Cell::Num(*target), Cell::Num(*t)]);
        }
    }
    Ok(Data {
        header: vec!["gamma", "target", "time_to_target"],
        rows,
    })
}

/// Renders a figure as CSV (text and csv formats) or as a JSON array of
/// row objects at full precision.
pub fn render(id: u8, out: &OutputArgs) -> CliResult<String> {
    let data = match id {
        1 => figure1()?,
        2 => figure2()?,
        _ => figure3()?,
    };
    if out.format == Format::Json {
        let rows: Vec<Value> = data
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = data
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| {
                        let v = match c {
                            Cell::Label(s) => Value::from(s.as_str()),
                            Cell::Num(x) => Value::from(*x),
                        };
                        (h.to_string(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        return Ok(json(&rows));
    }
    let mut table = Table::new(data.header.iter().copied());
    for row in &data.rows {
        table.push(
            row.iter()
                .map(|c| match c {
                    Cell::Label(s) => s.clone(),
                    Cell::Num(x) => out.g(*x),
                })
                .collect(),
        );
    }
    Ok(table.to_csv())
}
