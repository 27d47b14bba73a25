//! Scenario execution and artifact emission.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use ineq_core::metrics::r_minus_g_series;
use ineq_core::olg::{olg_simulate, olg_steady_state};
use ineq_core::ramsey::{ramsey_steady_state, shoot_saddle_path};
use ineq_core::{Family, SteadyState, Trajectory};

use crate::config::{regime_key, HorizonControls, Outputs, ScenarioConfig};
use crate::error::{LabError, Result};
use crate::svg::{self, Chart, Series, Style};

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "t",
    "household",
    "holding",
    "consumption",
    "output",
    "r",
    "g",
    "gini",
    "cv",
    "r_minus_g",
];
pub const METRICS_COLUMNS: [&str; 7] = ["t", "gini", "cv", "ratio_max_min", "r", "g", "r_minus_g"];

/// A named file body, written under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub name: String,
    pub outputs: Outputs,
    pub trajectory: Trajectory,
    pub trajectory_csv: String,
    pub metrics_csv: String,
    pub svg: String,
    pub summary: String,
}

impl Bundle {
    /// Files selected by the scenario's `outputs`.
    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut out = Vec::new();
        if self.outputs.csv {
            out.push(Artifact {
                file_name: format!("{}_trajectory.csv", self.name),
                contents: self.trajectory_csv.clone(),
            });
            out.push(Artifact {
                file_name: format!("{}_metrics.csv", self.name),
                contents: self.metrics_csv.clone(),
            });
        }
        if self.outputs.svg {
            out.push(Artifact {
                file_name: format!("{}.svg", self.name),
                contents: self.svg.clone(),
            });
        }
        if self.outputs.summary {
            out.push(Artifact {
                file_name: format!("{}_summary.txt", self.name),
                contents: self.summary.clone(),
            });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

/// Command-line adjustments applied on top of a parsed scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub format: Option<Format>,
    /// OLG `stop_tol` or Ramsey `terminal_band`.
    pub tol: Option<f64>,
    /// OLG `max_generations` or Ramsey `max_iterations`.
    pub max_steps: Option<usize>,
}

pub fn apply_overrides(config: &mut ScenarioConfig, o: &Overrides) -> Result<()> {
    if let Some(tol) = o.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(LabError::Usage(format!(
                "--tol must be positive, got {tol}"
            )));
        }
    }
    if o.max_steps == Some(0) {
        return Err(LabError::Usage("--max-steps must be at least 1".into()));
    }
    match &mut config.horizon {
        HorizonControls::Generations {
            max_generations,
            stop_tol,
        } => {
            if let Some(t) = o.tol {
                *stop_tol = t;
            }
            if let Some(m) = o.max_steps {
                *max_generations = m;
            }
        }
        HorizonControls::Shooting { config, .. } => {
            if let Some(t) = o.tol {
                config.terminal_band = t;
            }
            if let Some(m) = o.max_steps {
                config.max_iterations = m;
            }
        }
    }
    if let Some(format) = o.format {
        config.outputs.csv = matches!(format, Format::Csv | Format::Both);
        config.outputs.svg = matches!(format, Format::Svg | Format::Both);
    }
    Ok(())
}

pub fn steady_state(config: &ScenarioConfig) -> Result<SteadyState> {
    Ok(match config.regime.family {
        Family::Olg => olg_steady_state(config.params, config.regime)?,
        Family::Ramsey => ramsey_steady_state(config.params, config.regime)?,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn steady_state_text(config: &ScenarioConfig) -> Result<String> {
    let ss = steady_state(config)?;
    let level = match (ss.holding_star, ss.consumption_star) {
        (Some(h), Some(c)) => format!("holding* = {h}, consumption* = {c}, "),
        _ => "balanced growth (no level target), ".to_string(),
    };
    Ok(format!(
        "steady state {} {}: {level}r* = {}, g* = {}, r* - g* = {}\n",
        ss.regime.label(),
        regime_key(ss.regime),
        ss.interest_star,
        ss.growth_star,
        ss.interest_star - ss.growth_star
    ))
}

fn simulate(config: &ScenarioConfig) -> Result<Trajectory> {
    let dist = config.distribution()?;
    match &config.horizon {
        HorizonControls::Generations {
            max_generations,
            stop_tol,
        } => Ok(olg_simulate(
            &dist,
            config.params,
            config.regime,
            *max_generations,
            *stop_tol,
        )?),
        HorizonControls::Shooting {
            config: shooting,
            sample_every,
        } => {
            let mut traj = shoot_saddle_path(&dist, config.params, config.regime, shooting)?;
            let last = traj.points.len().saturating_sub(1);
            traj.points = traj
                .points
                .into_iter()
                .enumerate()
                .filter(|(i, _)| i % sample_every == 0 || *i == last)
                .map(|(_, p)| p)
                .collect();
            Ok(traj)
        }
    }
}

fn write_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    // writing into memory cannot fail
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// One row per household plus an `agg` row at every recorded time.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut rows = Vec::new();
    for p in &traj.points {
        let t = p.time.to_string();
        for i in 0..p.state.len() {
            let r = p.household_interest.as_ref().map(|v| v[i]);
            let g = p.household_growth.as_ref().map(|v| v[i]);
            rows.push(vec![
                t.clone(),
                i.to_string(),
                p.state[i].to_string(),
                p.consumption[i].to_string(),
                p.output[i].to_string(),
                opt(r),
                opt(g),
                String::new(),
                String::new(),
                opt(r.zip(g).map(|(r, g)| r - g)),
            ]);
        }
        let n = p.consumption.len() as f64;
        rows.push(vec![
            t,
            "agg".into(),
            p.aggregate.mean_holding.to_string(),
            (p.consumption.iter().sum::<f64>() / n).to_string(),
            p.aggregate.mean_output.to_string(),
            opt(p.aggregate.interest),
            opt(p.aggregate.growth),
            p.metrics.gini.to_string(),
            p.metrics.cv.to_string(),
            opt(p.metrics.r_minus_g),
        ]);
    }
    write_csv(&TRAJECTORY_COLUMNS, rows)
}

pub fn metrics_csv(traj: &Trajectory) -> String {
    let rows = traj
        .points
        .iter()
        .map(|p| {
            let m = &p.metrics;
            vec![
                p.time.to_string(),
                m.gini.to_string(),
                m.cv.to_string(),
                m.ratio_max_min.to_string(),
                opt(m.r),
                opt(m.g),
                opt(m.r_minus_g),
            ]
        })
        .collect();
    write_csv(&METRICS_COLUMNS, rows)
}

fn trajectory_chart(config: &ScenarioConfig, traj: &Trajectory) -> String {
    let n = traj.points.first().map_or(0, |p| p.state.len());
    let times = traj.times();
    let mut series: Vec<Series> = (0..n)
        .map(|i| {
            Series::line(
                format!("household {i}"),
                times.iter().copied().zip(traj.household_path(i)).collect(),
            )
        })
        .collect();
    series.push(
        Series::line(
            "mean",
            times.iter().copied().zip(traj.mean_path()).collect(),
        )
        .with_style(Style::Dashed),
    );
    svg::render(&Chart {
        title: format!("{} {}", config.name, config.regime.label()),
        x_label: match config.regime.family {
            Family::Olg => "generation".into(),
            Family::Ramsey => "t".into(),
        },
        y_label: "holding".into(),
        series,
        log_y: config.regime.is_endogenous(),
    })
}

fn summary_text(config: &ScenarioConfig, traj: &Trajectory) -> Result<String> {
    let mut s = format!(
        "scenario {}\nregime {} {}\nhouseholds {}, recorded points {}, converged {}\n",
        config.name,
        config.regime.label(),
        regime_key(config.regime),
        config.params.population,
        traj.len(),
        traj.converged
    );
    s += &steady_state_text(config)?;
    if let Some(last) = traj.last() {
        let holdings: Vec<String> = last
            .state
            .as_slice()
            .iter()
            .map(|h| h.to_string())
            .collect();
        s += &format!(
            "terminal t = {}: mean holding = {}, holdings = [{}], gini = {}, cv = {}\n",
            last.time,
            last.aggregate.mean_holding,
            holdings.join(", "),
            last.metrics.gini,
            last.metrics.cv
        );
    }
    s += &match r_minus_g_series(traj).terminal {
        Some(row) => format!(
            "r - g: r = {}, g = {}, r - g = {}\n",
            row.r, row.g, row.r_minus_g
        ),
        None => "r - g: undefined\n".to_string(),
    };
    Ok(s)
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<Bundle> {
    let trajectory = simulate(config)?;
    Ok(Bundle {
        name: config.name.clone(),
        outputs: config.outputs,
        trajectory_csv: trajectory_csv(&trajectory),
        metrics_csv: metrics_csv(&trajectory),
        svg: trajectory_chart(config, &trajectory),
        summary: summary_text(config, &trajectory)?,
        trajectory,
    })
}

/// Writes through a temporary file in `dir` and renames it into place.
pub fn write_atomic(dir: &Path, file_name: &str, contents: &str) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| LabError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(file_name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(contents.as_bytes()).map_err(io(&target))?;
    tmp.persist(&target).map_err(|e| LabError::Io {
        path: target.clone(),
        source: e.error,
    })?;
    Ok(target)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    artifacts
        .iter()
        .map(|a| write_atomic(dir, &a.file_name, &a.contents))
        .collect()
}
