//! Figure reproduction: data CSVs plus SVG line charts (surfaces as CSV only).

use std::str::FromStr;

use ineq_core::olg::{cobweb_data, cobweb_path, olg_simulate};
use ineq_core::production::{aggregate_output, per_capita_output, TechnologyView};
use ineq_core::{
    EconomyParams, Family, Market, Regime, Technology, Trajectory, WealthDistribution,
};

use crate::config::{regime_key, ScenarioConfig};
use crate::error::{LabError, Result};
use crate::run::Artifact;
use crate::svg::{self, Chart, Series, Style};

/// Artifact defaults for the growth figures (the source gives no numbers).
pub const FIG_TFP: f64 = 3.0;
pub const FIG_ALPHA: f64 = 0.5;
pub const FIG_THETA: f64 = 0.1;
pub const FIG_GENERATIONS: usize = 10;

const R1P: Regime = Regime::new(Family::Olg, Market::CapitalMarket, Technology::EndogenousAk);
const R2P: Regime = Regime::new(Family::Olg, Market::Autarky, Technology::EndogenousAk);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig1,
    Fig2,
    FigA1,
    FigA2,
    FigA3,
    FigA4,
}

impl FromStr for FigureName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig1" => FigureName::Fig1,
            "fig2" => FigureName::Fig2,
            "figA1" => FigureName::FigA1,
            "figA2" => FigureName::FigA2,
            "figA3" => FigureName::FigA3,
            "figA4" => FigureName::FigA4,
            other => return Err(LabError::UnknownFigure(other.to_string())),
        })
    }
}

impl FigureName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FigureName::Fig1 => "fig1",
            FigureName::Fig2 => "fig2",
            FigureName::FigA1 => "figA1",
            FigureName::FigA2 => "figA2",
            FigureName::FigA3 => "figA3",
            FigureName::FigA4 => "figA4",
        }
    }
}

fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn series_csv(series: &[Series], x: &str, y: &str) -> String {
    csv_body(
        &["series", x, y],
        series.iter().flat_map(|s| {
            s.points
                .iter()
                .map(|(a, b)| vec![s.label.clone(), a.to_string(), b.to_string()])
        }),
    )
}

fn fig_params(population: usize) -> EconomyParams {
    EconomyParams::new(FIG_TFP, FIG_ALPHA, FIG_THETA, 1.0, population)
}

fn run_olg(dist: &[f64], regime: Regime) -> Result<Trajectory> {
    let d = WealthDistribution::new(dist.to_vec())?;
    // stop_tol far below reach so every generation is recorded
    Ok(olg_simulate(
        &d,
        fig_params(dist.len()),
        regime,
        FIG_GENERATIONS,
        1e-300,
    )?)
}

/// Households A, B, C from `(1, 2, 3)` under (1)' and (2)'.
pub fn fig1_series() -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for regime in [R1P, R2P] {
        let traj = run_olg(&[1.0, 2.0, 3.0], regime)?;
        for (i, name) in ["A", "B", "C"].iter().enumerate() {
            let points = traj
                .times()
                .into_iter()
                .zip(traj.household_path(i))
                .collect();
            let s = Series::line(format!("household {name} {}", regime.label()), points);
            out.push(if regime == R2P {
                s.with_style(Style::Dashed)
            } else {
                s
            });
        }
    }
    Ok(out)
}

/// Mean paths of `(4, 6)` and `(1, 9)` under (2)'.
pub fn fig2_series() -> Result<Vec<Series>> {
    [[4.0, 6.0], [1.0, 9.0]]
        .iter()
        .map(|dist| {
            let traj = run_olg(dist, R2P)?;
            Ok(Series::line(
                format!("mean of ({}, {})", dist[0], dist[1]),
                traj.times().into_iter().zip(traj.mean_path()).collect(),
            ))
        })
        .collect()
}

/// `y = √k` with the marked points and the three chords.
pub fn fig_a2_series() -> Result<Vec<Series>> {
    let view = TechnologyView::exogenous(EconomyParams::new(1.0, 0.5, 0.0, 1.0, 2));
    let y = |k: f64| per_capita_output(k, &view);
    let curve = (1..=200)
        .map(|i| {
            let k = 0.05 * i as f64;
            Ok((k, y(k)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let marks = [1.0, 3.0, 5.0, 7.0, 9.0]
        .iter()
        .map(|&k| Ok((k, y(k)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![
        Series::line("y = f(k)", curve),
        Series::line("marked points", marks).with_style(Style::Markers),
    ];
    for (label, lo, hi) in [("(a)", 1.0, 9.0), ("(b)", 3.0, 7.0), ("(c)", 5.0, 5.0)] {
        let chord = vec![(lo, y(lo)?), (5.0, 0.5 * (y(lo)? + y(hi)?)), (hi, y(hi)?)];
        out.push(Series::line(format!("chord {label}"), chord).with_style(Style::Dashed));
    }
    Ok(out)
}

pub const COBWEB_SAMPLES: usize = 400;

/// Map, diagonal and staircase for the exogenous OLG map; `None` if the map
/// never crosses the diagonal on the sampled range.
pub fn cobweb_series(
    params: EconomyParams,
    b0: f64,
    steps: usize,
) -> Result<(Vec<Series>, Option<f64>, f64)> {
    let b_star = (params.tfp / (2.0 + params.theta)).powf(1.0 / (1.0 - params.alpha));
    let b_max = 2.0 * b_star.max(b0);
    let data = cobweb_data(params, b_max / COBWEB_SAMPLES as f64, b_max, COBWEB_SAMPLES)?;
    let diagonal = vec![(0.0, 0.0), (b_max, b_max)];
    let series = vec![
        Series::line("b(t+1) = map(b(t))", data.samples.clone()),
        Series::line("45 degree line", diagonal).with_style(Style::Dashed),
        Series::line("path", cobweb_path(&params, b0, steps)),
    ];
    Ok((series, data.crossing, data.steady_state))
}

pub const COBWEB_STEPS: usize = 12;

/// Cobweb for a scenario, started from its mean initial holding.
pub fn cobweb_artifacts(config: &ScenarioConfig) -> Result<Vec<Artifact>> {
    let exogenous_olg =
        config.regime.family == Family::Olg && config.regime.technology == Technology::Exogenous;
    if !exogenous_olg {
        return Err(LabError::Usage(format!(
            "cobweb needs an exogenous OLG regime, got {}",
            regime_key(config.regime)
        )));
    }
    let b0 = config.distribution()?.mean();
    let (s, _, _) = cobweb_series(config.params, b0, COBWEB_STEPS)?;
    Ok(pair(
        &format!("{}_cobweb", config.name),
        series_csv(&s, "b_t", "b_t1"),
        chart("cobweb", "b(t)", "b(t+1)", s, false),
    ))
}

fn surface(technology: Technology) -> Result<String> {
    let view = TechnologyView::new(EconomyParams::new(1.0, 0.5, 0.0, 1.0, 1), technology);
    let grid: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
    let mut rows = Vec::new();
    for &k in &grid {
        for &l in &grid {
            rows.push(vec![
                k.to_string(),
                l.to_string(),
                aggregate_output(k, l, &view)?.to_string(),
            ]);
        }
    }
    Ok(csv_body(&["K", "L", "Y"], rows))
}

fn chart(title: &str, x: &str, y: &str, series: Vec<Series>, log_y: bool) -> String {
    svg::render(&Chart {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        series,
        log_y,
    })
}

fn pair(name: &str, csv: String, svg: String) -> Vec<Artifact> {
    vec![
        Artifact {
            file_name: format!("{name}.csv"),
            contents: csv,
        },
        Artifact {
            file_name: format!("{name}.svg"),
            contents: svg,
        },
    ]
}

pub fn figure(name: FigureName) -> Result<Vec<Artifact>> {
    let id = name.as_str();
    Ok(match name {
        FigureName::Fig1 => {
            let s = fig1_series()?;
            pair(
                id,
                series_csv(&s, "generation", "holding"),
                chart(
                    "(1)' vs (2)' households A, B, C",
                    "generation",
                    "per-capita capital",
                    s,
                    true,
                ),
            )
        }
        FigureName::Fig2 => {
            let s = fig2_series()?;
            pair(
                id,
                series_csv(&s, "generation", "mean_holding"),
                chart(
                    "(2)' equal totals, different spread",
                    "generation",
                    "mean capital",
                    s,
                    true,
                ),
            )
        }
        FigureName::FigA2 => {
            let s = fig_a2_series()?;
            pair(
                id,
                series_csv(&s, "k", "y"),
                chart("y = k^0.5", "k", "y", s, false),
            )
        }
        FigureName::FigA3 => {
            let params = EconomyParams::new(1.0, 0.5, FIG_THETA, 1.0, 1);
            let (s, _, _) = cobweb_series(params, 0.01, COBWEB_STEPS)?;
            pair(
                id,
                series_csv(&s, "b_t", "b_t1"),
                chart("cobweb", "b(t)", "b(t+1)", s, false),
            )
        }
        FigureName::FigA1 => vec![Artifact {
            file_name: format!("{id}.csv"),
            contents: surface(Technology::Exogenous)?,
        }],
        FigureName::FigA4 => vec![Artifact {
            file_name: format!("{id}.csv"),
            contents: surface(Technology::EndogenousAk)?,
        }],
    })
}
