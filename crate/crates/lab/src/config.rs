//! Scenario documents: TOML with flat dotted keys.
//!
//! ```toml
//! name = "case2"
//! regime = "olg/autarky/exogenous"
//! initial_distribution = [0.01, 1.0]
//! outputs = ["csv", "svg", "summary"]
//! params.tfp = 1.0
//! params.alpha = 0.5
//! params.theta = 0.0
//! params.population = 2
//! olg.max_generations = 200
//! ```

use ineq_core::ramsey::ShootingConfig;
use ineq_core::{
    validate_params, EconomyParams, Family, Market, Regime, Technology, WealthDistribution,
};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{LabError, Result};

/// Ramsey trajectories keep every `sample_every`-th integration step.
pub const DEFAULT_SAMPLE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub csv: bool,
    pub svg: bool,
    pub summary: bool,
}

impl Outputs {
    pub fn all() -> Self {
        Self {
            csv: true,
            svg: true,
            summary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HorizonControls {
    Generations {
        max_generations: usize,
        stop_tol: f64,
    },
    Shooting {
        config: ShootingConfig,
        sample_every: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub regime: Regime,
    pub params: EconomyParams,
    pub initial_distribution: Vec<f64>,
    pub horizon: HorizonControls,
    pub outputs: Outputs,
}

impl ScenarioConfig {
    pub fn distribution(&self) -> Result<WealthDistribution> {
        Ok(WealthDistribution::new(self.initial_distribution.clone())?)
    }
}

/// `family/market/technology`, e.g. `ramsey/market/ak`.
pub fn regime_key(regime: Regime) -> String {
    let family = match regime.family {
        Family::Olg => "olg",
        Family::Ramsey => "ramsey",
    };
    let market = match regime.market {
        Market::CapitalMarket => "market",
        Market::Autarky => "autarky",
    };
    let technology = match regime.technology {
        Technology::Exogenous => "exogenous",
        Technology::EndogenousAk => "ak",
    };
    format!("{family}/{market}/{technology}")
}

/// Accepts [`regime_key`] strings and case labels such as `(2)'`.
pub fn parse_regime(text: &str) -> Option<Regime> {
    let text = text.trim();
    Regime::all()
        .into_iter()
        .find(|r| regime_key(*r) == text || r.label() == text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Spanned<String>,
    regime: Spanned<String>,
    initial_distribution: Spanned<Vec<f64>>,
    outputs: Option<Spanned<Vec<String>>>,
    params: Spanned<RawParams>,
    olg: Option<Spanned<RawOlg>>,
    ramsey: Option<Spanned<RawRamsey>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    tfp: Spanned<f64>,
    alpha: Spanned<f64>,
    theta: Spanned<f64>,
    gamma: Option<Spanned<f64>>,
    population: Spanned<usize>,
    labor_force: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOlg {
    max_generations: Option<Spanned<usize>>,
    stop_tol: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRamsey {
    horizon: Option<Spanned<f64>>,
    dt: Option<Spanned<f64>>,
    bisection_tol: Option<Spanned<f64>>,
    max_iterations: Option<Spanned<usize>>,
    terminal_band: Option<Spanned<f64>>,
    sample_every: Option<Spanned<usize>>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].matches('\n').count() + 1
    }

    fn of<T>(&self, spanned: &Spanned<T>) -> usize {
        self.at(spanned.span().start)
    }
}

fn invalid(field: impl Into<String>, line: usize, message: impl Into<String>) -> LabError {
    LabError::Validation {
        field: field.into(),
        line,
        message: message.into(),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let lines = Lines(text);
    let raw: RawScenario = toml::from_str(text).map_err(|e| LabError::Parse {
        line: e.span().map_or(1, |s| lines.at(s.start)),
        message: e.message().trim().to_string(),
    })?;

    if !valid_name(raw.name.get_ref()) {
        return Err(invalid(
            "name",
            lines.of(&raw.name),
            "use letters, digits, '_', '-' or '.'",
        ));
    }
    let regime = parse_regime(raw.regime.get_ref()).ok_or_else(|| {
        invalid(
            "regime",
            lines.of(&raw.regime),
            format!(
                "`{}` is not family/market/technology with family olg|ramsey, market market|autarky, technology exogenous|ak",
                raw.regime.get_ref()
            ),
        )
    })?;

    let rp = raw.params.get_ref();
    let population = *rp.population.get_ref();
    let mut params = EconomyParams::new(
        *rp.tfp.get_ref(),
        *rp.alpha.get_ref(),
        *rp.theta.get_ref(),
        rp.gamma.as_ref().map_or(1.0, |g| *g.get_ref()),
        population,
    );
    if let Some(l) = &rp.labor_force {
        params = params.with_labor_force(*l.get_ref());
    }
    let params = validate_params(params, regime).map_err(|e| {
        let (field, line) = match &e {
            ineq_core::Error::OutOfRange { field, .. } => {
                let line = match *field {
                    "tfp" => lines.of(&rp.tfp),
                    "alpha" => lines.of(&rp.alpha),
                    "theta" => lines.of(&rp.theta),
                    "gamma" => rp
                        .gamma
                        .as_ref()
                        .map_or(lines.of(&raw.params), |g| lines.of(g)),
                    "labor_force" => rp
                        .labor_force
                        .as_ref()
                        .map_or(lines.of(&rp.population), |l| lines.of(l)),
                    _ => lines.of(&rp.population),
                };
                (format!("params.{field}"), line)
            }
            _ => ("params.tfp".to_string(), lines.of(&rp.tfp)),
        };
        invalid(field, line, e.to_string())
    })?;

    let dist = raw.initial_distribution.get_ref();
    let dist_line = lines.of(&raw.initial_distribution);
    if dist.len() != population {
        return Err(invalid(
            "initial_distribution",
            dist_line,
            format!("{} entries for population {population}", dist.len()),
        ));
    }
    WealthDistribution::new(dist.clone())
        .map_err(|e| invalid("initial_distribution", dist_line, e.to_string()))?;

    let horizon = match regime.family {
        Family::Olg => {
            if let Some(r) = &raw.ramsey {
                return Err(invalid(
                    "ramsey",
                    lines.of(r),
                    "only valid for Ramsey regimes",
                ));
            }
            horizon_olg(raw.olg.as_ref(), &lines)?
        }
        Family::Ramsey => {
            if let Some(o) = &raw.olg {
                return Err(invalid("olg", lines.of(o), "only valid for OLG regimes"));
            }
            horizon_ramsey(raw.ramsey.as_ref(), &lines)?
        }
    };

    let outputs = match &raw.outputs {
        None => Outputs::all(),
        Some(list) => {
            let mut out = Outputs {
                csv: false,
                svg: false,
                summary: false,
            };
            for item in list.get_ref() {
                match item.as_str() {
                    "csv" => out.csv = true,
                    "svg" => out.svg = true,
                    "summary" => out.summary = true,
                    other => {
                        return Err(invalid(
                            "outputs",
                            lines.of(list),
                            format!("unknown output `{other}` (csv, svg, summary)"),
                        ))
                    }
                }
            }
            out
        }
    };

    Ok(ScenarioConfig {
        name: raw.name.into_inner(),
        regime,
        params,
        initial_distribution: dist.clone(),
        horizon,
        outputs,
    })
}

fn horizon_olg(raw: Option<&Spanned<RawOlg>>, lines: &Lines) -> Result<HorizonControls> {
    let mut max_generations = ineq_core::olg::DEFAULT_MAX_GENERATIONS;
    let mut stop_tol = ineq_core::olg::DEFAULT_STOP_TOL;
    if let Some(raw) = raw {
        let raw = raw.get_ref();
        if let Some(m) = &raw.max_generations {
            if *m.get_ref() == 0 {
                return Err(invalid(
                    "olg.max_generations",
                    lines.of(m),
                    "must be at least 1",
                ));
            }
            max_generations = *m.get_ref();
        }
        if let Some(t) = &raw.stop_tol {
            if !(*t.get_ref() > 0.0 && t.get_ref().is_finite()) {
                return Err(invalid("olg.stop_tol", lines.of(t), "must be positive"));
            }
            stop_tol = *t.get_ref();
        }
    }
    Ok(HorizonControls::Generations {
        max_generations,
        stop_tol,
    })
}

fn horizon_ramsey(raw: Option<&Spanned<RawRamsey>>, lines: &Lines) -> Result<HorizonControls> {
    let mut config = ShootingConfig::default();
    let mut sample_every = DEFAULT_SAMPLE_EVERY;
    let Some(table) = raw else {
        return Ok(HorizonControls::Shooting {
            config,
            sample_every,
        });
    };
    let r = table.get_ref();
    if let Some(v) = &r.horizon {
        config.horizon = Some(*v.get_ref());
    }
    if let Some(v) = &r.dt {
        config.dt = *v.get_ref();
    }
    if let Some(v) = &r.bisection_tol {
        config.bisection_tol = *v.get_ref();
    }
    if let Some(v) = &r.max_iterations {
        config.max_iterations = *v.get_ref();
    }
    if let Some(v) = &r.terminal_band {
        config.terminal_band = *v.get_ref();
    }
    if let Some(v) = &r.sample_every {
        if *v.get_ref() == 0 {
            return Err(invalid(
                "ramsey.sample_every",
                lines.of(v),
                "must be at least 1",
            ));
        }
        sample_every = *v.get_ref();
    }
    config.validate().map_err(|e| {
        let key = match &e {
            ineq_core::Error::NonPositiveInput { what, .. } => *what,
            ineq_core::Error::OutOfRange { field, .. } => *field,
            _ => "horizon",
        };
        let line = match key {
            "dt" => r.dt.as_ref().map(|v| lines.of(v)),
            "horizon" => r.horizon.as_ref().map(|v| lines.of(v)),
            "bisection_tol" => r.bisection_tol.as_ref().map(|v| lines.of(v)),
            "max_iterations" => r.max_iterations.as_ref().map(|v| lines.of(v)),
            "terminal_band" => r.terminal_band.as_ref().map(|v| lines.of(v)),
            _ => None,
        };
        invalid(
            format!("ramsey.{key}"),
            line.unwrap_or_else(|| lines.of(table)),
            e.to_string(),
        )
    })?;
    Ok(HorizonControls::Shooting {
        config,
        sample_every,
    })
}

fn float_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical document for `config`; `parse_scenario(&render(c)) == c`.
pub fn render(config: &ScenarioConfig) -> String {
    let p = &config.params;
    let mut outputs = Vec::new();
    if config.outputs.csv {
        outputs.push("\"csv\"");
    }
    if config.outputs.svg {
        outputs.push("\"svg\"");
    }
    if config.outputs.summary {
        outputs.push("\"summary\"");
    }
    let mut doc = format!(
        "name = \"{}\"\nregime = \"{}\"\ninitial_distribution = {}\noutputs = [{}]\n\
         params.tfp = {:?}\nparams.alpha = {:?}\nparams.theta = {:?}\nparams.gamma = {:?}\n\
         params.population = {}\nparams.labor_force = {:?}\n",
        config.name,
        regime_key(config.regime),
        float_list(&config.initial_distribution),
        outputs.join(", "),
        p.tfp,
        p.alpha,
        p.theta,
        p.gamma,
        p.population,
        p.labor_force,
    );
    match &config.horizon {
        HorizonControls::Generations {
            max_generations,
            stop_tol,
        } => {
            doc +=
                &format!("olg.max_generations = {max_generations}\nolg.stop_tol = {stop_tol:?}\n");
        }
        HorizonControls::Shooting {
            config,
            sample_every,
        } => {
            if let Some(h) = config.horizon {
                doc += &format!("ramsey.horizon = {h:?}\n");
            }
            doc += &format!(
                "ramsey.dt = {:?}\nramsey.bisection_tol = {:?}\nramsey.max_iterations = {}\n\
                 ramsey.terminal_band = {:?}\nramsey.sample_every = {}\n",
                config.dt,
                config.bisection_tol,
                config.max_iterations,
                config.terminal_band,
                sample_every
            );
        }
    }
    doc
}
