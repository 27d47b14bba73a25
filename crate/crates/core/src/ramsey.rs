//! Continuous-time dynasties with CRRA utility for cases (3), (4), (3)', (4)'.
//!
//! Households follow the Euler equation `ċ_i/c_i = (MPK_i - θ)/γ`. Under a
//! capital market everyone operates the mean capital `k̄` and faces
//! `r = f'(k̄)`; under autarky each household works its own capital.
//! Saddle paths are found by shooting on initial consumption and integrating
//! with classical RK4.

use crate::domain::{
    validate_params, EconomyParams, Family, Market, Regime, SteadyState, Technology, Trajectory,
    WealthDistribution,
};
use crate::error::{Error, Result};
use crate::production::{mpk_private, per_capita_output, TechnologyView};

/// Number of times a failing RK4 step is retried with half the step size.
pub const MAX_DT_HALVINGS: u32 = 6;
/// Required agreement between `Σ a_i` and `L·k̄` in the market decomposition.
pub const AGGREGATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyState {
    pub time: f64,
    /// `k_i` under autarky, assets `a_i` under a capital market.
    pub holdings: WealthDistribution,
    pub consumption: Vec<f64>,
}

impl RamseyState {
    pub fn new(time: f64, holdings: WealthDistribution, consumption: Vec<f64>) -> Result<Self> {
        if consumption.len() != holdings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} holdings but {} consumption entries",
                holdings.len(),
                consumption.len()
            )));
        }
        if let Some(&c) = consumption.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::NonPositiveInput {
                what: "consumption",
                value: c,
            });
        }
        Ok(Self {
            time,
            holdings,
            consumption,
        })
    }

    fn packed(&self) -> Vec<f64> {
        let mut x = self.holdings.as_slice().to_vec();
        x.extend_from_slice(&self.consumption);
        x
    }

    fn unpack(time: f64, x: &[f64]) -> Result<Self> {
        let n = x.len() / 2;
        let holdings =
            WealthDistribution::new(x[..n].to_vec()).map_err(|e| Error::StateLeftDomain {
                time,
                detail: e.to_string(),
            })?;
        Self::new(time, holdings, x[n..].to_vec())
    }
}

/// Solver controls for [`shoot_saddle_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Integration horizon `T`; `None` picks a regime-specific default.
    pub horizon: Option<f64>,
    pub dt: f64,
    /// Relative bracket width at which bisection stops.
    pub bisection_tol: f64,
    pub max_iterations: usize,
    /// Relative distance from the steady state or balanced-growth ray that
    /// counts as arrival.
    pub terminal_band: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            dt: 1e-2,
            bisection_tol: f64::EPSILON,
            max_iterations: 200,
            terminal_band: 1e-4,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |what: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonPositiveInput { what, value: v })
            }
        };
        positive("dt", self.dt)?;
        positive("bisection_tol", self.bisection_tol)?;
        positive("terminal_band", self.terminal_band)?;
        if let Some(h) = self.horizon {
            positive("horizon", h)?;
            if self.dt >= h {
                return Err(Error::OutOfRange {
                    field: "dt",
                    reason: format!("dt = {} must be below the horizon {h}", self.dt),
                });
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::OutOfRange {
                field: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

fn require_ramsey(regime: Regime, op: &'static str) -> Result<()> {
    if regime.family != Family::Ramsey {
        return Err(Error::WrongRegime {
            op,
            regime: regime.label(),
        });
    }
    Ok(())
}

fn left_domain(time: f64, detail: impl Into<String>) -> Error {
    Error::StateLeftDomain {
        time,
        detail: detail.into(),
    }
}

fn check_positive(time: f64, x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        None => Ok(()),
        Some(i) => Err(left_domain(time, format!("entry {i} = {}", x[i]))),
    }
}

/// Per-household quantities implied by a packed state.
struct Evaluation {
    /// Household output (autarky) or income `f(k̄) - r(k̄ - a_i)` (market).
    output: Vec<f64>,
    mpk: Vec<f64>,
    rate: Vec<f64>,
    holdings_dot: Vec<f64>,
}

fn evaluate(x: &[f64], params: &EconomyParams, regime: Regime) -> Result<Evaluation> {
    let n = x.len() / 2;
    let (h, c) = x.split_at(n);
    let k_bar = h.iter().sum::<f64>() / n as f64;
    let view = TechnologyView::new(*params, regime.technology).at_mean(k_bar);
    let (output, mpk) = match regime.market {
        Market::CapitalMarket => {
            let f = per_capita_output(k_bar, &view)?;
            let r = mpk_private(k_bar, &view)?;
            (h.iter().map(|a| f - r * (k_bar - a)).collect(), vec![r; n])
        }
        Market::Autarky => (
            h.iter()
                .map(|&k| per_capita_output(k, &view))
                .collect::<Result<Vec<_>>>()?,
            h.iter()
                .map(|&k| mpk_private(k, &view))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let rate = mpk
        .iter()
        .map(|m| (m - params.theta) / params.gamma)
        .collect();
    let holdings_dot = output.iter().zip(c).map(|(y, c)| y - c).collect();
    Ok(Evaluation {
        output,
        mpk,
        rate,
        holdings_dot,
    })
}

fn field(x: &[f64], params: &EconomyParams, regime: Regime) -> Result<Vec<f64>> {
    let n = x.len() / 2;
    let e = evaluate(x, params, regime)?;
    let mut dx = e.holdings_dot;
    dx.extend(e.rate.iter().zip(&x[n..]).map(|(g, c)| g * c));
    Ok(dx)
}

/// Classical RK4 step; every stage input must stay strictly positive.
fn rk4_packed<F>(x: &[f64], time: f64, dt: f64, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let axpy =
        |a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + a * k).collect() };
    check_positive(time, x)?;
    let k1 = f(x)?;
    let s2 = axpy(0.5 * dt, &k1);
    check_positive(time + 0.5 * dt, &s2)?;
    let k2 = f(&s2)?;
    let s3 = axpy(0.5 * dt, &k2);
    check_positive(time + 0.5 * dt, &s3)?;
    let k3 = f(&s3)?;
    let s4 = axpy(dt, &k3);
    check_positive(time + dt, &s4)?;
    let k4 = f(&s4)?;
    let next: Vec<f64> = (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    check_positive(time + dt, &next)?;
    Ok(next)
}

/// Advances `dt`, splitting the step in halves (recursively, at most
/// [`MAX_DT_HALVINGS`] levels) when a stage leaves the positive orthant.
fn step_with_halving<F>(x: &[f64], time: f64, dt: f64, f: &F, depth: u32) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    match rk4_packed(x, time, dt, f) {
        Ok(next) => Ok(next),
        Err(Error::StateLeftDomain { .. }) if depth < MAX_DT_HALVINGS => {
            let mid = step_with_halving(x, time, 0.5 * dt, f, depth + 1)?;
            step_with_halving(&mid, time + 0.5 * dt, 0.5 * dt, f, depth + 1)
        }
        Err(e) => Err(e),
    }
}

/// Consumption growth rates `ċ_i/c_i` from the Euler equation.
pub fn euler_growth(
    state: &RamseyState,
    params: EconomyParams,
    regime: Regime,
) -> Result<Vec<f64>> {
    require_ramsey(regime, "euler_growth")?;
    let params = validate_params(params, regime)?;
    Ok(evaluate(&state.packed(), &params, regime)?.rate)
}

/// Time derivatives of holdings and consumption.
#[derive(Debug, Clone, PartialEq)]
pub struct RamseyDerivative {
    pub holdings: Vec<f64>,
    pub consumption: Vec<f64>,
}

pub fn ramsey_rhs(
    state: &RamseyState,
    params: EconomyParams,
    regime: Regime,
) -> Result<RamseyDerivative> {
    require_ramsey(regime, "ramsey_rhs")?;
    let params = validate_params(params, regime)?;
    let n = state.holdings.len();
    let mut dx = field(&state.packed(), &params, regime)?;
    let consumption = dx.split_off(n);
    Ok(RamseyDerivative {
        holdings: dx,
        consumption,
    })
}

/// One RK4 step of the joint holdings/consumption system.
pub fn rk4_step(
    state: &RamseyState,
    dt: f64,
    params: EconomyParams,
    regime: Regime,
) -> Result<RamseyState> {
    require_ramsey(regime, "rk4_step")?;
    let params = validate_params(params, regime)?;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveInput {
            what: "dt",
            value: dt,
        });
    }
    let f = |x: &[f64]| field(x, &params, regime);
    let next = rk4_packed(&state.packed(), state.time, dt, &f)?;
    RamseyState::unpack(state.time + dt, &next)
}

/// Integrates `steps` steps of size `dt` from `state`, halving failing steps.
pub fn integrate(
    state: &RamseyState,
    dt: f64,
    steps: usize,
    params: EconomyParams,
    regime: Regime,
) -> Result<Vec<RamseyState>> {
    require_ramsey(regime, "integrate")?;
    let params = validate_params(params, regime)?;
    if !(dt > 0.0) {
        return Err(Error::NonPositiveInput {
            what: "dt",
            value: dt,
        });
    }
    let f = |x: &[f64]| field(x, &params, regime);
    let mut x = state.packed();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    for s in 0..steps {
        let t = state.time + s as f64 * dt;
        x = step_with_halving(&x, t, dt, &f, 0)?;
        out.push(RamseyState::unpack(state.time + (s + 1) as f64 * dt, &x)?);
    }
    Ok(out)
}

/// Closed-form long-run target.
pub fn ramsey_steady_state(params: EconomyParams, regime: Regime) -> Result<SteadyState> {
    require_ramsey(regime, "ramsey_steady_state")?;
    let p = validate_params(params, regime)?;
    match regime.technology {
        Technology::Exogenous => {
            if p.theta == 0.0 {
                return Err(Error::ThetaZeroNoSteadyState);
            }
            let k_star = (p.alpha * p.tfp / p.theta).powf(1.0 / (1.0 - p.alpha));
            Ok(SteadyState {
                holding_star: Some(k_star),
                consumption_star: Some(p.tfp * k_star.powf(p.alpha)),
                growth_star: 0.0,
                interest_star: p.theta,
                regime,
            })
        }
        Technology::EndogenousAk => {
            let r = p.alpha * p.ak_scale();
            let g = (r - p.theta) / p.gamma;
            debug_assert!((r - (p.theta + p.gamma * g)).abs() <= 1e-12 * r.max(1.0));
            Ok(SteadyState {
                holding_star: None,
                consumption_star: None,
                growth_star: g,
                interest_star: r,
                regime,
            })
        }
    }
}

/// Stable and unstable eigenvalues of the saddle linearized at the target:
/// the exogenous steady state, or the equalized AK ray (relative deviations).
fn saddle_rates(p: &EconomyParams, technology: Technology) -> (f64, f64) {
    let (trace, det_neg) = match technology {
        Technology::Exogenous => {
            let k = (p.alpha * p.tfp / p.theta).powf(1.0 / (1.0 - p.alpha));
            let c = p.tfp * k.powf(p.alpha);
            let f2 = -p.alpha * (1.0 - p.alpha) * p.tfp * k.powf(p.alpha - 2.0);
            (p.theta, -c * f2 / p.gamma)
        }
        Technology::EndogenousAk => {
            let b = p.ak_scale();
            let g = (p.alpha * b - p.theta) / p.gamma;
            let chi = b - g;
            (
                p.alpha * b - g,
                chi * p.alpha * b * (1.0 - p.alpha) / p.gamma,
            )
        }
    };
    let root = (trace * trace + 4.0 * det_neg).sqrt();
    (0.5 * (trace - root), 0.5 * (trace + root))
}

// Long enough for the stable mode to shrink `deviation` into the band.
fn convergence_horizon(stable: f64, deviation: f64, band: f64) -> f64 {
    1.2 * (deviation.max(band) / band).ln() / stable.abs()
}

/// Default horizon `T` for a regime and starting distribution.
pub fn default_horizon(
    dist0: &WealthDistribution,
    params: &EconomyParams,
    regime: Regime,
    band: f64,
) -> f64 {
    match (regime.technology, regime.market) {
        (Technology::Exogenous, _) => {
            let k_star =
                (params.alpha * params.tfp / params.theta).powf(1.0 / (1.0 - params.alpha));
            let dev = match regime.market {
                Market::CapitalMarket => (dist0.mean() - k_star).abs() / k_star,
                Market::Autarky => dist0
                    .as_slice()
                    .iter()
                    .map(|k| (k - k_star).abs() / k_star)
                    .fold(0.0, f64::max),
            };
            let (stable, _) = saddle_rates(params, Technology::Exogenous);
            (convergence_horizon(stable, dev, band) + 10.0).clamp(50.0, 500.0)
        }
        (Technology::EndogenousAk, Market::CapitalMarket) => {
            // The ray is reached at t = 0; T only has to expose the unstable
            // c/k mode (rate B - g) while rounding stays far below the band.
            let b = params.ak_scale();
            let chi = b - (params.alpha * b - params.theta) / params.gamma;
            ((band / f64::EPSILON).ln() / (2.0 * chi.max(1e-3))).clamp(1.0, 100.0)
        }
        (Technology::EndogenousAk, Market::Autarky) => {
            let (stable, _) = saddle_rates(params, Technology::EndogenousAk);
            let dev = dist0.max_ratio_deviation();
            (convergence_horizon(stable, dev, band) + 1.0).clamp(1.0, 200.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    TooLow,
    TooHigh,
    /// Entered the terminal band at this step.
    Hit(usize),
}

/// Scalar exogenous Ramsey problem `k̇ = A k^α - c`, `ċ = c (f'(k) - θ)/γ`;
/// also the aggregate of the market economy.
#[derive(Clone)]
struct ScalarProblem<'a> {
    params: &'a EconomyParams,
    k0: f64,
    k_star: f64,
    c_star: f64,
    /// Slope of the stable eigenvector in (k, c) space.
    stable_slope: f64,
    dt: f64,
    steps: usize,
    band: f64,
    /// Earliest step at which arrival in the band counts.
    min_hit: usize,
}

enum Bisected {
    Hit(Vec<[f64; 2]>),
    /// Adjacent floats straddle the saddle path without either shot arriving.
    Bracket(Vec<[f64; 2]>, Vec<[f64; 2]>),
}

/// Relative agreement of the bracketing shots below which the saddle path is
/// re-anchored at their midpoint.
const ANCHOR_TOL: f64 = 1e-9;
const MAX_ANCHORS: usize = 20;

impl<'a> ScalarProblem<'a> {
    fn new(params: &'a EconomyParams, k0: f64, horizon: f64, cfg: &ShootingConfig) -> Self {
        let k_star = (params.alpha * params.tfp / params.theta).powf(1.0 / (1.0 - params.alpha));
        let (stable, _) = saddle_rates(params, Technology::Exogenous);
        Self {
            params,
            k0,
            k_star,
            c_star: params.tfp * k_star.powf(params.alpha),
            stable_slope: params.theta - stable,
            dt: cfg.dt,
            steps: (horizon / cfg.dt).ceil() as usize,
            band: cfg.terminal_band,
            min_hit: 0,
        }
    }

    fn regime() -> Regime {
        Regime::new(Family::Ramsey, Market::Autarky, Technology::Exogenous)
    }

    fn in_band(&self, k: f64, c: f64) -> bool {
        (k - self.k_star).abs() <= self.band * self.k_star
            && (c - self.c_star).abs() <= self.band * self.c_star
    }

    // Below the stable manifold of the linearization means c is too low.
    fn classify_near(&self, k: f64, c: f64) -> Shot {
        if c - self.c_star < self.stable_slope * (k - self.k_star) {
            Shot::TooLow
        } else {
            Shot::TooHigh
        }
    }

    /// Integrates from `(k0, c0)`; with `record`, returns the visited states.
    fn shoot(&self, c0: f64, record: bool) -> (Shot, Vec<[f64; 2]>) {
        let p = self.params;
        let f = |x: &[f64]| field(x, p, Self::regime());
        let mut x = vec![self.k0, c0];
        let mut path = Vec::new();
        if record {
            path.push([x[0], x[1]]);
        }
        if self.min_hit == 0 && self.in_band(x[0], x[1]) {
            return (Shot::Hit(0), path);
        }
        let below = self.k0 < self.k_star * (1.0 - self.band);
        let above = self.k0 > self.k_star * (1.0 + self.band);
        for step in 0..self.steps {
            x = match step_with_halving(&x, step as f64 * self.dt, self.dt, &f, 0) {
                Ok(next) => next,
                // capital collapsing under too much consumption
                Err(_) => return (Shot::TooHigh, path),
            };
            if record {
                path.push([x[0], x[1]]);
            }
            let (k, c) = (x[0], x[1]);
            if self.in_band(k, c) {
                if step + 1 >= self.min_hit {
                    return (Shot::Hit(step + 1), path);
                }
                continue;
            }
            let k_dot = p.tfp * k.powf(p.alpha) - c;
            if below {
                if k > self.k_star {
                    return (Shot::TooLow, path);
                }
                if k_dot < 0.0 {
                    return (Shot::TooHigh, path);
                }
            } else if above {
                if k < self.k_star {
                    return (Shot::TooHigh, path);
                }
                if k_dot > 0.0 {
                    return (Shot::TooLow, path);
                }
            } else if (k - self.k_star).abs() > 0.5 * self.k_star
                || (c - self.c_star).abs() > 0.5 * self.c_star
            {
                return (self.classify_near(k, c), path);
            }
        }
        (self.classify_near(x[0], x[1]), path)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, cfg: &ShootingConfig) -> Result<Bisected> {
        let mut iterations = 0usize;
        loop {
            match self.shoot(hi, false).0 {
                Shot::Hit(_) => return Ok(Bisected::Hit(self.shoot(hi, true).1)),
                Shot::TooHigh => break,
                Shot::TooLow => {}
            }
            lo = lo.max(hi);
            hi *= 2.0;
            iterations += 1;
            if iterations > 60 {
                return Err(Error::ShootingFailed {
                    iterations,
                    detail: "could not bracket initial consumption from above".into(),
                });
            }
        }
        loop {
            match self.shoot(lo, false).0 {
                Shot::Hit(_) => return Ok(Bisected::Hit(self.shoot(lo, true).1)),
                Shot::TooLow => break,
                Shot::TooHigh => {}
            }
            hi = hi.min(lo);
            lo *= 0.5;
            iterations += 1;
            if iterations > 120 {
                return Err(Error::ShootingFailed {
                    iterations,
                    detail: "could not bracket initial consumption from below".into(),
                });
            }
        }
        for _ in 0..cfg.max_iterations {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= cfg.bisection_tol * hi || mid <= lo || mid >= hi {
                break;
            }
            match self.shoot(mid, false).0 {
                Shot::Hit(_) => return Ok(Bisected::Hit(self.shoot(mid, true).1)),
                Shot::TooLow => lo = mid,
                Shot::TooHigh => hi = mid,
            }
        }
        Ok(Bisected::Bracket(
            self.shoot(lo, true).1,
            self.shoot(hi, true).1,
        ))
    }

    /// Bisection on `c(0)`; returns the recorded path that entered the band.
    ///
    /// Over long horizons the unstable root amplifies the last ulp of `c(0)`
    /// beyond the band. When adjacent floats still straddle the saddle path,
    /// the shot restarts from the last state on which both agree.
    fn solve(&self, cfg: &ShootingConfig) -> Result<Vec<[f64; 2]>> {
        let p = self.params;
        let y0 = p.tfp * self.k0.powf(p.alpha);
        let mut stage = self.clone();
        let (mut lo, mut hi) = (1e-9 * y0, 2.0 * y0 + self.c_star);
        let mut path = Vec::new();
        for _ in 0..MAX_ANCHORS {
            let (lo_path, hi_path) = match stage.bisect(lo, hi, cfg)? {
                Bisected::Hit(tail) => {
                    path.extend(tail);
                    return Ok(path);
                }
                Bisected::Bracket(l, h) => (l, h),
            };
            let close = |a: f64, b: f64| (a - b).abs() <= ANCHOR_TOL * a.abs().max(b.abs());
            let agree = lo_path
                .iter()
                .zip(&hi_path)
                .take_while(|(l, h)| close(l[0], h[0]) && close(l[1], h[1]))
                .count();
            if agree < 2 {
                break;
            }
            let anchor = agree - 1;
            path.extend(
                lo_path[..anchor]
                    .iter()
                    .zip(&hi_path[..anchor])
                    .map(|(l, h)| [0.5 * (l[0] + h[0]), 0.5 * (l[1] + h[1])]),
            );
            let (l, h) = (lo_path[anchor], hi_path[anchor]);
            stage.k0 = 0.5 * (l[0] + h[0]);
            let c = 0.5 * (l[1] + h[1]);
            (lo, hi) = (c * (1.0 - 1e-6), c * (1.0 + 1e-6));
            stage.steps -= anchor;
            stage.min_hit = stage.min_hit.saturating_sub(anchor);
        }
        Err(Error::ShootingFailed {
            iterations: cfg.max_iterations,
            detail: format!(
                "path from k0 = {} did not enter the band {:e} around k* = {} within {} steps",
                self.k0, self.band, self.k_star, self.steps
            ),
        })
    }
}

/// Aggregate field of the market economy: the representative household.
fn aggregate_field(k_bar: f64, c_bar: f64, p: &EconomyParams, technology: Technology) -> [f64; 2] {
    match technology {
        Technology::Exogenous => [
            p.tfp * k_bar.powf(p.alpha) - c_bar,
            c_bar * (p.alpha * p.tfp * k_bar.powf(p.alpha - 1.0) - p.theta) / p.gamma,
        ],
        Technology::EndogenousAk => {
            let b = p.ak_scale();
            [b * k_bar - c_bar, c_bar * (p.alpha * b - p.theta) / p.gamma]
        }
    }
}

/// `(f(k̄), r, g)` faced by every household of the market economy.
fn market_prices(k_bar: f64, p: &EconomyParams, technology: Technology) -> (f64, f64, f64) {
    let (f, r) = match technology {
        Technology::Exogenous => (
            p.tfp * k_bar.powf(p.alpha),
            p.alpha * p.tfp * k_bar.powf(p.alpha - 1.0),
        ),
        Technology::EndogenousAk => (p.ak_scale() * k_bar, p.alpha * p.ak_scale()),
    };
    (f, r, (r - p.theta) / p.gamma)
}

/// Field of `(k̄, c̄, d_1, e_1, …, d_n, e_n)` with household gaps
/// `d_i = a_i - k̄`, `e_i = c_i - c̄` under common prices.
fn gap_field(x: &[f64], p: &EconomyParams, technology: Technology) -> Vec<f64> {
    let agg = aggregate_field(x[0], x[1], p, technology);
    let (_, r, g) = market_prices(x[0], p, technology);
    let mut dx = Vec::with_capacity(x.len());
    dx.extend_from_slice(&agg);
    for pair in x[2..].chunks_exact(2) {
        dx.push(r * pair[0] - pair[1]);
        dx.push(g * pair[1]);
    }
    dx
}

fn rk4_free<F>(x: &[f64], dt: f64, f: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let axpy =
        |a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + a * k).collect() };
    let k1 = f(x);
    let k2 = f(&axpy(0.5 * dt, &k1));
    let k3 = f(&axpy(0.5 * dt, &k2));
    let k4 = f(&axpy(dt, &k3));
    (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Aggregate AK market path: bisection on `c̄(0)` until `c̄/k̄` stops drifting.
fn solve_ak_aggregate(
    p: &EconomyParams,
    k0: f64,
    horizon: f64,
    cfg: &ShootingConfig,
) -> Result<Vec<[f64; 2]>> {
    let steps = (horizon / cfg.dt).ceil() as usize;
    let run = |c0: f64, record: bool| -> (f64, Vec<[f64; 2]>) {
        let ratio0 = c0 / k0;
        let mut x = vec![k0, c0];
        let mut path = vec![[k0, c0]];
        let f = |y: &[f64]| aggregate_field(y[0], y[1], p, Technology::EndogenousAk).to_vec();
        for _ in 0..steps {
            x = rk4_free(&x, cfg.dt, &f);
            if record {
                path.push([x[0], x[1]]);
            }
            if !(x[0] > 0.0) {
                return (f64::INFINITY, path);
            }
            let drift = x[1] / x[0] / ratio0 - 1.0;
            if !record && drift.abs() > 0.5 {
                return (drift, path);
            }
        }
        (x[1] / x[0] / ratio0 - 1.0, path)
    };
    let b = p.ak_scale();
    let (mut lo, mut hi) = (1e-12 * b * k0, b * k0);
    for _ in 0..cfg.max_iterations {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= cfg.bisection_tol * hi || mid <= lo || mid >= hi {
            break;
        }
        let drift = run(mid, false).0;
        if drift > 0.0 {
            hi = mid;
        } else if drift < 0.0 {
            lo = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let (drift, path) = run(0.5 * (lo + hi), true);
    if drift.abs() > cfg.terminal_band {
        return Err(Error::ShootingFailed {
            iterations: cfg.max_iterations,
            detail: format!("consumption-capital ratio drifts by {drift:e} over the horizon"),
        });
    }
    Ok(path)
}

fn aggregate_trajectory(
    path: &[[f64; 2]],
    dt: f64,
    p: &EconomyParams,
    regime: Regime,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(regime);
    for (s, &[k, c]) in path.iter().enumerate() {
        let (f, r, g) = market_prices(k, p, regime.technology);
        traj.push(
            s as f64 * dt,
            WealthDistribution::new(vec![k])
                .map_err(|e| left_domain(s as f64 * dt, e.to_string()))?,
            vec![c],
            vec![f],
            Some(vec![r]),
            Some(vec![g]),
            Some(r),
            Some(g),
        );
    }
    traj.converged = true;
    Ok(traj)
}

/// Finds the saddle path from `dist0` and returns the household trajectory.
///
/// * (4): independent scalar bisections per household on `c_i(0)`.
/// * (3), (3)': the aggregate is solved first by bisection, then
///   [`market_decompose`] splits it into households.
/// * (4)': damped Newton on the vector `c(0)` with a finite-difference
///   Jacobian, continued over increasing horizons, with coordinate-wise
///   bisection sweeps as fallback.
pub fn shoot_saddle_path(
    dist0: &WealthDistribution,
    params: EconomyParams,
    regime: Regime,
    config: &ShootingConfig,
) -> Result<Trajectory> {
    require_ramsey(regime, "shoot_saddle_path")?;
    let p = validate_params(params, regime)?;
    config.validate()?;
    if regime.technology == Technology::Exogenous && p.theta == 0.0 {
        return Err(Error::ThetaZeroNoSteadyState);
    }
    let horizon = config
        .horizon
        .unwrap_or_else(|| default_horizon(dist0, &p, regime, config.terminal_band));

    match (regime.market, regime.technology) {
        (Market::Autarky, Technology::Exogenous) => {
            shoot_autarky_exogenous(dist0, &p, regime, horizon, config)
        }
        (Market::CapitalMarket, technology) => {
            let path = match technology {
                Technology::Exogenous => {
                    ScalarProblem::new(&p, dist0.mean(), horizon, config).solve(config)?
                }
                Technology::EndogenousAk => solve_ak_aggregate(&p, dist0.mean(), horizon, config)?,
            };
            let aggregate = aggregate_trajectory(&path, config.dt, &p, regime)?;
            market_decompose(&aggregate, dist0, p, regime)
        }
        (Market::Autarky, Technology::EndogenousAk) => {
            shoot_autarky_ak(dist0, &p, regime, horizon, config)
        }
    }
}

fn push_autarky_point(
    traj: &mut Trajectory,
    time: f64,
    x: &[f64],
    p: &EconomyParams,
    regime: Regime,
) -> Result<()> {
    let n = x.len() / 2;
    let e = evaluate(x, p, regime)?;
    let c = &x[n..];
    let r = e.mpk.iter().sum::<f64>() / n as f64;
    let g = e.rate.iter().zip(c).map(|(g, c)| g * c).sum::<f64>() / c.iter().sum::<f64>();
    let state = WealthDistribution::new(x[..n].to_vec())
        .map_err(|err| left_domain(time, err.to_string()))?;
    traj.push(
        time,
        state,
        c.to_vec(),
        e.output,
        Some(e.mpk),
        Some(e.rate),
        Some(r),
        Some(g),
    );
    Ok(())
}

fn shoot_autarky_exogenous(
    dist0: &WealthDistribution,
    p: &EconomyParams,
    regime: Regime,
    horizon: f64,
    cfg: &ShootingConfig,
) -> Result<Trajectory> {
    let solve = |k0: f64, min_hit: usize| -> Result<Vec<[f64; 2]>> {
        let mut problem = ScalarProblem::new(p, k0, horizon, cfg);
        problem.min_hit = min_hit;
        problem.solve(cfg)
    };
    let mut paths = dist0
        .as_slice()
        .iter()
        .map(|&k0| solve(k0, 0))
        .collect::<Result<Vec<_>>>()?;
    // households are independent; align them on the latest arrival
    for _ in 0..5 {
        let last = paths.iter().map(Vec::len).max().unwrap_or(1) - 1;
        if paths.iter().all(|path| path.len() == last + 1) {
            break;
        }
        for (path, &k0) in paths.iter_mut().zip(dist0.as_slice()) {
            if path.len() != last + 1 {
                *path = solve(k0, last)?;
            }
        }
    }
    let steps = paths.iter().map(Vec::len).min().unwrap_or(1) - 1;
    if paths.iter().any(|path| path.len() != steps + 1) {
        return Err(Error::ShootingFailed {
            iterations: cfg.max_iterations,
            detail: "households did not share the terminal band before the horizon".into(),
        });
    }
    let n = dist0.len();
    let mut traj = Trajectory::new(regime);
    for s in 0..=steps {
        let mut x: Vec<f64> = paths.iter().map(|path| path[s][0]).collect();
        x.extend(paths.iter().map(|path| path[s][1]));
        debug_assert_eq!(x.len(), 2 * n);
        push_autarky_point(&mut traj, s as f64 * cfg.dt, &x, p, regime)?;
    }
    traj.converged = true;
    Ok(traj)
}

struct AkAutarkyProblem<'a> {
    p: &'a EconomyParams,
    regime: Regime,
    k0: Vec<f64>,
    chi: f64,
    dt: f64,
    band: f64,
}

impl AkAutarkyProblem<'_> {
    fn pack(&self, c0: &[f64]) -> Vec<f64> {
        let mut x = self.k0.clone();
        x.extend_from_slice(c0);
        x
    }

    // Relative gap of each c_i/k_i from the ray value B - g.
    fn ratio_residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.k0.len();
        (0..n).map(|i| x[n + i] / x[i] / self.chi - 1.0).collect()
    }

    fn distance(&self, x: &[f64]) -> f64 {
        let n = self.k0.len();
        let k_bar = x[..n].iter().sum::<f64>() / n as f64;
        let equalization = x[..n]
            .iter()
            .map(|k| (k / k_bar - 1.0).abs())
            .fold(0.0, f64::max);
        let ratio = self
            .ratio_residual(x)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max);
        equalization.max(ratio)
    }

    fn terminal(&self, c0: &[f64], steps: usize) -> Option<Vec<f64>> {
        let f = |x: &[f64]| field(x, self.p, self.regime);
        let mut x = self.pack(c0);
        for s in 0..steps {
            x = step_with_halving(&x, s as f64 * self.dt, self.dt, &f, 0).ok()?;
        }
        Some(self.ratio_residual(&x))
    }

    fn norm(r: &[f64]) -> f64 {
        r.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Damped Newton on `c(0)` for a fixed number of steps.
    fn newton(
        &self,
        mut c0: Vec<f64>,
        steps: usize,
        unstable: f64,
        iterations: &mut usize,
        budget: usize,
    ) -> Option<Vec<f64>> {
        let n = c0.len();
        let mut res = self.terminal(&c0, steps)?;
        let fd_rel = (1e-7 * (-unstable * steps as f64 * self.dt).exp()).max(1e-13);
        for _ in 0..50 {
            if Self::norm(&res) <= 1e-13 || *iterations >= budget {
                break;
            }
            *iterations += 1;
            let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let h = fd_rel * c0[j];
                let mut bumped = c0.clone();
                bumped[j] += h;
                let r = self.terminal(&bumped, steps)?;
                for i in 0..n {
                    jac[(i, j)] = (r[i] - res[i]) / h;
                }
            }
            let rhs = nalgebra::DVector::from_iterator(n, res.iter().map(|v| -v));
            let delta = jac.lu().solve(&rhs)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = c0
                    .iter()
                    .zip(delta.iter())
                    .map(|(c, d)| c + lambda * d)
                    .collect();
                if trial.iter().all(|c| *c > 0.0) {
                    if let Some(r) = self.terminal(&trial, steps) {
                        if Self::norm(&r) < Self::norm(&res) {
                            c0 = trial;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Some(c0)
    }

    /// Coordinate-wise bisection sweeps on the sign of each residual.
    fn bisection_sweeps(&self, mut c0: Vec<f64>, steps: usize, cfg: &ShootingConfig) -> Vec<f64> {
        let n = c0.len();
        for _ in 0..20 {
            for i in 0..n {
                let residual_i = |ci: f64, c: &[f64]| -> f64 {
                    let mut trial = c.to_vec();
                    trial[i] = ci;
                    // domain exits come from consuming too much
                    self.terminal(&trial, steps).map_or(f64::INFINITY, |r| r[i])
                };
                let (mut lo, mut hi) = (1e-9 * c0[i], 4.0 * self.chi * self.k0[i]);
                for _ in 0..cfg.max_iterations {
                    let mid = 0.5 * (lo + hi);
                    if hi - lo <= cfg.bisection_tol * hi || mid <= lo || mid >= hi {
                        break;
                    }
                    if residual_i(mid, &c0) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                c0[i] = 0.5 * (lo + hi);
            }
            match self.terminal(&c0, steps) {
                Some(r) if Self::norm(&r) <= 1e-12 => break,
                _ => {}
            }
        }
        c0
    }
}

fn shoot_autarky_ak(
    dist0: &WealthDistribution,
    p: &EconomyParams,
    regime: Regime,
    horizon: f64,
    cfg: &ShootingConfig,
) -> Result<Trajectory> {
    let b = p.ak_scale();
    let g = (p.alpha * b - p.theta) / p.gamma;
    let chi = b - g;
    if !(chi > 0.0) {
        return Err(Error::ShootingFailed {
            iterations: 0,
            detail: format!("no balanced path with positive consumption: B - g = {chi}"),
        });
    }
    let (_, unstable) = saddle_rates(p, Technology::EndogenousAk);
    let unstable = unstable.max(chi);
    let problem = AkAutarkyProblem {
        p,
        regime,
        k0: dist0.as_slice().to_vec(),
        chi,
        dt: cfg.dt,
        band: cfg.terminal_band,
    };
    let total_steps = (horizon / cfg.dt).ceil() as usize;

    // continuation: lengthen the horizon, warm-starting from the last solution
    let mut c0: Vec<f64> = problem.k0.iter().map(|k| chi * k).collect();
    let mut iterations = 0usize;
    let mut steps = ((1.0 / cfg.dt).ceil() as usize).min(total_steps).max(1);
    loop {
        let solved = problem
            .newton(
                c0.clone(),
                steps,
                unstable,
                &mut iterations,
                cfg.max_iterations,
            )
            .filter(|c| {
                problem
                    .terminal(c, steps)
                    .is_some_and(|r| AkAutarkyProblem::norm(&r) <= 1e-9)
            });
        c0 = match solved {
            Some(c) => c,
            None => problem.bisection_sweeps(c0, steps, cfg),
        };
        if steps == total_steps {
            break;
        }
        steps = ((steps as f64 * 1.5).ceil() as usize).min(total_steps);
    }

    let f = |x: &[f64]| field(x, p, regime);
    let mut x = problem.pack(&c0);
    let mut traj = Trajectory::new(regime);
    push_autarky_point(&mut traj, 0.0, &x, p, regime)?;
    let mut step = 0;
    while problem.distance(&x) > problem.band {
        if step >= total_steps {
            return Err(Error::ShootingFailed {
                iterations,
                detail: format!(
                    "distance {:e} from the equalized ray exceeds the band at the horizon",
                    problem.distance(&x)
                ),
            });
        }
        x = step_with_halving(&x, step as f64 * cfg.dt, cfg.dt, &f, 0)?;
        step += 1;
        push_autarky_point(&mut traj, step as f64 * cfg.dt, &x, p, regime)?;
    }
    traj.converged = true;
    Ok(traj)
}

/// Splits a solved market aggregate into households.
///
/// Every household faces the common `r(t)` and the common consumption growth
/// rate `g(t)`, so the gaps `d_i = a_i - k̄` and `e_i = c_i - c̄` obey the linear
/// system `ḋ = r d - e`, `ė = g e`, and a household is pinned by `c_i(0)`.
/// Each `c_i(0)` is found by bisection so that the gap stays bounded relative
/// to the growth trend: at the end of the aggregate path the detrended gap
/// must be stationary, `(r - g) d_i = e_i`. The gaps are integrated along the
/// recorded aggregate, and `Σ a_i = L·k̄` is checked at every step.
pub fn market_decompose(
    aggregate: &Trajectory,
    a0: &WealthDistribution,
    params: EconomyParams,
    regime: Regime,
) -> Result<Trajectory> {
    require_ramsey(regime, "market_decompose")?;
    if regime.market != Market::CapitalMarket {
        return Err(Error::WrongRegime {
            op: "market_decompose",
            regime: regime.label(),
        });
    }
    let p = validate_params(params, regime)?;
    let first = aggregate
        .points
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty aggregate trajectory".into()))?;
    if first.state.len() != 1 {
        return Err(Error::DimensionMismatch(
            "aggregate trajectory must carry a single representative household".into(),
        ));
    }
    let (k_bar0, c_bar0) = (first.state[0], first.consumption[0]);
    let gap0 = (a0.mean() - k_bar0).abs() / k_bar0;
    if gap0 > AGGREGATION_TOL {
        return Err(Error::DecompositionInconsistent {
            time: 0.0,
            gap: gap0,
        });
    }
    let steps = aggregate.len() - 1;
    let dt = if steps > 0 {
        aggregate.points[1].time - first.time
    } else {
        1.0
    };
    let tech = regime.technology;
    let f = |x: &[f64]| gap_field(x, &p, tech);
    let agg_at = |s: usize| {
        (
            aggregate.points[s].state[0],
            aggregate.points[s].consumption[0],
        )
    };

    // advances the gaps one step along the recorded aggregate
    let step = |s: usize, gaps: &[f64]| -> Vec<f64> {
        let (k, c) = agg_at(s);
        let mut x = vec![k, c];
        x.extend_from_slice(gaps);
        rk4_free(&x, dt, &f).split_off(2)
    };

    // Stationarity residual at the end of the path; decreasing in e(0).
    let residual = |d0: f64, e0: f64| -> f64 {
        let mut gaps = vec![d0, e0];
        for s in 0..steps {
            gaps = step(s, &gaps);
        }
        let (_, r, g) = market_prices(agg_at(steps).0, &p, tech);
        (r - g) * gaps[0] - gaps[1]
    };

    let mut gaps = Vec::with_capacity(2 * a0.len());
    for &a_i in a0.as_slice() {
        let d0 = a_i - k_bar0;
        let mut width = c_bar0 + d0.abs() * (1.0 + first.aggregate.interest.unwrap_or(1.0));
        let mut expansions = 0;
        while !(residual(d0, -width) > 0.0 && residual(d0, width) < 0.0) {
            width *= 2.0;
            expansions += 1;
            if expansions > 60 {
                return Err(Error::ShootingFailed {
                    iterations: expansions,
                    detail: format!(
                        "could not bracket consumption of the household with a0 = {a_i}"
                    ),
                });
            }
        }
        let (mut lo, mut hi) = (-width, width);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let r = residual(d0, mid);
            if r > 0.0 {
                lo = mid;
            } else if r < 0.0 {
                hi = mid;
            } else {
                (lo, hi) = (mid, mid);
            }
        }
        let e0 = 0.5 * (lo + hi);
        if !(c_bar0 + e0 > 0.0) {
            return Err(left_domain(
                0.0,
                format!(
                    "household with a0 = {a_i} needs consumption {}",
                    c_bar0 + e0
                ),
            ));
        }
        gaps.push(d0);
        gaps.push(e0);
    }

    let n = a0.len();
    let mut traj = Trajectory::new(regime);
    for s in 0..=steps {
        if s > 0 {
            gaps = step(s - 1, &gaps);
        }
        let time = aggregate.points[s].time;
        let (k_bar, c_bar) = agg_at(s);
        let assets: Vec<f64> = gaps.iter().step_by(2).map(|d| k_bar + d).collect();
        let consumption: Vec<f64> = gaps[1..].iter().step_by(2).map(|e| c_bar + e).collect();
        let gap = (assets.iter().sum::<f64>() - n as f64 * k_bar).abs() / (n as f64 * k_bar);
        if gap > AGGREGATION_TOL {
            return Err(Error::DecompositionInconsistent { time, gap });
        }
        let (fk, r, g) = market_prices(k_bar, &p, tech);
        let income = assets.iter().map(|a| fk - r * (k_bar - a)).collect();
        let state =
            WealthDistribution::new(assets).map_err(|e| left_domain(time, e.to_string()))?;
        check_positive(time, &consumption)?;
        traj.push(
            time,
            state,
            consumption,
            income,
            Some(vec![r; n]),
            Some(vec![g; n]),
            Some(r),
            Some(g),
        );
    }
    traj.converged = aggregate.converged;
    Ok(traj)
}
