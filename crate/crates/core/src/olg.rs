//! Overlapping-generations bequest dynamics for cases (1), (2), (1)', (2)'.
//!
//! Each generation has log utility over own consumption and the bequest, so
//! `c_i(t) = (1+θ)·b_i(t)` and the bequest is the fraction `1/(2+θ)` of
//! lifetime income. Capital of generation `t` is the bequest of `t-1`.

use crate::domain::{
    validate_params, EconomyParams, Family, Market, Regime, SteadyState, Technology, Trajectory,
    WealthDistribution,
};
use crate::error::{Error, Result};
use crate::production::{mpk_private, per_capita_output, TechnologyView};

pub const DEFAULT_STOP_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_GENERATIONS: usize = 10_000;

/// One generation transition.
#[derive(Debug, Clone, PartialEq)]
pub struct OlgStepReport {
    pub next: WealthDistribution,
    /// Market: `f'(b̄(t-1))`. Autarky: mean private MPK (diagnostic only).
    pub interest: f64,
    pub savings_rate: f64,
    /// `c_i(t) + b_i(t)`.
    pub income: Vec<f64>,
    pub consumption: Vec<f64>,
    /// Private MPK of each household at its operated capital.
    pub household_interest: Vec<f64>,
    /// `1 + g_i(t) = b_i(t) / b_i(t-1)`.
    pub household_growth: Vec<f64>,
    /// `1 + g(t) = b̄(t) / b̄(t-1)`.
    pub average_growth: f64,
}

fn require_olg(regime: Regime, op: &'static str) -> Result<()> {
    if regime.family != Family::Olg {
        return Err(Error::WrongRegime {
            op,
            regime: regime.label(),
        });
    }
    Ok(())
}

fn view_at(params: EconomyParams, regime: Regime, mean: f64) -> TechnologyView {
    TechnologyView::new(params, regime.technology).at_mean(mean)
}

/// Advances the bequest distribution by one generation.
pub fn olg_step(
    dist: &WealthDistribution,
    params: EconomyParams,
    regime: Regime,
) -> Result<OlgStepReport> {
    require_olg(regime, "olg_step")?;
    let params = validate_params(params, regime)?;
    let s = params.savings_rate();
    let b_bar = dist.mean();
    // Under AK the spillover term is frozen at the current mean.
    let view = view_at(params, regime, b_bar);

    let (income, household_interest, interest) = match regime.market {
        Market::CapitalMarket => {
            // everyone operates b̄ and borrows or lends the difference at r = f'(b̄)
            let f = per_capita_output(b_bar, &view)?;
            let r = mpk_private(b_bar, &view)?;
            let income: Vec<f64> = dist
                .as_slice()
                .iter()
                .map(|&b| f - r * (b_bar - b))
                .collect();
            (income, vec![r; dist.len()], r)
        }
        Market::Autarky => {
            let income = dist
                .as_slice()
                .iter()
                .map(|&b| per_capita_output(b, &view))
                .collect::<Result<Vec<_>>>()?;
            let mpk = dist
                .as_slice()
                .iter()
                .map(|&b| mpk_private(b, &view))
                .collect::<Result<Vec<_>>>()?;
            let r = mpk.iter().sum::<f64>() / mpk.len() as f64;
            (income, mpk, r)
        }
    };

    let next: Vec<f64> = income.iter().map(|y| s * y).collect();
    if let Some((household, &value)) = next.iter().enumerate().find(|(_, b)| **b <= 0.0) {
        return Err(Error::NegativeBequest { household, value });
    }
    let consumption = next.iter().map(|b| (1.0 + params.theta) * b).collect();
    let household_growth = next
        .iter()
        .zip(dist.as_slice())
        .map(|(b1, b0)| b1 / b0)
        .collect();
    let next = WealthDistribution::new(next)?;
    let average_growth = next.mean() / b_bar;
    Ok(OlgStepReport {
        next,
        interest,
        savings_rate: s,
        income,
        consumption,
        household_interest,
        household_growth,
        average_growth,
    })
}

/// Closed-form long-run target.
pub fn olg_steady_state(params: EconomyParams, regime: Regime) -> Result<SteadyState> {
    require_olg(regime, "olg_steady_state")?;
    let p = validate_params(params, regime)?;
    Ok(match regime.technology {
        Technology::Exogenous => {
            let b_star = (p.tfp / (2.0 + p.theta)).powf(1.0 / (1.0 - p.alpha));
            SteadyState {
                holding_star: Some(b_star),
                consumption_star: Some((1.0 + p.theta) * b_star),
                growth_star: 0.0,
                interest_star: p.alpha * (2.0 + p.theta),
                regime,
            }
        }
        Technology::EndogenousAk => SteadyState {
            holding_star: None,
            consumption_star: None,
            growth_star: p.ak_scale() / (2.0 + p.theta) - 1.0,
            interest_star: p.alpha * p.ak_scale(),
            regime,
        },
    })
}

/// Iterates [`olg_step`] until the stopping rule holds or `max_generations`
/// steps have run. Non-convergence is reported through
/// [`Trajectory::converged`], never as an error.
pub fn olg_simulate(
    dist0: &WealthDistribution,
    params: EconomyParams,
    regime: Regime,
    max_generations: usize,
    stop_tol: f64,
) -> Result<Trajectory> {
    require_olg(regime, "olg_simulate")?;
    let params = validate_params(params, regime)?;
    if max_generations < 1 {
        return Err(Error::OutOfRange {
            field: "max_generations",
            reason: "must be at least 1".into(),
        });
    }
    if !(stop_tol > 0.0) {
        return Err(Error::NonPositiveInput {
            what: "stop_tol",
            value: stop_tol,
        });
    }
    let target = olg_steady_state(params, regime)?;

    let mut traj = Trajectory::new(regime);
    let theta = params.theta;
    traj.push(
        0.0,
        dist0.clone(),
        dist0.as_slice().iter().map(|b| (1.0 + theta) * b).collect(),
        dist0.as_slice().iter().map(|b| (2.0 + theta) * b).collect(),
        None,
        None,
        None,
        None,
    );

    let mut dist = dist0.clone();
    for t in 1..=max_generations {
        let rep = olg_step(&dist, params, regime)?;
        let done = match target.holding_star {
            Some(b_star) => rep
                .next
                .as_slice()
                .iter()
                .all(|b| (b - b_star).abs() < stop_tol),
            None => rep.next.max_ratio_deviation() < stop_tol,
        };
        let household_growth = rep.household_growth.iter().map(|x| x - 1.0).collect();
        traj.push(
            t as f64,
            rep.next.clone(),
            rep.consumption,
            rep.income,
            Some(rep.household_interest),
            Some(household_growth),
            Some(rep.interest),
            Some(rep.average_growth - 1.0),
        );
        dist = rep.next;
        if done {
            traj.converged = true;
            break;
        }
    }
    Ok(traj)
}

/// Recursion for the relative position `b_i/b̄` under AK technology.
///
/// Market: `1 + α(x - 1)`. Autarky: `x^α`, where the new position is measured
/// against the trend mean `Ā L^(1-α) b̄/(2+θ)` rather than the realized
/// autarky mean. Both contract towards 1.
pub fn ratio_step(ratio: f64, regime: Regime, alpha: f64) -> Result<f64> {
    if regime.family != Family::Olg || !regime.is_endogenous() {
        return Err(Error::WrongRegime {
            op: "ratio_step",
            regime: regime.label(),
        });
    }
    if !(ratio > 0.0) {
        return Err(Error::NonPositiveInput {
            what: "ratio",
            value: ratio,
        });
    }
    Ok(match regime.market {
        Market::CapitalMarket => 1.0 + alpha * (ratio - 1.0),
        Market::Autarky => ratio.powf(alpha),
    })
}

/// Samples of the scalar exogenous map `b ↦ A·b^α/(2+θ)` for a cobweb plot.
#[derive(Debug, Clone, PartialEq)]
pub struct CobwebData {
    /// `(b, map(b))` pairs; the 45° reference is `(b, b)`.
    pub samples: Vec<(f64, f64)>,
    /// Where `map(b) - b` changes sign, by linear interpolation.
    pub crossing: Option<f64>,
    pub steady_state: f64,
}

pub fn olg_map(params: &EconomyParams, b: f64) -> f64 {
    params.tfp * b.powf(params.alpha) / (2.0 + params.theta)
}

pub fn cobweb_data(
    params: EconomyParams,
    b_min: f64,
    b_max: f64,
    n_points: usize,
) -> Result<CobwebData> {
    let regime = Regime::new(Family::Olg, Market::Autarky, Technology::Exogenous);
    let p = validate_params(params, regime)?;
    if !(b_min > 0.0 && b_max > b_min) {
        return Err(Error::OutOfRange {
            field: "b_min",
            reason: format!("need 0 < b_min < b_max, got [{b_min}, {b_max}]"),
        });
    }
    if n_points < 2 {
        return Err(Error::OutOfRange {
            field: "n_points",
            reason: "need at least 2 samples".into(),
        });
    }
    let step = (b_max - b_min) / (n_points - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..n_points)
        .map(|i| {
            let b = b_min + step * i as f64;
            (b, olg_map(&p, b))
        })
        .collect();
    let crossing = samples.windows(2).find_map(|w| {
        let (b0, m0) = w[0];
        let (b1, m1) = w[1];
        let (d0, d1) = (m0 - b0, m1 - b1);
        if d0 == 0.0 {
            Some(b0)
        } else if d0 * d1 < 0.0 {
            Some(b0 + (b1 - b0) * d0 / (d0 - d1))
        } else {
            None
        }
    });
    let steady_state = olg_steady_state(p, regime)?
        .holding_star
        .expect("exogenous steady state has a level");
    Ok(CobwebData {
        samples,
        crossing,
        steady_state,
    })
}

/// Staircase vertices `(b_t, b_t) → (b_t, b_{t+1}) → (b_{t+1}, b_{t+1}) …`.
pub fn cobweb_path(params: &EconomyParams, b0: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(b0, 0.0)];
    let mut b = b0;
    for _ in 0..steps {
        let next = olg_map(params, b);
        out.push((b, next));
        out.push((next, next));
        b = next;
    }
    out
}
