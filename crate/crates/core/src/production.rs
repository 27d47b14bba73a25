//! Cobb-Douglas and AK production, private vs social marginal products, and
//! the equal-allocation optimality check.
//!
//! Under AK the aggregate is `Y = Ā·K·L^(1-α)`, but a single household sees
//! `y_i = Ā·L^(1-α)·k̄^(1-α)·k_i^α` with the economy mean `k̄` taken as given.
//! [`TechnologyView`] carries that frozen mean so private quantities never
//! silently internalize the spillover.

use crate::domain::{EconomyParams, Technology, WealthDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechnologyView {
    pub params: EconomyParams,
    pub technology: Technology,
    /// Economy-wide mean capital `k̄`, held fixed by individual decisions.
    pub context_mean: Option<f64>,
}

impl TechnologyView {
    pub fn new(params: EconomyParams, technology: Technology) -> Self {
        Self {
            params,
            technology,
            context_mean: None,
        }
    }

    pub fn exogenous(params: EconomyParams) -> Self {
        Self::new(params, Technology::Exogenous)
    }

    pub fn endogenous(params: EconomyParams, context_mean: f64) -> Self {
        Self::new(params, Technology::EndogenousAk).at_mean(context_mean)
    }

    /// Freezes the economy mean at `k_bar`.
    pub fn at_mean(mut self, k_bar: f64) -> Self {
        self.context_mean = Some(k_bar);
        self
    }

    fn mean(&self) -> Result<f64> {
        let m = self.context_mean.ok_or(Error::MissingContextMean)?;
        positive("context_mean", m)?;
        Ok(m)
    }
}

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositiveInput { what, value })
    }
}

/// Aggregate output `Y(K, L)`.
pub fn aggregate_output(capital: f64, labor: f64, view: &TechnologyView) -> Result<f64> {
    positive("capital", capital)?;
    positive("labor", labor)?;
    let p = &view.params;
    Ok(match view.technology {
        Technology::Exogenous => p.tfp * capital.powf(p.alpha) * labor.powf(1.0 - p.alpha),
        Technology::EndogenousAk => p.tfp * capital * labor.powf(1.0 - p.alpha),
    })
}

/// Output of one household operating capital `k_i`.
pub fn per_capita_output(k_i: f64, view: &TechnologyView) -> Result<f64> {
    positive("k_i", k_i)?;
    let p = &view.params;
    Ok(match view.technology {
        Technology::Exogenous => p.tfp * k_i.powf(p.alpha),
        Technology::EndogenousAk => {
            let k_bar = view.mean()?;
            p.ak_scale() * k_bar.powf(1.0 - p.alpha) * k_i.powf(p.alpha)
        }
    })
}

/// Marginal product of capital as perceived by the household (`k̄` fixed).
pub fn mpk_private(k_i: f64, view: &TechnologyView) -> Result<f64> {
    positive("k_i", k_i)?;
    let p = &view.params;
    Ok(match view.technology {
        Technology::Exogenous => p.alpha * p.tfp * k_i.powf(p.alpha - 1.0),
        Technology::EndogenousAk => {
            let k_bar = view.mean()?;
            p.alpha * p.ak_scale() * (k_bar / k_i).powf(1.0 - p.alpha)
        }
    })
}

/// `∂Y/∂K` for the economy as a whole.
pub fn mpk_social(view: &TechnologyView) -> Result<f64> {
    let p = &view.params;
    match view.technology {
        Technology::Exogenous => {
            let k_bar = view.mean()?;
            Ok(p.alpha * p.tfp * k_bar.powf(p.alpha - 1.0))
        }
        Technology::EndogenousAk => Ok(p.ak_scale()),
    }
}

/// Total output `Σ y_i` of a capital allocation.
pub fn allocation_output(dist: &WealthDistribution, view: &TechnologyView) -> Result<f64> {
    dist.as_slice()
        .iter()
        .map(|&k| per_capita_output(k, view))
        .sum()
}

/// Result of the exhaustive allocation search.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    pub argmax: Vec<f64>,
    pub best_grid_output: f64,
    pub equal_output: f64,
    /// `equal_output - best_grid_output`; never negative for concave technology.
    pub equal_surplus: f64,
    /// The argmax lies within one grid step of `K/L` in every coordinate.
    pub argmax_is_equal_split: bool,
    pub allocations_checked: usize,
}

/// Default search step: `100·L` grid points over `K`.
pub fn default_grid_step(capital: f64, households: usize) -> f64 {
    capital / (100.0 * households as f64)
}

/// Enumerates every positive grid allocation of `capital` over `households`
/// and reports the output-maximizing one next to the equal split.
pub fn equal_allocation_is_optimal(
    capital: f64,
    households: usize,
    view: &TechnologyView,
    grid_step: f64,
) -> Result<AllocationReport> {
    if view.technology != Technology::Exogenous {
        return Err(Error::WrongRegime {
            op: "equal_allocation_is_optimal",
            regime: "EndogenousAK".into(),
        });
    }
    positive("capital", capital)?;
    positive("grid_step", grid_step)?;
    if households < 1 {
        return Err(Error::NonPositiveInput {
            what: "households",
            value: 0.0,
        });
    }
    let limit = capital / (10.0 * households as f64);
    if grid_step > limit {
        return Err(Error::GridTooCoarse {
            step: grid_step,
            limit,
        });
    }

    let units = (capital / grid_step).round() as usize;
    let mut current = vec![0usize; households];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut checked = 0usize;
    search(
        0,
        units,
        &mut current,
        &mut |alloc: &[usize]| -> Result<()> {
            checked += 1;
            let mut y = 0.0;
            for (i, &u) in alloc.iter().enumerate() {
                // last household absorbs any rounding of K/step
                let k = if i + 1 == alloc.len() {
                    capital - grid_step * (units - u) as f64
                } else {
                    grid_step * u as f64
                };
                y += per_capita_output(k, view)?;
            }
            if best.as_ref().is_none_or(|(b, _)| y > *b) {
                best = Some((y, alloc.to_vec()));
            }
            Ok(())
        },
    )?;

    let (best_output, best_units) = best.ok_or(Error::GridTooCoarse {
        step: grid_step,
        limit,
    })?;
    let last = households - 1;
    let argmax: Vec<f64> = best_units
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            if i == last {
                capital - grid_step * (units - u) as f64
            } else {
                grid_step * u as f64
            }
        })
        .collect();
    let share = capital / households as f64;
    let equal_output = households as f64 * per_capita_output(share, view)?;
    let argmax_is_equal_split = argmax
        .iter()
        .all(|&k| (k - share).abs() <= grid_step * (1.0 + 1e-9));
    Ok(AllocationReport {
        argmax,
        best_grid_output: best_output,
        equal_output,
        equal_surplus: equal_output - best_output,
        argmax_is_equal_split,
        allocations_checked: checked,
    })
}

// Visits every composition of `remaining` units into the unfilled slots,
// each slot getting at least one unit.
fn search<F>(slot: usize, remaining: usize, current: &mut [usize], visit: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    let slots_left = current.len() - slot;
    if slots_left == 1 {
        if remaining >= 1 {
            current[slot] = remaining;
            visit(current)?;
        }
        return Ok(());
    }
    for u in 1..=remaining.saturating_sub(slots_left - 1) {
        current[slot] = u;
        search(slot + 1, remaining - u, current, visit)?;
    }
    Ok(())
}
