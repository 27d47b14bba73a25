//! Shared domain types: parameters, regimes, wealth distributions and
//! recorded trajectories.

use std::fmt;

use crate::error::{Error, Result};
use crate::metrics::MetricsRow;

/// Default positivity floor for household holdings.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Technology and preference parameters of one economy.
///
/// `population` is the number of unit-labor households. `labor_force` is the
/// aggregate labor `L` entering the AK scale term `Ā·L^(1-α)`; it equals the
/// household count unless a scenario decouples the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyParams {
    /// `A` under exogenous technology, `Ā` under AK.
    pub tfp: f64,
    pub alpha: f64,
    /// Subjective discount rate, per generation (OLG) or per unit time (Ramsey).
    pub theta: f64,
    /// Relative risk aversion; only the Ramsey family uses it.
    pub gamma: f64,
    pub population: usize,
    pub labor_force: f64,
}

impl EconomyParams {
    pub fn new(tfp: f64, alpha: f64, theta: f64, gamma: f64, population: usize) -> Self {
        Self {
            tfp,
            alpha,
            theta,
            gamma,
            population,
            labor_force: population as f64,
        }
    }

    pub fn with_labor_force(mut self, labor_force: f64) -> Self {
        self.labor_force = labor_force;
        self
    }

    /// `Ā·L^(1-α)`: the social marginal product of capital under AK.
    pub fn ak_scale(&self) -> f64 {
        self.tfp * self.labor_force.powf(1.0 - self.alpha)
    }

    /// Savings rate out of lifetime income for log-utility OLG households.
    pub fn savings_rate(&self) -> f64 {
        1.0 / (2.0 + self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Olg,
    Ramsey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Market {
    CapitalMarket,
    Autarky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technology {
    Exogenous,
    EndogenousAk,
}

/// One of the eight benchmark economies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Regime {
    pub family: Family,
    pub market: Market,
    pub technology: Technology,
}

impl Regime {
    pub const fn new(family: Family, market: Market, technology: Technology) -> Self {
        Self {
            family,
            market,
            technology,
        }
    }

    pub fn all() -> [Regime; 8] {
        use Family::*;
        use Market::*;
        use Technology::*;
        [
            Regime::new(Olg, CapitalMarket, Exogenous),
            Regime::new(Olg, Autarky, Exogenous),
            Regime::new(Ramsey, CapitalMarket, Exogenous),
            Regime::new(Ramsey, Autarky, Exogenous),
            Regime::new(Olg, CapitalMarket, EndogenousAk),
            Regime::new(Olg, Autarky, EndogenousAk),
            Regime::new(Ramsey, CapitalMarket, EndogenousAk),
            Regime::new(Ramsey, Autarky, EndogenousAk),
        ]
    }

    /// Case number 1-4; AK variants carry a prime in [`Regime::label`].
    pub fn case_number(&self) -> u8 {
        match (self.family, self.market) {
            (Family::Olg, Market::CapitalMarket) => 1,
            (Family::Olg, Market::Autarky) => 2,
            (Family::Ramsey, Market::CapitalMarket) => 3,
            (Family::Ramsey, Market::Autarky) => 4,
        }
    }

    pub fn label(&self) -> String {
        let prime = match self.technology {
            Technology::Exogenous => "",
            Technology::EndogenousAk => "'",
        };
        format!("({}){}", self.case_number(), prime)
    }

    pub fn is_endogenous(&self) -> bool {
        self.technology == Technology::EndogenousAk
    }

    pub fn is_market(&self) -> bool {
        self.market == Market::CapitalMarket
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn out_of_range(field: &'static str, reason: impl Into<String>) -> Error {
    Error::OutOfRange {
        field,
        reason: reason.into(),
    }
}

/// Checks every parameter bound plus the regime-conditional growth condition.
pub fn validate_params(params: EconomyParams, regime: Regime) -> Result<EconomyParams> {
    let p = &params;
    if !(p.tfp.is_finite() && p.tfp > 0.0) {
        return Err(out_of_range("tfp", format!("{} is not > 0", p.tfp)));
    }
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(out_of_range(
            "alpha",
            format!("{} is not in (0, 1)", p.alpha),
        ));
    }
    if !(p.theta.is_finite() && p.theta >= 0.0) {
        return Err(out_of_range("theta", format!("{} is not >= 0", p.theta)));
    }
    if !(p.gamma.is_finite() && p.gamma > 0.0) {
        return Err(out_of_range("gamma", format!("{} is not > 0", p.gamma)));
    }
    if p.population < 1 {
        return Err(out_of_range("population", "must be at least 1"));
    }
    if !(p.labor_force.is_finite() && p.labor_force >= 1.0) {
        return Err(out_of_range(
            "labor_force",
            format!("{} is not >= 1", p.labor_force),
        ));
    }
    if regime.family == Family::Olg && regime.is_endogenous() && p.tfp <= 2.0 + p.theta {
        return Err(Error::GrowthConditionViolated {
            tfp: p.tfp,
            bound: 2.0 + p.theta,
        });
    }
    Ok(params)
}

/// Per-household holdings: bequests `b_i` (OLG) or capital/assets (Ramsey).
#[derive(Debug, Clone, PartialEq)]
pub struct WealthDistribution {
    holdings: Vec<f64>,
}

impl WealthDistribution {
    pub fn new(holdings: Vec<f64>) -> Result<Self> {
        Self::with_floor(holdings, POSITIVITY_FLOOR)
    }

    /// Like [`WealthDistribution::new`] with a caller-chosen positivity floor.
    pub fn with_floor(holdings: Vec<f64>, floor: f64) -> Result<Self> {
        if holdings.is_empty() {
            return Err(Error::InvalidDistribution("no households".into()));
        }
        if let Some((i, x)) = holdings
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x > floor))
        {
            return Err(Error::InvalidDistribution(format!(
                "holding {i} = {x} is not above the floor {floor:e}"
            )));
        }
        Ok(Self { holdings })
    }

    pub fn equal(value: f64, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.holdings
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.holdings
    }

    pub fn len(&self) -> usize {
        self.holdings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holdings.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.holdings.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.holdings.len() as f64
    }

    /// Holdings relative to the mean, `x_i / x̄`.
    pub fn ratios(&self) -> Vec<f64> {
        let m = self.mean();
        self.holdings.iter().map(|x| x / m).collect()
    }

    /// `max_i |x_i / x̄ - 1|`.
    pub fn max_ratio_deviation(&self) -> f64 {
        self.ratios()
            .into_iter()
            .map(|r| (r - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for WealthDistribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.holdings[i]
    }
}

/// Economy-wide quantities recorded at one time index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub mean_holding: f64,
    pub mean_output: f64,
    /// `r(t)`. Under autarky this is the mean private MPK, a diagnostic
    /// rather than a market price. `None` where undefined (OLG t = 0).
    pub interest: Option<f64>,
    /// Net average growth `g(t)`.
    pub growth: Option<f64>,
}

/// One recorded time index of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub state: WealthDistribution,
    pub consumption: Vec<f64>,
    /// Household income (OLG, Ramsey market) or own production (Ramsey autarky).
    pub output: Vec<f64>,
    pub household_interest: Option<Vec<f64>>,
    pub household_growth: Option<Vec<f64>>,
    pub aggregate: AggregateRow,
    pub metrics: MetricsRow,
}

/// Time-indexed record of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub regime: Regime,
    pub points: Vec<TrajectoryPoint>,
    /// Whether the stopping rule (steady state, ray or terminal band) was met.
    pub converged: bool,
}

impl Trajectory {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            points: Vec::new(),
            converged: false,
        }
    }

    /// Appends a point; the distribution metrics are computed from the state.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        time: f64,
        state: WealthDistribution,
        consumption: Vec<f64>,
        output: Vec<f64>,
        household_interest: Option<Vec<f64>>,
        household_growth: Option<Vec<f64>>,
        interest: Option<f64>,
        growth: Option<f64>,
    ) {
        let n = state.len();
        debug_assert_eq!(consumption.len(), n);
        debug_assert_eq!(output.len(), n);
        let aggregate = AggregateRow {
            mean_holding: state.mean(),
            mean_output: output.iter().sum::<f64>() / n as f64,
            interest,
            growth,
        };
        let metrics = MetricsRow::from_distribution(&state, interest, growth);
        self.points.push(TrajectoryPoint {
            time,
            state,
            consumption,
            output,
            household_interest,
            household_growth,
            aggregate,
            metrics,
        });
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.time).collect()
    }

    pub fn mean_path(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.aggregate.mean_holding)
            .collect()
    }

    /// Holdings of household `i` over time.
    pub fn household_path(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.state[i]).collect()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }
}

/// Closed-form long-run target of a regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// `b*` or `k*`; `None` on a balanced-growth ray where levels grow forever.
    pub holding_star: Option<f64>,
    pub consumption_star: Option<f64>,
    /// Net growth rate `g*`.
    pub growth_star: f64,
    pub interest_star: f64,
    pub regime: Regime,
}

#[cfg(test)]
mod tests {
    use super::*;

    const OLG_AUT_EXO: Regime = Regime::new(Family::Olg, Market::Autarky, Technology::Exogenous);
    const OLG_MKT_AK: Regime =
        Regime::new(Family::Olg, Market::CapitalMarket, Technology::EndogenousAk);

    #[test]
    fn interior_params_validate() {
        let p = EconomyParams::new(1.0, 0.5, 0.1, 2.0, 2);
        assert_eq!(validate_params(p, OLG_AUT_EXO), Ok(p));
    }

    #[test]
    fn growth_condition_checked_for_endogenous_olg() {
        let p = EconomyParams::new(1.5, 0.5, 0.0, 2.0, 2);
        assert!(matches!(
            validate_params(p, OLG_MKT_AK),
            Err(Error::GrowthConditionViolated { .. })
        ));
        // boundary is excluded
        let p = EconomyParams::new(2.0, 0.5, 0.0, 2.0, 2);
        assert!(validate_params(p, OLG_MKT_AK).is_err());
        // Ramsey AK has no such condition
        let ramsey = Regime::new(
            Family::Ramsey,
            Market::CapitalMarket,
            Technology::EndogenousAk,
        );
        assert!(validate_params(p, ramsey).is_ok());
    }

    #[test]
    fn alpha_boundaries_rejected() {
        for alpha in [0.0, 1.0, 1.2, f64::NAN] {
            let p = EconomyParams::new(1.0, alpha, 0.1, 2.0, 2);
            assert!(matches!(
                validate_params(p, OLG_AUT_EXO),
                Err(Error::OutOfRange { field: "alpha", .. })
            ));
        }
    }

    #[test]
    fn other_bounds_name_their_field() {
        let base = EconomyParams::new(1.0, 0.5, 0.1, 2.0, 2);
        let cases = [
            (EconomyParams { tfp: 0.0, ..base }, "tfp"),
            (
                EconomyParams {
                    theta: -0.1,
                    ..base
                },
                "theta",
            ),
            (EconomyParams { gamma: 0.0, ..base }, "gamma"),
            (
                EconomyParams {
                    population: 0,
                    ..base
                },
                "population",
            ),
            (base.with_labor_force(0.5), "labor_force"),
        ];
        for (p, name) in cases {
            match validate_params(p, OLG_AUT_EXO) {
                Err(Error::OutOfRange { field, .. }) => assert_eq!(field, name),
                other => panic!("{name}: {other:?}"),
            }
        }
    }

    #[test]
    fn validation_is_idempotent() {
        let p = EconomyParams::new(3.0, 0.3, 0.2, 1.5, 4);
        let once = validate_params(p, OLG_MKT_AK).unwrap();
        assert_eq!(validate_params(once, OLG_MKT_AK), Ok(once));
    }

    #[test]
    fn endogenous_olg_growth_factor_exceeds_one() {
        for (tfp, theta, alpha, l) in [(2.01, 0.0, 0.5, 1), (3.0, 0.9, 0.1, 5), (5.0, 2.5, 0.9, 2)]
        {
            let p = EconomyParams::new(tfp, alpha, theta, 1.0, l);
            let p = validate_params(p, OLG_MKT_AK).unwrap();
            assert!(p.ak_scale() / (2.0 + p.theta) > 1.0);
        }
    }

    #[test]
    fn labels_cover_all_eight_cases() {
        let labels: Vec<String> = Regime::all().iter().map(Regime::label).collect();
        assert_eq!(
            labels,
            ["(1)", "(2)", "(3)", "(4)", "(1)'", "(2)'", "(3)'", "(4)'"]
        );
    }

    #[test]
    fn distribution_rejects_non_positive_entries() {
        assert!(WealthDistribution::new(vec![1.0, 0.0]).is_err());
        assert!(WealthDistribution::new(vec![1.0, -2.0]).is_err());
        assert!(WealthDistribution::new(vec![]).is_err());
        assert!(WealthDistribution::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(WealthDistribution::with_floor(vec![1e-13], 1e-14).is_ok());
        let d = WealthDistribution::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(d.mean(), 2.0);
        assert_eq!(d.max_ratio_deviation(), 0.5);
    }
}
