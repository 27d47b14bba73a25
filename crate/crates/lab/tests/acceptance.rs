//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ineq_core::olg::{olg_simulate, olg_step};
use ineq_core::production::{
    aggregate_output, equal_allocation_is_optimal, per_capita_output, TechnologyView,
};
use ineq_core::ramsey::{integrate, shoot_saddle_path, RamseyState, ShootingConfig};
use ineq_core::value::{
    embodied_labor_values, profit_sign, surplus_value_rate, LeontiefEconomy, Sign,
};
use ineq_core::{EconomyParams, Family, Market, Regime, Technology, WealthDistribution};
use ineq_lab::config::parse_scenario;
use ineq_lab::run::{run_scenario, write_artifacts};
use ineq_lab::sweep::run_sweep;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OLG_MARKET: Regime = Regime::new(Family::Olg, Market::CapitalMarket, Technology::Exogenous);
const OLG_AUTARKY: Regime = Regime::new(Family::Olg, Market::Autarky, Technology::Exogenous);
const OLG_MARKET_AK: Regime =
    Regime::new(Family::Olg, Market::CapitalMarket, Technology::EndogenousAk);
const OLG_AUTARKY_AK: Regime = Regime::new(Family::Olg, Market::Autarky, Technology::EndogenousAk);
const RAMSEY_MARKET_AK: Regime = Regime::new(
    Family::Ramsey,
    Market::CapitalMarket,
    Technology::EndogenousAk,
);
const RAMSEY_AUTARKY: Regime = Regime::new(Family::Ramsey, Market::Autarky, Technology::Exogenous);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn dist(v: &[f64]) -> WealthDistribution {
    WealthDistribution::new(v.to_vec()).unwrap()
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    let detail = detail.into();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    check(elapsed < limit, format!("{elapsed:?} (limit {limit:?})"))
}

fn fig_a2_anchor_points() -> Outcome {
    let view = TechnologyView::exogenous(EconomyParams::new(1.0, 0.5, 0.0, 1.0, 1));
    let expected = [
        (1.0, 1.0),
        (3.0, 3f64.sqrt()),
        (5.0, 5f64.sqrt()),
        (7.0, 7f64.sqrt()),
        (9.0, 3.0),
    ];
    let start = Instant::now();
    let got: Vec<f64> = expected
        .iter()
        .map(|&(k, _)| per_capita_output(k, &view).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let worst = got
        .iter()
        .zip(&expected)
        .map(|(y, (_, e))| (y - e).abs())
        .fold(0.0, f64::max);
    check(worst <= 1e-12, format!("max error {worst:e}"))?;
    within(elapsed, Duration::from_millis(1))
}

fn equal_allocation_optimality() -> Outcome {
    let view = TechnologyView::exogenous(EconomyParams::new(1.0, 0.5, 0.0, 1.0, 2));
    let start = Instant::now();
    let report = equal_allocation_is_optimal(10.0, 2, &view, 0.01).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let y = |a: f64, b: f64| {
        aggregate_output(a, 1.0, &view).unwrap() + aggregate_output(b, 1.0, &view).unwrap()
    };
    let (y55, y37, y19) = (y(5.0, 5.0), y(3.0, 7.0), y(1.0, 9.0));
    let at_half = report.argmax.iter().all(|k| (k - 5.0).abs() < 1e-9);
    check(
        at_half && y55 > y37 && y37 > y19,
        format!("argmax {:?}, outputs {y55} > {y37} > {y19}", report.argmax),
    )?;
    within(elapsed, Duration::from_secs(1))
}

fn olg_steady_state_convergence() -> Outcome {
    let b_star = (1.0f64 / 2.1).powi(2);
    let start = Instant::now();
    let mut worst: (f64, usize) = (0.0, 0);
    for regime in [OLG_MARKET, OLG_AUTARKY] {
        for d in [[1.0, 1.0], [0.01, 1.0], [10.0, 0.2]] {
            let p = EconomyParams::new(1.0, 0.5, 0.1, 1.0, 2);
            let traj = olg_simulate(&dist(&d), p, regime, 200, 1e-9).map_err(|e| e.to_string())?;
            let last = traj.last().unwrap();
            let err = last
                .state
                .as_slice()
                .iter()
                .map(|b| (b - b_star).abs())
                .fold(0.0, f64::max);
            worst = (worst.0.max(err), worst.1.max(traj.len() - 1));
        }
    }
    let elapsed = start.elapsed();
    check(
        worst.0 < 1e-8 && worst.1 <= 200,
        format!(
            "max |b - b*| {:e} after at most {} generations",
            worst.0, worst.1
        ),
    )?;
    within(elapsed, Duration::from_millis(10))
}

fn savings_rate_identity() -> Outcome {
    let mut steps = 0;
    for theta in [0.0, 0.1, 0.25, 0.5, 1.0, 3.0] {
        let regimes: &[Regime] = if theta < 1.0 {
            &[OLG_MARKET, OLG_AUTARKY, OLG_MARKET_AK, OLG_AUTARKY_AK]
        } else {
            &[OLG_MARKET, OLG_AUTARKY]
        };
        for &regime in regimes {
            let p = EconomyParams::new(3.0, 0.4, theta, 1.0, 3);
            let mut d = dist(&[0.5, 1.0, 4.0]);
            for _ in 0..20 {
                let rep = olg_step(&d, p, regime).map_err(|e| e.to_string())?;
                steps += 1;
                if rep.savings_rate.to_bits() != (1.0 / (2.0 + theta)).to_bits() {
                    return Err(format!(
                        "theta {theta} {}: {}",
                        regime.label(),
                        rep.savings_rate
                    ));
                }
                d = rep.next;
            }
        }
    }
    check(true, format!("{steps} steps bitwise equal"))
}

fn ak_market_exact_growth() -> Outcome {
    let p = EconomyParams::new(3.0, 0.5, 0.0, 1.0, 3).with_labor_force(1.0);
    let d0 = dist(&[1.0, 2.0, 6.0]);
    let x0: Vec<f64> = d0.ratios();
    let traj = olg_simulate(&d0, p, OLG_MARKET_AK, 30, 1e-300).map_err(|e| e.to_string())?;
    let (mut growth_err, mut decay_err) = (0.0f64, 0.0f64);
    for (t, pt) in traj.points.iter().enumerate().skip(1) {
        growth_err = growth_err.max((pt.aggregate.growth.unwrap() + 1.0 - 1.5).abs());
        for (x, x0) in pt.state.ratios().iter().zip(&x0) {
            decay_err =
                decay_err.max(((x - 1.0).abs() - 0.5f64.powi(t as i32) * (x0 - 1.0).abs()).abs());
        }
    }
    check(
        growth_err <= 1e-12 && decay_err <= 1e-12,
        format!(
            "{} generations, growth error {growth_err:e}, decay error {decay_err:e}",
            traj.len() - 1
        ),
    )
}

/// Below this ratio deviation the strict growth gap, about `α(1-α)/2·var`,
/// is within a few ulps of 1.5.
const EQUALIZED: f64 = 1e-6;

fn holder_dominance() -> Outcome {
    let p = |n| EconomyParams::new(3.0, 0.5, 0.0, 1.0, n).with_labor_force(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut generations = 0;
    for trial in 0..1000 {
        let n = rng.random_range(2..=6);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        v[0] *= 1.5;
        let d0 = dist(&v);
        let market =
            olg_simulate(&d0, p(n), OLG_MARKET_AK, 25, 1e-300).map_err(|e| e.to_string())?;
        let autarky =
            olg_simulate(&d0, p(n), OLG_AUTARKY_AK, 25, 1e-300).map_err(|e| e.to_string())?;
        for (t, (m, a)) in market
            .points
            .iter()
            .zip(&autarky.points)
            .enumerate()
            .skip(1)
        {
            generations += 1;
            let prev = &autarky.points[t - 1];
            let growth = a.aggregate.growth.unwrap() + 1.0;
            let equalized = prev.state.max_ratio_deviation() < EQUALIZED;
            if (!equalized && growth >= 1.5) || growth > 1.5 * (1.0 + 8.0 * f64::EPSILON) {
                return Err(format!("trial {trial} t {t}: (2)' growth {growth}"));
            }
            if a.aggregate.mean_holding > m.aggregate.mean_holding {
                return Err(format!("trial {trial} t {t}: (2)' mean above (1)'"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(true, format!("{generations} generation pairs"))?;
    within(elapsed, Duration::from_secs(1))
}

fn mean_preserving_spread() -> Outcome {
    let p = EconomyParams::new(3.0, 0.5, 0.1, 1.0, 2);
    let means = [[4.0, 6.0], [3.0, 7.0], [1.0, 9.0]]
        .iter()
        .map(|d| olg_step(&dist(d), p, OLG_AUTARKY_AK).map(|r| r.next.mean()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    check(
        means[0] - means[1] > 1e-12 && means[1] - means[2] > 1e-12,
        format!("next means {means:?}"),
    )
}

fn ramsey_exogenous() -> Outcome {
    let p = |n| EconomyParams::new(1.0, 0.5, 0.05, 1.0, n);
    let cfg = ShootingConfig::default();
    let mut notes = Vec::new();
    for k0 in [25.0, 400.0] {
        let start = Instant::now();
        let traj = shoot_saddle_path(&dist(&[k0]), p(1), RAMSEY_AUTARKY, &cfg)
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let k = traj.last().unwrap().state[0];
        check(
            (k - 100.0).abs() <= 1e-4 * 100.0,
            format!("k0 {k0}: terminal k {k}"),
        )?;
        within(elapsed, Duration::from_secs(5)).map_err(|e| format!("k0 {k0}: {e}"))?;
        notes.push(format!("k0 {k0} -> {k:.6} in {elapsed:.2?}"));
    }
    let start = Instant::now();
    let traj = shoot_saddle_path(&dist(&[25.0, 64.0]), p(2), RAMSEY_AUTARKY, &cfg)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let last = traj.last().unwrap();
    let spread = (last.state[1] - last.state[0]).abs() / last.state.mean();
    check(spread <= 1e-3, format!("two-household spread {spread:e}"))?;
    notes.push(format!(
        "two households spread {spread:.2e} in {elapsed:.2?}"
    ));
    Ok(notes.join("; "))
}

fn golden_rule() -> Outcome {
    let p = EconomyParams::new(3.0, 0.5, 0.1, 2.0, 2).with_labor_force(1.0);
    let traj = shoot_saddle_path(
        &dist(&[1.0, 2.0]),
        p,
        RAMSEY_MARKET_AK,
        &ShootingConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let g0 = traj.points[0].metrics.gini;
    let (mut g_err, mut rule_err, mut gini_err) = (0.0f64, 0.0f64, 0.0f64);
    for pt in &traj.points {
        let (r, g) = (pt.aggregate.interest.unwrap(), pt.aggregate.growth.unwrap());
        g_err = g_err.max((g - 0.7).abs());
        rule_err = rule_err.max((r - (0.1 + 2.0 * g)).abs());
        gini_err = gini_err.max((pt.metrics.gini - g0).abs());
    }
    check(
        g_err <= 1e-10 && rule_err <= 1e-10 && gini_err <= 1e-6,
        format!("|g - 0.7| {g_err:e}, |r - (θ+γg)| {rule_err:e}, gini drift {gini_err:e}"),
    )
}

fn rk4_order() -> Outcome {
    let p = EconomyParams::new(1.0, 0.5, 0.05, 1.0, 1);
    let saddle = shoot_saddle_path(
        &dist(&[25.0]),
        p,
        RAMSEY_AUTARKY,
        &ShootingConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let s0 = RamseyState::new(0.0, dist(&[25.0]), saddle.points[0].consumption.clone()).unwrap();
    let horizon = 20.0;
    let run = |dt: f64| {
        let steps = (horizon / dt).round() as usize;
        integrate(&s0, dt, steps, p, RAMSEY_AUTARKY).map(|v| v.last().unwrap().clone())
    };
    let dts = [1.0, 0.5, 0.25];
    let reference = run(dts[2] / 100.0).map_err(|e| e.to_string())?;
    let errors = dts
        .iter()
        .map(|&dt| {
            run(dt).map(|s| {
                (s.holdings[0] - reference.holdings[0]).abs()
                    + (s.consumption[0] - reference.consumption[0]).abs()
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    check(
        orders.iter().all(|q| (3.5..=4.5).contains(q)),
        format!("errors {errors:?}, estimated orders {orders:.3?}"),
    )
}

fn value_theory() -> Outcome {
    let corn = LeontiefEconomy::corn(0.5, 1.0, 0.3).map_err(|e| e.to_string())?;
    let v = embodied_labor_values(&corn).map_err(|e| e.to_string())?[0];
    let e = surplus_value_rate(&corn).map_err(|e| e.to_string())?;
    check(
        (v - 2.0).abs() < 1e-12 && (e - 0.4).abs() < 1e-12 && profit_sign(&corn) == Sign::Positive,
        format!("corn v {v}, e {e}"),
    )?;
    let start = Instant::now();
    let mut notes = vec![format!("corn v {v}, e {e}, profit positive")];
    for n in [2, 3] {
        let report = run_sweep(1000, n, 42).map_err(|e| e.to_string())?;
        let (f, g) = (report.fmt_counterexamples(), report.gcet_counterexamples());
        check(
            f == 0 && g == 0,
            format!("n {n}: FMT {f}, GCET {g} counterexamples"),
        )?;
        notes.push(format!("n {n}: 0 FMT, 0 GCET"));
    }
    within(start.elapsed(), Duration::from_secs(2))?;
    Ok(notes.join("; "))
}

const SCENARIOS: [&str; 3] = [
    r#"name = "det_olg"
regime = "olg/autarky/ak"
initial_distribution = [1.0, 2.0, 3.0]
params.tfp = 3.0
params.alpha = 0.5
params.theta = 0.1
params.population = 3
"#,
    r#"name = "det_olg_market"
regime = "olg/market/exogenous"
initial_distribution = [0.01, 1.0]
params.tfp = 1.0
params.alpha = 0.5
params.theta = 0.1
params.population = 2
"#,
    r#"name = "det_ramsey"
regime = "ramsey/market/ak"
initial_distribution = [1.0, 2.0]
params.tfp = 3.0
params.alpha = 0.5
params.theta = 0.1
params.gamma = 2.0
params.population = 2
params.labor_force = 1.0
"#,
];

fn determinism() -> Outcome {
    let mut files = 0;
    for doc in SCENARIOS {
        let config = parse_scenario(doc).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let bundle = run_scenario(&config).map_err(|e| e.to_string())?;
            let written =
                write_artifacts(dir.path(), &bundle.artifacts()).map_err(|e| e.to_string())?;
            let csv: Vec<Vec<u8>> = written
                .iter()
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .map(|p| std::fs::read(p).unwrap())
                .collect();
            bytes.push(csv);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("{} differs between runs", config.name));
        }
        files += bytes[0].len();
    }
    check(
        true,
        format!("{files} CSV files byte-identical across reruns"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("fig-a2 anchor points", fig_a2_anchor_points),
        ("equal-allocation optimality", equal_allocation_optimality),
        ("olg steady state", olg_steady_state_convergence),
        ("savings-rate identity", savings_rate_identity),
        ("(1)' exact mean growth", ak_market_exact_growth),
        ("hoelder dominance", holder_dominance),
        ("mean-preserving spread", mean_preserving_spread),
        ("ramsey exogenous", ramsey_exogenous),
        ("golden rule", golden_rule),
        ("rk4 order", rk4_order),
        ("value theory", value_theory),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
