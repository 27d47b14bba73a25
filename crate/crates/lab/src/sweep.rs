//! Randomized check of the surplus-value/profit equivalence and of the
//! commodity-value generalization.

use std::fmt::Write;

use ineq_core::value::{fmt_check, gcet_check, random_economy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};

pub const MAX_SIZE: usize = 10;
/// Every this-many-th trial sits exactly on the zero-surplus edge.
pub const KNIFE_EDGE_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub wage_factor: f64,
    pub surplus_rate: f64,
    pub augmented_radius: f64,
    pub fmt_holds: bool,
    pub gcet_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub trials: usize,
    pub size: usize,
    pub seed: u64,
    pub outcomes: Vec<TrialOutcome>,
}

impl SweepReport {
    pub fn fmt_counterexamples(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.fmt_holds).count()
    }

    pub fn gcet_counterexamples(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.gcet_holds).count()
    }

    pub fn counterexamples(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| !(o.fmt_holds && o.gcet_holds))
            .count()
    }

    pub fn text(&self) -> String {
        let positive = self
            .outcomes
            .iter()
            .filter(|o| o.surplus_rate > 0.0)
            .count();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "fmt-sweep trials={} size={} seed={}",
            self.trials, self.size, self.seed
        );
        let _ = writeln!(s, "positive surplus draws: {positive}");
        let _ = writeln!(s, "FMT counterexamples: {}", self.fmt_counterexamples());
        let _ = writeln!(s, "GCET counterexamples: {}", self.gcet_counterexamples());
        for o in self
            .outcomes
            .iter()
            .filter(|o| !(o.fmt_holds && o.gcet_holds))
        {
            let _ = writeln!(
                s,
                "  trial {}: factor {} e {:e} rho {:e} fmt {} gcet {}",
                o.trial,
                o.wage_factor,
                o.surplus_rate,
                o.augmented_radius,
                o.fmt_holds,
                o.gcet_holds
            );
        }
        s
    }
}

fn trial(seed: u64, n: usize, index: usize) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let factor = if index % KNIFE_EDGE_EVERY == KNIFE_EDGE_EVERY - 1 {
        1.0
    } else {
        rng.random_range(0.5..1.5)
    };
    let econ = random_economy(&mut rng, n, factor)?;
    let fmt = fmt_check(&econ)?;
    let gcet = gcet_check(&econ)?;
    Ok(TrialOutcome {
        trial: index,
        wage_factor: factor,
        surplus_rate: fmt.surplus_rate,
        augmented_radius: fmt.augmented_radius,
        fmt_holds: fmt.equivalent,
        gcet_holds: gcet.consistent,
    })
}

/// Runs the sweep without judging it; results depend only on the arguments.
pub fn run_sweep(trials: usize, size: usize, seed: u64) -> Result<SweepReport> {
    if trials == 0 {
        return Err(LabError::Usage("--trials must be at least 1".into()));
    }
    if !(1..=MAX_SIZE).contains(&size) {
        return Err(LabError::Usage(format!(
            "--size must be in 1..={MAX_SIZE}, got {size}"
        )));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| trial(seed, size, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        trials,
        size,
        seed,
        outcomes,
    })
}

/// Like [`run_sweep`] but any counterexample is an error.
pub fn fmt_sweep(trials: usize, size: usize, seed: u64) -> Result<SweepReport> {
    let report = run_sweep(trials, size, seed)?;
    match report.counterexamples() {
        0 => Ok(report),
        count => Err(LabError::Counterexamples { count, trials }),
    }
}
