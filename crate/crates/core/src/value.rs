//! Single-technique Leontief economy: embodied labor values, the rate of
//! surplus value, the profitability sign, and commodity-numeraire values.
//!
//! Wage goods are advanced per unit of labor, so the augmented input matrix
//! is `M = A + b·l` with `M_ij = A_ij + b_i·l_j`. Profits are positive exactly
//! when `ρ(M) < 1`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Convergence tolerance of the spectral-radius iteration.
pub const SPECTRAL_TOL: f64 = 1e-12;
/// Band inside which a sign counts as zero.
pub const SIGN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeontiefEconomy {
    /// `input_matrix[(i, j)]`: units of commodity `i` used per unit of `j`.
    pub input_matrix: DMatrix<f64>,
    /// Direct labor per unit of output.
    pub labor: DVector<f64>,
    /// Commodities consumed per unit of labor.
    pub wage_bundle: DVector<f64>,
}

impl LeontiefEconomy {
    pub fn new(
        input_matrix: DMatrix<f64>,
        labor: DVector<f64>,
        wage_bundle: DVector<f64>,
    ) -> Result<Self> {
        let n = input_matrix.nrows();
        if n == 0 || input_matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "input matrix must be square and non-empty, got {}x{}",
                input_matrix.nrows(),
                input_matrix.ncols()
            )));
        }
        if labor.len() != n || wage_bundle.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "labor ({}) and wage bundle ({}) must have length {n}",
                labor.len(),
                wage_bundle.len()
            )));
        }
        if input_matrix.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::OutOfRange {
                field: "input_matrix",
                reason: "entries must be nonnegative".into(),
            });
        }
        if let Some(&l) = labor.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::NonPositiveInput {
                what: "labor",
                value: l,
            });
        }
        if wage_bundle.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::OutOfRange {
                field: "wage_bundle",
                reason: "entries must be nonnegative".into(),
            });
        }
        if wage_bundle.iter().all(|b| *b == 0.0) {
            return Err(Error::AllZero);
        }
        let econ = Self {
            input_matrix,
            labor,
            wage_bundle,
        };
        let radius = spectral_radius(&econ.input_matrix);
        if radius >= 1.0 {
            return Err(Error::NotProductive { radius });
        }
        Ok(econ)
    }

    /// One-commodity economy.
    pub fn corn(input: f64, labor: f64, wage: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, input),
            DVector::from_element(1, labor),
            DVector::from_element(1, wage),
        )
    }

    pub fn size(&self) -> usize {
        self.labor.len()
    }

    /// `M = A + b ⊗ l`.
    pub fn augmented_matrix(&self) -> DMatrix<f64> {
        &self.input_matrix + &self.wage_bundle * self.labor.transpose()
    }
}

/// Perron root of a nonnegative matrix.
///
/// Power iteration runs on `I + M`, which is primitive whenever `M` is
/// irreducible, so periodic matrices still converge; the Collatz-Wielandt
/// bounds `min (Mx)_i/x_i ≤ ρ ≤ max (Mx)_i/x_i` give the stopping rule.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let shifted = m + DMatrix::<f64>::identity(n, n);
    let mut x = DVector::from_element(n, 1.0);
    let mut estimate = 0.0;
    for _ in 0..200_000 {
        let y = &shifted * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(x.iter()) {
            let q = yi / xi;
            lo = lo.min(q);
            hi = hi.max(q);
        }
        estimate = 0.5 * (lo + hi) - 1.0;
        if hi - lo <= SPECTRAL_TOL * hi {
            return estimate.max(0.0);
        }
        let norm = y.max();
        x = y / norm;
    }
    estimate.max(0.0)
}

/// Embodied labor values `v = v·A + l`.
pub fn embodied_labor_values(econ: &LeontiefEconomy) -> Result<DVector<f64>> {
    let radius = spectral_radius(&econ.input_matrix);
    if radius >= 1.0 {
        return Err(Error::NotProductive { radius });
    }
    let n = econ.size();
    // v (I - A) = l  <=>  (I - A)^T v^T = l^T
    let system = (DMatrix::<f64>::identity(n, n) - &econ.input_matrix).transpose();
    let v = system
        .lu()
        .solve(&econ.labor)
        .ok_or(Error::NotProductive { radius })?;
    let residual = (&v - econ.input_matrix.tr_mul(&v) - &econ.labor).amax();
    debug_assert!(residual <= 1e-10 * v.amax().max(1.0), "residual {residual}");
    Ok(v)
}

/// Surplus labor per unit of labor expended: `e = 1 - v·b`.
pub fn surplus_value_rate(econ: &LeontiefEconomy) -> Result<f64> {
    let v = embodied_labor_values(econ)?;
    Ok(1.0 - v.dot(&econ.wage_bundle))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn of(x: f64, tol: f64) -> Self {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Sign of economy-wide profit, read off `1 - ρ(M)`.
pub fn profit_sign(econ: &LeontiefEconomy) -> Sign {
    Sign::of(1.0 - spectral_radius(&econ.augmented_matrix()), SIGN_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmtReport {
    pub surplus_rate: f64,
    pub augmented_radius: f64,
    pub surplus_positive: bool,
    pub profit_positive: bool,
    /// Signs of `e` and `1 - ρ(M)` agree.
    pub equivalent: bool,
}

/// Checks positive surplus value ⇔ positive profit on one economy.
pub fn fmt_check(econ: &LeontiefEconomy) -> Result<FmtReport> {
    let e = surplus_value_rate(econ)?;
    let radius = spectral_radius(&econ.augmented_matrix());
    let surplus = Sign::of(e, SIGN_TOL);
    let profit = Sign::of(1.0 - radius, SIGN_TOL);
    Ok(FmtReport {
        surplus_rate: e,
        augmented_radius: radius,
        surplus_positive: surplus == Sign::Positive,
        profit_positive: profit == Sign::Positive,
        equivalent: surplus == profit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommodityValues {
    pub numeraire: usize,
    /// Direct plus indirect content of the numeraire per unit of each commodity.
    /// Infinite when the other sectors cannot reproduce themselves.
    pub values: Vec<f64>,
    pub own_value: f64,
}

/// Values measured in commodity `numeraire` over the wage-augmented matrix.
///
/// The numeraire plays the role labor plays for labor values: it is a primary
/// input, so its own row is removed from the recursion,
/// `w_k = Σ_{i≠j} w_i M_ik + M_jk`. The own value `w_j` is below one exactly
/// when `ρ(M) < 1`.
pub fn gcet_values(econ: &LeontiefEconomy, numeraire: usize) -> Result<CommodityValues> {
    let n = econ.size();
    if numeraire >= n {
        return Err(Error::DimensionMismatch(format!(
            "numeraire {numeraire} out of range for {n} commodities"
        )));
    }
    let m = econ.augmented_matrix();
    let others: Vec<usize> = (0..n).filter(|&i| i != numeraire).collect();
    let direct_row = m.row(numeraire).transpose();

    let w_others = if others.is_empty() {
        DVector::zeros(0)
    } else {
        let sub = m.select_rows(&others).select_columns(&others);
        if spectral_radius(&sub) >= 1.0 {
            return Ok(CommodityValues {
                numeraire,
                values: vec![f64::INFINITY; n],
                own_value: f64::INFINITY,
            });
        }
        let rhs = DVector::from_iterator(others.len(), others.iter().map(|&k| direct_row[k]));
        let system = (DMatrix::<f64>::identity(others.len(), others.len()) - sub).transpose();
        system
            .lu()
            .solve(&rhs)
            .ok_or(Error::NotProductive { radius: 1.0 })?
    };

    let mut values = vec![0.0; n];
    for (slot, &k) in others.iter().enumerate() {
        values[k] = w_others[slot];
    }
    let own = others
        .iter()
        .enumerate()
        .map(|(slot, &i)| w_others[slot] * m[(i, numeraire)])
        .sum::<f64>()
        + m[(numeraire, numeraire)];
    values[numeraire] = own;
    Ok(CommodityValues {
        numeraire,
        values,
        own_value: own,
    })
}

/// Sign tolerance for own values, which pass through one more linear solve
/// than the surplus rate.
pub const OWN_VALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GcetReport {
    pub own_values: Vec<f64>,
    /// Every `1 - w_j` has the sign of profit, `1 - ρ(M)`.
    pub consistent: bool,
}

/// Own values of every commodity checked against the sign of profit.
pub fn gcet_check(econ: &LeontiefEconomy) -> Result<GcetReport> {
    let profit = profit_sign(econ);
    let own_values = (0..econ.size())
        .map(|j| gcet_values(econ, j).map(|v| v.own_value))
        .collect::<Result<Vec<_>>>()?;
    let consistent = own_values
        .iter()
        .all(|w| Sign::of(1.0 - w, OWN_VALUE_TOL) == profit);
    Ok(GcetReport {
        own_values,
        consistent,
    })
}

/// Draws a productive economy: inputs `U[0, 0.4]/n`, labor `U[0.1, 1]`, and a
/// random wage direction scaled by `wage_factor` relative to the bundle that
/// exactly exhausts an hour of labor (`v·b = 1`). Factors below one give
/// positive surplus value, one the knife edge, above one negative.
pub fn random_economy<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    wage_factor: f64,
) -> Result<LeontiefEconomy> {
    let input = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..0.4) / n as f64);
    let labor = DVector::from_fn(n, |_, _| rng.random_range(0.1..1.0));
    let direction = DVector::from_fn(n, |_, _| rng.random_range(0.05..1.0));
    let probe = LeontiefEconomy::new(input, labor, direction)?;
    let v = embodied_labor_values(&probe)?;
    let scale = wage_factor / v.dot(&probe.wage_bundle);
    LeontiefEconomy::new(probe.input_matrix, probe.labor, probe.wage_bundle * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Σ_{k<K} l·A^k
    fn series_values(econ: &LeontiefEconomy, terms: usize) -> DVector<f64> {
        let mut acc = DVector::zeros(econ.size());
        let mut term = econ.labor.clone();
        for _ in 0..terms {
            acc += &term;
            term = econ.input_matrix.tr_mul(&term);
        }
        acc
    }

    #[test]
    fn corn_values() {
        let corn = LeontiefEconomy::corn(0.5, 1.0, 0.3).unwrap();
        let v = embodied_labor_values(&corn).unwrap();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(series_values(&corn, 60)[0], 2.0, epsilon = 1e-12);
        let plain = LeontiefEconomy::corn(0.0, 0.7, 0.3).unwrap();
        assert_eq!(embodied_labor_values(&plain).unwrap()[0], 0.7);
    }

    #[test]
    fn two_sector_values_match_series() {
        let econ = LeontiefEconomy::new(
            DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.3, 0.4]),
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![0.1, 0.1]),
        )
        .unwrap();
        let v = embodied_labor_values(&econ).unwrap();
        let residual = (&v - econ.input_matrix.tr_mul(&v) - &econ.labor).amax();
        assert!(residual <= 1e-10);
        let rho = spectral_radius(&econ.input_matrix);
        let series = series_values(&econ, 50);
        let bound = rho.powi(50) / (1.0 - rho) * v.amax();
        assert!((&v - series).amax() <= bound.max(1e-14));
    }

    #[test]
    fn surplus_rates() {
        let e = |w| surplus_value_rate(&LeontiefEconomy::corn(0.5, 1.0, w).unwrap()).unwrap();
        assert_relative_eq!(e(0.3), 0.4, epsilon = 1e-14);
        assert_relative_eq!(e(0.5), 0.0, epsilon = 1e-14);
        let tiny = LeontiefEconomy::corn(0.5, 1.0, 1e-300).unwrap();
        assert_relative_eq!(surplus_value_rate(&tiny).unwrap(), 1.0);
    }

    #[test]
    fn profit_signs() {
        let sign = |w| profit_sign(&LeontiefEconomy::corn(0.5, 1.0, w).unwrap());
        assert_eq!(sign(0.3), Sign::Positive);
        assert_eq!(sign(0.5), Sign::Zero);
        assert_eq!(sign(0.7), Sign::Negative);
    }

    #[test]
    fn fmt_corn_cases() {
        let r = fmt_check(&LeontiefEconomy::corn(0.5, 1.0, 0.3).unwrap()).unwrap();
        assert!(r.surplus_positive && r.profit_positive && r.equivalent);
        assert_relative_eq!(r.augmented_radius, 0.8, epsilon = 1e-12);
        let r = fmt_check(&LeontiefEconomy::corn(0.5, 1.0, 0.7).unwrap()).unwrap();
        assert!(!r.surplus_positive && !r.profit_positive && r.equivalent);
    }

    #[test]
    fn corn_own_value_is_augmented_coefficient() {
        let own = |w| {
            gcet_values(&LeontiefEconomy::corn(0.5, 1.0, w).unwrap(), 0)
                .unwrap()
                .own_value
        };
        assert_relative_eq!(own(0.3), 0.8, epsilon = 1e-15);
        assert_relative_eq!(own(0.5), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn spectral_radius_against_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..20 {
                let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
                let oracle = m
                    .complex_eigenvalues()
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert_relative_eq!(spectral_radius(&m), oracle, max_relative = 1e-9);
            }
        }
        // periodic matrix: plain power iteration would oscillate
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert_relative_eq!(spectral_radius(&swap), 0.5, epsilon = 1e-11);
    }

    #[test]
    fn unproductive_economy_rejected() {
        assert!(matches!(
            LeontiefEconomy::corn(1.0, 1.0, 0.1),
            Err(Error::NotProductive { .. })
        ));
    }

    #[test]
    fn random_sweep_fmt_and_gcet() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut signs = [0usize; 3];
        for trial in 0..1000 {
            let n = 2 + trial % 2;
            let factor = if trial % 10 == 0 {
                1.0
            } else {
                rng.random_range(0.5..1.5)
            };
            let econ = random_economy(&mut rng, n, factor).unwrap();
            let r = fmt_check(&econ).unwrap();
            assert!(r.equivalent, "trial {trial}: {r:?}");
            signs[match Sign::of(r.surplus_rate, SIGN_TOL) {
                Sign::Positive => 0,
                Sign::Zero => 1,
                Sign::Negative => 2,
            }] += 1;
            let g = gcet_check(&econ).unwrap();
            assert!(g.consistent, "trial {trial}: {g:?}");
        }
        assert!(signs.iter().all(|&c| c > 0), "{signs:?}");
    }
}
