//! Randomized QMC integration: shift-averaged estimates with standard errors,
//! and empirical convergence studies over CBC-constructed rules.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cbc::{cbc, CbcOptions, CbcTarget, Method};
use crate::error::{Error, Result};
use crate::points::{
    digital_shift_digits, shifted_lattice_points, tent_transform, Rule, Shift,
};
use crate::spaces::SpaceSpec;
use crate::special::bernoulli2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Randomization {
    None,
    /// Uniform shift modulo 1 (lattice rules).
    Shift,
    /// Digit-wise shift (polynomial lattice rules).
    DigitalShift,
    /// Uniform shift followed by the tent transform (lattice rules).
    Tent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedEstimate {
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// `None` with fewer than two shifts.
    pub standard_error: Option<f64>,
    pub shifts: usize,
    pub seed: u64,
}

impl RandomizedEstimate {
    fn from_estimates(estimates: Vec<f64>, seed: u64) -> Self {
        let nu = estimates.len();
        // fixed summation order keeps the mean bit-stable
        let mean = estimates.iter().sum::<f64>() / nu as f64;
        let standard_error = (nu >= 2).then(|| {
            let ss: f64 = estimates.iter().map(|q| (q - mean).powi(2)).sum();
            (ss / (nu as f64 * (nu as f64 - 1.0))).sqrt()
        });
        RandomizedEstimate { estimates, mean, standard_error, shifts: nu, seed }
    }
}

/// `Q_N(f) = (1/N) Σ_k f(x_k)`.
pub fn rule_average<F>(f: &F, points: &[Vec<f64>]) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let values: Vec<f64> = points.par_iter().map(|x| f(x)).collect();
    values.iter().sum::<f64>() / points.len() as f64
}

/// Averages `ν` independently randomized copies of the rule. With
/// [`Randomization::None`] a single unrandomized estimate is returned.
pub fn integrate<F>(f: &F, rule: &Rule, randomization: Randomization, nu: usize, seed: u64) -> Result<RandomizedEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let s = rule.dimension();
    match (randomization, rule) {
        (Randomization::None, _) => {
            return Ok(RandomizedEstimate::from_estimates(vec![rule_average(f, &rule.points())], seed));
        }
        (Randomization::Shift | Randomization::Tent, Rule::Polynomial(_)) => {
            return Err(Error::IncompatibleRandomization(
                "real shifts apply to rank-1 lattice rules; use a digital shift".into(),
            ))
        }
        (Randomization::DigitalShift, Rule::Lattice(_)) => {
            return Err(Error::IncompatibleRandomization(
                "digital shifts apply to polynomial lattice rules".into(),
            ))
        }
        _ => {}
    }
    if nu == 0 {
        return Err(Error::InvalidParameter("number of shifts must be >= 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let shifts: Vec<Shift> = (0..nu)
        .map(|_| match rule {
            Rule::Lattice(_) => Shift::random_real(s, &mut rng),
            Rule::Polynomial(r) => Shift::random_digital(s, r.precision() as usize, r.base(), &mut rng),
        })
        .collect();
    let estimates = shifts
        .par_iter()
        .map(|shift| -> Result<f64> {
            let points = match (rule, shift) {
                (Rule::Lattice(r), Shift::Real(d)) => {
                    let mut pts = shifted_lattice_points(r, d)?;
                    if randomization == Randomization::Tent {
                        for row in pts.iter_mut() {
                            for x in row.iter_mut() {
                                *x = tent_transform(*x)?;
                            }
                        }
                    }
                    pts
                }
                (Rule::Polynomial(r), Shift::Digital { base, digits }) => {
                    let raw: Vec<Vec<u64>> = (0..r.n_points()).map(|k| r.digit_point(k)).collect();
                    let scale = r.scale() as f64;
                    digital_shift_digits(&raw, digits, *base)?
                        .into_iter()
                        .map(|row| row.into_iter().map(|y| y as f64 / scale).collect())
                        .collect()
                }
                _ => unreachable!("shift kind follows the rule kind"),
            };
            Ok(rule_average(f, &points))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RandomizedEstimate::from_estimates(estimates, seed))
}

/// `f(x) = Π_j (1 + c_j B₂(x_j))`; its integral over the unit cube is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProduct {
    pub c: Vec<f64>,
}

impl BernoulliProduct {
    pub fn new(c: Vec<f64>) -> Self {
        BernoulliProduct { c }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, &xj)| 1.0 + c * bernoulli2(xj)).product()
    }

    pub const fn integral(&self) -> f64 {
        1.0
    }
}

/// What a convergence study measures for each rule.
pub enum StudyMode<'a> {
    WorstCase,
    /// `|Q̄ − exact|` from shifted integration.
    Integration {
        f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
        exact: f64,
        randomization: Randomization,
        shifts: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: u64,
    pub error: f64,
    pub z: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `log e` against `log N`; `None` when it cannot
    /// be fitted.
    pub slope: Option<f64>,
    /// Set when some error is zero or non-finite.
    pub degenerate: bool,
}

/// Least-squares slope of `y` on `x`; `None` for fewer than two distinct `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// CBC-constructs one rule per target and fits the log-log error slope.
pub fn convergence_study(space: &SpaceSpec, mode: &StudyMode<'_>, targets: &[CbcTarget], s: usize) -> Result<ConvergenceStudy> {
    let sizes: Vec<u64> = targets
        .iter()
        .map(|t| match t {
            CbcTarget::Lattice { n } => *n,
            CbcTarget::Polynomial { modulus, m, .. } => (modulus.base() as u64).pow(*m),
        })
        .collect();
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("point counts must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(targets.len());
    for (t, &n) in targets.iter().zip(&sizes) {
        let r = cbc(t, s, space, &CbcOptions { method: Method::Fast, lambdas: Vec::new() })?;
        let error = match mode {
            StudyMode::WorstCase => *r.errors.last().expect("s >= 1"),
            StudyMode::Integration { f, exact, randomization, shifts, seed } => {
                let est = integrate(*f, &r.rule, *randomization, *shifts, *seed)?;
                (est.mean - exact).abs()
            }
        };
        rows.push(StudyRow { n, error, z: r.z });
    }
    let degenerate = rows.iter().any(|r| !(r.error > 0.0 && r.error.is_finite()));
    let slope = if degenerate {
        None
    } else {
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
        least_squares_slope(&x, &y)
    };
    Ok(ConvergenceStudy { rows, slope, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{find_irreducible, Poly};
    use crate::points::{LatticeRule, PolyLatticeRule};
    use crate::spaces::Family;
    use crate::weights::WeightScheme;

    fn lattice(n: u64, z: Vec<u64>) -> Rule {
        Rule::Lattice(LatticeRule::new(n, z).unwrap())
    }

    #[test]
    fn constant_integrand() {
        let r = lattice(13, vec![1, 5]);
        let est = integrate(&|_: &[f64]| 1.0, &r, Randomization::Shift, 8, 1).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.standard_error, Some(0.0));
    }

    #[test]
    fn two_point_rule() {
        let r = lattice(2, vec![1]);
        let est = integrate(&|x: &[f64]| x[0], &r, Randomization::None, 1, 0).unwrap();
        assert_eq!(est.mean, 0.25);
        assert_eq!(est.standard_error, None);
    }

    #[test]
    fn bernoulli_product_within_three_se() {
        let r = lattice(101, vec![1, 27, 40]);
        let f = BernoulliProduct::new(vec![1.0; 3]);
        let est = integrate(&|x: &[f64]| f.eval(x), &r, Randomization::Shift, 16, 7).unwrap();
        let se = est.standard_error.unwrap();
        assert!((est.mean - 1.0).abs() <= 3.0 * se, "{} {se}", est.mean);
    }

    #[test]
    fn deterministic_and_mean_is_average() {
        let r = lattice(31, vec![1, 12]);
        let f = BernoulliProduct::new(vec![0.5, 0.5]);
        let a = integrate(&|x: &[f64]| f.eval(x), &r, Randomization::Tent, 10, 99).unwrap();
        let b = integrate(&|x: &[f64]| f.eval(x), &r, Randomization::Tent, 10, 99).unwrap();
        assert_eq!(a, b);
        let avg = a.estimates.iter().sum::<f64>() / 10.0;
        assert_eq!(a.mean, avg);
    }

    #[test]
    fn unbiased_over_seeds() {
        let r = lattice(17, vec![1, 5]);
        let f = BernoulliProduct::new(vec![1.0, 1.0]);
        let mut all = Vec::new();
        for seed in 0..200 {
            all.extend(integrate(&|x: &[f64]| f.eval(x), &r, Randomization::Shift, 4, seed).unwrap().estimates);
        }
        let pooled = RandomizedEstimate::from_estimates(all, 0);
        assert!((pooled.mean - 1.0).abs() < 4.0 * pooled.standard_error.unwrap());
    }

    #[test]
    fn digital_shift_unbiased_for_walsh_polynomials() {
        // f(x) = x has integral 1/2; with an n-digit shift the expectation is
        // the mean of all n-digit values.
        let p = find_irreducible(2, 4).unwrap();
        let rule = Rule::Polynomial(
            PolyLatticeRule::new(2, p.clone(), 4, 4, vec![Poly::one(2), Poly::from_int(2, 3).unwrap()]).unwrap(),
        );
        let mut all = Vec::new();
        for seed in 0..100 {
            all.extend(integrate(&|x: &[f64]| x[1], &rule, Randomization::DigitalShift, 4, seed).unwrap().estimates);
        }
        // every point set is a permutation of the 16 grid values
        for q in &all {
            assert!((q - 15.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn incompatible_randomizations() {
        let r = lattice(5, vec![1]);
        assert!(matches!(
            integrate(&|_: &[f64]| 1.0, &r, Randomization::DigitalShift, 2, 0),
            Err(Error::IncompatibleRandomization(_))
        ));
    }

    #[test]
    fn study_edge_cases() {
        let sp = SpaceSpec::new(Family::Korobov, 2.0, 2.0, WeightScheme::product_geometric(0.9, 2));
        let one = convergence_study(&sp, &StudyMode::WorstCase, &[CbcTarget::Lattice { n: 53 }], 2).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.slope, None);
        let zero = SpaceSpec::new(Family::Korobov, 2.0, 2.0, WeightScheme::product_constant(0.0, 2));
        let targets = [CbcTarget::Lattice { n: 53 }, CbcTarget::Lattice { n: 101 }];
        let st = convergence_study(&zero, &StudyMode::WorstCase, &targets, 2).unwrap();
        assert!(st.degenerate && st.slope.is_none());
        assert!(st.rows.iter().all(|r| r.error == 0.0));
        let bad = [CbcTarget::Lattice { n: 101 }, CbcTarget::Lattice { n: 53 }];
        assert!(convergence_study(&sp, &StudyMode::WorstCase, &bad, 2).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [10.0f64, 20.0, 40.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [10.0f64, 20.0, 40.0].iter().map(|v| (3.0 * v.powf(-1.5)).ln()).collect();
        assert!((least_squares_slope(&x, &y).unwrap() + 1.5).abs() < 1e-12);
    }
}
