//! Coordinate weights `γ_u` for subsets `u` of the dimensions.
//!
//! Subsets are passed as sorted slices of 0-based dimension indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension for which weights without exploitable structure are
/// expanded over all `2^s` subsets.
pub const SUBSET_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetWeight {
    /// 0-based dimension indices.
    pub set: Vec<usize>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum WeightScheme {
    /// `γ_u = Π_{j∈u} γ_j`
    Product { gamma: Vec<f64> },
    /// `γ_u = Γ_{|u|}`; `order_weights[ℓ-1] = Γ_ℓ`
    OrderDependent { order_weights: Vec<f64> },
    /// `γ_u = Γ_{|u|} Π_{j∈u} β_j`
    Pod { order_weights: Vec<f64>, beta: Vec<f64> },
    /// `γ_u = Σ_{ν ∈ {1..α}^{|u|}} |ν|! Π_{j∈u} 2^{δ(ν_j,α)} β_j^{ν_j}`
    Spod { alpha: u32, beta: Vec<f64> },
    /// Order-dependent weights with `Γ_ℓ = 0` for `ℓ > order`.
    FiniteOrderDependent { order_weights: Vec<f64>, order: usize },
    /// `base` restricted to sets that fit inside `diameter` consecutive
    /// dimensions (`max u - min u < diameter`).
    FiniteDiameter { diameter: usize, base: Box<WeightScheme> },
    /// Explicit weights; unlisted sets have weight zero.
    General { sets: Vec<SetWeight> },
}

impl WeightScheme {
    pub fn product_constant(gamma: f64, s: usize) -> Self {
        WeightScheme::Product { gamma: vec![gamma; s] }
    }

    /// `γ_j = ratio^j`, `j = 1..s`.
    pub fn product_geometric(ratio: f64, s: usize) -> Self {
        WeightScheme::Product {
            gamma: (1..=s as i32).map(|j| ratio.powi(j)).collect(),
        }
    }

    /// Checks signs and that per-dimension parameters cover `s` dimensions.
    pub fn validate(&self, s: usize) -> Result<()> {
        let nonneg = |v: &[f64], what: &str| -> Result<()> {
            if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{what} must be finite and >= 0")));
            }
            Ok(())
        };
        let covers = |v: &[f64], what: &str| -> Result<()> {
            if v.len() < s {
                return Err(Error::DimensionMismatch { expected: s, got: v.len() })
                    .map_err(|e| Error::InvalidParameter(format!("{what}: {e}")));
            }
            Ok(())
        };
        match self {
            WeightScheme::Product { gamma } => {
                nonneg(gamma, "gamma")?;
                covers(gamma, "gamma")
            }
            WeightScheme::OrderDependent { order_weights } => {
                nonneg(order_weights, "order weights")?;
                covers(order_weights, "order weights")
            }
            WeightScheme::Pod { order_weights, beta } => {
                nonneg(order_weights, "order weights")?;
                nonneg(beta, "beta")?;
                covers(order_weights, "order weights")?;
                covers(beta, "beta")
            }
            WeightScheme::Spod { alpha, beta } => {
                if *alpha == 0 {
                    return Err(Error::InvalidParameter("SPOD alpha must be >= 1".into()));
                }
                nonneg(beta, "beta")?;
                covers(beta, "beta")
            }
            WeightScheme::FiniteOrderDependent { order_weights, order } => {
                nonneg(order_weights, "order weights")?;
                if order_weights.len() < (*order).min(s) {
                    return Err(Error::InvalidParameter(
                        "order weights must cover the cutoff order".into(),
                    ));
                }
                Ok(())
            }
            WeightScheme::FiniteDiameter { diameter, base } => {
                if *diameter == 0 {
                    return Err(Error::InvalidParameter("diameter must be >= 1".into()));
                }
                base.validate(s)
            }
            WeightScheme::General { sets } => {
                for w in sets {
                    if !(w.gamma >= 0.0) || !w.gamma.is_finite() {
                        return Err(Error::InvalidParameter("set weights must be >= 0".into()));
                    }
                    if w.set.is_empty() || w.set.windows(2).any(|p| p[0] >= p[1]) {
                        return Err(Error::InvalidParameter(
                            "general weight sets must be nonempty and strictly increasing".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// `γ_u`; the empty set has weight 1.
    pub fn gamma(&self, u: &[usize]) -> f64 {
        if u.is_empty() {
            return 1.0;
        }
        let ell = u.len();
        match self {
            WeightScheme::Product { gamma } => u.iter().map(|&j| gamma[j]).product(),
            WeightScheme::OrderDependent { order_weights } => order_weights[ell - 1],
            WeightScheme::Pod { order_weights, beta } => {
                order_weights[ell - 1] * u.iter().map(|&j| beta[j]).product::<f64>()
            }
            WeightScheme::Spod { alpha, beta } => spod_gamma(*alpha, u.iter().map(|&j| beta[j])),
            WeightScheme::FiniteOrderDependent { order_weights, order } => {
                if ell > *order {
                    0.0
                } else {
                    order_weights[ell - 1]
                }
            }
            WeightScheme::FiniteDiameter { diameter, base } => {
                if u[ell - 1] - u[0] >= *diameter {
                    0.0
                } else {
                    base.gamma(u)
                }
            }
            WeightScheme::General { sets } => sets
                .iter()
                .find(|w| w.set == u)
                .map_or(0.0, |w| w.gamma),
        }
    }

    /// `Σ_{∅≠u⊆{0..s-1}} γ_u^exponent Π_{j∈u} values[j]` with `s = values.len()`.
    ///
    /// This is the weighted χ function when `values` are kernel values and
    /// `exponent = q/2`, and the theorem-bound sum when `values` are the
    /// one-dimensional series sums.
    pub fn subset_sum(&self, exponent: f64, values: &[f64]) -> Result<f64> {
        let s = values.len();
        let pw = |g: f64| if g == 0.0 { 0.0 } else { g.powf(exponent) };
        match self {
            WeightScheme::Product { gamma } => Ok(values
                .iter()
                .zip(gamma)
                .map(|(v, &g)| 1.0 + pw(g) * v)
                .product::<f64>()
                - 1.0),
            WeightScheme::OrderDependent { order_weights } => {
                Ok(order_sum(order_weights, None, s, exponent, values))
            }
            WeightScheme::Pod { order_weights, beta } => {
                Ok(order_sum(order_weights, Some(beta), s, exponent, values))
            }
            WeightScheme::FiniteOrderDependent { order_weights, order } => {
                Ok(order_sum(order_weights, None, (*order).min(s), exponent, values))
            }
            WeightScheme::FiniteDiameter { diameter, base } => {
                let mut total = 0.0;
                for start in 0..s {
                    let rest: Vec<usize> = (start + 1..s.min(start + diameter)).collect();
                    for mask in 0u64..(1u64 << rest.len()) {
                        let mut u = vec![start];
                        let mut prod = values[start];
                        for (bit, &j) in rest.iter().enumerate() {
                            if mask >> bit & 1 == 1 {
                                u.push(j);
                                prod *= values[j];
                            }
                        }
                        total += pw(base.gamma(&u)) * prod;
                    }
                }
                Ok(total)
            }
            WeightScheme::General { sets } => Ok(sets
                .iter()
                .filter(|w| w.set.iter().all(|&j| j < s))
                .map(|w| pw(w.gamma) * w.set.iter().map(|&j| values[j]).product::<f64>())
                .sum()),
            WeightScheme::Spod { .. } => {
                if s > SUBSET_ENUMERATION_LIMIT {
                    return Err(Error::UnsupportedWeights(format!(
                        "SPOD weights are expanded over all subsets; s = {s} exceeds {SUBSET_ENUMERATION_LIMIT}"
                    )));
                }
                let mut total = 0.0;
                let mut u = Vec::with_capacity(s);
                for mask in 1u64..(1u64 << s) {
                    u.clear();
                    let mut prod = 1.0;
                    for (j, v) in values.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            u.push(j);
                            prod *= v;
                        }
                    }
                    total += pw(self.gamma(&u)) * prod;
                }
                Ok(total)
            }
        }
    }

    /// True when every weight is zero for subsets of `{0..s-1}`.
    pub fn all_zero(&self, s: usize) -> bool {
        match self {
            WeightScheme::Product { gamma } => gamma.iter().take(s).all(|&g| g == 0.0),
            WeightScheme::OrderDependent { order_weights }
            | WeightScheme::FiniteOrderDependent { order_weights, .. } => {
                order_weights.iter().take(s).all(|&g| g == 0.0)
            }
            WeightScheme::Pod { order_weights, beta } => {
                order_weights.iter().take(s).all(|&g| g == 0.0)
                    || beta.iter().take(s).all(|&b| b == 0.0)
            }
            WeightScheme::Spod { beta, .. } => beta.iter().take(s).all(|&b| b == 0.0),
            WeightScheme::FiniteDiameter { base, .. } => base.all_zero(s),
            WeightScheme::General { sets } => sets
                .iter()
                .all(|w| w.gamma == 0.0 || w.set.iter().any(|&j| j >= s)),
        }
    }
}

/// `Σ_{ℓ=1}^{max_order} Γ_ℓ^e · e_ℓ(β_j^e v_j)` with `e_ℓ` the elementary
/// symmetric polynomials.
fn order_sum(
    order_weights: &[f64],
    beta: Option<&Vec<f64>>,
    max_order: usize,
    exponent: f64,
    values: &[f64],
) -> f64 {
    let pw = |g: f64| if g == 0.0 { 0.0 } else { g.powf(exponent) };
    let mut elem = vec![0.0; max_order + 1];
    elem[0] = 1.0;
    for (j, &v) in values.iter().enumerate() {
        let factor = beta.map_or(1.0, |b| pw(b[j])) * v;
        for ell in (1..=max_order).rev() {
            elem[ell] += elem[ell - 1] * factor;
        }
    }
    (1..=max_order).map(|ell| pw(order_weights[ell - 1]) * elem[ell]).sum()
}

/// SPOD weight for the `β_j` of one subset, by convolution over `|ν|`.
fn spod_gamma(alpha: u32, betas: impl Iterator<Item = f64>) -> f64 {
    let alpha = alpha as usize;
    // dist[t] = Σ_{ν: |ν| = t} Π 2^{δ(ν_j,α)} β_j^{ν_j}
    let mut dist = vec![1.0];
    for beta in betas {
        let mut next = vec![0.0; dist.len() + alpha];
        for (t, &d) in dist.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for nu in 1..=alpha {
                let factor = if nu == alpha { 2.0 } else { 1.0 } * beta.powi(nu as i32);
                next[t + nu] += d * factor;
            }
        }
        dist = next;
    }
    let mut fact = 1.0;
    let mut total = 0.0;
    for (t, d) in dist.iter().enumerate() {
        if t > 0 {
            fact *= t as f64;
        }
        total += fact * d;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn spod_brute(alpha: u32, betas: &[f64]) -> f64 {
        let a = alpha as usize;
        let len = betas.len();
        let mut total = 0.0;
        let count = a.pow(len as u32);
        for idx in 0..count {
            let mut rem = idx;
            let mut nus = Vec::with_capacity(len);
            for _ in 0..len {
                nus.push(rem % a + 1);
                rem /= a;
            }
            let sum: usize = nus.iter().sum();
            let prod: f64 = nus
                .iter()
                .zip(betas)
                .map(|(&nu, &b)| if nu == a { 2.0 } else { 1.0 } * b.powi(nu as i32))
                .product();
            total += factorial(sum) * prod;
        }
        total
    }

    fn subsets(s: usize) -> impl Iterator<Item = Vec<usize>> {
        (1u64..(1 << s)).map(move |m| (0..s).filter(|j| m >> j & 1 == 1).collect())
    }

    #[test]
    fn gamma_examples() {
        let w = WeightScheme::product_constant(1.0, 4);
        assert_eq!(w.gamma(&[0, 2, 3]), 1.0);
        let pod = WeightScheme::Pod { order_weights: vec![1.0, 2.0], beta: vec![0.5, 0.5] };
        assert_eq!(pod.gamma(&[0, 1]), 0.5);
        let spod = WeightScheme::Spod { alpha: 2, beta: vec![0.5] };
        assert!((spod.gamma(&[0]) - 1.5).abs() < 1e-15);
        assert_eq!(spod.gamma(&[]), 1.0);
    }

    #[test]
    fn spod_matches_enumeration() {
        for alpha in 1..=3u32 {
            for size in 1..=6usize {
                let betas: Vec<f64> = (0..size).map(|j| 0.3 + 0.11 * j as f64).collect();
                let fast = spod_gamma(alpha, betas.iter().copied());
                let brute = spod_brute(alpha, &betas);
                assert!((fast - brute).abs() <= 1e-12 * brute, "alpha {alpha} size {size}");
            }
        }
    }

    #[test]
    fn finite_order_and_diameter_zeros() {
        let fod = WeightScheme::FiniteOrderDependent { order_weights: vec![1.0, 0.5, 0.25], order: 2 };
        assert_eq!(fod.gamma(&[0, 1, 2]), 0.0);
        assert_eq!(fod.gamma(&[0, 4]), 0.5);
        let fd = WeightScheme::FiniteDiameter {
            diameter: 2,
            base: Box::new(WeightScheme::product_constant(0.5, 6)),
        };
        assert_eq!(fd.gamma(&[1, 2]), 0.25);
        assert_eq!(fd.gamma(&[1, 3]), 0.0);
    }

    fn schemes(s: usize) -> Vec<WeightScheme> {
        let beta: Vec<f64> = (0..s).map(|j| 0.9f64.powi(j as i32 + 1)).collect();
        let big: Vec<f64> = (0..s).map(|l| 1.0 / (l + 1) as f64).collect();
        vec![
            WeightScheme::product_geometric(0.7, s),
            WeightScheme::OrderDependent { order_weights: big.clone() },
            WeightScheme::Pod { order_weights: big.clone(), beta: beta.clone() },
            WeightScheme::Spod { alpha: 2, beta: beta.clone() },
            WeightScheme::FiniteOrderDependent { order_weights: big.clone(), order: 2 },
            WeightScheme::FiniteDiameter {
                diameter: 3,
                base: Box::new(WeightScheme::product_geometric(0.8, s)),
            },
            WeightScheme::General {
                sets: vec![
                    SetWeight { set: vec![0], gamma: 0.5 },
                    SetWeight { set: vec![1, 3], gamma: 0.25 },
                    SetWeight { set: vec![0, 1, 2], gamma: 0.125 },
                ],
            },
        ]
    }

    proptest! {
        #[test]
        fn subset_sum_matches_explicit_expansion(
            values in proptest::collection::vec(-1.0f64..2.0, 1..7),
            exponent in 0.25f64..2.0,
        ) {
            let s = values.len();
            for w in schemes(s.max(4)) {
                let fast = w.subset_sum(exponent, &values).unwrap();
                let brute: f64 = subsets(s)
                    .map(|u| {
                        let g = w.gamma(&u);
                        let g = if g == 0.0 { 0.0 } else { g.powf(exponent) };
                        g * u.iter().map(|&j| values[j]).product::<f64>()
                    })
                    .sum();
                prop_assert!((fast - brute).abs() <= 1e-10 * (1.0 + brute.abs()), "{w:?}: {fast} vs {brute}");
            }
        }
    }

    #[test]
    fn chi_style_examples() {
        let w = WeightScheme::product_constant(0.0, 3);
        assert_eq!(w.subset_sum(1.0, &[0.3, 0.2, 0.9]).unwrap(), 0.0);
        let w = WeightScheme::product_constant(1.0, 2);
        let (a, b) = (0.3, -0.7);
        let v = w.subset_sum(0.5, &[a, b]).unwrap();
        assert!((v - (a + b + a * b)).abs() < 1e-15);
    }

    #[test]
    fn spod_enumeration_limit() {
        let w = WeightScheme::Spod { alpha: 2, beta: vec![0.1; 25] };
        assert!(matches!(
            w.subset_sum(1.0, &[0.1; 25]),
            Err(Error::UnsupportedWeights(_))
        ));
    }

    #[test]
    fn serde_shape() {
        let json = r#"{"type":"pod","params":{"order_weights":[1.0,2.0],"beta":[0.5,0.5]}}"#;
        let w: WeightScheme = serde_json::from_str(json).unwrap();
        assert_eq!(w.gamma(&[0, 1]), 0.5);
    }
}
