//! Component-by-component construction of lattice and polynomial lattice
//! rules, by direct evaluation or by fast circular correlation.
//!
//! With `χ_s` the worst-case function in `s` dimensions, the error satisfies
//! `e_s^q = e_{s-1}^q + θ_s(z_s)` where
//! `θ_s(z) = (1/N) Σ_k Y_s(k) ω(k·z)` and
//! `Y_s(k) = Σ_{u⊆{1..s-1}} γ_{u∪{s}}^{q/2} Π_{j∈u} ω(x_{k,j})`.
//! The weight-scheme state below keeps `Y_s` up to date in `O(T N)` per step.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{CyclicGroup, Poly};
use crate::error::{Error, Result};
use crate::fft::Correlator;
use crate::points::{LatticeRule, PolyLatticeRule, Rule};
use crate::spaces::{OmegaTable, SpaceSpec};
use crate::special::Dd;
use crate::weights::WeightScheme;

/// Search values within this fraction of the term scale `Σ|Y||ω|/N` of the
/// minimum are treated as indistinguishable by the search arithmetic and are
/// re-evaluated exactly.
pub const TIE_TOLERANCE: f64 = 1e-13;

/// Exact values within this fraction of the term scale count as equal; the
/// smallest encoding wins among them.
pub const EXACT_TIE_TOLERANCE: f64 = 1e-24;

/// Most near-tied candidates re-evaluated per step. Larger tie groups (every
/// candidate in dimension one, for instance) keep the smallest encoding.
pub const REFINE_LIMIT: usize = 64;

/// Largest `2^{s-1}·N` table the subset-based states may allocate.
pub const STATE_TABLE_LIMIT: usize = 1 << 26;

/// Largest residue ring (`|G|`) the search accepts.
pub const GROUP_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Fast,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CbcTarget {
    /// Prime number of points.
    Lattice { n: u64 },
    /// Irreducible modulus `P`, `b^m` points, `n` digits (`m ≤ deg P`).
    Polynomial { modulus: Poly, m: u32, precision: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbcOptions {
    pub method: Method,
    /// λ values for the theorem bound; empty for none.
    pub lambdas: Vec<f64>,
}

impl Default for CbcOptions {
    fn default() -> Self {
        CbcOptions { method: Method::Fast, lambdas: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub lambda: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbcResult {
    pub rule: Rule,
    /// Chosen components as integer / coefficient encodings.
    pub z: Vec<u64>,
    /// `e_s^q` after each dimension.
    pub error_powers: Vec<f64>,
    /// `e_s` after each dimension.
    pub errors: Vec<f64>,
    /// `θ_s(z_s*)`.
    pub thetas: Vec<f64>,
    /// Theorem bounds per dimension.
    pub bounds: Vec<Vec<BoundEntry>>,
    /// Wall time of each step in seconds.
    pub timings: Vec<f64>,
    pub method: Method,
}

/// Running weight-scheme state from which `Y_s` is formed.
#[derive(Debug, Clone)]
pub enum CbcState {
    /// `P_{s-1}(k) = Π_{j<s} (1 + γ_j^{q/2} ω_j(k))`
    Product { w: Vec<f64>, p: Vec<f64> },
    /// `e[ℓ](k)`: elementary symmetric sums of `β_j^{q/2} ω_j(k)` of order `ℓ`.
    Order {
        big: Vec<f64>,
        beta: Option<Vec<f64>>,
        e: Vec<Vec<f64>>,
    },
    /// Products over subsets of the last `diameter - 1` dimensions.
    Diameter {
        diameter: usize,
        base: Box<WeightScheme>,
        exponent: f64,
        window: Vec<usize>,
        bank: Vec<Vec<f64>>,
    },
    /// Explicit sets: only those whose largest index is the current one
    /// contribute to `Y_s`.
    General { sets: Vec<(Vec<usize>, f64)>, columns: Vec<Vec<f64>>, n: usize },
    /// Products over every subset of the chosen dimensions.
    Subsets { weights: WeightScheme, exponent: f64, table: Vec<Vec<f64>> },
}

fn pw(g: f64, e: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g.powf(e)
    }
}

impl CbcState {
    pub fn new(weights: &WeightScheme, exponent: f64, s: usize, n_points: usize) -> Result<Self> {
        let limit_check = |rows: usize, what: &str| -> Result<()> {
            if rows.saturating_mul(n_points) > STATE_TABLE_LIMIT {
                return Err(Error::UnsupportedWeights(format!(
                    "{what}: {rows} state vectors of length {n_points} exceed the memory cap"
                )));
            }
            Ok(())
        };
        Ok(match weights {
            WeightScheme::Product { gamma } => CbcState::Product {
                w: gamma.iter().take(s).map(|&g| pw(g, exponent)).collect(),
                p: vec![1.0; n_points],
            },
            WeightScheme::OrderDependent { order_weights } => {
                limit_check(s, "order-dependent")?;
                CbcState::Order {
                    big: order_weights.iter().take(s).map(|&g| pw(g, exponent)).collect(),
                    beta: None,
                    e: order_init(s, n_points),
                }
            }
            WeightScheme::Pod { order_weights, beta } => {
                limit_check(s, "POD")?;
                CbcState::Order {
                    big: order_weights.iter().take(s).map(|&g| pw(g, exponent)).collect(),
                    beta: Some(beta.iter().take(s).map(|&b| pw(b, exponent)).collect()),
                    e: order_init(s, n_points),
                }
            }
            WeightScheme::FiniteOrderDependent { order_weights, order } => {
                let max_order = (*order).min(s);
                limit_check(max_order, "finite-order")?;
                CbcState::Order {
                    big: order_weights.iter().take(max_order).map(|&g| pw(g, exponent)).collect(),
                    beta: None,
                    e: order_init(max_order, n_points),
                }
            }
            WeightScheme::FiniteDiameter { diameter, base } => {
                if *diameter > 21 {
                    return Err(Error::UnsupportedWeights("diameter above 21".into()));
                }
                limit_check(1 << (diameter - 1), "finite-diameter")?;
                CbcState::Diameter {
                    diameter: *diameter,
                    base: base.clone(),
                    exponent,
                    window: Vec::new(),
                    bank: vec![vec![1.0; n_points]],
                }
            }
            WeightScheme::General { sets } => {
                if s > 20 {
                    return Err(Error::UnsupportedWeights("general weights need s <= 20".into()));
                }
                CbcState::General {
                    sets: sets.iter().map(|w| (w.set.clone(), pw(w.gamma, exponent))).collect(),
                    columns: Vec::new(),
                    n: n_points,
                }
            }
            WeightScheme::Spod { .. } => {
                if s > 12 {
                    return Err(Error::UnsupportedWeights("SPOD weights in CBC need s <= 12".into()));
                }
                limit_check(1 << (s - 1), "SPOD")?;
                CbcState::Subsets {
                    weights: weights.clone(),
                    exponent,
                    table: vec![vec![1.0; n_points]],
                }
            }
        })
    }

    /// `Y_s(k)` for the next dimension `s` (0-based).
    pub fn y(&self, s: usize) -> Vec<f64> {
        match self {
            CbcState::Product { w, p } => p.iter().map(|v| w[s] * v).collect(),
            CbcState::Order { big, beta, e } => {
                let factor = beta.as_ref().map_or(1.0, |b| b[s]);
                let n = e[0].len();
                let mut y = vec![0.0; n];
                for (ell, row) in e.iter().enumerate() {
                    let g = big[ell];
                    if g == 0.0 {
                        continue;
                    }
                    for (yk, v) in y.iter_mut().zip(row) {
                        *yk += g * v;
                    }
                }
                y.iter_mut().for_each(|v| *v *= factor);
                y
            }
            CbcState::Diameter { base, exponent, window, bank, .. } => {
                let n = bank[0].len();
                let mut y = vec![0.0; n];
                for (mask, row) in bank.iter().enumerate() {
                    let mut u: Vec<usize> = window
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &d)| d)
                        .collect();
                    u.push(s);
                    let g = pw(base.gamma(&u), *exponent);
                    if g == 0.0 {
                        continue;
                    }
                    for (yk, v) in y.iter_mut().zip(row) {
                        *yk += g * v;
                    }
                }
                y
            }
            CbcState::General { sets, columns, n } => {
                let mut y = vec![0.0; *n];
                for (set, g) in sets {
                    if set.last() != Some(&s) || *g == 0.0 {
                        continue;
                    }
                    for (k, yk) in y.iter_mut().enumerate() {
                        *yk += g * set[..set.len() - 1].iter().map(|&j| columns[j][k]).product::<f64>();
                    }
                }
                y
            }
            CbcState::Subsets { weights, exponent, table } => {
                let n = table[0].len();
                let mut y = vec![0.0; n];
                for (mask, row) in table.iter().enumerate() {
                    let mut u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
                    u.push(s);
                    let g = pw(weights.gamma(&u), *exponent);
                    if g == 0.0 {
                        continue;
                    }
                    for (yk, v) in y.iter_mut().zip(row) {
                        *yk += g * v;
                    }
                }
                y
            }
        }
    }

    /// Absorbs the kernel column `ω(x_{k,s})` of the chosen component.
    pub fn push(&mut self, s: usize, omega: &[f64]) {
        match self {
            CbcState::Product { w, p } => {
                for (pk, o) in p.iter_mut().zip(omega) {
                    *pk *= 1.0 + w[s] * o;
                }
            }
            CbcState::Order { beta, e, .. } => {
                let factor = beta.as_ref().map_or(1.0, |b| b[s]);
                for ell in (1..e.len()).rev() {
                    let (lo, hi) = e.split_at_mut(ell);
                    for ((cur, prev), o) in hi[0].iter_mut().zip(&lo[ell - 1]).zip(omega) {
                        *cur += prev * factor * o;
                    }
                }
            }
            CbcState::Diameter { diameter, window, bank, .. } => {
                let mut new_window = window.clone();
                new_window.push(s);
                if new_window.len() > *diameter - 1 {
                    new_window.remove(0);
                }
                let n = omega.len();
                let mut new_bank = Vec::with_capacity(1 << new_window.len());
                for mask in 0..1usize << new_window.len() {
                    let dims: Vec<usize> = new_window
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &d)| d)
                        .collect();
                    let has_new = dims.last() == Some(&s);
                    let old: Vec<usize> = dims.iter().copied().filter(|&d| d != s).collect();
                    let old_mask = window
                        .iter()
                        .enumerate()
                        .filter(|(_, d)| old.contains(d))
                        .fold(0usize, |acc, (i, _)| acc | 1 << i);
                    let src = &bank[old_mask];
                    let row: Vec<f64> = if has_new {
                        src.iter().zip(omega).map(|(a, o)| a * o).collect()
                    } else {
                        src.clone()
                    };
                    debug_assert_eq!(row.len(), n);
                    new_bank.push(row);
                }
                *window = new_window;
                *bank = new_bank;
            }
            CbcState::General { columns, .. } => columns.push(omega.to_vec()),
            CbcState::Subsets { table, .. } => {
                let extra: Vec<Vec<f64>> = table
                    .iter()
                    .map(|row| row.iter().zip(omega).map(|(a, o)| a * o).collect())
                    .collect();
                table.extend(extra);
            }
        }
    }
}

fn order_init(levels: usize, n_points: usize) -> Vec<Vec<f64>> {
    let mut e = vec![vec![0.0; n_points]; levels.max(1)];
    e[0] = vec![1.0; n_points];
    e
}

/// Reference `Y_s(k) = Σ_{u⊆{0..s-1}} γ_{u∪{s}}^{e} Π_{j∈u} ω_j(k)` by
/// enumerating every subset of the previous dimensions.
pub fn y_from_scratch(weights: &WeightScheme, exponent: f64, columns: &[Vec<f64>], s: usize, n_points: usize) -> Vec<f64> {
    let mut y = vec![0.0; n_points];
    for mask in 0..1usize << s {
        let mut u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
        let prods: Vec<f64> = (0..n_points)
            .map(|k| u.iter().map(|&j| columns[j][k]).product())
            .collect();
        u.push(s);
        let g = pw(weights.gamma(&u), exponent);
        for (yk, p) in y.iter_mut().zip(prods) {
            *yk += g * p;
        }
    }
    y
}

struct Setup {
    group: CyclicGroup,
    /// Kernel value per residue encoding.
    omega: OmegaTable,
    n_points: usize,
}

fn setup(target: &CbcTarget, space: &SpaceSpec) -> Result<Setup> {
    match target {
        CbcTarget::Lattice { n } => {
            if space.family.is_walsh() {
                return Err(Error::UnsupportedCombination(
                    "Walsh spaces need a polynomial lattice rule".into(),
                ));
            }
            if *n as usize > GROUP_LIMIT {
                return Err(Error::InvalidParameter(format!("N = {n} above {GROUP_LIMIT}")));
            }
            let group = CyclicGroup::integer(*n)?;
            let omega = space.lattice_residue_table(*n)?;
            Ok(Setup { group, omega, n_points: *n as usize })
        }
        CbcTarget::Polynomial { modulus, m, precision } => {
            if !space.family.is_walsh() {
                return Err(Error::UnsupportedCombination(
                    "Fourier spaces need a rank-1 lattice rule".into(),
                ));
            }
            // validates base, degrees and precision
            PolyLatticeRule::new(modulus.base(), modulus.clone(), *m, *precision, vec![Poly::one(modulus.base())])?;
            let d = modulus.degree().unwrap_or(0) as u32;
            if (modulus.base() as u64).pow(d) as usize > GROUP_LIMIT {
                return Err(Error::InvalidParameter(format!(
                    "residue ring of degree {d} exceeds the search cap"
                )));
            }
            let group = CyclicGroup::polynomial(modulus)?;
            let omega = space.poly_residue_table(modulus, *precision)?;
            Ok(Setup { group, omega, n_points: (modulus.base() as u64).pow(*m) as usize })
        }
    }
}

/// Theorem bound `((2/N) Σ_u γ_u^{q/(2λ)} Π_{j∈u} S_λ)^{λ/q}`.
pub fn theorem_bound(space: &SpaceSpec, n_points: u64, s: usize, lambda: f64) -> Result<f64> {
    let q = space.q();
    if q.is_infinite() {
        return Err(Error::QInfinityUnsupported);
    }
    let upper = space.decay();
    if !(lambda >= 1.0 && lambda < upper) {
        return Err(Error::LambdaOutOfRange { lambda, upper });
    }
    let sum = space.one_dim_sum(lambda, n_points)?;
    let inner = space.weights.subset_sum(q / (2.0 * lambda), &vec![sum; s])?;
    Ok((2.0 / n_points as f64 * inner).max(0.0).powf(lambda / q))
}

/// `{1, 1.25, …}` below `αq`.
pub fn default_lambda_grid(space: &SpaceSpec) -> Vec<f64> {
    let upper = space.decay();
    (0..)
        .map(|i| 1.0 + 0.25 * i as f64)
        .take_while(|&l| l < upper)
        .collect()
}

/// Candidates (as `encoding - 1`) whose search value is within the tie
/// tolerance of the minimum, in increasing encoding order.
fn near_minimum(theta: &[f64], scale: f64) -> Vec<usize> {
    let min = theta.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * scale.max(min.abs());
    theta
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= min + tol)
        .map(|(i, _)| i)
        .collect()
}

/// `N θ(z)` in double-double for the candidate with discrete log `lz`.
fn exact_theta(table: &OmegaTable, y: &[f64], logs: &[usize], elements: &[u64], lz: usize) -> Dd {
    let order = elements.len();
    let mut acc = table.dd(0).mul_f64(y[0]);
    for (k, &lg) in logs.iter().enumerate() {
        acc = acc.add(table.dd(elements[(lg + lz) % order] as usize).mul_f64(y[k + 1]));
    }
    acc
}

pub fn cbc_naive(target: &CbcTarget, s: usize, space: &SpaceSpec) -> Result<CbcResult> {
    cbc(target, s, space, &CbcOptions { method: Method::Naive, lambdas: Vec::new() })
}

pub fn cbc_fast(target: &CbcTarget, s: usize, space: &SpaceSpec) -> Result<CbcResult> {
    cbc(target, s, space, &CbcOptions { method: Method::Fast, lambdas: Vec::new() })
}

pub fn cbc(target: &CbcTarget, s: usize, space: &SpaceSpec, opts: &CbcOptions) -> Result<CbcResult> {
    if s == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    space.validate(s)?;
    let q = space.q();
    if q.is_infinite() {
        return Err(Error::QInfinityUnsupported);
    }
    for &l in &opts.lambdas {
        if !(l >= 1.0 && l < space.decay()) {
            return Err(Error::LambdaOutOfRange { lambda: l, upper: space.decay() });
        }
    }
    let Setup { group, omega: table, n_points } = setup(target, space)?;
    let omega = &table.values;
    let exponent = space.weight_exponent();
    let mut state = CbcState::new(&space.weights, exponent, s, n_points)?;
    let order = group.order();
    let elements = group.elements().to_vec();
    let logs: Vec<usize> = (1..n_points as u64)
        .map(|k| group.log(k).expect("point indices are nonzero residues"))
        .collect();
    let correlator = match opts.method {
        Method::Fast => {
            let b: Vec<f64> = elements.iter().map(|&e| omega[e as usize]).collect();
            Some(Correlator::new(&b))
        }
        Method::Naive => None,
    };
    let omega_max = omega.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut z = Vec::with_capacity(s);
    let mut error_powers = Vec::with_capacity(s);
    let mut thetas = Vec::with_capacity(s);
    let mut bounds = Vec::with_capacity(s);
    let mut timings = Vec::with_capacity(s);
    let mut acc = 0.0;
    for dim in 0..s {
        let start = Instant::now();
        let y = state.y(dim);
        let scale = y.iter().map(|v| v.abs()).sum::<f64>() * omega_max / n_points as f64;
        let head = y[0] * omega[0];
        // theta[c - 1] for candidate encoding c
        let mut theta = vec![0.0; order];
        match &correlator {
            Some(corr) => {
                let mut a = vec![0.0; order];
                for (k, &lg) in logs.iter().enumerate() {
                    a[lg] = y[k + 1];
                }
                let c = corr.correlate(&a);
                for (t, &val) in c.iter().enumerate() {
                    theta[elements[t] as usize - 1] = (head + val) / n_points as f64;
                }
            }
            None => {
                theta
                    .par_iter_mut()
                    .enumerate()
                    .for_each(|(idx, out)| {
                        let lz = logs_of(&group, idx as u64 + 1);
                        let mut sum = head;
                        for (k, &lg) in logs.iter().enumerate() {
                            sum += y[k + 1] * omega[elements[(lg + lz) % order] as usize];
                        }
                        *out = sum / n_points as f64;
                    });
            }
        }
        // Search values carry rounding of order ‖Y‖‖ω‖, which can exceed the
        // differences between good candidates; those are re-evaluated in
        // double-double, and so is the winner's θ.
        let tied = near_minimum(&theta, scale);
        let best = if tied.len() == 1 || tied.len() > REFINE_LIMIT {
            tied[0]
        } else {
            let exact: Vec<f64> = tied
                .iter()
                .map(|&i| exact_theta(&table, &y, &logs, &elements, logs_of(&group, i as u64 + 1)).to_f64())
                .collect();
            let min = exact.iter().copied().fold(f64::INFINITY, f64::min);
            let tol = EXACT_TIE_TOLERANCE * n_points as f64 * scale.max(min.abs());
            tied[exact.iter().position(|&e| e <= min + tol).expect("nonempty")]
        };
        let chosen = best as u64 + 1;
        let lz = group.log(chosen).expect("nonzero candidate");
        let mut column = vec![omega[0]; n_points];
        for (k, &lg) in logs.iter().enumerate() {
            column[k + 1] = omega[elements[(lg + lz) % order] as usize];
        }
        let th = exact_theta(&table, &y, &logs, &elements, lz).div_f64(n_points as f64).to_f64();
        state.push(dim, &column);
        acc += th;
        z.push(chosen);
        thetas.push(th);
        error_powers.push(acc);
        let mut b = Vec::with_capacity(opts.lambdas.len());
        for &lambda in &opts.lambdas {
            b.push(BoundEntry { lambda, bound: theorem_bound(space, n_points as u64, dim + 1, lambda)? });
        }
        bounds.push(b);
        timings.push(start.elapsed().as_secs_f64());
    }
    let rule = match target {
        CbcTarget::Lattice { n } => Rule::Lattice(LatticeRule::new(*n, z.clone())?),
        CbcTarget::Polynomial { modulus, m, precision } => {
            let b = modulus.base();
            Rule::Polynomial(PolyLatticeRule::new(
                b,
                modulus.clone(),
                *m,
                *precision,
                z.iter().map(|&c| Poly::from_int(b, c)).collect::<Result<_>>()?,
            )?)
        }
    };
    let errors = error_powers.iter().map(|v: &f64| v.max(0.0).powf(1.0 / q)).collect();
    Ok(CbcResult { rule, z, error_powers, errors, thetas, bounds, timings, method: opts.method })
}

fn logs_of(group: &CyclicGroup, c: u64) -> usize {
    group.log(c).expect("nonzero candidate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::find_irreducible;
    use crate::spaces::Family;
    use crate::wce::{wce_omega, wce_power};
    use crate::weights::SetWeight;

    fn korobov(s: usize) -> SpaceSpec {
        SpaceSpec::new(Family::Korobov, 2.0, 2.0, WeightScheme::product_geometric(0.9, s))
    }

    #[test]
    fn first_component_is_one() {
        for n in [3u64, 5, 11] {
            let r = cbc_fast(&CbcTarget::Lattice { n }, 1, &korobov(1)).unwrap();
            assert_eq!(r.z, vec![1]);
            let r = cbc_naive(&CbcTarget::Lattice { n }, 1, &korobov(1)).unwrap();
            assert_eq!(r.z, vec![1]);
        }
    }

    #[test]
    fn n5_s2_matches_global_search() {
        let sp = SpaceSpec::new(Family::Korobov, 2.0, 2.0, WeightScheme::product_constant(1.0, 2));
        let r = cbc_naive(&CbcTarget::Lattice { n: 5 }, 2, &sp).unwrap();
        let mut all = Vec::new();
        for z2 in 1..5 {
            let rule = Rule::Lattice(LatticeRule::new(5, vec![1, z2]).unwrap());
            all.push(wce_omega(&rule, &sp).unwrap());
        }
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((r.errors[1] - min).abs() < 1e-12);
        assert!(all.iter().any(|e| (e - r.errors[1]).abs() < 1e-12));
    }

    #[test]
    fn mirror_symmetry_picks_smaller() {
        let sp = korobov(2);
        for n in [7u64, 13, 31] {
            let r = cbc_naive(&CbcTarget::Lattice { n }, 2, &sp).unwrap();
            assert!(r.z[1] <= n / 2);
        }
    }

    #[test]
    fn fast_equals_naive_lattice() {
        for n in [3u64, 5, 7, 11, 13] {
            for s in 1..=6 {
                let sp = korobov(s);
                let a = cbc_fast(&CbcTarget::Lattice { n }, s, &sp).unwrap();
                let b = cbc_naive(&CbcTarget::Lattice { n }, s, &sp).unwrap();
                assert_eq!(a.z, b.z);
                for (x, y) in a.errors.iter().zip(&b.errors) {
                    assert!((x - y).abs() <= 1e-9 * y.abs());
                }
            }
        }
    }

    #[test]
    fn fast_equals_naive_polynomial() {
        for m in 3..=5u32 {
            let p = find_irreducible(2, m).unwrap();
            let sp = SpaceSpec::new(Family::Walsh, 2.0, f64::INFINITY, WeightScheme::product_geometric(0.9, 4));
            let t = CbcTarget::Polynomial { modulus: p, m, precision: m };
            let a = cbc_fast(&t, 4, &sp).unwrap();
            let b = cbc_naive(&t, 4, &sp).unwrap();
            assert_eq!(a.z, b.z);
            for (x, y) in a.errors.iter().zip(&b.errors) {
                assert!((x - y).abs() <= 1e-9 * y.abs());
            }
        }
    }

    #[test]
    fn recursion_and_independent_audit() {
        let sp = korobov(5);
        let r = cbc_fast(&CbcTarget::Lattice { n: 101 }, 5, &sp).unwrap();
        for s in 1..=5 {
            let prev = if s == 1 { 0.0 } else { r.error_powers[s - 2] };
            assert!((r.error_powers[s - 1] - prev - r.thetas[s - 1]).abs() <= 1e-10 * r.error_powers[s - 1]);
            let Rule::Lattice(rule) = &r.rule else { unreachable!() };
            let sub = Rule::Lattice(LatticeRule::new(101, rule.z()[..s].to_vec()).unwrap());
            let mut sp_s = sp.clone();
            sp_s.weights = WeightScheme::product_geometric(0.9, s);
            let e = wce_power(&sub, &sp_s).unwrap();
            assert!((e - r.error_powers[s - 1]).abs() <= 1e-9 * e);
        }
        assert!(r.errors.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lattice_needs_prime() {
        assert_eq!(cbc_fast(&CbcTarget::Lattice { n: 12 }, 2, &korobov(2)).unwrap_err(), Error::NotPrime(12));
    }

    #[test]
    fn theorem_bound_examples() {
        let zero = SpaceSpec::new(Family::Korobov, 2.0, 2.0, WeightScheme::product_constant(0.0, 3));
        assert_eq!(theorem_bound(&zero, 101, 3, 1.0).unwrap(), 0.0);
        let sp = korobov(4);
        let z4 = 2.0 * crate::special::zeta(4.0);
        let prod: f64 = (1..=4).map(|j| 1.0 + 0.9f64.powi(j) * z4).product();
        let expected = (2.0 / 101.0 * (prod - 1.0)).sqrt();
        assert!((theorem_bound(&sp, 101, 4, 1.0).unwrap() - expected).abs() < 1e-14);
        assert!(matches!(theorem_bound(&sp, 101, 4, 4.0), Err(Error::LambdaOutOfRange { .. })));
    }

    #[test]
    fn bounds_hold_for_constructed_rule() {
        let sp = korobov(6);
        let opts = CbcOptions { method: Method::Fast, lambdas: default_lambda_grid(&sp) };
        let r = cbc(&CbcTarget::Lattice { n: 251 }, 6, &sp, &opts).unwrap();
        for (e, b) in r.errors.iter().zip(&r.bounds) {
            for entry in b {
                assert!(*e <= entry.bound, "{e} > {entry:?}");
            }
        }
    }

    fn schemes(s: usize) -> Vec<WeightScheme> {
        let beta: Vec<f64> = (0..s).map(|j| 0.8f64.powi(j as i32 + 1)).collect();
        let big: Vec<f64> = (0..s).map(|l| 1.0 / (l as f64 + 1.0)).collect();
        vec![
            WeightScheme::product_geometric(0.7, s),
            WeightScheme::OrderDependent { order_weights: big.clone() },
            WeightScheme::Pod { order_weights: big.clone(), beta: beta.clone() },
            WeightScheme::FiniteOrderDependent { order_weights: big.clone(), order: 2 },
            WeightScheme::FiniteDiameter { diameter: 3, base: Box::new(WeightScheme::product_geometric(0.8, s)) },
            WeightScheme::Spod { alpha: 2, beta: beta.clone() },
            WeightScheme::General {
                sets: vec![
                    SetWeight { set: vec![0], gamma: 1.0 },
                    SetWeight { set: vec![1], gamma: 0.5 },
                    SetWeight { set: vec![0, 2], gamma: 0.3 },
                    SetWeight { set: vec![1, 2, 4], gamma: 0.2 },
                    SetWeight { set: vec![3], gamma: 0.4 },
                    SetWeight { set: vec![5], gamma: 0.1 },
                ],
            },
        ]
    }

    #[test]
    fn incremental_state_matches_scratch() {
        let n = 23usize;
        let s = 6;
        let columns: Vec<Vec<f64>> = (0..s)
            .map(|j| (0..n).map(|k| ((k * (j + 3)) % n) as f64 / n as f64 - 0.3).collect())
            .collect();
        for w in schemes(s) {
            let mut st = CbcState::new(&w, 1.0, s, n).unwrap();
            for dim in 0..s {
                let inc = st.y(dim);
                let scratch = y_from_scratch(&w, 1.0, &columns, dim, n);
                for (a, b) in inc.iter().zip(&scratch) {
                    assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{w:?} dim {dim}");
                }
                st.push(dim, &columns[dim]);
            }
        }
    }

    #[test]
    fn every_scheme_audits() {
        let s = 6;
        for w in schemes(s) {
            let sp = SpaceSpec::new(Family::Korobov, 1.5, 2.0, w.clone());
            let a = cbc_fast(&CbcTarget::Lattice { n: 31 }, s, &sp).unwrap();
            let b = cbc_naive(&CbcTarget::Lattice { n: 31 }, s, &sp).unwrap();
            assert_eq!(a.z, b.z, "{w:?}");
            let e = wce_power(&a.rule, &sp).unwrap();
            assert!((e - a.error_powers[s - 1]).abs() <= 1e-9 * e, "{w:?}");
        }
    }

    #[test]
    fn higher_order_polynomial() {
        let p = find_irreducible(2, 8).unwrap();
        let sp = SpaceSpec::new(Family::HigherOrderWalsh, 2.0, f64::INFINITY, WeightScheme::product_geometric(0.5, 3));
        let t = CbcTarget::Polynomial { modulus: p, m: 4, precision: 8 };
        let a = cbc_fast(&t, 3, &sp).unwrap();
        let b = cbc_naive(&t, 3, &sp).unwrap();
        assert_eq!(a.z, b.z);
        let e = wce_power(&a.rule, &sp).unwrap();
        assert!((e - a.error_powers[2]).abs() <= 1e-9 * e);
    }

    #[test]
    fn group_of_size_two() {
        let r = cbc_fast(&CbcTarget::Lattice { n: 3 }, 3, &korobov(3)).unwrap();
        let n = cbc_naive(&CbcTarget::Lattice { n: 3 }, 3, &korobov(3)).unwrap();
        assert_eq!(r.z, n.z);
    }
}
