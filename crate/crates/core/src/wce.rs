//! Worst-case errors (kernel route and dual-lattice enumeration) and the
//! figures of merit `P_α`, Zaremba index and polynomial `ρ` / t-value.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Poly;
use crate::error::{Error, Result};
use crate::points::{LatticeRule, PolyLatticeRule, Rule};
use crate::spaces::{Family, OmegaTable, SpaceSpec};
use crate::special::Dd;
use crate::weights::{WeightScheme, SUBSET_ENUMERATION_LIMIT};

/// Largest number of index vectors any exhaustive enumeration may visit.
pub const ENUMERATION_LIMIT: u64 = 1 << 32;

/// Per-dimension bound on the enumerated dual indices: `|h_j| ≤ h_max` for
/// Fourier spaces, `h_j < h_max` for Walsh spaces (`h_max` a power of `b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DualSearchBox {
    pub h_max: u64,
}

impl DualSearchBox {
    pub fn new(h_max: u64) -> Result<Self> {
        if h_max == 0 {
            return Err(Error::InvalidParameter("box bound must be >= 1".into()));
        }
        Ok(DualSearchBox { h_max })
    }

    /// `max(2N, 64)` for lattice rules, `b^{2n}` for polynomial rules.
    pub fn default_for(rule: &Rule) -> Self {
        match rule {
            Rule::Lattice(r) => DualSearchBox { h_max: (2 * r.n_points()).max(64) },
            Rule::Polynomial(r) => DualSearchBox {
                h_max: (r.base() as u64).saturating_pow(2 * r.precision()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForce {
    /// `(Σ over duals in the box)^{1/q}`, a lower bound on the error.
    pub value: f64,
    /// Bound on `e - value`.
    pub tail: f64,
    /// The truncated sum itself (the `q`-th power of `value`).
    pub power_sum: f64,
    /// Nonzero dual vectors found inside the box.
    pub dual_count: u64,
}

fn check_compat(rule: &Rule, space: &SpaceSpec) -> Result<()> {
    match rule {
        Rule::Lattice(_) if space.family.is_walsh() => Err(Error::UnsupportedCombination(
            "Walsh spaces need a polynomial lattice rule".into(),
        )),
        Rule::Polynomial(_) if !space.family.is_walsh() => Err(Error::UnsupportedCombination(
            "Fourier spaces need a rank-1 lattice rule".into(),
        )),
        Rule::Polynomial(r) if r.base() != space.base => Err(Error::InvalidParameter(
            "rule base differs from the space base".into(),
        )),
        _ => Ok(()),
    }
}

/// Kernel value for every residue of the rule's modulus.
pub(crate) fn residue_kernel(rule: &Rule, space: &SpaceSpec) -> Result<OmegaTable> {
    check_compat(rule, space)?;
    match rule {
        Rule::Lattice(r) => space.lattice_residue_table(r.n_points()),
        Rule::Polynomial(r) => space.poly_residue_table(r.modulus(), r.precision()),
    }
}

/// Residues (`k·z_j mod N` or `k(x)z_j(x) mod P(x)`) of every point.
pub(crate) fn residues(rule: &Rule) -> Vec<Vec<u64>> {
    match rule {
        Rule::Lattice(r) => (0..r.n_points()).into_par_iter().map(|k| r.numerators(k)).collect(),
        Rule::Polynomial(r) => (0..r.n_points()).into_par_iter().map(|k| r.residues(k)).collect(),
    }
}

/// `e^q = (1/N) Σ_k χ(x_k)`.
pub fn wce_power(rule: &Rule, space: &SpaceSpec) -> Result<f64> {
    space.validate(rule.dimension())?;
    let q = space.q();
    if q.is_infinite() {
        return Err(Error::QInfinityUnsupported);
    }
    let table = residue_kernel(rule, space)?;
    let e = space.weight_exponent();
    // The mean is far smaller than the individual χ values, so products and
    // the final sum are carried in double-double where the weights allow.
    let per_point: Vec<Dd> = match &space.weights {
        WeightScheme::Product { gamma } => {
            let w: Vec<f64> = gamma.iter().map(|&g| if g == 0.0 { 0.0 } else { g.powf(e) }).collect();
            residues(rule)
                .par_iter()
                .map(|res| {
                    let mut prod = Dd::from_f64(1.0);
                    let mut minus_one = Dd::ZERO;
                    for (&r, &wj) in res.iter().zip(&w) {
                        // Π(1 + w ω) - 1, accumulated as Σ_j (Π_{i<j}(1 + w_i ω_i)) w_j ω_j
                        let term = prod.mul(table.dd(r as usize).mul_f64(wj));
                        minus_one = minus_one.add(term);
                        prod = prod.add(term);
                    }
                    minus_one
                })
                .collect()
        }
        _ => residues(rule)
            .par_iter()
            .map(|res| {
                let omegas: Vec<f64> = res.iter().map(|&r| table.values[r as usize]).collect();
                space.weights.subset_sum(e, &omegas).map(Dd::from_f64)
            })
            .collect::<Result<_>>()?,
    };
    let total = per_point.iter().fold(Dd::ZERO, |acc, v| acc.add(*v));
    Ok(total.div_f64(rule.n_points() as f64).to_f64())
}

/// Worst-case error `((1/N) Σ_k χ(x_k))^{1/q}`.
pub fn wce_omega(rule: &Rule, space: &SpaceSpec) -> Result<f64> {
    Ok(wce_power(rule, space)?.max(0.0).powf(1.0 / space.q()))
}

/// `γ_u^{q/2}` for every subset mask of `{0..s-1}`.
fn weight_powers(weights: &WeightScheme, s: usize, exponent: f64) -> Result<Vec<f64>> {
    if s > SUBSET_ENUMERATION_LIMIT {
        return Err(Error::UnsupportedWeights(format!(
            "enumeration over subsets needs s <= {SUBSET_ENUMERATION_LIMIT}"
        )));
    }
    Ok((0..1usize << s)
        .map(|mask| {
            if mask == 0 {
                return 0.0;
            }
            let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
            let g = weights.gamma(&u);
            if g == 0.0 {
                0.0
            } else {
                g.powf(exponent)
            }
        })
        .collect())
}

/// Truncated dual sum `Σ_{0≠h∈L⊥, h∈box} γ_{u(h)}^{q/2} Π c(h_j)` with a
/// certified bound on the omitted part.
pub fn wce_bruteforce(rule: &Rule, space: &SpaceSpec, bx: DualSearchBox) -> Result<BruteForce> {
    check_compat(rule, space)?;
    space.validate(rule.dimension())?;
    let q = space.q();
    if q.is_infinite() {
        return Err(Error::QInfinityUnsupported);
    }
    let s = rule.dimension();
    let gpow = weight_powers(&space.weights, s, space.weight_exponent())?;
    let n_points = rule.n_points();
    let (power_sum, dual_count, inside) = match rule {
        Rule::Lattice(r) => lattice_dual_sum(r, space, bx.h_max, &gpow)?,
        Rule::Polynomial(r) => poly_dual_sum(r, space, bx.h_max, &gpow)?,
    };
    let outside = space.coefficient_tail(bx.h_max, n_points)?;
    // Σ_u γ_u^{q/2} [Π_{j∈u}(T_in + T_out) - Π_{j∈u} T_in]
    let mut tail_power = 0.0;
    for (mask, &g) in gpow.iter().enumerate().skip(1) {
        if g == 0.0 {
            continue;
        }
        let size = mask.count_ones() as i32;
        tail_power += g * ((inside + outside).powi(size) - inside.powi(size));
    }
    let value = power_sum.max(0.0).powf(1.0 / q);
    let upper = (power_sum.max(0.0) + tail_power).powf(1.0 / q);
    Ok(BruteForce { value, tail: upper - value, power_sum, dual_count })
}

/// Returns `(sum, count, Σ_{h≠0 in box} c(h))`.
fn lattice_dual_sum(
    rule: &LatticeRule,
    space: &SpaceSpec,
    h_max: u64,
    gpow: &[f64],
) -> Result<(f64, u64, f64)> {
    let s = rule.dimension();
    let n = rule.n_points() as i64;
    let h = h_max as i64;
    let width = 2 * h_max + 1;
    if (width as f64).powi(s as i32) > ENUMERATION_LIMIT as f64 {
        return Err(Error::SearchExhausted(format!("{width}^{s} index vectors")));
    }
    let coeff: Vec<f64> = (-h..=h).map(|v| space.coefficient(v, rule.n_points())).collect();
    let inside: f64 = coeff.iter().sum();
    let z: Vec<i64> = rule.z().iter().map(|&v| v as i64).collect();
    let partials: Vec<(f64, u64)> = (-h..=h)
        .into_par_iter()
        .map(|h1| {
            let mut idx = vec![-h; s];
            idx[0] = h1;
            let mut sum = 0.0;
            let mut count = 0u64;
            loop {
                let dot = idx.iter().zip(&z).map(|(a, b)| a * b).sum::<i64>();
                if dot.rem_euclid(n) == 0 {
                    let mut mask = 0usize;
                    let mut prod = 1.0;
                    for (j, &v) in idx.iter().enumerate() {
                        if v != 0 {
                            mask |= 1 << j;
                            prod *= coeff[(v + h) as usize];
                        }
                    }
                    if mask != 0 {
                        sum += gpow[mask] * prod;
                        count += 1;
                    }
                }
                // odometer over dimensions 1..s
                let mut j = 1;
                while j < s {
                    if idx[j] < h {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = -h;
                    j += 1;
                }
                if j == s {
                    break;
                }
            }
            (sum, count)
        })
        .collect();
    let sum = partials.iter().map(|p| p.0).sum();
    let count = partials.iter().map(|p| p.1).sum();
    Ok((sum, count, inside))
}

/// Sum of two residue encodings over `F_b`.
pub(crate) fn add_enc(a: u64, b: u64, base: u32) -> u64 {
    if base == 2 {
        return a ^ b;
    }
    let bb = base as u64;
    let (mut a, mut b) = (a, b);
    let mut out = 0u64;
    let mut pw = 1u64;
    while a > 0 || b > 0 {
        out += ((a % bb + b % bb) % bb) * pw;
        a /= bb;
        b /= bb;
        pw *= bb;
    }
    out
}

/// `v(x)·z_j(x) mod P(x)` for every `v < b^n`, per dimension.
fn truncation_products(rule: &PolyLatticeRule) -> Vec<Vec<u64>> {
    let b = rule.base();
    let size = rule.scale();
    rule.z()
        .iter()
        .map(|zj| {
            (0..size)
                .map(|v| {
                    Poly::from_int(b, v)
                        .expect("base checked at construction")
                        .mul_mod(zj, rule.modulus())
                        .to_int()
                })
                .collect()
        })
        .collect()
}

fn poly_dual_threshold(rule: &PolyLatticeRule) -> u64 {
    let d = rule.modulus().degree().unwrap_or(0) as u32;
    (rule.base() as u64).pow(d - rule.m())
}

/// Dual test: `deg(Σ_j tr_n(h_j) z_j mod P) < deg P - m`.
pub fn poly_dual_congruence(rule: &PolyLatticeRule, h: &[u64]) -> bool {
    let b = rule.base();
    let scale = rule.scale();
    let mut acc = Poly::zero(b);
    for (hj, zj) in h.iter().zip(rule.z()) {
        let t = Poly::from_int(b, hj % scale).expect("base checked at construction");
        acc = acc.add(&t.mul(zj));
    }
    acc.rem(rule.modulus()).to_int() < poly_dual_threshold(rule)
}

/// `(1/b^m) Σ_k wal_h(x_k)` (real part; the imaginary part vanishes).
pub fn poly_character_sum(rule: &PolyLatticeRule, h: &[u64]) -> f64 {
    let b = rule.base();
    let n = rule.precision();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..rule.n_points() {
        let pt = rule.digit_point(k);
        let mut w = Complex64::new(1.0, 0.0);
        for (&hj, &y) in h.iter().zip(&pt) {
            w *= crate::spaces::walsh(b, hj, y, n);
        }
        sum += w;
    }
    sum.re / rule.n_points() as f64
}

/// `h·z ≡ 0 (mod N)`.
pub fn lattice_dual_congruence(rule: &LatticeRule, h: &[i64]) -> bool {
    let n = rule.n_points() as i128;
    h.iter()
        .zip(rule.z())
        .map(|(&a, &b)| a as i128 * b as i128)
        .sum::<i128>()
        .rem_euclid(n)
        == 0
}

/// `(1/N) |Σ_k e^{2πi h·x_k}|`.
pub fn lattice_character_sum(rule: &LatticeRule, h: &[i64]) -> f64 {
    let n = rule.n_points() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..rule.n_points() {
        let phase = rule
            .numerators(k)
            .iter()
            .zip(h)
            .map(|(&x, &hj)| (x as i64 * hj).rem_euclid(n))
            .sum::<i64>()
            .rem_euclid(n);
        sum += Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / n as f64);
    }
    sum.norm() / n as f64
}

/// Walsh dual sum, grouping the indices `h_j < h_max` by `tr_n(h_j)` since
/// both the dual condition and the Walsh characters depend only on it.
fn poly_dual_sum(
    rule: &PolyLatticeRule,
    space: &SpaceSpec,
    h_max: u64,
    gpow: &[f64],
) -> Result<(f64, u64, f64)> {
    let b = rule.base() as u64;
    let mut pw = 1u64;
    while pw < h_max {
        pw = pw.checked_mul(b).ok_or_else(|| Error::InvalidParameter("box too large".into()))?;
    }
    if pw != h_max {
        return Err(Error::InvalidParameter(format!(
            "Walsh box bound {h_max} must be a power of {b}"
        )));
    }
    let s = rule.dimension();
    let scale = rule.scale();
    let groups = scale.min(h_max);
    if (groups as f64).powi(s as i32) > ENUMERATION_LIMIT as f64 || h_max > ENUMERATION_LIMIT {
        return Err(Error::SearchExhausted(format!("{groups}^{s} residue classes")));
    }
    // class[v] = Σ_{0≠h<h_max, h≡v mod b^n} c(h); class_count[v] likewise
    let mut class = vec![0.0; groups as usize];
    let mut class_count = vec![0u64; groups as usize];
    for h in 1..h_max {
        let v = (h % scale) as usize;
        class[v] += space.coefficient(h as i64, rule.n_points());
        class_count[v] += 1;
    }
    let inside: f64 = class.iter().sum();
    let prods = truncation_products(rule);
    let threshold = poly_dual_threshold(rule);
    let base = rule.base();
    let partials: Vec<(f64, u64)> = (0..groups)
        .into_par_iter()
        .map(|v1| {
            let mut idx = vec![0u64; s];
            idx[0] = v1;
            let mut sum = 0.0;
            let mut count = 0u64;
            loop {
                let r = idx
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &v)| add_enc(acc, prods[j][v as usize], base));
                if r < threshold {
                    // coordinates with class 0 may be zero or a nonzero multiple of b^n
                    let zero_dims: Vec<usize> = (0..s).filter(|&j| idx[j] == 0).collect();
                    let mut fixed_mask = 0usize;
                    let mut fixed = 1.0;
                    let mut fixed_count = 1u64;
                    for j in 0..s {
                        if idx[j] != 0 {
                            fixed_mask |= 1 << j;
                            fixed *= class[idx[j] as usize];
                            fixed_count *= class_count[idx[j] as usize];
                        }
                    }
                    for sub in 0u64..(1 << zero_dims.len()) {
                        let mut mask = fixed_mask;
                        let mut prod = fixed;
                        let mut cnt = fixed_count;
                        for (bit, &j) in zero_dims.iter().enumerate() {
                            if sub >> bit & 1 == 1 {
                                mask |= 1 << j;
                                prod *= class[0];
                                cnt *= class_count[0];
                            }
                        }
                        if mask != 0 {
                            sum += gpow[mask] * prod;
                            count += cnt;
                        }
                    }
                }
                let mut j = 1;
                while j < s {
                    if idx[j] + 1 < groups {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == s {
                    break;
                }
            }
            (sum, count)
        })
        .collect();
    let sum = partials.iter().map(|p| p.0).sum();
    let count = partials.iter().map(|p| p.1).sum();
    Ok((sum, count, inside))
}

/// Truncated `P_α = Σ_{0≠h∈L⊥, |h_j|≤H} Π max(1,|h_j|)^{-α}`.
pub fn p_alpha(rule: &LatticeRule, alpha: f64, bx: DualSearchBox) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must exceed 1")));
    }
    let space = SpaceSpec::new(
        Family::Korobov,
        alpha,
        f64::INFINITY,
        WeightScheme::product_constant(1.0, rule.dimension()),
    );
    Ok(wce_bruteforce(&Rule::Lattice(rule.clone()), &space, bx)?.power_sum)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Zaremba {
    /// `min_{0≠h∈L⊥} γ_{u(h)}^{-1/2} Π max(1,|h_j|)`
    pub rho: f64,
    pub argmin: Vec<i64>,
}

/// Weighted Zaremba index by exhaustive search over `|h_j| ≤ H`, `H ≥ N`.
pub fn zaremba_index(rule: &LatticeRule, weights: &WeightScheme, bx: DualSearchBox) -> Result<Zaremba> {
    let n = rule.n_points();
    let s = rule.dimension();
    if bx.h_max < n {
        return Err(Error::BoxTooSmall(format!(
            "H = {} must be at least N = {n}",
            bx.h_max
        )));
    }
    let width = 2 * bx.h_max + 1;
    if (width as f64).powi(s as i32) > ENUMERATION_LIMIT as f64 {
        return Err(Error::SearchExhausted(format!("{width}^{s} index vectors")));
    }
    weights.validate(s)?;
    let gscale = weight_powers(weights, s, -0.5)
        .map(|v| v.into_iter().map(|g| if g == 0.0 { f64::INFINITY } else { g }).collect::<Vec<_>>())?;
    // weight_powers maps γ = 0 to 0, which must mean "excluded" here
    let zero_weight: Vec<bool> = (0..1usize << s)
        .map(|mask| {
            mask != 0 && {
                let u: Vec<usize> = (0..s).filter(|j| mask >> j & 1 == 1).collect();
                weights.gamma(&u) == 0.0
            }
        })
        .collect();
    let h = bx.h_max as i64;
    let ni = n as i64;
    let z: Vec<i64> = rule.z().iter().map(|&v| v as i64).collect();
    let best = (-h..=h)
        .into_par_iter()
        .map(|h1| {
            let mut idx = vec![-h; s];
            idx[0] = h1;
            let mut best: Option<(f64, Vec<i64>)> = None;
            loop {
                let dot = idx.iter().zip(&z).map(|(a, b)| a * b).sum::<i64>();
                if dot.rem_euclid(ni) == 0 {
                    let mut mask = 0usize;
                    let mut prod = 1.0;
                    for (j, &v) in idx.iter().enumerate() {
                        if v != 0 {
                            mask |= 1 << j;
                            prod *= v.unsigned_abs() as f64;
                        }
                    }
                    if mask != 0 && !zero_weight[mask] {
                        let val = prod * gscale[mask];
                        if best.as_ref().is_none_or(|(b, _)| val < *b) {
                            best = Some((val, idx.clone()));
                        }
                    }
                }
                let mut j = 1;
                while j < s {
                    if idx[j] < h {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = -h;
                    j += 1;
                }
                if j == s {
                    break;
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<i64>)>, |acc, cand| match acc {
            Some(a) if a.0 <= cand.0 => Some(a),
            _ => Some(cand),
        });
    let (rho, argmin) = best.ok_or_else(|| Error::BoxTooSmall("no weighted dual vector in the box".into()))?;
    Ok(Zaremba { rho, argmin })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FigureOfMerit {
    pub rho: i64,
    pub t_value: i64,
    /// A minimizing dual vector (coefficient encodings), if one exists with
    /// `deg h_j < n`.
    pub argmin: Option<Vec<u64>>,
}

/// `ρ = min(m, (s-1) + min Σ_j deg h_j)` over nonzero duals with
/// `deg h_j < n` (`deg 0 = -1`), and `t = m - ρ`.
pub fn poly_figure_of_merit(rule: &PolyLatticeRule) -> Result<FigureOfMerit> {
    let s = rule.dimension();
    let m = rule.m() as i64;
    let scale = rule.scale();
    if rule.m() > 10 || (scale as f64).powi(s as i32) > ENUMERATION_LIMIT as f64 * 4.0 {
        return Err(Error::SearchExhausted(format!(
            "m = {} with {} dimensions exceeds the exhaustive bound",
            rule.m(),
            s
        )));
    }
    let prods = truncation_products(rule);
    let threshold = poly_dual_threshold(rule);
    let base = rule.base();
    let b = base as u64;
    // deg(v) for v < b^n, with deg 0 = -1
    let degree = |v: u64| -> i64 {
        let mut d = -1;
        let mut x = v;
        while x > 0 {
            x /= b;
            d += 1;
        }
        d
    };
    // the best admissible degree sum: anything ≥ m - (s-1) gives ρ = m
    let cap = m - (s as i64 - 1);
    let mut best: Option<(i64, Vec<u64>)> = None;
    let mut idx = vec![0u64; s];

    #[allow(clippy::too_many_arguments)]
    fn search(
        j: usize,
        partial_deg: i64,
        acc: u64,
        idx: &mut Vec<u64>,
        best: &mut Option<(i64, Vec<u64>)>,
        cap: i64,
        ctx: &(&[Vec<u64>], u64, u32, u64, usize),
        degree: &dyn Fn(u64) -> i64,
    ) {
        let (prods, threshold, base, scale, s) = *ctx;
        let limit = best.as_ref().map_or(cap, |b| b.0);
        let remaining = (s - j) as i64;
        for v in 0..scale {
            let d = degree(v);
            // remaining coordinates contribute at least -1 each
            if partial_deg + d - (remaining - 1) >= best.as_ref().map_or(limit, |b| b.0) {
                break;
            }
            idx[j] = v;
            let next = add_enc(acc, prods[j][v as usize], base);
            if j + 1 == s {
                if next < threshold && idx.iter().any(|&x| x != 0) {
                    let total = partial_deg + d;
                    if best.as_ref().is_none_or(|b| total < b.0) {
                        *best = Some((total, idx.clone()));
                    }
                }
            } else {
                search(j + 1, partial_deg + d, next, idx, best, cap, ctx, degree);
            }
        }
        idx[j] = 0;
    }

    let ctx = (prods.as_slice(), threshold, base, scale, s);
    search(0, 0, 0, &mut idx, &mut best, cap, &ctx, &degree);
    let (rho, argmin) = match best {
        Some((sum, h)) => ((s as i64 - 1 + sum).min(m), Some(h)),
        None => (m, None),
    };
    Ok(FigureOfMerit { rho, t_value: m - rho, argmin })
}

/// Exhaustive reference for [`poly_figure_of_merit`] without pruning.
pub fn poly_figure_of_merit_exhaustive(rule: &PolyLatticeRule) -> Result<i64> {
    let s = rule.dimension();
    let scale = rule.scale();
    if (scale as f64).powi(s as i32) > ENUMERATION_LIMIT as f64 {
        return Err(Error::SearchExhausted("exhaustive figure of merit".into()));
    }
    let b = rule.base() as u64;
    let deg = |v: u64| -> i64 {
        let mut d = -1;
        let mut x = v;
        while x > 0 {
            x /= b;
            d += 1;
        }
        d
    };
    let mut best = i64::MAX;
    let total = scale.pow(s as u32);
    for code in 1..total {
        let mut h = Vec::with_capacity(s);
        let mut c = code;
        for _ in 0..s {
            h.push(c % scale);
            c /= scale;
        }
        if poly_dual_congruence(rule, &h) {
            best = best.min(h.iter().map(|&v| deg(v)).sum());
        }
    }
    let m = rule.m() as i64;
    Ok(if best == i64::MAX { m } else { (s as i64 - 1 + best).min(m) })
}
