//! End-to-end oracle checks shared by the acceptance suite and `selftest`.
//!
//! Each check compares two independent routes (fast vs. naive search, kernel
//! sums vs. dual enumeration, closed forms vs. truncated series, …) and
//! reports a single pass/fail verdict with a short detail line.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::algebra::{find_irreducible, is_prime, Poly};
use crate::cbc::{cbc, CbcOptions, CbcResult, CbcTarget, Method};
use crate::error::Result;
use crate::points::{int_to_digits, lattice_points, tent_transform, LatticeRule, PolyLatticeRule, Rule};
use crate::qmc::{integrate, BernoulliProduct, Randomization};
use crate::spaces::{
    chi_eval, korobov_closed, korobov_series, omega2, omega3, r_alpha, walsh, walsh_kernel, Family, SpaceSpec,
};
use crate::special::zeta;
use crate::wce::{
    poly_character_sum, poly_dual_congruence, poly_figure_of_merit, poly_figure_of_merit_exhaustive, wce_bruteforce,
    wce_omega, DualSearchBox,
};
use crate::weights::WeightScheme;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, detail }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Problem sizes: `Full` is the acceptance configuration, `Quick` a reduced
/// one for `selftest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Quick,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn korobov_product(alpha: f64, p: f64, s: usize) -> SpaceSpec {
    SpaceSpec::new(Family::Korobov, alpha, p, WeightScheme::product_geometric(0.9, s))
}

fn bound_lambdas(space: &SpaceSpec) -> Vec<f64> {
    vec![1.0, 1.5, space.decay() - 0.25]
}

fn cbc_sizes(scale: Scale) -> (Vec<u64>, Vec<usize>) {
    match scale {
        Scale::Full => (vec![5, 7, 11, 13, 101, 1009], vec![2, 4, 8]),
        Scale::Quick => (vec![5, 7, 11, 13, 101], vec![2, 4]),
    }
}

/// Fast and naive CBC choose identical vectors with matching errors.
pub fn fast_naive_equivalence(scale: Scale) -> Check {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let (ns, ss) = cbc_sizes(scale);
        let mut worst: f64 = 0.0;
        let mut mismatches = 0;
        for &n in &ns {
            for &s in &ss {
                let sp = korobov_product(2.0, 2.0, s);
                let t = CbcTarget::Lattice { n };
                let a = cbc(&t, s, &sp, &CbcOptions { method: Method::Fast, lambdas: vec![] })?;
                let b = cbc(&t, s, &sp, &CbcOptions { method: Method::Naive, lambdas: vec![] })?;
                if a.z != b.z {
                    mismatches += 1;
                }
                for (x, y) in a.errors.iter().zip(&b.errors) {
                    worst = worst.max(rel(*x, *y));
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let limit = 30.0;
        Ok((
            mismatches == 0 && worst <= 1e-9 && secs < limit,
            format!("{mismatches} vector mismatches, max rel error diff {worst:.2e}, {secs:.2} s (limit {limit} s)"),
        ))
    };
    Check::from_result("fast/naive CBC equivalence", run())
}

/// `e = (2ζ(αq))^{1/q} N^{-α}` in one dimension.
pub fn one_dimensional_value(_scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for n in [3u64, 5, 101] {
            for (alpha, q) in [(2.0, 2.0), (3.0, 1.0), (2.0, 1.0)] {
                let p = if q == 1.0 { f64::INFINITY } else { q / (q - 1.0) };
                let sp = SpaceSpec::new(Family::Korobov, alpha, p, WeightScheme::product_constant(1.0, 1));
                let rule = Rule::Lattice(LatticeRule::new(n, vec![1])?);
                let e = wce_omega(&rule, &sp)?;
                let expected = (2.0 * zeta(alpha * q)).powf(1.0 / q) * (n as f64).powf(-alpha);
                worst = worst.max(rel(e, expected));
            }
        }
        Ok((worst <= 1e-10, format!("max rel deviation {worst:.2e} (tol 1e-10)")))
    };
    Check::from_result("one-dimensional analytic value", run())
}

/// Every CBC rule of the equivalence sweep stays below the theorem bound.
pub fn theorem_bounds(scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let (ns, ss) = cbc_sizes(scale);
        let mut violations = 0;
        let mut checked = 0;
        let mut tightest = f64::INFINITY;
        for &n in &ns {
            for &s in &ss {
                let sp = korobov_product(2.0, 2.0, s);
                let r = cbc(&CbcTarget::Lattice { n }, s, &sp, &CbcOptions { method: Method::Fast, lambdas: bound_lambdas(&sp) })?;
                for (e, bounds) in r.errors.iter().zip(&r.bounds) {
                    for b in bounds {
                        checked += 1;
                        tightest = tightest.min(b.bound / e);
                        if *e > b.bound {
                            violations += 1;
                        }
                    }
                }
            }
        }
        Ok((violations == 0, format!("{violations} violations in {checked} comparisons, min bound/error {tightest:.3}")))
    };
    Check::from_result("theorem-bound compliance", run())
}

/// Truncated dual enumeration brackets the kernel-sum error.
pub fn bruteforce_sandwich(scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let count = if scale == Scale::Full { 25 } else { 8 };
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let spaces = [(2.0, 2.0), (1.5, 2.0), (2.0, f64::INFINITY), (1.5, 4.0)];
        let mut violations = 0;
        let mut max_gap: f64 = 0.0;
        for i in 0..count {
            let n = rng.gen_range(2..=31u64);
            let s = rng.gen_range(1..=3usize);
            let z: Vec<u64> = (0..s).map(|_| rng.gen_range(1..n)).collect();
            let (alpha, p) = spaces[i % spaces.len()];
            let sp = SpaceSpec::new(Family::Korobov, alpha, p, WeightScheme::product_geometric(0.8, s));
            let rule = Rule::Lattice(LatticeRule::new(n, z)?);
            let e = wce_omega(&rule, &sp)?;
            let bf = wce_bruteforce(&rule, &sp, DualSearchBox::default_for(&rule))?;
            // relative slack covers rounding only
            let eps = 1e-12 * e.max(bf.value);
            if bf.value > e + eps || e > bf.value + bf.tail + eps {
                violations += 1;
            }
            max_gap = max_gap.max(e - bf.value);
        }
        Ok((violations == 0, format!("{violations} violations over {count} rules, max kernel-minus-truncated {max_gap:.2e}")))
    };
    Check::from_result("brute-force sandwich", run())
}

/// Cosine-space error of tent-transformed points equals the Korobov error of
/// the plain rule when `κ = 2^{1/q}`.
pub fn tent_cosine(scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let ns: &[u64] = if scale == Scale::Full { &[7, 8, 16, 17, 31, 32] } else { &[8, 17] };
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for &n in ns {
            for s in 1..=3usize {
                for a in [1u64, 3, 5] {
                    let z: Vec<u64> = (0..s as u32).map(|j| a.pow(j) % n).collect();
                    if z.contains(&0) {
                        continue;
                    }
                    let lat = LatticeRule::new(n, z)?;
                    let rule = Rule::Lattice(lat.clone());
                    for (alpha, p) in [(2.0, 2.0), (1.0, 2.0), (2.0, f64::INFINITY)] {
                        let w = WeightScheme::product_geometric(0.7, s);
                        let kor = SpaceSpec::new(Family::Korobov, alpha, p, w.clone());
                        let q = kor.q();
                        let cos = SpaceSpec::new(Family::Cosine, alpha, p, w).with_kappa(2f64.powf(1.0 / q));
                        let e_kor = wce_omega(&rule, &kor)?;
                        // explicit route: transform, then evaluate the cosine kernel
                        let mut acc = 0.0;
                        for x in lattice_points(&lat) {
                            let phi: Vec<f64> = x.iter().map(|&v| tent_transform(v)).collect::<Result<_>>()?;
                            acc += chi_eval(&cos, &phi)?;
                        }
                        let e_tent = (acc / n as f64).max(0.0).powf(1.0 / q);
                        let e_table = wce_omega(&rule, &cos)?;
                        worst = worst.max((e_tent - e_kor).abs()).max((e_table - e_kor).abs());
                        cases += 1;
                    }
                }
            }
        }
        Ok((worst <= 1e-10, format!("{cases} cases, max abs difference {worst:.2e} (tol 1e-10)")))
    };
    Check::from_result("tent/cosine equivalence", run())
}

fn walsh_space(s: usize) -> SpaceSpec {
    SpaceSpec::new(Family::Walsh, 2.0, f64::INFINITY, WeightScheme::product_geometric(0.9, s))
}

fn poly_rules(ms: &[u32], s: usize) -> Result<Vec<(CbcResult, CbcResult)>> {
    ms.iter()
        .map(|&m| {
            let t = CbcTarget::Polynomial { modulus: find_irreducible(2, m)?, m, precision: m };
            let sp = walsh_space(s);
            Ok((
                cbc(&t, s, &sp, &CbcOptions { method: Method::Fast, lambdas: vec![] })?,
                cbc(&t, s, &sp, &CbcOptions { method: Method::Naive, lambdas: vec![] })?,
            ))
        })
        .collect()
}

/// Dual-membership test via the congruence versus exact character sums over
/// every `h` with `h_j < 2^{2n}`, for `b = 2`.
///
/// The congruence is linear over GF(2) in the digits of `h`, so each
/// component contributes an XOR mask `tr_n(h_j) z_j mod P`; character sums
/// only see `h_j mod 2^n` and are tabulated once per residue tuple.
fn congruence_vs_characters(rule: &PolyLatticeRule) -> (u64, u64) {
    let n = rule.precision();
    let s = rule.dimension();
    let deg = rule.modulus().degree().unwrap_or(0) as u32;
    let cut = 1u64 << (deg - rule.m());
    let low = 1u64 << n;
    let high = 1u64 << (2 * n);
    let masks: Vec<Vec<u64>> = rule
        .z()
        .iter()
        .map(|zj| {
            (0..low)
                .map(|h| Poly::from_int(2, h).expect("binary digits").mul_mod(zj, rule.modulus()).to_int())
                .collect()
        })
        .collect();
    let residue_count = low.pow(s as u32);
    let mut table = vec![false; residue_count as usize];
    let mut library_mismatch = 0u64;
    for idx in 0..residue_count {
        let h: Vec<u64> = (0..s).map(|j| idx / low.pow(j as u32) % low).collect();
        let sum = poly_character_sum(rule, &h);
        table[idx as usize] = (sum - 1.0).abs() < 0.5;
        let image = h.iter().enumerate().fold(0u64, |acc, (j, &hj)| acc ^ masks[j][hj as usize]);
        if poly_dual_congruence(rule, &h) != (image < cut) {
            library_mismatch += 1;
        }
    }
    let mut mismatches = library_mismatch;
    let mut visited = 0u64;
    let total = high.pow(s as u32);
    for idx in 0..total {
        let mut image = 0u64;
        let mut residue = 0u64;
        let mut rest = idx;
        let mut place = 1u64;
        for mask in &masks {
            let hj = rest & (high - 1);
            rest >>= 2 * n;
            let r = hj & (low - 1);
            image ^= mask[r as usize];
            residue += r * place;
            place <<= n;
        }
        if (image < cut) != table[residue as usize] {
            mismatches += 1;
        }
        visited += 1;
    }
    (visited, mismatches)
}

/// Polynomial lattice rules: congruence vs. characters, fast vs. naive CBC
/// in the Walsh space, figure of merit vs. exhaustive enumeration.
pub fn polynomial_lattices(scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let ms: &[u32] = if scale == Scale::Full { &[3, 4, 5] } else { &[3, 4] };
        let mut vectors = 0u64;
        let mut congruence_bad = 0u64;
        let mut cbc_bad = 0;
        let mut fom_bad = 0;
        for s in 1..=3usize {
            for (fast, naive) in poly_rules(ms, s)? {
                if fast.z != naive.z || fast.errors.iter().zip(&naive.errors).any(|(a, b)| rel(*a, *b) > 1e-9) {
                    cbc_bad += 1;
                }
                let Rule::Polynomial(rule) = &fast.rule else { unreachable!() };
                let (v, bad) = congruence_vs_characters(rule);
                vectors += v;
                congruence_bad += bad;
                let fom = poly_figure_of_merit(rule)?;
                let exhaustive = poly_figure_of_merit_exhaustive(rule)?;
                if fom.t_value < 0 || fom.rho != exhaustive {
                    fom_bad += 1;
                }
            }
        }
        Ok((
            congruence_bad == 0 && cbc_bad == 0 && fom_bad == 0,
            format!(
                "(a) {congruence_bad} disagreements over {vectors} dual candidates; (b) {cbc_bad} fast/naive mismatches; (c) {fom_bad} figure-of-merit mismatches"
            ),
        ))
    };
    Check::from_result("polynomial-lattice correctness", run())
}

fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// Log-log slope of CBC worst-case errors over increasing primes.
pub fn convergence_slope(scale: Scale) -> Check {
    let start = Instant::now();
    let run = || -> Result<(bool, String)> {
        let targets: &[u64] = if scale == Scale::Full {
            &[53, 211, 401, 809, 1607, 3203, 6421]
        } else {
            &[53, 211, 401, 809]
        };
        let ns: Vec<CbcTarget> = targets.iter().map(|&t| CbcTarget::Lattice { n: next_prime(t) }).collect();
        let sp = korobov_product(2.0, 2.0, 4);
        let st = crate::qmc::convergence_study(&sp, &crate::qmc::StudyMode::WorstCase, &ns, 4)?;
        let secs = start.elapsed().as_secs_f64();
        let slope = st.slope.unwrap_or(f64::NAN);
        let limit = 120.0;
        Ok((
            (-2.3..=-1.6).contains(&slope) && secs < limit,
            format!("slope {slope:.4} over N = {:?} (want [-2.3, -1.6]), {secs:.2} s (limit {limit} s)", st.rows.iter().map(|r| r.n).collect::<Vec<_>>()),
        ))
    };
    Check::from_result("convergence slope", run())
}

/// Shift-averaged integration of `Π (1 + 0.5 B₂(x_j))` with a CBC rule.
pub fn randomized_integration(_scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let s = 4;
        let sp = korobov_product(2.0, 2.0, s);
        let r = cbc(&CbcTarget::Lattice { n: 1009 }, s, &sp, &CbcOptions::default())?;
        let f = BernoulliProduct::new(vec![0.5; s]);
        let eval = |x: &[f64]| f.eval(x);
        let a = integrate(&eval, &r.rule, Randomization::Shift, 16, 20240601)?;
        let b = integrate(&eval, &r.rule, Randomization::Shift, 16, 20240601)?;
        let se = a.standard_error.unwrap_or(f64::NAN);
        let err = (a.mean - f.integral()).abs();
        let deterministic = a == b;
        Ok((
            err <= 4.0 * se && se < 1e-4 && deterministic,
            format!("|mean - 1| = {err:.3e}, standard error {se:.3e}, deterministic {deterministic}"),
        ))
    };
    Check::from_result("randomized integration", run())
}

/// Closed-form kernels against truncated series at 256 grid points.
pub fn kernel_closed_forms(scale: Scale) -> Check {
    let run = || -> Result<(bool, String)> {
        let grid = 256u64;
        let terms: u64 = if scale == Scale::Full { 1_000_000 } else { 20_000 };
        let mut worst_excess = f64::NEG_INFINITY;
        let mut failures = 0;
        let mut note = |diff: f64, allowed: f64| {
            worst_excess = worst_excess.max(diff - allowed);
            if diff > allowed {
                failures += 1;
            }
        };
        // Korobov, αq ∈ {2, 4}
        for half in [1usize, 2] {
            let aq = 2.0 * half as f64;
            let sp = SpaceSpec::new(Family::Korobov, aq, f64::INFINITY, WeightScheme::product_constant(1.0, 1));
            let tail = sp.coefficient_tail(terms, grid)?;
            for k in 0..grid {
                let x = k as f64 / grid as f64;
                let diff = (korobov_closed(x, half) - korobov_series(x, aq, terms)).abs();
                note(diff, tail + 1e-12);
            }
        }
        // Walsh, b = 2, αq ∈ {2, 3}
        let positions = 14u32;
        for aq in [2.0, 3.0] {
            let sp = SpaceSpec::new(Family::Walsh, aq, f64::INFINITY, WeightScheme::product_constant(1.0, 1));
            let tail = sp.coefficient_tail(1 << positions, grid)?;
            for y in 0..grid {
                let digits = int_to_digits(y, 2, 8);
                let series: f64 = (1..1u64 << positions)
                    .map(|h| 2f64.powf(-aq * (63 - h.leading_zeros()) as f64) * walsh(2, h, y, 8).re)
                    .sum();
                note((walsh_kernel(&digits, 2, aq) - series).abs(), tail + 1e-12);
            }
        }
        // higher order, b = 2, q = 1, α ∈ {2, 3}
        for alpha in [2usize, 3] {
            let sp = SpaceSpec::new(Family::HigherOrderWalsh, alpha as f64, f64::INFINITY, WeightScheme::product_constant(1.0, 1));
            let tail = sp.coefficient_tail(1 << positions, grid)?;
            for y in 0..grid {
                let x = y as f64 / grid as f64;
                let closed = if alpha == 2 { omega2(x) } else { omega3(x) };
                let series: f64 = (1..1u64 << positions)
                    .map(|h| r_alpha(h as i64, Family::HigherOrderWalsh, alpha as f64, 2).recip() * walsh(2, h, y, 8).re)
                    .sum();
                note((closed - series).abs(), tail + 1e-12);
            }
        }
        Ok((failures == 0, format!("{failures} points outside tail bound; max (diff - bound) {worst_excess:.2e}")))
    };
    Check::from_result("kernel closed forms", run())
}

/// All checks in acceptance order.
pub fn all(scale: Scale) -> Vec<Check> {
    type CheckFn = fn(Scale) -> Check;
    let checks: [CheckFn; 9] = [
        fast_naive_equivalence,
        one_dimensional_value,
        theorem_bounds,
        bruteforce_sandwich,
        tent_cosine,
        polynomial_lattices,
        convergence_slope,
        randomized_integration,
        kernel_closed_forms,
    ];
    checks.iter().map(|c| c(scale)).collect()
}
