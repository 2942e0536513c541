//! Function-space families, decay functions and the one-dimensional ω kernels.
//!
//! Every family is described by a one-dimensional coefficient `c(h)` so that
//! the worst-case error of a rule satisfies
//! `e^q = Σ_{0≠h∈L⊥} γ_{u(h)}^{q/2} Π_{j∈u(h)} c(h_j)` and
//! `ω(x) = Σ_{h≠0} c(h) φ_h(x)` with `φ_h` the Fourier or Walsh basis.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{is_prime, laurent_divide, Poly};
use crate::error::{Error, Result};
use crate::fft::{fft, Direction};
use crate::points::{digital_add, int_to_digits};
use crate::special::{bernoulli_poly, bernoulli_poly_dd, hurwitz_zeta, power_tail_bound, zeta, Dd};
use crate::weights::WeightScheme;

/// Terms used by the off-grid Korobov cosine series when `αq` is not even.
pub const KOROBOV_SERIES_TERMS: u64 = 1_000_000;

/// Digit positions summed by the higher-order Walsh digit recursion.
pub const WALSH_DIGITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Korobov,
    RAlphaFourier,
    Walsh,
    HigherOrderWalsh,
    Cosine,
    SobolevShiftAvg,
}

impl Family {
    pub fn is_walsh(self) -> bool {
        matches!(self, Family::Walsh | Family::HigherOrderWalsh)
    }
}

fn default_base() -> u32 {
    2
}

fn default_kappa() -> f64 {
    std::f64::consts::SQRT_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub family: Family,
    pub alpha: f64,
    /// Hölder exponent `p ∈ [1, ∞]`; `f64::INFINITY` for `p = ∞`.
    pub p: f64,
    pub weights: WeightScheme,
    #[serde(default = "default_base")]
    pub base: u32,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaTable {
    /// Denominator of the grid: `values[k] = ω(k/grid)`, or per residue for
    /// the residue tables.
    pub grid: u64,
    pub values: Vec<f64>,
    /// Low-order parts: `values[k] + lo[k]` carries about twice the working
    /// precision where available (even `αq` Fourier kernels), zero otherwise.
    pub lo: Vec<f64>,
    /// Bound on `|computed - exact|` per entry, apart from rounding.
    pub tail_bound: f64,
    /// True when no truncation is involved.
    pub exact: bool,
}

impl OmegaTable {
    fn from_dd(grid: u64, v: Vec<Dd>) -> Self {
        OmegaTable {
            grid,
            values: v.iter().map(|d| d.hi).collect(),
            lo: v.iter().map(|d| d.lo).collect(),
            tail_bound: 0.0,
            exact: true,
        }
    }

    /// Entry `k` as a double-double.
    pub fn dd(&self, k: usize) -> Dd {
        Dd { hi: self.values[k], lo: self.lo[k] }
    }
}

impl SpaceSpec {
    pub fn new(family: Family, alpha: f64, p: f64, weights: WeightScheme) -> Self {
        SpaceSpec { family, alpha, p, weights, base: 2, kappa: default_kappa() }
    }

    pub fn with_base(mut self, base: u32) -> Self {
        self.base = base;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Conjugate exponent `q = p/(p-1)`.
    pub fn q(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// `αq`, the decay exponent of the one-dimensional coefficients.
    pub fn decay(&self) -> f64 {
        self.alpha * self.q()
    }

    /// Exponent applied to `γ_u` in the error sums.
    pub fn weight_exponent(&self) -> f64 {
        self.q() / 2.0
    }

    /// Checks the parameters that do not depend on the rule.
    pub fn validate(&self, s: usize) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {} must be >= 1", self.p)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {} must be > 0", self.alpha)));
        }
        let q = self.q();
        if q.is_finite() && self.family != Family::RAlphaFourier && self.decay() <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha*q = {} must exceed 1 for this family",
                self.decay()
            )));
        }
        if self.family.is_walsh() && !is_prime(self.base as u64) {
            return Err(Error::NonPrimeBase(self.base as u64));
        }
        if self.family == Family::HigherOrderWalsh && self.alpha.fract() != 0.0 {
            return Err(Error::InvalidParameter("higher-order Walsh alpha must be an integer".into()));
        }
        if self.family == Family::Cosine && (self.kappa == 0.0 || !self.kappa.is_finite()) {
            return Err(Error::InvalidParameter("kappa must be finite and nonzero".into()));
        }
        self.weights.validate(s)
    }

    fn require_finite_q(&self) -> Result<f64> {
        let q = self.q();
        if q.is_infinite() {
            Err(Error::QInfinityUnsupported)
        } else {
            Ok(q)
        }
    }

    /// Per-coordinate factor multiplying `|h|^{-αq}` in the Fourier families.
    fn fourier_factor(&self) -> f64 {
        match self.family {
            Family::SobolevShiftAvg => 1.0 / (2.0 * PI * PI),
            Family::Cosine => self.kappa.powf(self.q()) / 2.0,
            _ => 1.0,
        }
    }

    /// One-dimensional coefficient `c(h) = r_α(h)^{-q}` times the family factor.
    /// `n_points` bounds the frequency range of the `R_α` family.
    pub fn coefficient(&self, h: i64, n_points: u64) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let q = self.q();
        match self.family {
            Family::RAlphaFourier => {
                let n = n_points as i64;
                if h < -(n / 2) || h >= n - n / 2 {
                    0.0
                } else {
                    (h.unsigned_abs() as f64).powf(-self.decay())
                }
            }
            Family::Walsh | Family::HigherOrderWalsh => {
                if h < 0 {
                    0.0
                } else {
                    r_alpha(h, self.family, self.alpha, self.base).powf(-q)
                }
            }
            _ => self.fourier_factor() * (h.unsigned_abs() as f64).powf(-self.decay()),
        }
    }

    /// `ω(x)` at an arbitrary point. For the cosine family `x` is the
    /// tent-transformed coordinate. Not available for `R_α` (see
    /// [`SpaceSpec::ralpha_kernel`]).
    pub fn kernel(&self, x: f64) -> Result<f64> {
        let q = self.require_finite_q()?;
        let x = if self.family == Family::Cosine {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::DomainError(x));
            }
            x
        } else {
            x.rem_euclid(1.0)
        };
        let aq = self.decay();
        match self.family {
            Family::Korobov => Ok(korobov_kernel(x, aq)),
            Family::SobolevShiftAvg => Ok(korobov_kernel(x, aq) * self.fourier_factor()),
            Family::Cosine => Ok(korobov_kernel(x / 2.0, aq) * self.fourier_factor()),
            Family::RAlphaFourier => Err(Error::UnsupportedCombination(
                "R_alpha kernel needs the number of points".into(),
            )),
            Family::Walsh => Ok(walsh_kernel(&real_digits(x, self.base), self.base, aq)),
            Family::HigherOrderWalsh => {
                let digits = real_digits(x, self.base);
                higher_order_kernel(&digits, self.base, self.alpha as usize, q)
            }
        }
    }

    /// `Σ_{h∈[-N/2,N/2), h≠0} |h|^{-αq} e^{2πihx}` (real part).
    pub fn ralpha_kernel(&self, x: f64, n_points: u64) -> f64 {
        let n = n_points as i64;
        let lo = -(n / 2);
        let hi = n - n / 2;
        (lo..hi)
            .filter(|&h| h != 0)
            .map(|h| (h.unsigned_abs() as f64).powf(-self.decay()) * (2.0 * PI * h as f64 * x).cos())
            .sum()
    }

    /// `ω(k/grid)` for `k = 0..grid-1` in the family's own coordinate.
    pub fn omega_table(&self, grid: u64) -> Result<OmegaTable> {
        let q = self.require_finite_q()?;
        let aq = self.decay();
        if grid == 0 {
            return Err(Error::InvalidParameter("grid must be >= 1".into()));
        }
        match self.family {
            Family::Korobov | Family::SobolevShiftAvg => {
                let sobolev = self.family == Family::SobolevShiftAvg;
                Ok(OmegaTable::from_dd(grid, self.fourier_grid(grid, aq, sobolev, |k| k)))
            }
            Family::Cosine => Ok(OmegaTable::from_dd(grid, self.fourier_grid(2 * grid, aq, false, |k| k)[..grid as usize].to_vec())),
            Family::RAlphaFourier => Ok(OmegaTable {
                grid,
                values: ralpha_grid(grid, aq),
                lo: vec![0.0; grid as usize],
                tail_bound: 0.0,
                exact: true,
            }),
            Family::Walsh | Family::HigherOrderWalsh => {
                let b = self.base as u64;
                let mut n = 0usize;
                let mut g = 1u64;
                while g < grid {
                    g *= b;
                    n += 1;
                }
                if g != grid {
                    return Err(Error::UnsupportedCombination(format!(
                        "Walsh kernels need a grid that is a power of {b}"
                    )));
                }
                let values = (0..grid)
                    .map(|k| self.walsh_family_kernel(&int_to_digits(k, self.base, n), q))
                    .collect::<Result<Vec<f64>>>()?;
                let (tail_bound, exact) = if self.family == Family::Walsh {
                    (0.0, true)
                } else {
                    (self.higher_order_tail(WALSH_DIGITS), false)
                };
                Ok(OmegaTable { grid, lo: vec![0.0; values.len()], values, tail_bound, exact })
            }
        }
    }

    fn walsh_family_kernel(&self, digits: &[u32], q: f64) -> Result<f64> {
        match self.family {
            Family::Walsh => Ok(walsh_kernel(digits, self.base, self.decay())),
            _ => higher_order_kernel(digits, self.base, self.alpha as usize, q),
        }
    }

    /// Kernel value for every residue `r = 0..N-1` of a lattice rule with
    /// `N` points: `ω(r/N)`, or `ω̃(φ(r/N))` for the cosine family.
    pub fn lattice_residue_table(&self, n_points: u64) -> Result<OmegaTable> {
        if self.family.is_walsh() {
            return Err(Error::UnsupportedCombination(
                "Walsh spaces need a polynomial lattice rule".into(),
            ));
        }
        if self.family != Family::Cosine {
            return self.omega_table(n_points);
        }
        // φ(r/N)/2 = min(r, N-r)/N and ω̃(y) = (κ^q/2) ω_Kor(y/2)
        self.require_finite_q()?;
        let n = n_points as usize;
        let kor = self.fourier_grid(n_points, self.decay(), false, |r| r.min(n - r) % n);
        Ok(OmegaTable::from_dd(n_points, kor))
    }

    /// `factor · ω_Kor(idx(k)/grid)` for `k < grid` (Sobolev scaling when
    /// `sobolev`, the cosine factor for that family). Even `αq` is evaluated
    /// in double-double from exact Bernoulli coefficients.
    fn fourier_grid(&self, grid: u64, aq: f64, sobolev: bool, idx: impl Fn(usize) -> usize) -> Vec<Dd> {
        let n = grid as usize;
        match even_half(aq) {
            Some(half) => {
                // (-1)^{h+1} (2π)^{2h} / (2h)!, or 2 (2π)^{2h-2} / (2h)! for Sobolev
                let mut scale = Dd::from_f64(if sobolev { 2.0 } else { 1.0 });
                for _ in 0..(if sobolev { half - 1 } else { half }) {
                    scale = scale.mul(Dd::TWO_PI).mul(Dd::TWO_PI);
                }
                for k in 1..=2 * half {
                    scale = scale.div_f64(k as f64);
                }
                if half % 2 == 0 {
                    scale = scale.neg();
                }
                if self.family == Family::Cosine {
                    scale = scale.mul_f64(self.fourier_factor());
                }
                let base: Vec<Dd> = (0..n)
                    .map(|k| bernoulli_poly_dd(2 * half, Dd::ratio(k as f64, grid as f64)).mul(scale))
                    .collect();
                (0..n).map(|k| base[idx(k)]).collect()
            }
            None => {
                let f = self.fourier_factor();
                let base = korobov_grid(grid, aq);
                (0..n).map(|k| Dd::from_f64(f * base[idx(k)])).collect()
            }
        }
    }

    /// Kernel value `ω(trunc_n(r/P))` for every residue `r` of `F_b[x]/P`,
    /// indexed by the residue encoding.
    pub fn poly_residue_table(&self, modulus: &Poly, precision: u32) -> Result<OmegaTable> {
        let q = self.require_finite_q()?;
        if !self.family.is_walsh() {
            return Err(Error::UnsupportedCombination(
                "Fourier spaces need a rank-1 lattice rule".into(),
            ));
        }
        if modulus.base() != self.base {
            return Err(Error::InvalidParameter("modulus base differs from the space base".into()));
        }
        let digits = residue_digit_table(modulus, precision)?;
        let n = precision as usize;
        let values = digits
            .iter()
            .map(|&y| self.walsh_family_kernel(&int_to_digits(y, self.base, n), q))
            .collect::<Result<Vec<f64>>>()?;
        let tail_bound = if self.family == Family::HigherOrderWalsh {
            self.higher_order_tail(WALSH_DIGITS)
        } else {
            0.0
        };
        Ok(OmegaTable {
            grid: (self.base as u64).pow(precision),
            lo: vec![0.0; values.len()],
            values,
            tail_bound,
            exact: self.family == Family::Walsh,
        })
    }

    /// Absolute sum of the higher-order coefficients with `h ≥ b^digits`.
    fn higher_order_tail(&self, digits: usize) -> f64 {
        let q = self.q();
        let alpha = self.alpha as usize;
        let full = higher_order_zero(self.base, alpha, q, 2 * digits.max(WALSH_DIGITS));
        let head = higher_order_zero(self.base, alpha, q, digits);
        (full - head).max(0.0) + 4.0 * f64::EPSILON * full
    }

    /// `S_λ = Σ_{h≠0} c(h)^{1/λ}` (for `R_α`, over `[-N/2, N/2)`).
    pub fn one_dim_sum(&self, lambda: f64, n_points: u64) -> Result<f64> {
        let q = self.require_finite_q()?;
        let upper = self.decay();
        if self.family != Family::RAlphaFourier && !(lambda >= 1.0 && lambda < upper) {
            return Err(Error::LambdaOutOfRange { lambda, upper });
        }
        if self.family == Family::RAlphaFourier && lambda < 1.0 {
            return Err(Error::LambdaOutOfRange { lambda, upper });
        }
        let e = upper / lambda;
        let b = self.base as f64;
        Ok(match self.family {
            Family::Korobov | Family::SobolevShiftAvg | Family::Cosine => {
                self.fourier_factor().powf(1.0 / lambda) * 2.0 * zeta(e)
            }
            Family::RAlphaFourier => {
                let n = n_points as i64;
                (-(n / 2)..n - n / 2)
                    .filter(|&h| h != 0)
                    .map(|h| (h.unsigned_abs() as f64).powf(-e))
                    .sum()
            }
            Family::Walsh => (b - 1.0) / (1.0 - b.powf(1.0 - e)),
            Family::HigherOrderWalsh => {
                higher_order_zero(self.base, self.alpha as usize, q / lambda, 2 * WALSH_DIGITS)
            }
        })
    }

    /// Upper bound on `Σ c(h)` over the frequencies outside a box:
    /// `|h| > h_max` (Fourier) or `h ≥ h_max` (Walsh).
    pub fn coefficient_tail(&self, h_max: u64, n_points: u64) -> Result<f64> {
        self.require_finite_q()?;
        let aq = self.decay();
        let b = self.base as u64;
        Ok(match self.family {
            Family::Korobov | Family::SobolevShiftAvg | Family::Cosine => {
                self.fourier_factor() * 2.0 * power_tail_bound(aq, h_max.max(1) as f64)
            }
            Family::RAlphaFourier => {
                if h_max as i64 >= n_points as i64 / 2 {
                    0.0
                } else {
                    let n = n_points as i64;
                    (-(n / 2)..n - n / 2)
                        .filter(|&h| h.unsigned_abs() > h_max)
                        .map(|h| (h.unsigned_abs() as f64).powf(-aq))
                        .sum()
                }
            }
            Family::Walsh | Family::HigherOrderWalsh => {
                // the box h < h_max contains every h < b^d with b^d ≤ h_max
                let mut d = 0usize;
                let mut pw = 1u64;
                while pw.checked_mul(b).is_some_and(|v| v <= h_max) {
                    pw *= b;
                    d += 1;
                }
                if h_max == 0 {
                    return self.one_dim_sum(1.0, n_points);
                }
                if self.family == Family::Walsh {
                    let bf = b as f64;
                    (bf - 1.0) * bf.powf(d as f64 * (1.0 - aq)) / (1.0 - bf.powf(1.0 - aq))
                } else {
                    self.higher_order_tail(d)
                }
            }
        })
    }
}

/// One-dimensional decay value `r_α(h)` (unweighted, `r_α(0) = 1`).
pub fn r_alpha(h: i64, family: Family, alpha: f64, base: u32) -> f64 {
    if h == 0 {
        return 1.0;
    }
    match family {
        Family::Walsh => {
            let a = floor_log(h.unsigned_abs(), base);
            (base as f64).powf(alpha * a as f64)
        }
        Family::HigherOrderWalsh => {
            let positions = nonzero_positions(h.unsigned_abs(), base);
            let take = (alpha as usize).min(positions.len());
            let exponent: u32 = positions[..take].iter().map(|&a| a + 1).sum();
            (base as f64).powi(exponent as i32)
        }
        _ => (h.unsigned_abs() as f64).powf(alpha),
    }
}

/// `ρ_b(h) = (b^{a+1} sin(π h_a / b))^{-1}` with `a = ⌊log_b h⌋`, `ρ_b(0) = 1`.
///
/// Experimental: the printed definition varies between sources; this is the
/// printed form verbatim.
pub fn rho_b(h: u64, base: u32) -> f64 {
    if h == 0 {
        return 1.0;
    }
    let a = floor_log(h, base);
    let top = h / (base as u64).pow(a);
    1.0 / ((base as f64).powi(a as i32 + 1) * (PI * top as f64 / base as f64).sin())
}

fn floor_log(h: u64, base: u32) -> u32 {
    let mut a = 0;
    let mut v = h;
    while v >= base as u64 {
        v /= base as u64;
        a += 1;
    }
    a
}

/// Positions `a_1 > a_2 > …` of the nonzero base-`b` digits of `h`.
fn nonzero_positions(h: u64, base: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut v = h;
    let mut i = 0;
    while v > 0 {
        if v % base as u64 != 0 {
            out.push(i);
        }
        v /= base as u64;
        i += 1;
    }
    out.reverse();
    out
}

/// `wal_{b,h}(x)` for an `n`-digit point `x = y/b^n`.
pub fn walsh(base: u32, h: u64, y: u64, n: u32) -> Complex64 {
    let digits = int_to_digits(y, base, n as usize);
    let mut e = 0u64;
    let mut hh = h;
    for &xd in &digits {
        if hh == 0 {
            break;
        }
        e += (hh % base as u64) * xd as u64;
        hh /= base as u64;
    }
    let e = e % base as u64;
    match (base, e) {
        (_, 0) => Complex64::new(1.0, 0.0),
        (2, _) => Complex64::new(-1.0, 0.0),
        _ => Complex64::from_polar(1.0, 2.0 * PI * e as f64 / base as f64),
    }
}

/// `χ(x) = Σ_{∅≠u} γ_u^{q/2} Π_{j∈u} ω(x_j)`.
pub fn chi_eval(space: &SpaceSpec, x: &[f64]) -> Result<f64> {
    let omegas = x
        .iter()
        .map(|&xj| space.kernel(xj))
        .collect::<Result<Vec<f64>>>()?;
    space.weights.subset_sum(space.weight_exponent(), &omegas)
}

/// Base-`b` digits of a real in `[0,1)`, most significant first.
fn real_digits(x: f64, base: u32) -> Vec<u32> {
    let mut digits = Vec::with_capacity(WALSH_DIGITS);
    let mut v = x;
    for _ in 0..WALSH_DIGITS {
        v *= base as f64;
        let d = v.floor();
        digits.push(d as u32);
        v -= d;
        if v == 0.0 {
            break;
        }
    }
    digits
}

/// `Σ_{h≠0} e^{2πihx}/|h|^{aq}` for `x ∈ [0,1)`.
pub fn korobov_kernel(x: f64, aq: f64) -> f64 {
    if let Some(n) = even_half(aq) {
        korobov_closed(x, n)
    } else {
        korobov_series(x, aq, KOROBOV_SERIES_TERMS)
    }
}

fn even_half(aq: f64) -> Option<usize> {
    let n = aq / 2.0;
    (n.fract() == 0.0 && (1.0..=12.0).contains(&n)).then_some(n as usize)
}

/// `(-1)^{n+1} (2π)^{2n} B_{2n}(x) / (2n)!`
pub fn korobov_closed(x: f64, n: usize) -> f64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let fact: f64 = (1..=2 * n).map(|k| k as f64).product();
    sign * (2.0 * PI).powi(2 * n as i32) * bernoulli_poly(2 * n, x.rem_euclid(1.0)) / fact
}

/// `2 Σ_{h=1}^{H} cos(2πhx)/h^{aq}`; the omitted tail is at most
/// `2 H^{1-aq}/(aq-1)`.
pub fn korobov_series(x: f64, aq: f64, terms: u64) -> f64 {
    let mut acc = 0.0;
    for h in (1..=terms).rev() {
        let phase = (h as f64 * x).rem_euclid(1.0);
        acc += (2.0 * PI * phase).cos() * (h as f64).powf(-aq);
    }
    2.0 * acc
}

/// Korobov kernel on the grid `k/N`: closed form for even `aq`, otherwise
/// the aliased coefficients `S_c = Σ_{h≡c} |h|^{-aq}` (Hurwitz zeta) followed
/// by one length-`N` DFT.
pub fn korobov_grid(n_points: u64, aq: f64) -> Vec<f64> {
    let n = n_points as usize;
    if let Some(half) = even_half(aq) {
        return (0..n).map(|k| korobov_closed(k as f64 / n as f64, half)).collect();
    }
    let nf = n as f64;
    let scale = nf.powf(-aq);
    let aliased: Vec<Complex64> = (0..n)
        .map(|c| {
            let v = if c == 0 {
                2.0 * scale * zeta(aq)
            } else {
                let t = c as f64 / nf;
                scale * (hurwitz_zeta(aq, t) + hurwitz_zeta(aq, 1.0 - t))
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    // ω(k/N) = Σ_c S_c e^{2πick/N}
    fft(&aliased, Direction::Inverse)
        .into_iter()
        .map(|v| v.re * nf)
        .collect()
}

/// `R_α` kernel on the grid `k/N` via one DFT of the coefficient vector.
fn ralpha_grid(n_points: u64, aq: f64) -> Vec<f64> {
    let n = n_points as usize;
    let hi = n - n / 2;
    let coeffs: Vec<Complex64> = (0..n)
        .map(|c| {
            if c == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let h = if c < hi { c as f64 } else { (n - c) as f64 };
                Complex64::new(h.powf(-aq), 0.0)
            }
        })
        .collect();
    fft(&coeffs, Direction::Inverse)
        .into_iter()
        .map(|v| v.re * n as f64)
        .collect()
}

/// Walsh kernel `Σ_{h≥1} b^{-aq⌊log_b h⌋} wal_h(x)` in closed form from the
/// position of the first nonzero digit of `x`.
pub fn walsh_kernel(digits: &[u32], base: u32, aq: f64) -> f64 {
    let b = base as f64;
    let ratio = b.powf(1.0 - aq);
    match digits.iter().position(|&d| d != 0) {
        None => (b - 1.0) / (1.0 - ratio),
        Some(pos) => {
            // first nonzero digit x_d with d = pos + 1
            let head: f64 = (0..pos).map(|a| ratio.powi(a as i32)).sum();
            (b - 1.0) * head - ratio.powi(pos as i32)
        }
    }
}

/// Higher-order Walsh kernel `Σ_{h≥1} r_α(h)^{-q} wal_h(x)` by a digit
/// recursion from the most significant frequency digit down, tracking how
/// many nonzero digits have been charged so far (at most `α`).
///
/// For `b = 2`, `q = 1` and `α ∈ {2, 3}` the closed forms are used instead.
pub fn higher_order_kernel(digits: &[u32], base: u32, alpha: usize, q: f64) -> Result<f64> {
    if alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be >= 1".into()));
    }
    if base == 2 && q == 1.0 && (alpha == 2 || alpha == 3) {
        let x = digits
            .iter()
            .rev()
            .fold(0.0, |acc, &d| (acc + d as f64) / 2.0);
        return Ok(if alpha == 2 { omega2(x) } else { omega3(x) });
    }
    Ok(higher_order_dp(digits, base, alpha, q, WALSH_DIGITS))
}

fn higher_order_dp(digits: &[u32], base: u32, alpha: usize, q: f64, positions: usize) -> f64 {
    let b = base as f64;
    let mut v = vec![0.0; alpha + 1];
    v[0] = 1.0;
    for a in (0..positions).rev() {
        let xd = digits.get(a).copied().unwrap_or(0);
        let s = if xd == 0 { b - 1.0 } else { -1.0 };
        let charge = b.powf(-q * (a as f64 + 1.0));
        let mut next = v.clone();
        for c in 0..=alpha {
            if v[c] == 0.0 {
                continue;
            }
            if c < alpha {
                next[c + 1] += v[c] * s * charge;
            } else {
                next[alpha] += v[c] * s;
            }
        }
        v = next;
    }
    v[1..].iter().sum()
}

/// `Σ_{1≤h<b^positions} r_α(h)^{-q}`: the higher-order kernel at zero.
fn higher_order_zero(base: u32, alpha: usize, q: f64, positions: usize) -> f64 {
    higher_order_dp(&[], base, alpha, q, positions)
}

/// `a_1 = -⌊log_2 x⌋`, `t_1 = 2^{-a_1}`, all zero at `x = 0`.
fn dyadic_parts(x: f64) -> (f64, f64) {
    if x == 0.0 {
        (0.0, 0.0)
    } else {
        let a1 = -x.log2().floor();
        (a1, 2f64.powf(-a1))
    }
}

/// Closed-form higher-order Walsh kernel for `α = 2`, `b = 2`, `q = 1`.
pub fn omega2(x: f64) -> f64 {
    let (a1, t1) = dyadic_parts(x);
    let s1 = 1.0 - 2.0 * x;
    let s2t = (1.0 - 5.0 * t1) / 2.0 - (a1 - 2.0) * x;
    s1 + s2t
}

/// Closed-form higher-order Walsh kernel for `α = 3`, `b = 2`, `q = 1`.
pub fn omega3(x: f64) -> f64 {
    let (a1, t1) = dyadic_parts(x);
    let t2 = t1 * t1;
    let s1 = 1.0 - 2.0 * x;
    let s2 = 1.0 / 3.0 - 2.0 * (1.0 - x) * x;
    let s3t = (1.0 - 43.0 * t2) / 18.0 + (5.0 * t1 - 1.0) * x + (a1 - 2.0) * x * x;
    s1 + s2 + s3t
}

/// `n`-digit value of `r/P` for every residue encoding `r < b^{deg P}`, using
/// linearity of the digit map.
pub fn residue_digit_table(modulus: &Poly, precision: u32) -> Result<Vec<u64>> {
    let b = modulus.base();
    let d = modulus
        .degree()
        .ok_or_else(|| Error::DegreeError("modulus must be nonzero".into()))?;
    let size = (b as u64)
        .checked_pow(d as u32)
        .filter(|&v| v <= 1 << 28)
        .ok_or_else(|| Error::DegreeError(format!("residue ring of degree {d} too large")))?
        as usize;
    let n = precision as usize;
    let basis: Vec<Vec<u32>> = (0..d)
        .map(|i| {
            let series = laurent_divide(&Poly::monomial(b, i), modulus, n)?;
            Ok(series.coeffs)
        })
        .collect::<Result<_>>()?;
    let mut table = vec![0u64; size];
    for r in 1..size {
        // peel the lowest nonzero digit: r = rest + c·b^i
        let mut i = 0;
        let mut pw = 1usize;
        while (r / pw) % b as usize == 0 {
            pw *= b as usize;
            i += 1;
        }
        let rest = r - pw;
        table[r] = digital_add(table[rest], &basis[i], b);
    }
    Ok(table)
}
