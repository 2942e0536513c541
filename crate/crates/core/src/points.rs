//! Lattice and polynomial lattice node sets, shifts and the tent transform.
//!
//! Lattice points are kept as numerators `k·z_j mod N` over `N`; polynomial
//! lattice points as `n`-digit integers over `b^n` (most significant digit
//! first). Conversion to `f64` happens only at the API boundary.

use rand::Rng;

use crate::algebra::{is_prime, laurent_divide, Poly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeRule {
    n: u64,
    z: Vec<u64>,
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        if z.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if let Some(&bad) = z.iter().find(|&&zj| zj >= n) {
            return Err(Error::InvalidParameter(format!("component {bad} not in [0, {n})")));
        }
        Ok(LatticeRule { n, z })
    }

    pub fn n_points(&self) -> u64 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    /// `k·z_j mod N` for every `j`.
    pub fn numerators(&self, k: u64) -> Vec<u64> {
        self.z
            .iter()
            .map(|&zj| ((k as u128 * zj as u128) % self.n as u128) as u64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyLatticeRule {
    base: u32,
    modulus: Poly,
    m: u32,
    precision: u32,
    z: Vec<Poly>,
}

impl PolyLatticeRule {
    /// Rule with `b^m` points, modulus `P` (`deg P ≥ m`) and `n` output digits.
    /// Components are reduced modulo `P`.
    pub fn new(base: u32, modulus: Poly, m: u32, precision: u32, z: Vec<Poly>) -> Result<Self> {
        if !is_prime(base as u64) {
            return Err(Error::NonPrimeBase(base as u64));
        }
        if precision < m {
            return Err(Error::PrecisionError { n: precision, m });
        }
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        let deg = modulus
            .degree()
            .ok_or_else(|| Error::DegreeError("modulus must be nonzero".into()))?;
        if modulus.base() != base || z.iter().any(|p| p.base() != base) {
            return Err(Error::InvalidParameter("polynomials must share the base b".into()));
        }
        if (deg as u32) < m {
            return Err(Error::DegreeError(format!(
                "modulus degree {deg} is below m = {m}"
            )));
        }
        if precision > 63 || (base as u64).checked_pow(precision).is_none() {
            return Err(Error::InvalidParameter("precision too large for 64-bit digits".into()));
        }
        if z.is_empty() {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let z = z.into_iter().map(|p| p.rem(&modulus)).collect();
        Ok(PolyLatticeRule { base, modulus, m, precision, z })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn z(&self) -> &[Poly] {
        &self.z
    }

    pub fn dimension(&self) -> usize {
        self.z.len()
    }

    pub fn n_points(&self) -> u64 {
        (self.base as u64).pow(self.m)
    }

    /// `b^n`, the denominator of every coordinate.
    pub fn scale(&self) -> u64 {
        (self.base as u64).pow(self.precision)
    }

    /// `n`-digit value of `r(x)/P(x)` for a residue `r` (encoding).
    pub fn residue_digits(&self, residue: u64) -> u64 {
        let r = Poly::from_int(self.base, residue).expect("base checked at construction");
        laurent_divide(&r, &self.modulus, self.precision as usize)
            .expect("residue degree below modulus degree")
            .digits_to_int(self.precision as usize)
    }

    /// Residues `z_j(x)·k(x) mod P(x)` as encodings.
    pub fn residues(&self, k: u64) -> Vec<u64> {
        let kp = Poly::from_int(self.base, k).expect("base checked at construction");
        self.z
            .iter()
            .map(|zj| zj.mul_mod(&kp, &self.modulus).to_int())
            .collect()
    }

    /// Digit integers of point `k` (Laurent-division route).
    pub fn digit_point(&self, k: u64) -> Vec<u64> {
        self.residues(k)
            .into_iter()
            .map(|r| self.residue_digits(r))
            .collect()
    }

    /// The `n × m` Hankel matrix `c_{r,t} = a_{r+t-1}` of Laurent
    /// coefficients of `z_j/P`.
    pub fn generating_matrix(&self, j: usize) -> Vec<Vec<u32>> {
        let n = self.precision as usize;
        let m = self.m as usize;
        let series = laurent_divide(&self.z[j], &self.modulus, n + m - 1)
            .expect("components are reduced modulo P");
        (0..n)
            .map(|r| (0..m).map(|t| series.coeffs[r + t]).collect())
            .collect()
    }

    /// Digit integers of point `k` via the generating matrices.
    pub fn digit_point_matrix(&self, k: u64) -> Vec<u64> {
        let b = self.base as u64;
        let kdigits: Vec<u64> = (0..self.m).map(|t| k / b.pow(t) % b).collect();
        (0..self.dimension())
            .map(|j| {
                self.generating_matrix(j)
                    .iter()
                    .fold(0u64, |acc, row| {
                        let d = row.iter().zip(&kdigits).map(|(&c, &kd)| c as u64 * kd).sum::<u64>() % b;
                        acc * b + d
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Lattice(LatticeRule),
    Polynomial(PolyLatticeRule),
}

impl Rule {
    pub fn n_points(&self) -> u64 {
        match self {
            Rule::Lattice(r) => r.n_points(),
            Rule::Polynomial(r) => r.n_points(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Rule::Lattice(r) => r.dimension(),
            Rule::Polynomial(r) => r.dimension(),
        }
    }

    /// All points as reals, row `k` for `k = 0..N-1`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            Rule::Lattice(r) => lattice_points(r),
            Rule::Polynomial(r) => poly_lattice_points(r),
        }
    }
}

/// Random shift, real (lattice rules) or digital (polynomial rules).
#[derive(Debug, Clone, PartialEq)]
pub enum Shift {
    Real(Vec<f64>),
    /// `digits[j][i]` is digit `i+1` of the shift in dimension `j`.
    Digital { base: u32, digits: Vec<Vec<u32>> },
}

impl Shift {
    /// Uniform shift in `[0,1)^s`, drawn dimension by dimension.
    pub fn random_real<R: Rng>(s: usize, rng: &mut R) -> Self {
        Shift::Real((0..s).map(|_| rng.gen::<f64>()).collect())
    }

    /// Uniform digital shift with `n` digits per dimension, dimension-major.
    pub fn random_digital<R: Rng>(s: usize, n: usize, base: u32, rng: &mut R) -> Self {
        Shift::Digital {
            base,
            digits: (0..s)
                .map(|_| (0..n).map(|_| rng.gen_range(0..base)).collect())
                .collect(),
        }
    }
}

/// `x_k = (k·z mod N)/N`, one row per `k`.
pub fn lattice_points(rule: &LatticeRule) -> Vec<Vec<f64>> {
    let n = rule.n_points() as f64;
    (0..rule.n_points())
        .map(|k| rule.numerators(k).into_iter().map(|v| v as f64 / n).collect())
        .collect()
}

/// `(k·z_j/N + Δ_j) mod 1`.
pub fn shifted_lattice_points(rule: &LatticeRule, shift: &[f64]) -> Result<Vec<Vec<f64>>> {
    if shift.len() != rule.dimension() {
        return Err(Error::DimensionMismatch { expected: rule.dimension(), got: shift.len() });
    }
    if let Some(&bad) = shift.iter().find(|d| !(0.0..1.0).contains(*d)) {
        return Err(Error::DomainError(bad));
    }
    let n = rule.n_points() as f64;
    Ok((0..rule.n_points())
        .map(|k| {
            rule.numerators(k)
                .into_iter()
                .zip(shift)
                .map(|(v, d)| {
                    let x = v as f64 / n + d;
                    if x >= 1.0 {
                        x - 1.0
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect())
}

/// `φ(x) = 1 - |2x - 1|`.
pub fn tent_transform(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(x));
    }
    Ok(1.0 - (2.0 * x - 1.0).abs())
}

/// Polynomial lattice points as reals with `n` base-`b` digits.
pub fn poly_lattice_points(rule: &PolyLatticeRule) -> Vec<Vec<f64>> {
    let scale = rule.scale() as f64;
    (0..rule.n_points())
        .map(|k| rule.digit_point(k).into_iter().map(|y| y as f64 / scale).collect())
        .collect()
}

/// Digits `x_1 … x_n` of an `n`-digit integer, most significant first.
pub fn int_to_digits(value: u64, base: u32, n: usize) -> Vec<u32> {
    let mut digits = vec![0u32; n];
    let mut v = value;
    for d in digits.iter_mut().rev() {
        *d = (v % base as u64) as u32;
        v /= base as u64;
    }
    digits
}

pub fn digits_to_int(digits: &[u32], base: u32) -> u64 {
    digits.iter().fold(0u64, |acc, &d| acc * base as u64 + d as u64)
}

/// Digit-wise `(y + Δ) mod b` on `n`-digit integers; `shift[i]` is digit `i+1`.
pub fn digital_add(value: u64, shift: &[u32], base: u32) -> u64 {
    if base == 2 {
        return value ^ digits_to_int(shift, 2);
    }
    let digits = int_to_digits(value, base, shift.len());
    let sum: Vec<u32> = digits.iter().zip(shift).map(|(a, d)| (a + d) % base).collect();
    digits_to_int(&sum, base)
}

/// Digit-wise negation of a shift.
pub fn negate_digits(shift: &[u32], base: u32) -> Vec<u32> {
    shift.iter().map(|&d| (base - d) % base).collect()
}

/// Digitally shifted `n`-digit points (exact).
pub fn digital_shift_digits(points: &[Vec<u64>], shift: &[Vec<u32>], base: u32) -> Result<Vec<Vec<u64>>> {
    points
        .iter()
        .map(|row| {
            if row.len() != shift.len() {
                return Err(Error::DimensionMismatch { expected: shift.len(), got: row.len() });
            }
            Ok(row.iter().zip(shift).map(|(&y, d)| digital_add(y, d, base)).collect())
        })
        .collect()
}

/// Digital shift of real points; each coordinate is read with as many digits
/// as the shift rows carry.
pub fn digital_shift(points: &[Vec<f64>], shift: &[Vec<u32>], base: u32) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|row| {
            if row.len() != shift.len() {
                return Err(Error::DimensionMismatch { expected: shift.len(), got: row.len() });
            }
            row.iter()
                .zip(shift)
                .map(|(&x, d)| {
                    if !(0.0..1.0).contains(&x) {
                        return Err(Error::DomainError(x));
                    }
                    let scale = (base as f64).powi(d.len() as i32);
                    let y = (x * scale).floor() as u64;
                    Ok(digital_add(y, d, base) as f64 / scale)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::find_irreducible;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn poly(b: u32, v: u64) -> Poly {
        Poly::from_int(b, v).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let r = LatticeRule::new(1, vec![0, 0]).unwrap();
        assert_eq!(lattice_points(&r), vec![vec![0.0, 0.0]]);
        let r = LatticeRule::new(4, vec![1, 3]).unwrap();
        assert_eq!(
            lattice_points(&r),
            vec![vec![0.0, 0.0], vec![0.25, 0.75], vec![0.5, 0.5], vec![0.75, 0.25]]
        );
        let r = LatticeRule::new(5, vec![2]).unwrap();
        let xs: Vec<f64> = lattice_points(&r).into_iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.4, 0.8, 0.2, 0.6]);
    }

    #[test]
    fn shifted_examples() {
        let r = LatticeRule::new(5, vec![1, 2]).unwrap();
        assert_eq!(shifted_lattice_points(&r, &[0.0, 0.0]).unwrap(), lattice_points(&r));
        let r = LatticeRule::new(2, vec![1]).unwrap();
        assert_eq!(shifted_lattice_points(&r, &[0.25]).unwrap(), vec![vec![0.25], vec![0.75]]);
        let r = LatticeRule::new(3, vec![1]).unwrap();
        let p = shifted_lattice_points(&r, &[0.9]).unwrap();
        assert!((p[0][0] - 0.9).abs() < 1e-15);
        assert!((p[1][0] - (0.9 + 1.0 / 3.0 - 1.0)).abs() < 1e-15);
        assert!((p[2][0] - (0.9 + 2.0 / 3.0 - 1.0)).abs() < 1e-15);
        assert!(matches!(
            shifted_lattice_points(&r, &[0.1, 0.2]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tent_examples() {
        assert_eq!(tent_transform(0.0).unwrap(), 0.0);
        assert_eq!(tent_transform(0.5).unwrap(), 1.0);
        assert_eq!(tent_transform(0.75).unwrap(), 0.5);
        assert_eq!(tent_transform(1.5), Err(Error::DomainError(1.5)));
    }

    #[test]
    fn tent_cosine_identity() {
        for h in 0..=16 {
            for i in 0..=256 {
                let x = i as f64 / 256.0;
                let lhs = (PI * h as f64 * tent_transform(x).unwrap()).cos();
                let rhs = (2.0 * PI * h as f64 * x).cos();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn group_closure() {
        for n in [7u64, 12, 13] {
            let r = LatticeRule::new(n, vec![1, 5, 3]).unwrap();
            for k in 0..n {
                for l in 0..n {
                    let a = r.numerators(k);
                    let b = r.numerators(l);
                    let c = r.numerators((k + l) % n);
                    for j in 0..3 {
                        assert_eq!((a[j] + b[j]) % n, c[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn character_property() {
        for n in [5u64, 8, 13] {
            let r = LatticeRule::new(n, vec![1, 3 % n]).unwrap();
            let h_max = 2 * n as i64;
            for h1 in -h_max..=h_max {
                for h2 in -h_max..=h_max {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        let x = r.numerators(k);
                        let phase = (h1 * x[0] as i64 + h2 * x[1] as i64).rem_euclid(n as i64);
                        sum += Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / n as f64);
                    }
                    let avg = sum.norm() / n as f64;
                    let dual = (h1 + h2 * r.z()[1] as i64).rem_euclid(n as i64) == 0;
                    assert!((avg - if dual { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn poly_points_example() {
        let p = poly(2, 0b111);
        let r = PolyLatticeRule::new(2, p, 2, 2, vec![poly(2, 1)]).unwrap();
        let xs: Vec<f64> = poly_lattice_points(&r).into_iter().map(|v| v[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.75, 0.5]);
    }

    #[test]
    fn matrix_route_matches_division_route() {
        for b in [2u32, 3] {
            for m in 1..=4u32 {
                let p = find_irreducible(b, m).unwrap();
                for n in m..=m + 3 {
                    let z: Vec<Poly> = (1..=3u64).map(|v| poly(b, v * 7 + 1)).collect();
                    let r = PolyLatticeRule::new(b, p.clone(), m, n, z).unwrap();
                    for k in 0..r.n_points() {
                        assert_eq!(r.digit_point(k), r.digit_point_matrix(k), "b {b} m {m} n {n} k {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn precision_error() {
        let p = poly(2, 0b111);
        assert_eq!(
            PolyLatticeRule::new(2, p, 2, 1, vec![poly(2, 1)]),
            Err(Error::PrecisionError { n: 1, m: 2 })
        );
    }

    fn walsh_char(b: u32, h: u64, y: u64, n: usize) -> u32 {
        // exponent Σ x_{i+1} h_i mod b
        let xd = int_to_digits(y, b, n);
        let mut e = 0u32;
        let mut hh = h;
        let mut i = 0;
        while hh > 0 && i < n {
            e += (hh % b as u64) as u32 * xd[i];
            hh /= b as u64;
            i += 1;
        }
        e % b
    }

    #[test]
    fn poly_character_property() {
        for m in 1..=4u32 {
            let p = find_irreducible(2, m).unwrap();
            let n = m as usize;
            let r = PolyLatticeRule::new(2, p, m, m, vec![poly(2, 1), poly(2, 3 % (1 << m))]).unwrap();
            let pts: Vec<Vec<u64>> = (0..r.n_points()).map(|k| r.digit_point(k)).collect();
            for h1 in 0..(1u64 << (2 * n)) {
                for h2 in 0..(1u64 << (2 * n)) {
                    let sum: i64 = pts
                        .iter()
                        .map(|x| {
                            let e = walsh_char(2, h1, x[0], n) + walsh_char(2, h2, x[1], n);
                            if e % 2 == 0 { 1 } else { -1 }
                        })
                        .sum();
                    assert!(sum == 0 || sum == pts.len() as i64);
                }
            }
        }
    }

    #[test]
    fn digital_shift_examples() {
        let pts = vec![vec![0.75]];
        assert_eq!(digital_shift(&pts, &[vec![1, 0]], 2).unwrap(), vec![vec![0.25]]);
        assert_eq!(digital_shift(&pts, &[vec![0, 0]], 2).unwrap(), pts);
        let pts = vec![vec![2.0 / 3.0]];
        let out = digital_shift(&pts, &[vec![2]], 3).unwrap();
        assert!((out[0][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn digital_shift_closure() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        for b in [2u32, 3, 5] {
            let p = find_irreducible(b, 3).unwrap();
            let r = PolyLatticeRule::new(b, p, 3, 5, vec![poly(b, 1), poly(b, 7)]).unwrap();
            let pts: Vec<Vec<u64>> = (0..r.n_points()).map(|k| r.digit_point(k)).collect();
            let Shift::Digital { digits, .. } = Shift::random_digital(2, 5, b, &mut rng) else {
                unreachable!()
            };
            let neg: Vec<Vec<u32>> = digits.iter().map(|d| negate_digits(d, b)).collect();
            let once = digital_shift_digits(&pts, &digits, b).unwrap();
            let back = digital_shift_digits(&once, &neg, b).unwrap();
            assert_eq!(back, pts);
        }
    }
}
