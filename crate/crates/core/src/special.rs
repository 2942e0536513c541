//! Riemann/Hurwitz zeta values and Bernoulli polynomials in double precision.

/// Bernoulli numbers `B_0 … B_max` (with `B_1 = -1/2`), by the standard recurrence.
pub fn bernoulli_numbers(max: usize) -> Vec<f64> {
    let mut b = vec![0.0; max + 1];
    b[0] = 1.0;
    for m in 1..=max {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, k)
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += binom * bk;
            binom = binom * (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
    }
    b
}

/// Bernoulli polynomial `B_n(x)`.
pub fn bernoulli_poly(n: usize, x: f64) -> f64 {
    let b = bernoulli_numbers(n);
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (k, bk) in b.iter().enumerate() {
        acc += binom * bk * x.powi((n - k) as i32);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// `B_2(x) = x² - x + 1/6`.
pub fn bernoulli2(x: f64) -> f64 {
    x * x - x + 1.0 / 6.0
}

// B_{2k}/(2k)! for k = 1..=8
const EM_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s > 1`, `a > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    const SHIFT: usize = 24;
    let mut acc = 0.0;
    for k in 0..SHIFT {
        acc += (k as f64 + a).powf(-s);
    }
    let x = SHIFT as f64 + a;
    acc += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k-2) · x^{-s-2k+1}
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    for (k, c) in EM_COEFFS.iter().enumerate() {
        acc += c * rising * xpow;
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        xpow /= x * x;
    }
    acc
}

/// Riemann zeta `ζ(s)` for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Integral upper bound on `Σ_{h > H} h^{-s}`: `H^{1-s}/(s-1)`.
pub fn power_tail_bound(s: f64, h: f64) -> f64 {
    h.powf(1.0 - s) / (s - 1.0)
}

/// Double-double number `hi + lo` with `|lo| ≤ ulp(hi)/2`, for sums whose
/// result is much smaller than their terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    /// 2π
    pub const TWO_PI: Dd = Dd { hi: 6.283185307179586, lo: 2.4492935982947064e-16 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// `num/den` for integers below `2^53`.
    pub fn ratio(num: f64, den: f64) -> Self {
        let hi = num / den;
        // num - hi·den is exact with a fused multiply-add
        let r = (-hi).mul_add(den, num);
        Dd::new(hi, r / den)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }

    pub fn mul_f64(self, x: f64) -> Dd {
        let p = self.hi * x;
        let e = self.hi.mul_add(x, -p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Dd { hi, lo }
    }

    pub fn div_f64(self, x: f64) -> Dd {
        let q1 = self.hi / x;
        let r = self.add(Dd::from_f64(q1).mul_f64(x).neg());
        let q2 = r.hi / x;
        Dd::new(q1, q2)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

// B_0, B_1, B_2, B_4, …, B_24 as numerator/denominator pairs
const BERNOULLI_RATIONAL: [(f64, f64); 14] = [
    (1.0, 1.0),
    (-1.0, 2.0),
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
];

fn bernoulli_dd(k: usize) -> Dd {
    match k {
        0 | 1 => {
            let (a, b) = BERNOULLI_RATIONAL[k];
            Dd::ratio(a, b)
        }
        _ if k % 2 == 1 => Dd::ZERO,
        _ => {
            let (a, b) = BERNOULLI_RATIONAL[k / 2 + 1];
            Dd::ratio(a, b)
        }
    }
}

/// `B_n(x)` in double-double for `n ≤ 24`.
pub fn bernoulli_poly_dd(n: usize, x: Dd) -> Dd {
    assert!(n <= 24, "Bernoulli table stops at B_24");
    // Horner over B_n(x) = Σ_k C(n,k) B_k x^{n-k}
    let mut acc = Dd::ZERO;
    let mut binom = 1.0f64;
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        coeffs.push(bernoulli_dd(k).mul_f64(binom));
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    for c in coeffs {
        acc = acc.mul(x).add(c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-15);
        assert!((zeta(1.5) - 2.612_375_348_685_488_4).abs() < 1e-13);
        // direct sum for a large exponent
        let direct: f64 = (1..200).map(|k| (k as f64).powf(-7.5)).sum();
        assert!((zeta(7.5) - direct).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_matches_shifted_sum() {
        for &a in &[0.1, 0.5, 0.9, 1.0, 3.25] {
            for &s in &[2.0, 3.0, 4.5] {
                let head: f64 = (0..2000).map(|k| (k as f64 + a).powf(-s)).sum();
                let tail = hurwitz_zeta(s, a + 2000.0);
                let h = hurwitz_zeta(s, a);
                assert!((h - head - tail).abs() < 1e-14 * h);
            }
        }
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[0], 1.0);
        assert!((b[1] + 0.5).abs() < 1e-15);
        assert!((b[2] - 1.0 / 6.0).abs() < 1e-15);
        assert!((b[4] + 1.0 / 30.0).abs() < 1e-15);
        assert!(b[3].abs() < 1e-15 && b[5].abs() < 1e-15);
        for &x in &[0.0, 0.2, 0.5, 0.77] {
            assert!((bernoulli_poly(2, x) - bernoulli2(x)).abs() < 1e-14);
            let b4 = x.powi(4) - 2.0 * x.powi(3) + x * x - 1.0 / 30.0;
            assert!((bernoulli_poly(4, x) - b4).abs() < 1e-14);
        }
    }

    #[test]
    fn double_double_basics() {
        let third = Dd::ratio(1.0, 3.0);
        // 3 · (1/3) - 1 vanishes to double-double precision
        assert!(third.mul_f64(3.0).add_f64(-1.0).to_f64().abs() < 1e-31);
        let x = Dd::from_f64(1.0).add_f64(1e-20);
        assert_eq!(x.add_f64(-1.0).to_f64(), 1e-20);
        let q = Dd::from_f64(2.0).div_f64(7.0);
        assert!(q.mul_f64(7.0).add_f64(-2.0).to_f64().abs() < 1e-31);
        assert!((Dd::TWO_PI.to_f64() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_dd_matches_f64() {
        for n in [2usize, 4, 6, 12] {
            for x in [0.0, 0.1, 0.37, 0.5, 0.99] {
                let a = bernoulli_poly_dd(n, Dd::from_f64(x)).to_f64();
                let b = bernoulli_poly(n, x);
                assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "n {n} x {x}");
            }
        }
        // B_4(1/2) = 7/240
        let v = bernoulli_poly_dd(4, Dd::ratio(1.0, 2.0));
        assert!(v.add(Dd::ratio(-7.0, 240.0)).to_f64().abs() < 1e-30);
    }
}
