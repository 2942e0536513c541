//! Complex DFT of arbitrary length and real circular correlation.
//!
//! Power-of-two lengths use an iterative radix-2 transform; every other
//! length goes through Bluestein's chirp-z reduction to a power-of-two
//! convolution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = Σ_j x_j e^{-2πijk/L}`
    Forward,
    /// `x_j = (1/L) Σ_k X_k e^{+2πijk/L}`
    Inverse,
}

/// Discrete Fourier transform of `values`. The inverse is scaled by `1/L`.
pub fn fft(values: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let len = values.len();
    let mut out = match len {
        0 => return Vec::new(),
        1 => values.to_vec(),
        _ if len.is_power_of_two() => {
            let mut buf = values.to_vec();
            radix2_in_place(&mut buf, direction);
            buf
        }
        _ => bluestein(values, direction),
    };
    if direction == Direction::Inverse {
        let scale = 1.0 / len as f64;
        for v in &mut out {
            *v *= scale;
        }
    }
    out
}

fn sign(direction: Direction) -> f64 {
    match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    }
}

/// Unscaled in-place radix-2 transform; `buf.len()` must be a power of two.
fn radix2_in_place(buf: &mut [Complex64], direction: Direction) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sgn = sign(direction);
    let mut half = 1;
    while half < n {
        let step = 2 * half;
        // twiddles computed directly per index to avoid drift from repeated products
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, sgn * PI * k as f64 / half as f64))
            .collect();
        for start in (0..n).step_by(step) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        half = step;
    }
}

/// Chirp factor `e^{sgn·πi·k²/L}` with `k²` reduced mod `2L` to keep the angle small.
fn chirp(k: usize, len: usize, sgn: f64) -> Complex64 {
    let k2 = (k as u128 * k as u128) % (2 * len as u128);
    Complex64::from_polar(1.0, sgn * PI * k2 as f64 / len as f64)
}

/// Unscaled DFT of arbitrary length via Bluestein's algorithm.
fn bluestein(values: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let len = values.len();
    let sgn = sign(direction);
    let conv_len = (2 * len - 1).next_power_of_two();

    let mut a = vec![Complex64::new(0.0, 0.0); conv_len];
    for (k, v) in values.iter().enumerate() {
        a[k] = v * chirp(k, len, sgn);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); conv_len];
    b[0] = chirp(0, len, -sgn);
    for k in 1..len {
        let c = chirp(k, len, -sgn);
        b[k] = c;
        b[conv_len - k] = c;
    }

    radix2_in_place(&mut a, Direction::Forward);
    radix2_in_place(&mut b, Direction::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2_in_place(&mut a, Direction::Inverse);
    let scale = 1.0 / conv_len as f64;

    (0..len).map(|k| a[k] * scale * chirp(k, len, sgn)).collect()
}

/// Real circular correlation `c_t = Σ_δ a_δ b_{(t+δ) mod L}`, computed with FFTs.
pub fn circular_convolve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(Correlator::new(b).correlate(a))
}

/// Circular correlation against a fixed right-hand vector whose transform is
/// cached. The fast CBC search correlates many `Y` vectors against the same
/// ω sequence.
#[derive(Debug, Clone)]
pub struct Correlator {
    spectrum: Vec<Complex64>,
    norm: f64,
}

impl Correlator {
    pub fn new(b: &[f64]) -> Self {
        let input: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Correlator {
            spectrum: fft(&input, Direction::Forward),
            norm: b.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    /// Panics if `a.len()` differs from the length the correlator was built for.
    pub fn correlate(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.spectrum.len(), "correlation length mismatch");
        if a.is_empty() {
            return Vec::new();
        }
        let input: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let spec_a = fft(&input, Direction::Forward);
        let product: Vec<Complex64> = spec_a
            .iter()
            .zip(&self.spectrum)
            .map(|(x, y)| x.conj() * y)
            .collect();
        let out = fft(&product, Direction::Inverse);
        let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let bound = 1e-9 * (norm_a * self.norm).max(f64::MIN_POSITIVE);
        debug_assert!(
            out.iter().all(|c| c.im.abs() <= bound),
            "imaginary residue above tolerance"
        );
        out.into_iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(values: &[Complex64], direction: Direction) -> Vec<Complex64> {
        let len = values.len();
        let sgn = sign(direction);
        (0..len)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let angle = sgn * 2.0 * PI * ((j * k) % len) as f64 / len as f64;
                    acc += v * Complex64::from_polar(1.0, angle);
                }
                if direction == Direction::Inverse {
                    acc / len as f64
                } else {
                    acc
                }
            })
            .collect()
    }

    fn direct_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
        let len = a.len();
        (0..len)
            .map(|t| (0..len).map(|d| a[d] * b[(t + d) % len]).sum())
            .collect()
    }

    fn random_complex(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn length_one_is_identity() {
        let v = vec![Complex64::new(3.5, -1.0)];
        assert_eq!(fft(&v, Direction::Forward), v);
        assert_eq!(fft(&v, Direction::Inverse), v);
    }

    #[test]
    fn constant_vector_concentrates_at_zero() {
        for len in [2usize, 5, 8, 12] {
            let v = vec![Complex64::new(2.0, 0.0); len];
            let out = fft(&v, Direction::Forward);
            assert!((out[0] - Complex64::new(2.0 * len as f64, 0.0)).norm() < 1e-12);
            for x in &out[1..] {
                assert!(x.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_naive_dft_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for len in 1..=40 {
            let v = random_complex(&mut rng, len);
            let fast = fft(&v, Direction::Forward);
            let slow = naive_dft(&v, Direction::Forward);
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).norm() < 1e-10, "len {len}");
            }
            let back = fft(&fast, Direction::Inverse);
            for (x, y) in back.iter().zip(&v) {
                assert!((x - y).norm() < 1e-12, "len {len}");
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in 1..=64 {
            let v = random_complex(&mut rng, len);
            let energy: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            let spec_energy: f64 = fft(&v, Direction::Forward).iter().map(|x| x.norm_sqr()).sum();
            assert!((spec_energy - len as f64 * energy).abs() <= 1e-10 * spec_energy);
        }
    }

    #[test]
    fn correlation_small_cases() {
        assert_eq!(
            circular_convolve(&[1.0, 2.0], &[3.0, 4.0])
                .unwrap()
                .iter()
                .map(|x| x.round())
                .collect::<Vec<_>>(),
            vec![11.0, 10.0]
        );
        // a unit impulse on the left reproduces the right operand
        let b = [0.5, -1.0, 2.0, 3.0, 0.25];
        let mut impulse = [0.0; 5];
        impulse[0] = 1.0;
        let c = circular_convolve(&impulse, &b).unwrap();
        for (x, y) in c.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_orientation_with_shifted_impulse() {
        // b = e_1 picks c_t = a_{(1 - t) mod L}
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.0, 1.0, 0.0, 0.0];
        let c = circular_convolve(&a, &b).unwrap();
        let expected = [2.0, 1.0, 4.0, 3.0];
        for (x, y) in c.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn correlation_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for len in 1..=128 {
            let a: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = circular_convolve(&a, &b).unwrap();
            let slow = direct_correlation(&a, &b);
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).abs() < 1e-10, "len {len}");
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert_eq!(
            circular_convolve(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(1, 2))
        );
    }
}
