//! Arithmetic in `Z_N` and in `F_b[x]` for prime `b`.
//!
//! Polynomials are dense coefficient vectors, lowest degree first. A polynomial
//! is identified with the integer whose base-`b` digits are its coefficients,
//! `k = Σ k_i b^i`; this encoding is used for ordering, serialization and as an
//! index into residue tables.

use std::fmt;

use crate::error::{Error, Result};

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Smallest primitive root modulo the prime `n`.
///
/// `n = 2` yields the trivial group `{1}` with generator 1.
pub fn primitive_root(n: u64) -> Result<u64> {
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if n == 2 {
        return Ok(1);
    }
    let order = n - 1;
    let factors = prime_factors(order);
    (2..n)
        .find(|&g| factors.iter().all(|&p| pow_mod(g, order / p, n) != 1))
        .ok_or(Error::NotPrime(n))
}

fn check_base(b: u32) -> Result<()> {
    if is_prime(b as u64) {
        Ok(())
    } else {
        Err(Error::NonPrimeBase(b as u64))
    }
}

/// Polynomial over `F_b`, coefficients lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    base: u32,
    coeffs: Vec<u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[b={}]({})", self.base, self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{c}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    /// Builds a polynomial from coefficients (lowest degree first), reducing mod `b`.
    pub fn new(base: u32, coeffs: Vec<u32>) -> Result<Self> {
        check_base(base)?;
        Ok(Self::from_raw(base, coeffs))
    }

    fn from_raw(base: u32, coeffs: Vec<u32>) -> Self {
        let mut p = Poly {
            base,
            coeffs: coeffs.into_iter().map(|c| c % base).collect(),
        };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn zero(base: u32) -> Self {
        Poly { base, coeffs: Vec::new() }
    }

    pub fn one(base: u32) -> Self {
        Poly { base, coeffs: vec![1] }
    }

    /// The monomial `x^k`.
    pub fn monomial(base: u32, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        Poly { base, coeffs }
    }

    /// Decodes the integer whose base-`b` digits are the coefficients.
    pub fn from_int(base: u32, mut value: u64) -> Result<Self> {
        check_base(base)?;
        let mut coeffs = Vec::new();
        while value > 0 {
            coeffs.push((value % base as u64) as u32);
            value /= base as u64;
        }
        Ok(Poly { base, coeffs })
    }

    pub(crate) fn from_int_unchecked(base: u32, mut value: u64) -> Self {
        let mut coeffs = Vec::new();
        while value > 0 {
            coeffs.push((value % base as u64) as u32);
            value /= base as u64;
        }
        Poly { base, coeffs }
    }

    /// Integer encoding `Σ c_i b^i`.
    pub fn to_int(&self) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.base as u64 + c as u64)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn inv(&self, a: u32) -> u32 {
        pow_mod(a as u64, self.base as u64 - 2, self.base as u64) as u32
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.base, other.base);
        let b = self.base;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| (self.coeff(i) + other.coeff(i)) % b).collect();
        Poly::from_raw(b, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.base, other.base);
        let b = self.base;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| (self.coeff(i) + b - other.coeff(i)) % b)
            .collect();
        Poly::from_raw(b, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.base, other.base);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.base);
        }
        let b = self.base as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + x as u64 * y as u64) % b;
            }
        }
        Poly::from_raw(self.base, acc.into_iter().map(|c| c as u32).collect())
    }

    pub fn scale(&self, c: u32) -> Poly {
        let b = self.base as u64;
        Poly::from_raw(
            self.base,
            self.coeffs.iter().map(|&x| ((x as u64 * c as u64) % b) as u32).collect(),
        )
    }

    /// Quotient and remainder; panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let b = self.base as u64;
        let lead_inv = self.inv(divisor.leading()) as u64;
        let mut rem: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        let qlen = rem.len().saturating_sub(dd);
        let mut quot = vec![0u64; qlen];
        for i in (0..qlen).rev() {
            let c = rem[i + dd] * lead_inv % b;
            if c == 0 {
                continue;
            }
            quot[i] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = (rem[i + j] + b - c * d as u64 % b) % b;
            }
        }
        rem.truncate(dd.min(rem.len()));
        (
            Poly::from_raw(self.base, quot.into_iter().map(|c| c as u32).collect()),
            Poly::from_raw(self.base, rem.into_iter().map(|c| c as u32).collect()),
        )
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    pub fn mul_mod(&self, other: &Poly, modulus: &Poly) -> Poly {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut exp: u64, modulus: &Poly) -> Poly {
        let mut acc = Poly::one(self.base).rem(modulus);
        let mut base = self.rem(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_mod(&base, modulus);
            }
            base = base.mul_mod(&base, modulus);
            exp >>= 1;
        }
        acc
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let inv = self.inv(a.leading());
            a.scale(inv)
        }
    }
}

/// Irreducibility over `F_b` by Ben-Or's test: `P` of degree `d` is
/// irreducible iff `gcd(x^{b^i} - x, P) = 1` for `1 ≤ i ≤ d/2`.
pub fn is_irreducible(p: &Poly) -> bool {
    let d = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let b = p.base();
    let x = Poly::monomial(b, 1);
    let mut power = x.rem(p);
    for _ in 1..=d / 2 {
        power = power.pow_mod(b as u64, p);
        let g = power.sub(&x).gcd(p);
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `m`,
/// ordered by the integer encoding of its lower coefficients.
pub fn find_irreducible(b: u32, m: u32) -> Result<Poly> {
    check_base(b)?;
    if m == 0 {
        return Err(Error::DegreeError("irreducible polynomials need degree >= 1".into()));
    }
    let lead = (b as u64)
        .checked_pow(m)
        .ok_or_else(|| Error::DegreeError(format!("b^m overflows for b={b}, m={m}")))?;
    (0..lead)
        .map(|low| Poly::from_int_unchecked(b, lead + low))
        .find(is_irreducible)
        .ok_or_else(|| Error::DegreeError(format!("no irreducible polynomial of degree {m}")))
}

/// Modulus of a cyclic multiplicative group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Modulus {
    Integer(u64),
    Polynomial(Poly),
}

/// The multiplicative group of `Z_N` (prime `N`) or `F_b[x]/P(x)` (irreducible
/// `P`), with its elements listed in generator-power order.
///
/// Elements are identified by their integer encodings, so the group always
/// lives on the residues `1..order+1`.
#[derive(Debug, Clone)]
pub struct CyclicGroup {
    modulus: Modulus,
    generator: u64,
    /// `elements[δ]` is the encoding of `g^δ`.
    elements: Vec<u64>,
    /// Inverse of `elements`; entry 0 is unused.
    log: Vec<u32>,
}

impl CyclicGroup {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Number of nonzero residues, `|G| - 1`.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Total number of residues including zero, `|G|`.
    pub fn residue_count(&self) -> usize {
        self.elements.len() + 1
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    /// Exponent `δ` with `g^δ = element`; `None` for zero.
    pub fn log(&self, element: u64) -> Option<usize> {
        if element == 0 || element as usize >= self.log.len() {
            None
        } else {
            Some(self.log[element as usize] as usize)
        }
    }

    /// Product of two residues (given by encoding) using discrete logs.
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match (self.log(a), self.log(b)) {
            (Some(x), Some(y)) => self.elements[(x + y) % self.order()],
            _ => 0,
        }
    }

    fn from_powers(modulus: Modulus, generator: u64, elements: Vec<u64>) -> Self {
        let mut log = vec![0u32; elements.len() + 1];
        for (i, &e) in elements.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        CyclicGroup { modulus, generator, elements, log }
    }

    /// `Z_N \ {0}` for prime `N`, generated by the smallest primitive root.
    pub fn integer(n: u64) -> Result<Self> {
        let g = primitive_root(n)?;
        let mut elements = Vec::with_capacity(n as usize - 1);
        let mut x = 1u64;
        for _ in 0..n - 1 {
            elements.push(x);
            x = mul_mod(x, g, n);
        }
        Ok(Self::from_powers(Modulus::Integer(n), g, elements))
    }

    /// `F_b[x]/P(x) \ {0}` for irreducible `P`.
    pub fn polynomial(p: &Poly) -> Result<Self> {
        let g = poly_group_generator(p)?;
        let order = residue_space(p)? - 1;
        let gp = Poly::from_int_unchecked(p.base(), g);
        let mut elements = Vec::with_capacity(order as usize);
        let mut x = Poly::one(p.base());
        for _ in 0..order {
            elements.push(x.to_int());
            x = x.mul_mod(&gp, p);
        }
        Ok(Self::from_powers(Modulus::Polynomial(p.clone()), g, elements))
    }
}

fn residue_space(p: &Poly) -> Result<u64> {
    let d = p.degree().unwrap_or(0) as u32;
    (p.base() as u64)
        .checked_pow(d)
        .filter(|&v| v <= u32::MAX as u64)
        .ok_or_else(|| Error::DegreeError(format!("residue ring too large for degree {d}")))
}

/// Smallest (by encoding) generator of `(F_b[x]/P(x))^*` for irreducible `P`.
pub fn poly_group_generator(p: &Poly) -> Result<u64> {
    if !is_irreducible(p) {
        return Err(Error::NotIrreducible(p.to_int(), p.base()));
    }
    let order = residue_space(p)? - 1;
    if order == 1 {
        return Ok(1);
    }
    let factors = prime_factors(order);
    (2..=order)
        .find(|&cand| {
            let g = Poly::from_int_unchecked(p.base(), cand);
            factors
                .iter()
                .all(|&q| g.pow_mod(order / q, p).to_int() != 1)
        })
        .ok_or(Error::NotIrreducible(p.to_int(), p.base()))
}

/// Truncated expansion `Σ_{i=1}^{M} a_i x^{-i}` of a proper fraction `z/P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    pub base: u32,
    /// `coeffs[i - 1] = a_i`
    pub coeffs: Vec<u32>,
}

impl LaurentSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Digits `a_1 … a_n` read as the integer `Σ a_i b^{n-i}`.
    pub fn digits_to_int(&self, n: usize) -> u64 {
        self.coeffs[..n]
            .iter()
            .fold(0u64, |acc, &c| acc * self.base as u64 + c as u64)
    }
}

/// First `len` Laurent coefficients of `z(x)/P(x)` over `F_b`.
///
/// Computed as the quotient of `z(x)·x^len` by `P(x)`: the remainder only
/// contributes below `x^{-len}`.
pub fn laurent_divide(z: &Poly, p: &Poly, len: usize) -> Result<LaurentSeries> {
    let dp = p
        .degree()
        .ok_or_else(|| Error::DegreeError("modulus must be nonzero".into()))?;
    if let Some(dz) = z.degree() {
        if dz >= dp {
            return Err(Error::DegreeError(format!(
                "numerator degree {dz} must be below modulus degree {dp}"
            )));
        }
    }
    let mut shifted = vec![0u32; len];
    shifted.extend_from_slice(z.coeffs());
    let numerator = Poly::from_raw(p.base(), shifted);
    let (quot, _) = numerator.div_rem(p);
    let coeffs = (1..=len).map(|i| quot.coeff(len - i)).collect();
    Ok(LaurentSeries { base: p.base(), coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(b: u32, c: &[u32]) -> Poly {
        Poly::new(b, c.to_vec()).unwrap()
    }

    fn brute_order(g: u64, n: u64) -> u64 {
        let mut x = g % n;
        let mut k = 1;
        while x != 1 {
            x = mul_mod(x, g, n);
            k += 1;
        }
        k
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(5), Ok(2));
        assert_eq!(primitive_root(3), Ok(2));
        assert_eq!(primitive_root(7), Ok(3));
        assert_eq!(primitive_root(9), Err(Error::NotPrime(9)));
        assert_eq!(primitive_root(1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn primitive_roots_generate_all_units_up_to_1000() {
        for n in (3..=1000).filter(|&n| is_prime(n)) {
            let group = CyclicGroup::integer(n).unwrap();
            let mut seen = vec![false; n as usize];
            for &e in group.elements() {
                assert!(!seen[e as usize], "repeat in Z_{n}");
                seen[e as usize] = true;
            }
            assert!(seen[1..].iter().all(|&s| s));
            // smallest generator: nothing smaller has full order
            let g = group.generator();
            assert_eq!(brute_order(g, n), n - 1);
            for c in 2..g {
                assert!(brute_order(c, n) < n - 1);
            }
        }
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&poly(2, &[1, 1, 1])));
        assert!(!is_irreducible(&poly(2, &[1, 0, 1])));
        assert!(is_irreducible(&poly(2, &[1, 1, 0, 1])));
        assert!(is_irreducible(&poly(3, &[1, 1])));
        assert!(!is_irreducible(&Poly::one(2)));
    }

    fn brute_irreducible(p: &Poly) -> bool {
        let d = p.degree().unwrap();
        let b = p.base() as u64;
        // every monic divisor of degree 1..=d/2
        for deg in 1..=d / 2 {
            let lead = b.pow(deg as u32);
            for low in 0..lead {
                let q = Poly::from_int_unchecked(p.base(), lead + low);
                if p.rem(&q).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn ben_or_agrees_with_trial_division() {
        for b in [2u32, 3] {
            for d in 1..=6u32 {
                let lead = (b as u64).pow(d);
                for low in 0..lead {
                    for top in 1..b as u64 {
                        let p = Poly::from_int_unchecked(b, top * lead + low);
                        assert_eq!(is_irreducible(&p), brute_irreducible(&p), "{p:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn smallest_irreducibles() {
        assert_eq!(find_irreducible(2, 1).unwrap(), poly(2, &[0, 1]));
        assert_eq!(find_irreducible(2, 2).unwrap(), poly(2, &[1, 1, 1]));
        assert_eq!(find_irreducible(2, 3).unwrap(), poly(2, &[1, 1, 0, 1]));
        assert!(matches!(find_irreducible(4, 2), Err(Error::NonPrimeBase(4))));
    }

    #[test]
    fn poly_group_examples() {
        let g = CyclicGroup::polynomial(&poly(2, &[1, 1, 1])).unwrap();
        assert_eq!(g.generator(), 2);
        assert_eq!(g.elements(), &[1, 2, 3]);

        let g = CyclicGroup::polynomial(&poly(2, &[1, 1])).unwrap();
        assert_eq!(g.generator(), 1);
        assert_eq!(g.order(), 1);

        let g = CyclicGroup::polynomial(&poly(3, &[1, 1])).unwrap();
        assert_eq!(g.generator(), 2);
        assert_eq!(g.elements(), &[1, 2]);

        assert!(matches!(
            CyclicGroup::polynomial(&poly(2, &[1, 0, 1])),
            Err(Error::NotIrreducible(5, 2))
        ));
    }

    #[test]
    fn poly_group_enumerates_all_residues() {
        for (b, d) in [(2u32, 1u32), (2, 3), (2, 5), (2, 8), (3, 2), (3, 4), (5, 2), (7, 2)] {
            let p = find_irreducible(b, d).unwrap();
            let group = CyclicGroup::polynomial(&p).unwrap();
            let size = (b as u64).pow(d);
            assert_eq!(group.order() as u64, size - 1);
            let mut seen = vec![false; size as usize];
            for &e in group.elements() {
                assert!(!seen[e as usize]);
                seen[e as usize] = true;
            }
            assert!(seen[1..].iter().all(|&s| s));
            // group multiplication agrees with polynomial multiplication
            for (a, c) in [(1u64, 2u64), (size - 1, 2), (3 % size, size - 1)] {
                if a == 0 || c == 0 {
                    continue;
                }
                let direct = Poly::from_int_unchecked(b, a)
                    .mul_mod(&Poly::from_int_unchecked(b, c), &p)
                    .to_int();
                assert_eq!(group.mul(a, c), direct);
            }
        }
    }

    #[test]
    fn laurent_examples() {
        let x = poly(2, &[0, 1]);
        let one = Poly::one(2);
        assert_eq!(laurent_divide(&one, &x, 3).unwrap().coeffs, vec![1, 0, 0]);
        let p = poly(2, &[1, 1, 1]);
        assert_eq!(laurent_divide(&one, &p, 6).unwrap().coeffs, vec![0, 1, 1, 0, 1, 1]);
        assert_eq!(laurent_divide(&x, &p, 3).unwrap().coeffs, vec![1, 1, 0]);
        assert!(matches!(
            laurent_divide(&p, &p, 3),
            Err(Error::DegreeError(_))
        ));
    }

    #[test]
    fn laurent_multiply_back() {
        for (b, d) in [(2u32, 4u32), (3, 3), (5, 2)] {
            let p = find_irreducible(b, d).unwrap();
            let len = 12usize;
            for zi in 1..(b as u64).pow(d) {
                let z = Poly::from_int_unchecked(b, zi);
                let series = laurent_divide(&z, &p, len).unwrap();
                // P(x)·Σ a_i x^{i-len-1}·x^{...}: multiply by x^len to stay polynomial
                let mut scaled = vec![0u32; len];
                for i in 1..=len {
                    scaled[len - i] = series.coeffs[i - 1];
                }
                let prod = Poly::new(b, scaled).unwrap().mul(&p);
                let target = Poly::monomial(b, len).mul(&z);
                let diff = prod.sub(&target);
                // all coefficients of x^{len + e} with e > deg(P) - len - 1 vanish,
                // i.e. the difference has degree < deg(P)
                assert!(diff.degree().map_or(true, |dd| dd < d as usize), "{z:?}");
            }
        }
    }

    #[test]
    fn encoding_round_trip() {
        for v in [0u64, 1, 2, 7, 100, 12345] {
            for b in [2u32, 3, 5] {
                assert_eq!(Poly::from_int(b, v).unwrap().to_int(), v);
            }
        }
        assert_eq!(format!("{}", poly(2, &[1, 1, 0, 1])), "x^3 + x + 1");
    }
}
