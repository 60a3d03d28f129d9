//! Residue classes and a segmented sieve restricted to one class.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest bound accepted by [`sieve_range`].
pub const DEFAULT_MAX_X: u64 = 1 << 40;

static MAX_X: AtomicU64 = AtomicU64::new(DEFAULT_MAX_X);

/// Sets the process-wide cap used by [`sieve_range`].
pub fn set_max_x(cap: u64) {
    MAX_X.store(cap, Ordering::Relaxed);
}

/// The current process-wide cap.
pub fn max_x() -> u64 {
    MAX_X.load(Ordering::Relaxed)
}

/// Odd candidates per sieve segment.
const SEGMENT_ODDS: u64 = 1 << 20;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Euler's totient, by trial factorisation.
pub fn euler_phi(mut n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut phi = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            phi -= phi / p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// The residue class `l (mod k)` with `gcd(k, l) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApSpec {
    k: u64,
    l: u64,
    phi_k: u64,
}

impl ApSpec {
    /// Builds the class, reducing `l` modulo `k`. `k = 1` is the class of all primes.
    pub fn new(k: u64, l: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidModulus(k));
        }
        let l = l.rem_euclid(k as i64) as u64;
        let g = gcd(k, l);
        if g != 1 {
            return Err(Error::Coprimality { k, l, gcd: g });
        }
        Ok(Self {
            k,
            l,
            phi_k: euler_phi(k),
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn phi_k(&self) -> u64 {
        self.phi_k
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.k == self.l
    }

    /// Every reduced residue class modulo `k`, in increasing order of `l`.
    pub fn all_classes(k: u64) -> Result<Vec<ApSpec>> {
        if k == 0 {
            return Err(Error::InvalidModulus(k));
        }
        Ok((0..k)
            .filter(|&l| gcd(k, l) == 1)
            .map(|l| ApSpec {
                k,
                l,
                phi_k: euler_phi(k),
            })
            .collect())
    }
}

pub fn make_ap(k: u64, l: i64) -> Result<ApSpec> {
    ApSpec::new(k, l)
}

/// The ascending primes `p ≤ bound` with `p ≡ l (mod k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeList {
    bound: f64,
    ap: ApSpec,
    primes: Vec<u64>,
}

impl PrimeList {
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn ap(&self) -> &ApSpec {
        &self.ap
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `π_l(k, y)` for any `y ≤ bound`, by binary search.
    pub fn count_le(&self, y: f64) -> usize {
        if y < 2.0 {
            return 0;
        }
        let n = y.floor() as u64;
        self.primes.partition_point(|&p| p <= n)
    }

    /// The primes `≤ y` as a prefix slice.
    pub fn prefix(&self, y: f64) -> &[u64] {
        &self.primes[..self.count_le(y)]
    }
}

fn validate_bound(x: f64, cap: u64) -> Result<u64> {
    if !x.is_finite() || x < 2.0 {
        return Err(Error::InvalidBound(x));
    }
    let n = x.floor();
    if n > cap as f64 {
        return Err(Error::BoundTooLarge { x, cap });
    }
    Ok(n as u64)
}

/// Primes up to `n` with a plain sieve; used for the sieving primes.
fn small_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Sieves one block of odd indices `[start, end)`, where index `i` stands for `2i + 1`,
/// and keeps the survivors in the requested class.
fn sieve_segment(start: u64, end: u64, base: &[u64], ap: &ApSpec) -> Vec<u64> {
    let len = (end - start) as usize;
    let mut composite = vec![false; len];
    let lo = 2 * start + 1;
    let hi = 2 * (end - 1) + 1;
    for &p in base.iter().skip(1) {
        if p * p > hi {
            break;
        }
        // first odd multiple of p that is >= max(p^2, lo)
        let mut m = (p * p).max(lo.div_ceil(p) * p);
        if m % 2 == 0 {
            m += p;
        }
        let mut idx = ((m - 1) / 2 - start) as usize;
        while idx < len {
            composite[idx] = true;
            idx += p as usize;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| {
            let v = 2 * (start + i as u64) + 1;
            (!c && v > 1 && ap.contains(v)).then_some(v)
        })
        .collect()
}

/// Sieves `{p prime : p ≤ x, p ≡ l (mod k)}` under an explicit cap on `x`.
pub fn sieve_range_capped(x: f64, ap: ApSpec, cap: u64) -> Result<PrimeList> {
    let n = validate_bound(x, cap)?;
    let base = small_primes(isqrt(n));
    let odd_count = (n - 1) / 2 + 1;
    let segments = odd_count.div_ceil(SEGMENT_ODDS);

    let blocks: Vec<Vec<u64>> = (0..segments)
        .into_par_iter()
        .map(|s| {
            let start = s * SEGMENT_ODDS;
            let end = ((s + 1) * SEGMENT_ODDS).min(odd_count);
            sieve_segment(start, end, &base, &ap)
        })
        .collect();

    let mut primes = Vec::with_capacity(blocks.iter().map(Vec::len).sum::<usize>() + 1);
    if ap.contains(2) {
        primes.push(2);
    }
    for b in blocks {
        primes.extend(b);
    }
    Ok(PrimeList {
        bound: x,
        ap,
        primes,
    })
}

/// Sieves `{p prime : p ≤ x, p ≡ l (mod k)}` under the cap set by [`set_max_x`] (default `2^40`).
pub fn sieve_range(x: f64, ap: ApSpec) -> Result<PrimeList> {
    sieve_range_capped(x, ap, max_x())
}

/// `π_l(k, x)`.
pub fn prime_count_ap(x: f64, ap: ApSpec) -> Result<usize> {
    Ok(sieve_range(x, ap)?.len())
}
