//! Exact tables of the arithmetic functions every other module leans on:
//! Euler's totient phi(n), the Moebius function mu(n), the von Mangoldt
//! function Lambda(n) (stored as log p in double precision) and the smallest
//! prime factor of n.
//!
//! Tables are dense arrays indexed from 1 (index 0 is unused) and are built
//! with a linear sieve, so each composite is visited exactly once. After
//! `build` the table is immutable and safe to share across threads.
//!
//! For ranges too large to hold resident, [`SegmentedSieve`] streams the same
//! four functions block by block from a base-prime list.

use crate::error::{Error, Result};

/// Default memory budget for dense tables: 2 GiB.
pub const DEFAULT_MEMORY_BUDGET_BYTES: u64 = 2 << 30;

/// Approximate bytes per table entry (phi u32 + spf u32 + mu i8 + lambda f64).
const BYTES_PER_ENTRY: u64 = 17;

/// Dense tables of phi, mu, Lambda and smallest prime factor for n <= n_max.
pub struct SieveTable {
    n_max: u64,
    phi: Vec<u32>,
    mu: Vec<i8>,
    lambda: Vec<f64>,
    spf: Vec<u32>,
}

impl SieveTable {
    /// Builds tables for 1..=n_max under the default memory budget.
    pub fn build(n_max: u64) -> Result<Self> {
        Self::build_with_budget(n_max, DEFAULT_MEMORY_BUDGET_BYTES)
    }

    /// Builds tables for 1..=n_max, refusing requests above `budget_bytes`.
    pub fn build_with_budget(n_max: u64, budget_bytes: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Capacity("table size n_max must be >= 1".into()));
        }
        if n_max >= u32::MAX as u64 {
            return Err(Error::Capacity(format!(
                "n_max = {n_max} exceeds the dense-table limit {}",
                u32::MAX - 1
            )));
        }
        let estimated = (n_max + 1).saturating_mul(BYTES_PER_ENTRY);
        if estimated > budget_bytes {
            return Err(Error::Capacity(format!(
                "n_max = {n_max} needs ~{estimated} bytes, budget is {budget_bytes}"
            )));
        }

        let n = n_max as usize;
        let mut phi = vec![0u32; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut lambda = vec![0f64; n + 1];
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();

        phi[1] = 1;
        mu[1] = 1;
        spf[1] = 1;

        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                phi[i] = (i - 1) as u32;
                mu[i] = -1;
                primes.push(i as u32);
            }
            let spf_i = spf[i];
            for &p in &primes {
                if p > spf_i {
                    break;
                }
                let ip = i * p as usize;
                if ip > n {
                    break;
                }
                spf[ip] = p;
                if p == spf_i {
                    phi[ip] = phi[i] * p;
                    mu[ip] = 0;
                    break;
                } else {
                    phi[ip] = phi[i] * (p - 1);
                    mu[ip] = -mu[i];
                }
            }
        }

        // Lambda(n) = log p exactly when n is a power of the prime p. Powers
        // inherit the stored log of their base so repeated powers stay
        // bit-identical.
        for i in 2..=n {
            let p = spf[i] as usize;
            let m = i / p;
            lambda[i] = if m == 1 {
                (p as f64).ln()
            } else if spf[m] as usize == p {
                lambda[m]
            } else {
                0.0
            };
        }

        Ok(Self {
            n_max,
            phi,
            mu,
            lambda,
            spf,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Euler totient phi(n). Panics if n is 0 or beyond the table.
    #[inline]
    pub fn phi(&self, n: u64) -> u64 {
        self.phi[n as usize] as u64
    }

    /// Moebius mu(n) in {-1, 0, 1}.
    #[inline]
    pub fn mu(&self, n: u64) -> i64 {
        self.mu[n as usize] as i64
    }

    /// Von Mangoldt Lambda(n): log p for n = p^k, else 0.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        self.lambda[n as usize]
    }

    /// Smallest prime factor of n; spf(1) = 1.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    /// Validates 1 <= n <= n_max for callers that take user-supplied indices.
    pub fn check_range(&self, n: u64, what: &str) -> Result<()> {
        if n == 0 || n > self.n_max {
            return Err(Error::Range(format!(
                "{what} = {n} outside table range [1, {}]",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Iterator over the primes recorded in the table.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.n_max).filter(move |&i| self.spf[i as usize] as u64 == i)
    }
}

/// Greatest common divisor with the convention gcd(0, b) = b.
pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple; saturates rather than overflowing.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)).saturating_mul(b)
}

/// All primes <= limit via a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// One streamed block of sieve values covering `lo .. lo + phi.len()`.
pub struct SieveSegment {
    pub lo: u64,
    pub phi: Vec<u64>,
    pub mu: Vec<i8>,
    pub lambda: Vec<f64>,
    pub spf: Vec<u64>,
}

impl SieveSegment {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Computes phi, mu, Lambda and spf over the window [lo, lo + len) from a
/// base-prime list, which must contain every prime up to sqrt(lo + len - 1).
pub fn fill_segment(base_primes: &[u64], lo: u64, len: usize) -> SieveSegment {
    assert!(lo >= 1, "segments start at n = 1");
    let hi = lo + len as u64;

    let mut residual: Vec<u64> = (lo..hi).collect();
    let mut phi: Vec<u64> = (lo..hi).collect();
    let mut mu = vec![1i8; len];
    let mut distinct = vec![0u32; len];
    let mut first = vec![0u64; len];

    for &p in base_primes {
        if p.saturating_mul(p) >= hi {
            break;
        }
        let start = lo.div_ceil(p) * p;
        let mut n = start;
        while n < hi {
            let i = (n - lo) as usize;
            let mut exp = 0u32;
            while residual[i] % p == 0 {
                residual[i] /= p;
                exp += 1;
            }
            phi[i] = phi[i] / p * (p - 1);
            mu[i] = if exp > 1 { 0 } else { -mu[i] };
            distinct[i] += 1;
            if distinct[i] == 1 {
                first[i] = p;
            }
            n += p;
        }
    }

    let mut lambda = vec![0f64; len];
    let mut spf = vec![0u64; len];
    for i in 0..len {
        let n = lo + i as u64;
        let left = residual[i];
        if left > 1 {
            // Leftover prime factor above sqrt(hi); exponent is exactly 1.
            phi[i] = phi[i] / left * (left - 1);
            mu[i] = -mu[i];
            distinct[i] += 1;
            if distinct[i] == 1 {
                first[i] = left;
            }
        }
        if n == 1 {
            phi[i] = 1;
            mu[i] = 1;
            spf[i] = 1;
            continue;
        }
        // Base primes are visited ascending, so the first divisor recorded is
        // the smallest prime factor; a pure leftover means n itself is prime.
        spf[i] = first[i];
        if distinct[i] == 1 {
            lambda[i] = (first[i] as f64).ln();
        }
    }

    SieveSegment {
        lo,
        phi,
        mu,
        lambda,
        spf,
    }
}

/// Streaming sieve over [lo, hi): yields consecutive [`SieveSegment`]s so the
/// full tables never need to be resident.
pub struct SegmentedSieve {
    base_primes: Vec<u64>,
    cursor: u64,
    hi_excl: u64,
    segment_len: usize,
}

impl SegmentedSieve {
    pub fn new(lo: u64, hi_excl: u64, segment_len: usize) -> Result<Self> {
        if lo < 1 || hi_excl < lo {
            return Err(Error::Parameter(format!(
                "segmented sieve range [{lo}, {hi_excl}) is empty or starts below 1"
            )));
        }
        if segment_len == 0 {
            return Err(Error::Parameter("segment length must be >= 1".into()));
        }
        let root = ((hi_excl.saturating_sub(1)) as f64).sqrt() as u64 + 1;
        Ok(Self {
            base_primes: primes_up_to(root),
            cursor: lo,
            hi_excl,
            segment_len,
        })
    }
}

impl Iterator for SegmentedSieve {
    type Item = SieveSegment;

    fn next(&mut self) -> Option<SieveSegment> {
        if self.cursor >= self.hi_excl {
            return None;
        }
        let len = (self.hi_excl - self.cursor).min(self.segment_len as u64) as usize;
        let seg = fill_segment(&self.base_primes, self.cursor, len);
        self.cursor += len as u64;
        Some(seg)
    }
}
