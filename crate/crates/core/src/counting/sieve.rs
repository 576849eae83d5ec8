//! Smallest-prime-factor sieve and small arithmetic helpers.

/// Smallest prime factor of every `n ≤ limit` (`spf[0] = spf[1] = 0`).
#[derive(Clone, Debug)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Sieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..self.spf.len()).filter(|&n| self.is_prime(n)).map(|n| n as u64)
    }

    /// Distinct prime factors in increasing order. `n` must be within the limit.
    pub fn prime_factors(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        out
    }

    pub fn is_squarefree(&self, mut n: u64) -> bool {
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        true
    }
}

/// Distinct prime factors by trial division.
pub fn trial_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut n = n;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

/// Number of `t ∈ [1, x]` coprime to every prime in `primes`.
pub fn count_coprime(x: u64, primes: &[u64]) -> u64 {
    fn rec(x: u64, primes: &[u64], d: u64, sign: i64, acc: &mut i64) {
        *acc += sign * (x / d) as i64;
        for (k, &p) in primes.iter().enumerate() {
            let Some(nd) = d.checked_mul(p) else { continue };
            if nd > x {
                continue;
            }
            rec(x, &primes[k + 1..], nd, -sign, acc);
        }
    }
    let mut acc = 0;
    rec(x, primes, 1, 1, &mut acc);
    acc as u64
}
