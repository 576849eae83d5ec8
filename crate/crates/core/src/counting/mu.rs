//! Counting `μ_l`-torsors over `Q` by height, with sieve oracles.

use num_integer::Integer;
use num_traits::Signed;
use rayon::prelude::*;

use super::series::{normalized_samples, CountSeries};
use super::sieve::Sieve;
use super::Budget;
use crate::error::{Error, Result};
use crate::sector::{RaisingFunction, SectorLabel};
use crate::Q;

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `N(B) = #{a ∈ Q^*/(Q^*)^l : H_c(a) ≤ B}` at each sample.
///
/// Classes are represented by signed squarefree integers for `l = 2` and by
/// positive `l`-power-free integers for odd `l`; the trivial class counts.
pub fn mu_count(l: u64, c: &RaisingFunction, samples: &[u64], budget: &Budget) -> Result<CountSeries> {
    if !is_prime(l) {
        return Err(Error::Unsupported(format!("mu({l}): only prime l is supported")));
    }
    let values: Vec<Q> = (1..l)
        .map(|j| {
            c.get(&SectorLabel::Residue { j, l })
                .ok_or_else(|| Error::Raising(format!("not a raising function on mu({l})")))
        })
        .collect::<Result<_>>()?;
    if values.iter().any(|v| !v.is_positive()) {
        return Err(Error::NotBig("c must be positive on every twisted sector".into()));
    }
    let samples = normalized_samples(samples);
    let family = format!("mu({l})");
    let raising = format!(
        "table:{{{}}}",
        values
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{}:{v}", Q::new(k as i64 + 1, l as i64)))
            .collect::<Vec<_>>()
            .join(",")
    );
    let Some(&b_max) = samples.last() else {
        return Ok(CountSeries { family, raising, samples: Vec::new() });
    };

    // Heights are compared as H^D with D clearing every denominator of c.
    let d = values.iter().fold(1i64, |acc, v| acc.lcm(v.denom())) as u32;
    let exps: Vec<u32> = values.iter().map(|v| (v * Q::from_integer(d as i64)).to_integer() as u32).collect();
    let min_exp = *exps.iter().min().expect("l >= 2");
    let thresholds: Vec<u128> = samples
        .iter()
        .map(|&b| (b as u128).checked_pow(d))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Budget(format!("B^{d} overflows 128 bits")))?;
    let t_max = *thresholds.last().expect("nonempty");

    let c_min = values.iter().min().copied().expect("l >= 2");
    let prime_limit = (b_max as f64).powf(1.0 / super::heights::ratio_f64(c_min)).floor() + 1.0;
    if prime_limit > budget.max_prime as f64 {
        return Err(Error::Budget(format!(
            "needs primes up to {prime_limit:.0}, budget is {}",
            budget.max_prime
        )));
    }
    let primes: Vec<u64> = Sieve::new(prime_limit as usize).primes().collect();

    let bucket = |h: u128| thresholds.partition_point(|&t| t < h);
    let n = thresholds.len();
    let ctx = Dfs {
        primes: &primes,
        exps: &exps,
        min_exp,
        t_max,
        bucket: &bucket,
    };

    let mut hist = (0..primes.len())
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut acc, i| {
                ctx.branch(1, i, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    hist[bucket(1)] += 1;

    let sign = if l == 2 { 2 } else { 1 };
    let mut running = 0u64;
    let out = samples
        .iter()
        .zip(&hist)
        .map(|(&b, &k)| {
            running += k;
            (b, sign * running)
        })
        .collect();
    Ok(CountSeries { family, raising, samples: out })
}

struct Dfs<'a, F: Fn(u128) -> usize> {
    primes: &'a [u64],
    exps: &'a [u32],
    min_exp: u32,
    t_max: u128,
    bucket: &'a F,
}

impl<F: Fn(u128) -> usize + Sync> Dfs<'_, F> {
    /// Counts every representative `h·p_i^k·(larger primes)`.
    fn branch(&self, h: u128, i: usize, hist: &mut [u64]) {
        let p = self.primes[i] as u128;
        let Some(least) = p.checked_pow(self.min_exp).and_then(|x| x.checked_mul(h)) else {
            return;
        };
        if least > self.t_max {
            return;
        }
        for &e in self.exps {
            let Some(v) = p.checked_pow(e).and_then(|x| x.checked_mul(h)) else {
                continue;
            };
            if v > self.t_max {
                continue;
            }
            hist[(self.bucket)(v)] += 1;
            self.children(v, i + 1, hist);
        }
    }

    fn children(&self, h: u128, start: usize, hist: &mut [u64]) {
        for i in start..self.primes.len() {
            let p = self.primes[i] as u128;
            match p.checked_pow(self.min_exp).and_then(|x| x.checked_mul(h)) {
                Some(v) if v <= self.t_max => self.branch(h, i, hist),
                _ => break,
            }
        }
    }
}

/// Running counts at each sample of `Σ_{n ≤ B} f(n)` for a sieve-computed `f`.
fn cumulative_at(samples: &[u64], f: impl Fn(usize) -> u64) -> Vec<(u64, u64)> {
    let samples = normalized_samples(samples);
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0u64;
    let mut n = 0u64;
    for &b in &samples {
        while n < b {
            n += 1;
            acc += f(n as usize);
        }
        out.push((b, acc));
    }
    out
}

/// `[k-power-free]` indicator for `0..=limit`.
fn power_free_marks(limit: usize, k: u32) -> Vec<bool> {
    let mut free = vec![true; limit + 1];
    let mut p = 2usize;
    while p.pow(k) <= limit {
        let pk = p.pow(k);
        let mut m = pk;
        while m <= limit {
            free[m] = false;
            m += pk;
        }
        p += 1;
    }
    free
}

/// `2·#{1 ≤ n ≤ B squarefree}`: the `μ₂` count with `c(1/2) = 1`.
pub fn oracle_mu2(samples: &[u64]) -> Vec<(u64, u64)> {
    let limit = samples.iter().copied().max().unwrap_or(0) as usize;
    let free = power_free_marks(limit, 2);
    cumulative_at(samples, |n| 2 * u64::from(free[n]))
}

/// `Σ_{n ≤ B squarefree} 2^{ω(n)}`: the `μ₃` count with `c = (1, 1)`.
pub fn oracle_mu3_equal(samples: &[u64]) -> Vec<(u64, u64)> {
    let limit = samples.iter().copied().max().unwrap_or(0) as usize;
    let free = power_free_marks(limit, 2);
    let mut omega = vec![0u8; limit + 1];
    for p in 2..=limit {
        if omega[p] == 0 {
            let mut m = p;
            while m <= limit {
                omega[m] += 1;
                m += p;
            }
        }
    }
    cumulative_at(samples, |n| if free[n] { 1u64 << omega[n] } else { 0 })
}

/// `#{1 ≤ n ≤ B cube-free}`: the `μ₃` count with `c = (1, 2)`.
pub fn oracle_mu3_cubefree(samples: &[u64]) -> Vec<(u64, u64)> {
    let limit = samples.iter().copied().max().unwrap_or(0) as usize;
    let free = power_free_marks(limit, 3);
    cumulative_at(samples, |n| u64::from(free[n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::heights::mu_height;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn table(l: u64, v: &[i64]) -> RaisingFunction {
        RaisingFunction::mu_table(l, &v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>()).unwrap()
    }

    /// Direct enumeration of representatives with their heights.
    fn brute(l: u64, c: &RaisingFunction, b: u64, range: i64) -> u64 {
        let reps = (1..=range).filter(|&n| {
            crate::counting::sieve::trial_prime_factors(n as u64)
                .iter()
                .all(|&p| crate::counting::sieve::valuation(n as i128, p) < l as u32)
        });
        let signs: &[i64] = if l == 2 { &[1, -1] } else { &[1] };
        let mut count = 0;
        for n in reps {
            for s in signs {
                if mu_height(s * n, l, c).unwrap().le(b) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn small_bounds() {
        let c = table(2, &[1]);
        let s = mu_count(2, &c, &[0, 1, 2, 10], &Budget::default()).unwrap();
        assert_eq!(s.samples, vec![(0, 0), (1, 2), (2, 4), (10, 14)]);
    }

    #[test]
    fn matches_brute_force() {
        let budget = Budget::default();
        let cases: [(u64, &[i64], &[u64], i64); 4] = [
            (2, &[1], &[1, 7, 30, 100, 300], 300),
            (3, &[1, 1], &[1, 7, 30, 100], 10_000),
            (3, &[1, 2], &[1, 7, 30, 100, 300], 300),
            (5, &[2, 1, 3, 1], &[1, 7, 20], 160_000),
        ];
        for (l, v, bs, range) in cases {
            let c = table(l, v);
            let s = mu_count(l, &c, bs, &budget).unwrap();
            for &(b, n) in &s.samples {
                assert_eq!(n, brute(l, &c, b, range), "l={l} B={b}");
            }
        }
    }

    #[test]
    fn sieve_identities() {
        let bs: Vec<u64> = (1..=3000).collect();
        let budget = Budget::default();
        assert_eq!(mu_count(2, &table(2, &[1]), &bs, &budget).unwrap().samples, oracle_mu2(&bs));
        assert_eq!(mu_count(3, &table(3, &[1, 1]), &bs, &budget).unwrap().samples, oracle_mu3_equal(&bs));
        assert_eq!(mu_count(3, &table(3, &[1, 2]), &bs, &budget).unwrap().samples, oracle_mu3_cubefree(&bs));
    }

    #[test]
    fn fractional_raising() {
        let c = RaisingFunction::mu_table(2, &[q(3, 2)]).unwrap();
        let s = mu_count(2, &c, &[8, 27], &Budget::default()).unwrap();
        // squarefree n with n^(3/2) <= B: n <= 4 resp. n <= 9.
        assert_eq!(s.samples, vec![(8, 2 * 3), (27, 2 * 6)]);
    }

    #[test]
    fn rejects_bad_input() {
        let budget = Budget::default();
        assert!(mu_count(4, &table(4, &[1, 1, 1]), &[10], &budget).is_err());
        let c = RaisingFunction::mu_table(2, &[q(1, 10)]).unwrap();
        assert!(matches!(mu_count(2, &c, &[1000], &budget), Err(Error::Budget(_))));
    }
}
