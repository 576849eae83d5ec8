//! Counting rational points of weighted projective stacks `P(a)` by height.
//!
//! The enumerator splits points by support `S = {i : xᵢ ≠ 0}` and by sector
//! profile: for each twisted `r ∈ I` the squarefree `d_r = Π_{r_p = r} p`.
//! Writing `xᵢ = xᵢ'·Π_r d_r^{⌈aᵢ r⌉}`, the height becomes
//! `max_{i∈S} |xᵢ'|^{|a|/aᵢ}·Π_r d_r^{e_{i,r}}` and the residue conditions
//! become coprimality conditions on the `xᵢ'`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;

use super::heights::{canonical_form, ratio_f64, wps_height, FormalHeight, HeightVariant};
use super::series::{normalized_samples, CountSeries};
use super::sieve::{count_coprime, trial_prime_factors, Sieve};
use super::Budget;
use crate::error::{Error, Result};
use crate::sector::wps_index_set;
use crate::Q;

fn validate(weights: &[u64], variant: HeightVariant) -> Result<()> {
    if !(2..=3).contains(&weights.len()) {
        return Err(Error::Unsupported(format!(
            "point counting needs 2 or 3 weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&a| a == 0 || a > 6) {
        return Err(Error::Unsupported("weights must lie in 1..=6".into()));
    }
    if variant == HeightVariant::Stable && weights.iter().fold(0, |g, a| g.gcd(a)) != 1 {
        return Err(Error::Unsupported(
            "the stable height needs coprime weights; otherwise every point lies on the stacky locus".into(),
        ));
    }
    Ok(())
}

/// Supports excluded from stable counts: on them the stable height forgets
/// the residue and infinitely many points have bounded height.
fn excluded_support(weights: &[u64], support: &[usize], variant: HeightVariant) -> bool {
    variant == HeightVariant::Stable && support.iter().fold(0, |g, &i| g.gcd(&weights[i])) > 1
}

struct Setup {
    weights: Vec<u64>,
    total: Q,
    variant: HeightVariant,
    twisted: Vec<Q>,
}

impl Setup {
    fn new(weights: &[u64], variant: HeightVariant) -> Self {
        Setup {
            weights: weights.to_vec(),
            total: Q::from_integer(weights.iter().sum::<u64>() as i64),
            variant,
            twisted: wps_index_set(weights).into_iter().filter(|r| !r.is_zero()).collect(),
        }
    }

    fn in_a(&self, i: usize, r: Q) -> bool {
        (r * Q::from_integer(self.weights[i] as i64)).is_integer()
    }

    /// `e_{i,r}`: exponent of `d_r` in the height on the primed scale.
    fn exponent(&self, i: usize, r: Q) -> Q {
        let a = Q::from_integer(self.weights[i] as i64);
        let ceil = (a * r).ceil();
        match self.variant {
            HeightVariant::QuasiToric => self.total * ceil / a,
            HeightVariant::Stable => self.total * (ceil - a * r) / a,
        }
    }

    fn coord_exponent(&self, i: usize) -> Q {
        self.total / Q::from_integer(self.weights[i] as i64)
    }
}

struct Unit {
    support: Vec<usize>,
    active: Vec<Q>,
    profile: Vec<u64>,
}

/// Largest `t ≥ 0` with `t^{|a|/aᵢ}·Π d^{e} ≤ B`.
fn max_coordinate(b: u64, coord_exp: Q, factors: &[(u64, Q)]) -> u64 {
    let fits = |t: u64| {
        if t == 0 {
            return true;
        }
        let finite = factors.iter().filter(|(d, _)| *d > 1).copied().collect();
        FormalHeight::new(finite, vec![(t, coord_exp)]).le(b)
    };
    let ln_rest: f64 = factors.iter().map(|&(d, e)| ratio_f64(e) * (d as f64).ln()).sum();
    let guess = (((b as f64).ln() - ln_rest) / ratio_f64(coord_exp)).exp();
    let mut t = if guess.is_finite() { guess.floor().max(0.0) as u64 } else { 0 };
    while t > 0 && !fits(t) {
        t -= 1;
    }
    while fits(t + 1) {
        t += 1;
    }
    t
}

/// Number of points of height at most `b`.
pub fn wps_count_at(weights: &[u64], variant: HeightVariant, b: u64, budget: &Budget) -> Result<u64> {
    validate(weights, variant)?;
    if b == 0 {
        return Ok(0);
    }
    let setup = Setup::new(weights, variant);
    let n = weights.len();

    let mut sieve_limit = 2.0f64;
    for i in 0..n {
        sieve_limit = sieve_limit.max((b as f64).powf(1.0 / ratio_f64(setup.coord_exponent(i))));
    }
    let mut units = Vec::new();
    let mut profile_bound = Vec::new();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if excluded_support(weights, &support, variant) {
            continue;
        }
        let active: Vec<Q> = setup
            .twisted
            .iter()
            .copied()
            .filter(|&r| support.iter().any(|&i| setup.in_a(i, r)))
            .collect();
        for &r in &active {
            let e_max = support
                .iter()
                .map(|&i| setup.exponent(i, r))
                .max()
                .expect("nonempty support");
            sieve_limit = sieve_limit.max((b as f64).powf(1.0 / ratio_f64(e_max)));
        }
        profile_bound.push((support, active));
    }
    let sieve_limit = sieve_limit.floor() as u64 + 2;
    if sieve_limit > budget.max_prime {
        return Err(Error::Budget(format!(
            "needs a sieve up to {sieve_limit}, budget is {}",
            budget.max_prime
        )));
    }
    let sieve = Sieve::new(sieve_limit as usize);

    for (support, active) in profile_bound {
        let mut profile = vec![1u64; active.len()];
        let mut partial = vec![0f64; n];
        enumerate_profiles(&setup, &sieve, b, &support, &active, 0, &mut profile, &mut partial, &mut units);
    }
    if units.len() as u64 > budget.max_work {
        return Err(Error::Budget(format!("{} sector profiles exceed the work budget", units.len())));
    }

    let work = AtomicU64::new(0);
    let total: Result<u64> = units
        .par_iter()
        .map(|u| count_unit(&setup, &sieve, b, u, &work, budget.max_work))
        .try_reduce(|| 0, |x, y| Ok(x + y));
    total
}

/// Depth-first choice of pairwise coprime squarefree `d_r`, pruned by `Π d^{e_{i,r}} ≤ B`.
#[allow(clippy::too_many_arguments)]
fn enumerate_profiles(
    setup: &Setup,
    sieve: &Sieve,
    b: u64,
    support: &[usize],
    active: &[Q],
    k: usize,
    profile: &mut Vec<u64>,
    partial: &mut Vec<f64>,
    out: &mut Vec<Unit>,
) {
    if k == active.len() {
        out.push(Unit {
            support: support.to_vec(),
            active: active.to_vec(),
            profile: profile.clone(),
        });
        return;
    }
    let ln_b = (b as f64).ln() + 1e-9;
    let r = active[k];
    let exps: Vec<(usize, f64)> = support.iter().map(|&i| (i, ratio_f64(setup.exponent(i, r)))).collect();
    let mut d = 1u64;
    loop {
        let ln_d = (d as f64).ln();
        if exps.iter().any(|&(i, e)| partial[i] + e * ln_d > ln_b) {
            break;
        }
        let ok = d == 1
            || (sieve.is_squarefree(d) && profile[..k].iter().all(|&prev| prev.gcd(&d) == 1));
        if ok {
            profile[k] = d;
            for &(i, e) in &exps {
                partial[i] += e * ln_d;
            }
            enumerate_profiles(setup, sieve, b, support, active, k + 1, profile, partial, out);
            for &(i, e) in &exps {
                partial[i] -= e * ln_d;
            }
        }
        d += 1;
        if d as usize > sieve.limit() {
            break;
        }
    }
    profile[k] = 1;
}

/// Residue condition at a prime `p | d_r`: some `i ∈ A_r ∩ S` has `p ∤ xᵢ'`.
struct ProfilePrime {
    p: u64,
    outer_in_a: Vec<usize>,
    last_in_a: bool,
}

fn count_unit(setup: &Setup, sieve: &Sieve, b: u64, unit: &Unit, work: &AtomicU64, max_work: u64) -> Result<u64> {
    let s = &unit.support;
    let bounds: Vec<u64> = s
        .iter()
        .map(|&i| {
            let factors: Vec<(u64, Q)> = unit
                .active
                .iter()
                .zip(&unit.profile)
                .map(|(&r, &d)| (d, setup.exponent(i, r)))
                .collect();
            max_coordinate(b, setup.coord_exponent(i), &factors)
        })
        .collect();
    if bounds.contains(&0) {
        return Ok(0);
    }
    let last_pos = (0..s.len()).max_by_key(|&k| (bounds[k], k)).expect("nonempty");
    let last = s[last_pos];
    let outer: Vec<usize> = (0..s.len()).filter(|&k| k != last_pos).collect();

    let mut profile_primes = Vec::new();
    for (&r, &d) in unit.active.iter().zip(&unit.profile) {
        if d == 1 {
            continue;
        }
        let outer_in_a: Vec<usize> = outer.iter().copied().filter(|&k| setup.in_a(s[k], r)).collect();
        for p in sieve.prime_factors(d) {
            profile_primes.push(ProfilePrime {
                p,
                outer_in_a: outer_in_a.clone(),
                last_in_a: setup.in_a(last, r),
            });
        }
    }

    let t_last = if outer.is_empty() {
        // xᵢ' = ±1 is forced; each profile prime needs the last coordinate in A_r.
        if profile_primes.iter().all(|pp| pp.last_in_a) {
            2
        } else {
            0
        }
    } else {
        let outer_bounds: Vec<u64> = outer.iter().map(|&k| bounds[k]).collect();
        let tuples: u64 = outer_bounds.iter().product();
        if work.fetch_add(tuples, Ordering::Relaxed) + tuples > max_work {
            return Err(Error::Budget(format!("more than {max_work} enumeration steps")));
        }
        let mut total = 0u64;
        let mut t = vec![1u64; outer.len()];
        let mut forbidden = Vec::new();
        'tuples: loop {
            forbidden.clear();
            let g = t.iter().fold(0u64, |g, x| g.gcd(x));
            for p in sieve.prime_factors(g) {
                if !profile_primes.iter().any(|pp| pp.p == p) {
                    forbidden.push(p);
                }
            }
            let mut feasible = true;
            for pp in &profile_primes {
                if pp.outer_in_a.iter().all(|&k| t[outer.iter().position(|&o| o == k).expect("outer")] % pp.p == 0) {
                    if pp.last_in_a {
                        forbidden.push(pp.p);
                    } else {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible {
                total += 2 * count_coprime(bounds[last_pos], &forbidden);
            }
            for (slot, &bound) in t.iter_mut().zip(&outer_bounds) {
                if *slot < bound {
                    *slot += 1;
                    continue 'tuples;
                }
                *slot = 1;
            }
            break;
        }
        total << outer.len()
    };
    let all_even = s.iter().all(|&i| setup.weights[i] % 2 == 0);
    Ok(if all_even { t_last } else { t_last / 2 })
}

/// `N(B)` at every sample; each sample is an independent enumeration.
pub fn wps_count(weights: &[u64], variant: HeightVariant, samples: &[u64], budget: &Budget) -> Result<CountSeries> {
    validate(weights, variant)?;
    let samples = normalized_samples(samples);
    let mut out = Vec::with_capacity(samples.len());
    for &b in &samples {
        out.push((b, wps_count_at(weights, variant, b, budget)?));
    }
    let w: Vec<String> = weights.iter().map(u64::to_string).collect();
    Ok(CountSeries {
        family: format!("wps({})", w.join(",")),
        raising: match variant {
            HeightVariant::QuasiToric => "builtin:quasitoric".into(),
            HeightVariant::Stable => "builtin:zero".into(),
        },
        samples: out,
    })
}

/// Exhaustive oracle: every tuple in the box `|xᵢ| ≤ B^{aᵢ·max(a)/|a|}` is
/// reduced to canonical form, deduplicated and kept if its height is at most
/// `b_max`. Returns the points with `⌈H⌉`, sorted.
///
/// The box contains every reduced point of quasi-toric height `≤ b_max`. For
/// stable heights it can miss points (it does on `P(2,3)`); use
/// [`wps_oracle_in_box`] with a box known to be large enough.
pub fn wps_oracle(weights: &[u64], variant: HeightVariant, b_max: u64) -> Result<Vec<(Vec<i64>, u64)>> {
    validate(weights, variant)?;
    let total: u64 = weights.iter().sum();
    let a_max = *weights.iter().max().expect("validated");
    let radius: Vec<i64> = weights
        .iter()
        .map(|&a| ((b_max as f64).powf((a * a_max) as f64 / total as f64) * (1.0 + 1e-12)).floor() as i64)
        .collect();
    wps_oracle_in_box(weights, variant, b_max, &radius)
}

/// The oracle over an explicit box `|xᵢ| ≤ radius[i]`.
pub fn wps_oracle_in_box(
    weights: &[u64],
    variant: HeightVariant,
    b_max: u64,
    radius: &[i64],
) -> Result<Vec<(Vec<i64>, u64)>> {
    validate(weights, variant)?;
    if radius.len() != weights.len() {
        return Err(Error::InvalidArgument("one radius per weight".into()));
    }
    let n = weights.len();
    let total: u64 = weights.iter().sum();
    // Cheap pre-filter for the quasi-toric height, which is max |xᵢ'|^{|a|/aᵢ}
    // on reduced tuples.
    let qt_radius: Vec<i64> = weights
        .iter()
        .map(|&a| ((b_max as f64).powf(a as f64 / total as f64) * (1.0 + 1e-9)).floor() as i64)
        .collect();
    // The sign action flips odd-weight coordinates; fix the first one to be ≥ 0.
    let sign_coord = weights.iter().position(|&a| a % 2 == 1);
    let last = (0..n).max_by_key(|&i| (radius[i], i)).expect("n >= 2");
    let outer: Vec<usize> = (0..n).filter(|&i| i != last).collect();
    let lo = |i: usize| if sign_coord == Some(i) { 0 } else { -radius[i] };

    let first = outer[0];
    let rows: Vec<i64> = (lo(first)..=radius[first]).collect();
    let found: Vec<(Vec<i64>, u64)> = rows
        .par_iter()
        .flat_map_iter(|&x0| {
            let mut local: HashMap<Vec<i64>, u64> = HashMap::new();
            let rest = &outer[1..];
            let mut rest_vals: Vec<i64> = rest.iter().map(|&i| lo(i)).collect();
            loop {
                let mut x = vec![0i64; n];
                x[first] = x0;
                for (k, &i) in rest.iter().enumerate() {
                    x[i] = rest_vals[k];
                }
                scan_last(weights, variant, b_max, &mut x, last, lo(last), radius[last], &qt_radius, &mut local);
                let mut advanced = false;
                for (k, &i) in rest.iter().enumerate() {
                    if rest_vals[k] < radius[i] {
                        rest_vals[k] += 1;
                        advanced = true;
                        break;
                    }
                    rest_vals[k] = lo(i);
                }
                if !advanced {
                    break;
                }
            }
            local.into_iter()
        })
        .collect();
    let mut dedup: HashMap<Vec<i64>, u64> = HashMap::new();
    for (k, v) in found {
        dedup.insert(k, v);
    }
    let mut out: Vec<(Vec<i64>, u64)> = dedup.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Inner oracle loop over the last coordinate with the others fixed.
#[allow(clippy::too_many_arguments)]
fn scan_last(
    weights: &[u64],
    variant: HeightVariant,
    b_max: u64,
    x: &mut [i64],
    last: usize,
    lo: i64,
    hi: i64,
    qt_radius: &[i64],
    out: &mut HashMap<Vec<i64>, u64>,
) {
    let n = weights.len();
    // Primes p with p^{aᵢ} | xᵢ on every nonzero fixed coordinate, with the
    // largest admissible exponent k.
    let fixed_gcd = (0..n).filter(|&i| i != last).fold(0u64, |g, i| g.gcd(&x[i].unsigned_abs()));
    let candidates: Vec<(u64, u32)> = if fixed_gcd == 0 {
        Vec::new()
    } else {
        trial_prime_factors(fixed_gcd)
            .into_iter()
            .filter_map(|p| {
                let k = (0..n)
                    .filter(|&i| i != last && x[i] != 0)
                    .map(|i| super::sieve::valuation(x[i] as i128, p) / weights[i] as u32)
                    .min()
                    .expect("nonzero fixed coordinate");
                (k > 0).then_some((p, k))
            })
            .collect()
    };
    let all_fixed_zero = fixed_gcd == 0;
    let a_last = weights[last] as u32;
    for y in lo..=hi {
        if y == 0 && all_fixed_zero {
            continue;
        }
        x[last] = y;
        let mut lambda_pows: Vec<(u64, u32)> = Vec::new();
        if all_fixed_zero {
            for p in trial_prime_factors(y.unsigned_abs()) {
                let k = super::sieve::valuation(y as i128, p) / a_last;
                if k > 0 {
                    lambda_pows.push((p, k));
                }
            }
        } else if y == 0 {
            lambda_pows.extend(candidates.iter().copied());
        } else {
            for &(p, kmax) in &candidates {
                let step = (p as i64).pow(a_last);
                let mut k = 0;
                let mut v = y;
                while k < kmax && v % step == 0 {
                    v /= step;
                    k += 1;
                }
                if k > 0 {
                    lambda_pows.push((p, k));
                }
            }
        }
        let quick = variant == HeightVariant::QuasiToric
            && (0..n).any(|i| {
                let mut v = x[i].unsigned_abs();
                if v == 0 {
                    return false;
                }
                for &(p, k) in &lambda_pows {
                    v /= p.pow(k * weights[i] as u32);
                }
                v > qt_radius[i] as u64
            });
        if quick {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|&i| x[i] != 0).collect();
        if excluded_support(weights, &support, variant) {
            continue;
        }
        let canon = canonical_form(weights, x).expect("nonzero tuple");
        if out.contains_key(&canon) {
            continue;
        }
        let h = wps_height(weights, &canon, variant).expect("nonzero tuple");
        if h.le(b_max) {
            out.insert(canon, h.ceil());
        }
    }
}

/// `N(B)` at each sample from the oracle's ceiling heights.
pub fn oracle_counts(points: &[(Vec<i64>, u64)], samples: &[u64]) -> Vec<(u64, u64)> {
    let mut heights: Vec<u64> = points.iter().map(|(_, h)| *h).collect();
    heights.sort_unstable();
    normalized_samples(samples)
        .into_iter()
        .map(|b| (b, heights.partition_point(|&h| h <= b) as u64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(w: &[u64], v: HeightVariant, bs: &[u64]) -> Vec<(u64, u64)> {
        wps_count(w, v, bs, &Budget::default()).unwrap().samples
    }

    #[test]
    fn p23_small_bound() {
        // Height ≤ 1: (1:±1), (±1:0), (0:1).
        assert_eq!(counts(&[2, 3], HeightVariant::QuasiToric, &[1]), vec![(1, 5)]);
    }

    #[test]
    fn agrees_with_oracle() {
        let bs: Vec<u64> = (1..=60).collect();
        for (w, v) in [
            (vec![2u64, 3], HeightVariant::QuasiToric),
            (vec![1, 1, 2], HeightVariant::Stable),
            (vec![1, 1, 2], HeightVariant::QuasiToric),
            (vec![1, 2], HeightVariant::Stable),
            (vec![1, 2], HeightVariant::QuasiToric),
            (vec![1, 1], HeightVariant::Stable),
            (vec![1, 2, 3], HeightVariant::QuasiToric),
        ] {
            let oracle = wps_oracle(&w, v, 60).unwrap();
            assert_eq!(counts(&w, v, &bs), oracle_counts(&oracle, &bs), "{w:?} {v}");
        }
    }

    #[test]
    fn non_reduced_weights() {
        let bs: Vec<u64> = (1..=12).collect();
        let oracle = wps_oracle(&[4, 6], HeightVariant::QuasiToric, 12).unwrap();
        assert_eq!(counts(&[4, 6], HeightVariant::QuasiToric, &bs), oracle_counts(&oracle, &bs));
    }

    #[test]
    fn p112_stable_box_is_large_enough() {
        let b = 40u64;
        let small = wps_oracle(&[1, 1, 2], HeightVariant::Stable, b).unwrap();
        let r = b as i64;
        let large = wps_oracle_in_box(&[1, 1, 2], HeightVariant::Stable, b, &[r, r, r * r]).unwrap();
        assert_eq!(small, large);
    }

    #[test]
    fn stable_p23_needs_a_larger_box() {
        // |x| ≤ B^{14/5}, |y| ≤ B^{18/5} bounds every reduced point of stable height ≤ B.
        let b = 12u64;
        let radius = [(b as f64).powf(2.8) as i64 + 1, (b as f64).powf(3.6) as i64 + 1];
        let oracle = wps_oracle_in_box(&[2, 3], HeightVariant::Stable, b, &radius).unwrap();
        let bs: Vec<u64> = (1..=b).collect();
        assert_eq!(counts(&[2, 3], HeightVariant::Stable, &bs), oracle_counts(&oracle, &bs));
    }

    #[test]
    fn projective_line_classic() {
        // P¹ with the anticanonical height max(|x|,|y|)^2: coprime pairs up to sign.
        let bs = [100u64];
        let n = counts(&[1, 1], HeightVariant::Stable, &bs)[0].1;
        let brute = (-10i64..=10)
            .flat_map(|x| (0i64..=10).map(move |y| (x, y)))
            .filter(|&(x, y)| (y > 0 || x > 0) && x.gcd(&y) == 1)
            .count() as u64;
        assert_eq!(n, brute);
    }

    #[test]
    fn rejects_unsupported() {
        let b = Budget::default();
        assert!(wps_count(&[2, 4], HeightVariant::Stable, &[10], &b).is_err());
        assert!(wps_count(&[1, 7], HeightVariant::QuasiToric, &[10], &b).is_err());
        assert!(wps_count(&[1, 1, 1, 1], HeightVariant::QuasiToric, &[10], &b).is_err());
        let tiny = Budget { max_work: 10, ..Budget::default() };
        assert!(matches!(
            wps_count(&[1, 1, 2], HeightVariant::Stable, &[100_000], &tiny),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn monotone() {
        let bs: Vec<u64> = (1..200).step_by(7).collect();
        let s = wps_count(&[1, 1, 2], HeightVariant::Stable, &bs, &Budget::default()).unwrap();
        assert!(s.is_monotone());
    }
}
