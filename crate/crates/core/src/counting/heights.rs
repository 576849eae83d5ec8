//! Heights with exact prime exponents, residues of local points, and
//! canonical representatives of weighted projective points.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::sieve::{trial_prime_factors, valuation};
use crate::error::{Error, Result};
use crate::sector::{RaisingFunction, SectorLabel};
use crate::Q;

/// `H = (max_t b_t^{e_t}) · Π_p p^{e_p}`: an archimedean part given as a
/// maximum of rational powers, and exact finite exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalHeight {
    pub finite_part: BTreeMap<u64, Q>,
    archimedean: Vec<(u64, Q)>,
}

impl FormalHeight {
    /// `archimedean` lists the candidates `(b, e)` whose maximum `b^e` is the
    /// archimedean factor; an empty list means 1.
    pub fn new(finite_part: BTreeMap<u64, Q>, archimedean: Vec<(u64, Q)>) -> Self {
        let finite_part = finite_part.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        FormalHeight {
            finite_part,
            archimedean,
        }
    }

    pub fn archimedean_terms(&self) -> &[(u64, Q)] {
        &self.archimedean
    }

    pub fn archimedean_part(&self) -> f64 {
        self.ln_archimedean().exp()
    }

    fn ln_archimedean(&self) -> f64 {
        self.archimedean
            .iter()
            .map(|&(b, e)| ratio_f64(e) * (b as f64).ln())
            .fold(0.0f64, f64::max)
    }

    pub fn ln_value(&self) -> f64 {
        self.ln_archimedean()
            + self
                .finite_part
                .iter()
                .map(|(&p, &e)| ratio_f64(e) * (p as f64).ln())
                .sum::<f64>()
    }

    pub fn value(&self) -> f64 {
        self.ln_value().exp()
    }

    /// Exact test `H ≤ bound`; floating point decides unless within 1e-9 of a tie.
    pub fn le(&self, bound: u64) -> bool {
        if bound == 0 {
            return false;
        }
        let diff = self.ln_value() - (bound as f64).ln();
        if diff < -1e-9 {
            return true;
        }
        if diff > 1e-9 {
            return false;
        }
        self.le_exact(bound)
    }

    fn le_exact(&self, bound: u64) -> bool {
        let d = self
            .finite_part
            .values()
            .chain(self.archimedean.iter().map(|(_, e)| e))
            .fold(1i64, |acc, e| acc.lcm(e.denom()));
        let mut num = BigUint::one();
        let mut den = BigUint::from(bound).pow(d as u32);
        for (&p, &e) in &self.finite_part {
            let k = (e * Q::from_integer(d)).to_integer();
            let pk = BigUint::from(p).pow(k.unsigned_abs() as u32);
            if k > 0 {
                num *= pk;
            } else {
                den *= pk;
            }
        }
        let terms: Vec<(u64, Q)> = if self.archimedean.is_empty() {
            vec![(1, Q::zero())]
        } else {
            self.archimedean.clone()
        };
        terms.iter().all(|&(b, e)| {
            let k = (e * Q::from_integer(d)).to_integer();
            debug_assert!(k >= 0);
            BigUint::from(b).pow(k as u32) * &num <= den
        })
    }

    /// Smallest integer `B ≥ 0` with `H ≤ B`.
    pub fn ceil(&self) -> u64 {
        let guess = self.value().ceil().max(0.0) as u64;
        let mut b = guess.saturating_sub(2);
        while !self.le(b) {
            b += 1;
        }
        b
    }
}

impl fmt::Display for FormalHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arch: Vec<String> = self
            .archimedean
            .iter()
            .map(|(b, e)| format!("{b}^({e})"))
            .collect();
        write!(f, "max({})", arch.join(","))?;
        for (p, e) in &self.finite_part {
            write!(f, "*{p}^({e})")?;
        }
        Ok(())
    }
}

pub(crate) fn ratio_f64(r: Q) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `ord_p(a) mod l`: the sector of `Z/lZ` hit by the Kummer class of `a` at `p`.
pub fn mu_residue(a: i64, p: u64, l: u64) -> Result<u64> {
    if a == 0 {
        return Err(Error::InvalidArgument("residue of 0 is undefined".into()));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("l must be positive".into()));
    }
    Ok(valuation(a as i128, p) as u64 % l)
}

/// `Π_{p | a} p^{c(ord_p(a) mod l)}`, archimedean part 1.
pub fn mu_height(a: i64, l: u64, c: &RaisingFunction) -> Result<FormalHeight> {
    if a == 0 {
        return Err(Error::InvalidArgument("height of 0 is undefined".into()));
    }
    let mut finite = BTreeMap::new();
    for p in trial_prime_factors(a.unsigned_abs()) {
        let j = mu_residue(a, p, l)?;
        if j == 0 {
            continue;
        }
        let v = c
            .get(&SectorLabel::Residue { j, l })
            .ok_or_else(|| Error::Raising(format!("no value on sector {j} of mu({l})")))?;
        finite.insert(p, v);
    }
    Ok(FormalHeight::new(finite, Vec::new()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightVariant {
    /// The raised height `H_{ω⁻¹, c}` with `c(r) = r·|a|`.
    QuasiToric,
    /// The height of `ω⁻¹` through the coarse space, without raising.
    Stable,
}

impl fmt::Display for HeightVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeightVariant::QuasiToric => "quasi_toric",
            HeightVariant::Stable => "stable",
        })
    }
}

impl std::str::FromStr for HeightVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quasi_toric" | "quasitoric" | "qt" => Ok(HeightVariant::QuasiToric),
            "stable" => Ok(HeightVariant::Stable),
            _ => Err(Error::InvalidArgument(format!("unknown height variant '{s}'"))),
        }
    }
}

fn check_tuple(weights: &[u64], x: &[i64]) -> Result<()> {
    if weights.len() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "{} coordinates for {} weights",
            x.len(),
            weights.len()
        )));
    }
    if weights.contains(&0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    if x.iter().all(|&v| v == 0) {
        return Err(Error::InvalidArgument("the zero tuple is not a point".into()));
    }
    Ok(())
}

/// `minᵢ ord_p(xᵢ)/aᵢ` over nonzero coordinates.
fn min_ratio(weights: &[u64], x: &[i64], p: u64) -> Q {
    weights
        .iter()
        .zip(x)
        .filter(|(_, &v)| v != 0)
        .map(|(&a, &v)| Q::new(valuation(v as i128, p) as i64, a as i64))
        .min()
        .expect("nonzero tuple")
}

/// `r = minᵢ ord_p(xᵢ)/aᵢ ∈ I` for a `p`-reduced tuple.
pub fn wps_residue(weights: &[u64], x: &[i64], p: u64) -> Result<Q> {
    check_tuple(weights, x)?;
    let r = min_ratio(weights, x, p);
    if r >= Q::one() {
        return Err(Error::InvalidArgument(format!("tuple is not {p}-reduced")));
    }
    Ok(r)
}

fn gcd_nonzero(x: &[i64]) -> u64 {
    x.iter().fold(0u64, |g, &v| g.gcd(&v.unsigned_abs()))
}

/// Divides out every `λ` with `λ^{aᵢ} | xᵢ` for all `i`; signs are kept.
pub fn reduce(weights: &[u64], x: &[i64]) -> Result<Vec<i64>> {
    check_tuple(weights, x)?;
    let mut out = x.to_vec();
    for p in trial_prime_factors(gcd_nonzero(x)) {
        let k = min_ratio(weights, &out, p).floor().to_integer();
        if k > 0 {
            for (v, &a) in out.iter_mut().zip(weights) {
                *v /= (p as i64).pow((k as u64 * a) as u32);
            }
        }
    }
    Ok(out)
}

/// Reduced representative whose first nonzero odd-weight coordinate is positive.
pub fn canonical_form(weights: &[u64], x: &[i64]) -> Result<Vec<i64>> {
    let mut out = reduce(weights, x)?;
    let flip = weights
        .iter()
        .zip(&out)
        .find(|(&a, &v)| a % 2 == 1 && v != 0)
        .is_some_and(|(_, &v)| v < 0);
    if flip {
        for (v, &a) in out.iter_mut().zip(weights) {
            if a % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

/// Height of the point `x` of `P(a)`.
///
/// On a reduced representative the stable height is
/// `maxᵢ |xᵢ|^{|a|/aᵢ} · Π_p p^{−|a| r_p}` (the product formula over all
/// places) and the quasi-toric height multiplies it by `Π_p p^{c(r_p)}`,
/// `c(r) = r·|a|`, leaving `maxᵢ |xᵢ|^{|a|/aᵢ}`.
pub fn wps_height(weights: &[u64], x: &[i64], variant: HeightVariant) -> Result<FormalHeight> {
    let y = reduce(weights, x)?;
    let total = Q::from_integer(weights.iter().sum::<u64>() as i64);
    let archimedean = weights
        .iter()
        .zip(&y)
        .filter(|(_, &v)| v != 0)
        .map(|(&a, &v)| (v.unsigned_abs(), total / Q::from_integer(a as i64)))
        .collect();
    let mut finite = BTreeMap::new();
    if variant == HeightVariant::Stable {
        for p in trial_prime_factors(gcd_nonzero(&y)) {
            let r = min_ratio(weights, &y, p);
            if r.is_positive() {
                finite.insert(p, -total * r);
            }
        }
    }
    Ok(FormalHeight::new(finite, archimedean))
}
