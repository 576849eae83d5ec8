//! Stack descriptors, their sectors with exact ages, and raising functions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::galois::{f_conjugacy_classes, FConjClass, FieldDescriptor};
use crate::group::FiniteGroup;
use crate::perm::{index, parse_permutation, GroupElement};
use crate::Q;

/// The supported stack families.
#[derive(Clone, Debug, PartialEq)]
pub enum StackDescriptor {
    /// Classifying stack of a constant permutation group; the action degree is
    /// the group's degree.
    BG {
        group: FiniteGroup,
        field: FieldDescriptor,
    },
    /// `Bμ_l`.
    Mu(u64),
    /// Weighted projective stack `P(a₀,…,aₙ)`.
    Wps(Vec<u64>),
    Product(Vec<StackDescriptor>),
}

/// Sector labels. Ordering is the serialization order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectorLabel {
    /// F-conjugacy class, named by its smallest member.
    Class(GroupElement),
    /// `j ∈ Z/lZ`, printed as `j/l`.
    Residue { j: u64, l: u64 },
    /// `r ∈ I = (∪ (1/aᵢ)Z) ∩ [0,1)`.
    Fraction(Q),
    Tuple(Vec<SectorLabel>),
}

impl SectorLabel {
    pub fn is_untwisted(&self) -> bool {
        match self {
            SectorLabel::Class(g) => g.is_identity(),
            SectorLabel::Residue { j, .. } => *j == 0,
            SectorLabel::Fraction(r) => r.is_zero(),
            SectorLabel::Tuple(v) => v.iter().all(SectorLabel::is_untwisted),
        }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorLabel::Class(g) => write!(f, "{g}"),
            SectorLabel::Residue { j, l } => write!(f, "{}", Q::new(*j as i64, *l as i64)),
            SectorLabel::Fraction(r) => write!(f, "{r}"),
            SectorLabel::Tuple(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub label: SectorLabel,
    pub age: Q,
    pub is_twisted: bool,
}

impl StackDescriptor {
    pub fn bg(group: FiniteGroup, field: FieldDescriptor) -> Self {
        StackDescriptor::BG { group, field }
    }

    pub fn dim(&self) -> usize {
        match self {
            StackDescriptor::BG { .. } | StackDescriptor::Mu(_) => 0,
            StackDescriptor::Wps(a) => a.len().saturating_sub(1),
            StackDescriptor::Product(fs) => fs.iter().map(StackDescriptor::dim).sum(),
        }
    }

    /// Picard number. A single-weight `P(a₀) = Bμ_{a₀}` is zero-dimensional
    /// and has `ρ = 0`.
    pub fn rho(&self) -> usize {
        match self {
            StackDescriptor::BG { .. } | StackDescriptor::Mu(_) => 0,
            StackDescriptor::Wps(a) => usize::from(a.len() >= 2),
            StackDescriptor::Product(fs) => fs.iter().map(StackDescriptor::rho).sum(),
        }
    }

    /// Structural checks: positive parameters, and at most one product factor
    /// with a nontrivial Galois action on its geometric sectors (otherwise the
    /// sectors of the product are not the product of the factors' sectors).
    pub fn validate(&self) -> Result<()> {
        match self {
            StackDescriptor::BG { group, field } => {
                field.unit_group(group.exponent())?;
                Ok(())
            }
            StackDescriptor::Mu(l) if *l == 0 => {
                Err(Error::InvalidArgument("mu(l) needs l >= 1".into()))
            }
            StackDescriptor::Mu(_) => Ok(()),
            StackDescriptor::Wps(a) => {
                if a.is_empty() {
                    return Err(Error::InvalidArgument("wps needs at least one weight".into()));
                }
                if a.iter().any(|&w| w == 0) {
                    return Err(Error::InvalidArgument("weights must be positive".into()));
                }
                Ok(())
            }
            StackDescriptor::Product(fs) => {
                if fs.is_empty() {
                    return Err(Error::InvalidArgument("empty product".into()));
                }
                let mut galois_nontrivial = 0;
                for f in fs {
                    f.validate()?;
                    galois_nontrivial += f.nontrivial_galois_factors()?;
                }
                if galois_nontrivial > 1 {
                    return Err(Error::Unsupported(
                        "product with more than one factor carrying a nontrivial Galois action on sectors"
                            .into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn nontrivial_galois_factors(&self) -> Result<usize> {
        Ok(match self {
            StackDescriptor::BG { group, field } => {
                let f = f_conjugacy_classes(group, field)?;
                usize::from(f.len() != group.conjugacy_classes().len())
            }
            StackDescriptor::Product(fs) => {
                let mut n = 0;
                for f in fs {
                    n += f.nontrivial_galois_factors()?;
                }
                n
            }
            _ => 0,
        })
    }

    /// F-conjugacy classes of a `BG` descriptor.
    pub fn classes(&self) -> Result<Vec<FConjClass>> {
        match self {
            StackDescriptor::BG { group, field } => f_conjugacy_classes(group, field),
            _ => Err(Error::Unsupported("not a BG descriptor".into())),
        }
    }

    /// All sectors, non-twisted first.
    pub fn sectors(&self) -> Result<Vec<Sector>> {
        self.validate()?;
        self.sectors_unchecked()
    }

    fn sectors_unchecked(&self) -> Result<Vec<Sector>> {
        Ok(match self {
            StackDescriptor::BG { .. } => self
                .classes()?
                .into_iter()
                .map(|c| Sector {
                    is_twisted: !c.is_identity(),
                    label: SectorLabel::Class(c.representative),
                    age: Q::zero(),
                })
                .collect(),
            StackDescriptor::Mu(l) => (0..*l)
                .map(|j| Sector {
                    label: SectorLabel::Residue { j, l: *l },
                    age: Q::zero(),
                    is_twisted: j != 0,
                })
                .collect(),
            StackDescriptor::Wps(a) => wps_index_set(a)
                .into_iter()
                .map(|r| Sector {
                    age: wps_age(a, r),
                    is_twisted: !r.is_zero(),
                    label: SectorLabel::Fraction(r),
                })
                .collect(),
            StackDescriptor::Product(fs) => {
                let mut acc: Vec<(Vec<SectorLabel>, Q)> = vec![(Vec::new(), Q::zero())];
                for f in fs {
                    let secs = f.sectors_unchecked()?;
                    let mut next = Vec::with_capacity(acc.len() * secs.len());
                    for (labels, age) in &acc {
                        for s in &secs {
                            let mut l = labels.clone();
                            l.push(s.label.clone());
                            next.push((l, *age + s.age));
                        }
                    }
                    acc = next;
                }
                acc.into_iter()
                    .map(|(labels, age)| {
                        let label = SectorLabel::Tuple(labels);
                        Sector {
                            is_twisted: !label.is_untwisted(),
                            label,
                            age,
                        }
                    })
                    .collect()
            }
        })
    }

    /// Resolves a textual label (as printed, or any accepted alias) to a sector label.
    ///
    /// Aliases: any member of a BG class; an integer residue `j` for `mu(l)`.
    pub fn resolve_label(&self, key: &str) -> Result<SectorLabel> {
        let key: String = key.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Raising(format!("'{key}' is not a sector label of {self}"));
        match self {
            StackDescriptor::BG { group, .. } => {
                let g = parse_permutation(&key, group.degree()).map_err(|_| bad())?;
                self.classes()?
                    .into_iter()
                    .find(|c| c.contains(&g))
                    .map(|c| SectorLabel::Class(c.representative))
                    .ok_or_else(bad)
            }
            StackDescriptor::Mu(l) => {
                let r = parse_rational(&key).map_err(|_| bad())?;
                let l_q = Q::from_integer(*l as i64);
                let j = if r.is_integer() && !r.is_negative() && r < l_q {
                    *r.numer()
                } else if !r.is_negative() && r < Q::one() && (r * l_q).is_integer() {
                    (r * l_q).to_integer()
                } else {
                    return Err(bad());
                };
                Ok(SectorLabel::Residue { j: j as u64, l: *l })
            }
            StackDescriptor::Wps(a) => {
                let r = parse_rational(&key).map_err(|_| bad())?;
                if wps_index_set(a).contains(&r) {
                    Ok(SectorLabel::Fraction(r))
                } else {
                    Err(bad())
                }
            }
            StackDescriptor::Product(fs) => {
                let inner = key
                    .strip_prefix('(')
                    .and_then(|k| k.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let parts = split_top_level(inner);
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                let labels = fs
                    .iter()
                    .zip(parts)
                    .map(|(f, p)| f.resolve_label(p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SectorLabel::Tuple(labels))
            }
        }
    }
}

/// Splits on commas not nested inside parentheses or brackets.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("'{s}' is not a rational number"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    // Keeps later sums and products of ages well inside i64.
    const LIMIT: i64 = 1_000_000_000;
    if d == 0 || n.unsigned_abs() > LIMIT as u64 || d.unsigned_abs() > LIMIT as u64 {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

impl fmt::Display for StackDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackDescriptor::BG { group, field } => {
                let gens: Vec<String> = group.generators().iter().map(ToString::to_string).collect();
                write!(
                    f,
                    "bg(degree={}; gens={}; field={field})",
                    group.degree(),
                    gens.join("|")
                )
            }
            StackDescriptor::Mu(l) => write!(f, "mu({l})"),
            StackDescriptor::Wps(a) => {
                let w: Vec<String> = a.iter().map(u64::to_string).collect();
                write!(f, "wps({})", w.join(","))
            }
            StackDescriptor::Product(fs) => {
                let p: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "prod({})", p.join(","))
            }
        }
    }
}

/// `I = (∪ᵢ (1/aᵢ)Z) ∩ [0,1)`, sorted.
pub fn wps_index_set(weights: &[u64]) -> Vec<Q> {
    let mut set: Vec<Q> = weights
        .iter()
        .flat_map(|&a| (0..a).map(move |k| Q::new(k as i64, a as i64)))
        .collect();
    set.sort();
    set.dedup();
    set
}

fn frac(x: Q) -> Q {
    x - x.floor()
}

/// `age(Y_r) = Σⱼ {−aⱼ r}`.
pub fn wps_age(weights: &[u64], r: Q) -> Q {
    weights
        .iter()
        .map(|&a| frac(-Q::from_integer(a as i64) * r))
        .sum()
}

/// A raising function: a value on every sector, zero on the non-twisted one.
#[derive(Clone, Debug, PartialEq)]
pub struct RaisingFunction {
    values: BTreeMap<SectorLabel, Q>,
}

impl RaisingFunction {
    /// Validates totality on `stack`, nonnegativity, and vanishing on the
    /// non-twisted sector. A missing non-twisted entry is filled with 0.
    pub fn for_stack(stack: &StackDescriptor, mut values: BTreeMap<SectorLabel, Q>) -> Result<Self> {
        let sectors = stack.sectors()?;
        for s in &sectors {
            match values.get(&s.label) {
                None if !s.is_twisted => {
                    values.insert(s.label.clone(), Q::zero());
                }
                None => return Err(Error::Raising(format!("no value on sector {}", s.label))),
                Some(v) if v.is_negative() => {
                    return Err(Error::Raising(format!("negative value on sector {}", s.label)))
                }
                Some(v) if !s.is_twisted && !v.is_zero() => {
                    return Err(Error::Raising("nonzero value on the non-twisted sector".into()))
                }
                Some(_) => {}
            }
        }
        if values.len() != sectors.len() {
            let extra = values
                .keys()
                .find(|k| !sectors.iter().any(|s| &s.label == *k))
                .map(ToString::to_string)
                .unwrap_or_default();
            return Err(Error::Raising(format!("label {extra} is not a sector")));
        }
        Ok(RaisingFunction { values })
    }

    pub fn zero(stack: &StackDescriptor) -> Result<Self> {
        Self::constant(stack, Q::zero())
    }

    /// Value `v` on every twisted sector.
    pub fn constant(stack: &StackDescriptor, v: Q) -> Result<Self> {
        let values = stack
            .sectors()?
            .into_iter()
            .map(|s| (s.label, if s.is_twisted { v } else { Q::zero() }))
            .collect();
        Self::for_stack(stack, values)
    }

    /// `c(Y_r) = r·|a|` on `P(a)`.
    pub fn quasi_toric(weights: &[u64]) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        let stack = StackDescriptor::Wps(weights.to_vec());
        let values = wps_index_set(weights)
            .into_iter()
            .map(|r| (SectorLabel::Fraction(r), r * Q::from_integer(total as i64)))
            .collect();
        Self::for_stack(&stack, values)
    }

    /// `[g] ↦ ind(g)` on a `BG` descriptor.
    pub fn index(stack: &StackDescriptor) -> Result<Self> {
        let classes = stack.classes()?;
        let mut values = BTreeMap::new();
        for c in classes {
            let v = index(&c.representative);
            debug_assert!(c.members.iter().all(|g| index(g) == v));
            values.insert(SectorLabel::Class(c.representative), Q::from_integer(v as i64));
        }
        Self::for_stack(stack, values)
    }

    /// Table for `mu(l)`: `values[j-1] = c(j)` for `j = 1..l-1`.
    pub fn mu_table(l: u64, values: &[Q]) -> Result<Self> {
        if values.len() as u64 != l.saturating_sub(1) {
            return Err(Error::Raising(format!(
                "mu({l}) needs {} values, got {}",
                l.saturating_sub(1),
                values.len()
            )));
        }
        let mut map = BTreeMap::new();
        for (k, v) in values.iter().enumerate() {
            map.insert(SectorLabel::Residue { j: k as u64 + 1, l }, *v);
        }
        Self::for_stack(&StackDescriptor::Mu(l), map)
    }

    /// `(c₁ ⊞ … ⊞ c_k)(y₁,…,y_k) = Σ cᵢ(yᵢ)` on the product of the factors.
    pub fn boxplus(factors: &[RaisingFunction]) -> RaisingFunction {
        let mut acc: Vec<(Vec<SectorLabel>, Q)> = vec![(Vec::new(), Q::zero())];
        for c in factors {
            let mut next = Vec::with_capacity(acc.len() * c.values.len());
            for (labels, v) in &acc {
                for (l, w) in &c.values {
                    let mut ls = labels.clone();
                    ls.push(l.clone());
                    next.push((ls, *v + *w));
                }
            }
            acc = next;
        }
        RaisingFunction {
            values: acc
                .into_iter()
                .map(|(l, v)| (SectorLabel::Tuple(l), v))
                .collect(),
        }
    }

    /// `boxplus` checked against a product descriptor.
    pub fn boxplus_on(stack: &StackDescriptor, factors: &[RaisingFunction]) -> Result<Self> {
        let StackDescriptor::Product(fs) = stack else {
            return Err(Error::Raising("boxplus needs a product stack".into()));
        };
        if fs.len() != factors.len() {
            return Err(Error::Raising(format!(
                "factor mismatch: {} factors, {} raising functions",
                fs.len(),
                factors.len()
            )));
        }
        for (f, c) in fs.iter().zip(factors) {
            c.check_on(f)?;
        }
        Self::for_stack(stack, Self::boxplus(factors).values)
    }

    /// Fails unless defined on exactly the sectors of `stack`.
    pub fn check_on(&self, stack: &StackDescriptor) -> Result<()> {
        let sectors = stack.sectors()?;
        if sectors.len() != self.values.len()
            || sectors.iter().any(|s| !self.values.contains_key(&s.label))
        {
            return Err(Error::Raising(format!("not a raising function on {stack}")));
        }
        Ok(())
    }

    pub fn get(&self, label: &SectorLabel) -> Option<Q> {
        self.values.get(label).copied()
    }

    pub fn values(&self) -> &BTreeMap<SectorLabel, Q> {
        &self.values
    }

    pub fn scaled(&self, r: Q) -> RaisingFunction {
        RaisingFunction {
            values: self.values.iter().map(|(k, v)| (k.clone(), *v * r)).collect(),
        }
    }
}

/// `age_c = age + c`, in sector order.
pub fn age_c(stack: &StackDescriptor, c: &RaisingFunction) -> Result<Vec<(Sector, Q)>> {
    stack
        .sectors()?
        .into_iter()
        .map(|s| {
            let v = c
                .get(&s.label)
                .ok_or_else(|| Error::Raising(format!("no value on sector {}", s.label)))?;
            let a = s.age + v;
            Ok((s, a))
        })
        .collect()
}

/// Number of twisted sectors with `age_c = 1` exactly.
pub fn junior_count(stack: &StackDescriptor, c: &RaisingFunction) -> Result<usize> {
    Ok(age_c(stack, c)?
        .iter()
        .filter(|(s, a)| s.is_twisted && *a == Q::one())
        .count())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adequacy {
    pub adequate: bool,
    pub reason: String,
}

/// Adequacy of `(ω⁻¹, c)` on a Fano stack: `age_c ≥ 1` on twisted sectors,
/// and `min c = 1` over twisted sectors in dimension zero.
///
/// Every descriptor family here is Fano: zero-dimensional stacks, weighted
/// projective stacks, and their products.
pub fn is_adequate(stack: &StackDescriptor, c: &RaisingFunction) -> Result<Adequacy> {
    let rows = age_c(stack, c)?;
    if let Some((s, a)) = rows.iter().find(|(s, a)| s.is_twisted && *a < Q::one()) {
        return Ok(Adequacy {
            adequate: false,
            reason: format!("age_c({}) = {a} < 1", s.label),
        });
    }
    if stack.dim() == 0 {
        let min = rows
            .iter()
            .filter(|(s, _)| s.is_twisted)
            .map(|(s, _)| c.get(&s.label).unwrap_or_default())
            .min();
        match min {
            None => {
                return Ok(Adequacy {
                    adequate: false,
                    reason: "no twisted sector".into(),
                })
            }
            Some(m) if m != Q::one() => {
                return Ok(Adequacy {
                    adequate: false,
                    reason: format!("minimum of c over twisted sectors is {m}, not 1"),
                })
            }
            _ => {}
        }
    }
    Ok(Adequacy {
        adequate: true,
        reason: "age_c >= 1 on every twisted sector".into(),
    })
}
