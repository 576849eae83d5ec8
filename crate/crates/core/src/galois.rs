//! Cyclotomic Galois action on sectors of classifying stacks.
//!
//! A base field is described only through the image `U ⊆ (Z/eZ)^*` of its
//! absolute Galois group in the cyclotomic character. `u ∈ U` acts on group
//! elements by `g ↦ g^u`; combined with conjugation this yields the
//! F-conjugacy classes, which label the sectors of `BG`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::perm::GroupElement;

/// Image of the absolute Galois group in `(Z/eZ)^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldDescriptor {
    /// `Q`: the full unit group, for every modulus.
    Rationals,
    /// A field containing all relevant roots of unity: `U = {1}`.
    Split,
    /// `U = ⟨generators⟩ ⊆ (Z/modulus Z)^*`.
    Units { modulus: u64, generators: Vec<u64> },
}

impl FieldDescriptor {
    pub fn units(modulus: u64, generators: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Field("modulus must be positive".into()));
        }
        for &g in &generators {
            if g.gcd(&modulus) != 1 {
                return Err(Error::Field(format!("{g} is not a unit mod {modulus}")));
            }
        }
        Ok(FieldDescriptor::Units {
            modulus,
            generators: generators.into_iter().map(|g| g % modulus).collect(),
        })
    }

    /// `U` reduced to modulus `e`, as a sorted list of residues.
    ///
    /// Fails when an explicit modulus is not a multiple of `e`.
    pub fn unit_group(&self, e: u64) -> Result<Vec<u64>> {
        if e == 0 {
            return Err(Error::Field("modulus must be positive".into()));
        }
        let gens: Vec<u64> = match self {
            FieldDescriptor::Rationals => return Ok(full_unit_group(e)),
            FieldDescriptor::Split => Vec::new(),
            FieldDescriptor::Units {
                modulus,
                generators,
            } => {
                if modulus % e != 0 {
                    return Err(Error::Field(format!(
                        "modulus {modulus} is not a multiple of the exponent {e}"
                    )));
                }
                generators.iter().map(|g| g % e).collect()
            }
        };
        Ok(generated_units(e, &gens))
    }

    pub fn is_split(&self) -> bool {
        match self {
            FieldDescriptor::Split => true,
            FieldDescriptor::Rationals => false,
            FieldDescriptor::Units { generators, modulus } => {
                generators.iter().all(|&g| g % modulus == 1 % modulus)
            }
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Rationals => write!(f, "Q"),
            FieldDescriptor::Split => write!(f, "split"),
            FieldDescriptor::Units {
                modulus,
                generators,
            } => {
                let g: Vec<String> = generators.iter().map(u64::to_string).collect();
                write!(f, "U({modulus}; {})", g.join(","))
            }
        }
    }
}

/// `(Z/eZ)^*` in increasing order.
pub fn full_unit_group(e: u64) -> Vec<u64> {
    if e == 1 {
        return vec![0];
    }
    (1..e).filter(|u| u.gcd(&e) == 1).collect()
}

fn generated_units(e: u64, gens: &[u64]) -> Vec<u64> {
    let one = 1 % e;
    let mut set = BTreeSet::from([one]);
    let mut frontier = vec![one];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = (x * g) % e;
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set.into_iter().collect()
}

/// An F-conjugacy class: orbit under conjugation and `g ↦ g^u`, `u ∈ U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FConjClass {
    pub representative: GroupElement,
    pub members: Vec<GroupElement>,
}

impl FConjClass {
    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.binary_search(g).is_ok()
    }

    pub fn is_identity(&self) -> bool {
        self.representative.is_identity()
    }
}

/// F-conjugacy classes of a constant group, ordered by smallest member.
pub fn f_conjugacy_classes(group: &FiniteGroup, field: &FieldDescriptor) -> Result<Vec<FConjClass>> {
    let units = field.unit_group(group.exponent())?;
    let powers: Vec<u64> = units.into_iter().filter(|&u| u > 1).collect();
    Ok(group
        .partition_by(|g| powers.iter().map(|&u| g.pow(u)).collect())
        .into_iter()
        .map(|members| FConjClass {
            representative: members[0].clone(),
            members,
        })
        .collect())
}

/// An automorphism of order dividing two, realized as conjugation by a
/// permutation normalizing the group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    conjugator: GroupElement,
}

impl Involution {
    pub fn identity(degree: usize) -> Self {
        Involution {
            conjugator: GroupElement::identity(degree),
        }
    }

    /// `φ(g) = t g t⁻¹`; requires `t` to normalize `group` with `t²` centralizing it.
    pub fn by_conjugation(group: &FiniteGroup, t: GroupElement) -> Result<Self> {
        if t.degree() != group.degree() {
            return Err(Error::Twist("conjugator degree mismatch".into()));
        }
        for g in group.generators() {
            let img = g.conjugate_by(&t);
            if !group.contains(&img) {
                return Err(Error::Twist(format!("{t} does not normalize the group")));
            }
            if img.conjugate_by(&t) != *g {
                return Err(Error::Twist(format!("conjugation by {t} is not an involution")));
            }
        }
        Ok(Involution { conjugator: t })
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        g.conjugate_by(&self.conjugator)
    }

    pub fn conjugator(&self) -> &GroupElement {
        &self.conjugator
    }
}

/// A character `(Z/eZ)^* → {±1}` stored as the set of units it sends to −1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCharacter {
    modulus: u64,
    negative: BTreeSet<u64>,
}

impl SignCharacter {
    /// Validates the homomorphism property.
    pub fn new(modulus: u64, negative: impl IntoIterator<Item = u64>) -> Result<Self> {
        let negative: BTreeSet<u64> = negative.into_iter().map(|u| u % modulus).collect();
        let units = full_unit_group(modulus);
        for &u in &negative {
            if u.gcd(&modulus) != 1 {
                return Err(Error::Twist(format!("{u} is not a unit mod {modulus}")));
            }
        }
        let sign = |u: u64| negative.contains(&u);
        for &a in &units {
            for &b in &units {
                if sign((a * b) % modulus) != (sign(a) ^ sign(b)) {
                    return Err(Error::Twist("sign table is not a homomorphism".into()));
                }
            }
        }
        Ok(SignCharacter { modulus, negative })
    }

    /// Legendre symbol modulo an odd prime.
    pub fn legendre(p: u64) -> Result<Self> {
        if p < 3 || !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            return Err(Error::Twist(format!("{p} is not an odd prime")));
        }
        let squares: BTreeSet<u64> = (1..p).map(|x| x * x % p).collect();
        SignCharacter::new(p, (1..p).filter(|u| !squares.contains(u)))
    }

    pub fn is_negative(&self, u: u64) -> bool {
        self.negative.contains(&(u % self.modulus))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// How the twist by `φ` is correlated with the cyclotomic action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwistMode {
    /// No twist: only power maps.
    Trivial,
    /// `u` acts by `g ↦ φ^{σ(u)}(g^u)`.
    Synchronized(SignCharacter),
    /// Power maps and `φ` act independently.
    Independent,
}

impl TwistMode {
    pub fn name(&self) -> &'static str {
        match self {
            TwistMode::Trivial => "Trivial",
            TwistMode::Synchronized(_) => "Synchronized",
            TwistMode::Independent => "Independent",
        }
    }
}

/// A twisted form of a constant group: `H`, the cyclotomic modulus, the
/// involution and the correlation mode. The cyclotomic image is the full
/// unit group `(Z/eZ)^*` (base field `Q`).
#[derive(Clone, Debug)]
pub struct TwistDatum {
    pub group: FiniteGroup,
    pub exponent: u64,
    pub involution: Involution,
    pub mode: TwistMode,
}

impl TwistDatum {
    pub fn new(group: FiniteGroup, exponent: u64, involution: Involution, mode: TwistMode) -> Result<Self> {
        if exponent == 0 || exponent % group.exponent() != 0 {
            return Err(Error::Twist(format!(
                "group exponent {} does not divide {exponent}",
                group.exponent()
            )));
        }
        if let TwistMode::Synchronized(sigma) = &mode {
            if sigma.modulus() != exponent {
                return Err(Error::Twist(format!(
                    "character modulus {} differs from {exponent}",
                    sigma.modulus()
                )));
            }
        }
        Ok(TwistDatum {
            group,
            exponent,
            involution,
            mode,
        })
    }
}

/// Galois orbits on the twisted form's geometric points, ordered by smallest member.
pub fn twisted_orbits(t: &TwistDatum) -> Result<Vec<Vec<GroupElement>>> {
    if t.exponent % t.group.exponent() != 0 {
        return Err(Error::Twist("exponent mismatch".into()));
    }
    let units: Vec<u64> = full_unit_group(t.exponent);
    let phi = &t.involution;
    let orbits = t.group.partition_by(|g| {
        let mut out = Vec::new();
        for &u in &units {
            let gu = g.pow(u);
            match &t.mode {
                TwistMode::Trivial => out.push(gu),
                TwistMode::Synchronized(sigma) => {
                    out.push(if sigma.is_negative(u) { phi.apply(&gu) } else { gu })
                }
                TwistMode::Independent => {
                    out.push(gu);
                }
            }
        }
        if t.mode == TwistMode::Independent {
            out.push(phi.apply(g));
        }
        out
    });
    Ok(orbits)
}
