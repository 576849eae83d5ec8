//! Breaking and weakly breaking thin morphisms of zero-dimensional stacks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galois::{
    f_conjugacy_classes, twisted_orbits, FieldDescriptor, Involution, SignCharacter, TwistDatum,
    TwistMode,
};
use crate::group::FiniteGroup;
use crate::invariants::{ab_from_values, ab_invariants};
use crate::perm::{index, parse_permutation, GroupElement};
use crate::sector::{RaisingFunction, SectorLabel, StackDescriptor};
use crate::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Breaking,
    WeaklyBreakingOnly,
    NotBreaking,
}

impl Verdict {
    /// Lexicographic comparison of `(a_sub, b_sub)` against `(a, b)`.
    pub fn compare(sub: (Q, usize), ambient: (Q, usize)) -> Verdict {
        match sub.cmp(&ambient) {
            Ordering::Greater => Verdict::Breaking,
            Ordering::Equal => Verdict::WeaklyBreakingOnly,
            Ordering::Less => Verdict::NotBreaking,
        }
    }

    /// Weakly breaking: `(a_sub, b_sub) ≥ (a, b)`.
    pub fn is_weakly_breaking(self) -> bool {
        self != Verdict::NotBreaking
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Breaking => "Breaking",
            Verdict::WeaklyBreakingOnly => "WeaklyBreakingOnly",
            Verdict::NotBreaking => "NotBreaking",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThinVerdict {
    /// Subgroup generators, a `mu(m)` label, or a twist mode name.
    pub source: String,
    pub order: usize,
    pub a_sub: Q,
    pub b_sub: usize,
    pub verdict: Verdict,
}

impl ThinVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source": self.source,
            "order": self.order,
            "a": self.a_sub.to_string(),
            "b": self.b_sub,
            "verdict": self.verdict,
        })
    }
}

/// Value of a raising function on each element of `G`, read off its F-class.
pub fn element_values(stack: &StackDescriptor, c: &RaisingFunction) -> Result<HashMap<GroupElement, Q>> {
    let mut out = HashMap::new();
    for class in stack.classes()? {
        let v = c
            .get(&SectorLabel::Class(class.representative.clone()))
            .ok_or_else(|| Error::Raising(format!("no value on class {}", class.representative)))?;
        for g in class.members {
            out.insert(g, v);
        }
    }
    Ok(out)
}

/// Pullback of `c` along `BH → BG`: `c_H([h]_H) = c([h]_G)`.
pub fn pullback_raising(
    g: &FiniteGroup,
    h: &FiniteGroup,
    field: &FieldDescriptor,
    c: &RaisingFunction,
) -> Result<RaisingFunction> {
    if !h.is_subgroup_of(g) {
        return Err(Error::NotSubgroup("H is not contained in G".into()));
    }
    let values = element_values(&StackDescriptor::bg(g.clone(), field.clone()), c)?;
    let mut out = BTreeMap::new();
    for class in f_conjugacy_classes(h, field)? {
        let v = values[&class.representative];
        out.insert(SectorLabel::Class(class.representative), v);
    }
    RaisingFunction::for_stack(&StackDescriptor::bg(h.clone(), field.clone()), out)
}

/// Pullback along `Bμ_m → Bμ_l` for `m | l`: sector `j` maps to `j·(l/m)`.
pub fn mu_pullback(m: u64, l: u64, c: &RaisingFunction) -> Result<RaisingFunction> {
    if m == 0 || l % m != 0 {
        return Err(Error::NotSubgroup(format!("mu({m}) is not a subgroup of mu({l})")));
    }
    let step = l / m;
    let mut out = BTreeMap::new();
    for j in 0..m {
        let v = c
            .get(&SectorLabel::Residue { j: j * step, l })
            .ok_or_else(|| Error::Raising(format!("not a raising function on mu({l})")))?;
        out.insert(SectorLabel::Residue { j, l: m }, v);
    }
    RaisingFunction::for_stack(&StackDescriptor::Mu(m), out)
}

/// Verdicts for `μ_m ⊂ μ_l` over all divisors `1 < m < l`.
pub fn mu_subgroup_scan(l: u64, c: &RaisingFunction) -> Result<Vec<ThinVerdict>> {
    let ambient = ab_invariants(&StackDescriptor::Mu(l), c)?;
    let mut out = Vec::new();
    for m in (2..l).filter(|m| l % m == 0) {
        let cm = mu_pullback(m, l, c)?;
        let sub = ab_invariants(&StackDescriptor::Mu(m), &cm)?;
        out.push(ThinVerdict {
            source: format!("mu({m})"),
            order: m as usize,
            a_sub: sub.0,
            b_sub: sub.1,
            verdict: Verdict::compare(sub, ambient),
        });
    }
    Ok(out)
}

fn describe(h: &FiniteGroup) -> String {
    let gens: Vec<String> = minimal_generators(h).iter().map(ToString::to_string).collect();
    format!("<{}>", gens.join(","))
}

/// A short generating set: greedily adds the smallest element not yet generated.
pub fn minimal_generators(h: &FiniteGroup) -> Vec<GroupElement> {
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut current = vec![h.identity().clone()];
    for g in h.elements() {
        if current.binary_search(g).is_ok() {
            continue;
        }
        gens.push(g.clone());
        current = FiniteGroup::generate(h.degree(), &gens)
            .expect("subgroup of a bounded group")
            .elements()
            .to_vec();
        if current.len() == h.order() {
            break;
        }
    }
    gens
}

/// One verdict per nontrivial proper subgroup, in subgroup order.
pub fn subgroup_scan(g: &FiniteGroup, field: &FieldDescriptor, c: &RaisingFunction) -> Result<Vec<ThinVerdict>> {
    subgroup_scan_bounded(g, field, c, crate::group::DEFAULT_SUBGROUP_BOUND)
}

pub fn subgroup_scan_bounded(
    g: &FiniteGroup,
    field: &FieldDescriptor,
    c: &RaisingFunction,
    bound: usize,
) -> Result<Vec<ThinVerdict>> {
    let stack = StackDescriptor::bg(g.clone(), field.clone());
    let ambient = ab_invariants(&stack, c)?;
    let values = element_values(&stack, c)?;
    let subgroups = g.subgroups_bounded(bound)?;
    subgroups
        .par_iter()
        .filter(|h| h.order() > 1 && h.order() < g.order())
        .map(|h| {
            let classes = f_conjugacy_classes(h, field)?;
            let sub = ab_from_values(
                classes
                    .iter()
                    .filter(|cl| !cl.is_identity())
                    .map(|cl| (cl.representative.to_string(), values[&cl.representative])),
            )?;
            Ok(ThinVerdict {
                source: describe(h),
                order: h.order(),
                a_sub: sub.0,
                b_sub: sub.1,
                verdict: Verdict::compare(sub, ambient),
            })
        })
        .collect()
}

/// Verdicts for the twisted forms of `H` in each correlation mode.
pub fn twist_scan(
    h: &FiniteGroup,
    e: u64,
    phi: &Involution,
    sigma: &SignCharacter,
    c: &dyn Fn(&GroupElement) -> Q,
    ambient: (Q, usize),
) -> Result<Vec<ThinVerdict>> {
    let modes = [
        TwistMode::Trivial,
        TwistMode::Synchronized(sigma.clone()),
        TwistMode::Independent,
    ];
    modes
        .into_iter()
        .map(|mode| {
            let name = mode.name().to_string();
            let datum = TwistDatum::new(h.clone(), e, phi.clone(), mode)?;
            let orbits = twisted_orbits(&datum)?;
            let mut values = Vec::new();
            for orbit in orbits.iter().filter(|o| !o[0].is_identity()) {
                let v = c(&orbit[0]);
                if orbit.iter().any(|g| c(g) != v) {
                    return Err(Error::Raising("c is not constant on a twisted orbit".into()));
                }
                values.push((orbit[0].to_string(), v));
            }
            let sub = ab_from_values(values)?;
            Ok(ThinVerdict {
                source: name,
                order: h.order(),
                a_sub: sub.0,
                b_sub: sub.1,
                verdict: Verdict::compare(sub, ambient),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comprehensiveness {
    pub comprehensive: bool,
    /// A minimal-c class whose normal closure is proper, with that closure's order.
    pub witness: Option<(Vec<GroupElement>, usize)>,
}

/// Whether every nontrivial conjugacy class of minimal `c` generates `G`.
pub fn is_comprehensive(g: &FiniteGroup, c: &dyn Fn(&GroupElement) -> Q) -> Result<Comprehensiveness> {
    let classes: Vec<_> = g
        .conjugacy_classes()
        .into_iter()
        .filter(|cl| !cl.representative.is_identity())
        .collect();
    let Some(min) = classes.iter().map(|cl| c(&cl.representative)).min() else {
        return Ok(Comprehensiveness {
            comprehensive: true,
            witness: None,
        });
    };
    if min.is_zero() {
        return Err(Error::Raising("c vanishes on a nontrivial class".into()));
    }
    for cl in classes.iter().filter(|cl| c(&cl.representative) == min) {
        let closure = g.normal_closure(&cl.members)?;
        if closure.order() != g.order() {
            return Ok(Comprehensiveness {
                comprehensive: false,
                witness: Some((cl.members.clone(), closure.order())),
            });
        }
    }
    Ok(Comprehensiveness {
        comprehensive: true,
        witness: None,
    })
}

#[derive(Clone, Debug)]
pub struct KlunersReport {
    pub a_g: Q,
    pub b_g: usize,
    pub subgroup_verdicts: Vec<ThinVerdict>,
    pub twist_verdicts: Vec<ThinVerdict>,
    pub comprehensiveness: Comprehensiveness,
}

impl KlunersReport {
    pub fn to_json(&self) -> serde_json::Value {
        let witness = self.comprehensiveness.witness.as_ref().map(|(members, order)| {
            serde_json::json!({
                "class": members.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "normal_closure_order": order,
            })
        });
        serde_json::json!({
            "group": "C3 wr C2 = <(1,2,3),(4,5,6),(1,4)(2,5)(3,6)> in S6",
            "field": "Q",
            "raising": "index",
            "a": self.a_g.to_string(),
            "b": self.b_g,
            "subgroups": self.subgroup_verdicts.iter().map(ThinVerdict::to_json).collect::<Vec<_>>(),
            "twists": self.twist_verdicts.iter().map(ThinVerdict::to_json).collect::<Vec<_>>(),
            "comprehensive": self.comprehensiveness.comprehensive,
            "witness": witness,
        })
    }
}

/// The full analysis of `C₃ ≀ C₂ ≤ S₆` with the index raising function over `Q`.
pub fn kluners_report() -> Result<KlunersReport> {
    let g = FiniteGroup::kluners();
    let field = FieldDescriptor::Rationals;
    let stack = StackDescriptor::bg(g.clone(), field.clone());
    let c = RaisingFunction::index(&stack)?;
    let (a_g, b_g) = ab_invariants(&stack, &c)?;
    let subgroup_verdicts = subgroup_scan(&g, &field, &c)?;

    let p = |s: &str| parse_permutation(s, 6).expect("literal permutation");
    let n = FiniteGroup::generate(6, &[p("(1,2,3)"), p("(4,5,6)")])?;
    let phi = Involution::by_conjugation(&n, p("(1,4)(2,5)(3,6)"))?;
    let sigma = SignCharacter::legendre(3)?;
    let ind = |x: &GroupElement| Q::from_integer(index(x) as i64);
    let twist_verdicts = twist_scan(&n, n.exponent(), &phi, &sigma, &ind, (a_g, b_g))?;
    let comprehensiveness = is_comprehensive(&g, &ind)?;
    Ok(KlunersReport {
        a_g,
        b_g,
        subgroup_verdicts,
        twist_verdicts,
        comprehensiveness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn p(s: &str) -> GroupElement {
        parse_permutation(s, 6).unwrap()
    }

    #[test]
    fn verdict_order() {
        assert_eq!(Verdict::compare((q(1, 2), 2), (q(1, 2), 1)), Verdict::Breaking);
        assert_eq!(Verdict::compare((q(1, 1), 1), (q(1, 2), 3)), Verdict::Breaking);
        assert_eq!(Verdict::compare((q(1, 2), 1), (q(1, 2), 1)), Verdict::WeaklyBreakingOnly);
        assert_eq!(Verdict::compare((q(1, 4), 5), (q(1, 2), 1)), Verdict::NotBreaking);
    }

    #[test]
    fn s3_scan() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let stack = StackDescriptor::bg(s3.clone(), FieldDescriptor::Rationals);
        let c = RaisingFunction::index(&stack).unwrap();
        let verdicts = subgroup_scan(&s3, &FieldDescriptor::Rationals, &c).unwrap();
        assert_eq!(verdicts.len(), 4);
        for v in &verdicts {
            match v.order {
                2 => assert_eq!(v.verdict, Verdict::WeaklyBreakingOnly),
                3 => {
                    assert_eq!((v.a_sub, v.b_sub), (q(1, 2), 1));
                    assert_eq!(v.verdict, Verdict::NotBreaking);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn pullback_identity_and_values() {
        let g = FiniteGroup::kluners();
        let f = FieldDescriptor::Rationals;
        let stack = StackDescriptor::bg(g.clone(), f.clone());
        let c = RaisingFunction::index(&stack).unwrap();
        assert_eq!(pullback_raising(&g, &g, &f, &c).unwrap(), c);
        let n = FiniteGroup::generate(6, &[p("(1,2,3)"), p("(4,5,6)")]).unwrap();
        let cn = pullback_raising(&g, &n, &f, &c).unwrap();
        let nstack = StackDescriptor::bg(n.clone(), f.clone());
        let values = element_values(&nstack, &cn).unwrap();
        for h in n.elements() {
            assert_eq!(values[h], Q::from_integer(index(h) as i64));
        }
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert!(pullback_raising(&g, &s3, &f, &c).is_err());
    }

    #[test]
    fn mu_pullback_indices() {
        let c = RaisingFunction::mu_table(4, &[q(3, 1), q(1, 1), q(3, 1)]).unwrap();
        let c2 = mu_pullback(2, 4, &c).unwrap();
        assert_eq!(c2.get(&SectorLabel::Residue { j: 1, l: 2 }), Some(q(1, 1)));
        assert!(mu_pullback(3, 4, &c).is_err());
    }

    #[test]
    fn mu_p_squared_weakly_breaking() {
        for pr in [2u64, 3] {
            let l = pr * pr;
            let values: Vec<Q> = (1..l)
                .map(|j| if j % pr == 0 { q(1, 1) } else { q(2, 1) })
                .collect();
            let c = RaisingFunction::mu_table(l, &values).unwrap();
            let v = mu_subgroup_scan(l, &c).unwrap();
            assert_eq!(v.len(), 1);
            assert_eq!(v[0].verdict, Verdict::WeaklyBreakingOnly);
        }
    }

    #[test]
    fn twist_verdicts() {
        let r = kluners_report().unwrap();
        assert_eq!((r.a_g, r.b_g), (q(1, 2), 1));
        let verdicts: Vec<(String, Verdict, usize)> = r
            .twist_verdicts
            .iter()
            .map(|v| (v.source.clone(), v.verdict, v.b_sub))
            .collect();
        assert_eq!(
            verdicts,
            vec![
                ("Trivial".into(), Verdict::Breaking, 2),
                ("Synchronized".into(), Verdict::Breaking, 2),
                ("Independent".into(), Verdict::WeaklyBreakingOnly, 1),
            ]
        );
    }

    #[test]
    fn kluners_order_three_subgroups() {
        let r = kluners_report().unwrap();
        let three: Vec<&ThinVerdict> = r.subgroup_verdicts.iter().filter(|v| v.order == 3).collect();
        assert_eq!(three.len(), 4);
        assert!(three.iter().all(|v| v.verdict != Verdict::Breaking));
        let weak = three
            .iter()
            .filter(|v| v.verdict == Verdict::WeaklyBreakingOnly)
            .count();
        assert_eq!(weak, 2);
        let n = r.subgroup_verdicts.iter().find(|v| v.order == 9).unwrap();
        assert_eq!(n.verdict, Verdict::Breaking);
    }

    #[test]
    fn kluners_not_comprehensive() {
        let r = kluners_report().unwrap();
        let c = &r.comprehensiveness;
        assert!(!c.comprehensive);
        let (class, order) = c.witness.clone().unwrap();
        let class: BTreeSet<GroupElement> = class.into_iter().collect();
        assert_eq!(class, BTreeSet::from([p("(1,2,3)"), p("(4,5,6)")]));
        assert_eq!(order, 9);
    }

    #[test]
    fn symmetric_groups_comprehensive() {
        let ind = |x: &GroupElement| Q::from_integer(index(x) as i64);
        for n in 3..=6 {
            let s = FiniteGroup::symmetric(n).unwrap();
            assert!(is_comprehensive(&s, &ind).unwrap().comprehensive, "S{n}");
        }
        let a5 = FiniteGroup::alternating(5).unwrap();
        let one = |x: &GroupElement| if x.is_identity() { q(0, 1) } else { q(1, 1) };
        assert!(is_comprehensive(&a5, &one).unwrap().comprehensive);
    }

    #[test]
    fn minimal_generators_generate() {
        let g = FiniteGroup::kluners();
        let gens = minimal_generators(&g);
        assert!(gens.len() <= 3);
        assert_eq!(FiniteGroup::generate(6, &gens).unwrap(), g);
    }
}
