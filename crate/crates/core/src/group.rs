//! Finite permutation groups: closure, conjugacy classes, subgroup lattice
//! and normal closures.

use std::collections::{HashMap, HashSet, VecDeque};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::perm::{parse_permutation_at, GroupElement};

/// Default cap on the size of a generated group.
pub const DEFAULT_ORDER_BOUND: usize = 10_000;
/// Default cap on `|G|` for subgroup enumeration.
pub const DEFAULT_SUBGROUP_BOUND: usize = 360;

/// A finite permutation group with its full element list.
///
/// Elements are kept sorted (lexicographically by image sequence), so the
/// identity is always `elements()[0]`.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    degree: usize,
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
    lookup: HashMap<GroupElement, usize>,
    exponent: u64,
}

/// An ordinary conjugacy class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjClass {
    pub representative: GroupElement,
    /// Sorted; `representative` is the smallest member.
    pub members: Vec<GroupElement>,
}

impl ConjClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.members.binary_search(g).is_ok()
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Closure of `gens` with the default element bound.
    pub fn generate(degree: usize, gens: &[GroupElement]) -> Result<Self> {
        Self::generate_bounded(degree, gens, DEFAULT_ORDER_BOUND)
    }

    pub fn generate_bounded(degree: usize, gens: &[GroupElement], bound: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("degree must be positive".into()));
        }
        for g in gens {
            if g.degree() != degree {
                return Err(Error::InvalidArgument(format!(
                    "generator {g} has degree {}, expected {degree}",
                    g.degree()
                )));
            }
        }
        let gens: Vec<GroupElement> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let id = GroupElement::identity(degree);
        let mut seen: HashSet<GroupElement> = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = g.compose(&x);
                if seen.insert(y.clone()) {
                    if seen.len() > bound {
                        return Err(Error::GroupTooLarge { bound });
                    }
                    queue.push_back(y);
                }
            }
        }
        let elements: Vec<GroupElement> = seen.into_iter().collect();
        Ok(Self::from_parts(degree, gens, elements))
    }

    /// Assumes `elements` is closed; used for subgroups found by the lattice search.
    fn from_parts(degree: usize, generators: Vec<GroupElement>, mut elements: Vec<GroupElement>) -> Self {
        elements.sort();
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        let exponent = elements.iter().fold(1u64, |acc, g| acc.lcm(&g.order()));
        FiniteGroup {
            degree,
            generators,
            elements,
            lookup,
            exponent,
        }
    }

    /// Symmetric group on `n` points.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n <= 1 {
            return Self::generate(n.max(1), &[]);
        }
        let t = GroupElement::from_cycles(n, &[vec![1, 2]])?;
        let c = GroupElement::from_cycles(n, &[(1..=n).collect()])?;
        Self::generate(n, &[t, c])
    }

    /// Alternating group on `n ≥ 3` points.
    pub fn alternating(n: usize) -> Result<Self> {
        if n < 3 {
            return Self::generate(n.max(1), &[]);
        }
        let gens: Vec<GroupElement> = (3..=n)
            .map(|k| GroupElement::from_cycles(n, &[vec![1, 2, k]]))
            .collect::<Result<_>>()?;
        Self::generate(n, &gens)
    }

    /// Direct product of cyclic groups `C_{m1} × … × C_{mk}` acting on disjoint blocks.
    pub fn abelian(moduli: &[usize]) -> Result<Self> {
        let degree: usize = moduli.iter().sum::<usize>().max(1);
        let mut gens = Vec::new();
        let mut offset = 0;
        for &m in moduli {
            if m >= 2 {
                let cyc: Vec<usize> = (offset + 1..=offset + m).collect();
                gens.push(GroupElement::from_cycles(degree, &[cyc])?);
            }
            offset += m;
        }
        Self::generate(degree, &gens)
    }

    /// The wreath product `C₃ ≀ C₂ ≤ S₆` of Klüners' counterexample.
    pub fn kluners() -> Self {
        let gens = [
            GroupElement::from_cycles(6, &[vec![1, 2, 3]]).unwrap(),
            GroupElement::from_cycles(6, &[vec![4, 5, 6]]).unwrap(),
            GroupElement::from_cycles(6, &[vec![1, 4], vec![2, 5], vec![3, 6]]).unwrap(),
        ];
        Self::generate(6, &gens).expect("order 18")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn identity(&self) -> &GroupElement {
        &self.elements[0]
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.lookup.contains_key(g)
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.lookup.get(g).copied()
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    pub fn is_subgroup_of(&self, other: &FiniteGroup) -> bool {
        self.degree == other.degree && self.elements.iter().all(|g| other.contains(g))
    }

    /// Checks closure under composition and inverse; used by tests and
    /// for validating user-supplied element sets.
    pub fn is_closed(&self) -> bool {
        self.contains(&GroupElement::identity(self.degree))
            && self.elements.iter().all(|a| {
                self.contains(&a.inverse())
                    && self.generators.iter().all(|g| self.contains(&g.compose(a)))
            })
    }

    /// Orbit of `g` under conjugation and any extra element maps; BFS over generators.
    pub(crate) fn orbit_under<F>(&self, g: &GroupElement, extra: F) -> Vec<GroupElement>
    where
        F: Fn(&GroupElement) -> Vec<GroupElement>,
    {
        let mut seen: HashSet<GroupElement> = HashSet::from([g.clone()]);
        let mut queue = VecDeque::from([g.clone()]);
        while let Some(x) = queue.pop_front() {
            let mut next: Vec<GroupElement> =
                self.generators.iter().map(|h| x.conjugate_by(h)).collect();
            next.extend(extra(&x));
            for y in next {
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut v: Vec<GroupElement> = seen.into_iter().collect();
        v.sort();
        v
    }

    /// Partition of the group into orbits of an action generated by
    /// conjugation plus `extra`, ordered by smallest member.
    pub(crate) fn partition_by<F>(&self, extra: F) -> Vec<Vec<GroupElement>>
    where
        F: Fn(&GroupElement) -> Vec<GroupElement>,
    {
        let mut assigned = vec![false; self.order()];
        let mut out = Vec::new();
        for (i, g) in self.elements.iter().enumerate() {
            if assigned[i] {
                continue;
            }
            let orbit = self.orbit_under(g, &extra);
            for h in &orbit {
                assigned[self.lookup[h]] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Conjugacy classes, identity class first, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<ConjClass> {
        self.partition_by(|_| Vec::new())
            .into_iter()
            .map(|members| ConjClass {
                representative: members[0].clone(),
                members,
            })
            .collect()
    }

    /// Multiplication table `table[i * n + j] = index(e_i ∘ e_j)`.
    fn multiplication_table(&self) -> Vec<u32> {
        let n = self.order();
        let mut table = vec![0u32; n * n];
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                table[i * n + j] = self.lookup[&a.compose(b)] as u32;
            }
        }
        table
    }

    /// All subgroups with the default order bound.
    pub fn subgroups(&self) -> Result<Vec<FiniteGroup>> {
        self.subgroups_bounded(DEFAULT_SUBGROUP_BOUND)
    }

    /// All subgroups, each exactly once, ordered by (order, sorted element indices).
    ///
    /// Breadth-first: every known subgroup is extended by each element outside
    /// it and the closure is deduplicated by its element set.
    pub fn subgroups_bounded(&self, bound: usize) -> Result<Vec<FiniteGroup>> {
        let n = self.order();
        if n > bound {
            return Err(Error::SubgroupBound { order: n, bound });
        }
        let table = self.multiplication_table();
        // (sorted member indices, generator indices)
        let mut found: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        let trivial = vec![0u32];
        found.insert(trivial.clone(), Vec::new());
        let mut queue = VecDeque::from([trivial]);
        while let Some(members) = queue.pop_front() {
            let gens = found[&members].clone();
            let mut in_sub = vec![false; n];
            for &m in &members {
                in_sub[m as usize] = true;
            }
            for g in 0..n as u32 {
                if in_sub[g as usize] {
                    continue;
                }
                let mut new_gens = gens.clone();
                new_gens.push(g);
                let closure = close_indices(&table, n, &members, &new_gens);
                if !found.contains_key(&closure) {
                    found.insert(closure.clone(), new_gens);
                    queue.push_back(closure);
                }
            }
        }
        let mut subs: Vec<(Vec<u32>, Vec<u32>)> = found.into_iter().collect();
        subs.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(subs
            .into_iter()
            .map(|(members, gens)| {
                let elements = members.iter().map(|&i| self.elements[i as usize].clone()).collect();
                let generators = gens.iter().map(|&i| self.elements[i as usize].clone()).collect();
                FiniteGroup::from_parts(self.degree, generators, elements)
            })
            .collect())
    }

    /// Subgroup generated by `gens ⊆ G`.
    pub fn subgroup_generated(&self, gens: &[GroupElement]) -> Result<FiniteGroup> {
        for g in gens {
            if !self.contains(g) {
                return Err(Error::NotInGroup(g.to_string()));
            }
        }
        FiniteGroup::generate_bounded(self.degree, gens, self.order())
    }

    /// Smallest normal subgroup containing `set`.
    pub fn normal_closure(&self, set: &[GroupElement]) -> Result<FiniteGroup> {
        let mut conjugates: Vec<GroupElement> = Vec::new();
        let mut seen = HashSet::new();
        for s in set {
            if !self.contains(s) {
                return Err(Error::NotInGroup(s.to_string()));
            }
            for c in self.orbit_under(s, |_| Vec::new()) {
                if seen.insert(c.clone()) {
                    conjugates.push(c);
                }
            }
        }
        conjugates.sort();
        self.subgroup_generated(&conjugates)
    }

    pub fn is_normal_subgroup(&self, sub: &FiniteGroup) -> bool {
        sub.is_subgroup_of(self)
            && self
                .generators
                .iter()
                .all(|h| sub.elements.iter().all(|n| sub.contains(&n.conjugate_by(h))))
    }
}

fn close_indices(table: &[u32], n: usize, base: &[u32], gens: &[u32]) -> Vec<u32> {
    let mut in_set = vec![false; n];
    let mut members: Vec<u32> = Vec::with_capacity(base.len() * 2);
    for &b in base {
        in_set[b as usize] = true;
        members.push(b);
    }
    let mut queue: VecDeque<u32> = base.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for &g in gens {
            let y = table[g as usize * n + x as usize];
            if !in_set[y as usize] {
                in_set[y as usize] = true;
                members.push(y);
                queue.push_back(y);
            }
        }
    }
    members.sort_unstable();
    members
}

/// Group input in the text form `degree=6; gens=(1,2,3)|(4,5,6)|(1,4)(2,5)(3,6)`.
pub fn parse_group(text: &str) -> Result<FiniteGroup> {
    let (degree, gens) = parse_group_fields(text, 0)?;
    FiniteGroup::generate(degree, &gens)
}

pub(crate) fn parse_group_fields(text: &str, base: usize) -> Result<(usize, Vec<GroupElement>)> {
    let mut degree: Option<usize> = None;
    let mut gens_text: Option<(usize, &str)> = None;
    let mut offset = 0;
    for part in text.split(';') {
        let trimmed = part.trim_start();
        let lead = part.len() - trimmed.len();
        let pos = base + offset + lead;
        if let Some(rest) = trimmed.strip_prefix("degree") {
            let rest = rest.trim_start();
            let value = rest.strip_prefix('=').ok_or(Error::Parse {
                offset: pos,
                message: "expected 'degree=<n>'".into(),
            })?;
            degree = Some(value.trim().parse().map_err(|_| Error::Parse {
                offset: pos,
                message: "degree must be a positive integer".into(),
            })?);
        } else if let Some(rest) = trimmed.strip_prefix("gens") {
            let rest_trim = rest.trim_start();
            let value = rest_trim.strip_prefix('=').ok_or(Error::Parse {
                offset: pos,
                message: "expected 'gens=<cycles>|...'".into(),
            })?;
            let value_pos = pos + (trimmed.len() - value.len());
            gens_text = Some((value_pos, value));
        } else if !trimmed.trim().is_empty() {
            return Err(Error::Parse {
                offset: pos,
                message: format!("unknown group field '{}'", trimmed.trim()),
            });
        }
        offset += part.len() + 1;
    }
    let degree = degree.ok_or(Error::Parse {
        offset: base,
        message: "missing 'degree='".into(),
    })?;
    if degree == 0 {
        return Err(Error::Parse {
            offset: base,
            message: "degree must be positive".into(),
        });
    }
    let mut gens = Vec::new();
    if let Some((pos, value)) = gens_text {
        let mut off = 0;
        for g in value.split('|') {
            if !g.trim().is_empty() {
                gens.push(parse_permutation_at(g, degree, pos + off)?);
            }
            off += g.len() + 1;
        }
    }
    Ok((degree, gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::parse_permutation;

    fn p(s: &str, n: usize) -> GroupElement {
        parse_permutation(s, n).unwrap()
    }

    #[test]
    fn kluners_group_order_and_exponent() {
        let g = FiniteGroup::kluners();
        assert_eq!(g.order(), 18);
        assert_eq!(g.exponent(), 6);
        assert!(g.is_closed());
    }

    #[test]
    fn small_closures() {
        let c2 = FiniteGroup::generate(2, &[p("(1,2)", 2)]).unwrap();
        assert_eq!(c2.order(), 2);
        let s3 = FiniteGroup::generate(3, &[p("(1,2)", 3), p("(1,2,3)", 3)]).unwrap();
        assert_eq!(s3.order(), 6);
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert_eq!(FiniteGroup::alternating(5).unwrap().order(), 60);
    }

    #[test]
    fn closure_bound_enforced() {
        let s6 = [p("(1,2)", 6), p("(1,2,3,4,5,6)", 6)];
        assert_eq!(
            FiniteGroup::generate_bounded(6, &s6, 100),
            Err(Error::GroupTooLarge { bound: 100 })
        );
    }

    #[test]
    fn conjugacy_in_s3() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let sizes: Vec<usize> = s3.conjugacy_classes().iter().map(ConjClass::size).collect();
        // identity first, then classes by smallest member: (2,3) is [1,3,2] < (1,2,3)
        assert_eq!(sizes, vec![1, 3, 2]);
    }

    #[test]
    fn conjugacy_in_kluners() {
        let g = FiniteGroup::kluners();
        let classes = g.conjugacy_classes();
        assert!(classes[0].representative.is_identity());
        let c = classes.iter().find(|c| c.contains(&p("(1,2,3)", 6))).unwrap();
        assert_eq!(c.members, {
            let mut v = vec![p("(1,2,3)", 6), p("(4,5,6)", 6)];
            v.sort();
            v
        });
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let g = FiniteGroup::abelian(&[2, 3, 4]).unwrap();
        assert_eq!(g.order(), 24);
        assert!(g.conjugacy_classes().iter().all(|c| c.size() == 1));
    }

    #[test]
    fn subgroup_counts() {
        let c5 = FiniteGroup::abelian(&[5]).unwrap();
        assert_eq!(c5.subgroups().unwrap().len(), 2);
        let c3c3 = FiniteGroup::abelian(&[3, 3]).unwrap();
        let subs = c3c3.subgroups().unwrap();
        let orders: Vec<usize> = subs.iter().map(FiniteGroup::order).collect();
        assert_eq!(orders, vec![1, 3, 3, 3, 3, 9]);
        assert_eq!(FiniteGroup::symmetric(3).unwrap().subgroups().unwrap().len(), 6);
        // S4 has 30 subgroups
        assert_eq!(FiniteGroup::symmetric(4).unwrap().subgroups().unwrap().len(), 30);
    }

    #[test]
    fn subgroup_bound_enforced() {
        let s6 = FiniteGroup::symmetric(6).unwrap();
        assert!(matches!(s6.subgroups(), Err(Error::SubgroupBound { .. })));
    }

    #[test]
    fn normal_closures() {
        let g = FiniteGroup::kluners();
        let triv = g.normal_closure(&[GroupElement::identity(6)]).unwrap();
        assert_eq!(triv.order(), 1);
        let n = g.normal_closure(&[p("(1,2,3)", 6)]).unwrap();
        assert_eq!(n.order(), 9);
        assert!(g.is_normal_subgroup(&n));
        let s4 = FiniteGroup::symmetric(4).unwrap();
        assert_eq!(s4.normal_closure(&[p("(1,2)", 4)]).unwrap().order(), 24);
    }

    #[test]
    fn group_text_form() {
        let g = parse_group("degree=6; gens=(1,2,3)|(4,5,6)|(1,4)(2,5)(3,6)").unwrap();
        assert_eq!(g.order(), 18);
        let g2 = parse_group("degree=3; gens=[2,3,1]|(1,2)").unwrap();
        assert_eq!(g2.order(), 6);
        assert!(parse_group("gens=(1,2)").is_err());
        assert!(parse_group("degree=2; gens=(1,3)").is_err());
    }
}
