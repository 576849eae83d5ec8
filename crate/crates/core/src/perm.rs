//! Permutations on `{1..n}`.
//!
//! Internally images are stored 0-based; every textual form (cycle notation
//! and one-line image lists) is 1-based.

use std::fmt;
use std::ops::Mul;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A permutation of `{1..degree}`.
///
/// Ordering is lexicographic on the image sequence, so the identity is the
/// smallest element of any group containing it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    images: Vec<u16>,
}

impl GroupElement {
    pub fn identity(degree: usize) -> Self {
        GroupElement {
            images: (0..degree as u16).collect(),
        }
    }

    /// Builds a permutation from 1-based images, checking bijectivity.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::Permutation("degree must be positive".into()));
        }
        if n > u16::MAX as usize {
            return Err(Error::Permutation(format!("degree {n} too large")));
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for &img in images {
            if img == 0 || img > n {
                return Err(Error::Permutation(format!("image {img} out of range 1..={n}")));
            }
            if seen[img - 1] {
                return Err(Error::Permutation(format!("image {img} repeated")));
            }
            seen[img - 1] = true;
            out.push((img - 1) as u16);
        }
        Ok(GroupElement { images: out })
    }

    /// Builds a permutation from disjoint cycles given as 1-based points.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        if degree == 0 || degree > u16::MAX as usize {
            return Err(Error::Permutation(format!("invalid degree {degree}")));
        }
        let mut images: Vec<u16> = (0..degree as u16).collect();
        let mut used = vec![false; degree];
        for cycle in cycles {
            for &pt in cycle {
                if pt == 0 || pt > degree {
                    return Err(Error::Permutation(format!(
                        "entry {pt} out of range 1..={degree}"
                    )));
                }
                if used[pt - 1] {
                    return Err(Error::Permutation(format!("entry {pt} repeated")));
                }
                used[pt - 1] = true;
            }
            for (k, &pt) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                images[pt - 1] = (next - 1) as u16;
            }
        }
        Ok(GroupElement { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// 1-based image sequence.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize + 1).collect()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn apply0(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.degree(), other.degree());
        GroupElement {
            images: other.images.iter().map(|&j| self.images[j as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u16;
        }
        GroupElement { images: inv }
    }

    /// `h · self · h⁻¹`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.compose(self).compose(&h.inverse())
    }

    pub fn pow(&self, k: u64) -> GroupElement {
        let ord = self.order();
        let k = k % ord;
        let mut acc = GroupElement::identity(self.degree());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    /// Disjoint cycles of length ≥ 2, 0-based, each starting at its smallest point.
    pub fn cycles0(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.apply0(start);
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.apply0(j);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Number of `⟨g⟩`-orbits on the points, fixed points included.
    pub fn orbit_count(&self) -> usize {
        let moved: usize = self.cycles0().iter().map(Vec::len).sum();
        self.cycles0().len() + (self.degree() - moved)
    }

    pub fn order(&self) -> u64 {
        self.cycles0()
            .iter()
            .fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }

    /// Sorted cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles0().iter().map(Vec::len).collect();
        let moved: usize = t.iter().sum();
        t.extend(std::iter::repeat(1).take(self.degree() - moved));
        t.sort_unstable();
        t
    }
}

/// Malle index: degree minus the number of `⟨g⟩`-orbits.
pub fn index(g: &GroupElement) -> u64 {
    (g.degree() - g.orbit_count()) as u64
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.compose(rhs)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles0();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses cycle notation such as `(1,4)(2,5)(3,6)` or `()`, or a one-line
/// image list `[2,3,1,4,5,6]`.
pub fn parse_permutation(text: &str, degree: usize) -> Result<GroupElement> {
    parse_permutation_at(text, degree, 0)
}

pub(crate) fn parse_permutation_at(
    text: &str,
    degree: usize,
    base_offset: usize,
) -> Result<GroupElement> {
    let bytes = text.as_bytes();
    let err = |pos: usize, msg: &str| Error::Parse {
        offset: base_offset + pos,
        message: msg.to_string(),
    };
    let skip_ws = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        i
    };
    let read_number = |i: usize| -> Result<(usize, usize)> {
        let mut j = i;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == i {
            return Err(err(i, "expected a positive integer"));
        }
        let v: usize = text[i..j]
            .parse()
            .map_err(|_| err(i, "integer out of range"))?;
        Ok((v, j))
    };

    let mut i = skip_ws(0);
    if i >= bytes.len() {
        return Err(err(i, "empty permutation"));
    }
    if bytes[i] == b'[' {
        i += 1;
        let mut images = Vec::new();
        loop {
            i = skip_ws(i);
            if i < bytes.len() && bytes[i] == b']' && images.is_empty() {
                return Err(err(i, "empty image list"));
            }
            let (v, j) = read_number(i)?;
            images.push(v);
            i = skip_ws(j);
            match bytes.get(i) {
                Some(b',') => i += 1,
                Some(b']') => {
                    i += 1;
                    break;
                }
                _ => return Err(err(i, "expected ',' or ']'")),
            }
        }
        i = skip_ws(i);
        if i != bytes.len() {
            return Err(err(i, "trailing characters after image list"));
        }
        if images.len() != degree {
            return Err(err(
                0,
                &format!("image list has {} entries, degree is {degree}", images.len()),
            ));
        }
        return GroupElement::from_images(&images).map_err(|e| err(0, &e.to_string()));
    }

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut used = vec![false; degree];
    while i < bytes.len() {
        if bytes[i] != b'(' {
            return Err(err(i, "expected '('"));
        }
        i = skip_ws(i + 1);
        let mut cyc = Vec::new();
        if i < bytes.len() && bytes[i] == b')' {
            i = skip_ws(i + 1);
            continue;
        }
        loop {
            let start = i;
            let (v, j) = read_number(i)?;
            if v == 0 || v > degree {
                return Err(err(start, &format!("entry {v} out of range 1..={degree}")));
            }
            if used[v - 1] {
                return Err(err(start, &format!("entry {v} repeated")));
            }
            used[v - 1] = true;
            cyc.push(v);
            i = skip_ws(j);
            match bytes.get(i) {
                Some(b',') => i = skip_ws(i + 1),
                Some(b')') => {
                    i = skip_ws(i + 1);
                    break;
                }
                _ => return Err(err(i, "expected ',' or ')'")),
            }
        }
        cycles.push(cyc);
    }
    GroupElement::from_cycles(degree, &cycles).map_err(|e| err(0, &e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_parses() {
        let g = parse_permutation("()", 6).unwrap();
        assert!(g.is_identity());
        assert_eq!(g.images(), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn three_cycle_images() {
        let g = parse_permutation("(1,2,3)", 6).unwrap();
        assert_eq!(g.images(), vec![2, 3, 1, 4, 5, 6]);
        assert_eq!(g.to_string(), "(1,2,3)");
    }

    #[test]
    fn block_swap() {
        let g = parse_permutation("(1,4)(2,5)(3,6)", 6).unwrap();
        assert_eq!(g.images(), vec![4, 5, 6, 1, 2, 3]);
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn image_list_form() {
        let g = parse_permutation("[2,3,1,4,5,6]", 6).unwrap();
        assert_eq!(g, parse_permutation("(1,2,3)", 6).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_permutation("(1,2,1)", 6).is_err());
        assert!(parse_permutation("(1,7)", 6).is_err());
        assert!(parse_permutation("(1,2", 6).is_err());
        assert!(parse_permutation("(1)(1,2)", 6).is_err());
        assert!(parse_permutation("1,2", 6).is_err());
        assert!(parse_permutation("[2,1]", 3).is_err());
    }

    #[test]
    fn index_values() {
        assert_eq!(index(&GroupElement::identity(6)), 0);
        assert_eq!(index(&parse_permutation("(1,2,3)", 6).unwrap()), 2);
        assert_eq!(index(&parse_permutation("(1,2,3)(4,5,6)", 6).unwrap()), 4);
        assert_eq!(index(&parse_permutation("(1,4)(2,5)(3,6)", 6).unwrap()), 3);
    }

    #[test]
    fn compose_and_inverse() {
        let a = parse_permutation("(1,2,3)", 3).unwrap();
        let b = parse_permutation("(1,2)", 3).unwrap();
        // (1,2,3)∘(1,2): 1 -> 2 -> 3
        assert_eq!((&a * &b).images()[0], 3);
        assert!(a.compose(&a.inverse()).is_identity());
        assert_eq!(a.pow(3), GroupElement::identity(3));
        assert_eq!(a.pow(2), a.inverse());
    }
}
