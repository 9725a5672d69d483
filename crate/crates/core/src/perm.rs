//! Permutations on `0..n` and the finite groups they generate.
//!
//! Structure groups of normal bundles and covering monodromies are small
//! subgroups of symmetric groups, so every group question here is answered by
//! explicit enumeration.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CornerError, Result};

/// A permutation of `0..n`, stored as its image list: `self.0[i]` is the image of `i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Builds a permutation from its image list, rejecting anything that is not a bijection.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(CornerError::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// The transposition of `a` and `b` on `n` letters.
    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.0.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    /// Moves the entry at position `i` of `values` to position `self(i)`.
    pub fn permute<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = values.to_vec();
        for (i, v) in values.iter().enumerate() {
            out[self.0[i]] = v.clone();
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A permutation group given by generators, with its full element list cached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    degree: usize,
    generators: Vec<Perm>,
}

impl TryFrom<GroupRepr> for PermGroup {
    type Error = CornerError;
    fn try_from(r: GroupRepr) -> Result<Self> {
        PermGroup::generated(r.degree, r.generators)
    }
}

impl From<PermGroup> for GroupRepr {
    fn from(g: PermGroup) -> Self {
        GroupRepr {
            degree: g.degree,
            generators: g.generators,
        }
    }
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        PermGroup {
            degree,
            generators: Vec::new(),
            elements: vec![Perm::identity(degree)],
        }
    }

    /// The group generated by `generators`. Redundant generators (identity,
    /// duplicates, or ones already in the span of earlier generators) are
    /// dropped so the stored set is irredundant.
    pub fn generated(degree: usize, generators: Vec<Perm>) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(CornerError::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let mut kept: Vec<Perm> = Vec::new();
        let mut elements = vec![Perm::identity(degree)];
        for g in generators {
            if elements.contains(&g) {
                continue;
            }
            kept.push(g);
            elements = close(degree, &kept);
        }
        Ok(PermGroup {
            degree,
            generators: kept,
            elements,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, p: &Perm) -> bool {
        self.elements.contains(p)
    }

    /// Orbits of the natural action on `0..degree`, each sorted, in order of smallest element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits_of(self.degree, &self.generators)
    }

    /// True when the action on `0..degree` has a single orbit (vacuously true for degree 0).
    pub fn is_transitive(&self) -> bool {
        self.orbits().len() <= 1
    }

    /// Orbit of a point of `R^degree` under coordinate permutation.
    pub fn orbit_of_point(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for g in &self.elements {
            let y = g.permute(x);
            if !out.iter().any(|z| z == &y) {
                out.push(y);
            }
        }
        out
    }
}

/// Closure of a generator set under composition (breadth-first, sorted output).
fn close(degree: usize, generators: &[Perm]) -> Vec<Perm> {
    let id = Perm::identity(degree);
    let mut seen: BTreeSet<Perm> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(p) = queue.pop_front() {
        for g in generators {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen.into_iter().collect()
}

/// Orbits of the group generated by `generators` acting on `0..n`.
pub fn orbits_of(n: usize, generators: &[Perm]) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; n];
    let mut orbits = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orbit = vec![start];
        label[start] = id;
        let mut k = 0;
        while k < orbit.len() {
            let i = orbit[k];
            for g in generators {
                let j = g.apply(i);
                if label[j] == usize::MAX {
                    label[j] = id;
                    orbit.push(j);
                }
            }
            k += 1;
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_generates_order_two() {
        let g = PermGroup::generated(2, vec![Perm::swap(2, 0, 1)]).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.is_transitive());
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let s = Perm::swap(3, 0, 1);
        let g = PermGroup::generated(3, vec![Perm::identity(3), s.clone(), s.clone()]).unwrap();
        assert_eq!(g.generators(), &[s]);
        assert_eq!(g.order(), 2);
        assert_eq!(g.orbits(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn full_symmetric_group_from_two_generators() {
        let cyc = Perm::new(vec![1, 2, 0]).unwrap();
        let g = PermGroup::generated(3, vec![cyc, Perm::swap(3, 0, 1)]).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn compose_and_inverse() {
        let p = Perm::new(vec![2, 0, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.permute(&['a', 'b', 'c']), vec!['b', 'c', 'a']);
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Perm::new(vec![0, 0]).is_err());
    }
}
