//! Finite permutations in one-line notation, used both for the spine maps
//! `iota_sigma` (permutations of `[n]`) and for vertex permutations of `I`.

use crate::error::{Error, Result};

/// Parity of a permutation, computed by inversion count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// A permutation of `{0, .., len-1}` stored as the image sequence:
/// `map[i]` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    map: Vec<usize>,
}

impl Perm {
    pub fn new(map: Vec<usize>) -> Result<Perm> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::structural(format!(
                    "not a permutation of 0..{n}: {map:?}"
                )));
            }
            seen[x] = true;
        }
        Ok(Perm { map })
    }

    pub fn identity(n: usize) -> Perm {
        Perm {
            map: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Perm {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Perm { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.map
    }

    /// `self` after `other`: `(self * other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.len(), other.len());
        Perm {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Perm { map: inv }
    }

    pub fn parity(&self) -> Parity {
        let mut inversions = 0usize;
        for i in 0..self.map.len() {
            for j in (i + 1)..self.map.len() {
                if self.map[i] > self.map[j] {
                    inversions += 1;
                }
            }
        }
        if inversions.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Passive permutation: entry `i` of the result is `items[map[i]]`.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Vec<T> {
        debug_assert_eq!(self.len(), items.len());
        self.map.iter().map(|&i| items[i].clone()).collect()
    }

    /// Active permutation: the item at position `i` moves to position
    /// `map[i]`. This action is covariant: `s.act_on(t.act_on(x)) =
    /// s.compose(t).act_on(x)`.
    pub fn act_on<T: Clone>(&self, items: &[T]) -> Vec<T> {
        debug_assert_eq!(self.len(), items.len());
        let mut out: Vec<T> = items.to_vec();
        for (i, &target) in self.map.iter().enumerate() {
            out[target] = items[i].clone();
        }
        out
    }

    /// All permutations of `{0, .., n-1}` in lexicographic order of their
    /// image sequences.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm { map: cur.clone() });
            // next_permutation
            let Some(i) = (0..n.saturating_sub(1))
                .rev()
                .find(|&i| cur[i] < cur[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    /// The permutation sorting `items` ascending: `result.permute(sorted) == items`.
    pub fn sorting<T: Ord>(items: &[T]) -> Perm {
        let mut idx: Vec<usize> = (0..items.len()).collect();
        // sorted[r] = items[order[r]]  where order sorts by value
        let mut order = idx.clone();
        order.sort_by(|&a, &b| items[a].cmp(&items[b]));
        // we want map with items[i] = sorted[map^{-1}... easier: find for each
        // position i of `items` the rank of items[i]; then permute(sorted)[i]
        // = sorted[map[i]] must equal items[i], so map[i] = rank of items[i].
        let mut rank = vec![0usize; items.len()];
        for (r, &o) in order.iter().enumerate() {
            rank[o] = r;
        }
        for (i, slot) in idx.iter_mut().enumerate() {
            *slot = rank[i];
        }
        Perm { map: idx }
    }
}

impl std::fmt::Display for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.map.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}
