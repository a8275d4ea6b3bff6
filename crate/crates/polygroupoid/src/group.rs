//! Finite abelian groups presented as products of cyclic groups.
//!
//! Elements are residue vectors; arithmetic is componentwise. Two specs with
//! isomorphic groups may differ structurally (no invariant-factor
//! canonicalization), so isomorphism-sensitive code must go through
//! [`enumerate_group_automorphisms`] or [`enumerate_group_isomorphisms`].

use crate::error::{Error, Result};
use crate::perm::Parity;

/// Default bound on the group order for automorphism enumeration.
pub const DEFAULT_AUT_ORDER_BOUND: u128 = 64;

/// A finite abelian group `Z/m1 x .. x Z/mk`, every `mi >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupSpec {
    moduli: Vec<u32>,
}

/// An element of a [`GroupSpec`]: one residue per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u32>,
}

impl GroupSpec {
    pub fn new(moduli: Vec<u32>) -> Result<GroupSpec> {
        if moduli.is_empty() {
            return Err(Error::structural("group spec needs at least one factor"));
        }
        if let Some(&m) = moduli.iter().find(|&&m| m < 2) {
            return Err(Error::structural(format!(
                "cyclic factor order {m} < 2; the group must be nontrivial"
            )));
        }
        Ok(GroupSpec { moduli })
    }

    /// Parse the textual form `2x2` (factor orders joined by `x`).
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let moduli = text
            .split('x')
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| Error::structural(format!("bad group factor {tok:?} in {text:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        GroupSpec::new(moduli)
    }

    pub fn moduli(&self) -> &[u32] {
        &self.moduli
    }

    pub fn factor_count(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().map(|&m| m as u64).product()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.coords.len() == self.moduli.len()
            && g.coords.iter().zip(&self.moduli).all(|(&c, &m)| c < m)
    }

    fn check_member(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "element {g} does not belong to group {self}"
            )))
        }
    }

    pub fn element(&self, coords: Vec<u32>) -> Result<GroupElement> {
        let g = GroupElement { coords };
        self.check_member(&g)?;
        Ok(g)
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_member(a)?;
        self.check_member(b)?;
        Ok(GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .zip(&self.moduli)
                .map(|((&x, &y), &m)| (x + y) % m)
                .collect(),
        })
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_member(a)?;
        Ok(GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&self.moduli)
                .map(|(&x, &m)| (m - x) % m)
                .collect(),
        })
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Position of `g` in the row-major enumeration of all elements.
    pub fn rank(&self, g: &GroupElement) -> u32 {
        let mut r = 0u64;
        for (&c, &m) in g.coords.iter().zip(&self.moduli) {
            r = r * m as u64 + c as u64;
        }
        r as u32
    }

    pub fn unrank(&self, mut r: u32) -> GroupElement {
        let mut coords = vec![0u32; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            coords[i] = r % self.moduli[i];
            r /= self.moduli[i];
        }
        GroupElement { coords }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as u32).map(|r| self.unrank(r))
    }

    /// Multiplicative order of `g`.
    pub fn element_order(&self, g: &GroupElement) -> u64 {
        let mut acc = g.clone();
        let mut k = 1u64;
        while !acc.is_zero() {
            acc = self.add(&acc, g).expect("element of own group");
            k += 1;
        }
        k
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.moduli.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", strs.join("x"))
    }
}

impl GroupElement {
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Parse the textual form `1,0` (residues joined by commas).
    pub fn parse(spec: &GroupSpec, text: &str) -> Result<GroupElement> {
        let coords = text
            .split(',')
            .map(|tok| {
                tok.parse::<u32>()
                    .map_err(|_| Error::structural(format!("bad group coordinate {tok:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        spec.element(coords)
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

/// `g` for even parity, `-g` for odd: the sign twist applied to labels by the
/// generalized inverse maps.
pub fn sign_scale(parity: Parity, spec: &GroupSpec, g: &GroupElement) -> Result<GroupElement> {
    match parity {
        Parity::Even => {
            spec.check_member(g)?;
            Ok(g.clone())
        }
        Parity::Odd => spec.neg(g),
    }
}

/// A homomorphism between two group specs stored as a full rank-to-rank
/// table. Isomorphisms and automorphisms are the bijective instances.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupMap {
    src: GroupSpec,
    dst: GroupSpec,
    table: Vec<u32>,
}

impl GroupMap {
    pub fn identity(spec: &GroupSpec) -> GroupMap {
        GroupMap {
            src: spec.clone(),
            dst: spec.clone(),
            table: (0..spec.order() as u32).collect(),
        }
    }

    /// Build from generator images; `gen_images[i]` is the image of the unit
    /// vector of factor `i`. Checks the map is a bijective homomorphism.
    pub fn from_generator_images(
        src: &GroupSpec,
        dst: &GroupSpec,
        gen_images: &[GroupElement],
    ) -> Result<GroupMap> {
        if gen_images.len() != src.factor_count() {
            return Err(Error::structural("one generator image per factor needed"));
        }
        let mut table = Vec::with_capacity(src.order() as usize);
        for g in src.elements() {
            let mut img = dst.zero();
            for (i, &c) in g.coords().iter().enumerate() {
                for _ in 0..c {
                    img = dst.add(&img, &gen_images[i])?;
                }
            }
            table.push(dst.rank(&img));
        }
        let map = GroupMap {
            src: src.clone(),
            dst: dst.clone(),
            table,
        };
        if !map.is_bijective() || !map.is_homomorphism() {
            return Err(Error::structural(
                "generator images do not induce an isomorphism",
            ));
        }
        Ok(map)
    }

    pub fn src(&self) -> &GroupSpec {
        &self.src
    }

    pub fn dst(&self) -> &GroupSpec {
        &self.dst
    }

    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        self.dst.unrank(self.table[self.src.rank(g) as usize])
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && self.table.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.table.len()];
        self.src.order() == self.dst.order()
            && self.table.iter().all(|&x| {
                let slot = &mut seen[x as usize];
                !std::mem::replace(slot, true)
            })
    }

    pub fn is_homomorphism(&self) -> bool {
        let elems: Vec<GroupElement> = self.src.elements().collect();
        for a in &elems {
            for b in &elems {
                let lhs = self.apply(&self.src.add(a, b).unwrap());
                let rhs = self.dst.add(&self.apply(a), &self.apply(b)).unwrap();
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &GroupMap) -> Result<GroupMap> {
        if other.dst != self.src {
            return Err(Error::structural("group map composition type mismatch"));
        }
        Ok(GroupMap {
            src: other.src.clone(),
            dst: self.dst.clone(),
            table: other
                .table
                .iter()
                .map(|&x| self.table[x as usize])
                .collect(),
        })
    }

    pub fn inverse(&self) -> GroupMap {
        let mut table = vec![0u32; self.table.len()];
        for (i, &x) in self.table.iter().enumerate() {
            table[x as usize] = i as u32;
        }
        GroupMap {
            src: self.dst.clone(),
            dst: self.src.clone(),
            table,
        }
    }
}

/// All isomorphisms `src -> dst`, complete and duplicate-free.
///
/// Candidates are generator-image assignments; a prefix is pruned unless the
/// span of the chosen images has exactly the order of the corresponding
/// sub-product, which is necessary for injectivity.
pub fn enumerate_group_isomorphisms(
    src: &GroupSpec,
    dst: &GroupSpec,
    order_bound: u128,
) -> Result<Vec<GroupMap>> {
    let order = src.order() as u128;
    if order > order_bound {
        return Err(Error::capacity("group order", order, order_bound));
    }
    if src.order() != dst.order() {
        return Ok(Vec::new());
    }
    let dst_elems: Vec<GroupElement> = dst.elements().collect();
    let mut images: Vec<GroupElement> = Vec::new();
    let mut out = Vec::new();
    choose_images(src, dst, &dst_elems, &mut images, &mut out)?;
    Ok(out)
}

fn span_order(spec: &GroupSpec, gens: &[GroupElement]) -> u64 {
    let mut span = std::collections::BTreeSet::new();
    span.insert(spec.zero());
    loop {
        let mut grew = false;
        let current: Vec<GroupElement> = span.iter().cloned().collect();
        for s in &current {
            for g in gens {
                if span.insert(spec.add(s, g).unwrap()) {
                    grew = true;
                }
            }
        }
        if !grew {
            return span.len() as u64;
        }
    }
}

fn choose_images(
    src: &GroupSpec,
    dst: &GroupSpec,
    dst_elems: &[GroupElement],
    images: &mut Vec<GroupElement>,
    out: &mut Vec<GroupMap>,
) -> Result<()> {
    let j = images.len();
    if j == src.factor_count() {
        if span_order(dst, images) == dst.order() {
            out.push(GroupMap::from_generator_images(src, dst, images)?);
        }
        return Ok(());
    }
    let m = src.moduli()[j] as u64;
    let prefix_order: u64 = src.moduli()[..=j].iter().map(|&x| x as u64).product();
    for cand in dst_elems {
        // well-definedness of e_j -> cand: the image must vanish at order m
        if dst.element_order(cand) > m || !m.is_multiple_of(dst.element_order(cand)) {
            continue;
        }
        images.push(cand.clone());
        if span_order(dst, images) == prefix_order {
            choose_images(src, dst, dst_elems, images, out)?;
        }
        images.pop();
    }
    Ok(())
}

/// All automorphisms of `spec`, complete and duplicate-free; requires
/// `spec.order() <= order_bound`.
pub fn enumerate_group_automorphisms(spec: &GroupSpec, order_bound: u128) -> Result<Vec<GroupMap>> {
    enumerate_group_isomorphisms(spec, spec, order_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u32) -> GroupSpec {
        GroupSpec::new(vec![m]).unwrap()
    }

    fn el(spec: &GroupSpec, coords: &[u32]) -> GroupElement {
        spec.element(coords.to_vec()).unwrap()
    }

    #[test]
    fn arith_examples() {
        let z3 = z(3);
        assert_eq!(z3.add(&el(&z3, &[1]), &el(&z3, &[2])).unwrap(), z3.zero());
        let z22 = GroupSpec::new(vec![2, 2]).unwrap();
        assert_eq!(z22.neg(&el(&z22, &[1, 0])).unwrap(), el(&z22, &[1, 0]));
        let z4 = z(4);
        assert_eq!(
            z4.add(&el(&z4, &[3]), &el(&z4, &[3])).unwrap(),
            el(&z4, &[2])
        );
    }

    #[test]
    fn arith_rejects_length_mismatch() {
        let z22 = GroupSpec::new(vec![2, 2]).unwrap();
        let z2 = z(2);
        let bad = z2.element(vec![1]).unwrap();
        assert!(z22.add(&z22.zero(), &bad).is_err());
    }

    #[test]
    fn trivial_factors_rejected() {
        assert!(GroupSpec::new(vec![1]).is_err());
        assert!(GroupSpec::new(vec![]).is_err());
        assert!(GroupSpec::new(vec![2, 1]).is_err());
    }

    #[test]
    fn sign_scale_examples() {
        let z3 = z(3);
        let one = el(&z3, &[1]);
        assert_eq!(sign_scale(Parity::Even, &z3, &one).unwrap(), one);
        assert_eq!(sign_scale(Parity::Odd, &z3, &one).unwrap(), el(&z3, &[2]));
        let z22 = GroupSpec::new(vec![2, 2]).unwrap();
        let d = el(&z22, &[1, 1]);
        assert_eq!(sign_scale(Parity::Odd, &z22, &d).unwrap(), d);
    }

    #[test]
    fn sign_scale_involution() {
        let z4 = z(4);
        for g in z4.elements() {
            let back =
                sign_scale(Parity::Odd, &z4, &sign_scale(Parity::Odd, &z4, &g).unwrap()).unwrap();
            assert_eq!(back, g);
        }
    }

    /// Independent oracle: all |G|^|G| unary tables filtered down to bijective
    /// homomorphisms. Only usable for very small groups.
    fn brute_force_aut_count(spec: &GroupSpec) -> usize {
        let n = spec.order() as usize;
        let elems: Vec<GroupElement> = spec.elements().collect();
        let mut count = 0usize;
        let total = (n as u64).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut table = Vec::with_capacity(n);
            for _ in 0..n {
                table.push((c % n as u64) as usize);
                c /= n as u64;
            }
            let mut seen = vec![false; n];
            if !table
                .iter()
                .all(|&x| !std::mem::replace(&mut seen[x], true))
            {
                continue;
            }
            let ok = elems.iter().enumerate().all(|(i, a)| {
                elems.iter().enumerate().all(|(j, b)| {
                    let sum = spec.add(a, b).unwrap();
                    let k = spec.rank(&sum) as usize;
                    let lhs = &elems[table[k]];
                    let rhs = spec.add(&elems[table[i]], &elems[table[j]]).unwrap();
                    *lhs == rhs
                })
            });
            if ok {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn automorphism_counts_against_brute_force() {
        let cases = [
            (GroupSpec::new(vec![2]).unwrap(), 1usize),
            (GroupSpec::new(vec![3]).unwrap(), 2),
            (GroupSpec::new(vec![2, 2]).unwrap(), 6), // |GL(2, F2)|
            (GroupSpec::new(vec![4]).unwrap(), 2),
        ];
        for (spec, expected) in cases {
            let auts = enumerate_group_automorphisms(&spec, DEFAULT_AUT_ORDER_BOUND).unwrap();
            assert_eq!(auts.len(), expected, "aut count for {spec}");
            assert_eq!(brute_force_aut_count(&spec), expected, "oracle for {spec}");
        }
    }

    #[test]
    fn automorphisms_form_a_group() {
        for spec in [
            GroupSpec::new(vec![2, 2]).unwrap(),
            GroupSpec::new(vec![6]).unwrap(),
            GroupSpec::new(vec![2, 4]).unwrap(),
        ] {
            let auts = enumerate_group_automorphisms(&spec, DEFAULT_AUT_ORDER_BOUND).unwrap();
            assert!(auts.contains(&GroupMap::identity(&spec)));
            for a in &auts {
                assert!(auts.contains(&a.inverse()));
                for b in &auts {
                    assert!(auts.contains(&a.compose(b).unwrap()));
                }
            }
            let mut tables: Vec<_> = auts.iter().map(|a| a.table.clone()).collect();
            tables.sort();
            tables.dedup();
            assert_eq!(tables.len(), auts.len());
        }
    }

    #[test]
    fn automorphism_bound_enforced() {
        let big = GroupSpec::new(vec![5, 5, 3]).unwrap(); // order 75 > 64
        assert!(matches!(
            enumerate_group_automorphisms(&big, DEFAULT_AUT_ORDER_BOUND),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn isomorphisms_between_distinct_specs() {
        let z4 = z(4);
        let z22 = GroupSpec::new(vec![2, 2]).unwrap();
        assert!(enumerate_group_isomorphisms(&z4, &z22, 64)
            .unwrap()
            .is_empty());
        let z6 = z(6);
        let z23 = GroupSpec::new(vec![2, 3]).unwrap();
        let isos = enumerate_group_isomorphisms(&z6, &z23, 64).unwrap();
        assert!(!isos.is_empty()); // Z/6 is isomorphic to Z/2 x Z/3
        for iso in &isos {
            assert!(iso.is_bijective() && iso.is_homomorphism());
        }
    }

    #[test]
    fn group_laws_exhaustive() {
        for spec in [
            GroupSpec::new(vec![2]).unwrap(),
            GroupSpec::new(vec![4]).unwrap(),
            GroupSpec::new(vec![2, 2]).unwrap(),
            GroupSpec::new(vec![3, 4]).unwrap(),
        ] {
            let elems: Vec<GroupElement> = spec.elements().collect();
            for a in &elems {
                assert_eq!(spec.add(a, &spec.zero()).unwrap(), *a);
                assert_eq!(spec.add(a, &spec.neg(a).unwrap()).unwrap(), spec.zero());
                for b in &elems {
                    assert_eq!(spec.add(a, b).unwrap(), spec.add(b, a).unwrap());
                    for c in &elems {
                        let ab_c = spec.add(&spec.add(a, b).unwrap(), c).unwrap();
                        let a_bc = spec.add(a, &spec.add(b, c).unwrap()).unwrap();
                        assert_eq!(ab_c, a_bc);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_unrank_roundtrip() {
        let spec = GroupSpec::new(vec![3, 4]).unwrap();
        for (i, g) in spec.elements().enumerate() {
            assert_eq!(spec.rank(&g) as usize, i);
            assert_eq!(spec.unrank(i as u32), g);
        }
    }
}
