//! Stars, solutions, and the star-based isomorphism machinery: construction
//! of the unique isomorphism matching two star solutions, automorphism
//! normal forms `(vertex permutation, group automorphism, star twist)`, the
//! automorphism census, and factorization over a pair of closures.

use std::collections::{BTreeMap, BTreeSet};

use crate::combo::combinations;
use crate::core::{Cell, Polygroupoid, Vertex};
use crate::error::{Error, Result};
use crate::filling::horn_fill;
use crate::group::{
    enumerate_group_automorphisms, enumerate_group_isomorphisms, GroupElement, GroupMap,
};
use crate::perm::Perm;

/// Default bound on the automorphism group order for the census.
pub const DEFAULT_CENSUS_BOUND: u128 = 10_000_000;

/// An n-star: all tuples `(center, b_1, .., b_{n-1})` with the tail strictly
/// increasing in the star's linear order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Star {
    center: Vertex,
    order: Vec<Vertex>,
    tuples: Vec<Vec<Vertex>>,
}

impl Star {
    /// A star from a linear order on all vertices; the first entry is the
    /// center.
    pub fn new(pg: &Polygroupoid, order: Vec<Vertex>) -> Result<Star> {
        let mut seen = BTreeSet::new();
        if order.len() != pg.vertex_count()
            || !order
                .iter()
                .all(|v| (v.0 as usize) < pg.vertex_count() && seen.insert(*v))
        {
            return Err(Error::structural(
                "star order must enumerate every vertex exactly once",
            ));
        }
        if order.len() < pg.n() {
            return Err(Error::precondition(format!(
                "stars need at least n = {} vertices",
                pg.n()
            )));
        }
        let center = order[0];
        let tails = combinations(&order[1..], pg.n() - 1);
        let tuples = tails
            .into_iter()
            .map(|tail| {
                let mut t = Vec::with_capacity(pg.n());
                t.push(center);
                t.extend(tail);
                t
            })
            .collect();
        Ok(Star {
            center,
            order,
            tuples,
        })
    }

    /// The default star: centered at the least vertex, ordered by the vertex
    /// table.
    pub fn default_star(pg: &Polygroupoid) -> Result<Star> {
        Star::new(pg, pg.vertices().collect())
    }

    /// A star centered at `center` whose order lists `priority` vertices
    /// right after the center (each ascending).
    pub fn adapted(pg: &Polygroupoid, center: Vertex, priority: &BTreeSet<Vertex>) -> Result<Star> {
        let mut order = vec![center];
        order.extend(priority.iter().copied().filter(|&v| v != center));
        order.extend(
            pg.vertices()
                .filter(|v| *v != center && !priority.contains(v)),
        );
        Star::new(pg, order)
    }

    pub fn center(&self) -> Vertex {
        self.center
    }

    pub fn tuples(&self) -> &[Vec<Vertex>] {
        &self.tuples
    }

    /// The star tuple with the same vertex set as `spine`, which must
    /// contain the center.
    pub fn tuple_for_set(&self, spine: &[Vertex]) -> Option<Vec<Vertex>> {
        if !spine.contains(&self.center) {
            return None;
        }
        let pos: BTreeMap<Vertex, usize> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut rest: Vec<Vertex> = spine
            .iter()
            .copied()
            .filter(|&v| v != self.center)
            .collect();
        rest.sort_by_key(|v| pos[v]);
        let mut t = Vec::with_capacity(spine.len());
        t.push(self.center);
        t.extend(rest);
        Some(t)
    }
}

/// A choice of one top cell over each star tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    values: BTreeMap<Vec<Vertex>, Cell>,
}

impl Solution {
    pub fn new(
        pg: &Polygroupoid,
        star: &Star,
        values: BTreeMap<Vec<Vertex>, Cell>,
    ) -> Result<Solution> {
        for u in star.tuples() {
            let cell = values
                .get(u)
                .ok_or_else(|| Error::structural("solution misses a star tuple"))?;
            if cell.level != pg.n() || &cell.spine != u || !pg.contains_cell(cell) {
                return Err(Error::structural("solution value is not over its tuple"));
            }
        }
        if values.len() != star.tuples().len() {
            return Err(Error::structural("solution keyed off the star"));
        }
        Ok(Solution { values })
    }

    /// Zero-label cells in standard law, least-index cells in explicit law.
    pub fn default_solution(pg: &Polygroupoid, star: &Star) -> Result<Solution> {
        let mut values = BTreeMap::new();
        for u in star.tuples() {
            values.insert(u.clone(), pg.default_cell(pg.n(), u)?);
        }
        Ok(Solution { values })
    }

    pub fn get(&self, u: &[Vertex]) -> Option<&Cell> {
        self.values.get(u)
    }

    pub fn shifted(
        &self,
        pg: &Polygroupoid,
        phi: &BTreeMap<Vec<Vertex>, GroupElement>,
    ) -> Result<Solution> {
        let mut values = BTreeMap::new();
        for (u, cell) in &self.values {
            let img = match phi.get(u) {
                Some(g) => pg.act(g, cell)?,
                None => cell.clone(),
            };
            values.insert(u.clone(), img);
        }
        Ok(Solution { values })
    }
}

/// A full structure map: vertex bijection, group isomorphism, and the
/// induced map on every cell. Certified to preserve projections, Q, the
/// action, and the inverse maps at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureMap {
    pub vmap: Vec<Vertex>,
    pub gmap: GroupMap,
    cell_map: BTreeMap<Cell, Cell>,
}

impl StructureMap {
    /// Assemble a map from raw parts without certification; callers verify
    /// with [`StructureMap::certify`].
    pub fn from_parts(
        vmap: Vec<Vertex>,
        gmap: GroupMap,
        cell_map: BTreeMap<Cell, Cell>,
    ) -> StructureMap {
        StructureMap {
            vmap,
            gmap,
            cell_map,
        }
    }

    pub fn apply_vertex(&self, v: Vertex) -> Vertex {
        self.vmap[v.0 as usize]
    }

    pub fn apply(&self, cell: &Cell) -> Result<Cell> {
        if cell.level == 1 {
            return Ok(Cell::vertex(self.apply_vertex(cell.spine[0])));
        }
        self.cell_map
            .get(cell)
            .cloned()
            .ok_or_else(|| Error::structural("cell outside the map's domain"))
    }

    pub fn apply_group(&self, g: &GroupElement) -> GroupElement {
        self.gmap.apply(g)
    }

    /// `self` after `other` (both must certify over matching structures).
    pub fn compose(&self, other: &StructureMap) -> Result<StructureMap> {
        let vmap = other
            .vmap
            .iter()
            .map(|&v| self.vmap[v.0 as usize])
            .collect();
        let gmap = self.gmap.compose(&other.gmap)?;
        let mut cell_map = BTreeMap::new();
        for (src, mid) in &other.cell_map {
            let dst = self
                .cell_map
                .get(mid)
                .ok_or_else(|| Error::structural("maps do not compose"))?;
            cell_map.insert(src.clone(), dst.clone());
        }
        Ok(StructureMap {
            vmap,
            gmap,
            cell_map,
        })
    }

    pub fn inverse(&self) -> StructureMap {
        let mut vmap = vec![Vertex(0); self.vmap.len()];
        for (i, &v) in self.vmap.iter().enumerate() {
            vmap[v.0 as usize] = Vertex(i as u32);
        }
        StructureMap {
            vmap,
            gmap: self.gmap.inverse(),
            cell_map: self
                .cell_map
                .iter()
                .map(|(a, b)| (b.clone(), a.clone()))
                .collect(),
        }
    }

    pub fn identity(pg: &Polygroupoid) -> Result<StructureMap> {
        Ok(StructureMap {
            vmap: pg.vertices().collect(),
            gmap: GroupMap::identity(pg.group()),
            cell_map: pg
                .all_cells()?
                .into_iter()
                .map(|c| (c.clone(), c))
                .collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.vmap.iter().enumerate().all(|(i, v)| v.0 as usize == i)
            && self.gmap.is_identity()
            && self.cell_map.iter().all(|(a, b)| a == b)
    }

    /// Full preservation certificate: sort bijections, projections, Q in
    /// both directions, the action, and the inverse maps.
    pub fn certify(&self, src: &Polygroupoid, dst: &Polygroupoid) -> Result<()> {
        if src.n() != dst.n() || src.vertex_count() != dst.vertex_count() {
            return Err(Error::structural("certify: sort sizes differ"));
        }
        let mut seen = vec![false; dst.vertex_count()];
        for &v in &self.vmap {
            if std::mem::replace(&mut seen[v.0 as usize], true) {
                return Err(Error::structural("certify: vertex map not bijective"));
            }
        }
        let src_cells = src.all_cells()?;
        let dst_cells: BTreeSet<Cell> = dst.all_cells()?.into_iter().collect();
        if src_cells.len() != dst_cells.len() || self.cell_map.len() != src_cells.len() {
            return Err(Error::structural("certify: cell counts differ"));
        }
        let mut images = BTreeSet::new();
        for c in &src_cells {
            let img = self.apply(c)?;
            if !dst_cells.contains(&img) || !images.insert(img.clone()) {
                return Err(Error::structural("certify: cell map not a sort bijection"));
            }
            // spine consistency and projection commuting
            let expected_spine: Vec<Vertex> =
                c.spine.iter().map(|&v| self.apply_vertex(v)).collect();
            if img.spine != expected_spine {
                return Err(Error::structural("certify: spine not respected"));
            }
            if c.level >= 2 {
                for j in 1..=c.level {
                    let lhs = self.apply(&src.project(c, j)?)?;
                    let rhs = dst.project(&img, j)?;
                    if lhs != rhs {
                        return Err(Error::structural("certify: projections not preserved"));
                    }
                }
            }
        }
        // Q in both directions (bijective, so counts settle the converse)
        let src_q = src.q_tuples()?;
        let dst_q = dst.q_tuples()?;
        if src_q.len() != dst_q.len() {
            return Err(Error::structural("certify: Q sizes differ"));
        }
        for tuple in &src_q {
            let mapped: Vec<Cell> = tuple.iter().map(|c| self.apply(c)).collect::<Result<_>>()?;
            if !dst.q_holds(&mapped)? {
                return Err(Error::structural("certify: Q not preserved"));
            }
        }
        // action and inverses on the top sort
        if src.has_action() && dst.has_action() {
            for c in src_cells.iter().filter(|c| c.level == src.n()) {
                for g in src.group().elements() {
                    let lhs = self.apply(&src.act(&g, c)?)?;
                    let rhs = dst.act(&self.gmap.apply(&g), &self.apply(c)?)?;
                    if lhs != rhs {
                        return Err(Error::structural("certify: action not preserved"));
                    }
                }
            }
        }
        if src.has_iota() && dst.has_iota() {
            for c in src_cells.iter().filter(|c| c.level == src.n()) {
                for sigma in Perm::all(src.n()) {
                    let lhs = self.apply(&src.iota(&sigma, c)?)?;
                    let rhs = dst.iota(&sigma, &self.apply(c)?)?;
                    if lhs != rhs {
                        return Err(Error::structural("certify: inverses not preserved"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn require_star_preconditions(pg: &Polygroupoid) -> Result<()> {
    if !pg.has_iota() {
        return Err(Error::precondition("inverse tables missing"));
    }
    if !pg.has_action() {
        return Err(Error::precondition("action tables missing"));
    }
    // intermediate fibers must be singletons for the star construction
    let verts: Vec<Vertex> = pg.vertices().collect();
    for level in 2..pg.n() {
        for w in crate::combo::ordered_tuples(&verts, level) {
            if pg.fiber_size(level, &w)? != 1 {
                return Err(Error::precondition(
                    "intermediate fibers must be singletons",
                ));
            }
        }
    }
    Ok(())
}

/// The permutation sending the star tuple `base` onto the ordered spine
/// `spine` under the active convention: position `i` of `base` lands at the
/// position of `base[i]` inside `spine`.
fn aligning_perm(base: &[Vertex], spine: &[Vertex]) -> Result<Perm> {
    let map = base
        .iter()
        .map(|v| {
            spine
                .iter()
                .position(|w| w == v)
                .ok_or_else(|| Error::structural("tuples are not permutations of each other"))
        })
        .collect::<Result<Vec<usize>>>()?;
    Perm::new(map)
}

/// Construct the unique isomorphism extending `vmap` and `gmap` that sends
/// the solution `s` to `s_star`, per the two-stage construction: cells over
/// tuples through the center via the inverse maps, the rest via Q.
pub fn star_isomorphism(
    src: &Polygroupoid,
    dst: &Polygroupoid,
    vmap: &[Vertex],
    gmap: &GroupMap,
    star: &Star,
    s: &Solution,
    s_star: &Solution,
) -> Result<StructureMap> {
    if src.n() != dst.n() {
        return Err(Error::precondition("arities differ"));
    }
    if src.vertex_count() < src.n() {
        return Err(Error::precondition("need |I| >= n"));
    }
    require_star_preconditions(src)?;
    require_star_preconditions(dst)?;
    if vmap.len() != src.vertex_count() || src.vertex_count() != dst.vertex_count() {
        return Err(Error::structural("vertex bijection has the wrong size"));
    }
    if gmap.src() != src.group() || gmap.dst() != dst.group() {
        return Err(Error::structural("group map does not match the structures"));
    }
    if !(gmap.is_bijective() && gmap.is_homomorphism()) {
        return Err(Error::structural("group map is not an isomorphism"));
    }
    // s_star must be a solution on the image star
    let image_star = {
        let order: Vec<Vertex> = {
            let mut o = Vec::with_capacity(vmap.len());
            for v in star.order.iter() {
                o.push(vmap[v.0 as usize]);
            }
            o
        };
        Star::new(dst, order).map_err(|_| Error::structural("image of the star is not a star"))?
    };
    for u in image_star.tuples() {
        let cell = s_star
            .get(u)
            .ok_or_else(|| Error::structural("target solution misses an image tuple"))?;
        if &cell.spine != u || !dst.contains_cell(cell) {
            return Err(Error::structural(
                "target solution value is not over its tuple",
            ));
        }
    }

    let n = src.n();
    let center = star.center();
    let mut cell_map: BTreeMap<Cell, Cell> = BTreeMap::new();

    // lower sorts: singleton fibers map spine-wise
    for c in src.all_cells()? {
        if c.level < n {
            let spine: Vec<Vertex> = c.spine.iter().map(|&v| vmap[v.0 as usize]).collect();
            cell_map.insert(c.clone(), dst.default_cell(c.level, &spine)?);
        }
    }

    // stage one: fibers over tuples through the center, via inverse maps
    let tops: Vec<Cell> = src
        .all_cells()?
        .into_iter()
        .filter(|c| c.level == n)
        .collect();
    for f in tops.iter().filter(|f| f.spine.contains(&center)) {
        let base = star
            .tuple_for_set(&f.spine)
            .expect("spine contains the center");
        let sigma = aligning_perm(&base, &f.spine)?;
        let anchor = src.iota(&sigma, s.get(&base).expect("solution total"))?;
        debug_assert_eq!(anchor.spine, f.spine);
        let g = src.diff(f, &anchor)?;
        let image_base: Vec<Vertex> = base.iter().map(|&v| vmap[v.0 as usize]).collect();
        let target_anchor = dst.iota(&sigma, s_star.get(&image_base).expect("validated"))?;
        let img = dst.act(&gmap.apply(&g), &target_anchor)?;
        cell_map.insert(f.clone(), img);
    }

    // stage two: fibers missing the center, via Q against stage one
    for f in tops.iter().filter(|f| !f.spine.contains(&center)) {
        // ground tuple (center, c_1, .., c_n); the face at position j+1 is
        // over the spine with c_j replaced by the center
        let mut faces: Vec<Option<Cell>> = vec![Some(f.clone())];
        for j in 1..=n {
            if j < n {
                let mut spine = vec![center];
                for (k, &v) in f.spine.iter().enumerate() {
                    if k + 1 != j {
                        spine.push(v);
                    }
                }
                faces.push(Some(src.default_cell(n, &spine)?));
            } else {
                faces.push(None);
            }
        }
        let last = horn_fill(src, &faces)?;
        faces[n] = Some(last);
        // map the known faces and fill position 1 in the target
        let mut target_faces: Vec<Option<Cell>> = vec![None];
        for face in faces.iter().skip(1) {
            let c = face.as_ref().expect("filled above");
            let img = cell_map
                .get(c)
                .cloned()
                .ok_or_else(|| Error::structural("stage one misses a face"))?;
            target_faces.push(Some(img));
        }
        let img = horn_fill(dst, &target_faces)?;
        cell_map.insert(f.clone(), img);
    }

    let map = StructureMap {
        vmap: vmap.to_vec(),
        gmap: gmap.clone(),
        cell_map,
    };
    map.certify(src, dst)?;
    Ok(map)
}

/// Canonical normal form of an automorphism: a vertex permutation, a group
/// automorphism, and the twist of the default star solution.
///
/// The represented map is the unique automorphism with `chi(s0(u)) =
/// default(vperm(u)) + tmap(u)` extending `vperm` and `gaut`, where `s0` is
/// the default solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismRep {
    pub vperm: Perm,
    pub gaut: GroupMap,
    pub tmap: BTreeMap<Vec<Vertex>, GroupElement>,
}

impl AutomorphismRep {
    pub fn identity(pg: &Polygroupoid) -> Result<AutomorphismRep> {
        let star = Star::default_star(pg)?;
        let tmap = star
            .tuples()
            .iter()
            .map(|u| (u.clone(), pg.group().zero()))
            .collect();
        Ok(AutomorphismRep {
            vperm: Perm::identity(pg.vertex_count()),
            gaut: GroupMap::identity(pg.group()),
            tmap,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.vperm.is_identity()
            && self.gaut.is_identity()
            && self.tmap.values().all(|g| g.is_zero())
    }

    /// Materialize the automorphism as a certified structure map.
    pub fn to_map(&self, pg: &Polygroupoid) -> Result<StructureMap> {
        let star = Star::default_star(pg)?;
        let s = Solution::default_solution(pg, &star)?;
        let vmap: Vec<Vertex> = (0..pg.vertex_count())
            .map(|i| Vertex(self.vperm.apply(i) as u32))
            .collect();
        let mut values = BTreeMap::new();
        for u in star.tuples() {
            let key: Vec<Vertex> = u.iter().map(|&v| vmap[v.0 as usize]).collect();
            let t = self
                .tmap
                .get(u)
                .ok_or_else(|| Error::structural("twist misses a star tuple"))?;
            values.insert(key.clone(), pg.act(t, &pg.default_cell(pg.n(), &key)?)?);
        }
        let s_star = Solution { values };
        star_isomorphism(pg, pg, &vmap, &self.gaut, &star, &s, &s_star)
    }

    /// Normalize a certified automorphism into the canonical triple.
    pub fn from_map(pg: &Polygroupoid, map: &StructureMap) -> Result<AutomorphismRep> {
        let star = Star::default_star(pg)?;
        let s = Solution::default_solution(pg, &star)?;
        let vperm = Perm::new(map.vmap.iter().map(|v| v.0 as usize).collect())?;
        let mut tmap = BTreeMap::new();
        for u in star.tuples() {
            let img = map.apply(s.get(u).expect("default solution total"))?;
            let anchor = pg.default_cell(pg.n(), &img.spine)?;
            tmap.insert(u.clone(), pg.diff(&img, &anchor)?);
        }
        Ok(AutomorphismRep {
            vperm,
            gaut: map.gmap.clone(),
            tmap,
        })
    }

    pub fn compose(&self, pg: &Polygroupoid, other: &AutomorphismRep) -> Result<AutomorphismRep> {
        let m = self.to_map(pg)?.compose(&other.to_map(pg)?)?;
        AutomorphismRep::from_map(pg, &m)
    }

    pub fn inverse(&self, pg: &Polygroupoid) -> Result<AutomorphismRep> {
        AutomorphismRep::from_map(pg, &self.to_map(pg)?.inverse())
    }

    /// Exact identity key for census bookkeeping.
    fn key(&self) -> RepKey {
        let spec = self.gaut.src();
        (
            self.vperm.images().to_vec(),
            (0..spec.order() as u32)
                .map(|r| spec.rank(&self.gaut.apply(&spec.unrank(r))))
                .collect(),
            self.tmap.values().map(|g| spec.rank(g)).collect(),
        )
    }
}

/// The unique automorphism fixing `I` and `G` pointwise whose star-solution
/// shift is `phi` (zero off the given keys).
pub fn automorphism_from_star(
    pg: &Polygroupoid,
    star: &Star,
    phi: &BTreeMap<Vec<Vertex>, GroupElement>,
) -> Result<AutomorphismRep> {
    for u in phi.keys() {
        if !star.tuples().contains(u) {
            return Err(Error::structural("twist keyed off the star"));
        }
    }
    let s = Solution::default_solution(pg, star)?;
    let s_star = s.shifted(pg, phi)?;
    let vmap: Vec<Vertex> = pg.vertices().collect();
    let map = star_isomorphism(
        pg,
        pg,
        &vmap,
        &GroupMap::identity(pg.group()),
        star,
        &s,
        &s_star,
    )?;
    AutomorphismRep::from_map(pg, &map)
}

/// Extend a vertex permutation to an automorphism fixing `G` pointwise; the
/// canonical choice matches the default solution onto default cells over the
/// image tuples.
pub fn lift_vertex_permutation(pg: &Polygroupoid, vperm: &Perm) -> Result<AutomorphismRep> {
    let star = Star::default_star(pg)?;
    lift_with_star(pg, &star, vperm, &GroupMap::identity(pg.group()))
}

/// Lift through an arbitrary star: the produced automorphism fixes every
/// cell whose support is inside an initial segment of the star order that
/// `vperm` fixes pointwise.
pub fn lift_with_star(
    pg: &Polygroupoid,
    star: &Star,
    vperm: &Perm,
    gaut: &GroupMap,
) -> Result<AutomorphismRep> {
    if vperm.len() != pg.vertex_count() {
        return Err(Error::structural("vertex permutation has the wrong size"));
    }
    let vmap: Vec<Vertex> = (0..pg.vertex_count())
        .map(|i| Vertex(vperm.apply(i) as u32))
        .collect();
    let s = Solution::default_solution(pg, star)?;
    let mut values = BTreeMap::new();
    for u in star.tuples() {
        let key: Vec<Vertex> = u.iter().map(|&v| vmap[v.0 as usize]).collect();
        values.insert(key.clone(), pg.default_cell(pg.n(), &key)?);
    }
    let s_star = Solution { values };
    let map = star_isomorphism(pg, pg, &vmap, gaut, star, &s, &s_star)?;
    AutomorphismRep::from_map(pg, &map)
}

/// Star-based isomorphism test: equal vertex counts and isomorphic groups
/// produce an isomorphism directly; mismatched invariants return `None`.
pub fn is_isomorphic(src: &Polygroupoid, dst: &Polygroupoid) -> Result<Option<StructureMap>> {
    if src.n() != dst.n() || src.vertex_count() != dst.vertex_count() {
        return Ok(None);
    }
    let isos = enumerate_group_isomorphisms(
        src.group(),
        dst.group(),
        crate::group::DEFAULT_AUT_ORDER_BOUND,
    )?;
    let Some(gmap) = isos.into_iter().next() else {
        return Ok(None);
    };
    let star = Star::default_star(src)?;
    let s = Solution::default_solution(src, &star)?;
    let vmap: Vec<Vertex> = dst.vertices().collect();
    let mut values = BTreeMap::new();
    for u in star.tuples() {
        let key: Vec<Vertex> = u.iter().map(|&v| vmap[v.0 as usize]).collect();
        values.insert(key.clone(), dst.default_cell(dst.n(), &key)?);
    }
    let s_star = Solution { values };
    let map = star_isomorphism(src, dst, &vmap, &gmap, &star, &s, &s_star).map_err(|e| {
        Error::precondition(format!(
            "star construction failed ({e}); both inputs must be connected \
             polygroupoids with inverses (see check --inverses)"
        ))
    })?;
    Ok(Some(map))
}

/// Census of the automorphism group: the closed-form order, the normal
/// series orders, and a verification that the generators produce exactly
/// that many distinct automorphisms.
#[derive(Clone, Debug)]
pub struct CensusReport {
    pub star_size: usize,
    pub order: u128,
    pub gamma1_order: u128,
    pub gamma2_order: u128,
    pub aut_g_order: u64,
    pub sym_i_order: u128,
    pub generated_order: u128,
    pub gamma2_generated: u128,
    pub gamma1_generated: u128,
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// Enumerate the full automorphism group from its generators (star twists on
/// a basis, lifts of adjacent transpositions, lifts of group automorphisms).
pub fn enumerate_automorphisms(pg: &Polygroupoid, bound: u128) -> Result<Vec<AutomorphismRep>> {
    let star = Star::default_star(pg)?;
    let star_size = star.tuples().len();
    let auts = enumerate_group_automorphisms(pg.group(), crate::group::DEFAULT_AUT_ORDER_BOUND)?;
    let predicted = factorial(pg.vertex_count())
        .saturating_mul(auts.len() as u128)
        .saturating_mul((pg.group().order() as u128).saturating_pow(star_size as u32));
    if predicted > bound {
        return Err(Error::capacity(
            "automorphism group order",
            predicted,
            bound,
        ));
    }
    let mut generators: Vec<AutomorphismRep> = Vec::new();
    // star twists on a basis of phi's
    for u in star.tuples() {
        for (i, &m) in pg.group().moduli().iter().enumerate() {
            let _ = m;
            let mut coords = vec![0u32; pg.group().moduli().len()];
            coords[i] = 1;
            let mut phi = BTreeMap::new();
            phi.insert(u.clone(), pg.group().element(coords)?);
            generators.push(automorphism_from_star(pg, &star, &phi)?);
        }
    }
    // lifts of adjacent vertex transpositions
    for i in 0..pg.vertex_count() - 1 {
        let t = Perm::transposition(pg.vertex_count(), i, i + 1);
        generators.push(lift_vertex_permutation(pg, &t)?);
    }
    // lifts of group automorphisms
    for gaut in &auts {
        if gaut.is_identity() {
            continue;
        }
        let star0 = Star::default_star(pg)?;
        generators.push(lift_with_star(
            pg,
            &star0,
            &Perm::identity(pg.vertex_count()),
            gaut,
        )?);
    }
    // breadth-first closure; compose the materialized maps (cheap) and
    // normalize back into the triple form only for bookkeeping
    let gen_maps: Vec<StructureMap> = generators
        .iter()
        .map(|g| g.to_map(pg))
        .collect::<Result<_>>()?;
    let mut seen: BTreeMap<RepKey, AutomorphismRep> = BTreeMap::new();
    let id = AutomorphismRep::identity(pg)?;
    let id_map = StructureMap::identity(pg)?;
    seen.insert(id.key(), id);
    let mut frontier = vec![id_map];
    while let Some(cur) = frontier.pop() {
        for gen_map in &gen_maps {
            let next_map = gen_map.compose(&cur)?;
            let next = AutomorphismRep::from_map(pg, &next_map)?;
            let key = next.key();
            if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(key) {
                e.insert(next);
                frontier.push(next_map);
            }
        }
    }
    Ok(seen.into_values().collect())
}

pub fn automorphism_census(pg: &Polygroupoid, bound: u128) -> Result<CensusReport> {
    let star = Star::default_star(pg)?;
    let star_size = star.tuples().len();
    let auts = enumerate_group_automorphisms(pg.group(), crate::group::DEFAULT_AUT_ORDER_BOUND)?;
    let m = pg.vertex_count();
    let g_order = pg.group().order() as u128;
    let gamma2_order = g_order.saturating_pow(star_size as u32);
    let gamma1_order = gamma2_order.saturating_mul(auts.len() as u128);
    let order = gamma1_order.saturating_mul(factorial(m));
    let elements = enumerate_automorphisms(pg, bound)?;
    let generated_order = elements.len() as u128;
    let gamma1_generated = elements.iter().filter(|a| a.vperm.is_identity()).count() as u128;
    let gamma2_generated = elements
        .iter()
        .filter(|a| a.vperm.is_identity() && a.gaut.is_identity())
        .count() as u128;
    Ok(CensusReport {
        star_size,
        order,
        gamma1_order,
        gamma2_order,
        aut_g_order: auts.len() as u64,
        sym_i_order: factorial(m),
        generated_order,
        gamma2_generated,
        gamma1_generated,
    })
}

impl CensusReport {
    /// Generators produced exactly the predicted group and normal series.
    pub fn verified(&self) -> bool {
        self.generated_order == self.order
            && self.gamma1_generated == self.gamma1_order
            && self.gamma2_generated == self.gamma2_order
    }
}

/// Exact identity of an automorphism: vertex images, group table, twists.
type RepKey = (Vec<usize>, Vec<u32>, Vec<u32>);

/// Which closure a factor fixes pointwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedSide {
    A,
    B,
}

/// `sigma = sigma_b . sigma_a . tau` with `sigma_a` fixing `cl(A)`,
/// `sigma_b` fixing `cl(B)`, and every `tau` factor fixing one of the two.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub tau: Vec<(AutomorphismRep, FixedSide)>,
    pub sigma_a: AutomorphismRep,
    pub sigma_b: AutomorphismRep,
}

/// Factor an automorphism fixing `cl(A) \cap cl(B)` pointwise into the
/// composition `sigma_b . sigma_a . tau`. The group automorphism component
/// must be the identity (automorphisms over constants for `G`).
pub fn factor_automorphism(
    pg: &Polygroupoid,
    a_verts: &BTreeSet<Vertex>,
    b_verts: &BTreeSet<Vertex>,
    sigma: &AutomorphismRep,
) -> Result<Factorization> {
    if !sigma.gaut.is_identity() {
        return Err(Error::precondition(
            "factorization works over constants for G: the group component must be the identity",
        ));
    }
    let map = sigma.to_map(pg)?;
    // the intersection closure must be fixed pointwise
    let common: BTreeSet<Vertex> = a_verts.intersection(b_verts).copied().collect();
    for &v in &common {
        if map.apply_vertex(v) != v {
            return Err(Error::precondition(
                "sigma moves a vertex of the intersection",
            ));
        }
    }
    let cl_common = pg.closure_of_verts(&common)?;
    for c in &cl_common.cells {
        if &map.apply(c)? != c {
            return Err(Error::precondition(
                "sigma moves a cell of the intersection closure",
            ));
        }
    }

    // factor the vertex permutation into transpositions, each avoiding A or B
    let vp = &sigma.vperm;
    let mut transpositions: Vec<(Vertex, Vertex)> = Vec::new();
    {
        let mut visited = vec![false; vp.len()];
        for start in 0..vp.len() {
            if visited[start] || vp.apply(start) == start {
                visited[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut cur = vp.apply(start);
            while cur != start {
                visited[cur] = true;
                cycle.push(cur);
                cur = vp.apply(cur);
            }
            // (c1 .. ck) = (c1 ck)(c1 c_{k-1}) .. (c1 c2)
            for i in (1..cycle.len()).rev() {
                transpositions.push((Vertex(cycle[0] as u32), Vertex(cycle[i] as u32)));
            }
        }
    }
    let spare = pg
        .vertices()
        .find(|v| !a_verts.contains(v) && !b_verts.contains(v));
    let star_a = Star::adapted(pg, pick_center(pg, a_verts, &common), a_verts)?;
    let star_b = Star::adapted(pg, pick_center(pg, b_verts, &common), b_verts)?;
    let mut tau: Vec<(AutomorphismRep, FixedSide)> = Vec::new();
    let route = |x: Vertex, y: Vertex, tau: &mut Vec<(AutomorphismRep, FixedSide)>| -> Result<()> {
        let t = Perm::transposition(pg.vertex_count(), x.0 as usize, y.0 as usize);
        if !a_verts.contains(&x) && !a_verts.contains(&y) {
            tau.push((
                lift_with_star(pg, &star_a, &t, &GroupMap::identity(pg.group()))?,
                FixedSide::A,
            ));
        } else if !b_verts.contains(&x) && !b_verts.contains(&y) {
            tau.push((
                lift_with_star(pg, &star_b, &t, &GroupMap::identity(pg.group()))?,
                FixedSide::B,
            ));
        } else {
            return Err(Error::structural("unroutable transposition"));
        }
        Ok(())
    };
    for (x, y) in transpositions {
        let direct_a = !a_verts.contains(&x) && !a_verts.contains(&y);
        let direct_b = !b_verts.contains(&x) && !b_verts.contains(&y);
        if direct_a || direct_b {
            route(x, y, &mut tau)?;
        } else {
            // x and y sit on opposite sides; route through a spare vertex
            let c = spare.ok_or_else(|| {
                Error::precondition(
                    "no vertex outside both closures: the permutation cannot be factored",
                )
            })?;
            route(x, c, &mut tau)?;
            route(y, c, &mut tau)?;
            route(x, c, &mut tau)?;
        }
    }
    // compose tau factors in application order: tau = t_k . .. . t_1 must
    // reproduce vperm, where t_1 was pushed first
    let mut tau_map = StructureMap::identity(pg)?;
    for (factor, _) in &tau {
        tau_map = factor.to_map(pg)?.compose(&tau_map)?;
    }
    if Perm::new(tau_map.vmap.iter().map(|v| v.0 as usize).collect())? != sigma.vperm {
        // transposition order: (c1 ck)..(c1 c2) composes left-to-right; our
        // push order already matches, so a mismatch is a bug
        return Err(Error::structural(
            "tau does not realize the vertex permutation",
        ));
    }

    // sigma_tilde = sigma . tau^{-1} fixes I and G pointwise
    let tilde = map.compose(&tau_map.inverse())?;
    let center = pick_center(pg, a_verts, &common);
    let star = Star::adapted(pg, center, &common)?;
    let mut t_a: BTreeMap<Vec<Vertex>, GroupElement> = BTreeMap::new();
    let mut t_b: BTreeMap<Vec<Vertex>, GroupElement> = BTreeMap::new();
    for u in star.tuples() {
        let base = pg.default_cell(pg.n(), u)?;
        let img = tilde.apply(&base)?;
        let t = pg.diff(&img, &base)?;
        let tail_in_a = u[1..].iter().all(|v| a_verts.contains(v));
        if tail_in_a {
            t_b.insert(u.clone(), t);
        } else {
            t_a.insert(u.clone(), t);
        }
    }
    let sigma_a = automorphism_from_star(pg, &star, &t_a)?;
    let sigma_b = automorphism_from_star(pg, &star, &t_b)?;

    // verify the closures are fixed and the composition reproduces sigma
    let cl_a = pg.closure_of_verts(a_verts)?;
    let cl_b = pg.closure_of_verts(b_verts)?;
    let map_a = sigma_a.to_map(pg)?;
    let map_b = sigma_b.to_map(pg)?;
    for c in &cl_a.cells {
        if &map_a.apply(c)? != c {
            return Err(Error::structural("sigma_a moves cl(A)"));
        }
    }
    for c in &cl_b.cells {
        if &map_b.apply(c)? != c {
            return Err(Error::structural("sigma_b moves cl(B)"));
        }
    }
    let recomposed = map_b.compose(&map_a)?.compose(&tau_map)?;
    if recomposed != map {
        return Err(Error::structural("factorization does not recompose"));
    }
    Ok(Factorization {
        tau,
        sigma_a,
        sigma_b,
    })
}

fn pick_center(pg: &Polygroupoid, a_verts: &BTreeSet<Vertex>, common: &BTreeSet<Vertex>) -> Vertex {
    common
        .iter()
        .next()
        .or_else(|| a_verts.iter().next())
        .copied()
        .unwrap_or_else(|| pg.vertices().next().expect("nonempty structure"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::standard::build_standard;

    fn z(m: u32) -> GroupSpec {
        GroupSpec::new(vec![m]).unwrap()
    }

    #[test]
    fn star_tuple_count() {
        let pg = build_standard(3, z(2), 5).unwrap();
        let star = Star::default_star(&pg).unwrap();
        assert_eq!(star.tuples().len(), 6); // C(4, 2)
        for u in star.tuples() {
            assert_eq!(u[0], star.center());
            assert!(u[1..].windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn identity_inputs_give_identity_map() {
        let pg = build_standard(2, z(2), 4).unwrap();
        let star = Star::default_star(&pg).unwrap();
        let s = Solution::default_solution(&pg, &star).unwrap();
        let vmap: Vec<Vertex> = pg.vertices().collect();
        let map = star_isomorphism(
            &pg,
            &pg,
            &vmap,
            &GroupMap::identity(pg.group()),
            &star,
            &s,
            &s,
        )
        .unwrap();
        assert!(map.is_identity());
    }

    #[test]
    fn shifted_solution_gives_gamma2_automorphism() {
        let pg = build_standard(2, z(2), 4).unwrap();
        let star = Star::default_star(&pg).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let u0 = star.tuples()[0].clone();
        let mut phi = BTreeMap::new();
        phi.insert(u0.clone(), one.clone());
        let rep = automorphism_from_star(&pg, &star, &phi).unwrap();
        assert!(rep.vperm.is_identity());
        assert!(rep.gaut.is_identity());
        assert!(!rep.is_identity());
        let map = rep.to_map(&pg).unwrap();
        // fixes I and G, moves exactly the cells it should over u0
        for v in pg.vertices() {
            assert_eq!(map.apply_vertex(v), v);
        }
        for f in pg.fiber(2, &u0).unwrap() {
            assert_eq!(map.apply(&f).unwrap(), pg.act(&one, &f).unwrap());
        }
    }

    #[test]
    fn zero_twist_is_identity_and_twists_compose() {
        for (g, m) in [(z(2), 4), (z(3), 3)] {
            check_gamma2_group_structure(g, m);
        }
    }

    fn check_gamma2_group_structure(g: GroupSpec, m: usize) {
        let pg = build_standard(2, g, m).unwrap();
        let star = Star::default_star(&pg).unwrap();
        let zero_rep = automorphism_from_star(&pg, &star, &BTreeMap::new()).unwrap();
        assert!(zero_rep.is_identity());

        // chi_phi . chi_psi = chi_{phi+psi}, exhaustively over G^S
        let tuples = star.tuples().to_vec();
        let assignments: Vec<Vec<u32>> = {
            let mut out = Vec::new();
            let total = pg.group().order().pow(tuples.len() as u32);
            for code in 0..total {
                let mut c = code;
                let mut digits = Vec::new();
                for _ in 0..tuples.len() {
                    digits.push((c % pg.group().order()) as u32);
                    c /= pg.group().order();
                }
                out.push(digits);
            }
            out
        };
        let reps: Vec<(Vec<u32>, AutomorphismRep)> = assignments
            .iter()
            .map(|digits| {
                let phi: BTreeMap<Vec<Vertex>, GroupElement> = tuples
                    .iter()
                    .zip(digits)
                    .map(|(u, &d)| (u.clone(), pg.group().unrank(d)))
                    .collect();
                (
                    digits.clone(),
                    automorphism_from_star(&pg, &star, &phi).unwrap(),
                )
            })
            .collect();
        // injective parameterization
        for (i, (_, a)) in reps.iter().enumerate() {
            for (_, b) in reps.iter().skip(i + 1) {
                assert_ne!(a, b);
            }
        }
        for (da, a) in &reps {
            for (db, b) in &reps {
                let composed = a.compose(&pg, b).unwrap();
                let sum: Vec<u32> = da
                    .iter()
                    .zip(db)
                    .map(|(&x, &y)| {
                        pg.group().rank(
                            &pg.group()
                                .add(&pg.group().unrank(x), &pg.group().unrank(y))
                                .unwrap(),
                        )
                    })
                    .collect();
                let expected = reps
                    .iter()
                    .find(|(d, _)| *d == sum)
                    .map(|(_, r)| r.clone())
                    .unwrap();
                assert_eq!(composed, expected);
            }
        }
    }

    #[test]
    fn lift_examples() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let id = lift_vertex_permutation(&pg, &Perm::identity(3)).unwrap();
        assert!(id.is_identity());
        let t = Perm::transposition(3, 0, 1);
        let lift = lift_vertex_permutation(&pg, &t).unwrap();
        assert_eq!(lift.vperm, t);
        assert!(lift.gaut.is_identity());
        // lift(vp)^{-1} agrees with lift(vp^{-1}) modulo the star twists
        let inv = lift.inverse(&pg).unwrap();
        let lift_inv = lift_vertex_permutation(&pg, &t.inverse()).unwrap();
        assert_eq!(inv.vperm, lift_inv.vperm);
        assert!(inv.gaut.is_identity());
        let quotient = inv.compose(&pg, &lift_inv.inverse(&pg).unwrap()).unwrap();
        assert!(quotient.vperm.is_identity() && quotient.gaut.is_identity());
    }

    #[test]
    fn is_isomorphic_invariants() {
        let a = build_standard(2, z(3), 5).unwrap();
        let b = build_standard(2, z(3), 5).unwrap();
        let map = is_isomorphic(&a, &b).unwrap().expect("categorical");
        map.certify(&a, &b).unwrap();

        let z4 = build_standard(2, z(4), 4).unwrap();
        let z22 = build_standard(2, GroupSpec::new(vec![2, 2]).unwrap(), 4).unwrap();
        assert!(is_isomorphic(&z4, &z22).unwrap().is_none());

        let small = build_standard(2, z(2), 4).unwrap();
        let large = build_standard(2, z(2), 5).unwrap();
        assert!(is_isomorphic(&small, &large).unwrap().is_none());
    }

    #[test]
    fn standard_vs_explicit_copy_isomorphic() {
        let a = build_standard(2, z(2), 4).unwrap();
        let b = a.to_explicit().unwrap();
        let map = is_isomorphic(&a, &b).unwrap().expect("same structure");
        map.certify(&a, &b).unwrap();
        // symmetry: the inverse certifies in the other direction
        map.inverse().certify(&b, &a).unwrap();
        // reflexivity
        let selfmap = is_isomorphic(&a, &a).unwrap().expect("reflexive");
        selfmap.certify(&a, &a).unwrap();
    }

    #[test]
    fn census_small_orders() {
        let cases: [(usize, GroupSpec, usize, u128); 2] = [(2, z(2), 3, 24), (2, z(3), 3, 108)];
        for (n, g, m, expected) in cases {
            let pg = build_standard(n, g, m).unwrap();
            let report = automorphism_census(&pg, DEFAULT_CENSUS_BOUND).unwrap();
            assert_eq!(report.order, expected, "census at n={n}, m={m}");
            assert!(report.verified());
        }
    }

    #[test]
    fn census_capacity() {
        let pg = build_standard(2, z(4), 6).unwrap();
        // 6! * 2 * 4^5 = 1474560 > 10^5
        assert!(matches!(
            automorphism_census(&pg, 100_000),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn factor_identity() {
        let pg = build_standard(2, z(2), 5).unwrap();
        let a: BTreeSet<Vertex> = [Vertex(0), Vertex(1)].into_iter().collect();
        let b: BTreeSet<Vertex> = [Vertex(1), Vertex(2)].into_iter().collect();
        let id = AutomorphismRep::identity(&pg).unwrap();
        let f = factor_automorphism(&pg, &a, &b, &id).unwrap();
        assert!(f.tau.is_empty());
        assert!(f.sigma_a.is_identity());
        assert!(f.sigma_b.is_identity());
    }

    #[test]
    fn factor_gamma2_splits_twist() {
        let pg = build_standard(2, z(2), 5).unwrap();
        let a: BTreeSet<Vertex> = [Vertex(0), Vertex(1)].into_iter().collect();
        let b: BTreeSet<Vertex> = [Vertex(0), Vertex(2)].into_iter().collect();
        // a Gamma_2 element supported away from cl(A) and cl(B)
        let star = Star::adapted(&pg, Vertex(0), &a.intersection(&b).copied().collect()).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let mut phi = BTreeMap::new();
        phi.insert(vec![Vertex(0), Vertex(3)], one.clone());
        phi.insert(vec![Vertex(0), Vertex(4)], one.clone());
        let sigma = automorphism_from_star(&pg, &star, &phi).unwrap();
        let f = factor_automorphism(&pg, &a, &b, &sigma).unwrap();
        assert!(f.tau.is_empty());
        // recomposition is checked internally; both parts are Gamma_2
        assert!(f.sigma_a.vperm.is_identity() && f.sigma_b.vperm.is_identity());
    }

    #[test]
    fn factor_outside_transposition() {
        let pg = build_standard(2, z(2), 5).unwrap();
        let a: BTreeSet<Vertex> = [Vertex(0)].into_iter().collect();
        let b: BTreeSet<Vertex> = [Vertex(1)].into_iter().collect();
        // transposition moving only vertices outside both closures
        let t = Perm::transposition(5, 3, 4);
        let sigma = lift_vertex_permutation(&pg, &t).unwrap();
        let f = factor_automorphism(&pg, &a, &b, &sigma).unwrap();
        assert!(!f.tau.is_empty());
    }

    #[test]
    fn factor_rejects_moved_intersection() {
        let pg = build_standard(2, z(2), 5).unwrap();
        let a: BTreeSet<Vertex> = [Vertex(0), Vertex(1)].into_iter().collect();
        let b: BTreeSet<Vertex> = [Vertex(1), Vertex(2)].into_iter().collect();
        let t = Perm::transposition(5, 1, 4); // moves the shared vertex
        let sigma = lift_vertex_permutation(&pg, &t).unwrap();
        assert!(matches!(
            factor_automorphism(&pg, &a, &b, &sigma),
            Err(Error::Precondition(_))
        ));
    }
}
