//! Constructive horn filling: maximal compatible systems, simplex families,
//! the defect calculus, and the `Q_g` twist.

use std::collections::{BTreeMap, BTreeSet};

use crate::combo::{deleted, mixed_radix_for_each, ordered_tuples};
use crate::core::{Cell, Polygroupoid, Vertex};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use rayon::prelude::*;

/// Default budget on the number of simplex families scanned while certifying
/// defect constancy.
pub const DEFAULT_FAMILY_BUDGET: u64 = 256_000_000;

/// Per-level cell sets closed under projections with at most one cell per
/// fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibleSystem {
    verts: BTreeSet<Vertex>,
    layers: BTreeMap<usize, BTreeSet<Cell>>,
}

impl CompatibleSystem {
    /// Validate and wrap explicit layers.
    pub fn new(
        pg: &Polygroupoid,
        verts: BTreeSet<Vertex>,
        layers: BTreeMap<usize, BTreeSet<Cell>>,
    ) -> Result<CompatibleSystem> {
        let sys = CompatibleSystem { verts, layers };
        sys.validate(pg)?;
        Ok(sys)
    }

    /// The system generated by a cell set: all iterated projections are
    /// added, plus `extra_verts` at level 1.
    pub fn generated(
        pg: &Polygroupoid,
        extra_verts: &BTreeSet<Vertex>,
        cells: &[Cell],
    ) -> Result<CompatibleSystem> {
        let mut verts = extra_verts.clone();
        let mut layers: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
        let mut stack: Vec<Cell> = cells.to_vec();
        while let Some(c) = stack.pop() {
            if c.level == 1 {
                verts.insert(c.spine[0]);
                continue;
            }
            if layers.entry(c.level).or_default().insert(c.clone()) {
                for j in 1..=c.level {
                    stack.push(pg.project(&c, j)?);
                }
            }
        }
        CompatibleSystem::new(pg, verts, layers)
    }

    fn validate(&self, pg: &Polygroupoid) -> Result<()> {
        let mut per_fiber: BTreeSet<(usize, Vec<Vertex>)> = BTreeSet::new();
        for (&level, cells) in &self.layers {
            if level < 2 || level > pg.n() {
                return Err(Error::structural(format!(
                    "system layer at level {level} outside [2, {}]",
                    pg.n()
                )));
            }
            for c in cells {
                if c.level != level {
                    return Err(Error::structural("cell stored under the wrong layer"));
                }
                if !pg.contains_cell(c) {
                    return Err(Error::structural(format!(
                        "cell {} not in the structure",
                        pg.cell_display(c)
                    )));
                }
                if !per_fiber.insert((level, c.spine.clone())) {
                    return Err(Error::structural(format!(
                        "two cells over the same spine at level {level}"
                    )));
                }
                for j in 1..=level {
                    let p = pg.project(c, j)?;
                    let ok = if p.level == 1 {
                        self.verts.contains(&p.spine[0])
                    } else {
                        self.layers
                            .get(&p.level)
                            .map(|l| l.contains(&p))
                            .unwrap_or(false)
                    };
                    if !ok {
                        return Err(Error::structural("system is not closed under projections"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.verts
    }

    pub fn layer(&self, level: usize) -> Option<&BTreeSet<Cell>> {
        self.layers.get(&level)
    }

    /// The unique cell of the system over `spine`, if any.
    pub fn cell_over(&self, spine: &[Vertex]) -> Option<&Cell> {
        self.layers
            .get(&spine.len())
            .and_then(|l| l.iter().find(|c| c.spine == spine))
    }

    /// Exactly one cell over every tuple from the vertex layer, at every
    /// level `2..=n`.
    pub fn is_maximal(&self, pg: &Polygroupoid) -> bool {
        let vlist: Vec<Vertex> = self.verts.iter().copied().collect();
        for level in 2..=pg.n() {
            if vlist.len() < level {
                continue;
            }
            for w in ordered_tuples(&vlist, level) {
                if self.cell_over(&w).is_none() {
                    return false;
                }
            }
        }
        true
    }
}

/// Extend a compatible system to a maximal one over the same vertex set,
/// preserving every existing choice. Free choices take the zero-label cell
/// in standard law and the least-index cell in explicit law.
pub fn extend_to_maximal(pg: &Polygroupoid, sys: &CompatibleSystem) -> Result<CompatibleSystem> {
    sys.validate(pg)?;
    if sys.verts.len() < pg.n() + 1 {
        return Err(Error::precondition(format!(
            "vertex layer has {} elements, need at least n+1 = {}",
            sys.verts.len(),
            pg.n() + 1
        )));
    }
    let vlist: Vec<Vertex> = sys.verts.iter().copied().collect();
    let mut layers: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
    for level in 2..=pg.n() {
        let mut layer: BTreeSet<Cell> = BTreeSet::new();
        for w in ordered_tuples(&vlist, level) {
            if let Some(existing) = sys.cell_over(&w) {
                layer.insert(existing.clone());
                continue;
            }
            // deletion order of the spine matches the projection order, so
            // the face tuple is exactly the required pi image
            let mut faces = Vec::with_capacity(level);
            for j in 1..=level {
                let sub = deleted(&w, j);
                let face = if level == 2 {
                    Cell::vertex(sub[0])
                } else {
                    layers
                        .get(&(level - 1))
                        .and_then(|l| l.iter().find(|c| c.spine == sub))
                        .cloned()
                        .ok_or_else(|| Error::structural("lower layer incomplete"))?
                };
                faces.push(face);
            }
            let candidate = pg
                .fiber(level, &w)?
                .into_iter()
                .find(|g| pg.projections(g).map(|ps| ps == faces).unwrap_or(false))
                .ok_or_else(|| {
                    Error::unfillable(format!(
                        "no cell over ({}) projecting onto the chosen faces",
                        w.iter()
                            .map(|&v| pg.vertex_name(v))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            layer.insert(candidate);
        }
        // shared-face coherence: cells whose spines share a deleted subtuple
        // project to the same lower cell
        let cells: Vec<&Cell> = layer.iter().collect();
        for (ix, f) in cells.iter().enumerate() {
            for g in cells.iter().skip(ix + 1) {
                for j in 1..=level {
                    for k in 1..=level {
                        if deleted(&f.spine, j) == deleted(&g.spine, k)
                            && pg.project(f, j)? != pg.project(g, k)?
                        {
                            return Err(Error::structural(
                                "maximal extension lost shared-face coherence",
                            ));
                        }
                    }
                }
            }
        }
        layers.insert(level, layer);
    }
    CompatibleSystem::new(pg, sys.verts.clone(), layers)
}

/// Fill the one missing face of a Q-tuple: `faces` has exactly one `None`,
/// and the remaining cells must extend to a compatible `(n+1)`-tuple.
pub fn horn_fill(pg: &Polygroupoid, faces: &[Option<Cell>]) -> Result<Cell> {
    let n = pg.n();
    if faces.len() != n + 1 {
        return Err(Error::structural(format!(
            "horn needs {} positions, got {}",
            n + 1,
            faces.len()
        )));
    }
    let missing: Vec<usize> = faces
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_none())
        .map(|(i, _)| i + 1)
        .collect();
    let [hole] = missing.as_slice() else {
        return Err(Error::structural(format!(
            "exactly one position must be missing, got {}",
            missing.len()
        )));
    };
    let hole = *hole;
    let mut vset: BTreeSet<Vertex> = BTreeSet::new();
    for f in faces.iter().flatten() {
        if f.level != n {
            return Err(Error::structural("horn faces must be top cells"));
        }
        vset.extend(f.spine.iter().copied());
    }
    if vset.len() != n + 1 {
        return Err(Error::unfillable(format!(
            "faces span {} vertices, expected {}",
            vset.len(),
            n + 1
        )));
    }
    // reconstruct the ground tuple by reinserting the vertex missing from
    // any present face at that face's position
    let anchor = faces
        .iter()
        .position(|f| f.is_some())
        .expect("n >= 2 gives at least one face");
    let anchor_cell = faces[anchor].as_ref().unwrap();
    let extra = *vset
        .iter()
        .find(|v| !anchor_cell.spine.contains(v))
        .expect("one vertex outside each face");
    let mut bar = anchor_cell.spine.clone();
    bar.insert(anchor, extra);
    for (j, f) in faces.iter().enumerate() {
        if let Some(f) = f {
            if f.spine != deleted(&bar, j + 1) {
                return Err(Error::unfillable(
                    "faces do not fit a common ground tuple".to_string(),
                ));
            }
        }
    }
    let hole_spine = deleted(&bar, hole);
    let mut found: Option<Cell> = None;
    for cand in pg.fiber(n, &hole_spine)? {
        let mut probe: Vec<Cell> = Vec::with_capacity(n + 1);
        for (j, f) in faces.iter().enumerate() {
            probe.push(match f {
                Some(c) => c.clone(),
                None => {
                    debug_assert_eq!(j + 1, hole);
                    cand.clone()
                }
            });
        }
        if pg.q_holds(&probe)? {
            if found.is_some() {
                return Err(Error::structural(
                    "horn has multiple fillers; the structure violates uniqueness",
                ));
            }
            found = Some(cand);
        }
    }
    found.ok_or_else(|| Error::unfillable("no compatible completion satisfies Q".to_string()))
}

/// The `(n+2) x (n+1)` cell family of the horn-filling claim: row `i` lives
/// over the ground tuple with its `i`-th vertex deleted, rows overlap via
/// `p^i_j = p^{j+1}_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexFamily {
    pub ground: Vec<Vertex>,
    pub rows: Vec<Vec<Cell>>,
}

impl SimplexFamily {
    pub fn validate(&self, pg: &Polygroupoid) -> Result<()> {
        let n = pg.n();
        if self.ground.len() != n + 2 {
            return Err(Error::structural("ground tuple must have n+2 vertices"));
        }
        if self.rows.len() != n + 2 || self.rows.iter().any(|r| r.len() != n + 1) {
            return Err(Error::structural("family must be (n+2) x (n+1)"));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let expected = deleted(&deleted(&self.ground, i + 1), j + 1);
                if cell.spine != expected {
                    return Err(Error::structural(format!(
                        "row {} entry {} lies over the wrong spine",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if !pg.is_compatible(row)? {
                return Err(Error::structural(format!(
                    "row {} is not compatible",
                    i + 1
                )));
            }
        }
        for i in 1..=n + 1 {
            for j in i..=n + 1 {
                if self.rows[i - 1][j - 1] != self.rows[j][i - 1] {
                    return Err(Error::structural(format!(
                        "symmetry p^{i}_{j} = p^{}_{i} violated",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// 1-based row access.
    pub fn row(&self, i: usize) -> &[Cell] {
        &self.rows[i - 1]
    }
}

/// Build a simplex family over the ground tuple, optionally embedding a
/// seed Q-tuple as row n+2. Rows 2..n+2 satisfy Q by construction.
pub fn build_simplex_family(
    pg: &Polygroupoid,
    ground: &[Vertex],
    seed: Option<&[Cell]>,
) -> Result<SimplexFamily> {
    let n = pg.n();
    if ground.len() != n + 2 {
        return Err(Error::structural(format!(
            "ground tuple needs {} vertices, got {}",
            n + 2,
            ground.len()
        )));
    }
    let vset: BTreeSet<Vertex> = ground.iter().copied().collect();
    if vset.len() != ground.len() {
        return Err(Error::structural("ground vertices must be distinct"));
    }
    let seed_cells: Vec<Cell> = match seed {
        None => Vec::new(),
        Some(cells) => {
            if !pg.q_holds(cells)? {
                return Err(Error::precondition("seed is not a Q-tuple"));
            }
            let prefix = deleted(ground, n + 2);
            for (j, c) in cells.iter().enumerate() {
                if c.spine != deleted(&prefix, j + 1) {
                    return Err(Error::precondition(
                        "seed faces must lie over the first n+1 ground vertices",
                    ));
                }
            }
            cells.to_vec()
        }
    };
    let generated = CompatibleSystem::generated(pg, &vset, &seed_cells)?;
    let maximal = extend_to_maximal(pg, &generated)?;
    let mut rows: Vec<Vec<Cell>> = vec![Vec::new(); n + 2];
    for i in 2..=n + 2 {
        let row_spine = deleted(ground, i);
        let mut faces: Vec<Option<Cell>> = vec![None; n + 1];
        for j in 2..=n + 1 {
            let spine = deleted(&row_spine, j);
            let cell = maximal
                .cell_over(&spine)
                .cloned()
                .ok_or_else(|| Error::structural("maximal system misses a top cell"))?;
            faces[j - 1] = Some(cell);
        }
        let first = horn_fill(pg, &faces)?;
        let mut row = Vec::with_capacity(n + 1);
        row.push(first);
        row.extend(faces.into_iter().skip(1).map(|f| f.unwrap()));
        rows[i - 1] = row;
    }
    // row 1 comes from the symmetry identities p^1_j = p^{j+1}_1
    let row1: Vec<Cell> = (1..=n + 1).map(|j| rows[j][0].clone()).collect();
    rows[0] = row1;
    let family = SimplexFamily {
        ground: ground.to_vec(),
        rows,
    };
    family.validate(pg)?;
    Ok(family)
}

/// The unique `g` with `Q(p_1, .., p_n, p_{n+1} + g)`.
pub fn defect_of_tuple(pg: &Polygroupoid, rho: &[Cell]) -> Result<GroupElement> {
    if rho.len() != pg.n() + 1 {
        return Err(Error::structural(format!(
            "defect takes {} cells, got {}",
            pg.n() + 1,
            rho.len()
        )));
    }
    if !pg.is_compatible(rho)? {
        return Err(Error::precondition("tuple is not compatible"));
    }
    let mut found: Option<GroupElement> = None;
    for g in pg.group().elements() {
        let mut probe = rho.to_vec();
        let last = probe.len() - 1;
        probe[last] = pg.act(&g, &probe[last])?;
        if pg.q_holds(&probe)? {
            if found.is_some() {
                return Err(Error::structural(
                    "defect ambiguous; horn-filling uniqueness fails",
                ));
            }
            found = Some(g);
        }
    }
    found.ok_or_else(|| Error::unfillable("no group element corrects the tuple".to_string()))
}

/// Alternating sum of row defects, `sum_i (-1)^i d(rho^i)`.
pub fn defect_of_family(pg: &Polygroupoid, family: &SimplexFamily) -> Result<GroupElement> {
    family.validate(pg)?;
    let mut acc = pg.group().zero();
    for i in 1..=pg.n() + 2 {
        let d = defect_of_tuple(pg, family.row(i))?;
        acc = if i % 2 == 0 {
            pg.group().add(&acc, &d)?
        } else {
            pg.group().sub(&acc, &d)?
        };
    }
    Ok(acc)
}

/// Outcome of the one-time constancy certification.
#[derive(Clone, Debug)]
pub struct DefectCertificate {
    pub value: GroupElement,
    pub families_checked: u64,
}

/// Scan every simplex family of the structure and certify that the family
/// defect is one constant, which is returned. Needs `|I| >= n+2`.
pub fn certify_defect_constancy(pg: &Polygroupoid, budget: u64) -> Result<DefectCertificate> {
    let n = pg.n();
    let verts: Vec<Vertex> = pg.vertices().collect();
    if verts.len() < n + 2 {
        return Err(Error::precondition(format!(
            "defect needs at least n+2 = {} vertices",
            n + 2
        )));
    }
    let grounds = ordered_tuples(&verts, n + 2);
    let mut per_ground: u128 = 1;
    {
        let layout = FamilyLayout::prepare(pg, &grounds[0])?;
        for fiber in &layout.slot_fibers {
            per_ground = per_ground.saturating_mul(fiber.len() as u128);
        }
    }
    let total = per_ground.saturating_mul(grounds.len() as u128);
    if total > budget as u128 {
        return Err(Error::capacity("family scan", total, budget as u128));
    }
    // rank-level group arithmetic keeps the hot loop allocation-free
    let order = pg.group().order() as usize;
    let mut add_rank = vec![0u32; order * order];
    let mut neg_rank = vec![0u32; order];
    for a in 0..order as u32 {
        let ea = pg.group().unrank(a);
        neg_rank[a as usize] = pg.group().rank(&pg.group().neg(&ea)?);
        for b in 0..order as u32 {
            let eb = pg.group().unrank(b);
            add_rank[a as usize * order + b as usize] = pg.group().rank(&pg.group().add(&ea, &eb)?);
        }
    }
    // the ground tuples shard independently
    let shards: Vec<Result<(Option<u32>, u64)>> = grounds
        .par_iter()
        .map(|bar| scan_ground(pg, bar, n, order, &add_rank, &neg_rank))
        .collect();
    let mut value: Option<u32> = None;
    let mut families_checked = 0u64;
    for shard in shards {
        let (shard_value, count) = shard?;
        families_checked += count;
        match (&mut value, shard_value) {
            (_, None) => {}
            (None, Some(v)) => value = Some(v),
            (Some(v), Some(w)) if *v == w => {}
            (Some(v), Some(w)) => {
                return Err(Error::structural(format!(
                    "family defect is not constant: found {} after {}",
                    pg.group().unrank(w),
                    pg.group().unrank(*v)
                )));
            }
        }
    }
    let value = value.ok_or_else(|| {
        Error::unfillable("no simplex family exists; structure is not connected".to_string())
    })?;
    Ok(DefectCertificate {
        value: pg.group().unrank(value),
        families_checked,
    })
}

/// Scan every family over one ground tuple; returns the constant defect
/// rank (error if not constant within the shard) and the family count.
fn scan_ground(
    pg: &Polygroupoid,
    bar: &[Vertex],
    n: usize,
    order: usize,
    add_rank: &[u32],
    neg_rank: &[u32],
) -> Result<(Option<u32>, u64)> {
    let layout = FamilyLayout::prepare(pg, bar)?;
    // memoized row defect ranks; -1 marks an incompatible row
    let mut row_defect: Vec<Vec<i32>> = Vec::with_capacity(n + 2);
    for row in 1..=n + 2 {
        let sizes: Vec<usize> = layout.row_slots[row - 1]
            .iter()
            .map(|&s| layout.slot_fibers[s].len())
            .collect();
        let mut table = vec![-1i32; sizes.iter().product::<usize>().max(1)];
        let mut err = None;
        mixed_radix_for_each(&sizes, |digits| {
            let cells: Vec<Cell> = digits
                .iter()
                .enumerate()
                .map(|(j, &d)| layout.slot_fibers[layout.row_slots[row - 1][j]][d].clone())
                .collect();
            let flat: usize = digits
                .iter()
                .zip(&layout.row_strides[row - 1])
                .map(|(&d, &s)| d * s)
                .sum();
            match pg.is_compatible(&cells) {
                Ok(false) => {}
                Ok(true) => match defect_of_tuple(pg, &cells) {
                    Ok(d) => table[flat] = pg.group().rank(&d) as i32,
                    Err(e) => {
                        err = Some(e);
                        return false;
                    }
                },
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            }
            true
        });
        if let Some(e) = err {
            return Err(e);
        }
        row_defect.push(table);
    }
    let slot_sizes: Vec<usize> = layout.slot_fibers.iter().map(|f| f.len()).collect();
    let row_layout: Vec<Vec<(usize, usize)>> = (0..n + 2)
        .map(|r| {
            layout.row_slots[r]
                .iter()
                .copied()
                .zip(layout.row_strides[r].iter().copied())
                .collect()
        })
        .collect();
    let mut value: Option<u32> = None;
    let mut count = 0u64;
    let mut bad: Option<String> = None;
    mixed_radix_for_each(&slot_sizes, |digits| {
        let mut acc = 0u32;
        for (rix, slots) in row_layout.iter().enumerate() {
            let mut flat = 0usize;
            for &(slot, stride) in slots {
                flat += digits[slot] * stride;
            }
            let d = row_defect[rix][flat];
            if d < 0 {
                return true; // some row incompatible: not a family
            }
            // rows are 1-based: odd rows subtract
            let term = if (rix + 1) % 2 == 0 {
                d as u32
            } else {
                neg_rank[d as usize]
            };
            acc = add_rank[acc as usize * order + term as usize];
        }
        count += 1;
        match value {
            None => {
                value = Some(acc);
                true
            }
            Some(v) if v == acc => true,
            Some(v) => {
                bad = Some(format!(
                    "family defect is not constant: found {} after {}",
                    pg.group().unrank(acc),
                    pg.group().unrank(v)
                ));
                false
            }
        }
    });
    if let Some(msg) = bad {
        return Err(Error::structural(msg));
    }
    Ok((value, count))
}

/// The structure defect: the constant family defect, certified once by a
/// full scan.
pub fn structure_defect(pg: &Polygroupoid, budget: u64) -> Result<GroupElement> {
    Ok(certify_defect_constancy(pg, budget)?.value)
}

/// Replace `Q` by `Q_g(p_1, .., p_{n+1}) <=> Q(p_1, .., p_n, p_{n+1} - g)`,
/// producing an explicit-law structure.
pub fn twist(pg: &Polygroupoid, g: &GroupElement) -> Result<Polygroupoid> {
    if !pg.has_action() {
        return Err(Error::precondition("twist needs a group action"));
    }
    let neg = pg.group().neg(g)?;
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    for_each_compatible_top_tuple(pg, |tuple| {
        let mut probe = tuple.to_vec();
        let last = probe.len() - 1;
        probe[last] = pg.act(&neg, &probe[last])?;
        if pg.q_holds(&probe)? {
            rows.push(tuple.to_vec());
        }
        Ok(())
    })?;
    pg.with_q_table(&rows)
}

/// Enumerate every compatible `(n+1)`-tuple of top cells.
pub fn for_each_compatible_top_tuple(
    pg: &Polygroupoid,
    mut f: impl FnMut(&[Cell]) -> Result<()>,
) -> Result<()> {
    let n = pg.n();
    let verts: Vec<Vertex> = pg.vertices().collect();
    if verts.len() < n + 1 {
        return Ok(());
    }
    for bar in ordered_tuples(&verts, n + 1) {
        let faces: Vec<Vec<Cell>> = (1..=n + 1)
            .map(|j| pg.fiber(n, &deleted(&bar, j)))
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = faces.iter().map(|x| x.len()).collect();
        let mut err = None;
        mixed_radix_for_each(&sizes, |digits| {
            let tuple: Vec<Cell> = digits
                .iter()
                .enumerate()
                .map(|(j, &d)| faces[j][d].clone())
                .collect();
            match pg.is_compatible(&tuple) {
                Ok(true) => match f(&tuple) {
                    Ok(()) => true,
                    Err(e) => {
                        err = Some(e);
                        false
                    }
                },
                Ok(false) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}

/// Slot/row layout shared by the associativity checker and the defect scan.
///
/// A symmetric family `{p^i_j}` over an ordered ground `(n+2)`-tuple is
/// determined by one top cell per unordered pair of ground positions; row
/// `i` entry `j` reads the slot of the pair `{i, j'}` with `j' = j` for
/// `j < i` and `j' = j+1` otherwise.
pub(crate) struct FamilyLayout {
    pub slot_fibers: Vec<Vec<Cell>>,
    pub row_slots: Vec<Vec<usize>>,
    pub row_strides: Vec<Vec<usize>>,
}

impl FamilyLayout {
    pub fn prepare(pg: &Polygroupoid, bar: &[Vertex]) -> Result<FamilyLayout> {
        let n = pg.n();
        let mut slot_of_pair = BTreeMap::new();
        let mut slot_fibers = Vec::new();
        for k in 1..=n + 2 {
            for l in (k + 1)..=n + 2 {
                let spine = deleted(&deleted(bar, l), k);
                slot_of_pair.insert((k, l), slot_fibers.len());
                slot_fibers.push(pg.fiber(n, &spine)?);
            }
        }
        let mut row_slots = Vec::with_capacity(n + 2);
        for i in 1..=n + 2 {
            let mut slots = Vec::with_capacity(n + 1);
            for j in 1..=n + 1 {
                let jp = if j < i { j } else { j + 1 };
                let pair = (i.min(jp), i.max(jp));
                slots.push(slot_of_pair[&pair]);
            }
            row_slots.push(slots);
        }
        let mut row_strides = Vec::with_capacity(n + 2);
        for slots in &row_slots {
            let sizes: Vec<usize> = slots.iter().map(|&s| slot_fibers[s].len()).collect();
            let mut strides = vec![0usize; sizes.len()];
            let mut acc = 1usize;
            for j in (0..sizes.len()).rev() {
                strides[j] = acc;
                acc *= sizes[j];
            }
            row_strides.push(strides);
        }
        Ok(FamilyLayout {
            slot_fibers,
            row_slots,
            row_strides,
        })
    }

    /// Flat index of a row under a partial assignment (all of the row's
    /// slots must be set).
    pub fn row_flat_opt(&self, row: usize, digits: &[Option<usize>]) -> usize {
        self.row_slots[row - 1]
            .iter()
            .zip(&self.row_strides[row - 1])
            .map(|(&slot, &stride)| digits[slot].unwrap() * stride)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::standard::build_standard;

    fn z(m: u32) -> GroupSpec {
        GroupSpec::new(vec![m]).unwrap()
    }

    fn top(pg: &Polygroupoid, spine: &[u32], label: &[u32]) -> Cell {
        let spine: Vec<Vertex> = spine.iter().map(|&v| Vertex(v)).collect();
        let g = pg.group().element(label.to_vec()).unwrap();
        pg.standard_top_cell(&spine, &g).unwrap()
    }

    #[test]
    fn extend_idempotent_and_counts() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let verts: BTreeSet<Vertex> = pg.vertices().collect();
        let empty = CompatibleSystem::new(&pg, verts.clone(), BTreeMap::new()).unwrap();
        let max = extend_to_maximal(&pg, &empty).unwrap();
        assert!(max.is_maximal(&pg));
        assert_eq!(max.layer(2).unwrap().len(), 6); // all ordered pairs
        let again = extend_to_maximal(&pg, &max).unwrap();
        assert_eq!(max, again);
        for c in max.layer(2).unwrap() {
            assert!(pg.label(c).unwrap().is_zero());
        }
    }

    #[test]
    fn extend_forces_lower_layers_at_n3() {
        let pg = build_standard(3, z(2), 5).unwrap();
        let verts: BTreeSet<Vertex> = pg.vertices().take(4).collect();
        let empty = CompatibleSystem::new(&pg, verts, BTreeMap::new()).unwrap();
        let max = extend_to_maximal(&pg, &empty).unwrap();
        assert_eq!(max.layer(2).unwrap().len(), 12);
        assert_eq!(max.layer(3).unwrap().len(), 24);
        for c in max.layer(3).unwrap() {
            assert!(pg.label(c).unwrap().is_zero());
        }
    }

    #[test]
    fn horn_fill_solves_alternating_sum() {
        let pg = build_standard(2, z(3), 3).unwrap();
        // faces g1 = 1 (pos 1), g3 = 1 (pos 3), missing pos 2:
        // -1 + g - 1 = 0 mod 3 so g = 2
        let faces = vec![
            Some(top(&pg, &[1, 2], &[1])),
            None,
            Some(top(&pg, &[0, 1], &[1])),
        ];
        let filled = horn_fill(&pg, &faces).unwrap();
        assert_eq!(
            pg.label(&filled).unwrap(),
            pg.group().element(vec![2]).unwrap()
        );

        let zeros = vec![
            None,
            Some(top(&pg, &[0, 2], &[0])),
            Some(top(&pg, &[0, 1], &[0])),
        ];
        assert!(pg
            .label(&horn_fill(&pg, &zeros).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn refill_recovers_original() {
        let pg = build_standard(3, z(2), 4).unwrap();
        for tuple in pg.q_tuples().unwrap() {
            for pos in 1..=4 {
                let mut faces: Vec<Option<Cell>> = tuple.iter().cloned().map(Some).collect();
                faces[pos - 1] = None;
                assert_eq!(horn_fill(&pg, &faces).unwrap(), tuple[pos - 1]);
            }
        }
    }

    #[test]
    fn simplex_family_basic() {
        let pg = build_standard(2, z(2), 4).unwrap();
        let ground: Vec<Vertex> = pg.vertices().collect();
        let fam = build_simplex_family(&pg, &ground, None).unwrap();
        assert_eq!(fam.rows.len(), 4);
        for i in 2..=4 {
            assert!(pg.q_holds(fam.row(i)).unwrap());
        }
        // associative structure: row 1 satisfies Q as well
        assert!(pg.q_holds(fam.row(1)).unwrap());
        // 12 grid entries overlap in pairs: one cell per pair of ground positions
        assert_eq!(fam.rows.iter().flatten().count(), 12);
        let distinct: BTreeSet<Cell> = fam.rows.iter().flatten().cloned().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn simplex_family_embeds_seed() {
        let pg = build_standard(2, z(3), 4).unwrap();
        let ground: Vec<Vertex> = pg.vertices().collect();
        let seed = vec![
            top(&pg, &[1, 2], &[1]),
            top(&pg, &[0, 2], &[2]),
            top(&pg, &[0, 1], &[1]),
        ];
        assert!(pg.q_holds(&seed).unwrap());
        let fam = build_simplex_family(&pg, &ground, Some(&seed)).unwrap();
        assert_eq!(fam.row(4), &seed[..]);
        let bad = vec![
            top(&pg, &[1, 2], &[1]),
            top(&pg, &[0, 2], &[0]),
            top(&pg, &[0, 1], &[0]),
        ];
        assert!(matches!(
            build_simplex_family(&pg, &ground, Some(&bad)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn defect_examples() {
        let pg = build_standard(2, z(3), 3).unwrap();
        for tuple in pg.q_tuples().unwrap() {
            assert!(defect_of_tuple(&pg, &tuple).unwrap().is_zero());
        }
        // labels (1,0,0): -1 + 0 - (0+g) = 0 needs g = 2
        let rho = vec![
            top(&pg, &[1, 2], &[1]),
            top(&pg, &[0, 2], &[0]),
            top(&pg, &[0, 1], &[0]),
        ];
        assert_eq!(
            defect_of_tuple(&pg, &rho).unwrap(),
            pg.group().element(vec![2]).unwrap()
        );
    }

    #[test]
    fn defect_shift_rule() {
        // d(rho with last replaced by last + h) = d(rho) - h
        let pg = build_standard(2, z(4), 4).unwrap();
        let mut count = 0;
        for_each_compatible_top_tuple(&pg, |tuple| {
            let d = defect_of_tuple(&pg, tuple)?;
            for h in pg.group().elements() {
                let mut shifted = tuple.to_vec();
                shifted[2] = pg.act(&h, &shifted[2])?;
                let expected = pg.group().sub(&d, &h)?;
                assert_eq!(defect_of_tuple(&pg, &shifted)?, expected);
            }
            count += 1;
            Ok(())
        })
        .unwrap();
        assert!(count > 0);
    }

    #[test]
    fn standard_models_have_zero_defect() {
        for (n, g, m) in [(2, z(2), 4), (2, z(3), 4), (3, z(2), 5)] {
            let pg = build_standard(n, g, m).unwrap();
            assert!(structure_defect(&pg, DEFAULT_FAMILY_BUDGET)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn twist_zero_keeps_q() {
        let pg = build_standard(2, z(3), 4).unwrap();
        let t = twist(&pg, &pg.group().zero()).unwrap();
        assert_eq!(t.q_tuples().unwrap().len(), pg.q_tuples().unwrap().len());
        for tuple in pg.q_tuples().unwrap() {
            assert!(t.q_holds(&tuple).unwrap());
        }
    }

    #[test]
    fn twist_round_trip() {
        let pg = build_standard(2, z(3), 4).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let t = twist(&pg, &one).unwrap();
        let back = twist(&t, &pg.group().neg(&one).unwrap()).unwrap();
        let ex = pg.to_explicit().unwrap();
        assert_eq!(back.q_tuples().unwrap().len(), ex.q_tuples().unwrap().len());
        for tuple in ex.q_tuples().unwrap() {
            assert!(back.q_holds(&tuple).unwrap());
        }
    }

    #[test]
    fn odd_twist_breaks_then_restores_associativity() {
        use crate::axioms::{AxiomFamily, CheckOptions};
        let pg = build_standard(3, z(2), 5).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let t = twist(&pg, &one).unwrap();
        let opts = CheckOptions::default();
        let report = t
            .check_axioms(
                &[AxiomFamily::Quasigroupoid, AxiomFamily::Associative],
                &opts,
            )
            .unwrap();
        assert!(report.verdict(AxiomFamily::Quasigroupoid).unwrap().pass);
        assert!(!report.verdict(AxiomFamily::Associative).unwrap().pass);
        // measured defect is the twist; twisting by it restores associativity
        let d = structure_defect(&t, DEFAULT_FAMILY_BUDGET).unwrap();
        assert_eq!(d, one);
        let restored = twist(&t, &d).unwrap();
        let report = restored
            .check_axioms(&[AxiomFamily::Associative], &opts)
            .unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn constancy_also_holds_with_a_spare_vertex() {
        // |I| = n+3: families range over every ordered ground tuple
        let pg = build_standard(2, z(2), 5).unwrap();
        let cert = certify_defect_constancy(&pg, DEFAULT_FAMILY_BUDGET).unwrap();
        assert!(cert.value.is_zero());
        let one = pg.group().element(vec![1]).unwrap();
        let t = twist(&pg, &one).unwrap();
        let cert = certify_defect_constancy(&t, DEFAULT_FAMILY_BUDGET).unwrap();
        assert!(cert.value.is_zero()); // even arity cancels the twist
    }

    #[test]
    fn two_position_twist_law() {
        // Q(p_1..p_{n+1}) iff Q with g at position i and g^{(-1)^{j-i+1}}
        // at position j, for all positions and all g
        for (n, g, m) in [(2, z(3), 4), (3, z(2), 5)] {
            let pg = build_standard(n, g.clone(), m).unwrap();
            let mut seen = 0u64;
            for_each_compatible_top_tuple(&pg, |tuple| {
                let base = pg.q_holds(tuple)?;
                for i in 1..=n {
                    for j in (i + 1)..=n + 1 {
                        for elt in pg.group().elements() {
                            let mut probe = tuple.to_vec();
                            probe[i - 1] = pg.act(&elt, &probe[i - 1])?;
                            let scaled = if (j - i + 1) % 2 == 0 {
                                elt.clone()
                            } else {
                                pg.group().neg(&elt)?
                            };
                            probe[j - 1] = pg.act(&scaled, &probe[j - 1])?;
                            assert_eq!(pg.q_holds(&probe)?, base);
                            seen += 1;
                        }
                    }
                }
                Ok(())
            })
            .unwrap();
            assert!(seen > 0);
        }
    }

    #[test]
    fn family_defect_constant_on_twisted() {
        // even arity: the alternating sum over n+2 rows cancels the twist,
        // so the defect stays zero and the structure stays associative
        let pg = build_standard(2, z(3), 4).unwrap();
        let one = pg.group().element(vec![1]).unwrap();
        let t = twist(&pg, &one).unwrap();
        let cert = certify_defect_constancy(&t, DEFAULT_FAMILY_BUDGET).unwrap();
        assert!(cert.value.is_zero());
        assert!(cert.families_checked > 0);

        // odd arity: the twist surfaces as a constant family defect -g
        let pg = build_standard(3, z(3), 5).unwrap();
        let t = twist(&pg, &one).unwrap();
        let cert = certify_defect_constancy(&t, DEFAULT_FAMILY_BUDGET).unwrap();
        assert_eq!(cert.value, pg.group().neg(&one).unwrap());
    }
}
