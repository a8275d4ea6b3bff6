//! The multi-sorted data model for n-ary quasigroupoids.
//!
//! A structure has sorts `I = P_1, P_2, .., P_n = P`, projection maps
//! `pi^k : P_k -> (P_{k-1})^k` (entry `j` deletes the `j`-th spine vertex),
//! an `(n+1)`-ary relation `Q` on the top sort, and optionally a regular
//! `G`-action and generalized inverse maps `iota_sigma` on the top sort.
//!
//! Two laws are supported. `Standard` computes everything from the canonical
//! formulas (trivial intermediate fibers, top fibers `I^(n) x G`, `Q` the
//! vanishing alternating label sum). `Explicit` stores fiber, projection,
//! `Q`, inverse and action tables, which is what twisted or deliberately
//! corrupted structures use.

use std::collections::{BTreeMap, BTreeSet};

use crate::combo::{deleted, ordered_tuples};
use crate::error::{Error, Result};
use crate::group::{sign_scale, GroupElement, GroupSpec};
use crate::perm::Perm;

/// A point of the vertex sort `I`, identified by its dense table index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub u32);

/// An element of some sort `P_k`.
///
/// `idx` disambiguates cells over the same spine: in standard law it is the
/// rank of the group label at the top level (0 below), in explicit law it is
/// the position inside the stored fiber. Level-1 cells are vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub level: usize,
    pub spine: Vec<Vertex>,
    pub idx: u32,
}

impl Cell {
    pub fn vertex(v: Vertex) -> Cell {
        Cell {
            level: 1,
            spine: vec![v],
            idx: 0,
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.level == 1
    }
}

/// Explicit-law cell declaration used to construct a structure from tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDecl {
    pub level: usize,
    pub spine: Vec<Vertex>,
    /// Projection row (cell ids), required for levels >= 3; level-2 rows are
    /// forced (the two spine vertices, swapped).
    pub proj: Option<Vec<usize>>,
}

/// Explicit-law table input: cell ids are positions in `cells`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplicitData {
    pub cells: Vec<CellDecl>,
    pub q: Vec<Vec<usize>>,
    /// Full inverse tables: for each permutation of `[n]`, cell id -> cell id.
    pub iota: Option<BTreeMap<Perm, BTreeMap<usize, usize>>>,
    /// Action tables: (group element, cell id) -> cell id.
    pub action: Option<BTreeMap<(GroupElement, usize), usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct CellInfo {
    pub level: usize,
    pub spine: Vec<Vertex>,
    pub fiber_pos: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ExplicitTables {
    pub cells: Vec<CellInfo>,
    pub by_fiber: BTreeMap<(usize, Vec<Vertex>), Vec<u32>>,
    pub proj: Vec<Option<Vec<u32>>>,
    pub q: BTreeSet<Vec<u32>>,
    pub iota: Option<BTreeMap<Perm, BTreeMap<u32, u32>>>,
    pub action: Option<BTreeMap<(u32, u32), u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Law {
    Standard,
    Explicit(Box<ExplicitTables>),
}

/// Which law a structure uses; the serialized `law` tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawKind {
    Standard,
    Explicit,
}

/// A finite n-ary quasigroupoid (possibly with action and inverses).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygroupoid {
    pub(crate) n: usize,
    pub(crate) vertex_names: Vec<String>,
    pub(crate) group: GroupSpec,
    pub(crate) law: Law,
}

impl Polygroupoid {
    /// The standard model `H_{G,n}` on `m` named vertices.
    pub(crate) fn new_standard(
        n: usize,
        group: GroupSpec,
        vertex_names: Vec<String>,
    ) -> Result<Polygroupoid> {
        if n < 2 {
            return Err(Error::precondition(format!("arity n = {n} < 2")));
        }
        let m = vertex_names.len();
        if m < n {
            return Err(Error::capacity(
                "vertex count (stars and Q need n-tuples)",
                m as u128,
                n as u128,
            ));
        }
        check_names(&vertex_names)?;
        Ok(Polygroupoid {
            n,
            vertex_names,
            group,
            law: Law::Standard,
        })
    }

    /// An explicit-law structure from tables, with structural validation.
    pub fn new_explicit(
        n: usize,
        vertex_names: Vec<String>,
        group: GroupSpec,
        data: ExplicitData,
    ) -> Result<Polygroupoid> {
        if n < 2 {
            return Err(Error::precondition(format!("arity n = {n} < 2")));
        }
        check_names(&vertex_names)?;
        let m = vertex_names.len();
        let tables = build_tables(n, m, &group, data)?;
        Ok(Polygroupoid {
            n,
            vertex_names,
            group,
            law: Law::Explicit(Box::new(tables)),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn law_kind(&self) -> LawKind {
        match self.law {
            Law::Standard => LawKind::Standard,
            Law::Explicit(_) => LawKind::Explicit,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.vertex_count() as u32).map(Vertex)
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        &self.vertex_names[v.0 as usize]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_by_name(&self, name: &str) -> Result<Vertex> {
        self.vertex_names
            .iter()
            .position(|x| x == name)
            .map(|i| Vertex(i as u32))
            .ok_or_else(|| Error::structural(format!("unknown vertex {name:?}")))
    }

    fn check_spine(&self, level: usize, spine: &[Vertex]) -> Result<()> {
        if level < 1 || level > self.n {
            return Err(Error::structural(format!(
                "level {level} outside [1, {}]",
                self.n
            )));
        }
        if spine.len() != level {
            return Err(Error::structural(format!(
                "spine length {} does not match level {level}",
                spine.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &v in spine {
            if v.0 as usize >= self.vertex_count() {
                return Err(Error::structural(format!(
                    "vertex index {} out of range",
                    v.0
                )));
            }
            if !seen.insert(v) {
                return Err(Error::structural(format!(
                    "repeated vertex {} in spine",
                    self.vertex_name(v)
                )));
            }
        }
        Ok(())
    }

    /// The fiber `P_level(spine)`: all cells over the ordered tuple.
    pub fn fiber(&self, level: usize, spine: &[Vertex]) -> Result<Vec<Cell>> {
        self.check_spine(level, spine)?;
        if level == 1 {
            return Ok(vec![Cell::vertex(spine[0])]);
        }
        match &self.law {
            Law::Standard => {
                let count = if level == self.n {
                    self.group.order() as u32
                } else {
                    1
                };
                Ok((0..count)
                    .map(|idx| Cell {
                        level,
                        spine: spine.to_vec(),
                        idx,
                    })
                    .collect())
            }
            Law::Explicit(t) => {
                let ids = t
                    .by_fiber
                    .get(&(level, spine.to_vec()))
                    .map(|v| v.as_slice())
                    .unwrap_or(&[]);
                Ok(ids
                    .iter()
                    .enumerate()
                    .map(|(pos, _)| Cell {
                        level,
                        spine: spine.to_vec(),
                        idx: pos as u32,
                    })
                    .collect())
            }
        }
    }

    pub fn fiber_size(&self, level: usize, spine: &[Vertex]) -> Result<usize> {
        Ok(self.fiber(level, spine)?.len())
    }

    /// The canonical cell of a fiber: zero label in standard law, least
    /// stored index in explicit law.
    pub fn default_cell(&self, level: usize, spine: &[Vertex]) -> Result<Cell> {
        let fiber = self.fiber(level, spine)?;
        fiber
            .into_iter()
            .next()
            .ok_or_else(|| Error::structural(format!("empty fiber at level {level}")))
    }

    pub fn contains_cell(&self, cell: &Cell) -> bool {
        if self.check_spine(cell.level, &cell.spine).is_err() {
            return false;
        }
        match self.fiber_size(cell.level, &cell.spine) {
            Ok(sz) => (cell.idx as usize) < sz,
            Err(_) => false,
        }
    }

    fn check_cell(&self, cell: &Cell) -> Result<()> {
        if self.contains_cell(cell) {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "cell {} does not belong to the structure",
                self.cell_display(cell)
            )))
        }
    }

    pub(crate) fn explicit_tables(&self) -> Option<&ExplicitTables> {
        match &self.law {
            Law::Standard => None,
            Law::Explicit(t) => Some(t),
        }
    }

    pub(crate) fn cell_id(&self, cell: &Cell) -> Result<u32> {
        let t = self
            .explicit_tables()
            .ok_or_else(|| Error::structural("cell ids exist only in explicit law"))?;
        self.check_cell(cell)?;
        Ok(t.by_fiber[&(cell.level, cell.spine.clone())][cell.idx as usize])
    }

    pub(crate) fn cell_from_id(&self, id: u32) -> Result<Cell> {
        let t = self
            .explicit_tables()
            .ok_or_else(|| Error::structural("cell ids exist only in explicit law"))?;
        let info = t
            .cells
            .get(id as usize)
            .ok_or_else(|| Error::structural(format!("cell id {id} out of range")))?;
        Ok(Cell {
            level: info.level,
            spine: info.spine.clone(),
            idx: info.fiber_pos,
        })
    }

    /// `pi^k_j(cell)` for 1-based `j`; the result is at level `k-1`
    /// (a level-1 cell is a vertex).
    pub fn project(&self, cell: &Cell, j: usize) -> Result<Cell> {
        self.check_cell(cell)?;
        if cell.level < 2 {
            return Err(Error::structural("vertices have no projections"));
        }
        if j < 1 || j > cell.level {
            return Err(Error::structural(format!(
                "projection index {j} outside [1, {}]",
                cell.level
            )));
        }
        let sub = deleted(&cell.spine, j);
        match &self.law {
            Law::Standard => Ok(Cell {
                level: cell.level - 1,
                spine: sub,
                idx: 0,
            }),
            Law::Explicit(t) => {
                if cell.level == 2 {
                    return Ok(Cell::vertex(sub[0]));
                }
                let id = self.cell_id(cell)?;
                let row = t.proj[id as usize]
                    .as_ref()
                    .expect("validated: projection row present for level >= 3");
                self.cell_from_id(row[j - 1])
            }
        }
    }

    /// The full tuple `pi^k(cell)`.
    pub fn projections(&self, cell: &Cell) -> Result<Vec<Cell>> {
        (1..=cell.level).map(|j| self.project(cell, j)).collect()
    }

    /// Compatibility of a `(k+1)`-tuple of level-`k` cells: distinctness for
    /// vertices, cross-projection identities `pi_i(f_j) = pi_{j-1}(f_i)`
    /// above.
    pub fn is_compatible(&self, cells: &[Cell]) -> Result<bool> {
        if cells.is_empty() {
            return Err(Error::structural("empty tuple"));
        }
        let level = cells[0].level;
        if cells.iter().any(|c| c.level != level) {
            return Err(Error::structural("mixed levels in compatibility check"));
        }
        for c in cells {
            self.check_cell(c)?;
        }
        if cells.len() != level + 1 {
            return Err(Error::structural(format!(
                "a compatible tuple of level-{level} cells has {} entries, got {}",
                level + 1,
                cells.len()
            )));
        }
        if level == 1 {
            return Ok(cells[0] != cells[1]);
        }
        for i in 1..=cells.len() {
            for j in (i + 1)..=cells.len() {
                let lhs = self.project(&cells[j - 1], i)?;
                let rhs = self.project(&cells[i - 1], j - 1)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Group label of a standard-law top cell.
    pub fn label(&self, cell: &Cell) -> Option<GroupElement> {
        match self.law {
            Law::Standard if cell.level == self.n => Some(self.group.unrank(cell.idx)),
            _ => None,
        }
    }

    /// The standard-law top cell with the given spine and label.
    pub fn standard_top_cell(&self, spine: &[Vertex], label: &GroupElement) -> Result<Cell> {
        if self.law_kind() != LawKind::Standard {
            return Err(Error::structural("labels index cells only in standard law"));
        }
        self.check_spine(self.n, spine)?;
        if !self.group.contains(label) {
            return Err(Error::structural(format!(
                "label {label} not in {}",
                self.group
            )));
        }
        Ok(Cell {
            level: self.n,
            spine: spine.to_vec(),
            idx: self.group.rank(label),
        })
    }

    /// Does `Q` hold on an `(n+1)`-tuple of top cells? Incompatible tuples
    /// answer `false`.
    pub fn q_holds(&self, cells: &[Cell]) -> Result<bool> {
        if cells.len() != self.n + 1 {
            return Err(Error::structural(format!(
                "Q takes {} cells, got {}",
                self.n + 1,
                cells.len()
            )));
        }
        if cells.iter().any(|c| c.level != self.n) {
            return Err(Error::structural("Q applies to top-level cells only"));
        }
        match &self.law {
            Law::Standard => {
                if !self.is_compatible(cells)? {
                    return Ok(false);
                }
                let mut sum = self.group.zero();
                for (i, c) in cells.iter().enumerate() {
                    let g = self.label(c).expect("standard top cell");
                    // positions are 1-based: odd positions subtract
                    sum = if (i + 1) % 2 == 0 {
                        self.group.add(&sum, &g)?
                    } else {
                        self.group.sub(&sum, &g)?
                    };
                }
                Ok(sum.is_zero())
            }
            Law::Explicit(t) => {
                let ids = cells
                    .iter()
                    .map(|c| self.cell_id(c))
                    .collect::<Result<Vec<u32>>>()?;
                Ok(t.q.contains(&ids))
            }
        }
    }

    pub fn has_action(&self) -> bool {
        match &self.law {
            Law::Standard => true,
            Law::Explicit(t) => t.action.is_some(),
        }
    }

    pub fn has_iota(&self) -> bool {
        match &self.law {
            Law::Standard => true,
            Law::Explicit(t) => t.iota.is_some(),
        }
    }

    /// The action `g.cell` on the top sort.
    pub fn act(&self, g: &GroupElement, cell: &Cell) -> Result<Cell> {
        if cell.level != self.n {
            return Err(Error::structural("the action is defined on the top sort"));
        }
        self.check_cell(cell)?;
        if !self.group.contains(g) {
            return Err(Error::structural(format!(
                "element {g} not in {}",
                self.group
            )));
        }
        match &self.law {
            Law::Standard => {
                let label = self.label(cell).expect("standard top cell");
                let moved = self.group.add(&label, g)?;
                Ok(Cell {
                    level: cell.level,
                    spine: cell.spine.clone(),
                    idx: self.group.rank(&moved),
                })
            }
            Law::Explicit(t) => {
                let table = t
                    .action
                    .as_ref()
                    .ok_or_else(|| Error::precondition("structure has no action tables"))?;
                let id = self.cell_id(cell)?;
                let img = table[&(self.group.rank(g), id)];
                self.cell_from_id(img)
            }
        }
    }

    /// The unique `g` with `a = g.b`, for same-fiber top cells.
    pub fn diff(&self, a: &Cell, b: &Cell) -> Result<GroupElement> {
        if a.level != self.n || b.level != self.n || a.spine != b.spine {
            return Err(Error::structural(
                "label difference needs two top cells over the same spine",
            ));
        }
        match &self.law {
            Law::Standard => {
                let la = self.label(a).expect("standard top cell");
                let lb = self.label(b).expect("standard top cell");
                self.group.sub(&la, &lb)
            }
            Law::Explicit(_) => {
                let mut found = None;
                for g in self.group.elements() {
                    if &self.act(&g, b)? == a {
                        if found.is_some() {
                            return Err(Error::structural(
                                "action is not free: label difference ambiguous",
                            ));
                        }
                        found = Some(g);
                    }
                }
                found.ok_or_else(|| {
                    Error::structural("action is not transitive: no label difference")
                })
            }
        }
    }

    /// The generalized inverse `iota_sigma` on the top sort: spine permuted
    /// by `sigma`, label sign-scaled by the parity of `sigma`.
    pub fn iota(&self, sigma: &Perm, cell: &Cell) -> Result<Cell> {
        if cell.level != self.n {
            return Err(Error::structural("iota is defined on the top sort"));
        }
        if sigma.len() != self.n {
            return Err(Error::structural(format!(
                "iota takes a permutation of [{}]",
                self.n
            )));
        }
        self.check_cell(cell)?;
        match &self.law {
            Law::Standard => {
                let spine = sigma.act_on(&cell.spine);
                let label = self.label(cell).expect("standard top cell");
                let twisted = sign_scale(sigma.parity(), &self.group, &label)?;
                Ok(Cell {
                    level: cell.level,
                    spine,
                    idx: self.group.rank(&twisted),
                })
            }
            Law::Explicit(t) => {
                let tables = t
                    .iota
                    .as_ref()
                    .ok_or_else(|| Error::precondition("structure has no inverse tables"))?;
                let id = self.cell_id(cell)?;
                let img = tables[sigma][&id];
                self.cell_from_id(img)
            }
        }
    }

    /// Support: the least vertex set reachable from `items` by projections.
    pub fn support(&self, items: &[Cell]) -> Result<BTreeSet<Vertex>> {
        let mut verts = BTreeSet::new();
        let mut stack: Vec<Cell> = items.to_vec();
        while let Some(c) = stack.pop() {
            self.check_cell(&c)?;
            if c.level == 1 {
                verts.insert(c.spine[0]);
            } else {
                for j in 1..=c.level {
                    stack.push(self.project(&c, j)?);
                }
            }
        }
        Ok(verts)
    }

    /// Closure: the sub-quasigroupoid on the support of `items`.
    pub fn closure(&self, items: &[Cell]) -> Result<ClosedSet> {
        let verts = self.support(items)?;
        self.closure_of_verts(&verts)
    }

    pub fn closure_of_verts(&self, verts: &BTreeSet<Vertex>) -> Result<ClosedSet> {
        let vlist: Vec<Vertex> = verts.iter().copied().collect();
        let mut cells = BTreeSet::new();
        for level in 2..=self.n {
            if vlist.len() < level {
                break;
            }
            for spine in ordered_tuples(&vlist, level) {
                for c in self.fiber(level, &spine)? {
                    cells.insert(c);
                }
            }
        }
        Ok(ClosedSet {
            verts: verts.clone(),
            cells,
        })
    }

    /// Materialize the closure of a vertex set as an explicit-law structure
    /// (vertices renumbered in ascending order, names kept).
    pub fn sub_structure(&self, verts: &BTreeSet<Vertex>) -> Result<Polygroupoid> {
        for &v in verts {
            if v.0 as usize >= self.vertex_count() {
                return Err(Error::structural(format!(
                    "vertex index {} out of range",
                    v.0
                )));
            }
        }
        let vlist: Vec<Vertex> = verts.iter().copied().collect();
        let names: Vec<String> = vlist
            .iter()
            .map(|&v| self.vertex_name(v).to_string())
            .collect();
        let renumber: BTreeMap<Vertex, Vertex> = vlist
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, Vertex(i as u32)))
            .collect();
        self.materialize(&vlist, |v| renumber[&v], names)
    }

    /// Copy this structure into explicit-law tables.
    pub fn to_explicit(&self) -> Result<Polygroupoid> {
        let vlist: Vec<Vertex> = self.vertices().collect();
        self.materialize(&vlist, |v| v, self.vertex_names.clone())
    }

    fn materialize(
        &self,
        verts: &[Vertex],
        rename: impl Fn(Vertex) -> Vertex,
        names: Vec<String>,
    ) -> Result<Polygroupoid> {
        let mut decls: Vec<CellDecl> = Vec::new();
        let mut id_of: BTreeMap<Cell, usize> = BTreeMap::new();
        for level in 2..=self.n {
            if verts.len() < level {
                break;
            }
            let mut spines = ordered_tuples(verts, level);
            spines.sort();
            for spine in spines {
                for cell in self.fiber(level, &spine)? {
                    let id = decls.len();
                    id_of.insert(cell.clone(), id);
                    decls.push(CellDecl {
                        level,
                        spine: spine.iter().map(|&v| rename(v)).collect(),
                        proj: None,
                    });
                }
            }
        }
        // projection rows for levels >= 3
        let cells_in_order: Vec<Cell> = {
            let mut v: Vec<(usize, Cell)> = id_of.iter().map(|(c, &i)| (i, c.clone())).collect();
            v.sort();
            v.into_iter().map(|(_, c)| c).collect()
        };
        for (id, cell) in cells_in_order.iter().enumerate() {
            if cell.level >= 3 {
                let row = self
                    .projections(cell)?
                    .iter()
                    .map(|p| id_of[p])
                    .collect::<Vec<usize>>();
                decls[id].proj = Some(row);
            }
        }
        // Q rows over the kept vertices
        let mut q_rows: Vec<Vec<usize>> = Vec::new();
        if verts.len() > self.n {
            for tuple in self.q_tuples_over(verts)? {
                q_rows.push(tuple.iter().map(|c| id_of[c]).collect());
            }
        }
        // inverse and action tables
        let tops: Vec<Cell> = cells_in_order
            .iter()
            .filter(|c| c.level == self.n)
            .cloned()
            .collect();
        let iota = if self.has_iota() {
            let mut by_perm = BTreeMap::new();
            for sigma in Perm::all(self.n) {
                let mut map = BTreeMap::new();
                for c in &tops {
                    map.insert(id_of[c], id_of[&self.iota(&sigma, c)?]);
                }
                by_perm.insert(sigma, map);
            }
            Some(by_perm)
        } else {
            None
        };
        let action = if self.has_action() {
            let mut map = BTreeMap::new();
            for g in self.group.elements() {
                for c in &tops {
                    map.insert((g.clone(), id_of[c]), id_of[&self.act(&g, c)?]);
                }
            }
            Some(map)
        } else {
            None
        };
        Polygroupoid::new_explicit(
            self.n,
            names,
            self.group.clone(),
            ExplicitData {
                cells: decls,
                q: q_rows,
                iota,
                action,
            },
        )
    }

    /// An explicit-law copy of this structure with `Q` replaced by the given
    /// tuples; fibers, projections, inverses and action are carried over.
    pub fn with_q_table(&self, q_rows: &[Vec<Cell>]) -> Result<Polygroupoid> {
        let ex = self.to_explicit()?;
        let rows = q_rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| ex.cell_id(c).map(|id| id as usize))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let t = ex.explicit_tables().expect("explicit copy");
        let decls: Vec<CellDecl> = t
            .cells
            .iter()
            .enumerate()
            .map(|(id, info)| CellDecl {
                level: info.level,
                spine: info.spine.clone(),
                proj: t.proj[id]
                    .as_ref()
                    .map(|row| row.iter().map(|&x| x as usize).collect()),
            })
            .collect();
        let iota = t.iota.as_ref().map(|maps| {
            maps.iter()
                .map(|(p, m)| {
                    (
                        p.clone(),
                        m.iter()
                            .map(|(&a, &b)| (a as usize, b as usize))
                            .collect::<BTreeMap<usize, usize>>(),
                    )
                })
                .collect::<BTreeMap<_, _>>()
        });
        let action = t.action.as_ref().map(|m| {
            m.iter()
                .map(|(&(g, c), &img)| ((self.group.unrank(g), c as usize), img as usize))
                .collect::<BTreeMap<_, _>>()
        });
        Polygroupoid::new_explicit(
            self.n,
            self.vertex_names.clone(),
            self.group.clone(),
            ExplicitData {
                cells: decls,
                q: rows,
                iota,
                action,
            },
        )
    }

    /// All Q-tuples whose support lies inside `verts`.
    pub fn q_tuples_over(&self, verts: &[Vertex]) -> Result<Vec<Vec<Cell>>> {
        let mut out = Vec::new();
        match &self.law {
            Law::Standard => {
                let order = self.group.order() as u32;
                for bar in ordered_tuples(verts, self.n + 1) {
                    let spines: Vec<Vec<Vertex>> =
                        (1..=self.n + 1).map(|i| deleted(&bar, i)).collect();
                    // free labels at positions 1..n, the last solved
                    let mut free = vec![0u32; self.n];
                    loop {
                        let mut sum = self.group.zero();
                        for (i, &r) in free.iter().enumerate() {
                            let g = self.group.unrank(r);
                            sum = if (i + 1) % 2 == 0 {
                                self.group.add(&sum, &g)?
                            } else {
                                self.group.sub(&sum, &g)?
                            };
                        }
                        // (-1)^{n+1} g_{n+1} = -sum
                        let last = if (self.n + 1).is_multiple_of(2) {
                            self.group.neg(&sum)?
                        } else {
                            sum.clone()
                        };
                        let mut tuple = Vec::with_capacity(self.n + 1);
                        for (i, spine) in spines.iter().enumerate() {
                            let idx = if i < self.n {
                                free[i]
                            } else {
                                self.group.rank(&last)
                            };
                            tuple.push(Cell {
                                level: self.n,
                                spine: spine.clone(),
                                idx,
                            });
                        }
                        debug_assert!(self.q_holds(&tuple)?);
                        out.push(tuple);
                        // advance
                        let mut i = self.n;
                        loop {
                            if i == 0 {
                                break;
                            }
                            i -= 1;
                            free[i] += 1;
                            if free[i] < order {
                                break;
                            }
                            free[i] = 0;
                        }
                        if free.iter().all(|&r| r == 0) {
                            break;
                        }
                    }
                }
            }
            Law::Explicit(t) => {
                let keep: BTreeSet<Vertex> = verts.iter().copied().collect();
                for row in &t.q {
                    let tuple = row
                        .iter()
                        .map(|&id| self.cell_from_id(id))
                        .collect::<Result<Vec<Cell>>>()?;
                    if tuple
                        .iter()
                        .all(|c| c.spine.iter().all(|v| keep.contains(v)))
                    {
                        out.push(tuple);
                    }
                }
            }
        }
        Ok(out)
    }

    /// All Q-tuples of the structure.
    pub fn q_tuples(&self) -> Result<Vec<Vec<Cell>>> {
        let verts: Vec<Vertex> = self.vertices().collect();
        self.q_tuples_over(&verts)
    }

    /// Readable form of a cell, e.g. `v0.v1@1,0` for a standard top cell.
    pub fn cell_display(&self, cell: &Cell) -> String {
        let spine: Vec<&str> = cell
            .spine
            .iter()
            .map(|&v| {
                self.vertex_names
                    .get(v.0 as usize)
                    .map(|s| s.as_str())
                    .unwrap_or("?")
            })
            .collect();
        let spine = spine.join(".");
        if cell.level < self.n || cell.level == 1 {
            return spine;
        }
        match self.label(cell) {
            Some(g) => format!("{spine}@{g}"),
            None => format!("{spine}@{}", cell.idx),
        }
    }

    /// Parse the form produced by [`Polygroupoid::cell_display`] for a
    /// top-level cell: `v0.v1@<label>` (standard) or `v0.v1@<index>`
    /// (explicit). A bare spine means label zero / index 0.
    pub fn parse_top_cell(&self, text: &str) -> Result<Cell> {
        let (spine_part, idx_part) = match text.split_once('@') {
            Some((s, i)) => (s, Some(i)),
            None => (text, None),
        };
        let spine = spine_part
            .split('.')
            .map(|name| self.vertex_by_name(name))
            .collect::<Result<Vec<Vertex>>>()?;
        self.check_spine(self.n, &spine)?;
        let idx = match (self.law_kind(), idx_part) {
            (LawKind::Standard, Some(t)) => self.group.rank(&GroupElement::parse(&self.group, t)?),
            (LawKind::Standard, None) => 0,
            (LawKind::Explicit, Some(t)) => t
                .parse::<u32>()
                .map_err(|_| Error::structural(format!("bad fiber index {t:?}")))?,
            (LawKind::Explicit, None) => 0,
        };
        let cell = Cell {
            level: self.n,
            spine,
            idx,
        };
        self.check_cell(&cell)?;
        Ok(cell)
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
            return Err(Error::structural(format!("bad vertex name {name:?}")));
        }
        if !seen.insert(name) {
            return Err(Error::structural(format!("duplicate vertex name {name:?}")));
        }
    }
    Ok(())
}

/// Default vertex names `v0, v1, ..`.
pub fn default_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("v{i}")).collect()
}

fn build_tables(
    n: usize,
    m: usize,
    group: &GroupSpec,
    data: ExplicitData,
) -> Result<ExplicitTables> {
    let mut cells: Vec<CellInfo> = Vec::with_capacity(data.cells.len());
    let mut by_fiber: BTreeMap<(usize, Vec<Vertex>), Vec<u32>> = BTreeMap::new();
    for (id, decl) in data.cells.iter().enumerate() {
        if decl.level < 2 || decl.level > n {
            return Err(Error::structural(format!(
                "cell {id}: level {} outside [2, {n}]",
                decl.level
            )));
        }
        if decl.spine.len() != decl.level {
            return Err(Error::structural(format!(
                "cell {id}: spine length {} does not match level {}",
                decl.spine.len(),
                decl.level
            )));
        }
        let mut seen = BTreeSet::new();
        for &v in &decl.spine {
            if v.0 as usize >= m {
                return Err(Error::structural(format!(
                    "cell {id}: vertex index {} out of range",
                    v.0
                )));
            }
            if !seen.insert(v) {
                return Err(Error::structural(format!(
                    "cell {id}: repeated spine vertex"
                )));
            }
        }
        let fiber = by_fiber
            .entry((decl.level, decl.spine.clone()))
            .or_default();
        fiber.push(id as u32);
        cells.push(CellInfo {
            level: decl.level,
            spine: decl.spine.clone(),
            fiber_pos: (fiber.len() - 1) as u32,
        });
    }
    // projection rows
    let mut proj: Vec<Option<Vec<u32>>> = vec![None; cells.len()];
    for (id, decl) in data.cells.iter().enumerate() {
        match (&decl.proj, decl.level) {
            (None, 2) => {}
            (Some(_), 2) => {
                return Err(Error::structural(format!(
                    "cell {id}: level-2 projections are forced, no row allowed"
                )))
            }
            (None, _) => {
                return Err(Error::structural(format!(
                    "cell {id}: level-{} cell needs a projection row",
                    decl.level
                )))
            }
            (Some(row), level) => {
                if row.len() != level {
                    return Err(Error::structural(format!(
                        "cell {id}: projection row has {} entries, expected {level}",
                        row.len()
                    )));
                }
                let mut ids = Vec::with_capacity(level);
                for (j, &target) in row.iter().enumerate() {
                    let t = cells.get(target).ok_or_else(|| {
                        Error::structural(format!("cell {id}: dangling projection id {target}"))
                    })?;
                    if t.level != level - 1 {
                        return Err(Error::structural(format!(
                            "cell {id}: projection target {target} at level {}, expected {}",
                            t.level,
                            level - 1
                        )));
                    }
                    if t.spine != deleted(&decl.spine, j + 1) {
                        return Err(Error::structural(format!(
                            "cell {id}: projection target {target} lies over the wrong spine"
                        )));
                    }
                    ids.push(target as u32);
                }
                proj[id] = Some(ids);
            }
        }
    }
    // cross-compatibility of projection rows (coherence is structural for
    // parsed tables; Q-level axioms stay in the checker)
    for (id, row) in proj.iter().enumerate() {
        if let Some(row) = row {
            let level = cells[id].level;
            for i in 1..=level {
                for j in (i + 1)..=level {
                    let f_j = row[j - 1] as usize;
                    let f_i = row[i - 1] as usize;
                    let lhs = if level - 1 == 2 {
                        // level-2 targets project to vertices
                        CellRefProj::Vertex(deleted(&cells[f_j].spine, i)[0])
                    } else {
                        CellRefProj::Id(proj[f_j].as_ref().unwrap()[i - 1])
                    };
                    let rhs = if level - 1 == 2 {
                        CellRefProj::Vertex(deleted(&cells[f_i].spine, j - 1)[0])
                    } else {
                        CellRefProj::Id(proj[f_i].as_ref().unwrap()[j - 2])
                    };
                    if lhs != rhs {
                        return Err(Error::structural(format!(
                            "cell {id}: projection row is not a compatible tuple"
                        )));
                    }
                }
            }
        }
    }
    // Q rows
    let mut q = BTreeSet::new();
    for (rix, row) in data.q.iter().enumerate() {
        if row.len() != n + 1 {
            return Err(Error::structural(format!(
                "q row {rix}: needs {} cells, got {}",
                n + 1,
                row.len()
            )));
        }
        let mut ids = Vec::with_capacity(n + 1);
        for &cid in row {
            let info = cells
                .get(cid)
                .ok_or_else(|| Error::structural(format!("q row {rix}: dangling cell id {cid}")))?;
            if info.level != n {
                return Err(Error::structural(format!(
                    "q row {rix}: cell {cid} is not top-level"
                )));
            }
            ids.push(cid as u32);
        }
        q.insert(ids);
    }
    // inverse tables
    let iota = match data.iota {
        None => None,
        Some(maps) => {
            let perms = Perm::all(n);
            if maps.len() != perms.len() || perms.iter().any(|p| !maps.contains_key(p)) {
                return Err(Error::structural(format!(
                    "inverse tables must cover all {} permutations of [{n}]",
                    perms.len()
                )));
            }
            let top_ids: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.level == n)
                .map(|(i, _)| i)
                .collect();
            let mut out = BTreeMap::new();
            for (perm, map) in maps {
                let mut table = BTreeMap::new();
                for &id in &top_ids {
                    let &img = map.get(&id).ok_or_else(|| {
                        Error::structural(format!("iota {perm}: cell {id} missing from table"))
                    })?;
                    let info = cells.get(img).ok_or_else(|| {
                        Error::structural(format!("iota {perm}: dangling cell id {img}"))
                    })?;
                    if info.level != n {
                        return Err(Error::structural(format!(
                            "iota {perm}: image {img} is not top-level"
                        )));
                    }
                    table.insert(id as u32, img as u32);
                }
                out.insert(perm, table);
            }
            Some(out)
        }
    };
    // action tables
    let action = match data.action {
        None => None,
        Some(map) => {
            let top_ids: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.level == n)
                .map(|(i, _)| i)
                .collect();
            let mut out = BTreeMap::new();
            for g in group.elements() {
                for &id in &top_ids {
                    let &img = map.get(&(g.clone(), id)).ok_or_else(|| {
                        Error::structural(format!("action: entry ({g}, {id}) missing"))
                    })?;
                    let info = cells.get(img).ok_or_else(|| {
                        Error::structural(format!("action: dangling cell id {img}"))
                    })?;
                    if info.level != n {
                        return Err(Error::structural(format!(
                            "action: image {img} is not top-level"
                        )));
                    }
                    out.insert((group.rank(&g), id as u32), img as u32);
                }
            }
            Some(out)
        }
    };
    // canonical renumbering: cells sorted by (level, spine, fiber position)
    // so that semantically identical tables compare and serialize equal
    let mut order: Vec<u32> = (0..cells.len() as u32).collect();
    order.sort_by_key(|&id| {
        let c = &cells[id as usize];
        (c.level, c.spine.clone(), c.fiber_pos)
    });
    let mut new_id = vec![0u32; cells.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old as usize] = new as u32;
    }
    let remap = |id: u32| new_id[id as usize];
    let cells: Vec<CellInfo> = order
        .iter()
        .map(|&old| cells[old as usize].clone())
        .collect();
    let by_fiber: BTreeMap<(usize, Vec<Vertex>), Vec<u32>> = by_fiber
        .into_iter()
        .map(|(k, ids)| (k, ids.into_iter().map(remap).collect()))
        .collect();
    let proj: Vec<Option<Vec<u32>>> = order
        .iter()
        .map(|&old| {
            proj[old as usize]
                .as_ref()
                .map(|row| row.iter().map(|&x| remap(x)).collect())
        })
        .collect();
    let q: BTreeSet<Vec<u32>> = q
        .into_iter()
        .map(|row| row.into_iter().map(remap).collect())
        .collect();
    let iota = iota.map(|maps| {
        maps.into_iter()
            .map(|(p, m)| {
                (
                    p,
                    m.into_iter()
                        .map(|(a, b)| (remap(a), remap(b)))
                        .collect::<BTreeMap<u32, u32>>(),
                )
            })
            .collect::<BTreeMap<_, _>>()
    });
    let action = action.map(|m| {
        m.into_iter()
            .map(|((g, c), img)| ((g, remap(c)), remap(img)))
            .collect::<BTreeMap<_, _>>()
    });
    Ok(ExplicitTables {
        cells,
        by_fiber,
        proj,
        q,
        iota,
        action,
    })
}

#[derive(PartialEq)]
enum CellRefProj {
    Vertex(Vertex),
    Id(u32),
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn level2_projection_deletes() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let f = top(&pg, &[0, 1], &[0]);
        assert_eq!(pg.project(&f, 1).unwrap(), Cell::vertex(Vertex(1)));
        assert_eq!(pg.project(&f, 2).unwrap(), Cell::vertex(Vertex(0)));
    }

    #[test]
    fn vertex_pair_compatibility() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let a = Cell::vertex(Vertex(0));
        let b = Cell::vertex(Vertex(1));
        assert!(pg.is_compatible(&[a.clone(), b]).unwrap());
        assert!(!pg.is_compatible(&[a.clone(), a.clone()]).unwrap());
    }

    #[test]
    fn top_triple_compatibility_in_h_z2_2() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let good = [
            top(&pg, &[1, 2], &[0]),
            top(&pg, &[0, 2], &[0]),
            top(&pg, &[0, 1], &[0]),
        ];
        assert!(pg.is_compatible(&good).unwrap());
        let bad = [
            top(&pg, &[1, 2], &[0]),
            top(&pg, &[0, 2], &[0]),
            top(&pg, &[1, 0], &[0]),
        ];
        assert!(!pg.is_compatible(&bad).unwrap());
    }

    #[test]
    fn mixed_levels_rejected() {
        let pg = build_standard(2, z(2), 3).unwrap();
        let f = top(&pg, &[0, 1], &[0]);
        assert!(pg.is_compatible(&[f, Cell::vertex(Vertex(2))]).is_err());
    }

    #[test]
    fn support_examples() {
        let pg = build_standard(3, z(2), 4).unwrap();
        assert!(pg.support(&[]).unwrap().is_empty());
        let f = top(&pg, &[0, 1, 2], &[1]);
        let supp = pg.support(&[f]).unwrap();
        assert_eq!(
            supp.into_iter().collect::<Vec<_>>(),
            vec![Vertex(0), Vertex(1), Vertex(2)]
        );

        let pg2 = build_standard(2, z(2), 3).unwrap();
        let g = top(&pg2, &[1, 2], &[0]);
        let supp = pg2.support(&[Cell::vertex(Vertex(0)), g]).unwrap();
        assert_eq!(supp.len(), 3);
    }

    #[test]
    fn closure_counts_and_idempotence() {
        let pg = build_standard(2, z(2), 4).unwrap();
        assert!(pg.closure(&[]).unwrap().is_empty());
        let x = vec![Cell::vertex(Vertex(0)), Cell::vertex(Vertex(1))];
        let cl = pg.closure(&x).unwrap();
        assert_eq!(cl.verts.len(), 2);
        // two ordered pairs, each top fiber of size |G| = 2
        assert_eq!(cl.cell_count(), 4);
        // closure of the closure's cells adds nothing
        let again = pg
            .closure(&cl.cells.iter().cloned().collect::<Vec<_>>())
            .unwrap();
        assert_eq!(cl, again);
    }

    #[test]
    fn fiber_examples() {
        let pg = build_standard(2, z(3), 3).unwrap();
        assert_eq!(pg.fiber(2, &[Vertex(0), Vertex(1)]).unwrap().len(), 3);
        let pg = build_standard(3, z(2), 4).unwrap();
        assert_eq!(pg.fiber(2, &[Vertex(0), Vertex(1)]).unwrap().len(), 1);
        assert!(pg.fiber(2, &[Vertex(0), Vertex(0)]).is_err());
    }

    #[test]
    fn q_examples() {
        let pg = build_standard(2, z(3), 3).unwrap();
        // labels (1,2,1) on a compatible triple: -1+2-1 = 0
        let t = [
            top(&pg, &[1, 2], &[1]),
            top(&pg, &[0, 2], &[2]),
            top(&pg, &[0, 1], &[1]),
        ];
        assert!(pg.q_holds(&t).unwrap());
        let zeros = [
            top(&pg, &[1, 2], &[0]),
            top(&pg, &[0, 2], &[0]),
            top(&pg, &[0, 1], &[0]),
        ];
        assert!(pg.q_holds(&zeros).unwrap());

        let pg2 = build_standard(2, z(2), 3).unwrap();
        let bad = [
            top(&pg2, &[1, 2], &[1]),
            top(&pg2, &[0, 2], &[0]),
            top(&pg2, &[0, 1], &[0]),
        ];
        assert!(!pg2.q_holds(&bad).unwrap());
    }

    #[test]
    fn explicit_copy_agrees_semantically() {
        let pg = build_standard(2, z(3), 4).unwrap();
        let ex = pg.to_explicit().unwrap();
        assert_eq!(ex.law_kind(), LawKind::Explicit);
        assert_eq!(pg.q_tuples().unwrap().len(), ex.q_tuples().unwrap().len());
        let spine = [Vertex(2), Vertex(0)];
        assert_eq!(ex.fiber(2, &spine).unwrap().len(), 3);
        // action and inverses carried over
        let f = ex.default_cell(2, &spine).unwrap();
        let one = ex.group().element(vec![1]).unwrap();
        let g = ex.act(&one, &f).unwrap();
        assert_ne!(f, g);
        assert_eq!(ex.diff(&g, &f).unwrap(), one);
        let swap = Perm::transposition(2, 0, 1);
        assert_eq!(
            ex.iota(&swap, &f).unwrap().spine,
            vec![Vertex(0), Vertex(2)]
        );
    }

    #[test]
    fn sub_structure_renumbers() {
        let pg = build_standard(2, z(2), 5).unwrap();
        let verts: BTreeSet<Vertex> = [Vertex(1), Vertex(3), Vertex(4)].into_iter().collect();
        let sub = pg.sub_structure(&verts).unwrap();
        assert_eq!(sub.vertex_count(), 3);
        assert_eq!(sub.vertex_names(), &["v1", "v3", "v4"]);
        assert_eq!(sub.all_cells().unwrap().len(), 12);
        assert_eq!(
            sub.q_tuples().unwrap().len(),
            pg.q_tuples_over(&[Vertex(1), Vertex(3), Vertex(4)])
                .unwrap()
                .len()
        );
    }

    #[test]
    fn cell_display_roundtrip() {
        let pg = build_standard(2, GroupSpec::new(vec![2, 2]).unwrap(), 3).unwrap();
        let f = top(&pg, &[2, 0], &[1, 0]);
        let text = pg.cell_display(&f);
        assert_eq!(text, "v2.v0@1,0");
        assert_eq!(pg.parse_top_cell(&text).unwrap(), f);
    }

    #[test]
    fn dangling_projection_rejected() {
        let z2 = z(2);
        let decl = |level: usize, spine: &[u32], proj: Option<Vec<usize>>| CellDecl {
            level,
            spine: spine.iter().map(|&v| Vertex(v)).collect(),
            proj,
        };
        // level-3 cell with a projection row pointing nowhere
        let data = ExplicitData {
            cells: vec![
                decl(2, &[0, 1], None),
                decl(2, &[0, 2], None),
                decl(2, &[1, 2], None),
                decl(3, &[0, 1, 2], Some(vec![2, 1, 99])),
            ],
            q: vec![],
            iota: None,
            action: None,
        };
        let err = Polygroupoid::new_explicit(3, default_names(3), z2, data).unwrap_err();
        assert!(err.to_string().contains("dangling"));
    }
}

/// A closed substructure: a vertex set together with every fiber over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSet {
    pub verts: BTreeSet<Vertex>,
    pub cells: BTreeSet<Cell>,
}

impl ClosedSet {
    pub fn empty() -> ClosedSet {
        ClosedSet {
            verts: BTreeSet::new(),
            cells: BTreeSet::new(),
        }
    }

    pub fn contains_cell(&self, c: &Cell) -> bool {
        if c.level == 1 {
            self.verts.contains(&c.spine[0])
        } else {
            self.cells.contains(c)
        }
    }

    pub fn intersection(&self, other: &ClosedSet) -> ClosedSet {
        ClosedSet {
            verts: self.verts.intersection(&other.verts).copied().collect(),
            cells: self.cells.intersection(&other.cells).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty() && self.cells.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}
