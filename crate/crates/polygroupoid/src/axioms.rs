//! Exhaustive axiom checking for finite quasigroupoids.
//!
//! Every check walks all relevant tuples in lexicographic spine order and
//! reports the first violation as a concrete witness.

use std::collections::BTreeSet;

use crate::combo::{deleted, mixed_radix_for_each, ordered_tuples};
use crate::core::{Cell, Polygroupoid, Vertex};
use crate::error::{Error, Result};

/// The five checkable axiom families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomFamily {
    Quasigroupoid,
    Connected,
    LocallyFinite,
    Associative,
    RegularAction,
}

impl AxiomFamily {
    pub const ALL: [AxiomFamily; 5] = [
        AxiomFamily::Quasigroupoid,
        AxiomFamily::Connected,
        AxiomFamily::LocallyFinite,
        AxiomFamily::Associative,
        AxiomFamily::RegularAction,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AxiomFamily::Quasigroupoid => "quasigroupoid",
            AxiomFamily::Connected => "connected",
            AxiomFamily::LocallyFinite => "locally_finite",
            AxiomFamily::Associative => "associative",
            AxiomFamily::RegularAction => "regular_action",
        }
    }
}

impl std::str::FromStr for AxiomFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<AxiomFamily> {
        match s {
            "quasigroupoid" => Ok(AxiomFamily::Quasigroupoid),
            "connected" => Ok(AxiomFamily::Connected),
            "locally_finite" => Ok(AxiomFamily::LocallyFinite),
            "associative" => Ok(AxiomFamily::Associative),
            "regular_action" => Ok(AxiomFamily::RegularAction),
            other => Err(Error::structural(format!("unknown axiom family {other:?}"))),
        }
    }
}

/// One verdict; a failure always carries a witness tuple that can be
/// re-checked with `is_compatible` / `q_holds`.
#[derive(Clone, Debug)]
pub struct AxiomVerdict {
    pub family: AxiomFamily,
    pub pass: bool,
    pub detail: String,
    pub witness: Option<Vec<Cell>>,
    pub checked: u64,
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub verdicts: Vec<AxiomVerdict>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, family: AxiomFamily) -> Option<&AxiomVerdict> {
        self.verdicts.iter().find(|v| v.family == family)
    }
}

/// Bounds for the exhaustive checks.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub max_vertices: usize,
    pub max_group_order: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_vertices: 8,
            max_group_order: 64,
        }
    }
}

impl Polygroupoid {
    /// Every cell of levels `2..=n`, grouped fiber by fiber in lexicographic
    /// spine order.
    pub fn all_cells(&self) -> Result<Vec<Cell>> {
        let verts: Vec<Vertex> = self.vertices().collect();
        let mut out = Vec::new();
        for level in 2..=self.n() {
            if verts.len() < level {
                break;
            }
            let mut spines = ordered_tuples(&verts, level);
            spines.sort();
            for spine in spines {
                out.extend(self.fiber(level, &spine)?);
            }
        }
        Ok(out)
    }

    /// Run the requested axiom families exhaustively.
    pub fn check_axioms(
        &self,
        families: &[AxiomFamily],
        opts: &CheckOptions,
    ) -> Result<AxiomReport> {
        if self.vertex_count() > opts.max_vertices {
            return Err(Error::capacity(
                "vertex count for exhaustive checks",
                self.vertex_count() as u128,
                opts.max_vertices as u128,
            ));
        }
        if self.group().order() > opts.max_group_order {
            return Err(Error::capacity(
                "group order for exhaustive checks",
                self.group().order() as u128,
                opts.max_group_order as u128,
            ));
        }
        let mut verdicts = Vec::new();
        let mut seen = BTreeSet::new();
        for &family in families {
            if !seen.insert(family) {
                continue;
            }
            let verdict = match family {
                AxiomFamily::Quasigroupoid => self.check_quasigroupoid()?,
                AxiomFamily::Connected => self.check_connected()?,
                AxiomFamily::LocallyFinite => self.check_locally_finite()?,
                AxiomFamily::Associative => self.check_associative()?,
                AxiomFamily::RegularAction => self.check_regular_action()?,
            };
            verdicts.push(verdict);
        }
        Ok(AxiomReport { verdicts })
    }

    fn check_quasigroupoid(&self) -> Result<AxiomVerdict> {
        let mut checked = 0u64;
        // coherence: every projection image is a compatible tuple
        for cell in self.all_cells()? {
            let projs = self.projections(&cell)?;
            checked += 1;
            if !self.is_compatible(&projs)? {
                return Ok(fail(
                    AxiomFamily::Quasigroupoid,
                    format!("pi image of {} is not compatible", self.cell_display(&cell)),
                    projs,
                    checked,
                ));
            }
        }
        // Q implies compatibility, and horn fillers are unique
        for tuple in self.q_tuples()? {
            checked += 1;
            if !self.is_compatible(&tuple)? {
                return Ok(fail(
                    AxiomFamily::Quasigroupoid,
                    "Q holds on an incompatible tuple".to_string(),
                    tuple,
                    checked,
                ));
            }
            for pos in 1..=self.n() + 1 {
                let mut hits = 0usize;
                let mut dup: Option<Cell> = None;
                for cand in self.fiber(self.n(), &tuple[pos - 1].spine)? {
                    let mut probe = tuple.clone();
                    probe[pos - 1] = cand.clone();
                    checked += 1;
                    if self.q_holds(&probe)? {
                        hits += 1;
                        if cand != tuple[pos - 1] {
                            dup = Some(cand);
                        }
                    }
                }
                if hits != 1 {
                    let mut witness = tuple.clone();
                    if let Some(d) = dup {
                        witness.push(d);
                    }
                    return Ok(fail(
                        AxiomFamily::Quasigroupoid,
                        format!("horn at position {pos} has {hits} fillers, expected exactly 1"),
                        witness,
                        checked,
                    ));
                }
            }
        }
        Ok(pass(AxiomFamily::Quasigroupoid, checked))
    }

    fn check_connected(&self) -> Result<AxiomVerdict> {
        let verts: Vec<Vertex> = self.vertices().collect();
        let mut checked = 0u64;
        // (1) every compatible (i+1)-tuple of level-i cells has a pi-preimage
        for i in 1..self.n() {
            for bar in ordered_tuples(&verts, i + 1) {
                let faces: Vec<Vec<Cell>> = (1..=i + 1)
                    .map(|j| self.fiber(i, &deleted(&bar, j)))
                    .collect::<Result<_>>()?;
                let sizes: Vec<usize> = faces.iter().map(|f| f.len()).collect();
                let mut violation: Option<Vec<Cell>> = None;
                mixed_radix_for_each(&sizes, |digits| {
                    let combo: Vec<Cell> = digits
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| faces[j][d].clone())
                        .collect();
                    checked += 1;
                    if !self.is_compatible(&combo).unwrap_or(false) {
                        return true;
                    }
                    let has_preimage = self
                        .fiber(i + 1, &bar)
                        .map(|fib| {
                            fib.iter()
                                .any(|g| self.projections(g).map(|ps| ps == combo).unwrap_or(false))
                        })
                        .unwrap_or(false);
                    if !has_preimage {
                        violation = Some(combo);
                        return false;
                    }
                    true
                });
                if let Some(w) = violation {
                    return Ok(fail(
                        AxiomFamily::Connected,
                        format!(
                            "compatible tuple at level {i} outside the image of pi^{}",
                            i + 1
                        ),
                        w,
                        checked,
                    ));
                }
            }
        }
        // (2) horn fillers exist for every compatible top tuple and position
        if verts.len() > self.n() {
            for bar in ordered_tuples(&verts, self.n() + 1) {
                let faces: Vec<Vec<Cell>> = (1..=self.n() + 1)
                    .map(|j| self.fiber(self.n(), &deleted(&bar, j)))
                    .collect::<Result<_>>()?;
                let sizes: Vec<usize> = faces.iter().map(|f| f.len()).collect();
                let mut violation: Option<(Vec<Cell>, usize)> = None;
                mixed_radix_for_each(&sizes, |digits| {
                    let combo: Vec<Cell> = digits
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| faces[j][d].clone())
                        .collect();
                    checked += 1;
                    if !self.is_compatible(&combo).unwrap_or(false) {
                        return true;
                    }
                    for pos in 1..=self.n() + 1 {
                        let mut filled = false;
                        for cand in &faces[pos - 1] {
                            let mut probe = combo.clone();
                            probe[pos - 1] = cand.clone();
                            if self.q_holds(&probe).unwrap_or(false) {
                                filled = true;
                                break;
                            }
                        }
                        if !filled {
                            violation = Some((combo, pos));
                            return false;
                        }
                    }
                    true
                });
                if let Some((w, pos)) = violation {
                    return Ok(fail(
                        AxiomFamily::Connected,
                        format!("no horn filler at position {pos}"),
                        w,
                        checked,
                    ));
                }
            }
        }
        Ok(pass(AxiomFamily::Connected, checked))
    }

    fn check_locally_finite(&self) -> Result<AxiomVerdict> {
        let verts: Vec<Vertex> = self.vertices().collect();
        let mut checked = 0u64;
        let mut max_fiber = 0usize;
        if verts.len() >= self.n() {
            for w in ordered_tuples(&verts, self.n()) {
                checked += 1;
                max_fiber = max_fiber.max(self.fiber_size(self.n(), &w)?);
            }
        }
        let mut v = pass(AxiomFamily::LocallyFinite, checked);
        v.detail = format!("all fibers finite; largest top fiber has {max_fiber} cells");
        Ok(v)
    }

    fn check_associative(&self) -> Result<AxiomVerdict> {
        let verts: Vec<Vertex> = self.vertices().collect();
        let n = self.n();
        if verts.len() < n + 2 {
            let mut v = pass(AxiomFamily::Associative, 0);
            v.detail = format!(
                "vacuous: needs {} distinct vertices, structure has {}",
                n + 2,
                verts.len()
            );
            return Ok(v);
        }
        let mut checked = 0u64;
        for bar in ordered_tuples(&verts, n + 2) {
            if let Some(witness) = self.scan_families(&bar, &mut checked)? {
                let (family, ell) = witness;
                return Ok(fail(
                    AxiomFamily::Associative,
                    format!("family with Q on every row except row {ell}"),
                    family,
                    checked,
                ));
            }
        }
        Ok(pass(AxiomFamily::Associative, checked))
    }

    /// Scan all symmetric compatible families over the ordered ground tuple,
    /// looking for one where exactly the `ell`-th row fails Q.
    fn scan_families(
        &self,
        bar: &[Vertex],
        checked: &mut u64,
    ) -> Result<Option<(Vec<Cell>, usize)>> {
        let n = self.n();
        let scan = FamilyScan::prepare(self, bar)?;
        for ell in 1..=n + 2 {
            let rows_order: Vec<usize> = (1..=n + 2).filter(|&r| r != ell).collect();
            let mut digits: Vec<Option<usize>> = vec![None; scan.layout.slot_fibers.len()];
            if let Some(family) = scan.dfs(ell, &rows_order, 0, &mut digits, checked)? {
                return Ok(Some((family, ell)));
            }
        }
        Ok(None)
    }

    fn check_regular_action(&self) -> Result<AxiomVerdict> {
        if !self.has_action() {
            return Err(Error::precondition(
                "regular_action check requires an action (standard law or action tables)",
            ));
        }
        let mut checked = 0u64;
        let tops: Vec<Cell> = self
            .all_cells()?
            .into_iter()
            .filter(|c| c.level == self.n())
            .collect();
        let elems: Vec<_> = self.group().elements().collect();
        // action laws and spine preservation
        for p in &tops {
            let zero_acts = self.act(&self.group().zero(), p)?;
            checked += 1;
            if &zero_acts != p {
                return Ok(fail(
                    AxiomFamily::RegularAction,
                    "zero does not act as identity".to_string(),
                    vec![p.clone(), zero_acts],
                    checked,
                ));
            }
            for g in &elems {
                let gp = self.act(g, p)?;
                checked += 1;
                if gp.spine != p.spine {
                    return Ok(fail(
                        AxiomFamily::RegularAction,
                        format!("action of {g} moves the spine"),
                        vec![p.clone(), gp],
                        checked,
                    ));
                }
                for h in &elems {
                    let gh = self.group().add(g, h)?;
                    let lhs = self.act(&gh, p)?;
                    let rhs = self.act(g, &self.act(h, p)?)?;
                    checked += 1;
                    if lhs != rhs {
                        return Ok(fail(
                            AxiomFamily::RegularAction,
                            format!("(g+h).p differs from g.(h.p) for g={g}, h={h}"),
                            vec![p.clone(), lhs, rhs],
                            checked,
                        ));
                    }
                }
            }
        }
        // regularity on each fiber: transitive and free
        let verts: Vec<Vertex> = self.vertices().collect();
        if verts.len() >= self.n() {
            for w in ordered_tuples(&verts, self.n()) {
                let fiber = self.fiber(self.n(), &w)?;
                for f in &fiber {
                    let mut orbit = BTreeSet::new();
                    for g in &elems {
                        let gf = self.act(g, f)?;
                        checked += 1;
                        if !g.is_zero() && &gf == f {
                            return Ok(fail(
                                AxiomFamily::RegularAction,
                                format!("action of {g} is not free on the fiber"),
                                vec![f.clone()],
                                checked,
                            ));
                        }
                        orbit.insert(gf);
                    }
                    if orbit.len() != fiber.len() {
                        return Ok(fail(
                            AxiomFamily::RegularAction,
                            format!(
                                "orbit has {} cells but the fiber has {}",
                                orbit.len(),
                                fiber.len()
                            ),
                            vec![f.clone()],
                            checked,
                        ));
                    }
                }
            }
        }
        // Q is invariant under acting on adjacent pairs
        for tuple in self.q_tuples()? {
            for g in &elems {
                for i in 1..=self.n() {
                    let mut probe = tuple.clone();
                    probe[i - 1] = self.act(g, &probe[i - 1])?;
                    probe[i] = self.act(g, &probe[i])?;
                    checked += 1;
                    if !self.q_holds(&probe)? {
                        return Ok(fail(
                            AxiomFamily::RegularAction,
                            format!("Q lost after acting by {g} on positions {i}, {}", i + 1),
                            probe,
                            checked,
                        ));
                    }
                }
            }
        }
        Ok(pass(AxiomFamily::RegularAction, checked))
    }
}

fn pass(family: AxiomFamily, checked: u64) -> AxiomVerdict {
    AxiomVerdict {
        family,
        pass: true,
        detail: String::new(),
        witness: None,
        checked,
    }
}

fn fail(family: AxiomFamily, detail: String, witness: Vec<Cell>, checked: u64) -> AxiomVerdict {
    AxiomVerdict {
        family,
        pass: false,
        detail,
        witness: Some(witness),
        checked,
    }
}

/// The associativity scan over one ordered ground tuple: the shared family
/// layout plus per-row compatibility/Q flags.
struct FamilyScan {
    layout: crate::filling::FamilyLayout,
    /// `row_flags[i-1][flat]`: bit 0 = compatible, bit 1 = Q.
    row_flags: Vec<Vec<u8>>,
}

const FLAG_COMPATIBLE: u8 = 1;
const FLAG_Q: u8 = 2;

impl FamilyScan {
    fn prepare(pg: &Polygroupoid, bar: &[Vertex]) -> Result<FamilyScan> {
        let n = pg.n();
        let layout = crate::filling::FamilyLayout::prepare(pg, bar)?;
        let mut row_flags = Vec::with_capacity(n + 2);
        for row in 1..=n + 2 {
            let slots = &layout.row_slots[row - 1];
            let strides = &layout.row_strides[row - 1];
            let sizes: Vec<usize> = slots.iter().map(|&s| layout.slot_fibers[s].len()).collect();
            let total: usize = sizes.iter().product();
            let mut flags = vec![0u8; total.max(1)];
            mixed_radix_for_each(&sizes, |digits| {
                let row_cells: Vec<Cell> = digits
                    .iter()
                    .enumerate()
                    .map(|(j, &d)| layout.slot_fibers[slots[j]][d].clone())
                    .collect();
                let flat: usize = digits.iter().zip(strides).map(|(&d, &s)| d * s).sum();
                let mut f = 0u8;
                if pg.is_compatible(&row_cells).unwrap_or(false) {
                    f |= FLAG_COMPATIBLE;
                    if pg.q_holds(&row_cells).unwrap_or(false) {
                        f |= FLAG_Q;
                    }
                }
                flags[flat] = f;
                true
            });
            row_flags.push(flags);
        }
        Ok(FamilyScan { layout, row_flags })
    }

    /// Assign rows in `rows_order[pos..]`, requiring compatibility and Q on
    /// each; at the leaf, test the excluded row `ell`.
    fn dfs(
        &self,
        ell: usize,
        rows_order: &[usize],
        pos: usize,
        digits: &mut Vec<Option<usize>>,
        checked: &mut u64,
    ) -> Result<Option<Vec<Cell>>> {
        if pos == rows_order.len() {
            *checked += 1;
            let flat = self.layout.row_flat_opt(ell, digits);
            let flags = self.row_flags[ell - 1][flat];
            if flags & FLAG_COMPATIBLE != 0 && flags & FLAG_Q == 0 {
                // genuine violation: a full family with Q everywhere but ell
                let mut family = Vec::new();
                for row in 1..=self.layout.row_slots.len() {
                    for &slot in &self.layout.row_slots[row - 1] {
                        family.push(self.layout.slot_fibers[slot][digits[slot].unwrap()].clone());
                    }
                }
                return Ok(Some(family));
            }
            return Ok(None);
        }
        let row = rows_order[pos];
        let free: Vec<usize> = self.layout.row_slots[row - 1]
            .iter()
            .copied()
            .filter(|&s| digits[s].is_none())
            .collect();
        let sizes: Vec<usize> = free
            .iter()
            .map(|&s| self.layout.slot_fibers[s].len())
            .collect();
        let mut result = Ok(None);
        let mut found = false;
        mixed_radix_for_each(&sizes, |assign| {
            for (slot_pos, &slot) in free.iter().enumerate() {
                digits[slot] = Some(assign[slot_pos]);
            }
            let flat = self.layout.row_flat_opt(row, digits);
            let flags = self.row_flags[row - 1][flat];
            if flags & FLAG_Q != 0 {
                match self.dfs(ell, rows_order, pos + 1, digits, checked) {
                    Ok(Some(w)) => {
                        result = Ok(Some(w));
                        found = true;
                    }
                    Ok(None) => {}
                    Err(e) => {
                        result = Err(e);
                        found = true;
                    }
                }
            }
            for &slot in &free {
                digits[slot] = None;
            }
            !found
        });
        result
    }
}
