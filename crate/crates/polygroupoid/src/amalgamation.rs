//! Amalgamation over an ambient structure: closure-based independence,
//! k-dimensional problems given by disjoint vertex blocks, uniqueness
//! verdicts, and the canonical witness for the failure in dimension n+1.
//!
//! Solutions of a problem are represented concretely: all of them share the
//! carrier `cl(base + blocks)` and differ only in the Q-constants assigned
//! to the vertex families not covered by a face. Two solutions are
//! isomorphic over the problem exactly when a sign-equivariant relabeling of
//! the uncovered fibers maps one set of constants to the other.

use std::collections::{BTreeMap, BTreeSet};

use crate::combo::{combinations, deleted, mixed_radix_for_each, ordered_tuples};
use crate::core::{Cell, ClosedSet, Polygroupoid, Vertex};
use crate::error::{Error, Result};
use crate::filling::{defect_of_tuple, horn_fill};
use crate::group::GroupElement;
use crate::perm::{Parity, Perm};
use crate::recovery::recover_group;
use crate::star::{automorphism_from_star, AutomorphismRep, Star};

/// Default budget on the number of candidate solutions enumerated.
pub const DEFAULT_SOLUTION_BUDGET: u64 = 1_000_000;

/// A k-dimensional amalgamation problem over the ambient structure: a base
/// vertex set and k disjoint nonempty blocks; the faces are the closures of
/// the base together with any proper subset of the blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamationProblem {
    pub base: BTreeSet<Vertex>,
    pub blocks: Vec<BTreeSet<Vertex>>,
}

impl AmalgamationProblem {
    pub fn new(
        pg: &Polygroupoid,
        base: BTreeSet<Vertex>,
        blocks: Vec<BTreeSet<Vertex>>,
    ) -> Result<AmalgamationProblem> {
        if blocks.is_empty() {
            return Err(Error::precondition("a problem needs at least one block"));
        }
        let mut seen: BTreeSet<Vertex> = base.clone();
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::precondition(format!("block {i} is empty")));
            }
            for &v in block {
                if v.0 as usize >= pg.vertex_count() {
                    return Err(Error::structural(format!(
                        "vertex index {} out of range",
                        v.0
                    )));
                }
                if !seen.insert(v) {
                    return Err(Error::precondition(format!(
                        "vertex {} appears in two parts of the problem",
                        pg.vertex_name(v)
                    )));
                }
            }
        }
        for &v in &base {
            if v.0 as usize >= pg.vertex_count() {
                return Err(Error::structural(format!(
                    "vertex index {} out of range",
                    v.0
                )));
            }
        }
        Ok(AmalgamationProblem { base, blocks })
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// Vertex set of the face for a subset of block indices.
    pub fn face_verts(&self, s: &BTreeSet<usize>) -> BTreeSet<Vertex> {
        let mut verts = self.base.clone();
        for &i in s {
            verts.extend(self.blocks[i].iter().copied());
        }
        verts
    }

    /// Vertex set of the union of base and all blocks.
    pub fn union_verts(&self) -> BTreeSet<Vertex> {
        let all: BTreeSet<usize> = (0..self.k()).collect();
        self.face_verts(&all)
    }

    /// Is a vertex set covered by some proper face?
    fn covered(&self, set: &BTreeSet<Vertex>) -> bool {
        let proper: Vec<Vec<usize>> = (0..self.k())
            .flat_map(|size| combinations(&(0..self.k()).collect::<Vec<_>>(), size))
            .collect();
        proper.iter().any(|s| {
            let face = self.face_verts(&s.iter().copied().collect());
            set.iter().all(|v| face.contains(v))
        })
    }
}

/// Closure-based independence: `cl(A + B) /\ cl(C + B) = cl(B)`.
pub fn independent(pg: &Polygroupoid, a: &[Cell], b: &[Cell], c: &[Cell]) -> Result<bool> {
    let mut ab = a.to_vec();
    ab.extend_from_slice(b);
    let mut cb = c.to_vec();
    cb.extend_from_slice(b);
    let cl_ab = pg.closure(&ab)?;
    let cl_cb = pg.closure(&cb)?;
    let cl_b = pg.closure(b)?;
    Ok(cl_ab.intersection(&cl_cb) == cl_b)
}

/// A solution embedding: every face includes into the union closure, with
/// the commutation squares holding by construction and re-verified.
#[derive(Clone, Debug)]
pub struct SolutionEmbedding {
    pub target: ClosedSet,
    pub faces: Vec<(BTreeSet<usize>, ClosedSet)>,
}

/// Solve by taking the union closure; faces embed by inclusion.
pub fn solve(pg: &Polygroupoid, problem: &AmalgamationProblem) -> Result<SolutionEmbedding> {
    let target = pg.closure_of_verts(&problem.union_verts())?;
    let mut faces = Vec::new();
    let indices: Vec<usize> = (0..problem.k()).collect();
    for size in 0..problem.k() {
        for s in combinations(&indices, size) {
            let s: BTreeSet<usize> = s.into_iter().collect();
            let face = pg.closure_of_verts(&problem.face_verts(&s))?;
            // inclusion into the target
            if !face.verts.is_subset(&target.verts) || !face.cells.is_subset(&target.cells) {
                return Err(Error::structural("face does not include into the target"));
            }
            faces.push((s, face));
        }
    }
    // commutation squares: for s inside t, the s-face includes into the t-face
    for (s, face_s) in &faces {
        for (t, face_t) in &faces {
            if s.is_subset(t)
                && (!face_s.verts.is_subset(&face_t.verts)
                    || !face_s.cells.is_subset(&face_t.cells))
            {
                return Err(Error::structural("transition maps do not commute"));
            }
        }
    }
    // independence of the faces in the closure sense
    let base_cells: Vec<Cell> = problem.base.iter().map(|&v| Cell::vertex(v)).collect();
    for (s, face_s) in &faces {
        for (t, face_t) in &faces {
            if s.is_disjoint(t) {
                // disjoint faces meet exactly in the base closure
                let a: Vec<Cell> = s
                    .iter()
                    .flat_map(|&i| problem.blocks[i].iter().map(|&v| Cell::vertex(v)))
                    .collect();
                let c: Vec<Cell> = t
                    .iter()
                    .flat_map(|&i| problem.blocks[i].iter().map(|&v| Cell::vertex(v)))
                    .collect();
                if !independent(pg, &a, &base_cells, &c)? {
                    return Err(Error::structural("faces are not independent"));
                }
            } else {
                let meet: BTreeSet<usize> = s.intersection(t).copied().collect();
                let expected = pg.closure_of_verts(&problem.face_verts(&meet))?;
                if face_s.intersection(face_t) != expected {
                    return Err(Error::structural("faces are not independent"));
                }
            }
        }
    }
    Ok(SolutionEmbedding { target, faces })
}

/// One enumerated solution: a constant in `G` per uncovered vertex family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionLabeling {
    /// Ascending `(n+1)`-subsets of the union support not covered by a face.
    pub families: Vec<Vec<Vertex>>,
    pub values: Vec<GroupElement>,
}

/// Verdict of the uniqueness check.
#[derive(Clone, Debug)]
pub enum UniquenessVerdict {
    /// All solutions are isomorphic over the problem; connecting relabelings
    /// were constructed and certified against the first solution.
    Unique {
        solutions: u64,
        isomorphisms_certified: u64,
    },
    /// Two solutions with no relabeling carrying one to the other.
    WitnessPair {
        first: SolutionLabeling,
        second: SolutionLabeling,
        classes: u64,
    },
}

/// The alternating label sum of a compatible top tuple, recovered through
/// the defect so it also works on explicit-law structures.
fn alt_sum(pg: &Polygroupoid, tuple: &[Cell]) -> Result<GroupElement> {
    let d = defect_of_tuple(pg, tuple)?;
    if pg.n().is_multiple_of(2) {
        Ok(d)
    } else {
        pg.group().neg(&d)
    }
}

fn sign_of_tuple(order: &[Vertex]) -> Parity {
    Perm::sorting(order).parity()
}

/// Enumerate the solutions of the problem and decide uniqueness: solutions
/// are coherent assignments of Q-constants to uncovered families, compared
/// modulo sign-equivariant relabelings of uncovered fibers.
pub fn uniqueness_check(
    pg: &Polygroupoid,
    problem: &AmalgamationProblem,
    budget: u64,
) -> Result<UniquenessVerdict> {
    let n = pg.n();
    if !pg.has_action() {
        return Err(Error::precondition("uniqueness check needs a group action"));
    }
    let union: BTreeSet<Vertex> = problem.union_verts();
    let vlist: Vec<Vertex> = union.iter().copied().collect();
    // uncovered (n+1)-families carry the solution data
    let families: Vec<Vec<Vertex>> = if vlist.len() > n {
        combinations(&vlist, n + 1)
            .into_iter()
            .filter(|f| !problem.covered(&f.iter().copied().collect()))
            .collect()
    } else {
        Vec::new()
    };
    // uncovered n-spines are the relabeling degrees of freedom
    let new_spines: Vec<Vec<Vertex>> = if vlist.len() >= n {
        combinations(&vlist, n)
            .into_iter()
            .filter(|s| !problem.covered(&s.iter().copied().collect()))
            .collect()
    } else {
        Vec::new()
    };
    let g_order = pg.group().order();
    let candidates = (g_order as u128).saturating_pow(families.len() as u32);
    if candidates > budget as u128 {
        return Err(Error::capacity(
            "solution enumeration",
            candidates,
            budget as u128,
        ));
    }
    // coherence: for every (n+2)-subset of the union, the alternating sum of
    // the (gamma-extended) face constants vanishes
    let coherent = |gamma: &[u32]| -> bool {
        if vlist.len() < n + 2 {
            return true;
        }
        let value = |fam: &[Vertex]| -> GroupElement {
            families
                .iter()
                .position(|f| f == fam)
                .map(|ix| pg.group().unrank(gamma[ix]))
                .unwrap_or_else(|| pg.group().zero())
        };
        for w in combinations(&vlist, n + 2) {
            let mut acc = pg.group().zero();
            for i in 1..=n + 2 {
                let fam = deleted(&w, i);
                let v = value(&fam);
                acc = if i % 2 == 0 {
                    pg.group().add(&acc, &v).unwrap()
                } else {
                    pg.group().sub(&acc, &v).unwrap()
                };
            }
            if !acc.is_zero() {
                return false;
            }
        }
        true
    };
    let mut valid: Vec<Vec<u32>> = Vec::new();
    let radixes = vec![g_order as usize; families.len()];
    mixed_radix_for_each(&radixes, |digits| {
        let gamma: Vec<u32> = digits.iter().map(|&d| d as u32).collect();
        if coherent(&gamma) {
            valid.push(gamma);
        }
        true
    });
    if valid.is_empty() {
        return Err(Error::structural("no coherent solution exists"));
    }
    // the relabeling image: shifts delta(d)(F) = sum_j (-1)^j d(del_j F)
    let shift_of = |spine_ix: usize, g: &GroupElement| -> Vec<GroupElement> {
        families
            .iter()
            .map(|fam| {
                let mut acc = pg.group().zero();
                for j in 1..=n + 1 {
                    if deleted(fam, j) == new_spines[spine_ix] {
                        acc = if j % 2 == 0 {
                            pg.group().add(&acc, g).unwrap()
                        } else {
                            pg.group().sub(&acc, g).unwrap()
                        };
                    }
                }
                acc
            })
            .collect()
    };
    // span the image subgroup, remembering a generating word for each shift
    type Word = Vec<(usize, u32)>; // (spine index, group element rank)
    let zero_vec: Vec<u32> = vec![pg.group().rank(&pg.group().zero()); families.len()];
    let mut image: BTreeMap<Vec<u32>, Word> = BTreeMap::new();
    image.insert(zero_vec.clone(), Vec::new());
    let mut frontier = vec![zero_vec.clone()];
    while let Some(cur) = frontier.pop() {
        for (six, _) in new_spines.iter().enumerate() {
            for g in pg.group().elements() {
                if g.is_zero() {
                    continue;
                }
                let delta = shift_of(six, &g);
                let next: Vec<u32> = cur
                    .iter()
                    .zip(&delta)
                    .map(|(&c, d)| {
                        pg.group()
                            .rank(&pg.group().add(&pg.group().unrank(c), d).unwrap())
                    })
                    .collect();
                if !image.contains_key(&next) {
                    let mut word = image[&cur].clone();
                    word.push((six, pg.group().rank(&g)));
                    image.insert(next.clone(), word);
                    frontier.push(next);
                }
            }
        }
    }
    // orbit classes: gamma1 ~ gamma2 iff gamma2 - gamma1 lies in the image
    let diff_vec = |a: &[u32], b: &[u32]| -> Vec<u32> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                pg.group().rank(
                    &pg.group()
                        .sub(&pg.group().unrank(x), &pg.group().unrank(y))
                        .unwrap(),
                )
            })
            .collect()
    };
    let mut class_reps: Vec<Vec<u32>> = Vec::new();
    for gamma in &valid {
        if !class_reps
            .iter()
            .any(|rep| image.contains_key(&diff_vec(gamma, rep)))
        {
            class_reps.push(gamma.clone());
        }
    }
    let to_labeling = |gamma: &[u32]| SolutionLabeling {
        families: families.clone(),
        values: gamma.iter().map(|&r| pg.group().unrank(r)).collect(),
    };
    if class_reps.len() > 1 {
        return Ok(UniquenessVerdict::WitnessPair {
            first: to_labeling(&class_reps[0]),
            second: to_labeling(&class_reps[1]),
            classes: class_reps.len() as u64,
        });
    }
    // certify the connecting relabeling from the first solution to each
    // other one: the twist word must carry Q-constants gamma_0 onto gamma_i
    let gamma0 = &valid[0];
    let mut certified = 0u64;
    for gamma in valid.iter().skip(1) {
        let word = image
            .get(&diff_vec(gamma, gamma0))
            .ok_or_else(|| Error::structural("orbit bookkeeping lost a connection"))?;
        certify_relabeling(pg, problem, &families, &new_spines, gamma0, gamma, word)?;
        certified += 1;
    }
    Ok(UniquenessVerdict::Unique {
        solutions: valid.len() as u64,
        isomorphisms_certified: certified,
    })
}

/// Structural certificate: applying the relabeling word to every compatible
/// top tuple inside the union carries the `gamma0` Q-relation onto `gamma1`.
fn certify_relabeling(
    pg: &Polygroupoid,
    problem: &AmalgamationProblem,
    families: &[Vec<Vertex>],
    new_spines: &[Vec<Vertex>],
    gamma0: &[u32],
    gamma1: &[u32],
    word: &[(usize, u32)],
) -> Result<()> {
    let n = pg.n();
    let union = problem.union_verts();
    let vlist: Vec<Vertex> = union.iter().copied().collect();
    if vlist.len() < n + 1 {
        return Ok(());
    }
    // net twist per uncovered spine
    let mut twist: BTreeMap<Vec<Vertex>, GroupElement> = BTreeMap::new();
    for &(six, rank) in word {
        let entry = twist
            .entry(new_spines[six].clone())
            .or_insert_with(|| pg.group().zero());
        *entry = pg.group().add(entry, &pg.group().unrank(rank))?;
    }
    let gamma_value = |gamma: &[u32], fam: &[Vertex]| -> GroupElement {
        families
            .iter()
            .position(|f| f == fam)
            .map(|ix| pg.group().unrank(gamma[ix]))
            .unwrap_or_else(|| pg.group().zero())
    };
    for bar in ordered_tuples(&vlist, n + 1) {
        let mut fam: Vec<Vertex> = bar.clone();
        fam.sort();
        let sign = sign_of_tuple(&bar);
        let fibers: Vec<Vec<Cell>> = (1..=n + 1)
            .map(|j| pg.fiber(n, &deleted(&bar, j)))
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = fibers.iter().map(|f| f.len()).collect();
        let mut err: Option<Error> = None;
        mixed_radix_for_each(&sizes, |digits| {
            let tuple: Vec<Cell> = digits
                .iter()
                .enumerate()
                .map(|(j, &d)| fibers[j][d].clone())
                .collect();
            match pg.is_compatible(&tuple) {
                Ok(false) => return true,
                Err(e) => {
                    err = Some(e);
                    return false;
                }
                Ok(true) => {}
            }
            let run = || -> Result<bool> {
                let s = alt_sum(pg, &tuple)?;
                let expect0 =
                    crate::group::sign_scale(sign, pg.group(), &gamma_value(gamma0, &fam))?;
                let q0 = s == expect0;
                // relabel: shift each cell over an uncovered spine
                let mut shifted = Vec::with_capacity(n + 1);
                for c in &tuple {
                    let mut sorted = c.spine.clone();
                    sorted.sort();
                    let img = match twist.get(&sorted) {
                        Some(g) => {
                            let amount =
                                crate::group::sign_scale(sign_of_tuple(&c.spine), pg.group(), g)?;
                            pg.act(&amount, c)?
                        }
                        None => c.clone(),
                    };
                    shifted.push(img);
                }
                let s1 = alt_sum(pg, &shifted)?;
                let expect1 =
                    crate::group::sign_scale(sign, pg.group(), &gamma_value(gamma1, &fam))?;
                let q1 = s1 == expect1;
                Ok(q0 == q1)
            };
            match run() {
                Ok(true) => true,
                Ok(false) => {
                    err = Some(Error::structural(
                        "relabeling fails to carry the Q-constants",
                    ));
                    false
                }
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

/// The certified triple witnessing the failure in dimension n+1: a top cell
/// algebraic over its spine, an automorphism moving it while fixing every
/// proper-subset closure, and the Q-tuple pinning it to the other faces.
#[derive(Clone, Debug)]
pub struct WitnessRecord {
    pub cell: Cell,
    pub moved_to: Cell,
    pub chi: AutomorphismRep,
    pub q_tuple: Vec<Cell>,
}

/// Outcome of the witness search.
#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    Witness(Box<WitnessRecord>),
    TrivialGroup,
}

/// Produce the B(n+1)-failure witness over the given `(n+1)`-tuple of
/// distinct vertices, or report that the recovered group is trivial.
pub fn nonuniqueness_witness(pg: &Polygroupoid, w: &[Vertex]) -> Result<WitnessOutcome> {
    let n = pg.n();
    if w.len() != n + 1 || w.iter().collect::<BTreeSet<_>>().len() != n + 1 {
        return Err(Error::structural(format!(
            "witness needs {} distinct vertices",
            n + 1
        )));
    }
    // the recovered group measures the failure; trivial means no witness
    let rec = recover_group(pg, &crate::recovery::canonical_spine(pg))?;
    if rec.order() == 1 {
        return Ok(WitnessOutcome::TrivialGroup);
    }
    // the Q-tuple over w determining f from the other faces
    let mut faces: Vec<Option<Cell>> = Vec::with_capacity(n + 1);
    for j in 1..=n {
        faces.push(Some(pg.default_cell(n, &deleted(w, j))?));
    }
    faces.push(None);
    let f = horn_fill(pg, &faces)?;
    let mut q_tuple: Vec<Cell> = faces.iter().take(n).map(|c| c.clone().unwrap()).collect();
    q_tuple.push(f.clone());
    debug_assert!(pg.q_holds(&q_tuple)?);

    // a Gamma_2 automorphism moving f: try single-tuple star twists
    let star = Star::default_star(pg)?;
    let mut found: Option<(AutomorphismRep, Cell)> = None;
    'search: for u in star.tuples() {
        for g in pg.group().elements() {
            if g.is_zero() {
                continue;
            }
            let mut phi = BTreeMap::new();
            phi.insert(u.clone(), g.clone());
            let rep = automorphism_from_star(pg, &star, &phi)?;
            let map = rep.to_map(pg)?;
            let img = map.apply(&f)?;
            if img != f {
                found = Some((rep, img));
                break 'search;
            }
        }
    }
    let (chi, moved_to) = found.ok_or_else(|| {
        Error::structural("no star twist moves the cell; the action looks trivial")
    })?;
    // certification: chi fixes the closure of every proper subset of the
    // spine of f
    let map = chi.to_map(pg)?;
    let spine: Vec<Vertex> = f.spine.clone();
    for size in 0..spine.len() {
        for subset in combinations(&spine, size) {
            let cl = pg.closure_of_verts(&subset.iter().copied().collect())?;
            for v in &cl.verts {
                if map.apply_vertex(*v) != *v {
                    return Err(Error::structural("witness automorphism moves a vertex"));
                }
            }
            for c in &cl.cells {
                if &map.apply(c)? != c {
                    return Err(Error::structural(
                        "witness automorphism moves a proper-subset closure",
                    ));
                }
            }
        }
    }
    // horn filling reproduces f from the other faces
    let refilled = horn_fill(pg, &faces)?;
    if refilled != f {
        return Err(Error::structural("horn filling lost the witness cell"));
    }
    Ok(WitnessOutcome::Witness(Box::new(WitnessRecord {
        cell: f,
        moved_to,
        chi,
        q_tuple,
    })))
}
