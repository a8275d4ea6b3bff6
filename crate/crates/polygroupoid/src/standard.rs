//! The canonical structures `H_{G,n}`: trivial intermediate fibers, top
//! fibers `I^(n) x G`, `Q` the vanishing alternating label sum, inverse maps
//! permuting spines with a parity sign on the label.

use crate::axioms::{AxiomFamily, CheckOptions};
use crate::combo::ordered_tuples;
use crate::core::{default_names, Cell, Polygroupoid, Vertex};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::perm::Perm;

/// Build the standard model with `m` vertices named `v0..`.
pub fn build_standard(n: usize, group: GroupSpec, m: usize) -> Result<Polygroupoid> {
    Polygroupoid::new_standard(n, group, default_names(m))
}

/// The action `g.f` on a top cell; same spine, label translated by `g`.
pub fn act(pg: &Polygroupoid, g: &GroupElement, f: &Cell) -> Result<Cell> {
    pg.act(g, f)
}

/// The generalized inverse `iota_sigma(f)`: spine permuted by `sigma`, label
/// negated for odd `sigma`.
pub fn iota_apply(pg: &Polygroupoid, sigma: &Perm, f: &Cell) -> Result<Cell> {
    pg.iota(sigma, f)
}

/// A verdict for one of the inverse-map properties.
#[derive(Clone, Debug)]
pub struct PropertyVerdict {
    pub property: &'static str,
    pub pass: bool,
    pub detail: String,
    pub witness: Option<Vec<Cell>>,
    pub checked: u64,
}

fn prop_pass(property: &'static str, checked: u64) -> PropertyVerdict {
    PropertyVerdict {
        property,
        pass: true,
        detail: String::new(),
        witness: None,
        checked,
    }
}

fn prop_fail(
    property: &'static str,
    detail: String,
    witness: Vec<Cell>,
    checked: u64,
) -> PropertyVerdict {
    PropertyVerdict {
        property,
        pass: false,
        detail,
        witness: Some(witness),
        checked,
    }
}

/// Exhaustively verify the inverse-map properties: trivial intermediate
/// fibers, `iota` fiber bijections, functoriality `iota_{st} = iota_s iota_t`,
/// the sign rule on labels, and preservation of `Q` under the transposition
/// rewrite.
pub fn check_inverse_properties(pg: &Polygroupoid) -> Result<Vec<PropertyVerdict>> {
    if !pg.has_iota() {
        return Err(Error::precondition("structure has no inverse maps"));
    }
    if !pg.has_action() {
        return Err(Error::precondition("structure has no group action"));
    }
    let n = pg.n();
    let verts: Vec<Vertex> = pg.vertices().collect();
    let tops: Vec<Cell> = pg
        .all_cells()?
        .into_iter()
        .filter(|c| c.level == n)
        .collect();
    let perms = Perm::all(n);
    let mut out = Vec::new();

    // trivial intermediate fibers
    {
        let mut checked = 0u64;
        let mut verdict = None;
        'outer: for level in 2..n {
            for spine in ordered_tuples(&verts, level) {
                checked += 1;
                let size = pg.fiber_size(level, &spine)?;
                if size != 1 {
                    verdict = Some(prop_fail(
                        "trivial_lower_fibers",
                        format!("fiber at level {level} has {size} cells"),
                        pg.fiber(level, &spine)?,
                        checked,
                    ));
                    break 'outer;
                }
            }
        }
        out.push(verdict.unwrap_or_else(|| prop_pass("trivial_lower_fibers", checked)));
    }

    // iota_sigma restricts to a bijection P(a) -> P(sigma a)
    {
        let mut checked = 0u64;
        let mut verdict = None;
        'outer: for sigma in &perms {
            for spine in ordered_tuples(&verts, n) {
                let fiber = pg.fiber(n, &spine)?;
                let target_spine = sigma.act_on(&spine);
                let target: std::collections::BTreeSet<Cell> =
                    pg.fiber(n, &target_spine)?.into_iter().collect();
                let mut images = std::collections::BTreeSet::new();
                for f in &fiber {
                    checked += 1;
                    let img = pg.iota(sigma, f)?;
                    if !target.contains(&img) || !images.insert(img.clone()) {
                        verdict = Some(prop_fail(
                            "iota_fiber_bijection",
                            format!("iota_{sigma} fails to biject the fiber"),
                            vec![f.clone(), img],
                            checked,
                        ));
                        break 'outer;
                    }
                }
                if images.len() != target.len() {
                    verdict = Some(prop_fail(
                        "iota_fiber_bijection",
                        format!("iota_{sigma} misses part of the target fiber"),
                        fiber,
                        checked,
                    ));
                    break 'outer;
                }
            }
        }
        out.push(verdict.unwrap_or_else(|| prop_pass("iota_fiber_bijection", checked)));
    }

    // iota_{sigma tau} = iota_sigma . iota_tau
    {
        let mut checked = 0u64;
        let mut verdict = None;
        'outer: for sigma in &perms {
            for tau in &perms {
                let st = sigma.compose(tau);
                for f in &tops {
                    checked += 1;
                    let lhs = pg.iota(&st, f)?;
                    let rhs = pg.iota(sigma, &pg.iota(tau, f)?)?;
                    if lhs != rhs {
                        verdict = Some(prop_fail(
                            "iota_composition",
                            format!("iota_({sigma})({tau}) differs from the composite"),
                            vec![f.clone(), lhs, rhs],
                            checked,
                        ));
                        break 'outer;
                    }
                }
            }
        }
        out.push(verdict.unwrap_or_else(|| prop_pass("iota_composition", checked)));
    }

    // iota_sigma(f + g) = iota_sigma(f) + sign(sigma) g
    {
        let mut checked = 0u64;
        let mut verdict = None;
        'outer: for sigma in &perms {
            for f in &tops {
                for g in pg.group().elements() {
                    checked += 1;
                    let lhs = pg.iota(sigma, &pg.act(&g, f)?)?;
                    let scaled = crate::group::sign_scale(sigma.parity(), pg.group(), &g)?;
                    let rhs = pg.act(&scaled, &pg.iota(sigma, f)?)?;
                    if lhs != rhs {
                        verdict = Some(prop_fail(
                            "iota_sign_rule",
                            format!("iota_{sigma}(f + {g}) breaks the sign rule"),
                            vec![f.clone(), lhs, rhs],
                            checked,
                        ));
                        break 'outer;
                    }
                }
            }
        }
        out.push(verdict.unwrap_or_else(|| prop_pass("iota_sign_rule", checked)));
    }

    // Q survives the adjacent-transposition rewrite
    {
        let mut checked = 0u64;
        let mut verdict = None;
        'outer: for tuple in pg.q_tuples()? {
            for i in 1..n {
                checked += 1;
                let probe = transposition_rewrite(pg, &tuple, i)?;
                if !pg.q_holds(&probe)? {
                    verdict = Some(prop_fail(
                        "q_transposition_rewrite",
                        format!("rewrite at i = {i} loses Q"),
                        probe,
                        checked,
                    ));
                    break 'outer;
                }
            }
        }
        out.push(verdict.unwrap_or_else(|| prop_pass("q_transposition_rewrite", checked)));
    }

    Ok(out)
}

/// The transposition rewrite of a Q-tuple at `1 <= i <= n-1`:
/// `(iota_{s_{i-1}} f_1, .., iota_{s_{i-1}} f_{i-1}, f_{i+1}, f_i,
///   iota_{s_i} f_{i+2}, .., iota_{s_i} f_{n+1})`
/// where `s_j` is the transposition `(j, j+1)` of `[n]`.
pub fn transposition_rewrite(pg: &Polygroupoid, tuple: &[Cell], i: usize) -> Result<Vec<Cell>> {
    let n = pg.n();
    if i < 1 || i >= n {
        return Err(Error::structural(format!(
            "rewrite index {i} outside [1, {}]",
            n - 1
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    for k in 1..i {
        let s = Perm::transposition(n, i - 2, i - 1); // (i-1, i) 1-based
        out.push(pg.iota(&s, &tuple[k - 1])?);
    }
    out.push(tuple[i].clone());
    out.push(tuple[i - 1].clone());
    for k in (i + 2)..=(n + 1) {
        let s = Perm::transposition(n, i - 1, i); // (i, i+1) 1-based
        out.push(pg.iota(&s, &tuple[k - 1])?);
    }
    Ok(out)
}

/// Quick structural test used as a precondition by the star machinery:
/// inverse maps and action present, with full certification available via
/// [`certify_polygroupoid_with_inverses`].
pub fn has_inverse_capability(pg: &Polygroupoid) -> bool {
    pg.has_iota() && pg.has_action()
}

/// Run the full definition of "connected n-ary polygroupoid with inverses":
/// the five axiom families plus the inverse-map properties.
pub fn certify_polygroupoid_with_inverses(pg: &Polygroupoid, opts: &CheckOptions) -> Result<()> {
    let report = pg.check_axioms(&AxiomFamily::ALL, opts)?;
    if let Some(v) = report.verdicts.iter().find(|v| !v.pass) {
        return Err(Error::precondition(format!(
            "axiom {} fails: {}",
            v.family.name(),
            v.detail
        )));
    }
    let props = check_inverse_properties(pg)?;
    if let Some(v) = props.iter().find(|v| !v.pass) {
        return Err(Error::precondition(format!(
            "inverse property {} fails: {}",
            v.property, v.detail
        )));
    }
    Ok(())
}
