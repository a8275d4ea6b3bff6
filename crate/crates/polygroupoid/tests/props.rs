//! Property tests for the structural laws: closure behavior, horn filling
//! against Q, serialization round trips, and the group plumbing.

use std::collections::BTreeSet;

use proptest::prelude::*;

use polygroupoid::core::{Cell, Polygroupoid, Vertex};
use polygroupoid::filling::{horn_fill, twist};
use polygroupoid::group::GroupSpec;
use polygroupoid::pgx::{parse, serialize};
use polygroupoid::standard::build_standard;

fn small_structure() -> impl Strategy<Value = Polygroupoid> {
    (
        2usize..=3,
        prop_oneof![Just(vec![2u32]), Just(vec![3]), Just(vec![2, 2])],
        0usize..=2,
    )
        .prop_map(|(n, moduli, extra)| {
            let g = GroupSpec::new(moduli).unwrap();
            build_standard(n, g, n + 1 + extra).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn closure_idempotent_and_monotone(pg in small_structure(), mask in 0u32..64) {
        let verts: BTreeSet<Vertex> = pg
            .vertices()
            .filter(|v| mask & (1 << v.0) != 0)
            .collect();
        let cl = pg.closure_of_verts(&verts).unwrap();
        // closing the closure's cells adds nothing
        let items: Vec<Cell> = cl
            .cells
            .iter()
            .cloned()
            .chain(cl.verts.iter().map(|&v| Cell::vertex(v)))
            .collect();
        let again = pg.closure(&items).unwrap();
        prop_assert_eq!(&cl, &again);
        // monotone under adding a vertex
        if let Some(extra) = pg.vertices().find(|v| !verts.contains(v)) {
            let mut bigger = verts.clone();
            bigger.insert(extra);
            let cl2 = pg.closure_of_verts(&bigger).unwrap();
            prop_assert!(cl.verts.is_subset(&cl2.verts));
            prop_assert!(cl.cells.is_subset(&cl2.cells));
        }
    }

    #[test]
    fn support_is_union_of_spines(pg in small_structure(), pick in 0usize..1000) {
        let cells = pg.all_cells().unwrap();
        let cell = cells[pick % cells.len()].clone();
        let supp = pg.support(std::slice::from_ref(&cell)).unwrap();
        let expected: BTreeSet<Vertex> = cell.spine.iter().copied().collect();
        prop_assert_eq!(supp, expected);
    }

    #[test]
    fn horn_fill_round_trip(pg in small_structure(), pick in 0usize..10_000) {
        let tuples = pg.q_tuples().unwrap();
        prop_assume!(!tuples.is_empty());
        let tuple = &tuples[pick % tuples.len()];
        for pos in 1..=pg.n() + 1 {
            let mut faces: Vec<Option<Cell>> = tuple.iter().cloned().map(Some).collect();
            faces[pos - 1] = None;
            prop_assert_eq!(&horn_fill(&pg, &faces).unwrap(), &tuple[pos - 1]);
        }
    }

    #[test]
    fn pgx_round_trip_standard(pg in small_structure()) {
        let text = serialize(&pg);
        prop_assert_eq!(parse(&text).unwrap(), pg);
    }

    #[test]
    fn pgx_round_trip_twisted(pg in small_structure(), rank in 0u32..12, drop_mask in 0u64..u64::MAX) {
        let g = pg.group().unrank(rank % pg.group().order() as u32);
        let t = twist(&pg, &g).unwrap();
        // thin the q table pseudo-randomly but keep the structure valid
        let rows: Vec<Vec<Cell>> = t
            .q_tuples()
            .unwrap()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| drop_mask & (1 << (i % 64)) != 0)
            .map(|(_, r)| r)
            .collect();
        let fixture = t.with_q_table(&rows).unwrap();
        let text = serialize(&fixture);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &fixture);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn group_laws_random_specs(moduli in proptest::collection::vec(2u32..=5, 1..=3), a in 0u32..1000, b in 0u32..1000) {
        let spec = GroupSpec::new(moduli).unwrap();
        let order = spec.order() as u32;
        let x = spec.unrank(a % order);
        let y = spec.unrank(b % order);
        prop_assert_eq!(spec.add(&x, &y).unwrap(), spec.add(&y, &x).unwrap());
        prop_assert_eq!(spec.add(&x, &spec.neg(&x).unwrap()).unwrap(), spec.zero());
        prop_assert_eq!(spec.sub(&x, &y).unwrap(), spec.add(&x, &spec.neg(&y).unwrap()).unwrap());
    }
}
