use std::collections::BTreeSet;

use nest_core::geometry::*;
use proptest::prelude::*;

fn brute_span(cells: &[Cell]) -> u64 {
    let mut best = 0;
    for a in cells {
        for b in cells {
            best = best.max(manhattan(*a, *b));
        }
    }
    best
}

fn arb_cell(r: i64) -> impl Strategy<Value = Cell> {
    (-r..=r, -r..=r).prop_map(|(x, y)| Cell::new(x, y))
}

proptest! {
    #[test]
    fn span_matches_pairwise(cells in prop::collection::vec(arb_cell(20), 0..50)) {
        let field: Field = cells.iter().copied().collect();
        let distinct: Vec<Cell> = field.iter().collect();
        prop_assert_eq!(field.span(), brute_span(&distinct));
    }

    #[test]
    fn order_is_total(a in arb_cell(3), b in arb_cell(3), c in arb_cell(3)) {
        prop_assert!(cell_less(a, b) || cell_less(b, a));
        if cell_less(a, b) && cell_less(b, a) {
            prop_assert_eq!(a, b);
        }
        if cell_less(a, b) && cell_less(b, c) {
            prop_assert!(cell_less(a, c));
        }
    }

    #[test]
    fn components_partition(cells in prop::collection::vec(arb_cell(6), 0..60)) {
        let field: Field = cells.iter().copied().collect();
        let comps = field.components();
        let mut union = BTreeSet::new();
        let mut owner = std::collections::BTreeMap::new();
        for (i, comp) in comps.iter().enumerate() {
            for c in comp {
                prop_assert!(union.insert(*c), "cell in two classes");
                owner.insert(*c, i);
            }
            // connected: BFS from its minimum reaches everything
            let first = *comp.iter().next().unwrap();
            prop_assert_eq!(&field.component_of(first), comp);
        }
        prop_assert_eq!(&union, field.cells());
        for c in field.iter() {
            for n in c.neighbors() {
                if let Some(j) = owner.get(&n) {
                    prop_assert_eq!(owner[&c], *j);
                }
            }
        }
        let keys: Vec<Cell> = comps.iter().map(|c| *c.iter().next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
    }

    #[test]
    fn disc_distance_matches_brute(
        z in 1u64..400,
        cx in -5i64..5,
        cy in -5i64..5,
        p in arb_cell(25),
    ) {
        let d = rough_disc_cells(Cell::new(cx, cy), z).unwrap();
        let brute = d.cells.iter().map(|q| manhattan(*q, p)).min().unwrap();
        prop_assert_eq!(d.distance_to(p), brute);
        prop_assert_eq!(d.contains(p), d.cells.contains(&p));
    }
}

#[test]
fn rough_disc_of_exact_size_is_a_ball() {
    for r in 0..=30i64 {
        let z = disc_size(r).unwrap();
        let d = rough_disc_cells(Cell::ORIGIN, z).unwrap();
        let ball: BTreeSet<Cell> = (-r..=r)
            .flat_map(|x| (-r..=r).map(move |y| Cell::new(x, y)))
            .filter(|c| c.norm() <= r as u64)
            .collect();
        assert_eq!(d.cells, ball, "r = {r}");
    }
}

#[test]
fn rough_disc_span_is_minimal() {
    let mut d = rough_disc_cells(Cell::ORIGIN, 1).unwrap();
    for z in 1..=2000u64 {
        assert_eq!(d.cells.len() as u64, z);
        assert_eq!(
            span_of(d.cells.iter().copied()),
            minimal_span(z).unwrap(),
            "z = {z}"
        );
        d.grow();
    }
}

#[test]
fn rough_discs_are_connected_and_nested() {
    for z in 1..300u64 {
        let a = rough_disc_cells(Cell::new(3, -2), z).unwrap();
        let b = rough_disc_cells(Cell::new(3, -2), z + 1).unwrap();
        assert!(a.cells.is_subset(&b.cells));
        let f: Field = b.cells.iter().copied().collect();
        assert!(f.is_connected());
        assert!(is_nest(&f));
    }
}

#[test]
fn border_tour_covers_every_border_cell_with_short_hops() {
    for z in 2..400u64 {
        let d = rough_disc_cells(Cell::ORIGIN, z).unwrap();
        let tour = d.border_tour();
        let field: Field = d.cells.iter().copied().collect();
        let border: BTreeSet<Cell> = field
            .iter()
            .filter(|c| field.classify(*c).unwrap().border)
            .collect();
        assert_eq!(tour.iter().copied().collect::<BTreeSet<_>>(), border);
        let mut total = 0;
        for w in tour.windows(2) {
            assert!(
                manhattan(w[0], w[1]) <= 3,
                "z = {z}: hop {} -> {}",
                w[0],
                w[1]
            );
            total += manhattan(w[0], w[1]);
        }
        let r = disc_radius(z);
        assert!(total <= 8 * (r + 2), "z = {z}: tour length {total}");
    }
}
