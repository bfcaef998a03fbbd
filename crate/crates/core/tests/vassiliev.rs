use num_traits::{One, Zero};
use plumbers::combinatorics::*;
use plumbers::complex::*;
use plumbers::filtration::{knot_components, stable_points};
use plumbers::geometry::{q, representative, Q};
use plumbers::invariants::{v2_of_curve, ComponentIndicator, Constant, Invariant, ValueTable, V2};
use plumbers::vassiliev::*;

fn named(x: &str, y: &str, z: &str, classes: &[(Direction, &[u8])]) -> Cell {
    let part = SingularityPartition::new(classes.iter().map(|(d, i)| AdmissibleSet::new(*d, i.iter().copied()))).unwrap();
    Cell::from_name(&CellName::new(TriplePerm::from_digits(x, y, z).unwrap(), part).unwrap()).unwrap()
}

fn t(a: u8, b: u8, d: Direction) -> DecoratedTransposition {
    DecoratedTransposition::new(a, b, d)
}

/// Stable cells of codimension `n` with `n` double points.
fn generic_stable(cells: &[Cell]) -> Vec<(Cell, usize)> {
    cells
        .iter()
        .filter_map(|c| {
            let pts = stable_points(c)?;
            let cl = c.classes();
            (pts.iter().all(|p| p.pipes.len() == 2) && cl.len() == pts.len() && cl.iter().all(|k| k.len() == 2))
                .then_some((*c, pts.len()))
        })
        .collect()
}

#[test]
fn pair_class_gives_a_difference() {
    let e = named("1342", "3142", "3124", &[(Direction::X, &[3, 4])]);
    let b = BlowupCell::new(e, &[t(3, 4, Direction::X)]).unwrap();
    let chain = class_coboundary(&b, &e.classes()[0]).unwrap();
    assert_eq!(chain.len(), 2);
    let coefs: Vec<Q> = chain.iter().map(|(_, v)| v.clone()).collect();
    assert!(coefs.contains(&Q::one()) && coefs.contains(&-Q::one()));
    for (c, v) in chain.iter() {
        assert_eq!(c.rho, 0);
        let seq = c.base.seq(Direction::X);
        let three_first = seq.iter().position(|&x| x == 3) < seq.iter().position(|&x| x == 4);
        assert_eq!(*v == Q::one(), three_first);
    }
}

#[test]
fn path_on_a_triple_class_gives_a_sum() {
    let e = named("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
    let class = &e.classes()[0];
    let b = BlowupCell::new(e, &[t(1, 2, Direction::Y), t(2, 5, Direction::Y)]).unwrap();
    let w = SequentialityWitness::find(class, &b.transpositions()).unwrap();
    assert_eq!(w.path, vec![1, 2, 5]);
    assert_eq!(w.minus(), vec![5, 2, 1]);
    let chain = class_coboundary(&b, class).unwrap();
    assert_eq!(chain.len(), 2);
    assert!(chain.iter().all(|(_, v)| *v == Q::one()));
    let cycle = BlowupCell::new(e, &class.transpositions()).unwrap();
    assert!(class_coboundary(&cycle, class).unwrap().is_zero());
    // not a class of e
    let other = AdmissibleSet::new(Direction::X, [1, 2]);
    assert!(class_coboundary(&b, &other).is_err());
}

#[test]
fn total_coboundary_needs_codimension_one() {
    let e = named("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
    let b = BlowupCell::new(e, &[t(1, 2, Direction::Y)]).unwrap();
    assert!(total_coboundary(&b).is_err());
}

#[test]
fn derivatives_of_constants_vanish() {
    let s = singular_cells(4, Limits::default()).unwrap();
    let values = ValueTable::build(&Constant(q(5, 2)), 4).unwrap();
    // a pair class resolves into a difference; longer path classes into sums
    let mut checked = 0;
    for c in derivative_cells(&s).unwrap() {
        if c.base.classes().iter().any(|k| k.len() == 2) {
            assert!(vassiliev_derivative(&values, "const:5/2", &c).unwrap().is_zero(), "{c}");
            checked += 1;
        }
    }
    assert!(checked > 0);
    let chain = taylor_series(&values, "const:5/2", 4, &s).unwrap();
    assert!(chain.chain.is_zero());
}

#[test]
fn derivative_on_stable_cells_is_the_alternating_sum() {
    let s = singular_cells(5, Limits::default()).unwrap();
    let values = ValueTable::build(&V2, 5).unwrap();
    let mut checked = 0;
    let mut nonzero = 0;
    for (e, n) in generic_stable(&s).into_iter().filter(|(_, n)| *n >= 2).step_by(3) {
        let classes = e.classes();
        let mut oracle = Q::zero();
        for bits in 0..1u32 << n {
            let mut k = e;
            for (i, c) in classes.iter().enumerate() {
                let (a, b) = (*c.indices.first().unwrap(), *c.indices.last().unwrap());
                let order = if bits >> i & 1 == 0 { [a, b] } else { [b, a] };
                k = k.resolve_class(c.direction, &order).unwrap();
            }
            let sign = if bits.count_ones() % 2 == 0 { Q::one() } else { -Q::one() };
            oracle += sign * v2_of_curve(&representative(&k)).unwrap();
        }
        let index = TranspositionIndex::new(5).unwrap();
        let lift = BlowupCell { base: e, rho: e.transposition_mask(&index) };
        assert_eq!(vassiliev_derivative(&values, "v2", &lift).unwrap(), oracle, "{lift}");
        checked += 1;
        nonzero += usize::from(!oracle.is_zero());
    }
    assert!(checked > 100 && nonzero > 0, "{checked} cells, {nonzero} nonzero");
}

#[test]
fn wall_between_trefoil_and_unknot() {
    let s = singular_cells(5, Limits::default()).unwrap();
    let values = ValueTable::build(&V2, 5).unwrap();
    let index = TranspositionIndex::new(5).unwrap();
    let mut found = 0;
    for (e, _) in generic_stable(&s).into_iter().filter(|(_, n)| *n == 1) {
        let c = &e.classes()[0];
        let (a, b) = (*c.indices.first().unwrap(), *c.indices.last().unwrap());
        let plus = e.resolve_class(c.direction, &[a, b]).unwrap();
        let minus = e.resolve_class(c.direction, &[b, a]).unwrap();
        let (vp, vm) = (values.get(&plus).unwrap().clone(), values.get(&minus).unwrap().clone());
        if vp == vm {
            continue;
        }
        let lift = BlowupCell { base: e, rho: e.transposition_mask(&index) };
        assert_eq!(vassiliev_derivative(&values, "v2", &lift).unwrap(), vp - vm);
        found += 1;
    }
    assert!(found > 0);
}

#[test]
fn taylor_chain_of_a_chamber_indicator_lives_on_its_walls() {
    let m = 5;
    let comps = knot_components(m);
    // the smallest chamber other than the unknot
    let id = (1..comps.len()).min_by_key(|&i| comps.sizes()[i]).unwrap();
    let inv = ComponentIndicator::new(&comps, id);
    let s = singular_cells(m, Limits::default()).unwrap();
    let values = ValueTable::build(&inv, m).unwrap();
    let mut chain = taylor_series(&values, &inv.id(), m, &s).unwrap();
    chain.verify().unwrap();
    // walls of the chamber: singular faces of its cells whose other side lies outside
    let mut walls = std::collections::BTreeSet::new();
    for k in comps.members(id) {
        for (w, _) in k.faces() {
            let Some((other, _)) = w.cofaces().into_iter().find(|(c, _)| c != k) else { continue };
            if s.binary_search(&w).is_ok() && comps.component(&other) != Some(id) {
                walls.insert(w);
            }
        }
    }
    let support: std::collections::BTreeSet<Cell> =
        chain.chain.iter().filter(|(c, _)| c.base.dim() == 3 * m - 4).map(|(c, _)| c.base).collect();
    assert_eq!(support, walls);
}

#[test]
fn chord_diagrams() {
    let s = singular_cells(5, Limits::default()).unwrap();
    let stable = generic_stable(&s);
    let one = stable.iter().find(|(_, n)| *n == 1).unwrap().0;
    assert_eq!(chord_diagram_of(&one).unwrap().chords, vec![(0, 1)]);
    let two = stable.iter().find(|(_, n)| *n == 2).unwrap().0;
    let d = chord_diagram_of(&two).unwrap();
    assert_eq!(d.chords.len(), 2);
    let mut ends: Vec<usize> = d.chords.iter().flat_map(|&(a, b)| [a, b]).collect();
    ends.sort_unstable();
    assert_eq!(ends, vec![0, 1, 2, 3]);
    let triple = s.iter().find(|c| plumbers::filtration::is_triple_point(c)).unwrap();
    assert_eq!(chord_diagram_of(triple).unwrap().chords.len(), 3);
    let top = Cell::top(&TriplePerm::identity(5).unwrap());
    assert!(chord_diagram_of(&top).is_err());
}

#[test]
fn coboundaries_commute_on_a_two_class_cell() {
    let e = named("2413", "1423", "3412", &[(Direction::X, &[1, 3]), (Direction::Y, &[1, 4])]);
    let classes = e.classes();
    let index = TranspositionIndex::new(5).unwrap();
    let b = BlowupCell { base: e, rho: e.transposition_mask(&index) };
    let ab = compose_coboundaries(&b, &[classes[0].clone(), classes[1].clone()]).unwrap();
    let ba = compose_coboundaries(&b, &[classes[1].clone(), classes[0].clone()]).unwrap();
    assert_eq!(ab, ba);
    assert_eq!(ab.len(), 4);
}
