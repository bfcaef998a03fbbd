use std::collections::BTreeSet;

use plumbers::combinatorics::{top_cells, Cell};
use plumbers::complex::*;
use plumbers::filtration::*;
use plumbers::geometry::singularity_report;

fn s4() -> CellComplex<Cell> {
    build_complex(4, Space::S, Limits::default()).unwrap()
}

#[test]
fn faces_never_lower_complexity() {
    let s = s4();
    let t = ComplexityTable::build(&s);
    assert_eq!(t.len(), s.len());
    for c in s.iter() {
        let p = t.complexity(c).unwrap();
        for (f, _) in c.faces() {
            assert!(t.complexity(&f).unwrap() >= p, "{c} → {f}");
        }
    }
    assert!(t.complexity(&top_cells(4)[0]).is_err());
}

#[test]
fn levels_are_nested() {
    let s = s4();
    let t = ComplexityTable::build(&s);
    let mut prev = 0;
    for p in 0..=t.max() {
        let n = filtration_level(&s, &t, p).count();
        assert!(n >= prev);
        prev = n;
    }
    assert_eq!(prev, s.len());
    for o in t.orphans() {
        assert!(s.contains(&o));
    }
}

#[test]
fn isotopy_classes_partition_each_level() {
    let s = s4();
    let t = ComplexityTable::build(&s);
    for p in 0..=t.max() {
        let classes = isotopy_classes(&s, &t, p);
        let all: BTreeSet<Cell> = classes.iter().flatten().copied().collect();
        assert_eq!(all.len(), classes.iter().map(Vec::len).sum::<usize>());
        let want: BTreeSet<Cell> = s.iter().filter(|c| t.get(c).unwrap().0 == p).copied().collect();
        assert_eq!(all, want, "p={p}");
    }
}

#[test]
fn chambers_at_five_moves() {
    let k = knot_components(5);
    let mut sizes = k.sizes();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 1, 16, 16, 31, 31, 13728]);
    assert_eq!(k.cells().len(), 24usize.pow(3));
    // crossing a nonsingular wall never changes the chamber
    for c in k.cells() {
        for (w, _) in c.faces() {
            if !singularity_report(&w).is_empty() {
                continue;
            }
            for (other, _) in w.cofaces() {
                assert_eq!(k.component(&other), k.component(c));
            }
        }
    }
}

#[test]
fn simple_cells() {
    let top = top_cells(4)[3];
    assert!(is_simple(&top).is_err());
    let s = s4();
    let stable = s.iter().filter(|c| is_stable(c)).count();
    assert!(stable > 0 && stable < s.len());
    for c in s.iter().filter(|c| is_stable(c)) {
        assert!(!is_triple_point(c));
        let pts = stable_points(c).unwrap();
        if pts.iter().all(|p| p.pipes.len() == 2) && c.classes().len() == pts.len() {
            assert_eq!(is_simple(c).unwrap(), (true, pts.len()), "{c}");
        }
    }
}
