use num_traits::{One, Zero};
use plumbers::complex::*;
use plumbers::filtration::ComplexityTable;
use plumbers::geometry::Q;
use plumbers::homology::*;
use proptest::prelude::*;

/// Rank by dense Gaussian elimination.
fn dense_rank(mut rows: Vec<Vec<Q>>) -> usize {
    let mut rank = 0;
    let cols = rows.first().map_or(0, Vec::len);
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = &rows[r][c] / &rows[rank][c];
                for k in 0..cols {
                    let v = &f * &rows[rank][k];
                    rows[r][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn arb_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-2i64..3, c), r))
}

fn sparse(a: &[Vec<i64>]) -> SparseMatrix {
    let mut m = SparseMatrix::new(a.len());
    for c in 0..a[0].len() {
        m.push_column((0..a.len()).filter(|&r| a[r][c] != 0).map(|r| (r, Q::from_integer(a[r][c].into()))));
    }
    m
}

proptest! {
    #[test]
    fn rank_matches_dense_elimination(a in arb_matrix()) {
        let dense = a.iter().map(|r| r.iter().map(|&v| Q::from_integer(v.into())).collect()).collect();
        prop_assert_eq!(sparse(&a).rank(), dense_rank(dense));
    }

    #[test]
    fn solve_finds_a_preimage(a in arb_matrix(), x in proptest::collection::vec(-3i64..4, 6)) {
        let rows = a.len();
        let cols: Vec<Vec<(usize, Q)>> = (0..a[0].len())
            .map(|c| (0..rows).filter(|&r| a[r][c] != 0).map(|r| (r, Q::from_integer(a[r][c].into()))).collect())
            .collect();
        let b: Vec<(usize, Q)> = (0..rows)
            .map(|r| (r, (0..a[0].len()).map(|c| Q::from_integer((a[r][c] * x[c]).into())).sum::<Q>()))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        let y = solve(rows, &cols, &b).expect("consistent system");
        for r in 0..rows {
            let lhs: Q = (0..a[0].len()).map(|c| Q::from_integer(a[r][c].into()) * &y[c]).sum();
            let want = b.iter().find(|(i, _)| *i == r).map_or(Q::zero(), |(_, v)| v.clone());
            prop_assert_eq!(lhs, want);
        }
    }
}

#[test]
fn inconsistent_systems_have_no_solution() {
    let cols = vec![vec![(0, Q::one())], vec![(0, Q::one())]];
    assert!(solve(2, &cols, &[(1, Q::one())]).is_none());
}

#[test]
fn closed_support_homology_of_the_ball() {
    for m in [3, 4] {
        let p = build_complex(m, Space::P, Limits::default()).unwrap();
        let ranks: Vec<(usize, usize)> = homology_ranks(&p).into_iter().filter(|(_, r)| *r > 0).collect();
        assert_eq!(ranks, vec![(3 * (m - 1), 1)], "m={m}");
    }
}

#[test]
fn pages_reindex_and_back() {
    let b = build_blowup(4, Limits::default()).unwrap();
    let s = build_complex(4, Space::S, Limits::default()).unwrap();
    let t = ComplexityTable::build(&s);
    let pages = spectral_sequence(&b, &t, 3).unwrap();
    for pg in &pages {
        assert_eq!(pg.reindexed().filtration_indexed(), *pg);
        assert!(pg.differential_is_square_zero());
    }
    let total: usize = pages[0].entries.values().sum();
    assert_eq!(total, b.len());
    let json = pages_to_json(4, &pages, true);
    assert_eq!(json["pages"].as_array().unwrap().len(), pages.len());
}
