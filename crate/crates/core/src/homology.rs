//! Exact rational linear algebra, homology ranks, and the spectral sequence
//! of the complexity filtration.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::complex::{BlowupCell, CellComplex, Stratum};
use crate::filtration::ComplexityTable;
use crate::error::Result;
use crate::geometry::Q;

type SparseVec = Vec<(usize, Q)>;

/// `a - f * b` for sorted sparse vectors.
fn axpy(a: &SparseVec, f: &Q, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, -(f * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - f * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn normalize(mut v: SparseVec) -> SparseVec {
    v.sort_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, x) in v {
        match out.last_mut() {
            Some((k, y)) if *k == i => *y += x,
            _ => out.push((i, x)),
        }
    }
    out.retain(|(_, x)| !x.is_zero());
    out
}

/// A column-sparse rational matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    columns: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(rows: usize) -> Self {
        SparseMatrix {
            rows,
            columns: Vec::new(),
        }
    }

    pub fn push_column(&mut self, col: impl IntoIterator<Item = (usize, Q)>) {
        let col = normalize(col.into_iter().collect());
        debug_assert!(col.iter().all(|(i, _)| *i < self.rows));
        self.columns.push(col);
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Q {
        self.columns[col]
            .binary_search_by_key(&row, |e| e.0)
            .map(|k| self.columns[col][k].1.clone())
            .unwrap_or_else(|_| Q::zero())
    }

    /// Rank by Gaussian elimination, sparsest columns first.
    pub fn rank(&self) -> usize {
        let mut order: Vec<usize> = (0..self.columns.len()).collect();
        order.sort_by_key(|&j| self.columns[j].len());
        let mut pivots: HashMap<usize, SparseVec> = HashMap::new();
        for j in order {
            let mut v = self.columns[j].clone();
            while let Some((lead, a)) = v.first().cloned() {
                match pivots.get(&lead) {
                    Some(p) => v = axpy(&v, &a, p),
                    None => {
                        let inv = a.recip();
                        let p: SparseVec = v.into_iter().map(|(i, x)| (i, x * &inv)).collect();
                        pivots.insert(lead, p);
                        break;
                    }
                }
            }
        }
        pivots.len()
    }
}

/// A solution `x` of `Σ_j x_j columns[j] = rhs`, if one exists.
pub fn solve(rows: usize, columns: &[Vec<(usize, Q)>], rhs: &[(usize, Q)]) -> Option<Vec<Q>> {
    // pivot vectors with their expansion in the original columns
    let mut pivots: HashMap<usize, (SparseVec, SparseVec)> = HashMap::new();
    for (j, col) in columns.iter().enumerate() {
        let mut v = normalize(col.clone());
        debug_assert!(v.iter().all(|(i, _)| *i < rows));
        let mut combo: SparseVec = vec![(j, Q::one())];
        while let Some((lead, a)) = v.first().cloned() {
            match pivots.get(&lead) {
                Some((p, pc)) => {
                    v = axpy(&v, &a, p);
                    combo = axpy(&combo, &a, pc);
                }
                None => {
                    let inv = a.recip();
                    let scale = |w: SparseVec| -> SparseVec { w.into_iter().map(|(i, x)| (i, x * &inv)).collect() };
                    pivots.insert(lead, (scale(v), scale(combo)));
                    break;
                }
            }
        }
    }
    let mut v = normalize(rhs.to_vec());
    let mut x: SparseVec = Vec::new();
    while let Some((lead, a)) = v.first().cloned() {
        let (p, pc) = pivots.get(&lead)?;
        v = axpy(&v, &a, p);
        x = axpy(&x, &(-&a), pc);
    }
    let mut out = vec![Q::zero(); columns.len()];
    for (j, c) in x {
        out[j] = c;
    }
    Some(out)
}

/// Boundary matrix `∂_d : C_d → C_{d-1}`.
pub fn boundary_matrix<K: Stratum>(complex: &CellComplex<K>, d: usize) -> SparseMatrix {
    let mut m = SparseMatrix::new(if d == 0 { 0 } else { complex.cells(d - 1).len() });
    if d == 0 {
        return m;
    }
    for i in 0..complex.cells(d).len() {
        m.push_column(
            complex
                .boundary_column(d, i)
                .iter()
                .map(|&(j, s)| (j as usize, Q::from_integer((s as i64).into()))),
        );
    }
    m
}

/// `(degree, rank H_degree)` for every degree of the complex.
pub fn homology_ranks<K: Stratum>(complex: &CellComplex<K>) -> Vec<(usize, usize)> {
    let top = complex.top_dim();
    let ranks: Vec<usize> = (0..=top + 1)
        .map(|d| if d == 0 || d > top { 0 } else { boundary_matrix(complex, d).rank() })
        .collect();
    (0..=top)
        .map(|d| (d, complex.cells(d).len() - ranks[d] - ranks[d + 1]))
        .collect()
}

/// One page of the spectral sequence, in filtration coordinates `(p′, q′)`
/// or, after [`SpectralPage::reindexed`], in cohomological coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectralPage {
    pub r: usize,
    pub m: usize,
    pub entries: BTreeMap<(i64, i64), usize>,
    /// `(source, target, rank)` of the nonzero components of `d_r`.
    pub differentials: Vec<((i64, i64), (i64, i64), usize)>,
    pub reindexed: bool,
}

impl SpectralPage {
    /// `p = −p′`, `q = (3m − 4) − q′ + 2p′`.
    pub fn reindexed(&self) -> SpectralPage {
        let top = 3 * self.m as i64 - 4;
        let f = |(p, q): (i64, i64)| (-p, top - q + 2 * p);
        SpectralPage {
            r: self.r,
            m: self.m,
            entries: self.entries.iter().map(|(k, v)| (f(*k), *v)).collect(),
            differentials: self.differentials.iter().map(|(s, t, k)| (f(*s), f(*t), *k)).collect(),
            reindexed: true,
        }
    }

    /// Inverse of [`SpectralPage::reindexed`].
    pub fn filtration_indexed(&self) -> SpectralPage {
        let top = 3 * self.m as i64 - 4;
        let f = |(p, q): (i64, i64)| (-p, top - q - 2 * p);
        SpectralPage {
            r: self.r,
            m: self.m,
            entries: self.entries.iter().map(|(k, v)| (f(*k), *v)).collect(),
            differentials: self.differentials.iter().map(|(s, t, k)| (f(*s), f(*t), *k)).collect(),
            reindexed: false,
        }
    }

    pub fn rank(&self, at: (i64, i64)) -> usize {
        self.entries.get(&at).copied().unwrap_or(0)
    }

    /// Entry-wise: incoming plus outgoing rank of `d_r` fits in the entry,
    /// which is what `d_r ∘ d_r = 0` allows.
    pub fn differential_is_square_zero(&self) -> bool {
        let mut used: HashMap<(i64, i64), usize> = HashMap::new();
        for (s, t, k) in &self.differentials {
            *used.entry(*s).or_default() += k;
            *used.entry(*t).or_default() += k;
        }
        used.iter().all(|(at, u)| *u <= self.rank(*at))
    }
}

/// Persistence pairing of a filtered complex: each pair records the filtration
/// levels of the cell that is killed and of the cell that kills it.
#[derive(Debug, Clone)]
pub struct Pairing {
    /// `(dim, level)` of every essential cell.
    pub essential: Vec<(usize, u32)>,
    /// `(dim of killed cell, level of killed, level of killer)`.
    pub pairs: Vec<(usize, u32, u32)>,
    /// `(dim, level)` cell counts.
    pub counts: BTreeMap<(usize, u32), usize>,
}

/// Reduces the boundary matrix with cells ordered so that every set
/// `{cx ≥ p}` is an initial segment. Boundaries never lower complexity, so
/// these sets are subcomplexes.
pub fn persistence(blowup: &CellComplex<BlowupCell>, table: &ComplexityTable) -> Result<Pairing> {
    let mut order: Vec<(std::cmp::Reverse<u32>, usize, usize)> = Vec::with_capacity(blowup.len());
    for d in 0..=blowup.top_dim() {
        for (i, c) in blowup.cells(d).iter().enumerate() {
            order.push((std::cmp::Reverse(table.lifted(c)?), d, i));
        }
    }
    order.sort();
    let mut position: HashMap<(usize, usize), usize> = HashMap::with_capacity(order.len());
    for (k, &(_, d, i)) in order.iter().enumerate() {
        position.insert((d, i), k);
    }
    let level = |k: usize| order[k].0 .0;
    let mut counts = BTreeMap::new();
    for &(l, d, _) in &order {
        *counts.entry((d, l.0)).or_insert(0) += 1;
    }
    let mut low_of: HashMap<usize, SparseVec> = HashMap::new();
    let mut paired = vec![false; order.len()];
    let mut pairs = Vec::new();
    for (k, &(_, d, i)) in order.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let mut col: SparseVec = normalize(
            blowup
                .boundary_column(d, i)
                .iter()
                .map(|&(j, s)| (position[&(d - 1, j as usize)], Q::from_integer((s as i64).into())))
                .collect(),
        );
        while let Some((low, a)) = col.last().cloned() {
            match low_of.get(&low) {
                Some(p) => {
                    let f = a / &p.last().expect("nonempty pivot").1;
                    col = axpy(&col, &f, p);
                }
                None => {
                    paired[low] = true;
                    paired[k] = true;
                    pairs.push((d - 1, level(low), level(k)));
                    low_of.insert(low, col);
                    break;
                }
            }
        }
    }
    let essential = order
        .iter()
        .enumerate()
        .filter(|(k, _)| !paired[*k])
        .map(|(_, &(l, d, _))| (d, l.0))
        .collect();
    Ok(Pairing { essential, pairs, counts })
}

impl Pairing {
    fn coord(dim: usize, level: u32) -> (i64, i64) {
        (level as i64, dim as i64 + level as i64)
    }

    /// Page `r` in coordinates `(p′, q′) = (cx, dim + cx)`. A pair whose
    /// levels differ by `ℓ` survives to pages `r ≤ ℓ` and is cancelled by
    /// `d_ℓ`; essential cells survive to `E^∞`.
    pub fn page(&self, m: usize, r: usize) -> SpectralPage {
        let mut entries: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        if r == 0 {
            for (&(d, l), &c) in &self.counts {
                entries.insert(Self::coord(d, l), c);
            }
        } else {
            for &(d, l) in &self.essential {
                *entries.entry(Self::coord(d, l)).or_default() += 1;
            }
            for &(d, lo, hi) in &self.pairs {
                if (lo - hi) as usize >= r {
                    *entries.entry(Self::coord(d, lo)).or_default() += 1;
                    *entries.entry(Self::coord(d + 1, hi)).or_default() += 1;
                }
            }
        }
        let mut diffs: BTreeMap<((i64, i64), (i64, i64)), usize> = BTreeMap::new();
        for &(d, lo, hi) in &self.pairs {
            if (lo - hi) as usize == r {
                *diffs.entry((Self::coord(d + 1, hi), Self::coord(d, lo))).or_default() += 1;
            }
        }
        entries.retain(|_, v| *v > 0);
        SpectralPage {
            r,
            m,
            entries,
            differentials: diffs.into_iter().map(|((s, t), k)| (s, t, k)).collect(),
            reindexed: false,
        }
    }

    /// The last page on which a differential can be nonzero, plus one.
    pub fn infinity_page(&self) -> usize {
        self.pairs.iter().map(|&(_, lo, hi)| (lo - hi) as usize).max().unwrap_or(0) + 1
    }

    /// `Σ_{p′} E^∞` per total degree `q′ − p′`.
    pub fn limit_ranks(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &(d, _) in &self.essential {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }
}

/// Pages `0..=max_page` of the spectral sequence of the complexity filtration.
pub fn spectral_sequence(
    blowup: &CellComplex<BlowupCell>,
    table: &ComplexityTable,
    max_page: usize,
) -> Result<Vec<SpectralPage>> {
    let pairing = persistence(blowup, table)?;
    Ok((0..=max_page).map(|r| pairing.page(blowup.m(), r)).collect())
}

/// `ss.json`.
pub fn pages_to_json(m: usize, pages: &[SpectralPage], reindexed: bool) -> serde_json::Value {
    let pages: Vec<serde_json::Value> = pages
        .iter()
        .map(|p| {
            let p = if reindexed { p.reindexed() } else { p.clone() };
            let entries: Vec<[i64; 3]> = p.entries.iter().map(|(&(a, b), &v)| [a, b, v as i64]).collect();
            serde_json::json!({"r": p.r, "entries": entries})
        })
        .collect();
    serde_json::json!({"m": m, "pages": pages, "reindexed": reindexed})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, Limits, Space};

    fn qi(v: i64) -> Q {
        Q::from_integer(v.into())
    }

    #[test]
    fn rank_of_small_matrix() {
        let mut m = SparseMatrix::new(3);
        m.push_column([(0, qi(1)), (1, qi(1))]);
        m.push_column([(1, qi(1)), (2, qi(1))]);
        m.push_column([(0, qi(1)), (2, qi(-1))]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.get(2, 2), qi(-1));
    }

    #[test]
    fn solve_finds_combination() {
        let cols = vec![vec![(0, qi(1)), (1, qi(1))], vec![(1, qi(2))]];
        let x = solve(2, &cols, &[(0, qi(3)), (1, qi(7))]).unwrap();
        assert_eq!(x, vec![qi(3), Q::new(2.into(), 1.into())]);
        assert!(solve(3, &cols, &[(2, qi(1))]).is_none());
    }

    #[test]
    fn closed_support_homology_of_the_cube() {
        // P_m is an open cube: a single class in the top degree
        for m in [3, 4] {
            let p = build_complex(m, Space::P, Limits::default()).unwrap();
            let h = homology_ranks(&p);
            let top = 3 * (m - 1);
            assert!(h.iter().all(|&(d, r)| r == usize::from(d == top)), "{h:?}");
        }
    }

    #[test]
    fn reindex_round_trip() {
        let mut page = SpectralPage {
            r: 1,
            m: 4,
            entries: BTreeMap::from([((1, 9), 5), ((2, 9), 1)]),
            differentials: vec![],
            reindexed: false,
        };
        let re = page.reindexed();
        assert_eq!(re.rank((-1, 1)), 5);
        page.reindexed = true;
        let back = re.filtration_indexed();
        assert_eq!(back.entries, page.entries);
    }
}
