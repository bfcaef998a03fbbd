//! The complexity filtration of the discriminant, isotopy classes of
//! singular cells, and connected components of the space of knots.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{top_cells, Cell};
use crate::complex::{BlowupCell, CellComplex};
use crate::error::{Error, Result};
use crate::geometry::{is_singular, singularity_report, LocusKind, SingularityReport};

/// How a complexity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SimpleBase,
    CofaceRecursion,
    OrphanFallback,
}

/// Double-point count if every singularity is a transverse double point.
fn simple_count(report: &SingularityReport<i64>) -> Option<usize> {
    if report.intersections.iter().any(|x| x.kind != LocusKind::TransversePoint) {
        return None;
    }
    let mut points: Vec<&[i64; 3]> = report.intersections.iter().map(|x| &x.locus.lo).collect();
    points.sort_unstable();
    points.dedup();
    (points.len() == report.intersections.len()).then_some(points.len())
}

/// Whether the only singularities are transverse double points at distinct
/// points, together with their number.
pub fn is_simple(cell: &Cell) -> Result<(bool, usize)> {
    let report = singularity_report(cell);
    if report.is_empty() {
        return Err(Error::domain(format!("{} is not singular", cell.name())));
    }
    Ok(match simple_count(&report) {
        Some(k) => (true, k),
        None => (false, 0),
    })
}

#[derive(Debug, Clone)]
pub struct ComplexityTable {
    m: usize,
    entries: HashMap<Cell, (u32, Provenance)>,
}

impl ComplexityTable {
    /// Fills the table over the cells of `S_m`, highest dimension first so
    /// that every coface is known before it is needed.
    pub fn build(s: &CellComplex<Cell>) -> Self {
        let m = s.m();
        let top = 3 * m - 4;
        let mut entries: HashMap<Cell, (u32, Provenance)> = HashMap::with_capacity(s.len());
        for dim in (0..=s.top_dim()).rev() {
            let level: Vec<(Cell, (u32, Provenance))> = s
                .cells(dim)
                .par_iter()
                .map(|c| {
                    if dim == top {
                        return (*c, (1, Provenance::SimpleBase));
                    }
                    let report = singularity_report(c);
                    if let Some(k) = simple_count(&report) {
                        return (*c, (k as u32, Provenance::SimpleBase));
                    }
                    let best = c
                        .cofaces()
                        .iter()
                        .filter_map(|(f, _)| entries.get(f).map(|e| e.0))
                        .max();
                    match best {
                        Some(v) => (*c, (v, Provenance::CofaceRecursion)),
                        None => (*c, (report.components as u32, Provenance::OrphanFallback)),
                    }
                })
                .collect();
            entries.extend(level);
        }
        ComplexityTable { m, entries }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, cell: &Cell) -> Option<(u32, Provenance)> {
        self.entries.get(cell).copied()
    }

    pub fn complexity(&self, cell: &Cell) -> Result<u32> {
        self.get(cell)
            .map(|e| e.0)
            .ok_or_else(|| Error::domain(format!("{} is not a cell of S_{}", cell.name(), self.m)))
    }

    /// Complexity of a blowup cell, read off its base.
    pub fn lifted(&self, cell: &BlowupCell) -> Result<u32> {
        self.complexity(&cell.base)
    }

    pub fn max(&self) -> u32 {
        self.entries.values().map(|e| e.0).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn orphans(&self) -> Vec<Cell> {
        let mut v: Vec<Cell> = self
            .entries
            .iter()
            .filter(|(_, e)| e.1 == Provenance::OrphanFallback)
            .map(|(c, _)| *c)
            .collect();
        v.sort();
        v
    }

    /// Membership in `F_p`.
    pub fn in_level(&self, cell: &Cell, p: u32) -> bool {
        self.get(cell).is_some_and(|e| e.0 <= p)
    }

    /// `filtration.json`, with ids taken from `s`.
    pub fn to_json(&self, s: &CellComplex<Cell>) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = s
            .iter()
            .map(|c| {
                let (p, prov) = self.entries[c];
                serde_json::json!([s.id(c).expect("cell of s"), p, prov])
            })
            .collect();
        serde_json::json!({"m": self.m, "cx": rows})
    }
}

/// Cells of `F_p`.
pub fn filtration_level<'a>(s: &'a CellComplex<Cell>, table: &'a ComplexityTable, p: u32) -> impl Iterator<Item = &'a Cell> {
    s.iter().filter(move |c| table.in_level(c, p))
}

/// Cells of complexity exactly `p`, grouped into classes connected through
/// shared faces of the same complexity. Classes and their members are sorted.
pub fn isotopy_classes(s: &CellComplex<Cell>, table: &ComplexityTable, p: u32) -> Vec<Vec<Cell>> {
    let cells: Vec<Cell> = s.iter().filter(|c| table.get(c).map(|e| e.0) == Some(p)).copied().collect();
    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut uf = UnionFind::<usize>::new(cells.len());
    for (i, c) in cells.iter().enumerate() {
        for (f, _) in c.faces() {
            if let Some(&j) = index.get(&f) {
                uf.union(i, j);
            }
        }
    }
    group(&cells, uf)
}

fn group(cells: &[Cell], uf: UnionFind<usize>) -> Vec<Vec<Cell>> {
    let labels = uf.into_labeling();
    let mut by_root: HashMap<usize, Vec<Cell>> = HashMap::new();
    for (c, l) in cells.iter().zip(labels) {
        by_root.entry(l).or_default().push(*c);
    }
    let mut classes: Vec<Vec<Cell>> = by_root.into_values().collect();
    for c in &mut classes {
        c.sort();
    }
    classes.sort();
    classes
}

/// The chambers of `P_m ∖ S_m`: top cells joined across nonsingular walls.
#[derive(Debug, Clone)]
pub struct KnotComponents {
    cells: Vec<Cell>,
    labels: Vec<usize>,
    count: usize,
}

impl KnotComponents {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Component id of a top cell; ids follow the order of first members.
    pub fn component(&self, cell: &Cell) -> Option<usize> {
        self.cells.binary_search(cell).ok().map(|i| self.labels[i])
    }

    pub fn members(&self, id: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().zip(&self.labels).filter(move |(_, &l)| l == id).map(|(c, _)| c)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

pub fn knot_components(m: usize) -> KnotComponents {
    let cells = top_cells(m);
    let merges: Vec<(Cell, Cell)> = cells
        .par_iter()
        .flat_map_iter(|k| {
            k.faces().into_iter().filter_map(move |(wall, _)| {
                if is_singular(&wall) {
                    return None;
                }
                let other = wall.cofaces().into_iter().map(|(c, _)| c).find(|c| c != k)?;
                (*k < other).then_some((*k, other))
            })
        })
        .collect();
    let mut uf = UnionFind::<usize>::new(cells.len());
    for (a, b) in merges {
        let i = cells.binary_search(&a).expect("top cell");
        let j = cells.binary_search(&b).expect("top cell");
        uf.union(i, j);
    }
    let roots = uf.into_labeling();
    let mut relabel: HashMap<usize, usize> = HashMap::new();
    let labels: Vec<usize> = roots
        .iter()
        .map(|r| {
            let next = relabel.len();
            *relabel.entry(*r).or_insert(next)
        })
        .collect();
    KnotComponents {
        count: relabel.len(),
        cells,
        labels,
    }
}

/// A singular point of a stable cell: the pipes through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularPoint {
    pub pipes: Vec<usize>,
}

/// The singular points of a stable cell, or `None` if the cell is not stable.
/// Stable: every component of the self-intersection set is a single point
/// where two or three pipes cross transversally, and the pipes of distinct
/// points are separated along the curve by a vertex.
pub fn stable_points(cell: &Cell) -> Option<Vec<SingularPoint>> {
    let report = singularity_report(cell);
    if report.is_empty() || report.intersections.iter().any(|x| x.kind != LocusKind::TransversePoint) {
        return None;
    }
    let mut at: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for x in &report.intersections {
        let e = at.entry(x.locus.lo).or_default();
        e.push(x.pipes.0);
        e.push(x.pipes.1);
    }
    let mut points: Vec<SingularPoint> = at
        .into_values()
        .map(|mut p| {
            p.sort_unstable();
            p.dedup();
            SingularPoint { pipes: p }
        })
        .collect();
    if points.iter().any(|p| !(2..=3).contains(&p.pipes.len())) {
        return None;
    }
    points.sort_by(|a, b| a.pipes.cmp(&b.pipes));
    let mut params: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(k, p)| p.pipes.iter().map(move |&i| (i, k)))
        .collect();
    params.sort_unstable();
    // pipes 3k and 3k+1 are joined at vertex k
    let stable = params
        .windows(2)
        .all(|w| w[0].1 == w[1].1 || (w[0].0..w[1].0).any(|i| i % 3 == 0 && i > 0));
    stable.then_some(points)
}

pub fn is_stable(cell: &Cell) -> bool {
    stable_points(cell).is_some()
}

/// Whether the cell is an isolated triple point: its self-intersection set
/// is one point through which three strands cross transversally. Corner
/// touches of three strands do not count.
pub fn is_triple_point(cell: &Cell) -> bool {
    let report = singularity_report(cell);
    report.components == 1
        && report.component_strands == [3]
        && report
            .intersections
            .iter()
            .all(|x| x.kind == LocusKind::TransversePoint && x.locus.lo == report.intersections[0].locus.lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, Limits, Space};

    #[test]
    fn one_chamber_at_three_moves() {
        assert_eq!(knot_components(3).len(), 1);
    }

    #[test]
    fn every_singular_cell_has_positive_complexity() {
        let s = build_complex(4, Space::S, Limits::default()).unwrap();
        let t = ComplexityTable::build(&s);
        assert_eq!(t.len(), s.len());
        assert!(s.iter().all(|c| t.complexity(c).unwrap() >= 1));
        assert_eq!(filtration_level(&s, &t, 0).count(), 0);
        assert_eq!(filtration_level(&s, &t, t.max()).count(), s.len());
    }

    #[test]
    fn top_singular_cells_have_one_pair_class() {
        let s = build_complex(4, Space::S, Limits::default()).unwrap();
        for c in s.cells(8) {
            let classes = c.classes();
            assert_eq!(classes.len(), 1);
            assert_eq!(classes[0].len(), 2);
        }
    }
}
