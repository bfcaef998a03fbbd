//! Closed-support cellular chain complexes of `P_m`, of the discriminant
//! `S_m`, and of its blowup `S̃_m`.
//!
//! A blowup cell `ẽ(σ; C; ρ)` is the product of a singular cell `e(σ; C)`
//! with the open face of the simplex spanned by the transpositions `ρ`
//! supported on the classes of `C`. Its boundary is the Leibniz sum of the
//! base boundary (classes merge, `ρ` kept) and the simplex boundary (one
//! transposition deleted).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::io::Write;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    all_cells, fubini, Cell, CellName, CellNameJson, DecoratedTransposition, Direction, TranspositionIndex,
};
use crate::error::{Error, Result};
use crate::geometry::{format_q, is_singular, Q};

/// A cell type with a signed boundary.
pub trait Stratum: Copy + Eq + Hash + Ord + Send + Sync + fmt::Display {
    fn dim(&self) -> usize;

    /// `(face, [d self : face])`; coefficients are `±1`.
    fn faces(&self) -> Vec<(Self, i32)>;

    fn name_json(&self) -> serde_json::Value;
}

impl Stratum for Cell {
    fn dim(&self) -> usize {
        Cell::dim(self)
    }

    fn faces(&self) -> Vec<(Self, i32)> {
        Cell::faces(self)
    }

    fn name_json(&self) -> serde_json::Value {
        serde_json::to_value(CellNameJson::from(&self.name())).expect("names serialize")
    }
}

/// A cell `ẽ(σ; C; ρ)` of the blowup. `rho` is a bitmask over
/// [`TranspositionIndex`] codes for `base.m()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlowupCell {
    pub base: Cell,
    pub rho: u128,
}

impl BlowupCell {
    pub fn new(base: Cell, rho: &[DecoratedTransposition]) -> Result<Self> {
        let index = TranspositionIndex::new(base.m())?;
        let support = base.transposition_mask(&index);
        let mask = index.encode(rho);
        if mask & !support != 0 {
            return Err(Error::domain(format!(
                "ρ is not supported on the classes of {base}"
            )));
        }
        Ok(BlowupCell { base, rho: mask })
    }

    pub fn transpositions(&self) -> Vec<DecoratedTransposition> {
        TranspositionIndex::new(self.base.m())
            .expect("blowup cells exist only where the index fits")
            .decode(self.rho)
    }

    pub fn rho_len(&self) -> usize {
        self.rho.count_ones() as usize
    }

    /// The base cell; `π_#` forgets `ρ`.
    pub fn project(&self) -> Cell {
        self.base
    }

    /// Reads the export format: a cell name with an extra
    /// `"rho": [{"dir": "y", "pair": [1, 2]}, …]`.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Transposition {
            dir: Direction,
            pair: [u8; 2],
        }
        #[derive(Deserialize)]
        struct Named {
            #[serde(flatten)]
            name: CellNameJson,
            rho: Vec<Transposition>,
        }
        let j: Named = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let base = Cell::from_name(&CellName::try_from(j.name)?)?;
        let mut rho = Vec::with_capacity(j.rho.len());
        for t in j.rho {
            if t.pair[0] == t.pair[1] {
                return Err(Error::Parse(format!("transposition ({} {}) fixes everything", t.pair[0], t.pair[0])));
            }
            rho.push(DecoratedTransposition::new(t.pair[0], t.pair[1], t.dir));
        }
        if rho.is_empty() {
            return Err(Error::domain("ρ must be nonempty"));
        }
        BlowupCell::new(base, &rho)
    }
}

impl Stratum for BlowupCell {
    fn dim(&self) -> usize {
        self.base.dim() + self.rho_len() - 1
    }

    fn faces(&self) -> Vec<(Self, i32)> {
        let mut out: Vec<(Self, i32)> = self
            .base
            .faces()
            .into_iter()
            .map(|(f, s)| (BlowupCell { base: f, rho: self.rho }, s))
            .collect();
        if self.rho_len() >= 2 {
            let outer = if self.base.dim().is_multiple_of(2) { 1 } else { -1 };
            let mut j = 0;
            for code in 0..128 {
                let bit = 1u128 << code;
                if self.rho & bit != 0 {
                    let s = if j % 2 == 0 { outer } else { -outer };
                    out.push((
                        BlowupCell {
                            base: self.base,
                            rho: self.rho & !bit,
                        },
                        s,
                    ));
                    j += 1;
                }
            }
        }
        out
    }

    fn name_json(&self) -> serde_json::Value {
        let mut v = self.base.name_json();
        let rho: Vec<serde_json::Value> = self
            .transpositions()
            .iter()
            .map(|t| serde_json::json!({"dir": t.direction, "pair": [t.a, t.b]}))
            .collect();
        v["rho"] = serde_json::Value::Array(rho);
        v
    }
}

impl fmt::Display for BlowupCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.base.name().to_string();
        let ts: Vec<String> = self.transpositions().iter().map(|t| t.to_string()).collect();
        write!(f, "{}; {{{}}})", &name[..name.len() - 1], ts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Space {
    P,
    S,
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Space::P),
            "S" | "s" => Ok(Space::S),
            _ => Err(Error::Parse(format!("unknown space {s:?}, expected P or S"))),
        }
    }
}

/// A finite cell complex with interned ids, graded by dimension.
#[derive(Debug, Clone)]
pub struct CellComplex<K> {
    m: usize,
    cells: Vec<Vec<K>>,
    index: HashMap<K, (usize, usize)>,
    /// `boundary[d][i]` lists `(j, coef)` with `j` indexing `cells[d - 1]`.
    boundary: Vec<Vec<Vec<(u32, i8)>>>,
}

impl<K: Stratum> CellComplex<K> {
    /// Interns `cells` and assembles the boundary. Every face must itself be
    /// among `cells`.
    pub fn from_cells(m: usize, mut cells: Vec<K>) -> Result<Self> {
        cells.par_sort();
        cells.dedup();
        let top = cells.iter().map(|c| c.dim()).max().unwrap_or(0);
        let mut by_dim: Vec<Vec<K>> = vec![Vec::new(); top + 1];
        for c in cells {
            by_dim[c.dim()].push(c);
        }
        let mut index = HashMap::with_capacity(by_dim.iter().map(Vec::len).sum());
        for (d, cs) in by_dim.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                index.insert(*c, (d, i));
            }
        }
        let boundary = by_dim
            .iter()
            .map(|cs| {
                cs.par_iter()
                    .map(|c| {
                        let mut col: Vec<(u32, i8)> = Vec::new();
                        for (f, s) in c.faces() {
                            let &(_, j) = index
                                .get(&f)
                                .ok_or_else(|| Error::Lookup(format!("face {f} of {c} is not in the complex")))?;
                            col.push((j as u32, s as i8));
                        }
                        col.sort_unstable();
                        let mut merged: Vec<(u32, i8)> = Vec::with_capacity(col.len());
                        for (j, s) in col {
                            match merged.last_mut() {
                                Some((k, t)) if *k == j => *t += s,
                                _ => merged.push((j, s)),
                            }
                        }
                        merged.retain(|&(_, s)| s != 0);
                        Ok(merged)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellComplex {
            m,
            cells: by_dim,
            index,
            boundary,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn top_dim(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn cells(&self, dim: usize) -> &[K] {
        self.cells.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &K> {
        self.cells.iter().flatten()
    }

    pub fn contains(&self, cell: &K) -> bool {
        self.index.contains_key(cell)
    }

    /// `(dim, position within dim)`.
    pub fn locate(&self, cell: &K) -> Option<(usize, usize)> {
        self.index.get(cell).copied()
    }

    /// Global id: cells numbered by dimension, then lexicographically.
    pub fn id(&self, cell: &K) -> Option<usize> {
        let (d, i) = self.locate(cell)?;
        Some(self.cells[..d].iter().map(Vec::len).sum::<usize>() + i)
    }

    pub fn by_id(&self, mut id: usize) -> Option<&K> {
        for cs in &self.cells {
            if id < cs.len() {
                return Some(&cs[id]);
            }
            id -= cs.len();
        }
        None
    }

    pub fn boundary_column(&self, dim: usize, i: usize) -> &[(u32, i8)] {
        &self.boundary[dim][i]
    }

    pub fn boundary(&self, cell: &K) -> Result<Chain<K>> {
        let (d, i) = self
            .locate(cell)
            .ok_or_else(|| Error::Lookup(cell.to_string()))?;
        let mut out = Chain::zero();
        for &(j, s) in &self.boundary[d][i] {
            out.add_term(self.cells[d - 1][j as usize], Q::from_integer((s as i64).into()));
        }
        Ok(out)
    }

    /// Returns the first cell whose boundary's boundary is nonzero.
    pub fn verify_d_squared(&self) -> std::result::Result<(), K> {
        for d in 2..self.cells.len() {
            let bad = self.boundary[d].par_iter().position_first(|col| {
                let mut acc: HashMap<u32, i64> = HashMap::new();
                for &(j, s) in col {
                    for &(k, t) in &self.boundary[d - 1][j as usize] {
                        *acc.entry(k).or_default() += s as i64 * t as i64;
                    }
                }
                acc.values().any(|&v| v != 0)
            });
            if let Some(i) = bad {
                return Err(self.cells[d][i]);
            }
        }
        Ok(())
    }

    /// Writes one JSON object per line: id, dim, name and boundary.
    pub fn export_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut offset = vec![0usize; self.cells.len() + 1];
        for d in 0..self.cells.len() {
            offset[d + 1] = offset[d] + self.cells[d].len();
        }
        for (d, cs) in self.cells.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                let bd: Vec<(usize, i8)> = self.boundary[d][i]
                    .iter()
                    .map(|&(j, s)| (offset[d - 1] + j as usize, s))
                    .collect();
                let line = serde_json::json!({
                    "id": offset[d] + i,
                    "dim": d,
                    "name": c.name_json(),
                    "boundary": bd,
                });
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }
}

/// `d(d(cell)) = 0` computed from the local face rule, without a complex.
pub fn d_squared_vanishes_at<K: Stratum>(cell: &K) -> bool {
    let mut acc: HashMap<K, i64> = HashMap::new();
    for (f, s) in cell.faces() {
        for (g, t) in f.faces() {
            *acc.entry(g).or_default() += (s * t) as i64;
        }
    }
    acc.values().all(|&v| v == 0)
}

/// A sparse rational combination of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain<K: Ord> {
    terms: BTreeMap<K, Q>,
}

impl<K: Ord + Copy> Chain<K> {
    pub fn zero() -> Self {
        Chain {
            terms: BTreeMap::new(),
        }
    }

    pub fn single(cell: K, coef: Q) -> Self {
        let mut c = Chain::zero();
        c.add_term(cell, coef);
        c
    }

    pub fn add_term(&mut self, cell: K, coef: Q) {
        if coef.is_zero() {
            return;
        }
        let e = self.terms.entry(cell).or_insert_with(Q::zero);
        *e += coef;
        if e.is_zero() {
            self.terms.remove(&cell);
        }
    }

    pub fn add(&mut self, other: &Chain<K>) {
        for (k, v) in &other.terms {
            self.add_term(*k, v.clone());
        }
    }

    pub fn scaled(&self, s: &Q) -> Chain<K> {
        if s.is_zero() {
            return Chain::zero();
        }
        Chain {
            terms: self.terms.iter().map(|(k, v)| (*k, v * s)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, cell: &K) -> Q {
        self.terms.get(cell).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Q)> {
        self.terms.iter()
    }

    /// Applies a linear map given on basis cells.
    pub fn map_linear<L: Ord + Copy>(&self, f: impl Fn(&K) -> Chain<L>) -> Chain<L> {
        let mut out = Chain::zero();
        for (k, v) in &self.terms {
            out.add(&f(k).scaled(v));
        }
        out
    }

    /// Evaluates a cochain on this chain.
    pub fn evaluate<E>(&self, mut f: impl FnMut(&K) -> std::result::Result<Q, E>) -> std::result::Result<Q, E> {
        let mut acc = Q::zero();
        for (k, v) in &self.terms {
            acc += f(k)? * v;
        }
        Ok(acc)
    }
}

impl<K: Stratum> Chain<K> {
    /// Boundary computed from the local face rule.
    pub fn boundary(&self) -> Chain<K> {
        self.map_linear(|k| {
            let mut c = Chain::zero();
            for (f, s) in k.faces() {
                c.add_term(f, Q::from_integer((s as i64).into()));
            }
            c
        })
    }
}

impl<K: Ord + Copy + fmt::Display> fmt::Display for Chain<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if v.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "({}) {k}", format_q(v))?;
            }
        }
        Ok(())
    }
}

/// Cell budget enforced before enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_cells: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_cells: 20_000_000 }
    }
}

fn check_capacity(what: &str, needed: u64, limits: Limits) -> Result<()> {
    if needed > limits.max_cells {
        Err(Error::Capacity {
            what: what.into(),
            needed,
            limit: limits.max_cells,
        })
    } else {
        Ok(())
    }
}

fn check_m(m: usize) -> Result<()> {
    if !(3..=crate::combinatorics::MAX_MOVES).contains(&m) {
        return Err(Error::domain(format!("move count {m} is not supported")));
    }
    Ok(())
}

/// The singular cells of `P_m`, in lexicographic order.
pub fn singular_cells(m: usize, limits: Limits) -> Result<Vec<Cell>> {
    check_m(m)?;
    check_capacity("cells of P_m", fubini(m - 1).pow(3), limits)?;
    let mut cells: Vec<Cell> = all_cells(m).into_par_iter().filter(is_singular).collect();
    cells.par_sort();
    Ok(cells)
}

/// `Cell_•(P_m)` or `Cell_•(S_m)`.
pub fn build_complex(m: usize, space: Space, limits: Limits) -> Result<CellComplex<Cell>> {
    check_m(m)?;
    let cells = match space {
        Space::P => {
            check_capacity("cells of P_m", fubini(m - 1).pow(3), limits)?;
            all_cells(m)
        }
        Space::S => singular_cells(m, limits)?,
    };
    CellComplex::from_cells(m, cells)
}

/// All blowup cells lying over the given base cells.
pub fn blowup_cells_over(base: &[Cell], limits: Limits) -> Result<Vec<BlowupCell>> {
    let Some(first) = base.first() else {
        return Ok(Vec::new());
    };
    let index = TranspositionIndex::new(first.m())?;
    let masks: Vec<u128> = base.par_iter().map(|c| c.transposition_mask(&index)).collect();
    let needed: u64 = masks
        .iter()
        .map(|mk| (1u64 << mk.count_ones().min(63)) - 1)
        .fold(0u64, |a, b| a.saturating_add(b));
    check_capacity("cells of the blowup", needed, limits)?;
    let mut out = Vec::with_capacity(needed as usize);
    for (c, &mask) in base.iter().zip(&masks) {
        // enumerate nonempty submasks
        let mut sub = mask;
        while sub != 0 {
            out.push(BlowupCell { base: *c, rho: sub });
            sub = (sub - 1) & mask;
        }
    }
    Ok(out)
}

/// `C_*(S̃_m)`.
pub fn build_blowup(m: usize, limits: Limits) -> Result<CellComplex<BlowupCell>> {
    let base = singular_cells(m, limits)?;
    CellComplex::from_cells(m, blowup_cells_over(&base, limits)?)
}

pub fn project(cell: &BlowupCell) -> Cell {
    cell.project()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{AdmissibleSet, CellName, Direction, SingularityPartition, TriplePerm};

    fn cell(x: &str, y: &str, z: &str, classes: &[(Direction, &[u8])]) -> Cell {
        let part = SingularityPartition::new(classes.iter().map(|(d, i)| AdmissibleSet::new(*d, i.iter().copied()))).unwrap();
        Cell::from_name(&CellName::new(TriplePerm::from_digits(x, y, z).unwrap(), part).unwrap()).unwrap()
    }

    #[test]
    fn top_cell_counts() {
        let p4 = build_complex(4, Space::P, Limits::default()).unwrap();
        assert_eq!(p4.cells(9).len(), 216);
        assert_eq!(p4.len(), 13usize.pow(3));
    }

    #[test]
    fn d_squared_on_p_and_s_m3() {
        for space in [Space::P, Space::S] {
            let c = build_complex(3, space, Limits::default()).unwrap();
            assert!(c.verify_d_squared().is_ok(), "{space:?}");
        }
    }

    #[test]
    fn faces_of_singular_cells_are_singular() {
        let s = build_complex(4, Space::S, Limits::default()).unwrap();
        assert!(s.top_dim() <= 3 * 4 - 4);
        for c in s.iter() {
            for (f, _) in c.faces() {
                assert!(s.contains(&f));
            }
        }
    }

    #[test]
    fn fibre_over_a_size_three_class() {
        let e = cell("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
        let fibre = blowup_cells_over(&[e], Limits::default()).unwrap();
        assert_eq!(fibre.len(), 7);
        let mut by_dim = BTreeMap::new();
        for b in &fibre {
            *by_dim.entry(b.dim() - e.dim()).or_insert(0) += 1;
        }
        assert_eq!(by_dim.into_iter().collect::<Vec<_>>(), vec![(0, 3), (1, 3), (2, 1)]);
    }

    #[test]
    fn internal_boundary_deletes_one_transposition() {
        let e = cell("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
        let t12 = DecoratedTransposition::new(1, 2, Direction::Y);
        let t25 = DecoratedTransposition::new(2, 5, Direction::Y);
        let b = BlowupCell::new(e, &[t12, t25]).unwrap();
        let faces = b.faces();
        let a = BlowupCell::new(e, &[t12]).unwrap();
        let c = BlowupCell::new(e, &[t25]).unwrap();
        let sa = faces.iter().find(|(f, _)| *f == a).unwrap().1;
        let sc = faces.iter().find(|(f, _)| *f == c).unwrap().1;
        assert_eq!(sa, -sc);
        // a single transposition has no internal faces
        assert!(a.faces().iter().all(|(f, _)| f.rho == a.rho));
        assert!(d_squared_vanishes_at(&b));
    }

    #[test]
    fn blowup_name_json_round_trip() {
        let e = cell("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
        let b = BlowupCell::new(e, &[DecoratedTransposition::new(2, 5, Direction::Y)]).unwrap();
        assert_eq!(BlowupCell::from_json(&b.name_json().to_string()).unwrap(), b);
        assert!(BlowupCell::from_json(&e.name_json().to_string()).is_err());
    }

    #[test]
    fn rho_must_lie_in_a_class() {
        let e = cell("25134", "41253", "35241", &[(Direction::Y, &[1, 2, 5])]);
        let bad = DecoratedTransposition::new(1, 3, Direction::Y);
        assert!(BlowupCell::new(e, &[bad]).is_err());
    }
}
