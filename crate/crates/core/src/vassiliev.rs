//! Coboundaries of the blowup into the knot chambers, Vassiliev derivatives
//! and the Vassiliev–Taylor chain of an invariant.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{AdmissibleSet, Cell, DecoratedTransposition, TranspositionIndex};
use crate::complex::{BlowupCell, Chain, CellComplex, Stratum};
use crate::error::{Error, Result};
use crate::filtration::{stable_points, ComplexityTable};
use crate::geometry::{format_q, Q};
use crate::homology::solve;
use crate::invariants::ValueTable;

fn sign_q(s: i32) -> Q {
    Q::from_integer(s.into())
}

/// `ρ(C)` read as a path on the class `C`, oriented both ways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialityWitness {
    pub class: AdmissibleSet,
    /// The `+` orientation, starting at the smaller endpoint.
    pub path: Vec<u8>,
}

impl SequentialityWitness {
    /// `None` unless the transpositions of `rho` inside `class` form a
    /// Hamiltonian path on it.
    pub fn find(class: &AdmissibleSet, rho: &[DecoratedTransposition]) -> Option<Self> {
        let edges: Vec<&DecoratedTransposition> = rho.iter().filter(|t| class.contains(t)).collect();
        let k = class.len();
        if edges.len() + 1 != k {
            return None;
        }
        let mut adj: BTreeMap<u8, Vec<u8>> = class.indices.iter().map(|&i| (i, Vec::new())).collect();
        for t in &edges {
            adj.get_mut(&t.a)?.push(t.b);
            adj.get_mut(&t.b)?.push(t.a);
        }
        if adj.values().any(|v| v.len() > 2) {
            return None;
        }
        let start = *adj.iter().find(|(_, v)| v.len() == 1)?.0;
        let mut path = vec![start];
        let mut prev = 0u8;
        let mut cur = start;
        while let Some(&next) = adj[&cur].iter().find(|&&x| x != prev) {
            if path.contains(&next) {
                return None;
            }
            path.push(next);
            prev = cur;
            cur = next;
        }
        (path.len() == k).then(|| SequentialityWitness {
            class: class.clone(),
            path,
        })
    }

    pub fn minus(&self) -> Vec<u8> {
        self.path.iter().rev().copied().collect()
    }
}

/// `(resolved cell, coefficient)` for the `+` and `−` resolutions.
fn resolutions(base: &Cell, w: &SequentialityWitness) -> [(Cell, i32); 2] {
    let d = w.class.direction;
    let plus = base.resolve_class(d, &w.path).expect("class is a block of its cell");
    let minus = base.resolve_class(d, &w.minus()).expect("class is a block of its cell");
    let odd = w.class.len() % 2 == 1;
    [(plus, 1), (minus, if odd { 1 } else { -1 })]
}

/// `δ_C`. The result may contain `ρ = ∅` cells, which stand for the
/// resolved knot top cells.
pub fn class_coboundary(cell: &BlowupCell, class: &AdmissibleSet) -> Result<Chain<BlowupCell>> {
    if !cell.base.classes().contains(class) {
        return Err(Error::domain(format!("{class} is not a class of {}", cell.base.name())));
    }
    let index = TranspositionIndex::new(cell.base.m())?;
    let rho = index.decode(cell.rho);
    let Some(w) = SequentialityWitness::find(class, &rho) else {
        return Ok(Chain::zero());
    };
    let rest = cell.rho & !index.encode(&class.transpositions());
    let mut out = Chain::zero();
    for (c, s) in resolutions(&cell.base, &w) {
        out.add_term(BlowupCell { base: c, rho: rest }, sign_q(s));
    }
    Ok(out)
}

/// Applies `δ_C` for the given classes in order.
pub fn compose_coboundaries(cell: &BlowupCell, order: &[AdmissibleSet]) -> Result<Chain<BlowupCell>> {
    let mut chain = Chain::single(*cell, Q::one());
    for class in order {
        let mut next = Chain::zero();
        for (c, v) in chain.iter() {
            next.add(&class_coboundary(c, class)?.scaled(v));
        }
        chain = next;
    }
    Ok(chain)
}

/// `δ_𝐂`: all classes resolved, landing on knot top cells.
pub fn total_coboundary(cell: &BlowupCell) -> Result<Chain<Cell>> {
    let m = cell.base.m();
    if cell.dim() != 3 * m - 4 {
        return Err(Error::domain(format!(
            "coboundaries are taken on cells of dimension {}, {cell} has dimension {}",
            3 * m - 4,
            cell.dim()
        )));
    }
    let chain = compose_coboundaries(cell, &cell.base.classes())?;
    let mut out = Chain::zero();
    for (c, v) in chain.iter() {
        debug_assert!(c.rho == 0 && c.base.is_top());
        out.add_term(c.base, v.clone());
    }
    Ok(out)
}

/// `d_ẽ([α]) = [α](δ_𝐂 ẽ)`.
pub fn vassiliev_derivative(values: &ValueTable, id: &str, cell: &BlowupCell) -> Result<Q> {
    total_coboundary(cell)?.evaluate(|k| {
        values.get(k).cloned().map_err(|_| Error::Undefined {
            invariant: id.to_string(),
            cell: k.name().to_string(),
        })
    })
}

/// Cells of dimension `3m − 4` over `base` whose total coboundary is
/// nonzero: one Hamiltonian path per class, up to reversal.
pub fn derivative_cells_over(base: &Cell, index: &TranspositionIndex) -> Vec<BlowupCell> {
    let mut masks = vec![0u128];
    for class in base.classes() {
        let paths = paths_up_to_reversal(&class.indices.iter().copied().collect::<Vec<_>>());
        let mut next = Vec::with_capacity(masks.len() * paths.len());
        for m in &masks {
            for p in &paths {
                let edges: Vec<DecoratedTransposition> =
                    p.windows(2).map(|w| DecoratedTransposition::new(w[0].min(w[1]), w[0].max(w[1]), class.direction)).collect();
                next.push(m | index.encode(&edges));
            }
        }
        masks = next;
    }
    masks
        .into_iter()
        .filter(|&m| m != 0)
        .map(|rho| BlowupCell { base: *base, rho })
        .collect()
}

fn paths_up_to_reversal(items: &[u8]) -> Vec<Vec<u8>> {
    fn perms(items: &[u8]) -> Vec<Vec<u8>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let x = rest.remove(i);
            for mut p in perms(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    perms(items).into_iter().filter(|p| p[0] < p[p.len() - 1]).collect()
}

fn incidence(cell: &Cell, face: &Cell) -> i32 {
    cell.faces().into_iter().filter(|(f, _)| f == face).map(|(_, s)| s).sum()
}

/// The Taylor sign `(−1)^{o(ẽ)}` of a cell with nonzero total coboundary.
///
/// With one transposition `(a b)`, the sign is the incidence of the wall in
/// the chamber where `a` precedes `b`. Otherwise, split the class of the
/// least transposition `τ` along `τ`, keeping the start of the `+` path
/// below; the sign is chosen so that the two cells cancel on their common
/// face `(e; ρ ∖ τ)` against the `+` resolution.
pub fn taylor_sign(cell: &BlowupCell) -> Result<i32> {
    let index = TranspositionIndex::new(cell.base.m())?;
    sign_rec(&cell.base, cell.rho, &index)
}

fn sign_rec(e: &Cell, rho: u128, index: &TranspositionIndex) -> Result<i32> {
    let edges = index.decode(rho);
    let tau = *edges.first().ok_or_else(|| Error::domain("empty ρ"))?;
    let class = e
        .classes()
        .into_iter()
        .find(|c| c.contains(&tau))
        .ok_or_else(|| Error::domain(format!("{tau} is not inside a class of {}", e.name())))?;
    let w = SequentialityWitness::find(&class, &edges)
        .ok_or_else(|| Error::domain(format!("{class} is not sequential in {}", e.name())))?;
    let d = class.direction;
    if edges.len() == 1 {
        let plus = e.resolve_class(d, &w.path).expect("class is a block");
        return Ok(incidence(&plus, e));
    }
    let i = w
        .path
        .windows(2)
        .position(|p| p.contains(&tau.a) && p.contains(&tau.b))
        .expect("τ is an edge of the path");
    let (lower, upper) = w.path.split_at(i + 1);
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let part_factor = |p: &[u8]| -> i32 {
        if p.len() < 2 || p[0] < p[p.len() - 1] || p.len() % 2 == 1 {
            1
        } else {
            -1
        }
    };
    let c_prime = part_factor(lower) * part_factor(upper);
    lo.sort_unstable();
    hi.sort_unstable();
    let split = e.split_class(d, &lo, &hi).expect("class is a block");
    let s_split = sign_rec(&split, rho & !(1u128 << index.code(&tau)), index)?;
    let parity = if e.dim().is_multiple_of(2) { 1 } else { -1 };
    Ok(-s_split * incidence(&split, e) * c_prime * parity)
}

/// All cells of dimension `3m − 4` of the blowup with nonzero total
/// coboundary, over the given singular cells.
pub fn derivative_cells(s_cells: &[Cell]) -> Result<Vec<BlowupCell>> {
    let Some(first) = s_cells.first() else {
        return Ok(Vec::new());
    };
    let index = TranspositionIndex::new(first.m())?;
    let mut out: Vec<BlowupCell> = s_cells
        .par_iter()
        .flat_map_iter(|e| derivative_cells_over(e, &index))
        .collect();
    out.par_sort();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TaylorChain {
    pub invariant: String,
    pub m: usize,
    pub chain: Chain<BlowupCell>,
    pub verified_cycle: Option<bool>,
}

/// `α̃^∨ = Σ (−1)^{o(ẽ)} d_ẽ([α]) ẽ`, for the reduced class of `α`
/// (shifted to vanish on the unknot).
pub fn taylor_series(values: &ValueTable, id: &str, m: usize, s_cells: &[Cell]) -> Result<TaylorChain> {
    let values = &values.reduced(m)?;
    let cells = derivative_cells(s_cells)?;
    let terms: Vec<(BlowupCell, Q)> = cells
        .par_iter()
        .map(|c| {
            let d = vassiliev_derivative(values, id, c)?;
            if d.is_zero() {
                return Ok(None);
            }
            Ok(Some((*c, d * sign_q(taylor_sign(c)?))))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut chain = Chain::zero();
    for (c, v) in terms {
        chain.add_term(c, v);
    }
    Ok(TaylorChain {
        invariant: id.to_string(),
        m,
        chain,
        verified_cycle: None,
    })
}

/// Fails with the least face carrying a nonzero boundary coefficient.
pub fn verify_cycle<K: Stratum>(chain: &Chain<K>) -> Result<()> {
    let b = chain.boundary();
    let first = b.iter().next().map(|(f, v)| Error::NotACycle {
        face: f.to_string(),
        coefficient: format_q(v),
    });
    first.map_or(Ok(()), Err)
}

impl TaylorChain {
    pub fn verify(&mut self) -> Result<()> {
        let r = verify_cycle(&self.chain);
        self.verified_cycle = Some(r.is_ok());
        r
    }

    pub fn to_json(&self, ids: &BlowupIndex) -> Result<serde_json::Value> {
        let terms = self
            .chain
            .iter()
            .map(|(c, v)| Ok(serde_json::json!([ids.id(c)?, format_q(v)])))
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::json!({
            "invariant": self.invariant,
            "m": self.m,
            "terms": terms,
            "verified_cycle": self.verified_cycle.unwrap_or(false),
        }))
    }
}

/// Export ids of blowup cells without materializing the complex. Ids agree
/// with [`CellComplex::id`] on the full blowup.
#[derive(Debug, Clone)]
pub struct BlowupIndex {
    index: TranspositionIndex,
    base: Vec<Cell>,
    masks: Vec<u128>,
    /// `prefix[d][i]`: blowup cells of dimension `d` over `base[..i]`.
    prefix: Vec<Vec<u64>>,
    offset: Vec<u64>,
}

fn binom(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k as u64 {
        r = r * (n as u64 - i) / (i + 1);
    }
    r
}

impl BlowupIndex {
    pub fn new(s_cells: &[Cell]) -> Result<Self> {
        let mut base = s_cells.to_vec();
        base.sort();
        let m = base.first().map(|c| c.m()).unwrap_or(3);
        let index = TranspositionIndex::new(m)?;
        let masks: Vec<u128> = base.iter().map(|c| c.transposition_mask(&index)).collect();
        // classes of three or more vertices carry more transpositions than
        // their codimension, so blowup cells can exceed dimension 3m - 4
        let top = base
            .iter()
            .zip(&masks)
            .map(|(c, mk)| c.dim() + mk.count_ones() as usize - 1)
            .max()
            .unwrap_or(0);
        let mut prefix = vec![vec![0u64; base.len() + 1]; top + 1];
        for (i, (c, mk)) in base.iter().zip(&masks).enumerate() {
            let t = mk.count_ones();
            for (d, row) in prefix.iter_mut().enumerate() {
                // |ρ| = d − dim e + 1
                let k = (d + 1).saturating_sub(c.dim()) as u32;
                let add = if k >= 1 { binom(t, k) } else { 0 };
                row[i + 1] = row[i] + add;
            }
        }
        let mut offset = vec![0u64; top + 2];
        for d in 0..=top {
            offset[d + 1] = offset[d] + prefix[d][base.len()];
        }
        Ok(BlowupIndex {
            index,
            base,
            masks,
            prefix,
            offset,
        })
    }

    pub fn len(&self) -> u64 {
        *self.offset.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, cell: &BlowupCell) -> Result<u64> {
        let i = self
            .base
            .binary_search(&cell.base)
            .map_err(|_| Error::Lookup(cell.to_string()))?;
        let mask = self.masks[i];
        if cell.rho == 0 || cell.rho & !mask != 0 {
            return Err(Error::Lookup(cell.to_string()));
        }
        let d = cell.dim();
        let k = cell.rho_len() as u32;
        // subsets of `mask` of size k that are numerically smaller than ρ
        let mut below = 0u64;
        let mut left = k;
        let mut avail = mask.count_ones();
        for bit in (0..128).rev() {
            let b = 1u128 << bit;
            if mask & b == 0 {
                continue;
            }
            avail -= 1;
            if cell.rho & b != 0 {
                below += binom(avail, left);
                left -= 1;
                if left == 0 {
                    break;
                }
            }
        }
        let _ = &self.index;
        Ok(self.offset[d] + self.prefix[d][i] + below)
    }
}

/// Chord diagram on an interval: chords join endpoint positions `0..2k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChordDiagram {
    pub chords: Vec<(usize, usize)>,
}

/// The chord diagram respected by a stable cell. Each double point gives a
/// chord between its two pipes; a triple point gives its three pairwise
/// chords, with the two endpoints on a pipe ordered by the pipe at their
/// other end.
pub fn chord_diagram_of(cell: &Cell) -> Result<ChordDiagram> {
    let points = stable_points(cell).ok_or_else(|| Error::domain(format!("{} is not stable", cell.name())))?;
    let mut raw: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for p in &points {
        for i in 0..p.pipes.len() {
            for j in i + 1..p.pipes.len() {
                let (a, b) = (p.pipes[i], p.pipes[j]);
                raw.push(((a, b), (b, a)));
            }
        }
    }
    let mut ends: Vec<(usize, usize)> = raw.iter().flat_map(|&(x, y)| [x, y]).collect();
    ends.sort_unstable();
    let pos = |e: &(usize, usize)| ends.binary_search(e).expect("endpoint");
    let mut chords: Vec<(usize, usize)> = raw.iter().map(|(x, y)| (pos(x), pos(y))).collect();
    chords.sort_unstable();
    Ok(ChordDiagram { chords })
}

/// `N(ẽ)`: a cycle of the graded piece of complexity `n` containing `ẽ`,
/// supported on the cells reachable from `ẽ` through faces of complexity
/// `n`. Returns the chain and whether it is nonzero in `E^1`, or `None` if
/// no such cycle exists.
pub fn minimal_cycle(
    cell: &BlowupCell,
    table: &ComplexityTable,
    blowup: &CellComplex<BlowupCell>,
) -> Result<Option<(Chain<BlowupCell>, bool)>> {
    let m = cell.base.m();
    if stable_points(&cell.base).is_none() {
        return Err(Error::domain(format!("{} is not stable", cell.base.name())));
    }
    if cell.dim() != 3 * m - 4 {
        return Err(Error::domain(format!("{cell} is not of dimension {}", 3 * m - 4)));
    }
    let n = table.lifted(cell)?;
    let level = |c: &BlowupCell| table.lifted(c).ok() == Some(n);
    let d0 = |c: &BlowupCell| -> Vec<(BlowupCell, i32)> { c.faces().into_iter().filter(|(f, _)| level(f)).collect() };
    // cofaces at the same level, through the face lattice of the blowup
    let mut cofaces: HashMap<BlowupCell, Vec<BlowupCell>> = HashMap::new();
    for c in blowup.cells(cell.dim()) {
        if level(c) {
            for (f, _) in d0(c) {
                cofaces.entry(f).or_default().push(*c);
            }
        }
    }
    let mut seen: HashSet<BlowupCell> = HashSet::from([*cell]);
    let mut queue = VecDeque::from([*cell]);
    let mut support = Vec::new();
    while let Some(c) = queue.pop_front() {
        support.push(c);
        for (f, _) in d0(&c) {
            for g in cofaces.get(&f).into_iter().flatten() {
                if seen.insert(*g) {
                    queue.push_back(*g);
                }
            }
        }
    }
    support.sort();
    // unknowns: coefficients on support ∖ {ẽ}; equations: faces
    let faces: Vec<BlowupCell> = {
        let mut v: Vec<BlowupCell> = support.iter().flat_map(|c| d0(c).into_iter().map(|(f, _)| f)).collect();
        v.sort();
        v.dedup();
        v
    };
    let row = |f: &BlowupCell| faces.binary_search(f).expect("face");
    let others: Vec<BlowupCell> = support.iter().filter(|c| *c != cell).copied().collect();
    let columns: Vec<Vec<(usize, Q)>> = others
        .iter()
        .map(|c| d0(c).iter().map(|(f, s)| (row(f), sign_q(*s))).collect())
        .collect();
    let rhs: Vec<(usize, Q)> = d0(cell).iter().map(|(f, s)| (row(f), sign_q(-s))).collect();
    let mut chain = Chain::single(*cell, Q::one());
    match solve(faces.len(), &columns, &rhs) {
        Some(x) => {
            for (c, v) in others.iter().zip(x) {
                chain.add_term(*c, v);
            }
        }
        None => return Ok(None),
    }
    // a boundary would come from cells one dimension up at the same level
    let upper_cells: Vec<&BlowupCell> = blowup.cells(cell.dim() + 1).iter().filter(|c| level(c)).collect();
    let mut rows: Vec<BlowupCell> = support.clone();
    rows.extend(upper_cells.iter().flat_map(|c| d0(c).into_iter().map(|(f, _)| f)));
    rows.sort();
    rows.dedup();
    let at = |f: &BlowupCell| rows.binary_search(f).expect("row");
    let upper: Vec<Vec<(usize, Q)>> = upper_cells
        .iter()
        .map(|c| d0(c).iter().map(|(f, s)| (at(f), sign_q(*s))).collect())
        .collect();
    let target: Vec<(usize, Q)> = chain.iter().map(|(c, v)| (at(c), v.clone())).collect();
    let bounds = solve(rows.len(), &upper, &target).is_some();
    Ok(Some((chain, !bounds)))
}
