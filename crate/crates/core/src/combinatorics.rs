//! Permutation triples, admissible sets and cell names.
//!
//! A cell of the stratification of `P_m` records, for each coordinate axis,
//! the order in which the `m - 1` interior vertices appear along that axis
//! together with which of them share a coordinate. Per axis this is an
//! ordered set partition of `{1, .., m-1}`; a cell is a triple of those.
//!
//! Two representations live here. [`CellName`] is the user-facing name
//! `e(σx, σy, σz; C)`, which may be non-canonical (any ordering inside a
//! class block names the same cell). [`Cell`] is a packed canonical key
//! used by every enumeration and boundary computation.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported move count. Vertex indices are packed into nibbles.
pub const MAX_MOVES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
    Z,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::X, Direction::Y, Direction::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Direction {
        Direction::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            Direction::X => 'x',
            Direction::Y => 'y',
            Direction::Z => 'z',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Three vertex orders, one per axis, in the `3142_x` notation: the sequence
/// lists vertex indices in increasing coordinate order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePerm {
    m: usize,
    seqs: [Vec<u8>; 3],
}

impl TriplePerm {
    pub fn new(x: Vec<u8>, y: Vec<u8>, z: Vec<u8>) -> Result<Self> {
        let n = x.len();
        let m = n + 1;
        if !(3..=MAX_MOVES).contains(&m) {
            return Err(Error::domain(format!("move count {m} outside 3..={MAX_MOVES}")));
        }
        for (d, s) in [&x, &y, &z].into_iter().enumerate() {
            let mut seen = vec![false; n + 1];
            if s.len() != n {
                return Err(Error::domain("permutations of unequal length"));
            }
            for &i in s.iter() {
                let i = i as usize;
                if i == 0 || i > n || seen[i] {
                    return Err(Error::domain(format!(
                        "{}-sequence {:?} is not a permutation of 1..={n}",
                        Direction::from_index(d),
                        s
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(TriplePerm { m, seqs: [x, y, z] })
    }

    /// Parses the compact digit notation, e.g. `("3142", "4132", "1324")`.
    pub fn from_digits(x: &str, y: &str, z: &str) -> Result<Self> {
        let parse = |s: &str| -> Result<Vec<u8>> {
            s.chars()
                .map(|c| {
                    c.to_digit(16)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Parse(format!("bad vertex digit {c:?}")))
                })
                .collect()
        };
        TriplePerm::new(parse(x)?, parse(y)?, parse(z)?)
    }

    pub fn identity(m: usize) -> Result<Self> {
        let id: Vec<u8> = (1..m as u8).collect();
        TriplePerm::new(id.clone(), id.clone(), id)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.m - 1
    }

    pub fn seq(&self, d: Direction) -> &[u8] {
        &self.seqs[d.index()]
    }

    pub fn position(&self, d: Direction, index: u8) -> Option<usize> {
        self.seq(d).iter().position(|&v| v == index)
    }

    /// Left action of a transposition: swaps the two indices in one axis.
    pub fn apply(&self, t: &DecoratedTransposition) -> TriplePerm {
        let mut out = self.clone();
        for v in out.seqs[t.direction.index()].iter_mut() {
            if *v == t.a {
                *v = t.b;
            } else if *v == t.b {
                *v = t.a;
            }
        }
        out
    }
}

impl fmt::Display for TriplePerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in Direction::ALL.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            for v in self.seq(*d) {
                write!(f, "{v:x}")?;
            }
            write!(f, "_{d}")?;
        }
        Ok(())
    }
}

/// A same-direction set of vertex indices; labels one coordinate coincidence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleSet {
    pub direction: Direction,
    pub indices: BTreeSet<u8>,
}

impl AdmissibleSet {
    pub fn new(direction: Direction, indices: impl IntoIterator<Item = u8>) -> Self {
        AdmissibleSet {
            direction,
            indices: indices.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, t: &DecoratedTransposition) -> bool {
        t.direction == self.direction && self.indices.contains(&t.a) && self.indices.contains(&t.b)
    }

    /// All transpositions supported on this set, in lexicographic order.
    pub fn transpositions(&self) -> Vec<DecoratedTransposition> {
        let idx: Vec<u8> = self.indices.iter().copied().collect();
        let mut out = Vec::new();
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                out.push(DecoratedTransposition::new(idx[i], idx[j], self.direction));
            }
        }
        out
    }
}

impl fmt::Display for AdmissibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}_{}", parts.join(","), self.direction)
    }
}

/// Checks whether `set` occupies consecutive positions of its direction's
/// vertex order.
pub fn is_admissible(set: &AdmissibleSet, perm: &TriplePerm) -> Result<bool> {
    let positions = block_positions(set, perm)?;
    Ok(positions.windows(2).all(|w| w[1] == w[0] + 1))
}

fn block_positions(set: &AdmissibleSet, perm: &TriplePerm) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(set.len());
    for &i in &set.indices {
        let p = perm.position(set.direction, i).ok_or_else(|| {
            Error::domain(format!("index {i} out of range for m = {}", perm.m()))
        })?;
        positions.push(p);
    }
    positions.sort_unstable();
    Ok(positions)
}

/// The sequential transpositions `τ(C, σ)`: adjacent pairs of the block in
/// block order.
pub fn tau_of(set: &AdmissibleSet, perm: &TriplePerm) -> Result<Vec<DecoratedTransposition>> {
    if !is_admissible(set, perm)? {
        return Err(Error::domain(format!("{set} is not admissible for ({perm})")));
    }
    let positions = block_positions(set, perm)?;
    let seq = perm.seq(set.direction);
    Ok(positions
        .windows(2)
        .map(|w| DecoratedTransposition::new(seq[w[0]], seq[w[1]], set.direction))
        .collect())
}

/// Pairwise disjoint admissible sets; singletons are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SingularityPartition {
    classes: Vec<AdmissibleSet>,
}

impl SingularityPartition {
    pub fn new(classes: impl IntoIterator<Item = AdmissibleSet>) -> Result<Self> {
        let mut classes: Vec<AdmissibleSet> = classes.into_iter().filter(|c| c.len() >= 2).collect();
        classes.sort();
        for (i, a) in classes.iter().enumerate() {
            for b in &classes[i + 1..] {
                if a.direction == b.direction && !a.indices.is_disjoint(&b.indices) {
                    return Err(Error::domain(format!("classes {a} and {b} overlap")));
                }
            }
        }
        Ok(SingularityPartition { classes })
    }

    pub fn empty() -> Self {
        SingularityPartition::default()
    }

    pub fn classes(&self) -> &[AdmissibleSet] {
        &self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `Σ (|C_i| - 1)`.
    pub fn codimension(&self) -> usize {
        self.classes.iter().map(|c| c.len() - 1).sum()
    }
}

/// A (possibly non-canonical) cell name `e(σ; C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellName {
    pub perm: TriplePerm,
    pub partition: SingularityPartition,
}

impl CellName {
    pub fn new(perm: TriplePerm, partition: SingularityPartition) -> Result<Self> {
        for c in partition.classes() {
            if !is_admissible(c, &perm)? {
                return Err(Error::domain(format!("{c} is not admissible for ({perm})")));
            }
        }
        Ok(CellName { perm, partition })
    }

    pub fn top(perm: TriplePerm) -> Self {
        CellName {
            perm,
            partition: SingularityPartition::empty(),
        }
    }

    pub fn m(&self) -> usize {
        self.perm.m()
    }

    pub fn dim(&self) -> usize {
        3 * self.perm.n() - self.partition.codimension()
    }

    pub fn codimension(&self) -> usize {
        self.partition.codimension()
    }

    /// The orbit representative with every class block sorted increasingly.
    pub fn canonicalize(&self) -> CellName {
        let mut perm = self.perm.clone();
        for c in self.partition.classes() {
            let seq = &mut perm.seqs[c.direction.index()];
            let mut pos: Vec<usize> = seq
                .iter()
                .enumerate()
                .filter(|(_, v)| c.indices.contains(v))
                .map(|(p, _)| p)
                .collect();
            pos.sort_unstable();
            for (p, v) in pos.into_iter().zip(c.indices.iter()) {
                seq[p] = *v;
            }
        }
        CellName {
            perm,
            partition: self.partition.clone(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize() == *self
    }

    /// Codimension-one faces, canonical and deduplicated.
    pub fn coarsenings(&self) -> Result<Vec<CellName>> {
        let cell = Cell::from_name(self)?;
        Ok(cell.faces().into_iter().map(|(f, _)| f.name()).collect())
    }

    /// Cells having this one as a codimension-one face.
    pub fn refinement_cofaces(&self) -> Result<Vec<CellName>> {
        let cell = Cell::from_name(self)?;
        Ok(cell.cofaces().into_iter().map(|(f, _)| f.name()).collect())
    }
}

impl PartialOrd for CellName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CellName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.perm
            .seqs
            .cmp(&other.perm.seqs)
            .then_with(|| self.partition.classes.cmp(&other.partition.classes))
    }
}

impl fmt::Display for CellName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({}", self.perm)?;
        if !self.partition.is_empty() {
            write!(f, ";")?;
            for (k, c) in self.partition.classes().iter().enumerate() {
                write!(f, "{}{c}", if k == 0 { " " } else { ", " })?;
            }
        }
        write!(f, ")")
    }
}

/// A transposition `(a b)_d` recording the equality of the `d`-coordinates
/// of vertices `a` and `b`. Stored with `a < b`; ordered by `(d, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedTransposition {
    pub direction: Direction,
    pub a: u8,
    pub b: u8,
}

impl DecoratedTransposition {
    pub fn new(a: u8, b: u8, direction: Direction) -> Self {
        assert_ne!(a, b, "a transposition moves two distinct indices");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        DecoratedTransposition { direction, a, b }
    }
}

impl fmt::Display for DecoratedTransposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})_{}", self.a, self.b, self.direction)
    }
}

// ---------------------------------------------------------------------------
// Packed canonical cells

/// One axis of a canonical cell: the vertex order packed into nibbles
/// (position 0 in the most significant used nibble) and a bar mask where bit
/// `i` separates positions `i` and `i + 1` into different blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Axis {
    order: u64,
    bars: u16,
}

impl Axis {
    fn get(self, n: usize, pos: usize) -> u8 {
        ((self.order >> (4 * (n - 1 - pos))) & 0xf) as u8
    }

    fn pack(n: usize, seq: &[u8], bars: u16) -> Axis {
        let mut order = 0u64;
        for &v in seq.iter().take(n) {
            order = (order << 4) | v as u64;
        }
        Axis { order, bars }
    }

    fn seq(self, n: usize) -> Vec<u8> {
        (0..n).map(|p| self.get(n, p)).collect()
    }

    fn block_count(self) -> usize {
        self.bars.count_ones() as usize + 1
    }

    fn blocks(self, n: usize) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for p in 0..n {
            out.last_mut().unwrap().push(self.get(n, p));
            if p + 1 < n && self.bars & (1 << p) != 0 {
                out.push(Vec::new());
            }
        }
        out
    }

    fn from_blocks(n: usize, blocks: &[Vec<u8>]) -> Axis {
        let mut seq = Vec::with_capacity(n);
        let mut bars = 0u16;
        for (k, b) in blocks.iter().enumerate() {
            let mut b = b.clone();
            b.sort_unstable();
            seq.extend_from_slice(&b);
            if k + 1 < blocks.len() {
                bars |= 1 << (seq.len() - 1);
            }
        }
        Axis::pack(n, &seq, bars)
    }
}

/// A canonical cell of `P_m`, packed for hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    n: u8,
    axes: [Axis; 3],
}

/// Ordered set partitions of `{1..n}` with sorted blocks.
pub fn ordered_set_partitions(n: usize) -> Vec<Vec<Vec<u8>>> {
    fn rec(remaining: &[u8], acc: &mut Vec<Vec<u8>>, out: &mut Vec<Vec<Vec<u8>>>) {
        if remaining.is_empty() {
            out.push(acc.clone());
            return;
        }
        let k = remaining.len();
        // choose a nonempty subset for the next block
        for mask in 1u32..(1 << k) {
            let (block, rest): (Vec<u8>, Vec<u8>) = {
                let mut b = Vec::new();
                let mut r = Vec::new();
                for (i, &v) in remaining.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        b.push(v);
                    } else {
                        r.push(v);
                    }
                }
                (b, r)
            };
            acc.push(block);
            rec(&rest, acc, out);
            acc.pop();
        }
    }
    let items: Vec<u8> = (1..=n as u8).collect();
    let mut out = Vec::new();
    rec(&items, &mut Vec::new(), &mut out);
    out
}

/// Number of ordered set partitions of an `n`-set (Fubini number).
pub fn fubini(n: usize) -> u64 {
    // a(n) = Σ_k C(n,k) a(n-k)
    let mut a = vec![1u64; n + 1];
    for i in 1..=n {
        let mut s = 0u64;
        let mut c = 1u64;
        for k in 1..=i {
            c = c * (i - k + 1) as u64 / k as u64;
            s += c * a[i - k];
        }
        a[i] = s;
    }
    a[n]
}

fn merge_sign(counts: [usize; 3], d: usize, j: usize) -> i32 {
    // blocks j and j+1 (1-based) of axis d merge; product orientation x, y, z
    let offset: usize = counts[..d].iter().sum();
    if (offset + j).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl Cell {
    pub fn from_blocks(n: usize, blocks: [&[Vec<u8>]; 3]) -> Cell {
        Cell {
            n: n as u8,
            axes: [
                Axis::from_blocks(n, blocks[0]),
                Axis::from_blocks(n, blocks[1]),
                Axis::from_blocks(n, blocks[2]),
            ],
        }
    }

    pub fn from_name(name: &CellName) -> Result<Cell> {
        let canon = name.canonicalize();
        let n = canon.perm.n();
        let mut axes = [Axis { order: 0, bars: 0 }; 3];
        for d in Direction::ALL {
            let seq = canon.perm.seq(d);
            let mut bars: u16 = if n > 1 { (1u16 << (n - 1)) - 1 } else { 0 };
            for c in canon.partition.classes().iter().filter(|c| c.direction == d) {
                if !is_admissible(c, &canon.perm)? {
                    return Err(Error::domain(format!("{c} is not admissible")));
                }
                let pos = block_positions(c, &canon.perm)?;
                for p in pos[0]..*pos.last().unwrap() {
                    bars &= !(1 << p);
                }
            }
            axes[d.index()] = Axis::pack(n, seq, bars);
        }
        Ok(Cell { n: n as u8, axes })
    }

    /// The top cell with the given vertex orders.
    pub fn top(perm: &TriplePerm) -> Cell {
        Cell::from_name(&CellName::top(perm.clone())).expect("top cells are always valid")
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn m(&self) -> usize {
        self.n as usize + 1
    }

    pub fn seq(&self, d: Direction) -> Vec<u8> {
        self.axes[d.index()].seq(self.n())
    }

    pub fn blocks(&self, d: Direction) -> Vec<Vec<u8>> {
        self.axes[d.index()].blocks(self.n())
    }

    pub fn block_count(&self, d: Direction) -> usize {
        self.axes[d.index()].block_count()
    }

    fn counts(&self) -> [usize; 3] {
        [
            self.axes[0].block_count(),
            self.axes[1].block_count(),
            self.axes[2].block_count(),
        ]
    }

    pub fn dim(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn codimension(&self) -> usize {
        3 * self.n() - self.dim()
    }

    /// Product of the signs of the three canonical vertex orders. Cells are
    /// oriented by their block coordinates twisted by this sign, so every
    /// top cell carries the standard orientation of the cube.
    pub fn orientation_sign(&self) -> i32 {
        let mut inversions = 0usize;
        for d in Direction::ALL {
            let s = self.seq(d);
            for i in 0..s.len() {
                inversions += s[i + 1..].iter().filter(|&&v| v < s[i]).count();
            }
        }
        if inversions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn is_top(&self) -> bool {
        self.codimension() == 0
    }

    /// Rank of each vertex's coordinate along `d`: block number, 1-based.
    /// Entry 0 is unused.
    pub fn ranks(&self, d: Direction) -> Vec<usize> {
        let mut r = vec![0; self.n() + 1];
        for (k, b) in self.blocks(d).iter().enumerate() {
            for &v in b {
                r[v as usize] = k + 1;
            }
        }
        r
    }

    pub fn classes(&self) -> Vec<AdmissibleSet> {
        let mut out = Vec::new();
        for d in Direction::ALL {
            for b in self.blocks(d) {
                if b.len() >= 2 {
                    out.push(AdmissibleSet::new(d, b));
                }
            }
        }
        out.sort();
        out
    }

    pub fn name(&self) -> CellName {
        let n = self.n();
        let perm = TriplePerm {
            m: n + 1,
            seqs: [
                self.axes[0].seq(n),
                self.axes[1].seq(n),
                self.axes[2].seq(n),
            ],
        };
        CellName {
            perm,
            partition: SingularityPartition {
                classes: self.classes(),
            },
        }
    }

    /// Every transposition supported on a class, as a bitmask over
    /// [`TranspositionIndex`].
    pub fn transposition_mask(&self, index: &TranspositionIndex) -> u128 {
        let mut mask = 0u128;
        for c in self.classes() {
            for t in c.transpositions() {
                mask |= 1u128 << index.code(&t);
            }
        }
        mask
    }

    /// Signed codimension-one faces `[d self : face]`. Only coarsenings
    /// appear; faces on the walls of the open cube are not part of the
    /// closed-support complex.
    pub fn faces(&self) -> Vec<(Cell, i32)> {
        let n = self.n();
        let counts = self.counts();
        let mut out = Vec::with_capacity(3 * n);
        for d in 0..3 {
            let axis = self.axes[d];
            let blocks = axis.blocks(n);
            for j in 1..blocks.len() {
                let mut merged: Vec<Vec<u8>> = Vec::with_capacity(blocks.len() - 1);
                merged.extend_from_slice(&blocks[..j - 1]);
                let mut b = blocks[j - 1].clone();
                b.extend_from_slice(&blocks[j]);
                merged.push(b);
                merged.extend_from_slice(&blocks[j + 1..]);
                let mut axes = self.axes;
                axes[d] = Axis::from_blocks(n, &merged);
                let face = Cell { n: self.n, axes };
                let sign = merge_sign(counts, d, j) * self.orientation_sign() * face.orientation_sign();
                out.push((face, sign));
            }
        }
        out
    }

    /// Signed codimension-one cofaces `(K, [d K : self])`, obtained by
    /// splitting one class into an ordered pair of nonempty blocks.
    pub fn cofaces(&self) -> Vec<(Cell, i32)> {
        let n = self.n();
        let mut out = Vec::new();
        for d in 0..3 {
            let blocks = self.axes[d].blocks(n);
            for (k, b) in blocks.iter().enumerate() {
                if b.len() < 2 {
                    continue;
                }
                let s = b.len();
                for mask in 1u32..(1 << s) - 1 {
                    let lower: Vec<u8> = (0..s).filter(|i| mask & (1 << i) != 0).map(|i| b[i]).collect();
                    let upper: Vec<u8> = (0..s).filter(|i| mask & (1 << i) == 0).map(|i| b[i]).collect();
                    let mut split = Vec::with_capacity(blocks.len() + 1);
                    split.extend_from_slice(&blocks[..k]);
                    split.push(lower);
                    split.push(upper);
                    split.extend_from_slice(&blocks[k + 1..]);
                    let mut axes = self.axes;
                    axes[d] = Axis::from_blocks(n, &split);
                    let coface = Cell { n: self.n, axes };
                    // in the coface, blocks k+1 and k+2 (1-based) merge back
                    let sign = merge_sign(coface.counts(), d, k + 1)
                        * self.orientation_sign()
                        * coface.orientation_sign();
                    out.push((coface, sign));
                }
            }
        }
        out
    }

    /// Splits the class containing `t` so that the blocks `lower` and
    /// `upper` appear in that order. Returns `None` if they do not
    /// partition a class.
    pub fn split_class(&self, d: Direction, lower: &[u8], upper: &[u8]) -> Option<Cell> {
        let n = self.n();
        let blocks = self.axes[d.index()].blocks(n);
        let mut union: Vec<u8> = lower.iter().chain(upper).copied().collect();
        union.sort_unstable();
        let k = blocks.iter().position(|b| *b == union)?;
        let mut split = Vec::with_capacity(blocks.len() + 1);
        split.extend_from_slice(&blocks[..k]);
        split.push(lower.to_vec());
        split.push(upper.to_vec());
        split.extend_from_slice(&blocks[k + 1..]);
        let mut axes = self.axes;
        axes[d.index()] = Axis::from_blocks(n, &split);
        Some(Cell { n: self.n, axes })
    }

    /// Replaces a class block by singletons in the given order.
    pub fn resolve_class(&self, d: Direction, order: &[u8]) -> Option<Cell> {
        let n = self.n();
        let blocks = self.axes[d.index()].blocks(n);
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        let k = blocks.iter().position(|b| *b == sorted)?;
        let mut split = Vec::with_capacity(blocks.len() + order.len());
        split.extend_from_slice(&blocks[..k]);
        split.extend(order.iter().map(|&v| vec![v]));
        split.extend_from_slice(&blocks[k + 1..]);
        let mut axes = self.axes;
        axes[d.index()] = Axis::from_blocks(n, &split);
        Some(Cell { n: self.n, axes })
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    /// Lexicographic on `(σx, σy, σz)` then on the sorted class lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| {
                let a = self.axes.map(|a| a.order);
                let b = other.axes.map(|a| a.order);
                a.cmp(&b)
            })
            .then_with(|| {
                if self.axes == other.axes {
                    Ordering::Equal
                } else {
                    self.classes().cmp(&other.classes())
                }
            })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Enumerates every canonical cell at `m` moves in lexicographic order.
pub fn all_cells(m: usize) -> Vec<Cell> {
    let n = m - 1;
    let axes: Vec<Axis> = ordered_set_partitions(n)
        .iter()
        .map(|blocks| Axis::from_blocks(n, blocks))
        .collect();
    let mut out = Vec::with_capacity(axes.len().pow(3));
    for &x in &axes {
        for &y in &axes {
            for &z in &axes {
                out.push(Cell { n: n as u8, axes: [x, y, z] });
            }
        }
    }
    out.sort();
    out
}

/// All `(m-1)!^3` top cells.
pub fn top_cells(m: usize) -> Vec<Cell> {
    let n = m - 1;
    let axes: Vec<Axis> = ordered_set_partitions(n)
        .iter()
        .filter(|blocks| blocks.len() == n)
        .map(|blocks| Axis::from_blocks(n, blocks))
        .collect();
    let mut out = Vec::with_capacity(axes.len().pow(3));
    for &x in &axes {
        for &y in &axes {
            for &z in &axes {
                out.push(Cell { n: n as u8, axes: [x, y, z] });
            }
        }
    }
    out.sort();
    out
}

/// Dense numbering of the decorated transpositions at a fixed `m`, in the
/// order `(direction, a, b)`; used for bitmask sets of transpositions.
#[derive(Debug, Clone)]
pub struct TranspositionIndex {
    n: usize,
    per_direction: usize,
}

impl TranspositionIndex {
    pub fn new(m: usize) -> Result<Self> {
        let n = m - 1;
        let per_direction = n * (n - 1) / 2;
        if 3 * per_direction > 128 {
            return Err(Error::Capacity {
                what: "transposition bitmask".into(),
                needed: 3 * per_direction as u64,
                limit: 128,
            });
        }
        Ok(TranspositionIndex { n, per_direction })
    }

    pub fn len(&self) -> usize {
        3 * self.per_direction
    }

    pub fn is_empty(&self) -> bool {
        self.per_direction == 0
    }

    pub fn code(&self, t: &DecoratedTransposition) -> usize {
        let (a, b) = (t.a as usize, t.b as usize);
        let before: usize = (1..a).map(|i| self.n - i).sum();
        t.direction.index() * self.per_direction + before + (b - a - 1)
    }

    pub fn get(&self, code: usize) -> DecoratedTransposition {
        let d = Direction::from_index(code / self.per_direction);
        let mut r = code % self.per_direction;
        let mut a = 1;
        while r >= self.n - a {
            r -= self.n - a;
            a += 1;
        }
        DecoratedTransposition::new(a as u8, (a + 1 + r) as u8, d)
    }

    pub fn decode(&self, mask: u128) -> Vec<DecoratedTransposition> {
        (0..self.len())
            .filter(|&c| mask & (1u128 << c) != 0)
            .map(|c| self.get(c))
            .collect()
    }

    pub fn encode<'a>(&self, ts: impl IntoIterator<Item = &'a DecoratedTransposition>) -> u128 {
        ts.into_iter().fold(0u128, |acc, t| acc | (1u128 << self.code(t)))
    }
}

// ---------------------------------------------------------------------------
// JSON wire format

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermJson {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassJson {
    pub dir: Direction,
    pub idx: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellNameJson {
    pub m: usize,
    pub perm: PermJson,
    pub classes: Vec<ClassJson>,
}

impl From<&CellName> for CellNameJson {
    fn from(name: &CellName) -> Self {
        CellNameJson {
            m: name.m(),
            perm: PermJson {
                x: name.perm.seq(Direction::X).to_vec(),
                y: name.perm.seq(Direction::Y).to_vec(),
                z: name.perm.seq(Direction::Z).to_vec(),
            },
            classes: name
                .partition
                .classes()
                .iter()
                .map(|c| ClassJson {
                    dir: c.direction,
                    idx: c.indices.iter().copied().collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CellNameJson> for CellName {
    type Error = Error;

    fn try_from(j: CellNameJson) -> Result<Self> {
        let perm = TriplePerm::new(j.perm.x, j.perm.y, j.perm.z)?;
        if perm.m() != j.m {
            return Err(Error::Parse(format!(
                "m = {} but permutations have length {}",
                j.m,
                perm.n()
            )));
        }
        let partition = SingularityPartition::new(
            j.classes
                .into_iter()
                .map(|c| AdmissibleSet::new(c.dir, c.idx)),
        )?;
        CellName::new(perm, partition)
    }
}

impl CellName {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CellNameJson::from(self)).expect("cell names serialize")
    }

    pub fn from_json(s: &str) -> Result<CellName> {
        let j: CellNameJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        CellName::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_perm() -> TriplePerm {
        TriplePerm::from_digits("3142", "4132", "1324").unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let p = example_perm();
        assert!(is_admissible(&AdmissibleSet::new(Direction::X, [1, 2, 4]), &p).unwrap());
        assert!(is_admissible(&AdmissibleSet::new(Direction::Y, [1, 2, 3, 4]), &p).unwrap());
        assert!(!is_admissible(&AdmissibleSet::new(Direction::X, [3, 2]), &p).unwrap());
        assert!(is_admissible(&AdmissibleSet::new(Direction::X, [7, 2]), &p).is_err());
    }

    #[test]
    fn tau_reads_block_order() {
        let p = example_perm();
        let tau = tau_of(&AdmissibleSet::new(Direction::X, [1, 2, 4]), &p).unwrap();
        assert_eq!(
            tau,
            vec![
                DecoratedTransposition::new(1, 4, Direction::X),
                DecoratedTransposition::new(4, 2, Direction::X)
            ]
        );
        let tau = tau_of(&AdmissibleSet::new(Direction::Z, [3, 2]), &p).unwrap();
        assert_eq!(tau, vec![DecoratedTransposition::new(2, 3, Direction::Z)]);
        assert!(tau_of(&AdmissibleSet::new(Direction::X, [3, 2]), &p).is_err());
    }

    #[test]
    fn tau_on_five_vertex_block() {
        // y-order 4 1 2 5 3: block {1,2,5} reads 1, 2, 5
        let p = TriplePerm::from_digits("25134", "41253", "35241").unwrap();
        let tau = tau_of(&AdmissibleSet::new(Direction::Y, [1, 2, 5]), &p).unwrap();
        assert_eq!(
            tau,
            vec![
                DecoratedTransposition::new(1, 2, Direction::Y),
                DecoratedTransposition::new(2, 5, Direction::Y)
            ]
        );
    }

    #[test]
    fn canonical_alternative_name() {
        let part = SingularityPartition::new([
            AdmissibleSet::new(Direction::X, [1, 3]),
            AdmissibleSet::new(Direction::X, [2, 4]),
            AdmissibleSet::new(Direction::Y, [1, 3, 4]),
        ])
        .unwrap();
        let name = CellName::new(example_perm(), part.clone()).unwrap();
        assert_eq!(name.codimension(), 4);
        let canon = name.canonicalize();
        assert_eq!(canon.perm, TriplePerm::from_digits("1324", "1342", "1324").unwrap());
        assert_eq!(canon.partition, part);
        assert_eq!(canon.canonicalize(), canon);
        assert_eq!(Cell::from_name(&name).unwrap().name(), canon);
        // another member of the same renaming orbit
        let other = CellName::new(TriplePerm::from_digits("1342", "1342", "1324").unwrap(), part).unwrap();
        assert_eq!(other.canonicalize(), canon);
    }

    #[test]
    fn fubini_numbers() {
        assert_eq!(
            (0..6).map(fubini).collect::<Vec<_>>(),
            vec![1, 1, 3, 13, 75, 541]
        );
        for n in 1..6 {
            assert_eq!(ordered_set_partitions(n).len() as u64, fubini(n));
        }
    }

    #[test]
    fn top_cell_faces_at_m3() {
        let top = Cell::top(&TriplePerm::identity(3).unwrap());
        let faces = top.faces();
        assert_eq!(faces.len(), 3);
        for (d, (f, _)) in Direction::ALL.iter().zip(&faces) {
            assert_eq!(f.classes(), vec![AdmissibleSet::new(*d, [1, 2])]);
        }
    }

    #[test]
    fn pair_class_has_two_cofaces() {
        let perm = TriplePerm::from_digits("132", "213", "312").unwrap();
        let part = SingularityPartition::new([AdmissibleSet::new(Direction::Z, [1, 2])]).unwrap();
        let e = Cell::from_name(&CellName::new(perm.clone(), part).unwrap()).unwrap();
        let cof = e.cofaces();
        assert_eq!(cof.len(), 2);
        let tops: BTreeSet<Cell> = cof.iter().map(|(c, _)| *c).collect();
        let t = DecoratedTransposition::new(1, 2, Direction::Z);
        let expected: BTreeSet<Cell> = [Cell::top(&perm), Cell::top(&perm.apply(&t))].into();
        assert_eq!(tops, expected);
        // opposite incidences: the face lies between the two chambers
        assert_eq!(cof[0].1 + cof[1].1, 0);
    }

    #[test]
    fn three_class_has_six_ordered_splits() {
        let perm = TriplePerm::identity(4).unwrap();
        let part = SingularityPartition::new([AdmissibleSet::new(Direction::X, [1, 2, 3])]).unwrap();
        let e = Cell::from_name(&CellName::new(perm, part).unwrap()).unwrap();
        assert_eq!(e.cofaces().len(), 6);
    }

    #[test]
    fn transposition_codes_round_trip() {
        let idx = TranspositionIndex::new(6).unwrap();
        for c in 0..idx.len() {
            assert_eq!(idx.code(&idx.get(c)), c);
        }
        let t = DecoratedTransposition::new(1, 2, Direction::X);
        let u = DecoratedTransposition::new(1, 5, Direction::X);
        assert!(idx.code(&t) < idx.code(&u));
    }

    #[test]
    fn json_round_trip() {
        let part = SingularityPartition::new([AdmissibleSet::new(Direction::X, [1, 3])]).unwrap();
        let name = CellName::new(TriplePerm::from_digits("1342", "4132", "1324").unwrap(), part).unwrap();
        let s = name.to_json();
        assert_eq!(
            s,
            r#"{"m":5,"perm":{"x":[1,3,4,2],"y":[4,1,3,2],"z":[1,3,2,4]},"classes":[{"dir":"x","idx":[1,3]}]}"#
        );
        assert_eq!(CellName::from_json(&s).unwrap(), name);
    }
}
