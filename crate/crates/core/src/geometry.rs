//! Exact geometry of plumbers' curves.
//!
//! A curve with `m` moves starts at the origin, visits `m - 1` interior
//! vertices and ends at `(1,1,1)`, travelling parallel to x, then y, then z
//! in each move. That gives `3m` pipes. Only pipes whose indices differ by
//! at least four may not meet.
//!
//! Every predicate used here is an order or equality comparison between
//! coordinates along a single axis, so for a cell it suffices to work with
//! the integer block ranks of its vertices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{Cell, Direction};
use crate::error::{Error, Result};

pub type Q = BigRational;

/// Minimum index gap between pipes that must stay disjoint in a knot.
pub const DISTANT_GAP: usize = 4;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let parse_int = |t: &str| BigInt::from_str(t.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    match s.split_once('/') {
        Some((a, b)) => {
            let den = parse_int(b)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("{s:?}: zero denominator")));
            }
            Ok(Q::new(parse_int(a)?, den))
        }
        None => Ok(Q::from_integer(parse_int(s)?)),
    }
}

pub fn format_q(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// A curve given by its interior vertices, each coordinate in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlumbersCurve {
    m: usize,
    vertices: Vec<[Q; 3]>,
}

impl PlumbersCurve {
    pub fn new(vertices: Vec<[Q; 3]>) -> Result<Self> {
        let m = vertices.len() + 1;
        if m < 3 {
            return Err(Error::domain("a plumbers' curve needs at least two vertices"));
        }
        let (zero, one) = (Q::zero(), Q::one());
        for (k, v) in vertices.iter().enumerate() {
            if v.iter().any(|c| *c <= zero || *c >= one) {
                return Err(Error::domain(format!(
                    "vertex {} has a coordinate outside (0,1)",
                    k + 1
                )));
            }
        }
        Ok(PlumbersCurve { m, vertices })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> &[[Q; 3]] {
        &self.vertices
    }

    /// The path's corner points: origin, vertices, `(1,1,1)`.
    pub fn points(&self) -> Vec<[Q; 3]> {
        let mut pts = Vec::with_capacity(self.m + 1);
        pts.push([Q::zero(), Q::zero(), Q::zero()]);
        pts.extend(self.vertices.iter().cloned());
        pts.push([Q::one(), Q::one(), Q::one()]);
        pts
    }

    pub fn to_json(&self) -> String {
        let j = CurveJson {
            m: self.m,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(format_q).collect())
                .collect(),
        };
        serde_json::to_string(&j).expect("curves serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CurveJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.vertices.len() + 1 != j.m {
            return Err(Error::Parse(format!(
                "m = {} but {} vertices given",
                j.m,
                j.vertices.len()
            )));
        }
        let vertices = j
            .vertices
            .iter()
            .map(|v| {
                if v.len() != 3 {
                    return Err(Error::Parse("a vertex has three coordinates".into()));
                }
                Ok([parse_q(&v[0])?, parse_q(&v[1])?, parse_q(&v[2])?])
            })
            .collect::<Result<Vec<_>>>()?;
        PlumbersCurve::new(vertices)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveJson {
    m: usize,
    vertices: Vec<Vec<String>>,
}

/// One axis-parallel segment. Pipes are numbered `1..=3m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipe<T> {
    pub index: usize,
    pub direction: Direction,
    pub start: [T; 3],
    pub end: [T; 3],
}

impl<T: Clone + Ord> Pipe<T> {
    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }

    /// The two coordinates held constant along the pipe.
    pub fn fixed(&self) -> [(Direction, T); 2] {
        let d = self.direction.index();
        let a = (d + 1) % 3;
        let b = (d + 2) % 3;
        [
            (Direction::from_index(a), self.start[a].clone()),
            (Direction::from_index(b), self.start[b].clone()),
        ]
    }

    /// Closed interval covered along the pipe's own direction.
    pub fn span(&self) -> (T, T) {
        let d = self.direction.index();
        let (s, e) = (self.start[d].clone(), self.end[d].clone());
        if s <= e {
            (s, e)
        } else {
            (e, s)
        }
    }

    fn bounds(&self, axis: usize) -> (T, T) {
        let (s, e) = (self.start[axis].clone(), self.end[axis].clone());
        if s <= e {
            (s, e)
        } else {
            (e, s)
        }
    }
}

/// Pipes of the path through `points` (origin, vertices, end).
pub fn pipes_through<T: Clone>(points: &[[T; 3]]) -> Vec<Pipe<T>> {
    let mut out = Vec::with_capacity(3 * (points.len() - 1));
    for (k, w) in points.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let p1 = [b[0].clone(), a[1].clone(), a[2].clone()];
        let p2 = [b[0].clone(), b[1].clone(), a[2].clone()];
        out.push(Pipe {
            index: 3 * k + 1,
            direction: Direction::X,
            start: a.clone(),
            end: p1.clone(),
        });
        out.push(Pipe {
            index: 3 * k + 2,
            direction: Direction::Y,
            start: p1,
            end: p2.clone(),
        });
        out.push(Pipe {
            index: 3 * k + 3,
            direction: Direction::Z,
            start: p2,
            end: b.clone(),
        });
    }
    out
}

pub fn pipes_of(curve: &PlumbersCurve) -> Vec<Pipe<Q>> {
    pipes_through(&curve.points())
}

/// Corner points of the representative of a cell, in block-rank
/// coordinates: along axis `d` the origin has rank 0, a vertex in block `k`
/// has rank `k` and the endpoint has rank `B_d + 1`.
pub fn rank_points(cell: &Cell) -> Vec<[i64; 3]> {
    let n = cell.n();
    let ranks: Vec<Vec<usize>> = Direction::ALL.iter().map(|&d| cell.ranks(d)).collect();
    let mut pts = Vec::with_capacity(n + 2);
    pts.push([0, 0, 0]);
    for v in 1..=n {
        pts.push([ranks[0][v] as i64, ranks[1][v] as i64, ranks[2][v] as i64]);
    }
    pts.push(Direction::ALL.map(|d| cell.block_count(d) as i64 + 1));
    pts
}

/// Generic point of an open cell: along axis `d` the vertices in block `k`
/// sit at `k / (B_d + 1)`.
pub fn representative(cell: &Cell) -> PlumbersCurve {
    let counts = Direction::ALL.map(|d| cell.block_count(d) as i64 + 1);
    let pts = rank_points(cell);
    let vertices = pts[1..pts.len() - 1]
        .iter()
        .map(|p| [q(p[0], counts[0]), q(p[1], counts[1]), q(p[2], counts[2])])
        .collect();
    PlumbersCurve::new(vertices).expect("ranks lie strictly inside (0, B+1)")
}

/// The canonical cell containing a curve.
pub fn cell_of(curve: &PlumbersCurve) -> Cell {
    let n = curve.m() - 1;
    let mut blocks: [Vec<Vec<u8>>; 3] = Default::default();
    for d in 0..3 {
        let mut idx: Vec<u8> = (1..=n as u8).collect();
        idx.sort_by(|&a, &b| curve.vertices[a as usize - 1][d].cmp(&curve.vertices[b as usize - 1][d]));
        let mut out: Vec<Vec<u8>> = Vec::new();
        for i in idx {
            let c = &curve.vertices[i as usize - 1][d];
            match out.last_mut() {
                Some(b) if curve.vertices[b[0] as usize - 1][d] == *c => b.push(i),
                _ => out.push(vec![i]),
            }
        }
        blocks[d] = out;
    }
    Cell::from_blocks(n, [&blocks[0], &blocks[1], &blocks[2]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocusKind {
    /// Two nondegenerate pipes of different directions meeting at a point
    /// interior to both.
    TransversePoint,
    /// A single common point that is an endpoint of at least one pipe.
    CornerTouch,
    /// A common segment of positive length.
    OverlapSegment,
}

/// A closed axis-aligned box `[lo, hi]`; points and segments are boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Locus<T> {
    pub lo: [T; 3],
    pub hi: [T; 3],
}

impl<T: Clone + Ord> Locus<T> {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn meets(&self, other: &Locus<T>) -> bool {
        (0..3).all(|a| self.lo[a] <= other.hi[a] && other.lo[a] <= self.hi[a])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intersection<T> {
    pub pipes: (usize, usize),
    pub kind: LocusKind,
    pub locus: Locus<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityReport<T> {
    pub intersections: Vec<Intersection<T>>,
    /// Connected components of the self-intersection set.
    pub components: usize,
    /// Per component: its locus hull and the number of strands of the curve
    /// through it (runs of non-distant pipes).
    pub component_strands: Vec<usize>,
}

impl<T> SingularityReport<T> {
    pub fn is_empty(&self) -> bool {
        self.intersections.is_empty()
    }

    pub fn max_strands(&self) -> usize {
        self.component_strands.iter().copied().max().unwrap_or(0)
    }
}

fn intersect_pipes<T: Clone + Ord>(p: &Pipe<T>, r: &Pipe<T>) -> Option<Intersection<T>> {
    let mut lo: [T; 3] = p.start.clone();
    let mut hi: [T; 3] = p.start.clone();
    let mut positive = false;
    for a in 0..3 {
        let (pl, ph) = p.bounds(a);
        let (rl, rh) = r.bounds(a);
        let l = pl.max(rl);
        let h = ph.min(rh);
        if l > h {
            return None;
        }
        positive |= l < h;
        lo[a] = l;
        hi[a] = h;
    }
    let kind = if positive {
        LocusKind::OverlapSegment
    } else {
        let interior = |pipe: &Pipe<T>| {
            let (s, e) = pipe.span();
            let c = &lo[pipe.direction.index()];
            s < *c && *c < e
        };
        if p.direction != r.direction && interior(p) && interior(r) {
            LocusKind::TransversePoint
        } else {
            LocusKind::CornerTouch
        }
    };
    Some(Intersection {
        pipes: (p.index, r.index),
        kind,
        locus: Locus { lo, hi },
    })
}

/// Intersections between distant pipes, with component structure.
pub fn report_for_pipes<T: Clone + Ord>(pipes: &[Pipe<T>]) -> SingularityReport<T> {
    let mut intersections = Vec::new();
    for i in 0..pipes.len() {
        for j in i + DISTANT_GAP..pipes.len() {
            if let Some(x) = intersect_pipes(&pipes[i], &pipes[j]) {
                intersections.push(x);
            }
        }
    }
    let k = intersections.len();
    let mut uf = UnionFind::<usize>::new(k);
    for a in 0..k {
        for b in a + 1..k {
            if intersections[a].locus.meets(&intersections[b].locus) {
                uf.union(a, b);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut roots: Vec<usize> = labels.clone();
    roots.sort_unstable();
    roots.dedup();
    let component_strands = roots
        .iter()
        .map(|&root| {
            let mut idx: Vec<usize> = intersections
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == root)
                .flat_map(|(x, _)| [x.pipes.0, x.pipes.1])
                .collect();
            idx.sort_unstable();
            idx.dedup();
            1 + idx.windows(2).filter(|w| w[1] - w[0] >= DISTANT_GAP).count()
        })
        .collect();
    SingularityReport {
        intersections,
        components: roots.len(),
        component_strands,
    }
}

/// Self-intersections of the representative of `cell`, in rank coordinates.
/// The pattern is the same for every curve in the open cell.
pub fn singularity_report(cell: &Cell) -> SingularityReport<i64> {
    report_for_pipes(&pipes_through(&rank_points(cell)))
}

pub fn curve_report(curve: &PlumbersCurve) -> SingularityReport<Q> {
    report_for_pipes(&pipes_of(curve))
}

/// Whether any pair of distant pipes meets. Cheaper than a full report.
pub fn is_singular(cell: &Cell) -> bool {
    let pipes = pipes_through(&rank_points(cell));
    (0..pipes.len()).any(|i| {
        (i + DISTANT_GAP..pipes.len()).any(|j| {
            (0..3).all(|a| {
                let (pl, ph) = pipes[i].bounds(a);
                let (rl, rh) = pipes[j].bounds(a);
                pl.max(rl) <= ph.min(rh)
            })
        })
    })
}

pub fn is_knot(cell: &Cell) -> bool {
    !is_singular(cell)
}

// ---------------------------------------------------------------------------
// Gauss diagrams

/// One crossing of a projection: curve parameters (normalized to `(0,1)`)
/// of the over- and under-strand, and the crossing sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub over: Q,
    pub under: Q,
    pub sign: i8,
}

/// Crossings of a knot projection, basepoint at parameter 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GaussDiagram {
    pub arrows: Vec<Arrow>,
}

impl GaussDiagram {
    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    /// The Gauss word: `(crossing, is_over)` in parameter order.
    pub fn word(&self) -> Vec<(usize, bool)> {
        let mut ev: Vec<(&Q, usize, bool)> = Vec::with_capacity(2 * self.arrows.len());
        for (k, a) in self.arrows.iter().enumerate() {
            ev.push((&a.over, k, true));
            ev.push((&a.under, k, false));
        }
        ev.sort_by(|a, b| a.0.cmp(b.0));
        ev.into_iter().map(|(_, k, o)| (k, o)).collect()
    }
}

impl fmt::Display for GaussDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, over) in self.word() {
            let s = if self.arrows[k].sign > 0 { '+' } else { '-' };
            write!(f, "{}{}{} ", if over { 'O' } else { 'U' }, k + 1, s)?;
        }
        Ok(())
    }
}

/// Projection direction. Its components have mixed signs, so the corners
/// `(0,0,0)` and `(1,1,1)` project onto the boundary of the projected cube
/// and the long knot closes up outside its diagram.
pub fn default_projection() -> [Q; 3] {
    [q(1, 1), q(-5, 7), q(17, 31)]
}

/// The default direction with its last coordinate scaled by
/// `(1 + 1/101)^k`.
pub fn perturbed_projection(k: u32) -> [Q; 3] {
    let mut u = default_projection();
    let f = q(102, 101);
    for _ in 0..k {
        u[2] = &u[2] * &f;
    }
    u
}

/// Removes zero-length segments and merges consecutive collinear ones
/// (cancelling back-tracks) until neither occurs.
fn simplify(points: Vec<[Q; 3]>) -> Vec<[Q; 3]> {
    let mut pts = points;
    loop {
        let before = pts.len();
        pts.dedup();
        let mut out: Vec<[Q; 3]> = Vec::with_capacity(pts.len());
        for p in pts {
            if out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                let same_axis = (0..3).filter(|&i| a[i] == b[i] && b[i] == p[i]).count() == 2;
                if same_axis {
                    out.pop();
                }
            }
            out.push(p);
        }
        out.dedup();
        pts = out;
        if pts.len() == before {
            return pts;
        }
    }
}

fn cross(a: &[Q; 2], b: &[Q; 2]) -> Q {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Gauss diagram of an embedded curve projected along `direction`.
///
/// The picture plane uses coordinates `(y - (u2/u1) x, z - (u3/u1) x)` and
/// a point's height is `x / u1`; the higher strand is over. Fails with
/// [`Error::NonGenericProjection`] if two projected segments overlap, a
/// crossing falls on a corner, or two crossings coincide.
pub fn gauss_diagram(curve: &PlumbersCurve, direction: &[Q; 3]) -> Result<GaussDiagram> {
    if !curve_report(curve).is_empty() {
        return Err(Error::domain("gauss diagrams need an embedded curve"));
    }
    if direction[0].is_zero() {
        return Err(Error::NonGenericProjection("projection direction has u1 = 0".into()));
    }
    let k2 = &direction[1] / &direction[0];
    let k3 = &direction[2] / &direction[0];
    let pipes = pipes_of(curve);
    let mut corners = vec![pipes[0].start.clone()];
    corners.extend(pipes.into_iter().map(|p| p.end));
    let pts = simplify(corners);
    let proj: Vec<[Q; 2]> = pts
        .iter()
        .map(|p| [&p[1] - &k2 * &p[0], &p[2] - &k3 * &p[0]])
        .collect();
    let height = |p: &[Q; 3], s: &Q, e: &[Q; 3]| -> Q {
        // x along the segment at fraction s
        (&p[0] + s * (&e[0] - &p[0])) / &direction[0]
    };
    let segs = pts.len() - 1;
    let total = Q::from_integer(BigInt::from(segs as i64));
    let mut arrows = Vec::new();
    let mut points_2d: Vec<[Q; 2]> = Vec::new();
    for i in 0..segs {
        let a0 = &proj[i];
        let da = [&proj[i + 1][0] - &a0[0], &proj[i + 1][1] - &a0[1]];
        for j in i + 1..segs {
            let b0 = &proj[j];
            let db = [&proj[j + 1][0] - &b0[0], &proj[j + 1][1] - &b0[1]];
            let denom = cross(&da, &db);
            let w = [&b0[0] - &a0[0], &b0[1] - &a0[1]];
            if denom.is_zero() {
                // parallel: collinear overlap is degenerate, adjacent share a point
                if !cross(&w, &da).is_zero() {
                    continue;
                }
                let dd = &da[0] * &da[0] + &da[1] * &da[1];
                let t0 = (&w[0] * &da[0] + &w[1] * &da[1]) / &dd;
                let w1 = [&proj[j + 1][0] - &a0[0], &proj[j + 1][1] - &a0[1]];
                let t1 = (&w1[0] * &da[0] + &w1[1] * &da[1]) / &dd;
                let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                let overlap_lo = lo.max(Q::zero());
                let overlap_hi = hi.min(Q::one());
                let touches = overlap_lo <= overlap_hi;
                let only_shared_end = j == i + 1 && overlap_lo == overlap_hi && overlap_hi == Q::one();
                if touches && !only_shared_end {
                    return Err(Error::NonGenericProjection(format!(
                        "segments {i} and {j} overlap in projection"
                    )));
                }
                continue;
            }
            let s = cross(&w, &db) / &denom;
            let t = cross(&w, &da) / &denom;
            let zero = Q::zero();
            let one = Q::one();
            if s < zero || s > one || t < zero || t > one {
                continue;
            }
            if j == i + 1 && s == one && t == zero {
                continue;
            }
            if s == zero || s == one || t == zero || t == one {
                return Err(Error::NonGenericProjection(format!(
                    "segments {i} and {j} cross at a corner"
                )));
            }
            let pt = [&a0[0] + &s * &da[0], &a0[1] + &s * &da[1]];
            if points_2d.contains(&pt) {
                return Err(Error::NonGenericProjection("two crossings coincide".into()));
            }
            points_2d.push(pt);
            let hi_ = height(&pts[i], &s, &pts[i + 1]);
            let hj = height(&pts[j], &t, &pts[j + 1]);
            if hi_ == hj {
                return Err(Error::domain("curve is not embedded"));
            }
            let ti = (Q::from_integer(BigInt::from(i as i64)) + &s) / &total;
            let tj = (Q::from_integer(BigInt::from(j as i64)) + &t) / &total;
            let (over, under, d_over, d_under) = if hi_ > hj {
                (ti, tj, &da, &db)
            } else {
                (tj, ti, &db, &da)
            };
            let c = cross(d_over, d_under);
            let sign = if c.is_positive() { 1 } else { -1 };
            arrows.push(Arrow { over, under, sign });
        }
    }
    Ok(GaussDiagram { arrows })
}

/// Gauss diagram along the default direction, perturbing deterministically
/// until the projection is generic.
pub fn generic_gauss_diagram(curve: &PlumbersCurve) -> Result<GaussDiagram> {
    let mut last = None;
    for k in 0..64 {
        match gauss_diagram(curve, &perturbed_projection(k)) {
            Err(Error::NonGenericProjection(msg)) => last = Some(msg),
            other => return other,
        }
    }
    Err(Error::NonGenericProjection(last.unwrap_or_default()))
}
