//! Knot invariants on the chambers of `P_m`.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;
use rayon::prelude::*;

use crate::combinatorics::{fubini, top_cells, Cell, TriplePerm};
use crate::error::{Error, Result};
use crate::filtration::KnotComponents;
use crate::geometry::{format_q, generic_gauss_diagram, is_knot, parse_q, representative, GaussDiagram, PlumbersCurve, Q};

/// A function on knot top cells. It is an invariant only if it is constant
/// on chambers, which [`check_invariance`] tests.
pub trait Invariant: Send + Sync {
    fn id(&self) -> String;

    fn value(&self, cell: &Cell) -> Result<Q>;
}

/// Evaluates after checking that `cell` is a knot top cell.
pub fn evaluate(inv: &dyn Invariant, cell: &Cell) -> Result<Q> {
    if !cell.is_top() || !is_knot(cell) {
        return Err(Error::domain(format!("{} is not a knot top cell", cell.name())));
    }
    inv.value(cell)
}

#[derive(Debug, Clone)]
pub struct Constant(pub Q);

impl Invariant for Constant {
    fn id(&self) -> String {
        format!("const:{}", format_q(&self.0))
    }

    fn value(&self, _: &Cell) -> Result<Q> {
        Ok(self.0.clone())
    }
}

/// 1 on one top cell, 0 elsewhere. Not an invariant once its chamber has
/// more than one cell.
#[derive(Debug, Clone)]
pub struct Indicator {
    pub cell: Cell,
    pub id: u64,
}

impl Invariant for Indicator {
    fn id(&self) -> String {
        format!("indicator:{}", self.id)
    }

    fn value(&self, cell: &Cell) -> Result<Q> {
        Ok(if *cell == self.cell { Q::from_integer(1.into()) } else { Q::zero() })
    }
}

/// 1 on one chamber, 0 elsewhere.
#[derive(Debug, Clone)]
pub struct ComponentIndicator {
    pub members: HashSet<Cell>,
    pub id: usize,
}

impl ComponentIndicator {
    pub fn new(components: &KnotComponents, id: usize) -> Self {
        ComponentIndicator {
            members: components.members(id).copied().collect(),
            id,
        }
    }
}

impl Invariant for ComponentIndicator {
    fn id(&self) -> String {
        format!("component:{}", self.id)
    }

    fn value(&self, cell: &Cell) -> Result<Q> {
        Ok(Q::from_integer(i64::from(self.members.contains(cell)).into()))
    }
}

/// The degree-two Vassiliev invariant (the Casson invariant).
#[derive(Debug, Clone, Copy)]
pub struct V2;

impl Invariant for V2 {
    fn id(&self) -> String {
        "v2".into()
    }

    fn value(&self, cell: &Cell) -> Result<Q> {
        v2_of_curve(&representative(cell))
    }
}

/// `Σ ε_a ε_b` over pairs of arrows met in the order
/// under-a, over-b, over-a, under-b.
pub fn v2_of_diagram(g: &GaussDiagram) -> i64 {
    let mut total = 0;
    for a in &g.arrows {
        for b in &g.arrows {
            if a.under < b.over && b.over < a.over && a.over < b.under {
                total += (a.sign * b.sign) as i64;
            }
        }
    }
    total
}

pub fn v2_of_curve(curve: &PlumbersCurve) -> Result<Q> {
    Ok(Q::from_integer(v2_of_diagram(&generic_gauss_diagram(curve)?).into()))
}

/// Export id of the `i`-th top cell of `P_m` (cells are numbered by
/// dimension, then lexicographically, and top cells come last).
pub fn top_cell_id(m: usize, i: usize) -> u64 {
    let n = m - 1;
    let fact: u64 = (1..=n as u64).product();
    fubini(n).pow(3) - fact.pow(3) + i as u64
}

/// Resolves a registry id: `const:<q>`, `v2` or `indicator:<cellId>`.
pub fn parse_invariant(id: &str, m: usize) -> Result<Box<dyn Invariant>> {
    if id == "v2" {
        return Ok(Box::new(V2));
    }
    if let Some(v) = id.strip_prefix("const:") {
        return Ok(Box::new(Constant(parse_q(v)?)));
    }
    if let Some(v) = id.strip_prefix("indicator:") {
        let want: u64 = v.parse().map_err(|_| Error::Parse(format!("bad cell id {v:?}")))?;
        let first = top_cell_id(m, 0);
        let tops = top_cells(m);
        let cell = want
            .checked_sub(first)
            .and_then(|i| tops.get(i as usize))
            .ok_or_else(|| Error::domain(format!("cell {want} is not a top cell of P_{m}")))?;
        return Ok(Box::new(Indicator { cell: *cell, id: want }));
    }
    Err(Error::Parse(format!("unknown invariant {id:?}")))
}

/// Values of an invariant on every top cell of `P_m`.
#[derive(Debug, Clone)]
pub struct ValueTable {
    values: HashMap<Cell, Q>,
}

impl ValueTable {
    pub fn build(inv: &dyn Invariant, m: usize) -> Result<Self> {
        let values = top_cells(m)
            .into_par_iter()
            .map(|c| Ok((c, inv.value(&c)?)))
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(ValueTable { values })
    }

    /// The representative of the reduced class: values shifted to vanish on
    /// the chamber of the monotone staircase, the unknot.
    pub fn reduced(&self, m: usize) -> Result<ValueTable> {
        let base = self.get(&Cell::top(&TriplePerm::identity(m)?))?.clone();
        Ok(ValueTable {
            values: self.values.iter().map(|(c, v)| (*c, v - &base)).collect(),
        })
    }

    pub fn get(&self, cell: &Cell) -> Result<&Q> {
        self.values.get(cell).ok_or_else(|| Error::Undefined {
            invariant: String::new(),
            cell: cell.name().to_string(),
        })
    }
}

/// Looks for two chambers-adjacent top cells (sharing a nonsingular wall)
/// with different values. `None` means the function is an invariant.
pub fn check_invariance(inv: &dyn Invariant, m: usize) -> Result<Option<(Cell, Cell)>> {
    let table = ValueTable::build(inv, m)?;
    let tops = top_cells(m);
    Ok(tops.par_iter().find_map_first(|k| {
        k.faces().into_iter().find_map(|(wall, _)| {
            if !is_knot(&wall) {
                return None;
            }
            let other = wall.cofaces().into_iter().map(|(c, _)| c).find(|c| c != k)?;
            (table.values[k] != table.values[&other]).then_some((*k, other))
        })
    }))
}
