//! `plumbers`: batch computations on spaces of plumbers' knots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use plumbers::complex::{build_blowup, build_complex, BlowupCell, Limits, Space, Stratum};
use plumbers::filtration::{is_simple, is_stable, is_triple_point, knot_components, ComplexityTable};
use plumbers::geometry::{format_q, is_knot, singularity_report};
use plumbers::homology::{homology_ranks, pages_to_json, spectral_sequence};
use plumbers::invariants::{check_invariance, evaluate, parse_invariant, ValueTable, V2};
use plumbers::vassiliev::{chord_diagram_of, derivative_cells_over, taylor_series, vassiliev_derivative, BlowupIndex};
use plumbers::combinatorics::TranspositionIndex;
use plumbers::{Cell, CellName, Error};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "plumbers", version, about = "Cell complexes, filtrations and Vassiliev derivatives of plumbers' knots")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Common {
    /// Number of moves per direction.
    #[arg(long, global = true)]
    m: Option<usize>,

    /// P for the whole space, S for the discriminant.
    #[arg(long, global = true)]
    space: Option<String>,

    /// Invariant id: v2, const:<q> or indicator:<cellId>.
    #[arg(long, global = true)]
    invariant: Option<String>,

    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Last spectral sequence page to report (default 3).
    #[arg(long, global = true)]
    max_page: Option<usize>,

    /// Report spectral sequence pages in cohomological (p, q).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    reindex: bool,

    /// A cell name as JSON, with `rho` for blowup cells.
    #[arg(long, global = true)]
    cell: Option<String>,

    /// Worker threads; all cores if absent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Refuse to build anything larger than this many cells.
    #[arg(long, global = true)]
    max_cells: Option<u64>,

    /// JSON file with any of the options above; flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl Common {
    fn merged(self, file: Common) -> Common {
        Common {
            m: self.m.or(file.m),
            space: self.space.or(file.space),
            invariant: self.invariant.or(file.invariant),
            out: self.out.or(file.out),
            max_page: self.max_page.or(file.max_page),
            reindex: self.reindex || file.reindex,
            cell: self.cell.or(file.cell),
            threads: self.threads.or(file.threads),
            max_cells: self.max_cells.or(file.max_cells),
            config: self.config,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Export the cell complex of P_m or S_m as JSON lines.
    Build,
    /// Check d² = 0 on the complex and, for S, on its blowup.
    VerifyD2,
    /// Closed-support homology ranks.
    Homology,
    /// Pages of the spectral sequence of the complexity filtration.
    Ss,
    /// Complexity of every cell of S_m.
    Filtration,
    /// Chambers of the space of knots.
    Components,
    /// Vassiliev derivative of an invariant at a cell.
    Derivative,
    /// Vassiliev–Taylor chain of an invariant.
    Taylor {
        /// Fail with exit code 2 unless the chain is a cycle.
        #[arg(long)]
        verify: bool,
    },
    /// Singularity data of a cell.
    Classify,
    /// Chord diagram of a stable cell.
    Chord,
}

enum Failure {
    Usage(String),
    Validation(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Validation(_) | Failure::Core(Error::NotACycle { .. }) => EXIT_VALIDATION,
            Failure::Core(Error::Capacity { .. }) => EXIT_CAPACITY,
            Failure::Core(Error::Parse(_)) => EXIT_USAGE,
            Failure::Core(_) | Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(s) | Failure::Validation(s) => s.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

/// The resolved options of one run.
struct RunConfig {
    opts: Common,
    limits: Limits,
}

impl RunConfig {
    fn m(&self) -> Outcome<usize> {
        self.opts.m.ok_or_else(|| Failure::Usage("--m is required".into()))
    }

    fn space(&self) -> Outcome<Space> {
        self.opts
            .space
            .as_deref()
            .unwrap_or("S")
            .parse()
            .map_err(|e: Error| Failure::Usage(e.to_string()))
    }

    fn invariant(&self) -> Outcome<&str> {
        self.opts.invariant.as_deref().ok_or_else(|| Failure::Usage("--invariant is required".into()))
    }

    fn cell_json(&self) -> Outcome<&str> {
        self.opts.cell.as_deref().ok_or_else(|| Failure::Usage("--cell is required".into()))
    }

    fn output(&self) -> Outcome<Box<dyn Write>> {
        Ok(match &self.opts.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }

    fn emit(&self, v: &Value) -> Outcome {
        let mut w = self.output()?;
        writeln!(w, "{}", serde_json::to_string(v).expect("json values serialize"))?;
        w.flush()?;
        Ok(())
    }
}

fn load_config(path: &Path) -> Outcome<Common> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

/// Either a base cell or a blowup cell, told apart by the `rho` key.
enum AnyCell {
    Base(Cell),
    Blowup(BlowupCell),
}

fn parse_cell(s: &str) -> Outcome<AnyCell> {
    let v: Value = serde_json::from_str(s).map_err(|e| Failure::Usage(format!("--cell: {e}")))?;
    if v.get("rho").is_some() {
        Ok(AnyCell::Blowup(BlowupCell::from_json(s)?))
    } else {
        Ok(AnyCell::Base(Cell::from_name(&CellName::from_json(s)?)?))
    }
}

fn run(cmd: Command, cfg: &RunConfig) -> Outcome {
    match cmd {
        Command::Build => {
            let c = build_complex(cfg.m()?, cfg.space()?, cfg.limits)?;
            let mut w = cfg.output()?;
            c.export_jsonl(&mut w)?;
            w.flush()?;
        }
        Command::VerifyD2 => {
            let m = cfg.m()?;
            let space = cfg.space()?;
            let c = build_complex(m, space, cfg.limits)?;
            let mut out = json!({"m": m, "space": format!("{space:?}"), "cells": c.len()});
            let mut bad = c.verify_d_squared().err().map(|x| x.to_string());
            if space == Space::S {
                let b = build_blowup(m, cfg.limits)?;
                out["blowup_cells"] = json!(b.len());
                bad = bad.or_else(|| b.verify_d_squared().err().map(|x| x.to_string()));
            }
            out["d_squared_zero"] = json!(bad.is_none());
            cfg.emit(&out)?;
            if let Some(cell) = bad {
                return Err(Failure::Validation(format!("d² ≠ 0 at {cell}")));
            }
        }
        Command::Homology => {
            let m = cfg.m()?;
            let space = cfg.space()?;
            let c = build_complex(m, space, cfg.limits)?;
            let ranks: Vec<[usize; 2]> = homology_ranks(&c).into_iter().map(|(d, r)| [d, r]).collect();
            cfg.emit(&json!({"m": m, "space": format!("{space:?}"), "ranks": ranks}))?;
        }
        Command::Ss => {
            let m = cfg.m()?;
            let s = build_complex(m, Space::S, cfg.limits)?;
            let table = ComplexityTable::build(&s);
            let b = build_blowup(m, cfg.limits)?;
            let pages = spectral_sequence(&b, &table, cfg.opts.max_page.unwrap_or(3))?;
            cfg.emit(&pages_to_json(m, &pages, cfg.opts.reindex))?;
        }
        Command::Filtration => {
            let s = build_complex(cfg.m()?, Space::S, cfg.limits)?;
            cfg.emit(&ComplexityTable::build(&s).to_json(&s))?;
        }
        Command::Components => {
            let m = cfg.m()?;
            let comps = knot_components(m);
            let values = ValueTable::build(&V2, m)?;
            let mut chambers = Vec::new();
            for id in 0..comps.len() {
                let first = comps.members(id).next().expect("components are nonempty");
                chambers.push(json!({
                    "id": id,
                    "size": comps.sizes()[id],
                    "representative": first.name_json(),
                    "v2": format_q(values.get(first)?),
                }));
            }
            cfg.emit(&json!({"m": m, "count": comps.len(), "components": chambers}))?;
        }
        Command::Derivative => {
            let id = cfg.invariant()?;
            let cells = match parse_cell(cfg.cell_json()?)? {
                AnyCell::Blowup(b) => vec![b],
                AnyCell::Base(e) => derivative_cells_over(&e, &TranspositionIndex::new(e.m())?),
            };
            let m = cells.first().map_or(cfg.opts.m.unwrap_or(3), |c| c.base.m());
            let inv = parse_invariant(id, m)?;
            let values = ValueTable::build(inv.as_ref(), m)?;
            let rows = cells
                .iter()
                .map(|c| Ok(json!({"cell": c.name_json(), "value": format_q(&vassiliev_derivative(&values, id, c)?)})))
                .collect::<Outcome<Vec<_>>>()?;
            cfg.emit(&json!({"invariant": id, "derivatives": rows}))?;
        }
        Command::Taylor { verify } => {
            let m = cfg.m()?;
            let id = cfg.invariant()?;
            let inv = parse_invariant(id, m)?;
            let s = build_complex(m, Space::S, cfg.limits)?;
            let s_cells: Vec<Cell> = s.iter().copied().collect();
            let values = ValueTable::build(inv.as_ref(), m)?;
            let mut chain = taylor_series(&values, id, m, &s_cells)?;
            let check = verify.then(|| chain.verify());
            cfg.emit(&chain.to_json(&BlowupIndex::new(&s_cells)?)?)?;
            if let Some(Err(e)) = check {
                let witness = check_invariance(inv.as_ref(), m)?
                    .map(|(a, b)| format!("; {id} differs on {} and {}", a.name(), b.name()))
                    .unwrap_or_default();
                return Err(Failure::Validation(format!("{e}{witness}")));
            }
        }
        Command::Classify => {
            let e = match parse_cell(cfg.cell_json()?)? {
                AnyCell::Base(e) => e,
                AnyCell::Blowup(b) => b.base,
            };
            let report = singularity_report(&e);
            let mut out = json!({
                "cell": e.name_json(),
                "dim": e.dim(),
                "codimension": e.codimension(),
                "singular": !report.is_empty(),
            });
            if report.is_empty() {
                out["knot"] = json!(is_knot(&e));
                if e.is_top() {
                    out["v2"] = json!(format_q(&evaluate(&V2, &e)?));
                }
            } else {
                let (simple, points) = is_simple(&e)?;
                out["simple"] = json!(simple);
                out["double_points"] = json!(points);
                out["stable"] = json!(is_stable(&e));
                out["triple_point"] = json!(is_triple_point(&e));
                out["components"] = json!(report.components);
                out["strands"] = json!(report.component_strands);
                let xs: Vec<Value> = report
                    .intersections
                    .iter()
                    .map(|x| {
                        json!({
                            "pipes": [x.pipes.0, x.pipes.1],
                            "kind": format!("{:?}", x.kind),
                            "lo": x.locus.lo,
                            "hi": x.locus.hi,
                        })
                    })
                    .collect();
                out["intersections"] = json!(xs);
            }
            cfg.emit(&out)?;
        }
        Command::Chord => {
            let e = match parse_cell(cfg.cell_json()?)? {
                AnyCell::Base(e) => e,
                AnyCell::Blowup(b) => b.base,
            };
            let d = chord_diagram_of(&e)?;
            cfg.emit(&json!({"cell": e.name_json(), "chords": d.chords}))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = (|| {
        let mut opts = cli.common;
        if let Some(path) = opts.config.clone() {
            opts = opts.merged(load_config(&path)?);
        }
        if let Some(n) = opts.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Usage(e.to_string()))?;
        }
        let limits = opts.max_cells.map_or_else(Limits::default, |max_cells| Limits { max_cells });
        run(cli.command, &RunConfig { opts, limits })
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("plumbers: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
