//! Drives a [`RunConfig`] over its grid and renders the result table.
//!
//! Columns per mode:
//!
//! | mode | columns |
//! |------|---------|
//! | `bounds` | `alpha_sq, alpha_sq_attenuated, eta_total, sql, sql_lossy, helstrom` |
//! | `enumerate` | inputs, then `error_prob, err_0..err_3, sql, sql_lossy, helstrom` |
//! | Monte Carlo modes | inputs, then `trials, error_prob, stderr, err_0..err_3, sql, sql_lossy` |
//!
//! The inputs block is `alpha_sq, alpha_sq_attenuated, m, eta_t, eta_spd,
//! eta_total, xi, nu, delta_t_us, discard_loss, truth_delay`. `sweep` walks
//! the signal grid, `efficiency-sweep` walks `eta_spd_grid` times the signal
//! grid, `delay-sweep` walks the signal grid times `dt_grid` with the delay
//! model off then on, and `stages-sweep` walks the signal grid times
//! `m_min..=m_max` with discard loss off then on.

use std::fmt::{self, Write as _};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{helstrom_qpsk, sql_heterodyne, sql_lossy, BoundPoint};
use crate::config::{Mode, RunConfig};
use crate::enumerate::enumerate_error_probability;
use crate::error::{Error, Result};
use crate::monte_carlo::{estimate_error, RngSpec};

const INPUTS: [&str; 11] = [
    "alpha_sq",
    "alpha_sq_attenuated",
    "m",
    "eta_t",
    "eta_spd",
    "eta_total",
    "xi",
    "nu",
    "delta_t_us",
    "discard_loss",
    "truth_delay",
];
const PER_SYMBOL: [&str; 4] = ["err_0", "err_1", "err_2", "err_3"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Count(u64),
    Flag(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Count(v) => write!(f, "{v}"),
            Cell::Flag(v) => f.write_str(if *v { "on" } else { "off" }),
        }
    }
}

impl From<&Cell> for Value {
    fn from(c: &Cell) -> Value {
        match *c {
            Cell::Real(v) => json!(v),
            Cell::Count(v) => json!(v),
            Cell::Flag(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub mode: Mode,
    pub seed: u64,
    pub config: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// First 16 hex digits of the SHA-256 of the echoed configuration.
    pub fn digest(&self) -> String {
        Sha256::digest(self.config.as_bytes())
            .iter()
            .take(8)
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }

    pub fn header_line(&self) -> String {
        format!(
            "# qpskrx mode={} seed={} digest={} config={}",
            self.mode,
            self.seed,
            self.digest(),
            self.config
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header_line();
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| ((*k).to_owned(), Value::from(c)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let config: Value = serde_json::from_str(&self.config).unwrap_or(Value::Null);
        let doc = json!({
            "mode": self.mode.name(),
            "seed": self.seed,
            "digest": self.digest(),
            "config": config,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serialises");
        s.push('\n');
        s
    }

    /// Values of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// One operating point of a sweep.
#[derive(Debug, Clone, Copy)]
struct Point {
    alpha_sq: f64,
    m: usize,
    eta_spd: f64,
    delta_t_us: f64,
    discard_loss: bool,
    truth_delay: bool,
}

impl Point {
    fn base(cfg: &RunConfig, alpha_sq: f64) -> Self {
        Self {
            alpha_sq,
            m: cfg.m,
            eta_spd: cfg.eta_spd,
            delta_t_us: cfg.delta_t_us,
            discard_loss: cfg.discard_loss,
            truth_delay: cfg.truth_delay,
        }
    }

    fn config(&self, cfg: &RunConfig) -> RunConfig {
        RunConfig {
            m: self.m,
            eta_spd: self.eta_spd,
            delta_t_us: self.delta_t_us,
            discard_loss: self.discard_loss,
            truth_delay: self.truth_delay,
            ..cfg.clone()
        }
    }

    fn context(&self) -> String {
        format!(
            "alpha_sq={} m={} eta_spd={} delta_t_us={} discard_loss={} truth_delay={}",
            self.alpha_sq,
            self.m,
            self.eta_spd,
            self.delta_t_us,
            self.discard_loss,
            self.truth_delay
        )
    }

    fn inputs(&self, cfg: &RunConfig) -> Vec<Cell> {
        let eta_total = cfg.eta_t * self.eta_spd;
        vec![
            Cell::Real(self.alpha_sq),
            Cell::Real(eta_total * self.alpha_sq),
            Cell::Count(self.m as u64),
            Cell::Real(cfg.eta_t),
            Cell::Real(self.eta_spd),
            Cell::Real(eta_total),
            Cell::Real(cfg.xi),
            Cell::Real(cfg.nu),
            Cell::Real(self.delta_t_us),
            Cell::Flag(self.discard_loss),
            Cell::Flag(self.truth_delay),
        ]
    }
}

fn points(cfg: &RunConfig) -> Vec<Point> {
    let alphas = cfg.alpha_grid().values();
    let mut out = Vec::new();
    match cfg.mode {
        Mode::Bounds | Mode::Sweep | Mode::Enumerate => {
            out.extend(alphas.iter().map(|&a| Point::base(cfg, a)));
        }
        Mode::EfficiencySweep => {
            for &eta_spd in &cfg.eta_spd_grid {
                out.extend(alphas.iter().map(|&a| Point {
                    eta_spd,
                    ..Point::base(cfg, a)
                }));
            }
        }
        Mode::DelaySweep => {
            let dts = cfg.dt_grid.values();
            for &a in &alphas {
                for &delta_t_us in &dts {
                    for truth_delay in [false, true] {
                        out.push(Point {
                            delta_t_us,
                            truth_delay,
                            ..Point::base(cfg, a)
                        });
                    }
                }
            }
        }
        Mode::StagesSweep => {
            for &a in &alphas {
                for m in cfg.m_min..=cfg.m_max {
                    for discard_loss in [false, true] {
                        out.push(Point {
                            m,
                            discard_loss,
                            ..Point::base(cfg, a)
                        });
                    }
                }
            }
        }
    }
    out
}

fn columns(mode: Mode) -> Vec<&'static str> {
    match mode {
        Mode::Bounds => vec![
            "alpha_sq",
            "alpha_sq_attenuated",
            "eta_total",
            "sql",
            "sql_lossy",
            "helstrom",
        ],
        Mode::Enumerate => {
            let mut c = INPUTS.to_vec();
            c.push("error_prob");
            c.extend(PER_SYMBOL);
            c.extend(["sql", "sql_lossy", "helstrom"]);
            c
        }
        _ => {
            let mut c = INPUTS.to_vec();
            c.extend(["trials", "error_prob", "stderr"]);
            c.extend(PER_SYMBOL);
            c.extend(["sql", "sql_lossy"]);
            c
        }
    }
}

fn row(cfg: &RunConfig, p: &Point) -> Result<Vec<Cell>> {
    let local = p.config(cfg);
    let eta_total = local.eta_total();
    if cfg.mode == Mode::Bounds {
        let b = BoundPoint::new(p.alpha_sq, eta_total)?;
        return Ok(vec![
            Cell::Real(b.alpha_sq),
            Cell::Real(eta_total * b.alpha_sq),
            Cell::Real(eta_total),
            Cell::Real(b.sql),
            Cell::Real(b.sql_lossy),
            Cell::Real(b.helstrom),
        ]);
    }
    let receiver = local.receiver(p.alpha_sq, p.m);
    let mut cells = p.inputs(cfg);
    if cfg.mode == Mode::Enumerate {
        let r = enumerate_error_probability(
            &receiver.inference_model()?,
            Some(&receiver.truth_model()?),
        )?;
        cells.push(Cell::Real(r.error_prob));
        cells.extend(r.per_symbol_error.map(Cell::Real));
        cells.push(Cell::Real(sql_heterodyne(p.alpha_sq)));
        cells.push(Cell::Real(sql_lossy(p.alpha_sq, eta_total)));
        cells.push(Cell::Real(helstrom_qpsk(p.alpha_sq)?));
    } else {
        let r = estimate_error(&receiver, cfg.trials, &RngSpec::new(cfg.seed))?;
        cells.push(Cell::Count(r.trials));
        cells.push(Cell::Real(r.error_prob));
        cells.push(Cell::Real(r.stderr));
        cells.extend(r.per_symbol_error.map(Cell::Real));
        cells.push(Cell::Real(sql_heterodyne(p.alpha_sq)));
        cells.push(Cell::Real(sql_lossy(p.alpha_sq, eta_total)));
    }
    Ok(cells)
}

/// Evaluates every grid point in order. The first failing point aborts the
/// run with its coordinates attached.
pub fn run(config: &RunConfig) -> Result<ResultTable> {
    let mut cfg = config.clone();
    cfg.resolve();
    cfg.validate()?;
    let mut rows = Vec::new();
    for p in points(&cfg) {
        let r = row(&cfg, &p).map_err(|e| Error::AtGridPoint {
            context: p.context(),
            source: Box::new(e),
        })?;
        rows.push(r);
    }
    Ok(ResultTable {
        mode: cfg.mode,
        seed: cfg.seed,
        config: cfg.echo(),
        columns: columns(cfg.mode),
        rows,
    })
}
