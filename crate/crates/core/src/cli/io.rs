//! Time-series CSV, field snapshots and run metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::functionals::{diag, FunctionalSample};
use crate::grid::{Grid, SpeciesFields};

pub const CSV_HEADER: &str = "t,E,E_rel,D,M1,M2,l1_a,l1_b,l1_c,dev_A2,dev_B2,dev_C2,abc_defect,ckp_lhs,b_l32,a_l32,b_lN2,c_l3,int_a2ac,int_b2bc";
pub const CSV_COLUMNS: usize = 20;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SNAPSHOT_FILE: &str = "final_fields.snap";
pub const META_FILE: &str = "run_meta.txt";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sample_row(s: &FunctionalSample) -> Result<String> {
    let mut vals = vec![
        s.t,
        s.entropy,
        s.rel_entropy,
        s.dissipation,
        s.m1,
        s.m2,
        s.l1_dist[0],
        s.l1_dist[1],
        s.l1_dist[2],
        s.dev_sq[0],
        s.dev_sq[1],
        s.dev_sq[2],
        s.abc_defect,
        s.ckp_lhs,
    ];
    for label in diag::ALL {
        vals.push(s.diag(label)?);
    }
    Ok(vals.into_iter().map(fmt17).collect::<Vec<_>>().join(","))
}

pub fn timeseries_text(samples: &[FunctionalSample]) -> Result<String> {
    let mut out = String::with_capacity(samples.len() * 480);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&sample_row(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_timeseries(path: &Path, samples: &[FunctionalSample]) -> Result<()> {
    fs::write(path, timeseries_text(samples)?).map_err(|e| Error::io(path, e))
}

pub fn parse_timeseries(text: &str) -> Result<Vec<FunctionalSample>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header `{h}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != CSV_COLUMNS {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {CSV_COLUMNS} columns, found {}", cols.len()),
            });
        }
        let v = cols
            .iter()
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("malformed number `{c}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let diag_norms: BTreeMap<String, f64> = diag::ALL
            .iter()
            .zip(&v[14..])
            .map(|(k, x)| (k.to_string(), *x))
            .collect();
        out.push(FunctionalSample {
            t: v[0],
            entropy: v[1],
            rel_entropy: v[2],
            dissipation: v[3],
            m1: v[4],
            m2: v[5],
            l1_dist: [v[6], v[7], v[8]],
            dev_sq: [v[9], v[10], v[11]],
            abc_defect: v[12],
            ckp_lhs: v[13],
            diag_norms,
        });
    }
    Ok(out)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<FunctionalSample>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_timeseries(&text)
}

/// Grid shape and fields from a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub cells: Vec<usize>,
    pub lengths: Vec<f64>,
    pub fields: SpeciesFields,
}

/// Header `dim cells... lengths...`, then `a b c` per cell in storage
/// (row-major) order.
pub fn snapshot_text(grid: &Grid, fields: &SpeciesFields) -> String {
    let mut out = String::with_capacity(fields.len() * 72 + 64);
    let mut head = vec![grid.dimension().to_string()];
    head.extend(grid.cells().iter().map(|n| n.to_string()));
    head.extend(grid.lengths().iter().map(|&l| fmt17(l)));
    out.push_str(&head.join(" "));
    out.push('\n');
    for i in 0..fields.len() {
        let _ = writeln!(out, "{} {} {}", fmt17(fields.a[i]), fmt17(fields.b[i]), fmt17(fields.c[i]));
    }
    out
}

pub fn write_snapshot(path: &Path, grid: &Grid, fields: &SpeciesFields) -> Result<()> {
    fs::write(path, snapshot_text(grid, fields)).map_err(|e| Error::io(path, e))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut lines = text.lines();
    let head: Vec<&str> = lines
        .next()
        .ok_or_else(|| perr(1, "empty snapshot".into()))?
        .split_whitespace()
        .collect();
    let dim: usize = head
        .first()
        .and_then(|d| d.parse().ok())
        .filter(|d| (1..=3).contains(d))
        .ok_or_else(|| perr(1, "bad dimension".into()))?;
    if head.len() != 1 + 2 * dim {
        return Err(perr(1, format!("header needs {} tokens", 1 + 2 * dim)));
    }
    let cells = head[1..=dim]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| perr(1, format!("bad cell count `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let lengths = head[dim + 1..]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| perr(1, format!("bad length `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let n: usize = cells.iter().product();
    let (mut a, mut b, mut c) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(line_no, format!("bad value `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 3 {
            return Err(perr(line_no, "expected `a b c`".into()));
        }
        a.push(v[0]);
        b.push(v[1]);
        c.push(v[2]);
    }
    if a.len() != n {
        return Err(perr(n + 1, format!("expected {n} cells, found {}", a.len())));
    }
    Ok(Snapshot {
        cells,
        lengths,
        fields: SpeciesFields::new(a, b, c)?,
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text)
}
