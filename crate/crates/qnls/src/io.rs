//! Field snapshots and time-series files.
//!
//! Binary snapshots are little-endian: `n`, `l`, `M` as `u64`, `r_max` as
//! `f64`, then for each component `M` pairs `(Re u, Im u)` of `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use qnls_core::{Complex64, DiagnosticsRecord, RadialField, RadialGrid};

use crate::json::fmt_f64;

pub fn write_snapshot_csv(path: &Path, field: &RadialField) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["r".to_string()];
    for k in 1..=field.components() {
        header.push(format!("re_u{k}"));
        header.push(format!("im_u{k}"));
    }
    w.write_record(&header)?;
    for (i, r) in field.grid().nodes().iter().enumerate() {
        let mut row = vec![fmt_f64(*r)];
        for c in field.data() {
            row.push(fmt_f64(c[i].re));
            row.push(fmt_f64(c[i].im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV snapshot back onto a grid of dimension `n`; the nodes must be
/// those of a cell-centred grid.
pub fn read_snapshot_csv(path: &Path, n: usize) -> Result<RadialField> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let width = rdr.headers()?.len();
    ensure!(width >= 3 && width % 2 == 1, "snapshot header must be r followed by re/im pairs");
    let l = (width - 1) / 2;
    let mut nodes = Vec::new();
    let mut data = vec![Vec::new(); l];
    for rec in rdr.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec.iter().map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>()?;
        nodes.push(vals[0]);
        for k in 0..l {
            data[k].push(Complex64::new(vals[1 + 2 * k], vals[2 + 2 * k]));
        }
    }
    ensure!(nodes.len() >= 2, "snapshot has fewer than two rows");
    let h = nodes[1] - nodes[0];
    let m = nodes.len();
    let grid = RadialGrid::new(n, m, h * m as f64)?;
    let off = grid.nodes().iter().zip(&nodes).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(off <= 1e-9 * grid.r_max(), "snapshot nodes are not a cell-centred grid");
    Ok(RadialField::from_components(&grid, data)?)
}

pub fn write_snapshot_bin(path: &Path, field: &RadialField) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let g = field.grid();
    for v in [g.dim() as u64, field.components() as u64, g.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&g.r_max().to_le_bytes())?;
    for c in field.data() {
        for z in c {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot_bin(path: &Path) -> Result<RadialField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut r = BufReader::new(file);
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut word).context("truncated snapshot")?;
        Ok(word)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let l = u64::from_le_bytes(next(&mut r)?) as usize;
    let m = u64::from_le_bytes(next(&mut r)?) as usize;
    let r_max = f64::from_le_bytes(next(&mut r)?);
    if l == 0 || l > 64 || m == 0 || m > (1 << 28) {
        bail!("implausible snapshot header (l = {l}, M = {m})");
    }
    let grid = RadialGrid::new(n, m, r_max)?;
    let mut data = Vec::with_capacity(l);
    for _ in 0..l {
        let mut c = Vec::with_capacity(m);
        for _ in 0..m {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            c.push(Complex64::new(re, im));
        }
        data.push(c);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    ensure!(rest.is_empty(), "trailing bytes after snapshot data");
    Ok(RadialField::from_components(&grid, data)?)
}

/// Picks the format from the extension (`.csv` or anything else for binary).
pub fn read_snapshot(path: &Path, n: usize) -> Result<RadialField> {
    let field = if path.extension().is_some_and(|e| e == "csv") {
        read_snapshot_csv(path, n)?
    } else {
        read_snapshot_bin(path)?
    };
    ensure!(
        field.grid().dim() == n,
        "snapshot lives in dimension {}, run asks for {n}",
        field.grid().dim()
    );
    Ok(field)
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> Vec<String> {
    let j = r.j.map(fmt_f64).unwrap_or_default();
    vec![
        fmt_f64(r.t),
        fmt_f64(r.q),
        fmt_f64(r.e),
        fmt_f64(r.k),
        fmt_f64(r.p),
        fmt_f64(r.l),
        fmt_f64(r.qfunc),
        fmt_f64(r.i),
        fmt_f64(r.pohozaev),
        j,
        fmt_f64(r.ecrit),
    ]
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(DiagnosticsRecord::CSV_HEADER.split(','))?;
    for r in records {
        w.write_record(diagnostics_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Two-column CSV with the given header.
pub fn write_pairs_csv(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([fmt_f64(*a), fmt_f64(*b)])?;
    }
    w.flush()?;
    Ok(())
}

/// Petviashvili stabilizer `M` per iteration.
pub fn write_history_csv(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["iteration", "M"])?;
    for (i, m) in history.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(*m)])?;
    }
    w.flush()?;
    Ok(())
}
