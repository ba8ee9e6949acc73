//! File formats: CSV tables, binary PGM images, plain-text run manifests
//! and the laminate-tree text form.
//!
//! CSV uses a header row, comma separators, LF line endings and 17
//! significant digits so that doubles round-trip. PGM is binary `P5` with
//! maxval 255; the affine value mapping is reported back to the caller for
//! the sidecar manifest. Manifests are UTF-8 `key: value` lines written
//! atomically (temp file + rename).

use crate::error::Result;
use crate::field::Field2;
use crate::lamination::{LaminateNode, LaminateTree};
use crate::random_walk::Lattice;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV table: `header` row then `rows`, each formatted with
/// [`fmt_f64`].
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// CSV dump of a scalar field: indices, coordinates, value.
pub fn field_csv_rows(field: &Field2<f64>) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    let mut rows = Vec::with_capacity(field.grid.len());
    for j in 0..field.grid.ny {
        for i in 0..field.grid.nx {
            rows.push(vec![
                i as f64,
                j as f64,
                field.grid.x(i),
                field.grid.y(j),
                *field.at(i, j),
            ]);
        }
    }
    (vec!["i", "j", "x1", "x2", "value"], rows)
}

/// Affine mapping used to rescale a scalar field into `[0, 255]`.
#[derive(Debug, Clone, Copy)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

/// Writes a binary `P5` PGM of a scalar field, rescaled to `[0, 255]`;
/// returns the recorded scale. Rows are written top to bottom (largest
/// `x2` first).
pub fn write_pgm(path: &Path, field: &Field2<f64>) -> Result<PgmScale> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &field.data {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = Vec::with_capacity(field.grid.len() + 32);
    bytes.extend_from_slice(
        format!("P5\n{} {}\n255\n", field.grid.nx, field.grid.ny).as_bytes(),
    );
    for j in (0..field.grid.ny).rev() {
        for i in 0..field.grid.nx {
            let v = (*field.at(i, j) - lo) / span;
            bytes.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(PgmScale { min: lo, max: hi })
}

/// PGM of a lattice (`-1 → 0`, `+1 → 255`).
pub fn write_lattice_pgm(path: &Path, lat: &Lattice) -> Result<()> {
    let mut bytes = Vec::with_capacity(lat.n_cols * lat.n_rows + 32);
    bytes.extend_from_slice(format!("P5\n{} {}\n255\n", lat.n_cols, lat.n_rows).as_bytes());
    for row in (0..lat.n_rows).rev() {
        for col in 0..lat.n_cols {
            bytes.push(if lat.values[row * lat.n_cols + col] > 0 {
                255
            } else {
                0
            });
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Run manifest: ordered `key: value` lines, written atomically.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.render())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn write_node(out: &mut String, node: &LaminateNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let s = node.state;
    let _ = writeln!(
        out,
        "{pad}node weight={} theta={} u=({}, {}) m=({}, {})",
        fmt_f64(node.weight),
        fmt_f64(s.theta),
        fmt_f64(s.u.x),
        fmt_f64(s.u.y),
        fmt_f64(s.m.x),
        fmt_f64(s.m.y)
    );
    if let Some(split) = &node.split {
        let d = split.direction;
        let _ = writeln!(
            out,
            "{pad}split direction theta={} u=({}, {}) m=({}, {}) lam_minus={} lam_plus={}",
            fmt_f64(d.theta),
            fmt_f64(d.u.x),
            fmt_f64(d.u.y),
            fmt_f64(d.m.x),
            fmt_f64(d.m.y),
            fmt_f64(split.lam_minus),
            fmt_f64(split.lam_plus)
        );
        for child in &split.children {
            write_node(out, child, depth + 1);
        }
    }
}

/// Plain-text form of a laminate tree (nested nodes with weights), stable
/// for golden-file comparison.
pub fn laminate_tree_text(tree: &LaminateTree) -> String {
    let mut out = String::from("laminate-tree\n");
    write_node(&mut out, &tree.root, 0);
    out
}
