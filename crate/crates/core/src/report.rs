//! Tabular and vector outputs: per-cell impact tables (CSV) and impacted
//! cell polygons (GeoJSON).
//!
//! Impact table columns, one row per cell in row-major order:
//!
//! ```text
//! row,col,change_count,before_count,dii,impacted,tau,cell_size,image_width,image_height
//! ```
//!
//! `change_count`, `before_count` and `dii` may be blank in hand-made
//! tables; the reader only needs `row`, `col`, `impacted` and the grid
//! geometry columns.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::georef::WorldFile;
use crate::impact::{make_grid, CellCounts, DiiGrid, GridSpec, ImpactMap};
use crate::metrics::EvalReport;

#[derive(Debug, Serialize, Deserialize)]
struct ImpactRow {
    row: usize,
    col: usize,
    change_count: Option<u64>,
    before_count: Option<u64>,
    dii: Option<f64>,
    impacted: bool,
    tau: Option<f64>,
    cell_size: usize,
    image_width: usize,
    image_height: usize,
}

fn write_rows<W: io::Write>(
    out: W,
    impact: &ImpactMap,
    counts: Option<(&[u64], &[u64])>,
    dii: Option<&[f64]>,
) -> Result<()> {
    let spec = impact.spec();
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for (i, (row, col)) in spec.cells().enumerate() {
        writer
            .serialize(ImpactRow {
                row,
                col,
                change_count: counts.map(|(c, _)| c[i]),
                before_count: counts.map(|(_, b)| b[i]),
                dii: dii.map(|d| d[i]),
                impacted: impact.impacted()[i],
                tau: Some(impact.tau()),
                cell_size: spec.cell_size(),
                image_width: spec.width(),
                image_height: spec.height(),
            })
            .map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))
}

fn csv_error(e: csv::Error) -> Error {
    Error::io("<csv>", io::Error::other(e))
}

/// Writes the index table for a predicted grid.
pub fn write_dii_csv<W: io::Write>(out: W, grid: &DiiGrid, impact: &ImpactMap) -> Result<()> {
    check_same_grid(grid.spec(), impact.spec())?;
    write_rows(
        out,
        impact,
        Some((grid.change_count(), grid.before_count())),
        Some(grid.dii()),
    )
}

/// Writes an impact table whose index may be undefined (e.g. ground truth
/// derived with the any-pixel rule over an empty reference).
pub fn write_impact_csv<W: io::Write>(
    out: W,
    impact: &ImpactMap,
    counts: &CellCounts,
    dii: Option<&[f64]>,
) -> Result<()> {
    write_rows(out, impact, Some((&counts.change_count, &counts.before_count)), dii)
}

fn check_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch {
            left: a.to_string(),
            right: b.to_string(),
        });
    }
    Ok(())
}

/// Reads an impact table back into an [`ImpactMap`].
pub fn read_impact_csv(path: impl AsRef<Path>) -> Result<ImpactMap> {
    let path = path.as_ref();
    let bad = |reason: String| Error::ImpactTable {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let rows: Vec<ImpactRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    let first = rows.first().ok_or_else(|| bad("no rows".into()))?;
    let spec = make_grid(first.image_width, first.image_height, first.cell_size).map_err(|e| bad(e.to_string()))?;
    let tau = first.tau.unwrap_or(f64::NAN);
    let mut impacted = vec![None; spec.num_cells()];
    for r in &rows {
        if (r.cell_size, r.image_width, r.image_height) != (spec.cell_size(), spec.width(), spec.height()) {
            return Err(bad(format!("row ({}, {}) disagrees on grid geometry", r.row, r.col)));
        }
        if r.row >= spec.rows() || r.col >= spec.cols() {
            return Err(bad(format!("cell ({}, {}) outside the grid", r.row, r.col)));
        }
        let slot = &mut impacted[spec.index(r.row, r.col)];
        if slot.replace(r.impacted).is_some() {
            return Err(bad(format!("cell ({}, {}) listed twice", r.row, r.col)));
        }
    }
    let impacted = impacted
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| bad(format!("cell ({}, {}) missing", i / spec.cols(), i % spec.cols()))))
        .collect::<Result<Vec<_>>>()?;
    ImpactMap::new(spec, impacted, tau)
}

#[derive(Serialize)]
struct MetricsRow {
    setting: String,
    precision: f64,
    recall: f64,
    f1: f64,
    iou: f64,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
}

/// One row per report: `setting,precision,recall,f1,iou,tp,fp,fn,tn`.
/// Scores are written in shortest round-trip form.
pub fn write_metrics_csv<W: io::Write>(out: W, reports: &[EvalReport]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in reports {
        writer
            .serialize(MetricsRow {
                setting: r.setting.to_string(),
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
                iou: r.iou,
                tp: r.counts.tp,
                fp: r.counts.fp,
                fn_: r.counts.fn_,
                tn: r.counts.tn,
            })
            .map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))
}

/// GeoJSON `FeatureCollection` with one polygon per impacted cell.
///
/// Coordinates are pixel-edge positions (`x` right, `y` down) unless a
/// world file is given, in which case they are map coordinates. Rings are
/// counter-clockwise in the output coordinate plane.
pub fn impact_geojson(grid: &DiiGrid, impact: &ImpactMap, world: Option<&WorldFile>) -> Result<Value> {
    check_same_grid(grid.spec(), impact.spec())?;
    let spec = grid.spec();
    let project = |u: usize, v: usize| -> [f64; 2] {
        match world {
            Some(wf) => {
                let (x, y) = wf.edge_to_map(u as f64, v as f64);
                [x, y]
            }
            None => [u as f64, v as f64],
        }
    };
    let mut features = Vec::new();
    for (i, (row, col)) in spec.cells().enumerate() {
        if !impact.impacted()[i] {
            continue;
        }
        let b = spec.bounds(row, col);
        let (x1, y1) = (b.x0 + b.width, b.y0 + b.height);
        let mut ring = vec![project(b.x0, b.y0), project(x1, b.y0), project(x1, y1), project(b.x0, y1)];
        if signed_area(&ring) < 0.0 {
            ring.reverse();
        }
        ring.push(ring[0]);
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Polygon", "coordinates": [ring] },
            "properties": {
                "row": row,
                "col": col,
                "change_count": grid.change_count()[i],
                "before_count": grid.before_count()[i],
                "dii": grid.dii()[i],
                "partial": spec.is_partial(row, col),
            },
        }));
    }
    Ok(json!({
        "type": "FeatureCollection",
        "coordinate_space": if world.is_some() { "map" } else { "pixel" },
        "grid": {
            "cell_size": spec.cell_size(),
            "rows": spec.rows(),
            "cols": spec.cols(),
            "image_width": spec.width(),
            "image_height": spec.height(),
            "tau": impact.tau(),
            "region_mean": grid.region_mean(),
            "has_partial_cells": spec.has_partial_cells(),
        },
        "features": features,
    }))
}

fn signed_area(ring: &[[f64; 2]]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (p, q) = (ring[i], ring[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}
