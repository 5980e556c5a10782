//! ESRI world files: a six-line affine pixel → map transform.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Affine transform read from a world file.
///
/// The file lists `A, D, B, E, C, F`, one per line, mapping the *centre* of
/// pixel `(col, row)` to `x = A·col + B·row + C`, `y = D·col + E·row + F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldFile {
    pub a: f64,
    pub d: f64,
    pub b: f64,
    pub e: f64,
    pub c: f64,
    pub f: f64,
}

impl WorldFile {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let values: Vec<f64> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<f64>().map_err(|_| format!("not a number: {l:?}")))
            .collect::<std::result::Result<_, _>>()?;
        if values.len() != 6 {
            return Err(format!("expected 6 values, found {}", values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        let wf = WorldFile {
            a: values[0],
            d: values[1],
            b: values[2],
            e: values[3],
            c: values[4],
            f: values[5],
        };
        if wf.a * wf.e - wf.b * wf.d == 0.0 {
            return Err("degenerate transform".into());
        }
        Ok(wf)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|reason| Error::WorldFile {
            path: path.to_path_buf(),
            reason,
        })
    }

    /// Map coordinates of a pixel-edge position: `(0, 0)` is the outer
    /// corner of the top-left pixel.
    pub fn edge_to_map(&self, u: f64, v: f64) -> (f64, f64) {
        let (col, row) = (u - 0.5, v - 0.5);
        (
            self.a * col + self.b * row + self.c,
            self.d * col + self.e * row + self.f,
        )
    }
}

/// `raster.wld` next to `raster.pgm`.
pub fn sidecar_path(raster: &Path) -> PathBuf {
    raster.with_extension("wld")
}

/// Loads the world file next to `raster` if one exists.
pub fn find_sidecar(raster: &Path) -> Result<Option<WorldFile>> {
    let path = sidecar_path(raster);
    if path.is_file() {
        WorldFile::load(&path).map(Some)
    } else {
        Ok(None)
    }
}
