//! Gridded Disaster Impact Index.
//!
//! The region is tiled into `n × n` cells (edge cells may be partial). For
//! each cell the index is the number of lost feature pixels in that cell
//! divided by the mean number of pre-event feature pixels per cell over the
//! whole region:
//!
//! ```text
//! dii[c] = change_count[c] / (Σ_k before_count[k] / N)
//! ```
//!
//! where `N` is the total number of cells. A cell is impacted when its index
//! reaches the threshold `tau` (inclusive).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::change::ChangeMask;
use crate::error::{Error, Result};
use crate::raster::BinaryMask;

pub const DEFAULT_CELL_SIZE: usize = 256;
pub const DEFAULT_TAU: f64 = 0.01;

/// Tiling of a `width × height` raster into square cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    cell_size: usize,
    width: usize,
    height: usize,
    rows: usize,
    cols: usize,
}

/// Pixel extent of one cell: columns `x0..x0 + width`, rows `y0..y0 + height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBounds {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Total number of cells, partial ones included.
    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major index of the cell at `(row, col)`.
    pub fn index(&self, row: usize, col: usize) -> usize {
        assert!(row < self.rows && col < self.cols, "cell ({row}, {col}) out of range");
        row * self.cols + col
    }

    pub fn cell_of_pixel(&self, x: usize, y: usize) -> usize {
        self.index(y / self.cell_size, x / self.cell_size)
    }

    pub fn bounds(&self, row: usize, col: usize) -> CellBounds {
        let x0 = col * self.cell_size;
        let y0 = row * self.cell_size;
        CellBounds {
            x0,
            y0,
            width: self.cell_size.min(self.width - x0),
            height: self.cell_size.min(self.height - y0),
        }
    }

    pub fn is_partial(&self, row: usize, col: usize) -> bool {
        let b = self.bounds(row, col);
        b.width < self.cell_size || b.height < self.cell_size
    }

    pub fn has_partial_cells(&self) -> bool {
        !self.width.is_multiple_of(self.cell_size) || !self.height.is_multiple_of(self.cell_size)
    }

    /// `(row, col)` of every cell in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }

    fn check_mask(&self, mask: &BinaryMask) -> Result<()> {
        if mask.dimensions() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                left: (self.width, self.height),
                right: mask.dimensions(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} px in {}x{} cells of {} px",
            self.width, self.height, self.cols, self.rows, self.cell_size
        )
    }
}

pub fn make_grid(width: usize, height: usize, cell_size: usize) -> Result<GridSpec> {
    if cell_size == 0 {
        return Err(Error::invalid("grid_size", "cell size must be at least 1"));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    Ok(GridSpec {
        cell_size,
        width,
        height,
        rows: height.div_ceil(cell_size),
        cols: width.div_ceil(cell_size),
    })
}

/// Per-cell feature tallies of a change mask and its reference mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    pub change_count: Vec<u64>,
    pub before_count: Vec<u64>,
}

/// Integer tallies per cell. Each band of cell rows is counted
/// independently, so the result is independent of scheduling.
pub fn count_cells(change: &ChangeMask, before: &BinaryMask, spec: &GridSpec) -> Result<CellCounts> {
    spec.check_mask(change.mask())?;
    spec.check_mask(before)?;
    let n = spec.cell_size;
    let bands: Vec<(Vec<u64>, Vec<u64>)> = (0..spec.rows)
        .into_par_iter()
        .map(|band| {
            let mut changed = vec![0u64; spec.cols];
            let mut reference = vec![0u64; spec.cols];
            for y in band * n..((band + 1) * n).min(spec.height) {
                let c_row = change.mask().row(y);
                let b_row = before.row(y);
                for x in 0..spec.width {
                    let col = x / n;
                    changed[col] += u64::from(c_row[x]);
                    reference[col] += u64::from(b_row[x]);
                }
            }
            (changed, reference)
        })
        .collect();
    let (change_count, before_count) = bands.into_iter().fold(
        (Vec::with_capacity(spec.num_cells()), Vec::with_capacity(spec.num_cells())),
        |(mut c, mut b), (bc, bb)| {
            c.extend(bc);
            b.extend(bb);
            (c, b)
        },
    );
    Ok(CellCounts {
        change_count,
        before_count,
    })
}

/// Per-cell index values with the exact counts they derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct DiiGrid {
    spec: GridSpec,
    change_count: Vec<u64>,
    before_count: Vec<u64>,
    total_before: u64,
    region_mean: f64,
    dii: Vec<f64>,
}

impl DiiGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn change_count(&self) -> &[u64] {
        &self.change_count
    }

    pub fn before_count(&self) -> &[u64] {
        &self.before_count
    }

    pub fn total_before(&self) -> u64 {
        self.total_before
    }

    pub fn total_change(&self) -> u64 {
        self.change_count.iter().sum()
    }

    /// Mean pre-event feature pixels per cell (the index denominator).
    pub fn region_mean(&self) -> f64 {
        self.region_mean
    }

    pub fn dii(&self) -> &[f64] {
        &self.dii
    }

    /// Exact value of `dii[cell]` as `(numerator, denominator)`:
    /// `change_count * N / total_before`.
    pub fn dii_ratio(&self, cell: usize) -> (u128, u128) {
        (
            u128::from(self.change_count[cell]) * self.spec.num_cells() as u128,
            u128::from(self.total_before),
        )
    }
}

pub fn compute_dii(change: &ChangeMask, before: &BinaryMask, spec: &GridSpec) -> Result<DiiGrid> {
    let CellCounts {
        change_count,
        before_count,
    } = count_cells(change, before, spec)?;
    let total_before: u64 = before_count.iter().sum();
    if total_before == 0 {
        return Err(Error::EmptyReference);
    }
    let cells = spec.num_cells() as f64;
    let region_mean = total_before as f64 / cells;
    // one rounding from the exact rational change * N / total
    let dii = change_count
        .iter()
        .map(|&c| (c as f64 * cells) / total_before as f64)
        .collect();
    Ok(DiiGrid {
        spec: *spec,
        change_count,
        before_count,
        total_before,
        region_mean,
        dii,
    })
}

/// Per-cell impacted verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactMap {
    spec: GridSpec,
    impacted: Vec<bool>,
    tau: f64,
}

impl ImpactMap {
    pub fn new(spec: GridSpec, impacted: Vec<bool>, tau: f64) -> Result<Self> {
        if impacted.len() != spec.num_cells() {
            return Err(Error::LengthMismatch {
                left: impacted.len(),
                right: spec.num_cells(),
            });
        }
        Ok(Self { spec, impacted, tau })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn impacted(&self) -> &[bool] {
        &self.impacted
    }

    pub fn is_impacted(&self, row: usize, col: usize) -> bool {
        self.impacted[self.spec.index(row, col)]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn impacted_count(&self) -> usize {
        self.impacted.iter().filter(|&&i| i).count()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid("tau", format!("must be a finite value >= 0, got {tau}")));
    }
    Ok(())
}

pub fn threshold_dii(grid: &DiiGrid, tau: f64) -> Result<ImpactMap> {
    check_tau(tau)?;
    Ok(ImpactMap {
        spec: grid.spec,
        impacted: grid.dii.iter().map(|&d| d >= tau).collect(),
        tau,
    })
}

/// How labelled change is turned into per-cell ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthRule {
    /// Same index and threshold as the prediction pathway.
    #[default]
    DiiThreshold,
    /// Any labelled change pixel marks the cell.
    AnyPixel,
}

impl FromStr for TruthRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dii-threshold" => Ok(TruthRule::DiiThreshold),
            "any-pixel" => Ok(TruthRule::AnyPixel),
            other => Err(format!("truth rule must be dii-threshold or any-pixel, got {other:?}")),
        }
    }
}

impl fmt::Display for TruthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthRule::DiiThreshold => "dii-threshold",
            TruthRule::AnyPixel => "any-pixel",
        })
    }
}

pub fn grid_truth(
    label_change: &ChangeMask,
    before_labels: &BinaryMask,
    spec: &GridSpec,
    rule: TruthRule,
    tau: f64,
) -> Result<ImpactMap> {
    check_tau(tau)?;
    match rule {
        TruthRule::DiiThreshold => threshold_dii(&compute_dii(label_change, before_labels, spec)?, tau),
        TruthRule::AnyPixel => {
            let counts = count_cells(label_change, before_labels, spec)?;
            Ok(ImpactMap {
                spec: *spec,
                impacted: counts.change_count.iter().map(|&c| c > 0).collect(),
                tau,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 8x4 raster, two 4x4 cells. Cell A (left) has 8 reference pixels and 3
    /// changed, cell B (right) has 4 reference pixels and none changed.
    fn hand_fixture() -> (ChangeMask, BinaryMask, GridSpec) {
        let before = BinaryMask::from_fn(8, 4, |x, y| if x < 4 { y < 2 } else { y == 0 }).unwrap();
        let change = BinaryMask::from_fn(8, 4, |x, y| y == 0 && x < 3).unwrap();
        let spec = make_grid(8, 4, 4).unwrap();
        (ChangeMask::from_mask(change), before, spec)
    }

    #[test]
    fn grid_dimensions() {
        let g = make_grid(512, 512, 256).unwrap();
        assert_eq!((g.cols(), g.rows()), (2, 2));
        assert!(!g.has_partial_cells());

        let g = make_grid(600, 300, 256).unwrap();
        assert_eq!((g.cols(), g.rows()), (3, 2));
        assert_eq!(g.bounds(0, 2).width, 88);
        assert_eq!(g.bounds(1, 0).height, 44);
        assert!(g.is_partial(1, 2) && g.is_partial(0, 2) && !g.is_partial(0, 0));

        let g = make_grid(100, 100, 256).unwrap();
        assert_eq!((g.cols(), g.rows()), (1, 1));
        assert!(g.is_partial(0, 0));

        assert!(make_grid(10, 10, 0).is_err());
    }

    #[test]
    fn every_pixel_in_exactly_one_cell() {
        let g = make_grid(37, 23, 8).unwrap();
        let mut hits = vec![0usize; g.num_cells()];
        for (r, c) in g.cells() {
            let b = g.bounds(r, c);
            for y in b.y0..b.y0 + b.height {
                for x in b.x0..b.x0 + b.width {
                    assert_eq!(g.cell_of_pixel(x, y), g.index(r, c));
                    hits[g.index(r, c)] += 1;
                }
            }
        }
        assert_eq!(hits.iter().sum::<usize>(), 37 * 23);
    }

    #[test]
    fn hand_fixture_values() {
        let (change, before, spec) = hand_fixture();
        let grid = compute_dii(&change, &before, &spec).unwrap();
        assert_eq!(grid.before_count(), &[8, 4]);
        assert_eq!(grid.change_count(), &[3, 0]);
        assert_eq!(grid.region_mean(), 6.0);
        assert_eq!(grid.dii(), &[0.5, 0.0]);
        assert_eq!(grid.dii_ratio(0), (6, 12));

        let map = threshold_dii(&grid, DEFAULT_TAU).unwrap();
        assert_eq!(map.impacted(), &[true, false]);
    }

    #[test]
    fn empty_change_gives_zero_index() {
        let (_, before, spec) = hand_fixture();
        let none = ChangeMask::from_mask(BinaryMask::filled(8, 4, false).unwrap());
        let grid = compute_dii(&none, &before, &spec).unwrap();
        assert!(grid.dii().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn empty_reference_is_an_error() {
        let (change, _, spec) = hand_fixture();
        let empty = BinaryMask::filled(8, 4, false).unwrap();
        assert!(matches!(compute_dii(&change, &empty, &spec), Err(Error::EmptyReference)));
    }

    #[test]
    fn threshold_is_inclusive() {
        let (change, before, spec) = hand_fixture();
        let grid = compute_dii(&change, &before, &spec).unwrap();
        assert_eq!(threshold_dii(&grid, 0.5).unwrap().impacted(), &[true, false]);
        assert_eq!(threshold_dii(&grid, 0.0).unwrap().impacted(), &[true, true]);
        assert_eq!(threshold_dii(&grid, 1.0).unwrap().impacted(), &[false, false]);
        assert!(threshold_dii(&grid, -0.1).is_err());
        assert!(threshold_dii(&grid, f64::NAN).is_err());
    }

    #[test]
    fn truth_rules() {
        let (change, before, spec) = hand_fixture();
        let t = grid_truth(&change, &before, &spec, TruthRule::DiiThreshold, 0.01).unwrap();
        assert_eq!(t.impacted(), &[true, false]);

        let one = ChangeMask::from_mask(BinaryMask::from_fn(8, 4, |x, y| x == 6 && y == 3).unwrap());
        let t = grid_truth(&one, &before, &spec, TruthRule::AnyPixel, 0.01).unwrap();
        assert_eq!(t.impacted(), &[false, true]);

        let empty = BinaryMask::filled(8, 4, false).unwrap();
        assert!(grid_truth(&one, &empty, &spec, TruthRule::DiiThreshold, 0.01).is_err());
        assert!(grid_truth(&one, &empty, &spec, TruthRule::AnyPixel, 0.01).is_ok());
    }

    #[test]
    fn truth_matches_prediction_for_identical_labels() {
        let (change, before, spec) = hand_fixture();
        let pred = threshold_dii(&compute_dii(&change, &before, &spec).unwrap(), 0.01).unwrap();
        let truth = grid_truth(&change, &before, &spec, TruthRule::DiiThreshold, 0.01).unwrap();
        assert_eq!(pred, truth);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let (change, before, _) = hand_fixture();
        let spec = make_grid(8, 8, 4).unwrap();
        assert!(matches!(compute_dii(&change, &before, &spec), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("any-pixel".parse::<TruthRule>().unwrap(), TruthRule::AnyPixel);
        assert_eq!("dii-threshold".parse::<TruthRule>().unwrap(), TruthRule::DiiThreshold);
        assert!("majority".parse::<TruthRule>().is_err());
    }
}
