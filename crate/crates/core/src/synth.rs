//! Deterministic synthetic pre/post mask pairs with planted damage.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). The 256-bit
//! key is the little-endian bytes of `seed` followed by 24 zero bytes, and
//! every generation stage draws from its own stream id:
//!
//! | stream | stage |
//! |-------:|-------|
//! | 1 | feature geometry (road polylines / building rectangles) |
//! | 2 | speckle on the pre-event mask |
//! | 3 | per-pixel removal inside the footprint |
//! | 4 | speckle on the post-event mask |
//!
//! Uniform reals in `[0, 1)` are the top 53 bits of one `next_u64` scaled by
//! 2⁻⁵³. Integers in `[lo, hi]` are `lo + ⌊u · (hi − lo + 1) / 2⁶⁴⌋` for one
//! `next_u64` draw `u`. The pixel stages draw exactly one value per pixel in
//! row-major order whatever the probabilities are, so raising
//! `removal_prob` only ever adds removed pixels. No transcendental functions
//! are used, which keeps scenarios identical across platforms.
//!
//! # Construction
//!
//! 1. `before` is the union of the rasterised features, then speckle
//!    (each pixel toggled with probability `speckle_rate`).
//! 2. Each `before` pixel inside a footprint cell is removed with
//!    probability `removal_prob`; the removed pixels are `truth_change`.
//! 3. `after` is `before` minus the removed pixels, shifted by `jitter`
//!    with background fill, then speckled independently.
//! 4. `truth_impact` is [`grid_truth`] of `truth_change` against `before`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::change::ChangeMask;
use crate::error::{Error, Result};
use crate::impact::{grid_truth, make_grid, GridSpec, ImpactMap, TruthRule, DEFAULT_CELL_SIZE, DEFAULT_TAU};
use crate::raster::BinaryMask;

const STREAM_FEATURES: u64 = 1;
const STREAM_BEFORE_SPECKLE: u64 = 2;
const STREAM_REMOVAL: u64 = 3;
const STREAM_AFTER_SPECKLE: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    #[default]
    Roads,
    Buildings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub width: usize,
    pub height: usize,
    pub feature_kind: FeatureKind,
    /// Features per megapixel.
    pub feature_density: f64,
    /// Road thickness in pixels.
    pub road_width: u32,
    /// Inclusive `[min, max]` building side length in pixels.
    pub building_size: [u32; 2],
    /// Impacted cells as `[row, col]` on the `cell_size` grid.
    pub footprint_cells: Vec<[usize; 2]>,
    pub removal_prob: f64,
    pub speckle_rate: f64,
    /// Whole-pixel `[dx, dy]` shift of the post-event mask.
    pub jitter: [i64; 2],
    pub seed: u64,
    pub cell_size: usize,
    pub truth_rule: TruthRule,
    pub tau: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 1024,
            feature_kind: FeatureKind::Roads,
            feature_density: 20.0,
            road_width: 7,
            building_size: [40, 80],
            footprint_cells: Vec::new(),
            removal_prob: 1.0,
            speckle_rate: 0.0,
            jitter: [0, 0],
            seed: 0,
            cell_size: DEFAULT_CELL_SIZE,
            truth_rule: TruthRule::DiiThreshold,
            tau: DEFAULT_TAU,
        }
    }
}

impl ScenarioConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        make_grid(self.width, self.height, self.cell_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::invalid("width", "must be at least 1"));
        }
        if self.height == 0 {
            return Err(Error::invalid("height", "must be at least 1"));
        }
        if self.cell_size == 0 {
            return Err(Error::invalid("cell_size", "must be at least 1"));
        }
        for (name, p) in [("removal_prob", self.removal_prob), ("speckle_rate", self.speckle_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("probability must lie in [0, 1], got {p}")));
            }
        }
        if !(self.feature_density.is_finite() && self.feature_density >= 0.0) {
            return Err(Error::invalid(
                "feature_density",
                format!("must be finite and >= 0, got {}", self.feature_density),
            ));
        }
        if self.road_width == 0 {
            return Err(Error::invalid("road_width", "must be at least 1"));
        }
        let [lo, hi] = self.building_size;
        if lo == 0 || lo > hi {
            return Err(Error::invalid(
                "building_size",
                format!("need 1 <= min <= max, got [{lo}, {hi}]"),
            ));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid("tau", format!("must be finite and >= 0, got {}", self.tau)));
        }
        let grid = self.grid()?;
        for (i, &[row, col]) in self.footprint_cells.iter().enumerate() {
            if row >= grid.rows() || col >= grid.cols() {
                return Err(Error::invalid(
                    format!("footprint_cells[{i}]"),
                    format!("cell [{row}, {col}] outside the {}x{} grid", grid.rows(), grid.cols()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub before: BinaryMask,
    pub after: BinaryMask,
    pub truth_change: ChangeMask,
    pub truth_impact: ImpactMap,
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        Self(rng)
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn int_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u128 + 1;
        lo + ((u128::from(self.0.next_u64()) * span) >> 64) as i64
    }
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let (w, h) = (config.width, config.height);
    let grid = config.grid()?;

    let mut pixels = vec![false; w * h];
    let mut geometry = Stream::new(config.seed, STREAM_FEATURES);
    let count = (config.feature_density * (w as f64) * (h as f64) / 1e6).round() as usize;
    for _ in 0..count {
        match config.feature_kind {
            FeatureKind::Roads => draw_road(&mut pixels, w, h, config.road_width, &mut geometry),
            FeatureKind::Buildings => draw_building(&mut pixels, w, h, config.building_size, &mut geometry),
        }
    }
    speckle(&mut pixels, config.speckle_rate, config.seed, STREAM_BEFORE_SPECKLE);
    let before = BinaryMask::from_parts(w, h, pixels);

    let mut in_footprint = vec![false; grid.num_cells()];
    for &[row, col] in &config.footprint_cells {
        in_footprint[grid.index(row, col)] = true;
    }
    let mut removal = Stream::new(config.seed, STREAM_REMOVAL);
    let mut removed = vec![false; w * h];
    if config.removal_prob > 0.0 {
        for y in 0..h {
            for x in 0..w {
                let u = removal.unit();
                let i = y * w + x;
                removed[i] = before.pixels()[i] && in_footprint[grid.cell_of_pixel(x, y)] && u < config.removal_prob;
            }
        }
    }
    let removed = BinaryMask::from_parts(w, h, removed);

    let survived = before.and_not(&removed)?;
    let mut after = survived.shifted(config.jitter[0], config.jitter[1]).into_pixels();
    speckle(&mut after, config.speckle_rate, config.seed, STREAM_AFTER_SPECKLE);
    let after = BinaryMask::from_parts(w, h, after);

    let truth_change = ChangeMask::from_mask(removed);
    let truth_impact = grid_truth(&truth_change, &before, &grid, config.truth_rule, config.tau)?;
    Ok(Scenario {
        config: config.clone(),
        before,
        after,
        truth_change,
        truth_impact,
    })
}

fn speckle(pixels: &mut [bool], rate: f64, seed: u64, stream: u64) {
    if rate <= 0.0 {
        return;
    }
    let mut rng = Stream::new(seed, stream);
    for p in pixels.iter_mut() {
        if rng.unit() < rate {
            *p = !*p;
        }
    }
}

/// Random-walk polyline of 3 to 5 segments, stroked with a round brush.
fn draw_road(pixels: &mut [bool], w: usize, h: usize, width: u32, rng: &mut Stream) {
    let step = (w.max(h) as i64 / 3).max(1);
    let mut cur = (rng.int_inclusive(0, w as i64 - 1), rng.int_inclusive(0, h as i64 - 1));
    let segments = rng.int_inclusive(3, 5);
    for _ in 0..segments {
        let next = (
            cur.0 + rng.int_inclusive(-step, step),
            cur.1 + rng.int_inclusive(-step, step),
        );
        stroke_segment(pixels, w, h, cur, next, f64::from(width) / 2.0);
        cur = next;
    }
}

/// Sets every pixel whose centre lies within `half_width` of segment `a`–`b`.
fn stroke_segment(pixels: &mut [bool], w: usize, h: usize, a: (i64, i64), b: (i64, i64), half_width: f64) {
    let pad = half_width.ceil() as i64;
    let x_lo = (a.0.min(b.0) - pad).max(0);
    let x_hi = (a.0.max(b.0) + pad).min(w as i64 - 1);
    let y_lo = (a.1.min(b.1) - pad).max(0);
    let y_hi = (a.1.max(b.1) + pad).min(h as i64 - 1);
    if x_lo > x_hi || y_lo > y_hi {
        return;
    }
    let (dx, dy) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
    let len2 = dx * dx + dy * dy;
    let limit = half_width * half_width;
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let (px, py) = ((x - a.0) as f64, (y - a.1) as f64);
            let t = if len2 == 0.0 {
                0.0
            } else {
                ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
            };
            let (ex, ey) = (px - t * dx, py - t * dy);
            if ex * ex + ey * ey <= limit {
                pixels[y as usize * w + x as usize] = true;
            }
        }
    }
}

fn draw_building(pixels: &mut [bool], w: usize, h: usize, size: [u32; 2], rng: &mut Stream) {
    let bw = rng.int_inclusive(i64::from(size[0]), i64::from(size[1])) as usize;
    let bh = rng.int_inclusive(i64::from(size[0]), i64::from(size[1])) as usize;
    let x0 = rng.int_inclusive(0, w as i64 - 1) as usize;
    let y0 = rng.int_inclusive(0, h as i64 - 1) as usize;
    for y in y0..(y0 + bh).min(h) {
        pixels[y * w + x0..y * w + (x0 + bw).min(w)].fill(true);
    }
}
