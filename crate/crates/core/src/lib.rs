//! Disaster impact mapping from pre/post-event feature masks.
//!
//! Given binary masks of man-made features (roads, buildings) extracted
//! before and after an event, the pipeline
//!
//! 1. differences the masks, optionally dilating one side to tolerate
//!    registration error ([`change`]),
//! 2. drops small connected components of the change ([`morphology`]),
//! 3. tiles the region into square cells and computes the Disaster Impact
//!    Index of each cell, then thresholds it into an impact map ([`impact`]),
//! 4. scores predictions against ground truth ([`metrics`]).
//!
//! [`synth`] produces synthetic scenarios with known ground truth and
//! [`report`] writes the CSV/GeoJSON artifacts.
//!
//! ```
//! use dii_core::{change, impact, raster};
//!
//! let before = raster::BinaryMask::from_fn(64, 64, |x, _| x % 16 < 4).unwrap();
//! let after = raster::BinaryMask::from_fn(64, 64, |x, y| x % 16 < 4 && y >= 32).unwrap();
//! let pair = raster::make_pair(before.clone(), after).unwrap();
//!
//! let change = change::compute_change_mask(&pair, &change::PipelineConfig::raw());
//! let grid = impact::make_grid(64, 64, 32).unwrap();
//! let dii = impact::compute_dii(&change, &before, &grid).unwrap();
//! let map = impact::threshold_dii(&dii, impact::DEFAULT_TAU).unwrap();
//! assert_eq!(map.impacted(), &[true, true, false, false]);
//! ```

pub mod change;
pub mod error;
pub mod georef;
pub mod impact;
pub mod metrics;
pub mod morphology;
pub mod raster;
pub mod report;
pub mod synth;

pub use change::{compute_change_mask, ChangeMask, DilateTarget, PipelineConfig};
pub use error::{Error, Result};
pub use impact::{compute_dii, grid_truth, make_grid, threshold_dii, DiiGrid, GridSpec, ImpactMap, TruthRule};
pub use metrics::{confusion, eval_gridded, eval_pixelwise, ConfusionCounts, EvalReport, EvalSetting};
pub use morphology::{dilate, label_components, remove_small_components, ComponentMap, Connectivity};
pub use raster::{load_mask, make_pair, save_mask, BinaryMask, RasterPair};
pub use synth::{generate_scenario, FeatureKind, Scenario, ScenarioConfig};
