//! Directional change extraction: feature pixels present before the event
//! and absent after it, optionally tolerant to small misalignment through
//! dilation, then cleaned of small components.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::morphology::{dilate, remove_small_components, Connectivity};
use crate::raster::{BinaryMask, RasterPair};

pub const DEFAULT_DILATION_RADIUS: u32 = 5;
pub const DEFAULT_MIN_COMPONENT: usize = 1000;

/// Which mask of the pair is dilated before differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DilateTarget {
    /// `dilate(before) & !after`
    #[default]
    Pre,
    /// `before & !dilate(after)`
    Post,
    /// `before & !after`
    None,
}

impl FromStr for DilateTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre" => Ok(DilateTarget::Pre),
            "post" => Ok(DilateTarget::Post),
            "none" => Ok(DilateTarget::None),
            other => Err(format!("dilate target must be pre, post or none, got {other:?}")),
        }
    }
}

impl fmt::Display for DilateTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DilateTarget::Pre => "pre",
            DilateTarget::Post => "post",
            DilateTarget::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dilation_radius: u32,
    pub dilate_target: DilateTarget,
    pub min_component: usize,
    pub connectivity: Connectivity,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dilation_radius: DEFAULT_DILATION_RADIUS,
            dilate_target: DilateTarget::Pre,
            min_component: DEFAULT_MIN_COMPONENT,
            connectivity: Connectivity::Eight,
        }
    }
}

impl PipelineConfig {
    /// Plain differencing with no dilation and no component filtering.
    pub fn raw() -> Self {
        Self {
            dilation_radius: 0,
            dilate_target: DilateTarget::None,
            min_component: 0,
            connectivity: Connectivity::Eight,
        }
    }
}

/// Pixels whose feature was lost across the event.
///
/// Masks produced by [`compute_change_mask`] carry the configuration that
/// produced them; masks built from labels carry none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeMask {
    mask: BinaryMask,
    config: Option<PipelineConfig>,
}

impl ChangeMask {
    pub fn from_mask(mask: BinaryMask) -> Self {
        Self { mask, config: None }
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn into_mask(self) -> BinaryMask {
        self.mask
    }

    pub fn applied_config(&self) -> Option<&PipelineConfig> {
        self.config.as_ref()
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.mask.dimensions()
    }

    pub fn pixels(&self) -> &[bool] {
        self.mask.pixels()
    }

    pub fn count_ones(&self) -> usize {
        self.mask.count_ones()
    }
}

impl From<BinaryMask> for ChangeMask {
    fn from(mask: BinaryMask) -> Self {
        Self::from_mask(mask)
    }
}

pub fn compute_change_mask(pair: &RasterPair, config: &PipelineConfig) -> ChangeMask {
    let (before, after) = (pair.before(), pair.after());
    let r = config.dilation_radius;
    let raw = match config.dilate_target {
        DilateTarget::Pre => dilate(before, r).and_not(after),
        DilateTarget::Post => before.and_not(&dilate(after, r)),
        DilateTarget::None => before.and_not(after),
    }
    .expect("pair members share dimensions");
    let mask = remove_small_components(&raw, config.min_component, config.connectivity);
    ChangeMask {
        mask,
        config: Some(*config),
    }
}
