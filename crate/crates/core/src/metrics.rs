//! Precision, recall, F1 and IoU over pixels or grid cells.

use std::fmt;

use serde::Serialize;

use crate::change::ChangeMask;
use crate::error::{Error, Result};
use crate::impact::ImpactMap;

/// Elementwise tallies of a binary prediction against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

pub fn confusion(pred: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// What the elements of an evaluation are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSetting {
    /// Every raster pixel.
    Pixel,
    /// Every grid cell.
    Grid,
}

impl fmt::Display for EvalSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalSetting::Pixel => "pixel",
            EvalSetting::Grid => "grid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub setting: EvalSetting,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub counts: ConfusionCounts,
}

impl EvalReport {
    /// Scores from exact counts.
    ///
    /// Precision and recall are single divisions of the counts. F1 is the
    /// harmonic mean of those two values and IoU is `F1 / (2 − F1)`, so both
    /// identities hold exactly on every report; each is within a few ulps
    /// of its direct count ratio.
    ///
    /// With nothing predicted and nothing true every score is 1. Otherwise a
    /// zero denominator makes the score 0.
    pub fn from_counts(setting: EvalSetting, counts: ConfusionCounts) -> Self {
        let ConfusionCounts { tp, fp, fn_, .. } = counts;
        if tp + fp == 0 && tp + fn_ == 0 {
            return Self {
                setting,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                iou: 1.0,
                counts,
            };
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let iou = f1 / (2.0 - f1);
        Self {
            setting,
            precision,
            recall,
            f1,
            iou,
            counts,
        }
    }
}

pub fn eval_pixelwise(pred: &ChangeMask, truth: &ChangeMask) -> Result<EvalReport> {
    if pred.dimensions() != truth.dimensions() {
        return Err(Error::DimensionMismatch {
            left: pred.dimensions(),
            right: truth.dimensions(),
        });
    }
    let counts = confusion(pred.pixels(), truth.pixels())?;
    Ok(EvalReport::from_counts(EvalSetting::Pixel, counts))
}

pub fn eval_gridded(pred: &ImpactMap, truth: &ImpactMap) -> Result<EvalReport> {
    if pred.spec() != truth.spec() {
        return Err(Error::GridMismatch {
            left: pred.spec().to_string(),
            right: truth.spec().to_string(),
        });
    }
    let counts = confusion(pred.impacted(), truth.impacted())?;
    Ok(EvalReport::from_counts(EvalSetting::Grid, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impact::make_grid;
    use crate::raster::BinaryMask;

    fn counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    #[test]
    fn tallies() {
        let c = confusion(&[true, false, true], &[true, false, true]).unwrap();
        assert_eq!(c, counts(2, 0, 0, 1));
        let c = confusion(&[true, true], &[false, false]).unwrap();
        assert_eq!(c, counts(0, 2, 0, 0));
        assert!(confusion(&[true], &[true, false]).is_err());
    }

    #[test]
    fn half_recall_fixture() {
        let r = EvalReport::from_counts(EvalSetting::Pixel, counts(2, 0, 2, 0));
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.recall, 0.5);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.iou - 0.5).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_disjoint() {
        let m = ChangeMask::from_mask(BinaryMask::from_fn(6, 6, |x, y| x > y).unwrap());
        let r = eval_pixelwise(&m, &m).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.iou), (1.0, 1.0, 1.0, 1.0));

        let a = ChangeMask::from_mask(BinaryMask::from_fn(6, 6, |x, _| x < 2).unwrap());
        let b = ChangeMask::from_mask(BinaryMask::from_fn(6, 6, |x, _| x > 3).unwrap());
        let r = eval_pixelwise(&a, &b).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.iou), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_denominator_conventions() {
        let vacuous = EvalReport::from_counts(EvalSetting::Grid, counts(0, 0, 0, 4));
        assert_eq!((vacuous.precision, vacuous.recall, vacuous.f1, vacuous.iou), (1.0, 1.0, 1.0, 1.0));
        let missed = EvalReport::from_counts(EvalSetting::Grid, counts(0, 0, 3, 1));
        assert_eq!((missed.precision, missed.recall, missed.f1, missed.iou), (0.0, 0.0, 0.0, 0.0));
        let spurious = EvalReport::from_counts(EvalSetting::Grid, counts(0, 3, 0, 1));
        assert_eq!((spurious.precision, spurious.recall), (0.0, 0.0));
    }

    #[test]
    fn gridded_fixture() {
        let spec = make_grid(8, 8, 4).unwrap();
        let truth = ImpactMap::new(spec, vec![true, true, false, false], 0.01).unwrap();
        let pred = ImpactMap::new(spec, vec![true, false, false, false], 0.01).unwrap();
        let r = eval_gridded(&pred, &truth).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.iou - 0.5).abs() < 1e-15);
        assert_eq!(r.setting, EvalSetting::Grid);

        let all = eval_gridded(&truth, &truth).unwrap();
        assert_eq!(all.f1, 1.0);

        let none = ImpactMap::new(spec, vec![false; 4], 0.01).unwrap();
        assert_eq!(eval_gridded(&none, &none).unwrap().iou, 1.0);

        let other = ImpactMap::new(make_grid(8, 8, 2).unwrap(), vec![false; 16], 0.01).unwrap();
        assert!(matches!(eval_gridded(&pred, &other), Err(Error::GridMismatch { .. })));
    }
}
