//! Report types shared between the space checks and the map analyses.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BgSample {
    pub vertex: usize,
    pub radius: f64,
    /// `(r^2/2) * link - area(B_r)`; nonpositive when the inequality holds.
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngleDefect {
    pub vertex: usize,
    /// `2π - total angle`.
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Largest positive CN defect over the sampled triples (0 if none).
    pub cn_defect_max: f64,
    pub cn_samples: usize,
    pub bg_defects: Vec<BgSample>,
    pub angle_defects: Vec<AngleDefect>,
    /// Vertices (or singular points) with total angle below `2π`.
    pub positive_curvature: Vec<usize>,
    /// Rigid-cone verdict of a flatness report; `None` for other reports.
    pub rigid_cone: Option<bool>,
}

impl ComparisonReport {
    pub fn record_cn(&mut self, defect: f64) {
        self.cn_samples += 1;
        if defect > self.cn_defect_max {
            self.cn_defect_max = defect;
        }
    }

    pub fn bg_defect_max(&self) -> f64 {
        self.bg_defects.iter().map(|s| s.defect).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `defect / r^2` over the Bishop-Gromov samples.
    pub fn bg_relative_max(&self) -> f64 {
        self.bg_defects
            .iter()
            .map(|s| s.defect / (s.radius * s.radius))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
