//! JSON description of a target space.
//!
//! ```json
//! {"kind": "euclidean", "dim": 3}
//! {"kind": "cone", "cone_angle": 9.42477796076938}
//! {"kind": "glued_planes", "cone_angle": 3.141592653589793}
//! {"kind": "complex", "charts": [{"vertices": [[0,0],[1,0],[1,1],[0,1]]}, ...],
//!  "gluings": [{"a": [0, 1], "b": [1, 3]}], "subdivision": 4}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::space::{ChartPolygon, Gluing, TargetSpace};

fn default_subdivision() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDesc {
    Euclidean {
        dim: usize,
    },
    Cone {
        cone_angle: f64,
    },
    GluedPlanes {
        cone_angle: f64,
    },
    Complex {
        charts: Vec<ChartPolygon>,
        gluings: Vec<Gluing>,
        #[serde(default = "default_subdivision")]
        subdivision: usize,
    },
}

impl SpaceDesc {
    pub fn build(&self) -> Result<TargetSpace> {
        match self {
            Self::Euclidean { dim } => TargetSpace::euclidean(*dim),
            Self::Cone { cone_angle } => TargetSpace::cone(*cone_angle),
            Self::GluedPlanes { cone_angle } => TargetSpace::glued_planes(*cone_angle),
            Self::Complex { charts, gluings, subdivision } => {
                TargetSpace::complex(charts.clone(), gluings.clone(), *subdivision)
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl TargetSpace {
    pub fn describe(&self) -> SpaceDesc {
        match self {
            Self::Euclidean { dim } => SpaceDesc::Euclidean { dim: *dim },
            Self::Cone(c) => SpaceDesc::Cone { cone_angle: c.angle() },
            Self::Glued(g) => SpaceDesc::GluedPlanes { cone_angle: g.angle() },
            Self::Complex(c) => SpaceDesc::Complex {
                charts: c.charts().to_vec(),
                gluings: c.gluings().to_vec(),
                subdivision: c.subdivision(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_json() {
        let d = SpaceDesc::Cone { cone_angle: 3.0 * std::f64::consts::PI };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<SpaceDesc>(&s).unwrap(), d);
        let c: SpaceDesc = serde_json::from_str(
            r#"{"kind":"complex","charts":[{"vertices":[[0,0],[1,0],[0,1]]}],"gluings":[]}"#,
        )
        .unwrap();
        assert!(c.build().is_ok());
    }
}
