use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::geometry::Point;

use super::{
    validate, ConstraintSet, DiffDriveParams, Environment, Rect, RobotModel, Scenario, Waypoint,
    DEFAULT_GRID_RESOLUTION, DEFAULT_TRACK_WIDTH, DEFAULT_WHEEL_RADIUS,
};

/// On-disk scenario layout. Field names are part of the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub bounds: BoundsDoc,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDoc>,
    pub waypoints: Vec<WaypointDoc>,
    #[serde(default)]
    pub fixed_end: bool,
    pub constraints: ConstraintsDoc,
    pub model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_params: Option<ModelParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDoc {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleDoc {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointDoc {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    pub v_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelDoc {
    Diffdrive,
    Quadruped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_v: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<f64>,
}

impl ScenarioDocument {
    pub fn into_scenario(self) -> Scenario {
        let model = match self.model {
            ModelDoc::Diffdrive => RobotModel::DifferentialDrive,
            ModelDoc::Quadruped => RobotModel::Quadruped,
        };
        let model_params = match (model, self.model_params) {
            (RobotModel::DifferentialDrive, p) => {
                let p = p.unwrap_or(ModelParamsDoc { r: None, d_v: None });
                Some(DiffDriveParams {
                    wheel_radius: p.r.unwrap_or(DEFAULT_WHEEL_RADIUS),
                    track_width: p.d_v.unwrap_or(DEFAULT_TRACK_WIDTH),
                })
            }
            (RobotModel::Quadruped, _) => None,
        };
        let grid = self.grid.unwrap_or(GridDoc { resolution: None, inflation: None });
        Scenario {
            environment: Environment {
                x_min: self.bounds.x_min,
                x_max: self.bounds.x_max,
                y_min: self.bounds.y_min,
                y_max: self.bounds.y_max,
                obstacles: self.obstacles.iter().map(|o| Rect::new(o.x, o.y, o.w, o.h)).collect(),
            },
            waypoints: self
                .waypoints
                .iter()
                .map(|w| Waypoint { position: Point::new(w.x, w.y), reward: w.reward })
                .collect(),
            fixed_end: self.fixed_end,
            constraints: ConstraintSet {
                t_max: self.constraints.t_max,
                d_max: self.constraints.d_max,
                v_max: self.constraints.v_max,
                v_min: self.constraints.v_min.unwrap_or(0.0),
                omega_max: self.constraints.omega_max,
                accel_max: self.constraints.accel_max,
            },
            model,
            model_params,
            grid_resolution: grid.resolution.unwrap_or(DEFAULT_GRID_RESOLUTION),
            inflation_radius: grid.inflation.unwrap_or(0.0),
        }
    }

    /// Fully explicit document; every default is written out.
    pub fn from_scenario(s: &Scenario) -> Self {
        let e = &s.environment;
        let c = &s.constraints;
        ScenarioDocument {
            bounds: BoundsDoc { x_min: e.x_min, x_max: e.x_max, y_min: e.y_min, y_max: e.y_max },
            obstacles: e.obstacles.iter().map(|r| ObstacleDoc { x: r.x, y: r.y, w: r.width, h: r.height }).collect(),
            waypoints: s
                .waypoints
                .iter()
                .map(|w| WaypointDoc { x: w.position.x, y: w.position.y, reward: w.reward })
                .collect(),
            fixed_end: s.fixed_end,
            constraints: ConstraintsDoc {
                t_max: c.t_max,
                d_max: c.d_max,
                v_max: c.v_max,
                v_min: Some(c.v_min),
                omega_max: c.omega_max,
                accel_max: c.accel_max,
            },
            model: match s.model {
                RobotModel::DifferentialDrive => ModelDoc::Diffdrive,
                RobotModel::Quadruped => ModelDoc::Quadruped,
            },
            model_params: s
                .model_params
                .map(|p| ModelParamsDoc { r: Some(p.wheel_radius), d_v: Some(p.track_width) }),
            grid: Some(GridDoc { resolution: Some(s.grid_resolution), inflation: Some(s.inflation_radius) }),
        }
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scenario = doc.into_scenario();
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

pub fn save_scenario(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioDocument::from_scenario(scenario)).expect("scenario serializes")
}
