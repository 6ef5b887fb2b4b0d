//! Mission scenario files: clouds, actor path, planner and camera settings.
//!
//! Scenarios are TOML; every planner parameter has a default matching the
//! reference configuration (H=4 s, N=4, lambda=20, r_d=5 m, K=5, 8 view
//! sphere candidates), so a minimal file only names the clouds and the
//! actor path. Relative cloud paths resolve against the scenario file's
//! directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::DetectParams;
use crate::geom::{load_ply, Pose, RgbPointCloud, Vec3};
use crate::render::CameraIntrinsics;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub background_ply: PathBuf,
    pub actor_ply: PathBuf,
    /// Piecewise-linear target path; the actor holds its last pose beyond
    /// the final waypoint.
    pub actor_path: Vec<PathWaypoint>,
    pub duration_s: f64,
    #[serde(default = "default_tick_hz")]
    pub tick_hz: f64,
    pub drone_start: [f64; 3],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub detect: DetectParams,
}

fn default_tick_hz() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathWaypoint {
    pub t: f64,
    pub pos: [f64; 3],
}

/// Receding-horizon planner parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Planning horizon H, seconds.
    pub horizon_s: f64,
    /// Steps N per horizon; the step spacing is `horizon_s / steps`.
    pub steps: usize,
    /// Detectability importance weight.
    pub lambda: f64,
    /// Observation distance, meters.
    pub r_d: f64,
    /// Step distance limit between consecutive viewpoints, meters.
    pub r_max: f64,
    pub azimuth_count: usize,
    pub elevation_deg: f64,
    /// Extra azimuth rings at these elevations, if any.
    pub extra_elevations_deg: Vec<f64>,
    pub min_elevation_deg: f64,
    /// Spline polynomial order K.
    pub poly_order: usize,
    /// Waypoint tracking weight in the spline QP.
    pub rho: f64,
    /// Accumulated prediction error (meter-seconds) that triggers a replan.
    pub replan_err_threshold: f64,
    /// Observation count for the constant-velocity fit.
    pub prediction_window: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon_s: 4.0,
            steps: 4,
            lambda: 20.0,
            r_d: 5.0,
            r_max: 5.0,
            azimuth_count: 8,
            elevation_deg: 20.0,
            extra_elevations_deg: Vec::new(),
            min_elevation_deg: 0.0,
            poly_order: 5,
            rho: 100.0,
            replan_err_threshold: 0.5,
            prediction_window: 10,
        }
    }
}

impl PlannerConfig {
    /// Candidate elevations in radians: the main ring plus any extras.
    pub fn elevations(&self) -> Vec<f64> {
        let mut degs = vec![self.elevation_deg];
        degs.extend(&self.extra_elevations_deg);
        degs.iter().map(|d| d.to_radians()).collect()
    }

    pub fn step_dt(&self) -> f64 {
        self.horizon_s / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Scenario(msg.into()));
        if self.horizon_s <= 0.0 {
            return bad("horizon_s must be positive");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.lambda < 0.0 {
            return bad("lambda must be nonnegative");
        }
        if self.r_d <= 0.0 || self.r_max <= 0.0 {
            return bad("r_d and r_max must be positive");
        }
        if self.azimuth_count == 0 {
            return bad("azimuth_count must be at least 1");
        }
        let min = self.min_elevation_deg;
        for e in std::iter::once(&self.elevation_deg).chain(&self.extra_elevations_deg) {
            if *e < min || *e >= 90.0 {
                return bad("elevations must lie in [min_elevation_deg, 90)");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    pub fov_deg: f64,
    pub near_clip: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 96,
            height: 72,
            fov_deg: 120.0,
            near_clip: 0.1,
        }
    }
}

impl CameraConfig {
    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics::from_horizontal_fov(
            self.width,
            self.height,
            self.fov_deg.to_radians(),
            self.near_clip,
        )
    }
}

/// Piecewise-linear timed path with a motion-derived heading.
#[derive(Debug, Clone)]
pub struct ActorPath {
    waypoints: Vec<(f64, Vec3)>,
}

impl ActorPath {
    pub fn from_waypoints(waypoints: &[PathWaypoint]) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Scenario("actor_path needs at least one waypoint".into()));
        }
        if waypoints.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Scenario("actor_path times must be strictly increasing".into()));
        }
        Ok(Self {
            waypoints: waypoints
                .iter()
                .map(|w| (w.t, Vec3::new(w.pos[0], w.pos[1], w.pos[2])))
                .collect(),
        })
    }

    pub fn position(&self, t: f64) -> Vec3 {
        let first = self.waypoints.first().unwrap();
        let last = self.waypoints.last().unwrap();
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        let i = self.waypoints.partition_point(|(wt, _)| *wt <= t);
        let (t0, p0) = self.waypoints[i - 1];
        let (t1, p1) = self.waypoints[i];
        p0 + (p1 - p0) * ((t - t0) / (t1 - t0))
    }

    /// Pose at time `t`: interpolated position, yaw facing the direction of
    /// travel (the last moving direction when stationary).
    pub fn pose(&self, t: f64) -> Pose {
        let position = self.position(t);
        let mut yaw = 0.0;
        if self.waypoints.len() >= 2 {
            let seg_end = self
                .waypoints
                .partition_point(|(wt, _)| *wt <= t)
                .clamp(1, self.waypoints.len() - 1);
            for i in (1..=seg_end).rev() {
                let dir = self.waypoints[i].1 - self.waypoints[i - 1].1;
                if dir.xy().norm() > 1e-9 {
                    yaw = dir.y.atan2(dir.x);
                    break;
                }
            }
        }
        Pose::from_yaw(yaw, position)
    }
}

/// A loaded scenario: parsed file plus resolved clouds and path.
pub struct Scenario {
    pub file: ScenarioFile,
    pub background: RgbPointCloud,
    pub actor: RgbPointCloud,
    pub path: ActorPath,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_file(file, base)
    }

    pub fn from_file(file: ScenarioFile, base_dir: &Path) -> Result<Self> {
        if file.duration_s < 0.0 {
            return Err(Error::Scenario("duration_s must be nonnegative".into()));
        }
        if file.tick_hz <= 0.0 {
            return Err(Error::Scenario("tick_hz must be positive".into()));
        }
        file.planner.validate()?;
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let background = load_ply(resolve(&file.background_ply))?;
        let actor = load_ply(resolve(&file.actor_ply))?;
        let path = ActorPath::from_waypoints(&file.actor_path)?;
        Ok(Self {
            file,
            background,
            actor,
            path,
        })
    }

    pub fn drone_start(&self) -> Vec3 {
        Vec3::new(
            self.file.drone_start[0],
            self.file.drone_start[1],
            self.file.drone_start[2],
        )
    }
}
