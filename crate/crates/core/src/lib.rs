//! Detectability-aware chase planning for a camera drone.
//!
//! The pipeline follows a moving actor with a camera drone while keeping the
//! actor's colors well separated from the background in the camera view:
//!
//! 1. [`render`] synthesizes labeled images of the fused actor + background
//!    point clouds from candidate camera poses.
//! 2. [`detect`] scores each image with a variance-ratio color-separability
//!    metric and turns it into a planner cost.
//! 3. [`graph`] places candidate viewpoints on per-step view spheres, wires
//!    them into a layered DAG and extracts the cheapest viewpoint sequence.
//! 4. [`traj`] fits a jerk-minimizing polynomial spline through the chosen
//!    viewpoints and provides the myopic yaw rule.
//! 5. [`rhp`] runs the receding-horizon loop: observe, predict, evaluate,
//!    plan, execute, replan on accumulated prediction error.
//!
//! The `chasecam` binary exposes all of this as a CLI (`eval-view`, `plan`,
//! `simulate`, `bench-graph`, `render`, `gen-scene`).

pub mod detect;
pub mod geom;
pub mod graph;
pub mod render;
pub mod rhp;
pub mod scenario;
pub mod scene;
pub mod traj;

pub use geom::{ColorRgb, Pose, RgbPointCloud, Vec3};

/// Errors shared across the planning pipeline.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("ply parse error at line {line}: {msg}")]
    PlyParse { line: usize, msg: String },
    #[error("ply header is missing required property `{0}`")]
    PlyMissingProperty(&'static str),
    #[error("degenerate look-at: {0}")]
    DegenerateLookAt(String),
    #[error("rotation matrix is not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("pixel set {0} is empty; color density is undefined")]
    EmptyPixelSet(&'static str),
    #[error("histogram bins do not match: {0}")]
    HistogramMismatch(String),
    #[error("vertex (layer {layer}, index {index}) is out of range")]
    VertexOutOfRange { layer: usize, index: usize },
    #[error("no viewpoint in layer {layer} is reachable from the root")]
    Infeasible { layer: usize },
    #[error("sssp backends disagree on {0} of {1} distances")]
    BackendMismatch(usize, usize),
    #[error("invalid trajectory problem: {0}")]
    BadTrajectory(String),
    #[error("optimality system is singular or badly conditioned (relative residual {0:.3e})")]
    SingularSystem(f64),
    #[error("trajectory time {t} outside domain [{t0}, {t1}]")]
    OutOfDomain { t: f64, t0: f64, t1: f64 },
    #[error("target track is empty")]
    EmptyTrack,
    #[error("prediction time {t} beyond horizon (last observation {t_last}, horizon {horizon})")]
    BeyondHorizon { t: f64, t_last: f64, horizon: f64 },
    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
