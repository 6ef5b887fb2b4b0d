//! Receding-horizon mission loop: observe, predict, evaluate, plan, execute.
//!
//! Each control tick observes the target, replans when (a) no trajectory
//! exists yet, (b) the accumulated prediction error crosses the threshold,
//! or (c) the active trajectory's horizon is exhausted, and otherwise
//! tracks the active spline exactly. A replan predicts the target with a
//! constant-velocity fit, scores every view-sphere candidate in parallel,
//! runs the DAG search and refits the spline from the executing state, then
//! resets the error accumulator.

use std::time::Instant;

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::detect::{evaluate_viewpoint, DetectParams};
use crate::geom::{Pose, RgbPointCloud, Vec3};
use crate::graph::{build_dag, shortest_viewpoint_path, view_sphere, ViewLayer};
use crate::render::CameraIntrinsics;
use crate::scenario::{PlannerConfig, Scenario};
use crate::traj::{build_qp, solve_spline, spline_objective, SplineTrajectory, YawTracker};
use crate::{Error, Result};

/// Timestamped pose observations with strictly increasing times.
#[derive(Debug, Clone, Default)]
pub struct TargetTrack {
    observations: Vec<(f64, Pose)>,
}

impl TargetTrack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, pose: Pose) -> Result<()> {
        if let Some((last, _)) = self.observations.last() {
            if t <= *last {
                return Err(Error::Scenario(format!(
                    "observation time {t} not after {last}"
                )));
            }
        }
        self.observations.push((t, pose));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[(f64, Pose)] {
        &self.observations
    }
}

/// Constant-velocity target model: least-squares line through recent
/// positions, orientation held at the latest observation.
#[derive(Debug, Clone)]
pub struct ConstVelPredictor {
    /// Time of the newest observation used in the fit.
    pub t_ref: f64,
    pub position_at_ref: Vec3,
    pub velocity: Vec3,
    pub orientation: Matrix3<f64>,
}

/// Fits positions of the last `window` observations; a single observation
/// yields zero velocity.
pub fn fit_constant_velocity(track: &TargetTrack, window: usize) -> Result<ConstVelPredictor> {
    let obs = track.observations();
    if obs.is_empty() {
        return Err(Error::EmptyTrack);
    }
    let tail = &obs[obs.len().saturating_sub(window.max(1))..];
    let (t_ref, latest_pose) = *tail.last().unwrap();

    let n = tail.len() as f64;
    let mut tau_mean = 0.0;
    let mut pos_mean = Vec3::zeros();
    for (t, pose) in tail {
        tau_mean += t - t_ref;
        pos_mean += pose.translation;
    }
    tau_mean /= n;
    pos_mean /= n;

    let mut var = 0.0;
    let mut cross = Vec3::zeros();
    for (t, pose) in tail {
        let dt = (t - t_ref) - tau_mean;
        var += dt * dt;
        cross += (pose.translation - pos_mean) * dt;
    }
    let velocity = if var > 1e-12 { cross / var } else { Vec3::zeros() };
    let position_at_ref = pos_mean - velocity * tau_mean;

    Ok(ConstVelPredictor {
        t_ref,
        position_at_ref,
        velocity,
        orientation: latest_pose.rotation,
    })
}

impl ConstVelPredictor {
    /// Pose on the fitted line; no horizon check.
    pub fn pose_at(&self, t: f64) -> Pose {
        Pose {
            rotation: self.orientation,
            translation: self.position_at_ref + self.velocity * (t - self.t_ref),
        }
    }

    /// Poses at the given times, all of which must lie within
    /// `[t_ref, t_ref + horizon]`.
    pub fn predict(&self, times: &[f64], horizon: f64) -> Result<Vec<Pose>> {
        for &t in times {
            if t < self.t_ref - 1e-9 || t > self.t_ref + horizon + 1e-9 {
                return Err(Error::BeyondHorizon {
                    t,
                    t_last: self.t_ref,
                    horizon,
                });
            }
        }
        Ok(times.iter().map(|&t| self.pose_at(t)).collect())
    }
}

/// `accum + ||observed - predicted|| * dt`, meter-seconds.
pub fn update_accum_err(accum: f64, observed: &Pose, predicted: &Pose, dt: f64) -> f64 {
    debug_assert!(dt > 0.0);
    accum + (observed.translation - predicted.translation).norm() * dt
}

/// One control tick of the executed mission.
#[derive(Debug, Clone)]
pub struct TickRecord {
    pub time: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub yaw: f64,
    pub target_position: Vec3,
    /// Instantaneous `||observed - predicted||`, meters.
    pub prediction_error: f64,
    /// Accumulator value after this tick's update.
    pub accum_err: f64,
    /// Detectability of the executed view against the actual target;
    /// -1 when the actor is occluded.
    pub executed_r: f64,
    pub replanned: bool,
}

/// Scores of one candidate on one layer: `(R, cost)`, `None` if occluded.
pub type CandidateScore = Option<(f64, f64)>;

/// Everything produced by a single replan.
#[derive(Debug, Clone)]
pub struct ReplanRecord {
    pub time: f64,
    /// Predicted target poses, one per step.
    pub predictions: Vec<Pose>,
    /// Per layer, per candidate scores.
    pub layer_scores: Vec<Vec<CandidateScore>>,
    /// Candidate positions per layer, aligned with `layer_scores`.
    pub layer_candidates: Vec<Vec<Vec3>>,
    /// Chosen viewpoint per step with its `(R, cost)`.
    pub chosen: Vec<(Vec3, f64, f64)>,
    pub path_cost: f64,
    pub spline_objective: f64,
    /// `r_max` actually used (doubled once on an infeasible first try).
    pub r_max_used: f64,
    /// Executing state handed to the QP as its initial condition.
    pub handoff_state: [Vec3; 3],
    pub trajectory: SplineTrajectory,
    pub eval_seconds: f64,
    pub graph_seconds: f64,
    pub qp_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MissionSummary {
    /// Sum of consecutive executed-position distances, meters.
    pub travel_distance: f64,
    /// Mean executed detectability over ticks (occluded ticks count as 0).
    pub mean_r: f64,
    pub replan_count: usize,
    pub mean_eval_seconds: f64,
    pub mean_graph_seconds: f64,
    pub mean_qp_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MissionLog {
    pub ticks: Vec<TickRecord>,
    pub replans: Vec<ReplanRecord>,
    pub summary: MissionSummary,
}

struct ActivePlan {
    trajectory: SplineTrajectory,
    predictor: ConstVelPredictor,
}

/// Runs the full receding-horizon mission defined by the scenario.
pub fn run_mission(scenario: &Scenario) -> Result<MissionLog> {
    let cfg = &scenario.file.planner;
    let detect = &scenario.file.detect;
    let intrinsics = scenario.file.camera.intrinsics();
    let dt = 1.0 / scenario.file.tick_hz;
    let tick_count = (scenario.file.duration_s * scenario.file.tick_hz).round() as usize;

    let mut log = MissionLog::default();
    let mut track = TargetTrack::new();
    let mut plan: Option<ActivePlan> = None;
    let mut accum_err = 0.0;
    let mut yaw_tracker = YawTracker::new();
    let mut state = [scenario.drone_start(), Vec3::zeros(), Vec3::zeros()];

    for k in 0..tick_count {
        let t = k as f64 * dt;
        let target_pose = scenario.path.pose(t);
        track.push(t, target_pose)?;

        let need_replan = match &plan {
            None => true,
            Some(p) => {
                accum_err > cfg.replan_err_threshold || t >= p.trajectory.end_time() - 1e-9
            }
        };
        let mut replanned = false;
        if need_replan {
            // executing state at the replan instant becomes the QP initial
            // condition, keeping the hand-off C2-continuous
            if let Some(p) = &plan {
                let te = t.min(p.trajectory.end_time());
                state = [
                    p.trajectory.eval(te, 0)?,
                    p.trajectory.eval(te, 1)?,
                    p.trajectory.eval(te, 2)?,
                ];
            }
            let (record, new_plan) = replan(t, state, &track, scenario, &intrinsics)?;
            log.replans.push(record);
            plan = Some(new_plan);
            accum_err = 0.0;
            replanned = true;
        }

        let active = plan.as_ref().unwrap();
        let te = t.min(active.trajectory.end_time());
        state = [
            active.trajectory.eval(te, 0)?,
            active.trajectory.eval(te, 1)?,
            active.trajectory.eval(te, 2)?,
        ];

        let predicted = active.predictor.pose_at(t);
        let prediction_error = (target_pose.translation - predicted.translation).norm();
        accum_err = update_accum_err(accum_err, &target_pose, &predicted, dt);

        let yaw = yaw_tracker.update(state[0], target_pose.translation);
        let outcome = evaluate_viewpoint(
            &scenario.actor,
            &target_pose,
            &scenario.background,
            state[0],
            &intrinsics,
            detect,
        )?;
        let executed_r = outcome
            .report()
            .map(|rep| rep.variance_ratio)
            .unwrap_or(-1.0);

        log.ticks.push(TickRecord {
            time: t,
            position: state[0],
            velocity: state[1],
            acceleration: state[2],
            yaw,
            target_position: target_pose.translation,
            prediction_error,
            accum_err,
            executed_r,
            replanned,
        });
    }

    log.summary = summarize(&log);
    Ok(log)
}

fn summarize(log: &MissionLog) -> MissionSummary {
    let mut travel = 0.0;
    for pair in log.ticks.windows(2) {
        travel += (pair[1].position - pair[0].position).norm();
    }
    let n = log.ticks.len().max(1) as f64;
    let mean_r = log.ticks.iter().map(|t| t.executed_r.max(0.0)).sum::<f64>() / n;
    let m = log.replans.len().max(1) as f64;
    MissionSummary {
        travel_distance: travel,
        mean_r,
        replan_count: log.replans.len(),
        mean_eval_seconds: log.replans.iter().map(|r| r.eval_seconds).sum::<f64>() / m,
        mean_graph_seconds: log.replans.iter().map(|r| r.graph_seconds).sum::<f64>() / m,
        mean_qp_seconds: log.replans.iter().map(|r| r.qp_seconds).sum::<f64>() / m,
    }
}

fn replan(
    t: f64,
    state: [Vec3; 3],
    track: &TargetTrack,
    scenario: &Scenario,
    intrinsics: &CameraIntrinsics,
) -> Result<(ReplanRecord, ActivePlan)> {
    let cfg = &scenario.file.planner;
    let predictor = fit_constant_velocity(track, cfg.prediction_window)?;

    let step_times: Vec<f64> = (1..=cfg.steps).map(|i| t + i as f64 * cfg.step_dt()).collect();
    let predictions = predictor.predict(&step_times, cfg.horizon_s)?;

    // an infeasible horizon is retried once with the step limit doubled
    let plan_with = |r_max: f64| {
        let mut cfg = cfg.clone();
        cfg.r_max = r_max;
        plan_horizon(
            t,
            state,
            &predictions,
            &scenario.actor,
            &scenario.background,
            &cfg,
            &scenario.file.detect,
            intrinsics,
        )
    };
    let record = match plan_with(cfg.r_max) {
        Err(Error::Infeasible { .. }) => plan_with(2.0 * cfg.r_max)?,
        other => other?,
    };
    let trajectory = record.trajectory.clone();
    Ok((
        record,
        ActivePlan {
            trajectory,
            predictor,
        },
    ))
}

/// Plans one horizon from the given state and target predictions: scores
/// every view-sphere candidate in parallel, extracts the optimal viewpoint
/// sequence and fits the spline. Prediction i is pinned at
/// `t + (i+1) * step_dt`.
#[allow(clippy::too_many_arguments)]
pub fn plan_horizon(
    t: f64,
    state: [Vec3; 3],
    predictions: &[Pose],
    actor: &RgbPointCloud,
    background: &RgbPointCloud,
    cfg: &PlannerConfig,
    detect: &DetectParams,
    intrinsics: &CameraIntrinsics,
) -> Result<ReplanRecord> {
    let step_times: Vec<f64> = (1..=predictions.len())
        .map(|i| t + i as f64 * cfg.step_dt())
        .collect();

    let eval_start = Instant::now();
    let elevations = cfg.elevations();
    let layer_candidates: Vec<Vec<Vec3>> = predictions
        .iter()
        .map(|pred| {
            elevations
                .iter()
                .flat_map(|&e| view_sphere(pred.translation, cfg.r_d, cfg.azimuth_count, e))
                .collect()
        })
        .collect();
    let jobs: Vec<(usize, usize)> = layer_candidates
        .iter()
        .enumerate()
        .flat_map(|(li, cands)| (0..cands.len()).map(move |ci| (li, ci)))
        .collect();
    let scored: Vec<CandidateScore> = jobs
        .par_iter()
        .map(|&(li, ci)| -> Result<CandidateScore> {
            let outcome = evaluate_viewpoint(
                actor,
                &predictions[li],
                background,
                layer_candidates[li][ci],
                intrinsics,
                detect,
            )?;
            Ok(outcome.report().map(|r| (r.variance_ratio, r.cost)))
        })
        .collect::<Result<_>>()?;
    let mut layer_scores: Vec<Vec<CandidateScore>> =
        layer_candidates.iter().map(|c| vec![None; c.len()]).collect();
    for (&(li, ci), score) in jobs.iter().zip(&scored) {
        layer_scores[li][ci] = *score;
    }
    let eval_seconds = eval_start.elapsed().as_secs_f64();

    let graph_start = Instant::now();
    let layers: Vec<ViewLayer> = predictions
        .iter()
        .enumerate()
        .map(|(li, pred)| ViewLayer {
            step: li + 1,
            target_position: pred.translation,
            candidates: layer_candidates[li].clone(),
            costs: layer_scores[li].iter().map(|s| s.map(|(_, c)| c)).collect(),
        })
        .collect();
    let dag = build_dag(state[0], &layers, cfg.r_max, cfg.lambda)?;
    let path = shortest_viewpoint_path(&dag);
    let r_max_used = cfg.r_max;
    let graph_seconds = graph_start.elapsed().as_secs_f64();

    let qp_start = Instant::now();
    let mut knot_times = vec![t];
    knot_times.extend(&step_times);
    let problem = build_qp(&path.points, &knot_times, state, cfg.poly_order, cfg.rho)?;
    let trajectory = solve_spline(&problem)?;
    let objective = spline_objective(&problem, &trajectory);
    let qp_seconds = qp_start.elapsed().as_secs_f64();

    let chosen = path
        .points
        .iter()
        .zip(&path.candidate_indices)
        .enumerate()
        .map(|(li, (&pos, &ci))| {
            let (r, cost) = layer_scores[li][ci].expect("chosen candidate is not occluded");
            (pos, r, cost)
        })
        .collect();

    Ok(ReplanRecord {
        time: t,
        predictions: predictions.to_vec(),
        layer_scores,
        layer_candidates,
        chosen,
        path_cost: path.total_cost,
        spline_objective: objective,
        r_max_used,
        handoff_state: state,
        trajectory,
        eval_seconds,
        graph_seconds,
        qp_seconds,
    })
}
