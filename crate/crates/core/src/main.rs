//! `chasecam`: detectability-aware chase planning CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use chasecam::detect::{evaluate_image_detailed, write_likelihood_pgm, DetectParams, ViewpointOutcome};
use chasecam::geom::{load_ply, look_at_pose, save_ply, transform_cloud, ColorRgb, Pose, Vec3};
use chasecam::graph::{bench_sssp, build_dag, ViewLayer};
use chasecam::render::{synthesize_view, write_label_pgm, write_ppm, CameraIntrinsics};
use chasecam::rhp::{plan_horizon, run_mission, MissionLog, ReplanRecord};
use chasecam::scenario::Scenario;
use chasecam::traj::YawTracker;

#[derive(Parser)]
#[command(
    name = "chasecam",
    version,
    about = "Detectability-aware chase planning: view scoring, viewpoint optimization and mission simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one camera viewpoint of a scene and dump the evaluation
    EvalView(EvalViewArgs),
    /// Plan a single horizon: viewpoints plus a smooth trajectory
    Plan(PlanArgs),
    /// Run a full receding-horizon mission
    Simulate(SimulateArgs),
    /// Benchmark the two SSSP backends over growing edge counts
    BenchGraph(BenchGraphArgs),
    /// Render a labeled view of a scene
    Render(RenderArgs),
    /// Write the bundled demo scene (clouds + mission scenario)
    GenScene(GenSceneArgs),
}

/// Comma-separated 3-vector CLI value.
#[derive(Clone, Copy, Debug)]
struct Vec3Arg(Vec3);

fn parse_vec3(s: &str) -> Result<Vec3Arg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("bad coordinate `{part}`"))?;
    }
    Ok(Vec3Arg(Vec3::new(v[0], v[1], v[2])))
}

#[derive(Args)]
struct CameraArgs {
    #[arg(long, default_value_t = 96)]
    width: usize,
    #[arg(long, default_value_t = 72)]
    height: usize,
    #[arg(long, default_value_t = 120.0)]
    fov_deg: f64,
    #[arg(long, default_value_t = 0.1)]
    near_clip: f64,
}

impl CameraArgs {
    fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics::from_horizontal_fov(
            self.width,
            self.height,
            self.fov_deg.to_radians(),
            self.near_clip,
        )
    }
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long, default_value_t = 8)]
    bins_per_channel: u32,
    #[arg(long, default_value_t = 32)]
    hist_bins: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 5.0)]
    w_max: f64,
    #[arg(long, default_value_t = 0.5)]
    d_c_fraction: f64,
    #[arg(long, default_value_t = 1)]
    splat_radius: u32,
}

impl DetectArgs {
    fn params(&self) -> DetectParams {
        DetectParams {
            bins_per_channel: self.bins_per_channel,
            hist_bins: self.hist_bins,
            eps: self.eps,
            w_max: self.w_max,
            d_c_fraction: self.d_c_fraction,
            splat_radius: self.splat_radius,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct EvalViewArgs {
    #[arg(long)]
    actor_ply: PathBuf,
    #[arg(long)]
    background_ply: PathBuf,
    /// Camera center, `x,y,z` meters.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    camera: Vec3Arg,
    /// Actor position, `x,y,z` meters; the camera looks at it.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    target: Vec3Arg,
    #[arg(long, default_value_t = 0.0)]
    target_yaw: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Write is.ppm / il.pgm / labels.pgm next to the CSVs.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    dump_images: bool,
    #[command(flatten)]
    camera_model: CameraArgs,
    #[command(flatten)]
    detect: DetectArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "plan_out")]
    out_dir: PathBuf,
    /// Plan start time on the scenario clock.
    #[arg(long, default_value_t = 0.0)]
    start_time: f64,
    #[arg(long, default_value_t = 50.0)]
    sample_hz: f64,
    /// Also write the searched DAG as a text edge list.
    #[arg(long)]
    dump_dag: bool,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "sim_out")]
    out_dir: PathBuf,
    /// Re-render and dump the chosen viewpoint of every replan step.
    #[arg(long)]
    dump_images: bool,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

/// `--key value` overrides mirroring the scenario file; precedence is
/// CLI > file > defaults.
#[derive(Args)]
struct ScenarioOverrides {
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    tick_hz: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    drone_start: Option<Vec3Arg>,
    // planner
    #[arg(long)]
    horizon_s: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    r_d: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    azimuth_count: Option<usize>,
    #[arg(long)]
    elevation_deg: Option<f64>,
    #[arg(long)]
    min_elevation_deg: Option<f64>,
    #[arg(long)]
    poly_order: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    replan_err_threshold: Option<f64>,
    #[arg(long)]
    prediction_window: Option<usize>,
    // camera
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    fov_deg: Option<f64>,
    #[arg(long)]
    near_clip: Option<f64>,
    // detectability metric
    #[arg(long)]
    bins_per_channel: Option<u32>,
    #[arg(long)]
    hist_bins: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    w_max: Option<f64>,
    #[arg(long)]
    d_c_fraction: Option<f64>,
    #[arg(long)]
    splat_radius: Option<u32>,
}

impl ScenarioOverrides {
    fn apply(&self, scenario: &mut Scenario) -> Result<(), CliError> {
        let file = &mut scenario.file;
        macro_rules! set {
            ($target:expr, $field:ident) => {
                if let Some(v) = self.$field {
                    $target = v;
                }
            };
        }
        set!(file.duration_s, duration_s);
        set!(file.tick_hz, tick_hz);
        set!(file.seed, seed);
        if let Some(v) = self.drone_start {
            file.drone_start = [v.0.x, v.0.y, v.0.z];
        }
        set!(file.planner.horizon_s, horizon_s);
        set!(file.planner.steps, steps);
        set!(file.planner.lambda, lambda);
        set!(file.planner.r_d, r_d);
        set!(file.planner.r_max, r_max);
        set!(file.planner.azimuth_count, azimuth_count);
        set!(file.planner.elevation_deg, elevation_deg);
        set!(file.planner.min_elevation_deg, min_elevation_deg);
        set!(file.planner.poly_order, poly_order);
        set!(file.planner.rho, rho);
        set!(file.planner.replan_err_threshold, replan_err_threshold);
        set!(file.planner.prediction_window, prediction_window);
        set!(file.camera.width, width);
        set!(file.camera.height, height);
        set!(file.camera.fov_deg, fov_deg);
        set!(file.camera.near_clip, near_clip);
        set!(file.detect.bins_per_channel, bins_per_channel);
        set!(file.detect.hist_bins, hist_bins);
        set!(file.detect.eps, eps);
        set!(file.detect.w_max, w_max);
        set!(file.detect.d_c_fraction, d_c_fraction);
        set!(file.detect.splat_radius, splat_radius);

        file.planner.validate()?;
        if file.duration_s < 0.0 || file.tick_hz <= 0.0 {
            return Err(CliError::Usage(
                "duration must be >= 0 and tick_hz > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Args)]
struct BenchGraphArgs {
    /// Target edge counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1_000usize, 10_000, 100_000, 1_000_000])]
    edges: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    width: usize,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    actor_ply: PathBuf,
    #[arg(long)]
    background_ply: PathBuf,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    camera: Vec3Arg,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    target: Vec3Arg,
    #[arg(long, default_value_t = 0.0)]
    target_yaw: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    splat_radius: u32,
    #[command(flatten)]
    camera_model: CameraArgs,
}

#[derive(Args)]
struct GenSceneArgs {
    #[arg(long, default_value = "scene")]
    out_dir: PathBuf,
}

enum CliError {
    Usage(String),
    Run(chasecam::Error),
}

impl From<chasecam::Error> for CliError {
    fn from(e: chasecam::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Run(chasecam::Error::Infeasible { .. }) => 3,
            CliError::Run(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Run(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };

    // CHASE_THREADS caps the evaluation worker pool; 0 or unset = auto
    if let Ok(threads) = std::env::var("CHASE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }

    let result = match cli.command {
        Command::EvalView(args) => cmd_eval_view(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::BenchGraph(args) => cmd_bench_graph(args),
        Command::Render(args) => cmd_render(args),
        Command::GenScene(args) => cmd_gen_scene(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Temp-then-rename so partial runs never leave truncated files.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn emit(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_eval_view(args: EvalViewArgs) -> Result<(), CliError> {
    let actor = load_ply(&args.actor_ply)?;
    let background = load_ply(&args.background_ply)?;
    let params = args.detect.params();
    let intrinsics = args.camera_model.intrinsics();

    let actor_pose = Pose::from_yaw(args.target_yaw, args.target.0);
    let camera_pose = look_at_pose(args.camera.0, args.target.0, Vec3::z())?;
    let actor_world = transform_cloud(&actor, &actor_pose);
    let image = synthesize_view(
        &actor_world,
        &background,
        &camera_pose,
        &intrinsics,
        params.splat_radius,
        params.clear_color,
    );
    let eval = evaluate_image_detailed(&image, &params)?;

    std::fs::create_dir_all(&args.out_dir)?;
    if args.dump_images {
        let mut ppm = Vec::new();
        write_ppm(&image, &mut ppm)?;
        emit(&args.out_dir.join("is.ppm"), &ppm)?;
        let mut pgm = Vec::new();
        write_label_pgm(&image, &mut pgm)?;
        emit(&args.out_dir.join("labels.pgm"), &pgm)?;
        if let Some(lik) = &eval.likelihood {
            let mut il = Vec::new();
            write_likelihood_pgm(lik, &mut il)?;
            emit(&args.out_dir.join("il.pgm"), &il)?;
        }
    }

    let mut hist_csv = String::from("bin,h_center,p_a,p_b\n");
    if let Some((p_a, p_b)) = &eval.histograms {
        for i in 0..p_a.bin_count {
            let _ = writeln!(
                hist_csv,
                "{},{:.9},{:.9},{:.9}",
                i,
                p_a.bin_center(i),
                p_a.weights[i],
                p_b.weights[i]
            );
        }
    }
    emit(&args.out_dir.join("histograms.csv"), hist_csv.as_bytes())?;

    let mut metrics = String::from("r,l,actor_pixels,background_pixels\n");
    match &eval.outcome {
        ViewpointOutcome::Occluded => {
            metrics.push_str("-1,-1,0,0\n");
            println!("OCCLUDED");
        }
        outcome => {
            let rep = outcome.report().unwrap();
            let _ = writeln!(
                metrics,
                "{:.9},{:.9},{},{}",
                rep.variance_ratio, rep.cost, rep.actor_pixel_count, rep.background_pixel_count
            );
            println!("R {:.9}", rep.variance_ratio);
            println!("L {:.9}", rep.cost);
        }
    }
    emit(&args.out_dir.join("metrics.csv"), metrics.as_bytes())
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    args.overrides.apply(&mut scenario)?;

    let cfg = scenario.file.planner.clone();
    let intrinsics = scenario.file.camera.intrinsics();
    let t0 = args.start_time;
    let predictions: Vec<Pose> = (1..=cfg.steps)
        .map(|i| scenario.path.pose(t0 + i as f64 * cfg.step_dt()))
        .collect();
    let state = [scenario.drone_start(), Vec3::zeros(), Vec3::zeros()];
    let record = plan_horizon(
        t0,
        state,
        &predictions,
        &scenario.actor,
        &scenario.background,
        &cfg,
        &scenario.file.detect,
        &intrinsics,
    )?;

    std::fs::create_dir_all(&args.out_dir)?;
    let mut viewpoints = String::from("step,t,x,y,z,r,cost\n");
    for (i, (pos, r, cost)) in record.chosen.iter().enumerate() {
        let _ = writeln!(
            viewpoints,
            "{},{:.6},{:.6},{:.6},{:.6},{:.9},{:.9}",
            i + 1,
            t0 + (i + 1) as f64 * cfg.step_dt(),
            pos.x,
            pos.y,
            pos.z,
            r,
            cost
        );
    }
    emit(&args.out_dir.join("viewpoints.csv"), viewpoints.as_bytes())?;

    let trajectory_csv = sample_trajectory(&record, &scenario, args.sample_hz)?;
    emit(&args.out_dir.join("trajectory.csv"), trajectory_csv.as_bytes())?;

    if args.dump_dag {
        let dag_txt = dump_dag_edges(&record, &cfg)?;
        emit(&args.out_dir.join("dag.txt"), dag_txt.as_bytes())?;
    }
    println!(
        "path_cost {:.9} spline_objective {:.9}",
        record.path_cost, record.spline_objective
    );
    Ok(())
}

fn sample_trajectory(
    record: &ReplanRecord,
    scenario: &Scenario,
    sample_hz: f64,
) -> Result<String, CliError> {
    if sample_hz <= 0.0 {
        return Err(CliError::Usage("sample_hz must be positive".into()));
    }
    let traj = &record.trajectory;
    let mut csv = String::from("t,x,y,z,yaw,vx,vy,vz,ax,ay,az\n");
    let mut yaw_tracker = YawTracker::new();
    let steps = ((traj.end_time() - traj.start_time()) * sample_hz).round() as usize;
    for k in 0..=steps {
        let t = (traj.start_time() + k as f64 / sample_hz).min(traj.end_time());
        let pos = traj.eval(t, 0)?;
        let vel = traj.eval(t, 1)?;
        let acc = traj.eval(t, 2)?;
        let yaw = yaw_tracker.update(pos, scenario.path.position(t));
        let _ = writeln!(
            csv,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            t, pos.x, pos.y, pos.z, yaw, vel.x, vel.y, vel.z, acc.x, acc.y, acc.z
        );
    }
    Ok(csv)
}

/// Edge list `i j1 i+1 j2 weight` over the pruned DAG, indices 0-based
/// within each layer.
fn dump_dag_edges(
    record: &ReplanRecord,
    cfg: &chasecam::scenario::PlannerConfig,
) -> Result<String, CliError> {
    let layers: Vec<ViewLayer> = record
        .predictions
        .iter()
        .enumerate()
        .map(|(li, pred)| ViewLayer {
            step: li + 1,
            target_position: pred.translation,
            candidates: record.layer_candidates[li].clone(),
            costs: record.layer_scores[li]
                .iter()
                .map(|s| s.map(|(_, c)| c))
                .collect(),
        })
        .collect();
    let dag = build_dag(record.handoff_state[0], &layers, record.r_max_used, cfg.lambda)?;

    let offsets: Vec<usize> = dag
        .layer_sizes
        .iter()
        .scan(0, |acc, &n| {
            let offset = *acc;
            *acc += n;
            Some(offset)
        })
        .collect();
    let locate = |flat: usize| -> (usize, usize) {
        let layer = offsets.partition_point(|&o| o <= flat) - 1;
        (layer, flat - offsets[layer])
    };
    let mut out = String::new();
    for (u, edges) in dag.out_edges.iter().enumerate() {
        let (li, ji) = locate(u);
        for &(v, w) in edges {
            let (lv, jv) = locate(v);
            let _ = writeln!(out, "{li} {ji} {lv} {jv} {w:.9}");
        }
    }
    Ok(out)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    args.overrides.apply(&mut scenario)?;

    let log = run_mission(&scenario)?;
    std::fs::create_dir_all(&args.out_dir)?;
    emit(&args.out_dir.join("mission.csv"), mission_csv(&log).as_bytes())?;
    emit(&args.out_dir.join("replans.csv"), replans_csv(&log).as_bytes())?;

    if args.dump_images {
        dump_replan_images(&log, &scenario, &args.out_dir)?;
    }

    let s = &log.summary;
    println!("ticks {}", log.ticks.len());
    println!("replans {}", s.replan_count);
    println!("travel_distance_m {:.3}", s.travel_distance);
    println!("mean_executed_r {:.6}", s.mean_r);
    println!("mean_eval_ms {:.3}", s.mean_eval_seconds * 1e3);
    println!("mean_graph_ms {:.3}", s.mean_graph_seconds * 1e3);
    println!("mean_qp_ms {:.3}", s.mean_qp_seconds * 1e3);
    Ok(())
}

fn mission_csv(log: &MissionLog) -> String {
    let mut csv = String::from(
        "t,x,y,z,vx,vy,vz,ax,ay,az,yaw,target_x,target_y,target_z,pred_err,accum_err,executed_r,replanned\n",
    );
    for t in &log.ticks {
        let _ = writeln!(
            csv,
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9},{:.9},{:.9},{}",
            t.time,
            t.position.x,
            t.position.y,
            t.position.z,
            t.velocity.x,
            t.velocity.y,
            t.velocity.z,
            t.acceleration.x,
            t.acceleration.y,
            t.acceleration.z,
            t.yaw,
            t.target_position.x,
            t.target_position.y,
            t.target_position.z,
            t.prediction_error,
            t.accum_err,
            t.executed_r,
            u8::from(t.replanned)
        );
    }
    csv
}

fn replans_csv(log: &MissionLog) -> String {
    let mut csv =
        String::from("t,steps,candidates,eval_s,graph_s,qp_s,path_cost,spline_objective,r_max_used,mean_chosen_r\n");
    for r in &log.replans {
        let candidates: usize = r.layer_candidates.iter().map(Vec::len).sum();
        let mean_r = r.chosen.iter().map(|c| c.1).sum::<f64>() / r.chosen.len().max(1) as f64;
        let _ = writeln!(
            csv,
            "{:.6},{},{},{:.6},{:.6},{:.6},{:.9},{:.9},{:.3},{:.9}",
            r.time,
            r.chosen.len(),
            candidates,
            r.eval_seconds,
            r.graph_seconds,
            r.qp_seconds,
            r.path_cost,
            r.spline_objective,
            r.r_max_used,
            mean_r
        );
    }
    csv
}

fn dump_replan_images(
    log: &MissionLog,
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<(), CliError> {
    let intrinsics = scenario.file.camera.intrinsics();
    let params = &scenario.file.detect;
    let dir = out_dir.join("replans");
    std::fs::create_dir_all(&dir)?;
    for (k, replan) in log.replans.iter().enumerate() {
        for (i, (viewpoint, _, _)) in replan.chosen.iter().enumerate() {
            let pred = &replan.predictions[i];
            let camera_pose = look_at_pose(*viewpoint, pred.translation, Vec3::z())?;
            let actor_world = transform_cloud(&scenario.actor, pred);
            let image = synthesize_view(
                &actor_world,
                &scenario.background,
                &camera_pose,
                &intrinsics,
                params.splat_radius,
                params.clear_color,
            );
            let mut ppm = Vec::new();
            write_ppm(&image, &mut ppm)?;
            write_atomic(&dir.join(format!("replan{k:03}_step{}.ppm", i + 1)), &ppm)?;
        }
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_bench_graph(args: BenchGraphArgs) -> Result<(), CliError> {
    if args.edges.is_empty() || args.edges.contains(&0) {
        return Err(CliError::Usage("edge counts must be positive".into()));
    }
    if args.width == 0 || args.trials == 0 {
        return Err(CliError::Usage("width and trials must be positive".into()));
    }
    let mut csv = String::from("edges,backend,seconds\n");
    for (i, &target) in args.edges.iter().enumerate() {
        let per_layer = args.width * args.width;
        let layer_count = (target / per_layer).max(1);
        let rows = bench_sssp(layer_count, args.width, args.trials, args.seed + i as u64)?;
        for row in &rows {
            let _ = writeln!(csv, "{},{},{:.9}", row.edges, row.backend, row.seconds);
        }
        let best = |name: &str| {
            rows.iter()
                .filter(|r| r.backend == name)
                .map(|r| r.seconds)
                .fold(f64::INFINITY, f64::min)
        };
        println!(
            "edges {} analytic {:.6}s dfs {:.6}s",
            rows[0].edges,
            best("analytic"),
            best("dfs")
        );
    }
    emit(&args.out, csv.as_bytes())
}

fn cmd_render(args: RenderArgs) -> Result<(), CliError> {
    let actor = load_ply(&args.actor_ply)?;
    let background = load_ply(&args.background_ply)?;
    let intrinsics = args.camera_model.intrinsics();
    let camera_pose = look_at_pose(args.camera.0, args.target.0, Vec3::z())?;
    let actor_world = transform_cloud(&actor, &Pose::from_yaw(args.target_yaw, args.target.0));
    let image = synthesize_view(
        &actor_world,
        &background,
        &camera_pose,
        &intrinsics,
        args.splat_radius,
        ColorRgb::new(128, 128, 128),
    );
    std::fs::create_dir_all(&args.out_dir)?;
    let mut ppm = Vec::new();
    write_ppm(&image, &mut ppm)?;
    emit(&args.out_dir.join("render.ppm"), &ppm)?;
    let mut pgm = Vec::new();
    write_label_pgm(&image, &mut pgm)?;
    emit(&args.out_dir.join("labels.pgm"), &pgm)
}

fn cmd_gen_scene(args: GenSceneArgs) -> Result<(), CliError> {
    let mission = chasecam::scene::write_desk_scene(&args.out_dir)?;
    println!("wrote {}", args.out_dir.join("actor.ply").display());
    println!("wrote {}", args.out_dir.join("background.ply").display());
    println!("wrote {}", mission.display());

    let two_cam = chasecam::scene::two_camera_scene();
    save_ply(args.out_dir.join("twocam_actor.ply"), &two_cam.actor)?;
    save_ply(args.out_dir.join("twocam_background.ply"), &two_cam.background)?;
    println!("wrote {}", args.out_dir.join("twocam_actor.ply").display());
    println!("wrote {}", args.out_dir.join("twocam_background.ply").display());
    println!(
        "camera_distinct {},{},{}",
        two_cam.camera_distinct.x, two_cam.camera_distinct.y, two_cam.camera_distinct.z
    );
    println!(
        "camera_ambiguous {},{},{}",
        two_cam.camera_ambiguous.x, two_cam.camera_ambiguous.y, two_cam.camera_ambiguous.z
    );
    println!(
        "actor_center {},{},{}",
        two_cam.actor_center.x, two_cam.actor_center.y, two_cam.actor_center.z
    );
    Ok(())
}
