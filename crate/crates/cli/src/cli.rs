//! The `bevtrack` command line.
//!
//! Every subcommand writes its results into `--out`; diagnostics go to
//! standard error. Exit codes: 0 on success, 1 when valid input is rejected,
//! 2 for missing files, malformed input and usage errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bevtrack_core::eval::{evaluate, EvalReport, LabeledBox};
use bevtrack_core::experiment::{labeled, scene_model, tracker_input};
use bevtrack_core::forecast::{forecast, preprocess, MotionModelSpec};
use bevtrack_core::geometry::{calibrate, estimate_homography, px_to_bev, BevPoint, EgomotionTrack, GroundPlane, Intrinsics, PixelPoint};
use bevtrack_core::sim::{generate, visible_ground_mask, Scenario, SimOutput};
use bevtrack_core::tracker::{run_sequence, Detection, GroundMask, SceneModel, TrackEvent, TrackOutput};
use bevtrack_core::{Frame, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{read_text, write_text, FileError, FileResult};
use crate::files::{
    parse_json, read_appearance, read_config, read_correspondences, read_egomotion, read_homography, read_points, read_scenario, write_appearance,
    write_egomotion, write_homography, write_json, write_json_lines, write_points, write_scenario, HomographyFile,
};
use crate::mot::{read_gt, read_mot, track_records, write_gt, write_mot, GtRow, MotRecord};

#[derive(Debug, Parser)]
#[command(name = "bevtrack", version, about = "Long-term multi-object tracking with ground-plane forecasting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scenario into detections, ground truth, a point cloud and the true homography.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate the pixel to ground homography from a ground point cloud or from correspondences.
    Calibrate(CalibrateArgs),
    /// Track detections and write hypothesis tracks plus the association log.
    Track(TrackArgs),
    /// Score hypothesis tracks against ground truth.
    Evaluate(EvaluateArgs),
    /// Forecast the future of every track of a track file from its last observations.
    Forecast(ForecastArgs),
    /// Simulate, calibrate from the point cloud, track and evaluate in one run.
    Pipeline {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Motion {
    Static,
    #[value(name = "kalman_cv")]
    KalmanCv,
    Fan,
}

/// Overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub motion: Option<Motion>,
    /// Number of forecast branches; implies a fan when above 1.
    #[arg(long)]
    pub k: Option<usize>,
    /// ID recall bucket edges in seconds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub buckets: Option<Vec<f64>>,
}

/// Half-width of a fan built from `--k`, degrees.
const FAN_SPREAD: f64 = 30.0;

impl RunArgs {
    pub fn config(&self) -> FileResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        let keep_noise = |m: MotionModelSpec, old: &MotionModelSpec| MotionModelSpec { process_noise: old.process_noise, obs_noise: old.obs_noise, ..m };
        let motion = match (self.motion, self.k) {
            (Some(Motion::Static), _) => Some(MotionModelSpec::static_model()),
            (Some(Motion::KalmanCv), _) => Some(MotionModelSpec::kalman_cv()),
            (Some(Motion::Fan), k) => Some(MotionModelSpec::symmetric_fan(k.unwrap_or(3), FAN_SPREAD)),
            (None, Some(1)) => Some(MotionModelSpec::kalman_cv()),
            (None, Some(k)) => Some(MotionModelSpec::symmetric_fan(k, FAN_SPREAD)),
            (None, None) => None,
        };
        if let Some(m) = motion {
            c.motion = keep_noise(m, &c.motion);
        }
        if let Some(b) = &self.buckets {
            c.evaluation.buckets = b.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Ground point cloud in camera coordinates, `x y z` per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Pixel to ground correspondences, `u v x y` per line; used instead of the point cloud.
    #[arg(long)]
    pub correspondences: Option<PathBuf>,
    /// Takes the camera intrinsics and image size from this scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub focal: Option<f64>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    /// Plane inlier distance, meters.
    #[arg(long, default_value_t = 0.05)]
    pub inlier_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Detections in MOT format.
    #[arg(long)]
    pub detections: PathBuf,
    /// Appearance descriptors aligned with the detection rows.
    #[arg(long)]
    pub appearance: Option<PathBuf>,
    #[arg(long)]
    pub homography: PathBuf,
    /// Cumulative camera offsets for a moving camera.
    #[arg(long)]
    pub egomotion: Option<PathBuf>,
    /// Visible ground as a JSON occupancy grid; defaults to the image footprint.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Half-size of the square ground region the tracker considers, meters.
    #[arg(long, default_value_t = 50.0)]
    pub extent: f64,
    /// Write the BEV position into the x and y columns.
    #[arg(long)]
    pub bev_export: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground truth in MOT format with a visibility column.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub hypothesis: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub tracks: PathBuf,
    #[arg(long)]
    pub homography: PathBuf,
    #[arg(long)]
    pub egomotion: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> FileResult<()> {
    match command {
        Command::Simulate { scenario, out, seed } => {
            let mut s = read_scenario(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            simulate(&s, &out).map(|_| ())
        }
        Command::Calibrate(a) => calibrate_cmd(&a),
        Command::Track(a) => track_cmd(&a),
        Command::Evaluate(a) => evaluate_cmd(&a),
        Command::Forecast(a) => forecast_cmd(&a),
        Command::Pipeline { scenario, out, run } => pipeline(&scenario, &out, &run),
    }
}

fn out_dir(dir: &Path) -> FileResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| FileError::io(dir, e))
}

fn check_positive(name: &str, v: f64) -> FileResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bevtrack_core::Error::InvalidConfig(format!("{name} must be positive")).into())
    }
}

/// Writes `det.txt`, `det_appearance.csv`, `gt.txt`, `points.txt`,
/// `homography.txt`, `egomotion.csv`, `ground_mask.json` and the scenario
/// itself into `out`.
pub fn simulate(s: &Scenario, out: &Path) -> FileResult<SimOutput> {
    let sim = generate(s)?;
    out_dir(out)?;
    let mut dets: Vec<_> = sim.detections.iter().collect();
    dets.sort_by_key(|d| d.frame);
    let records: Vec<MotRecord> = dets.iter().map(|d| MotRecord::new(d.frame, -1, d.bbox)).collect();
    write_mot(&out.join("det.txt"), &records)?;
    let app: Vec<(Frame, &[f64])> = dets.iter().map(|d| (d.frame, d.appearance.as_slice())).collect();
    write_appearance(&out.join("det_appearance.csv"), &app)?;
    write_gt(&out.join("gt.txt"), &sim.gt.iter().map(GtRow::from).collect::<Vec<_>>())?;
    write_points(&out.join("points.txt"), &sim.point_cloud)?;
    let h = HomographyFile {
        homography: sim.homography,
        max_spacing: RunConfig::default().max_spacing,
        image_width: s.camera.image_width,
        image_height: s.camera.image_height,
    };
    write_homography(&out.join("homography.txt"), &h)?;
    write_egomotion(&out.join("egomotion.csv"), &sim.egomotion)?;
    write_json(&out.join("ground_mask.json"), &visible_ground_mask(s, RunConfig::default().ground_cell)?)?;
    write_scenario(&out.join("scenario.json"), s)?;
    Ok(sim)
}

/// Summary of a point cloud calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub plane: GroundPlane,
    pub points: usize,
    pub inliers: usize,
    /// Residual of the homography fit over the inlier correspondences, meters.
    pub rmse: f64,
}

fn intrinsics(a: &CalibrateArgs) -> FileResult<(Intrinsics, u32, u32)> {
    if let Some(p) = &a.scenario {
        let cam = read_scenario(p)?.camera;
        return Ok((cam.intrinsics(), cam.image_width, cam.image_height));
    }
    match (a.focal, a.width, a.height) {
        (Some(f), Some(w), Some(h)) => {
            check_positive("focal", f)?;
            Ok((Intrinsics { focal: f, center: PixelPoint::new(0.5 * w as f64, 0.5 * h as f64) }, w, h))
        }
        _ => Err(bevtrack_core::Error::InvalidConfig("calibrate needs --scenario or all of --focal, --width and --height".into()).into()),
    }
}

fn calibrate_cmd(a: &CalibrateArgs) -> FileResult<()> {
    let config = a.run.config()?;
    out_dir(&a.out)?;
    let (homography, width, height) = if let Some(c) = &a.correspondences {
        let (w, h) = match (&a.scenario, a.width, a.height) {
            (_, Some(w), Some(h)) => (w, h),
            _ => {
                let (_, w, h) = intrinsics(a)?;
                (w, h)
            }
        };
        (estimate_homography(&read_correspondences(c)?)?.homography, w, h)
    } else {
        let Some(points) = &a.points else {
            return Err(bevtrack_core::Error::InvalidConfig("calibrate needs --points or --correspondences".into()).into());
        };
        let (intr, w, h) = intrinsics(a)?;
        let cloud = read_points(points)?;
        let cal = calibrate(&cloud, &intr, a.inlier_tol, a.iterations, config.seed)?;
        let summary = CalibrationSummary { plane: cal.plane, points: cloud.len(), inliers: cal.inliers, rmse: cal.fit.rmse };
        write_json(&a.out.join("calibration.json"), &summary)?;
        (cal.fit.homography, w, h)
    };
    let file = HomographyFile { homography, max_spacing: config.max_spacing, image_width: width, image_height: height };
    file.linearized()?;
    write_homography(&a.out.join("homography.txt"), &file)
}

fn read_ego(path: Option<&PathBuf>) -> FileResult<Option<EgomotionTrack>> {
    path.map(|p| read_egomotion(p)).transpose()
}

fn detections(a: &TrackArgs) -> FileResult<Vec<(Frame, Vec<Detection>)>> {
    let file = read_mot(&a.detections)?;
    if file.skipped > 0 {
        eprintln!("warning: {}: skipped {} rows with a non-positive box", a.detections.display(), file.skipped);
    }
    let appearance = a.appearance.as_ref().map(|p| read_appearance(p)).transpose()?;
    let mut frames: BTreeMap<Frame, Vec<Detection>> = BTreeMap::new();
    for (r, &row) in file.records.iter().zip(&file.rows) {
        let app = match &appearance {
            Some(app) => {
                let path = a.appearance.as_ref().expect("set with appearance");
                let Some((frame, v)) = app.get(row) else {
                    return Err(FileError::parse(path, row + 1, "fewer appearance rows than detections"));
                };
                if *frame != r.frame {
                    return Err(FileError::parse(path, row + 1, format!("frame {frame} does not match detection frame {}", r.frame)));
                }
                v.clone()
            }
            None => Vec::new(),
        };
        frames.entry(r.frame).or_default().push(Detection::new(r.frame, r.bbox(), app));
    }
    Ok(frames.into_iter().collect())
}

fn write_tracks(out: &Path, tracks: &[TrackOutput], events: &[TrackEvent], bev: bool) -> FileResult<()> {
    write_mot(&out.join("tracks.txt"), &track_records(tracks, bev))?;
    write_json_lines(&out.join("events.jsonl"), events)
}

fn track_cmd(a: &TrackArgs) -> FileResult<()> {
    let config = a.run.config()?;
    check_positive("fps", a.fps)?;
    check_positive("extent", a.extent)?;
    let lh = read_homography(&a.homography)?.linearized()?;
    let ego = read_ego(a.egomotion.as_ref())?;
    let frames = detections(a)?;
    let mask = match &a.mask {
        Some(p) => parse_json::<GroundMask>(p, &read_text(p)?)?,
        None => {
            let e = a.extent;
            GroundMask::from_footprint(&lh, BevPoint::new(-e, -e), BevPoint::new(e, e), config.ground_cell)?
        }
    };
    let scene = SceneModel::new(mask, lh, a.fps, ego)?;
    let (tracks, events) = run_sequence(config.tracker(), &scene, frames)?;
    out_dir(&a.out)?;
    write_tracks(&a.out, &tracks, &events, a.bev_export)
}

fn hypothesis(path: &Path) -> FileResult<Vec<LabeledBox>> {
    let file = read_mot(path)?;
    if file.skipped > 0 {
        eprintln!("warning: {}: skipped {} rows with a non-positive box", path.display(), file.skipped);
    }
    file.records
        .iter()
        .map(|r| {
            let id = u32::try_from(r.id)
                .map_err(|_| bevtrack_core::Error::InvalidConfig(format!("{}: hypothesis ids must be non-negative, got {}", path.display(), r.id)))?;
            Ok(LabeledBox::new(r.frame, id, r.bbox()))
        })
        .collect()
}

fn write_report(out: &Path, report: &EvalReport) -> FileResult<()> {
    write_json(&out.join("report.json"), report)?;
    write_text(&out.join("report.csv"), &report.to_csv())
}

fn evaluate_cmd(a: &EvaluateArgs) -> FileResult<()> {
    let config = a.run.config()?;
    check_positive("fps", a.fps)?;
    let gt = read_gt(&a.gt)?;
    let gt: Vec<LabeledBox> = gt.records.iter().map(GtRow::labeled).collect();
    let hyp = hypothesis(&a.hypothesis)?;
    let report = evaluate(&gt, &hyp, a.fps, &config.evaluation);
    out_dir(&a.out)?;
    write_report(&a.out, &report)
}

/// Forecast of one track, sampled on the forecasting grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackForecast {
    pub track_id: u32,
    pub last_frame: Frame,
    /// Frames of the sampled points.
    pub frames: Vec<Frame>,
    /// One list of BEV points per branch.
    pub branches: Vec<Vec<BevPoint>>,
}

fn forecast_cmd(a: &ForecastArgs) -> FileResult<()> {
    let config = a.run.config()?;
    check_positive("fps", a.fps)?;
    let lh = read_homography(&a.homography)?.linearized()?;
    let ego = read_ego(a.egomotion.as_ref())?;
    let file = read_mot(&a.tracks)?;
    let mut histories: BTreeMap<u32, Vec<(Frame, BevPoint)>> = BTreeMap::new();
    for r in &file.records {
        let id = u32::try_from(r.id)
            .map_err(|_| bevtrack_core::Error::InvalidConfig(format!("{}: track ids must be non-negative, got {}", a.tracks.display(), r.id)))?;
        histories.entry(id).or_default().push((r.frame, px_to_bev(&lh, r.bbox().bottom_center(), ego.as_ref(), r.frame)));
    }
    let pre = config.preprocess(a.fps);
    let step = (config.dt * a.fps).round().max(1.0) as usize;
    let horizon = step * config.pred_len;
    let mut dumps = Vec::new();
    for (id, mut h) in histories {
        h.sort_by_key(|p| p.0);
        h.dedup_by_key(|p| p.0);
        let obs = preprocess(&h, &pre)?;
        let fc = forecast(&config.motion, &obs, horizon)?;
        let idx: Vec<usize> = (1..=config.pred_len).map(|i| i * step - 1).collect();
        dumps.push(TrackForecast {
            track_id: id,
            last_frame: obs.last_frame,
            frames: idx.iter().map(|&i| fc.branches[0].frames[i]).collect(),
            branches: fc.branches.iter().map(|b| idx.iter().map(|&i| b.points[i]).collect()).collect(),
        });
    }
    out_dir(&a.out)?;
    write_json(&a.out.join("forecasts.json"), &dumps)
}

/// Report of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub frames: Frame,
    pub fps: f64,
    pub detections: usize,
    pub track_ids: usize,
    pub calibration: CalibrationSummary,
    pub report: EvalReport,
}

fn pipeline(scenario: &Path, out: &Path, run: &RunArgs) -> FileResult<()> {
    let config = run.config()?;
    let mut s = read_scenario(scenario)?;
    if let Some(seed) = run.seed {
        s.seed = seed;
    }
    let sim = simulate(&s, out)?;
    let cal = calibrate(&sim.point_cloud, &s.camera.intrinsics(), 0.05, 200, config.seed)?;
    let file = HomographyFile {
        homography: cal.fit.homography,
        max_spacing: config.max_spacing,
        image_width: s.camera.image_width,
        image_height: s.camera.image_height,
    };
    write_homography(&out.join("calibrated_homography.txt"), &file)?;
    let scene = scene_model(&s, &sim, file.linearized()?, config.ground_cell)?;
    let (tracks, events) = run_sequence(config.tracker(), &scene, tracker_input(&sim))?;
    write_tracks(out, &tracks, &events, true)?;
    let hyp: Vec<LabeledBox> = tracks.iter().map(|t| LabeledBox::new(t.frame, t.id, t.bbox)).collect();
    let report = evaluate(&labeled(&sim.gt), &hyp, sim.fps, &config.evaluation);
    write_report(out, &report)?;
    let mut ids: Vec<u32> = tracks.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    ids.dedup();
    let summary = Summary {
        frames: sim.frames,
        fps: sim.fps,
        detections: sim.detections.len(),
        track_ids: ids.len(),
        calibration: CalibrationSummary { plane: cal.plane, points: sim.point_cloud.len(), inliers: cal.inliers, rmse: cal.fit.rmse },
        report,
    };
    write_json(&out.join("summary.json"), &summary)
}
