//! Endpoint recall: does a forecast started at the last visible frame of an
//! occlusion land on the object when it reappears?

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::eval::{evaluate, occlusion_components, EvalReport, LabeledBox, OcclusionEvent};
use crate::forecast::{forecast, predicted_box, preprocess, MotionModelSpec, PreprocessConfig};
use crate::geometry::{calibrate, px_to_bev, BevPoint, EgomotionTrack, LinearizedHomography, PixelPoint};
use crate::sim::{generate, visible_ground_mask, GtRecord, Scenario, SimOutput};
use crate::tracker::{run_sequence, Detection, SceneModel, TrackOutput};
use crate::{Frame, Result};

/// A prediction hits when its box overlaps the reappearing object by more
/// than this IoU...
pub const HIT_IOU: f64 = 0.5;
/// ...or lands closer than this many meters.
pub const HIT_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub l2: f64,
    pub iou: f64,
}

impl Endpoint {
    pub fn hit(&self) -> bool {
        self.iou > HIT_IOU || self.l2 < HIT_DISTANCE
    }

    fn miss() -> Self {
        Self { l2: f64::INFINITY, iou: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOutcome {
    pub event: OcclusionEvent,
    /// Forecast in BEV, positions from the given homography.
    pub bev: Endpoint,
    /// Linear extrapolation of the box's bottom-center in the image.
    pub pixel: Endpoint,
}

#[derive(Debug, Clone)]
pub struct EndpointSetup<'a> {
    /// Homography the history is lifted with.
    pub lh: &'a LinearizedHomography,
    /// True homography, used to measure pixel-space predictions in meters.
    pub truth: &'a LinearizedHomography,
    pub ego: Option<&'a EgomotionTrack>,
    pub model: &'a MotionModelSpec,
    pub preprocess: PreprocessConfig,
    pub vis_threshold: f64,
    pub window: usize,
}

pub fn labeled(gt: &[GtRecord]) -> Vec<LabeledBox> {
    gt.iter().map(|g| LabeledBox { frame: g.frame, id: g.id, bbox: g.bbox, visibility: g.visibility }).collect()
}

/// Forecasts every occlusion of `gt` from its visible history.
pub fn endpoint_outcomes(gt: &[GtRecord], setup: &EndpointSetup<'_>) -> Result<Vec<GapOutcome>> {
    let fps = setup.preprocess.fps;
    let events = occlusion_components(&labeled(gt), setup.vis_threshold, setup.window, fps);
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        let find = |f: Frame| gt.iter().find(|g| g.id == e.gt_id && g.frame == f);
        let (Some(last), Some(target)) = (find(e.pre_frame), find(e.post_frame)) else {
            continue;
        };
        let visible: Vec<&GtRecord> = gt
            .iter()
            .filter(|g| g.id == e.gt_id && g.frame <= e.pre_frame && g.visibility >= setup.vis_threshold)
            .collect();
        let steps = (e.post_frame - e.pre_frame) as usize;

        // Metric forecast.
        let history: Vec<(Frame, BevPoint)> = visible
            .iter()
            .map(|g| (g.frame, px_to_bev(setup.lh, g.bbox.bottom_center(), setup.ego, g.frame)))
            .collect();
        let obs = preprocess(&history, &setup.preprocess)?;
        let fc = forecast(setup.model, &obs, steps)?;
        let bev = (0..fc.k())
            .filter_map(|b| fc.point_at(b, e.post_frame))
            .map(|p| {
                let l2 = p.distance(target.bev);
                let iou = predicted_box(&last.bbox, p, setup.lh, setup.ego, e.post_frame)
                    .map_or(0.0, |b| b.iou(&target.bbox));
                Endpoint { l2, iou }
            })
            .min_by(|a, b| a.l2.total_cmp(&b.l2))
            .unwrap_or_else(Endpoint::miss);

        // Image-space constant velocity.
        let history: Vec<(Frame, BevPoint)> = visible
            .iter()
            .map(|g| {
                let p = g.bbox.bottom_center();
                (g.frame, BevPoint::new(p.u, p.v))
            })
            .collect();
        let obs = preprocess(&history, &setup.preprocess)?;
        let fc = forecast(&MotionModelSpec::kalman_cv(), &obs, steps)?;
        let pixel = match fc.point_at(0, e.post_frame) {
            Some(p) => {
                let px = PixelPoint::new(p.x, p.y);
                let moved = last.bbox.with_bottom_center(px);
                let landed = setup.truth.to_bev(px);
                Endpoint { l2: landed.distance(target_local(target, setup.ego)), iou: moved.iou(&target.bbox) }
            }
            None => Endpoint::miss(),
        };
        out.push(GapOutcome { event: e, bev, pixel });
    }
    Ok(out)
}

/// Camera-local ground position of a record.
fn target_local(g: &GtRecord, ego: Option<&EgomotionTrack>) -> BevPoint {
    match ego {
        Some(t) => g.bev - t.offset(g.frame),
        None => g.bev,
    }
}

/// Hits over events, optionally restricted to events longer than
/// `min_duration` seconds.
pub fn recall(outcomes: &[GapOutcome], min_duration: f64, pick: impl Fn(&GapOutcome) -> Endpoint) -> (usize, usize) {
    let sel: Vec<&GapOutcome> = outcomes.iter().filter(|o| o.event.duration > min_duration).collect();
    (sel.iter().filter(|o| pick(o).hit()).count(), sel.len())
}

/// Detections of a simulation grouped by frame, in tracker form.
pub fn tracker_input(out: &SimOutput) -> Vec<(Frame, Vec<Detection>)> {
    let mut frames: Vec<(Frame, Vec<Detection>)> = (1..=out.frames).map(|f| (f, Vec::new())).collect();
    for d in &out.detections {
        frames[(d.frame - 1) as usize].1.push(Detection::new(d.frame, d.bbox, d.appearance.clone()));
    }
    frames
}

/// Tracker scene for a simulated sequence seen through `lh`.
pub fn scene_model(s: &Scenario, out: &SimOutput, lh: LinearizedHomography, cell: f64) -> Result<SceneModel> {
    let mask = visible_ground_mask(s, cell)?;
    let ego = (!s.camera_path.is_empty()).then(|| out.egomotion.clone());
    SceneModel::new(mask, lh, s.fps, ego)
}

/// Tracks a simulated sequence and scores it against its ground truth.
pub fn track_and_evaluate(out: &SimOutput, scene: &SceneModel, config: &RunConfig) -> Result<(EvalReport, Vec<TrackOutput>)> {
    let (tracks, _) = run_sequence(config.tracker(), scene, tracker_input(out))?;
    let hyp: Vec<LabeledBox> = tracks.iter().map(|t| LabeledBox::new(t.frame, t.id, t.bbox)).collect();
    Ok((evaluate(&labeled(&out.gt), &hyp, out.fps, &config.evaluation), tracks))
}

/// Which homography a suite run localizes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomographySource {
    Truth,
    PointCloud,
}

/// Tracks every scenario of a suite and sums the reports.
pub fn run_suite(suite: &[Scenario], config: &RunConfig, source: HomographySource) -> Result<EvalReport> {
    let mut total = EvalReport::empty();
    for s in suite {
        let out = generate(s)?;
        let h = match source {
            HomographySource::Truth => out.homography,
            HomographySource::PointCloud => calibrate(&out.point_cloud, &s.camera.intrinsics(), 0.05, 200, config.seed)?.fit.homography,
        };
        let lh = LinearizedHomography::new(h, s.camera.image_width, s.camera.image_height, config.max_spacing)?;
        let scene = scene_model(s, &out, lh, config.ground_cell)?;
        total.merge(&track_and_evaluate(&out, &scene, config)?.0);
    }
    Ok(total)
}
