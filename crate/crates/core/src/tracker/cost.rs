use alloc::vec;
use alloc::vec::Vec;

use super::{appearance_similarity, Detection, MatchThresholds, SceneModel, Track, TrackState};
use crate::assignment::ScoreMatrix;
use crate::forecast::predicted_box;
use crate::Frame;

/// Gated association score of one branch against one detection:
/// `(iou + max(tau_l2 - l2, 0))` when `app >= tau_app` and `iou >= tau_iou`,
/// otherwise 0.
pub fn pair_score(iou: f64, l2: f64, app: f64, th: &MatchThresholds) -> f64 {
    if app >= th.tau_app && iou >= th.tau_iou {
        iou + (th.tau_l2 - l2).max(0.0)
    } else {
        0.0
    }
}

/// Scores of inactive tracks (rows) against detections (columns), with the
/// branch that produced each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub scores: ScoreMatrix,
    best_branch: Vec<Option<usize>>,
}

impl CostMatrix {
    pub fn best_branch(&self, track: usize, detection: usize) -> Option<usize> {
        self.best_branch[track * self.scores.cols() + detection]
    }
}

/// Maximum over each track's alive branches of the gated score, evaluated at
/// the branch's current point.
pub fn build_cost_matrix(
    inactive: &[&Track],
    detections: &[Detection],
    th: &MatchThresholds,
    scene: &SceneModel,
) -> CostMatrix {
    let cols = detections.len();
    let mut scores = ScoreMatrix::zeros(inactive.len(), cols);
    let mut best_branch = vec![None; inactive.len() * cols];
    for (i, track) in inactive.iter().enumerate() {
        let TrackState::Inactive { forecast, .. } = &track.state else {
            continue;
        };
        let Some(frame) = forecast.current_frame() else {
            continue;
        };
        let last_box = track.last().bbox;
        for (b, point) in forecast.current() {
            let pbox = predicted_box(&last_box, point, &scene.lh, scene.ego.as_ref(), frame).ok();
            for (j, det) in detections.iter().enumerate() {
                let iou = pbox.map_or(0.0, |p| p.iou(&det.bbox));
                let app = appearance_similarity(&track.last_appearance, &det.appearance);
                let s = pair_score(iou, point.distance(det.bev), app, th);
                if s > scores.get(i, j) {
                    scores.set(i, j, s);
                    best_branch[i * cols + j] = Some(b);
                }
            }
        }
    }
    CostMatrix { scores, best_branch }
}

/// Updates the visibility streak of every alive branch of an inactive track
/// and kills branches that stayed visible for longer than `tau_vis`.
///
/// A branch point is visible when it lies on the ground mask and its
/// predicted box overlaps no nearer detection (larger bottom edge) by
/// `occlusion_iou` or more. Returns the indices of the branches killed.
pub fn prune_forecasts(
    track: &mut Track,
    scene: &SceneModel,
    detections: &[Detection],
    frame: Frame,
    th: &MatchThresholds,
) -> Vec<usize> {
    let last_box = track.last().bbox;
    let TrackState::Inactive { forecast, .. } = &mut track.state else {
        return Vec::new();
    };
    let limit = libm::round(th.tau_vis * scene.fps) as u32;
    let mut killed = Vec::new();
    for b in 0..forecast.k() {
        if !forecast.branches[b].alive {
            continue;
        }
        let Some(point) = forecast.point_at(b, frame) else {
            continue;
        };
        let visible = scene.on_ground(point, frame)
            && match predicted_box(&last_box, point, &scene.lh, scene.ego.as_ref(), frame) {
                Ok(pbox) => detections
                    .iter()
                    .filter(|d| d.bbox.bottom() > pbox.bottom())
                    .all(|d| pbox.iou(&d.bbox) < th.occlusion_iou),
                Err(_) => false,
            };
        let branch = &mut forecast.branches[b];
        branch.visible_streak = if visible { branch.visible_streak + 1 } else { 0 };
        if branch.visible_streak > limit {
            branch.alive = false;
            killed.push(b);
        }
    }
    killed
}
