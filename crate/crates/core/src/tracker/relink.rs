use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{age, build_cost_matrix, event, lose, Detection, EventReason, SceneModel, Track, TrackEvent, TrackOutput, TrackState, TrackerConfig};
use crate::assignment::assign;
use crate::bbox::PixelBox;
use crate::geometry::px_to_bev;
use crate::{Frame, Result};

/// One box of a track produced by another tracker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackObservation {
    pub frame: Frame,
    pub id: u32,
    pub bbox: PixelBox,
    #[serde(default)]
    pub appearance: Vec<f64>,
}

/// Applies only the forecasting layer to precomputed tracks.
///
/// When an input track stops, its identity is carried by a forecast. A track
/// id that has never been seen before is first offered to the inactive
/// tracks; if it matches, it inherits the inactive identity. Output ids are
/// renumbered from 1 in order of first appearance.
pub fn relink(
    config: &TrackerConfig,
    scene: &SceneModel,
    observations: &[TrackObservation],
) -> Result<(Vec<TrackOutput>, Vec<TrackEvent>)> {
    let mut by_frame: BTreeMap<Frame, Vec<&TrackObservation>> = BTreeMap::new();
    for o in observations {
        by_frame.entry(o.frame).or_default().push(o);
    }
    let keep_frames = libm::ceil(config.obs_len as f64 * config.dt * scene.fps) as u32 + 1;
    let mut tracks: Vec<Track> = Vec::new();
    let mut external: BTreeMap<u32, usize> = BTreeMap::new();
    let mut next_id = 1;
    let (mut outputs, mut events) = (Vec::new(), Vec::new());

    let (Some(&first), Some(&last)) = (by_frame.keys().next(), by_frame.keys().next_back()) else {
        return Ok((outputs, events));
    };
    for frame in first..=last {
        let mut obs: Vec<&TrackObservation> = by_frame.remove(&frame).unwrap_or_default();
        obs.sort_by_key(|o| o.id);
        obs.dedup_by_key(|o| o.id);
        let dets: Vec<Detection> = obs
            .iter()
            .map(|o| Detection {
                frame,
                bbox: o.bbox,
                appearance: o.appearance.clone(),
                bev: px_to_bev(&scene.lh, o.bbox.bottom_center(), scene.ego.as_ref(), frame),
            })
            .collect();

        let mut seen = vec![false; tracks.len()];
        let mut fresh = Vec::new();
        for (j, o) in obs.iter().enumerate() {
            match external.get(&o.id) {
                Some(&ti) if ti < seen.len() => {
                    if !tracks[ti].is_active() {
                        events.push(event(frame, tracks[ti].id, Some(j), None, None, EventReason::Resumed));
                    }
                    seen[ti] = true;
                }
                _ => fresh.push(j),
            }
        }
        for (ti, t) in tracks.iter_mut().enumerate() {
            if t.is_active() && !seen[ti] {
                lose(t, config, scene)?;
                events.push(event(frame, t.id, None, None, None, EventReason::Lost));
            }
        }
        let expired: Vec<bool> = tracks
            .iter_mut()
            .enumerate()
            .map(|(ti, t)| !seen[ti] && !t.is_active() && age(t, config, scene, &dets, frame, &mut events))
            .collect();

        let inactive: Vec<usize> =
            (0..tracks.len()).filter(|&ti| !expired[ti] && matches!(tracks[ti].state, TrackState::Inactive { .. })).collect();
        let mut claimed = vec![None; fresh.len()];
        if !fresh.is_empty() && !inactive.is_empty() {
            let cand: Vec<Detection> = fresh.iter().map(|&j| dets[j].clone()).collect();
            let rows: Vec<&Track> = inactive.iter().map(|&ti| &tracks[ti]).collect();
            let cm = build_cost_matrix(&rows, &cand, &config.thresholds, scene);
            for (r, c) in assign(&cm.scores) {
                claimed[c] = Some(inactive[r]);
                let id = tracks[inactive[r]].id;
                events.push(event(frame, id, Some(fresh[c]), Some(cm.scores.get(r, c)), cm.best_branch(r, c), EventReason::Resumed));
            }
        }
        for (c, &j) in fresh.iter().enumerate() {
            let ti = match claimed[c] {
                Some(ti) => ti,
                None => {
                    tracks.push(Track {
                        id: next_id,
                        history: Vec::new(),
                        state: TrackState::Active,
                        last_appearance: Vec::new(),
                    });
                    events.push(event(frame, next_id, Some(j), None, None, EventReason::New));
                    next_id += 1;
                    tracks.len() - 1
                }
            };
            external.insert(obs[j].id, ti);
        }
        for (j, o) in obs.iter().enumerate() {
            let ti = external[&o.id];
            tracks[ti].observe(dets[j].clone(), keep_frames);
            outputs.push(TrackOutput { frame, id: tracks[ti].id, bbox: dets[j].bbox, bev: dets[j].bev });
        }

        // Retire expired tracks; external ids pointing at them start over.
        let mut index = Vec::with_capacity(tracks.len());
        let mut n = 0;
        for ti in 0..tracks.len() {
            let gone = expired.get(ti).copied().unwrap_or(false);
            index.push((!gone).then_some(n));
            n += usize::from(!gone);
        }
        let mut keep = index.iter();
        tracks.retain(|_| keep.next().is_some_and(Option::is_some));
        external = external.into_iter().filter_map(|(e, ti)| index[ti].map(|t| (e, t))).collect();
    }
    outputs.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.id.cmp(&b.id)));
    Ok((outputs, events))
}
