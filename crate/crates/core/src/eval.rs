//! Long-term association metrics: identity switches and transfers, lost-track
//! re-identification split by gap length, ID recall per occlusion length and
//! final displacement error of forecasts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::assignment::{assign, ScoreMatrix};
use crate::bbox::PixelBox;
use crate::forecast::Forecast;
use crate::geometry::BevPoint;
use crate::{Error, Frame, Result};

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Minimum IoU of a ground-truth/hypothesis match.
    pub iou_threshold: f64,
    /// Visibility at or above which an object counts as visible.
    pub vis_threshold: f64,
    /// Rolling window of the visibility smoothing, frames.
    pub window: usize,
    /// ID recall bucket edges, seconds, ascending.
    pub buckets: Vec<f64>,
    /// Gap length separating short from long lost-track switches, seconds.
    pub lost_split: f64,
    /// Forecast horizons for FDE, seconds.
    pub fde_horizons: [f64; 2],
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            vis_threshold: 0.1,
            window: 5,
            buckets: vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0],
            lost_split: 2.0,
            fde_horizons: [2.0, 4.0],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let sorted = self.buckets.windows(2).all(|w| w[0] < w[1]);
        if !(0.0..=1.0).contains(&self.iou_threshold) || self.window == 0 || !sorted || self.buckets.iter().any(|b| !(*b > 0.0))
        {
            return Err(Error::InvalidConfig("evaluation needs iou in [0, 1], window >= 1 and ascending positive buckets".into()));
        }
        Ok(())
    }
}

/// A box with an identity. Ground truth carries a visibility; hypotheses
/// leave it at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub frame: Frame,
    pub id: u32,
    pub bbox: PixelBox,
    pub visibility: f64,
}

impl LabeledBox {
    pub fn new(frame: Frame, id: u32, bbox: PixelBox) -> Self {
        Self { frame, id, bbox, visibility: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchPair {
    pub frame: Frame,
    pub gt: u32,
    pub hyp: u32,
}

/// Per-frame ground-truth to hypothesis matches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Correspondence {
    /// Sorted by `(frame, gt)`.
    pub pairs: Vec<MatchPair>,
    by_gt: BTreeMap<(u32, Frame), u32>,
}

impl Correspondence {
    pub fn from_pairs(mut pairs: Vec<MatchPair>) -> Self {
        pairs.sort();
        let by_gt = pairs.iter().map(|p| ((p.gt, p.frame), p.hyp)).collect();
        Self { pairs, by_gt }
    }

    /// Hypothesis matched to `gt` at `frame`.
    pub fn hyp_of(&self, gt: u32, frame: Frame) -> Option<u32> {
        self.by_gt.get(&(gt, frame)).copied()
    }
}

/// Per frame: maximum-cardinality, then maximum-IoU matching among pairs
/// with IoU at or above `iou_threshold`.
pub fn match_frames(gt: &[LabeledBox], hyp: &[LabeledBox], iou_threshold: f64) -> Correspondence {
    let mut frames: BTreeMap<Frame, (Vec<&LabeledBox>, Vec<&LabeledBox>)> = BTreeMap::new();
    for g in gt {
        frames.entry(g.frame).or_default().0.push(g);
    }
    for h in hyp {
        frames.entry(h.frame).or_default().1.push(h);
    }
    let mut pairs = Vec::new();
    for (frame, (mut gs, mut hs)) in frames {
        if gs.is_empty() || hs.is_empty() {
            continue;
        }
        gs.sort_by_key(|b| b.id);
        hs.sort_by_key(|b| b.id);
        // Every admissible pair outweighs any sum of IoUs.
        let big = gs.len().min(hs.len()) as f64 + 1.0;
        let mut w = ScoreMatrix::zeros(gs.len(), hs.len());
        for (i, g) in gs.iter().enumerate() {
            for (j, h) in hs.iter().enumerate() {
                let iou = g.bbox.iou(&h.bbox);
                if iou >= iou_threshold && iou > 0.0 {
                    w.set(i, j, big + iou);
                }
            }
        }
        pairs.extend(assign(&w).into_iter().map(|(i, j)| MatchPair { frame, gt: gs[i].id, hyp: hs[j].id }));
    }
    Correspondence::from_pairs(pairs)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdErrors {
    pub idsw: usize,
    pub idtr: usize,
    pub id_lost_short: usize,
    pub id_lost_long: usize,
}

/// Counts identity switches per ground truth and identity transfers per
/// hypothesis between consecutive matched frames. Each switch is also
/// classified by the unmatched gap before it: longer than `lost_split`
/// seconds is long, anything else (including no gap) is short.
pub fn count_id_errors(corr: &Correspondence, fps: f64, lost_split: f64) -> IdErrors {
    let mut out = IdErrors::default();
    let mut last_of_gt: BTreeMap<u32, (Frame, u32)> = BTreeMap::new();
    let mut last_of_hyp: BTreeMap<u32, u32> = BTreeMap::new();
    for p in &corr.pairs {
        if let Some((prev_frame, prev_hyp)) = last_of_gt.insert(p.gt, (p.frame, p.hyp)) {
            if prev_hyp != p.hyp {
                out.idsw += 1;
                let gap = (p.frame - prev_frame - 1) as f64 / fps;
                if gap > lost_split {
                    out.id_lost_long += 1;
                } else {
                    out.id_lost_short += 1;
                }
            }
        }
        if let Some(prev_gt) = last_of_hyp.insert(p.hyp, p.gt) {
            if prev_gt != p.gt {
                out.idtr += 1;
            }
        }
    }
    out
}

/// An occlusion of one ground-truth object with visible frames on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcclusionEvent {
    pub gt_id: u32,
    pub start_frame: Frame,
    pub end_frame: Frame,
    pub pre_frame: Frame,
    pub post_frame: Frame,
    pub duration: f64,
}

/// Rolling-window opening of visibility flags: a frame stays visible only if
/// some run of `window` consecutive visible frames covers it. Positions
/// outside the slice count as visible. Idempotent; invisible runs keep their
/// exact length and visible runs shorter than the window are absorbed.
pub fn rolling_min(flags: &[bool], window: usize) -> Vec<bool> {
    let n = flags.len();
    let w = window.max(1);
    let mut out = vec![false; n];
    if n == 0 {
        return out;
    }
    // Length of the visible run ending at each index.
    let mut ends = vec![0usize; n];
    let mut run = 0usize;
    for i in 0..n {
        run = if flags[i] { run + 1 } else { 0 };
        ends[i] = run;
    }
    // Window `[end + 1 - w, end]`, clipped to the slice.
    for end in 0..n + w - 1 {
        let last = end.min(n - 1);
        let first = (end + 1).saturating_sub(w);
        if first <= last && ends[last] > last - first {
            out[first..=last].iter_mut().for_each(|v| *v = true);
        }
    }
    out
}

/// Occlusion events from per-frame ground-truth visibility. Frames inside an
/// object's lifetime without a record count as invisible.
pub fn occlusion_components(gt: &[LabeledBox], vis_threshold: f64, window: usize, fps: f64) -> Vec<OcclusionEvent> {
    let mut series: BTreeMap<u32, BTreeMap<Frame, f64>> = BTreeMap::new();
    for g in gt {
        series.entry(g.id).or_default().insert(g.frame, g.visibility);
    }
    let mut events = Vec::new();
    for (id, vis) in series {
        let (Some((&first, _)), Some((&last, _))) = (vis.iter().next(), vis.iter().next_back()) else {
            continue;
        };
        let flags: Vec<bool> =
            (first..=last).map(|f| vis.get(&f).is_some_and(|v| *v >= vis_threshold)).collect();
        let smooth = rolling_min(&flags, window);
        let mut i = 0;
        while i < smooth.len() {
            if smooth[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < smooth.len() && !smooth[i] {
                i += 1;
            }
            if start > 0 && i < smooth.len() {
                let f = |k: usize| first + k as Frame;
                events.push(OcclusionEvent {
                    gt_id: id,
                    start_frame: f(start),
                    end_frame: f(i - 1),
                    pre_frame: f(start - 1),
                    post_frame: f(i),
                    duration: (i - start) as f64 / fps,
                });
            }
        }
    }
    events
}

/// Recovered and total occlusion events with duration in `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallBucket {
    pub lower: f64,
    /// `None` for the last, open-ended bucket.
    pub upper: Option<f64>,
    pub recovered: usize,
    pub total: usize,
}

impl RecallBucket {
    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.recovered as f64 / self.total as f64
        }
    }
}

/// Whether the object carries the same hypothesis id on both sides of the
/// occlusion.
pub fn is_recovered(e: &OcclusionEvent, corr: &Correspondence) -> bool {
    matches!((corr.hyp_of(e.gt_id, e.pre_frame), corr.hyp_of(e.gt_id, e.post_frame)), (Some(a), Some(b)) if a == b)
}

/// ID recall per duration bucket. Edges split `[0, inf)` into
/// `[0, e0), [e0, e1), ..., [e_last, inf)`; empty buckets are omitted.
pub fn id_recall(events: &[OcclusionEvent], corr: &Correspondence, edges: &[f64]) -> Vec<RecallBucket> {
    let mut buckets: Vec<RecallBucket> = core::iter::once(0.0)
        .chain(edges.iter().copied())
        .enumerate()
        .map(|(i, lower)| RecallBucket { lower, upper: edges.get(i).copied(), recovered: 0, total: 0 })
        .collect();
    for e in events {
        let b = edges.iter().take_while(|&&edge| e.duration >= edge).count();
        buckets[b].total += 1;
        if is_recovered(e, corr) {
            buckets[b].recovered += 1;
        }
    }
    buckets.retain(|b| b.total > 0);
    buckets
}

/// A forecast with the ground-truth future of its track.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastCase {
    pub track_id: u32,
    pub forecast: Forecast,
    pub future: Vec<(Frame, BevPoint)>,
}

/// Mean over tracks of the smallest branch error at each horizon (seconds).
pub fn fde(cases: &[ForecastCase], horizons: &[f64], fps: f64) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; horizons.len()];
    let mut missing = Vec::new();
    for c in cases {
        for (k, h) in horizons.iter().enumerate() {
            let frame = c.forecast.created_frame + libm::round(h * fps) as Frame;
            let truth = c.future.iter().find(|(f, _)| *f == frame).map(|(_, p)| *p);
            let best = (0..c.forecast.k())
                .filter_map(|b| c.forecast.point_at(b, frame))
                .map(|p| truth.map(|t| p.distance(t)))
                .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)));
            match best {
                Some(d) if d.is_finite() => sums[k] += d,
                _ => {
                    if missing.last() != Some(&c.track_id) {
                        missing.push(c.track_id);
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingGroundTruth(missing));
    }
    let n = cases.len().max(1) as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Everything a run is scored on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub idsw: usize,
    pub idtr: usize,
    pub id_lost_short: usize,
    pub id_lost_long: usize,
    pub occlusions: usize,
    pub id_recall: Vec<RecallBucket>,
    pub fde_short: Option<f64>,
    pub fde_long: Option<f64>,
}

impl EvalReport {
    /// Flat CSV, one row per count and per bucket.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,lower,upper,recovered,total,value\n");
        for (name, v) in [
            ("idsw", self.idsw),
            ("idtr", self.idtr),
            ("id_lost_short", self.id_lost_short),
            ("id_lost_long", self.id_lost_long),
            ("occlusions", self.occlusions),
        ] {
            let _ = writeln!(s, "{name},,,,,{v}");
        }
        for (name, v) in [("fde_short", self.fde_short), ("fde_long", self.fde_long)] {
            if let Some(v) = v {
                let _ = writeln!(s, "{name},,,,,{v}");
            }
        }
        for b in &self.id_recall {
            let upper = b.upper.map(|u| alloc::format!("{u}")).unwrap_or_default();
            let _ = writeln!(s, "id_recall,{},{upper},{},{},{}", b.lower, b.recovered, b.total, b.recall());
        }
        s
    }

    /// Percentage change of each count relative to `baseline`; `None` where
    /// the baseline count is zero.
    pub fn percent_change(&self, baseline: &EvalReport) -> BTreeMap<&'static str, Option<f64>> {
        let pct = |new: usize, old: usize| (old > 0).then(|| 100.0 * (new as f64 - old as f64) / old as f64);
        [
            ("idsw", pct(self.idsw, baseline.idsw)),
            ("idtr", pct(self.idtr, baseline.idtr)),
            ("id_lost_short", pct(self.id_lost_short, baseline.id_lost_short)),
            ("id_lost_long", pct(self.id_lost_long, baseline.id_lost_long)),
        ]
        .into_iter()
        .collect()
    }

    pub fn total_recall(&self) -> (usize, usize) {
        self.id_recall.iter().fold((0, 0), |(r, t), b| (r + b.recovered, t + b.total))
    }

    /// Recovered and total events of buckets starting at or above `lower`.
    pub fn recall_from(&self, lower: f64) -> (usize, usize) {
        self.id_recall.iter().filter(|b| b.lower >= lower).fold((0, 0), |(r, t), b| (r + b.recovered, t + b.total))
    }

    /// Adds the counts of another sequence's report. Buckets are matched by
    /// their lower edge. FDE values are averages and do not add, so they are
    /// cleared unless `other` has none.
    pub fn merge(&mut self, other: &EvalReport) {
        self.idsw += other.idsw;
        self.idtr += other.idtr;
        self.id_lost_short += other.id_lost_short;
        self.id_lost_long += other.id_lost_long;
        self.occlusions += other.occlusions;
        for b in &other.id_recall {
            match self.id_recall.iter_mut().find(|m| m.lower == b.lower) {
                Some(m) => {
                    m.recovered += b.recovered;
                    m.total += b.total;
                }
                None => self.id_recall.push(*b),
            }
        }
        self.id_recall.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        if other.fde_short.is_some() || other.fde_long.is_some() {
            self.fde_short = None;
            self.fde_long = None;
        }
    }

    pub fn empty() -> Self {
        Self { idsw: 0, idtr: 0, id_lost_short: 0, id_lost_long: 0, occlusions: 0, id_recall: Vec::new(), fde_short: None, fde_long: None }
    }
}

/// Scores a hypothesis against ground truth.
pub fn evaluate(gt: &[LabeledBox], hyp: &[LabeledBox], fps: f64, cfg: &EvalConfig) -> EvalReport {
    let corr = match_frames(gt, hyp, cfg.iou_threshold);
    let errors = count_id_errors(&corr, fps, cfg.lost_split);
    let events = occlusion_components(gt, cfg.vis_threshold, cfg.window, fps);
    EvalReport {
        idsw: errors.idsw,
        idtr: errors.idtr,
        id_lost_short: errors.id_lost_short,
        id_lost_long: errors.id_lost_long,
        occlusions: events.len(),
        id_recall: id_recall(&events, &corr, &cfg.buckets),
        fde_short: None,
        fde_long: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{forecast, MotionModelSpec, ObservedTrajectory};

    fn bx(x: f64) -> PixelBox {
        PixelBox::new(x, 0.0, 10.0, 20.0)
    }

    fn pairs(v: &[(Frame, u32, u32)]) -> Correspondence {
        Correspondence::from_pairs(v.iter().map(|&(frame, gt, hyp)| MatchPair { frame, gt, hyp }).collect())
    }

    #[test]
    fn identical_boxes_match() {
        let gt: Vec<_> = (1..=3).flat_map(|f| (0..3).map(move |i| LabeledBox::new(f, i, bx(30.0 * i as f64)))).collect();
        let c = match_frames(&gt, &gt, 0.5);
        assert_eq!(c.pairs.len(), 9);
        assert!(c.pairs.iter().all(|p| p.gt == p.hyp));
    }

    #[test]
    fn better_overlap_wins() {
        let gt = [LabeledBox::new(1, 1, bx(0.0))];
        let hyp = [LabeledBox::new(1, 5, bx(2.0)), LabeledBox::new(1, 6, bx(1.0))];
        assert_eq!(match_frames(&gt, &hyp, 0.5).pairs, vec![MatchPair { frame: 1, gt: 1, hyp: 6 }]);
        let far = [LabeledBox::new(1, 5, bx(50.0))];
        assert!(match_frames(&gt, &far, 0.5).pairs.is_empty());
    }

    #[test]
    fn cardinality_before_iou() {
        // Greedy on IoU would pair g1-h1 and leave g2 unmatched.
        let gt = [LabeledBox::new(1, 1, bx(0.0)), LabeledBox::new(1, 2, bx(3.0))];
        let hyp = [LabeledBox::new(1, 1, bx(1.0)), LabeledBox::new(1, 2, bx(-2.0))];
        assert_eq!(match_frames(&gt, &hyp, 0.5).pairs.len(), 2);
    }

    #[test]
    fn switch_counting() {
        let mut v: Vec<_> = (1..=50).map(|f| (f, 1, 1)).collect();
        v.extend((51..=100).map(|f| (f, 1, 2)));
        let e = count_id_errors(&pairs(&v), 20.0, 2.0);
        assert_eq!(e, IdErrors { idsw: 1, idtr: 0, id_lost_short: 1, id_lost_long: 0 });
        let perfect: Vec<_> = (1..=50).map(|f| (f, 1, 1)).collect();
        assert_eq!(count_id_errors(&pairs(&perfect), 20.0, 2.0), IdErrors::default());
    }

    #[test]
    fn lost_split_fixture() {
        // Three objects at 10 fps: gt 1 tracked throughout, gt 2 hidden 3 s
        // and re-identified, gt 3 hidden 1 s and switched.
        let mut v = Vec::new();
        for f in 1..=100 {
            v.push((f, 1, 1));
            if !(31..61).contains(&f) {
                v.push((f, 2, 2));
            }
            if !(41..51).contains(&f) {
                v.push((f, 3, if f < 41 { 3 } else { 4 }));
            }
        }
        let e = count_id_errors(&pairs(&v), 10.0, 2.0);
        assert_eq!(e, IdErrors { idsw: 1, idtr: 0, id_lost_short: 1, id_lost_long: 0 });
    }

    #[test]
    fn long_gap_switch() {
        let mut v: Vec<_> = (1..=10).map(|f| (f, 1, 1)).collect();
        v.extend((41..=50).map(|f| (f, 1, 2)));
        let e = count_id_errors(&pairs(&v), 10.0, 2.0);
        assert_eq!((e.id_lost_short, e.id_lost_long), (0, 1));
        // Hyp 1 moves to another object: a transfer.
        let t = pairs(&[(1, 1, 1), (2, 2, 1)]);
        assert_eq!(count_id_errors(&t, 10.0, 2.0).idtr, 1);
    }

    fn vis_track(id: u32, vis: &[f64]) -> Vec<LabeledBox> {
        vis.iter()
            .enumerate()
            .map(|(i, v)| LabeledBox { frame: i as Frame + 1, id, bbox: bx(0.0), visibility: *v })
            .collect()
    }

    #[test]
    fn dip_of_window_length() {
        let mut v = vec![1.0; 30];
        v[10..15].iter_mut().for_each(|x| *x = 0.05);
        let e = occlusion_components(&vis_track(3, &v), 0.1, 5, 10.0);
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].start_frame, e[0].end_frame, e[0].pre_frame, e[0].post_frame), (11, 15, 10, 16));
        assert!((e[0].duration - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_anchor_no_event() {
        let mut v = vec![1.0; 30];
        v[..8].iter_mut().for_each(|x| *x = 0.0);
        assert!(occlusion_components(&vis_track(1, &v), 0.1, 5, 10.0).is_empty());
    }

    #[test]
    fn flicker_merges() {
        let mut v = vec![1.0; 30];
        for (i, x) in [1.0, 0.0, 1.0, 0.0, 1.0, 0.0].iter().enumerate() {
            v[10 + i] = *x;
        }
        let e = occlusion_components(&vis_track(1, &v), 0.1, 5, 10.0);
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].start_frame, e[0].end_frame), (12, 16));
    }

    #[test]
    fn opening_is_idempotent() {
        let flags = [true, false, true, true, false, true, true, true, true, true, false, true];
        let once = rolling_min(&flags, 3);
        assert_eq!(rolling_min(&once, 3), once);
        // Short edge runs survive through the padding.
        assert!(once[0]);
        assert!(once[11]);
        assert!(!once[2]);
    }

    #[test]
    fn recall_buckets() {
        let ev = |gt_id, duration, pre, post| OcclusionEvent { gt_id, start_frame: pre + 1, end_frame: post - 1, pre_frame: pre, post_frame: post, duration };
        let events = [ev(1, 0.7, 10, 18), ev(2, 2.5, 10, 36), ev(3, 2.9, 10, 40)];
        let corr = pairs(&[(10, 1, 1), (18, 1, 1), (10, 2, 2), (36, 2, 7), (10, 3, 3), (40, 3, 3)]);
        let b = id_recall(&events, &corr, &[0.5, 1.0, 2.0, 3.0]);
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].lower, b[0].upper, b[0].recovered, b[0].total), (0.5, Some(1.0), 1, 1));
        assert_eq!((b[1].lower, b[1].upper, b[1].recovered, b[1].total), (2.0, Some(3.0), 1, 2));
        assert!(id_recall(&[], &corr, &[1.0]).is_empty());
    }

    fn moving_case(model: MotionModelSpec, fps: f64) -> ForecastCase {
        let v = BevPoint::new(1.0, 0.0);
        let obs = ObservedTrajectory {
            points: vec![BevPoint::ZERO],
            dt: 0.4,
            fps,
            last_frame: 10,
            extrapolated_prefix: 0,
            velocity: v,
        };
        let fc = forecast(&model, &obs, (4.0 * fps) as usize).unwrap();
        let future = (11..=10 + (5.0 * fps) as Frame).map(|f| (f, v * ((f - 10) as f64 / fps))).collect();
        ForecastCase { track_id: 1, forecast: fc, future }
    }

    #[test]
    fn fde_values() {
        let cv = fde(&[moving_case(MotionModelSpec::kalman_cv(), 20.0)], &[2.0, 4.0], 20.0).unwrap();
        assert!(cv.iter().all(|e| e.abs() < 1e-9));
        let st = fde(&[moving_case(MotionModelSpec::static_model(), 20.0)], &[2.0, 4.0], 20.0).unwrap();
        assert_eq!(st, vec![2.0, 4.0]);
        let fan = fde(&[moving_case(MotionModelSpec::default(), 20.0)], &[2.0, 4.0], 20.0).unwrap();
        assert!(fan.iter().all(|e| e.abs() < 1e-9));
        let mut short = moving_case(MotionModelSpec::kalman_cv(), 20.0);
        short.future.truncate(50);
        assert_eq!(fde(&[short], &[2.0, 4.0], 20.0), Err(Error::MissingGroundTruth(vec![1])));
    }
}
