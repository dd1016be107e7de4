//! Synthetic scenes: a pinhole camera over flat ground, agents walking along
//! waypoints and box-shaped occluders. Produces detections with appearance
//! descriptors, ground truth with visibility, a ground point cloud, the true
//! homography and the camera's egomotion.

mod camera;
mod suite;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

pub use camera::CameraSpec;
pub use suite::{build_suite, junction_suite, linear_suite, SuiteSpec};

use crate::bbox::PixelBox;
use crate::geometry::{BevPoint, EgomotionTrack, Homography, PixelPoint, Point3};
use crate::tracker::GroundMask;
use crate::{Error, Frame, Result};

/// Default visibility below which no detection is emitted.
pub const DETECTION_CUTOFF: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: u32,
    /// World BEV path; a single waypoint means the agent stands still.
    pub waypoints: Vec<BevPoint>,
    /// Meters per second.
    pub speed: f64,
    pub height: f64,
    pub width: f64,
    pub appearance_seed: u64,
    /// Seconds after the first frame at which the agent appears.
    #[serde(default)]
    pub start_time: f64,
}

/// Upright box standing on the ground, world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    pub min: BevPoint,
    pub max: BevPoint,
    pub height: f64,
}

fn default_dim() -> usize {
    64
}

fn default_cloud() -> usize {
    2000
}

fn default_cloud_noise() -> f64 {
    0.01
}

fn default_cutoff() -> f64 {
    DETECTION_CUTOFF
}

/// Complete description of a synthetic sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub camera: CameraSpec,
    /// Ground is `|x| <= extent`, `0 <= y <= extent` in world coordinates.
    pub ground_extent: f64,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub occluders: Vec<Occluder>,
    pub fps: f64,
    /// Seconds.
    pub duration: f64,
    /// Pixel sigma added to every box edge.
    pub detection_noise: f64,
    /// Per-component sigma added to appearance descriptors before
    /// normalization.
    pub appearance_noise: f64,
    pub seed: u64,
    /// Camera translation between consecutive frames; the last entry repeats.
    #[serde(default)]
    pub camera_path: Vec<BevPoint>,
    #[serde(default = "default_dim")]
    pub appearance_dim: usize,
    #[serde(default = "default_cloud")]
    pub point_cloud_points: usize,
    /// Depth sigma of point cloud samples, meters.
    #[serde(default = "default_cloud_noise")]
    pub point_cloud_noise: f64,
    /// Minimum visibility of an emitted detection.
    #[serde(default = "default_cutoff")]
    pub detection_cutoff: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.fps > 0.0) || !(self.duration > 0.0) {
            return bad("fps and duration must be positive".into());
        }
        if !(self.ground_extent > 0.0) || self.detection_noise < 0.0 || self.appearance_noise < 0.0 {
            return bad("ground_extent must be positive and noise levels non-negative".into());
        }
        if self.appearance_dim == 0 || self.point_cloud_noise < 0.0 || !(0.0..=1.0).contains(&self.detection_cutoff) {
            return bad("appearance_dim must be >= 1, point_cloud_noise >= 0 and detection_cutoff in [0, 1]".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if !(a.speed > 0.0) || a.waypoints.is_empty() || !(a.height > 0.0) || !(a.width > 0.0) || a.start_time < 0.0 {
                return bad(alloc::format!("agent {} needs speed, height, width > 0 and at least one waypoint", a.id));
            }
            if self.agents[..i].iter().any(|b| b.id == a.id) {
                return bad(alloc::format!("duplicate agent id {}", a.id));
            }
        }
        for o in &self.occluders {
            if !(o.max.x > o.min.x && o.max.y > o.min.y && o.height > 0.0) {
                return bad(alloc::format!("degenerate occluder {o:?}"));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> u32 {
        libm::floor(self.duration * self.fps + 1e-9) as u32
    }

    pub fn time(&self, frame: Frame) -> f64 {
        (frame - 1) as f64 / self.fps
    }

    /// Cumulative camera offsets, frame 1 first.
    pub fn egomotion(&self) -> EgomotionTrack {
        let n = self.frame_count().max(1) as usize;
        let deltas: Vec<BevPoint> = (0..n - 1)
            .map(|i| match self.camera_path.len() {
                0 => BevPoint::ZERO,
                len => self.camera_path[i.min(len - 1)],
            })
            .collect();
        EgomotionTrack::from_deltas(1, &deltas)
    }

    /// True pixel to camera-local BEV map.
    pub fn homography(&self) -> Homography {
        self.camera.homography()
    }
}

impl AgentSpec {
    /// World position at `t` seconds, `None` before the start or after the
    /// last waypoint.
    pub fn position(&self, t: f64) -> Option<BevPoint> {
        let dt = t - self.start_time;
        if dt < -1e-12 {
            return None;
        }
        if self.waypoints.len() == 1 {
            return Some(self.waypoints[0]);
        }
        let mut s = self.speed * dt.max(0.0);
        for w in self.waypoints.windows(2) {
            let len = w[0].distance(w[1]);
            if s <= len {
                return Some(if len > 0.0 { w[0] + (w[1] - w[0]) * (s / len) } else { w[0] });
            }
            s -= len;
        }
        None
    }

    /// Seconds at which the agent reaches its last waypoint.
    pub fn end_time(&self) -> f64 {
        let len: f64 = self.waypoints.windows(2).map(|w| w[0].distance(w[1])).sum();
        if self.waypoints.len() == 1 {
            f64::INFINITY
        } else {
            self.start_time + len / self.speed
        }
    }
}

/// Ground-truth record of one agent at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtRecord {
    pub frame: Frame,
    pub id: u32,
    pub bbox: PixelBox,
    /// World BEV position.
    pub bev: BevPoint,
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDetection {
    pub frame: Frame,
    pub bbox: PixelBox,
    pub appearance: Vec<f64>,
    /// Agent that produced the detection.
    pub gt_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub frames: u32,
    pub fps: f64,
    /// Sorted by frame, then agent order.
    pub detections: Vec<SimDetection>,
    /// Sorted by frame, then agent order.
    pub gt: Vec<GtRecord>,
    /// Ground samples in camera coordinates at the first frame.
    pub point_cloud: Vec<Point3>,
    pub homography: Homography,
    pub egomotion: EgomotionTrack,
}

/// Image box of an agent standing at a camera-local ground point, with its
/// camera depth. `None` behind the camera.
pub fn agent_box(cam: &CameraSpec, local: BevPoint, width: f64, height: f64) -> Option<(PixelBox, f64)> {
    let foot = Point3::new(local.x, local.y, 0.0);
    let depth = cam.depth(foot);
    let ground = cam.project(foot)?;
    let top = cam.project(Point3::new(local.x, local.y, height))?;
    let half = 0.5 * cam.focal * width / depth;
    Some((PixelBox::from_corners(ground.u - half, top.v, ground.u + half, ground.v), depth))
}

/// Image bounding box of an occluder at a camera offset; `None` unless all
/// corners are in front of the camera.
pub fn occluder_box(cam: &CameraSpec, o: &Occluder, offset: BevPoint) -> Option<PixelBox> {
    let (mut lo, mut hi) = (PixelPoint::new(f64::INFINITY, f64::INFINITY), PixelPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for x in [o.min.x, o.max.x] {
        for y in [o.min.y, o.max.y] {
            for z in [0.0, o.height] {
                let p = cam.project(Point3::new(x - offset.x, y - offset.y, z))?;
                lo = PixelPoint::new(lo.u.min(p.u), lo.v.min(p.v));
                hi = PixelPoint::new(hi.u.max(p.u), hi.v.max(p.v));
            }
        }
    }
    Some(PixelBox::from_corners(lo.u, lo.v, hi.u, hi.v))
}

/// Fraction of `target` covered by the union of `covers`.
pub fn covered_fraction(target: &PixelBox, covers: &[PixelBox]) -> f64 {
    let area = target.area();
    if area <= 0.0 {
        return 1.0;
    }
    let clip: Vec<PixelBox> = covers
        .iter()
        .filter(|c| c.intersection_area(target) > 0.0)
        .map(|c| {
            PixelBox::from_corners(
                c.left.max(target.left),
                c.top.max(target.top),
                c.right().min(target.right()),
                c.bottom().min(target.bottom()),
            )
        })
        .collect();
    let mut xs: Vec<f64> = clip.iter().flat_map(|c| [c.left, c.right()]).collect();
    let mut ys: Vec<f64> = clip.iter().flat_map(|c| [c.top, c.bottom()]).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.dedup();
    ys.dedup();
    let mut covered = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let (cx, cy) = (0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1]));
            if clip.iter().any(|c| c.left <= cx && cx <= c.right() && c.top <= cy && cy <= c.bottom()) {
                covered += (xw[1] - xw[0]) * (yw[1] - yw[0]);
            }
        }
    }
    (covered / area).clamp(0.0, 1.0)
}

/// The four regions around the image, as boxes.
fn outside_image(cam: &CameraSpec) -> [PixelBox; 4] {
    let (w, h) = (cam.image_width as f64, cam.image_height as f64);
    let big = 1e9;
    [
        PixelBox::from_corners(-big, -big, 0.0, big),
        PixelBox::from_corners(w, -big, big, big),
        PixelBox::from_corners(-big, -big, big, 0.0),
        PixelBox::from_corners(-big, h, big, big),
    ]
}

/// Boxes of the occluders standing nearer than camera-local depth `y`.
fn occluders_in_front(s: &Scenario, offset: BevPoint, y: f64) -> Vec<PixelBox> {
    s.occluders
        .iter()
        .filter(|o| o.min.y - offset.y < y)
        .filter_map(|o| occluder_box(&s.camera, o, offset))
        .collect()
}

fn unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    normalized(v)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Noiseless ground truth of every agent present at every frame, in frame
/// then agent order.
pub fn ground_truth(s: &Scenario) -> Vec<GtRecord> {
    let cam = &s.camera;
    let ego = s.egomotion();
    let border = outside_image(cam);
    let mut gt = Vec::new();
    for frame in 1..=s.frame_count() {
        let t = s.time(frame);
        let offset = ego.offset(frame);
        // (agent index, world position, box, depth)
        let present: Vec<(usize, BevPoint, PixelBox, f64)> = s
            .agents
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let world = a.position(t)?;
                let (b, depth) = agent_box(cam, world - offset, a.width, a.height)?;
                Some((i, world, b, depth))
            })
            .collect();
        for &(i, world, bbox, depth) in &present {
            let mut covers: Vec<PixelBox> = border.to_vec();
            covers.extend(present.iter().filter(|o| o.3 < depth).map(|o| o.2));
            covers.extend(occluders_in_front(s, offset, world.y - offset.y));
            let visibility = 1.0 - covered_fraction(&bbox, &covers);
            gt.push(GtRecord { frame, id: s.agents[i].id, bbox, bev: world, visibility });
        }
    }
    gt
}

/// Renders a scenario.
pub fn generate(s: &Scenario) -> Result<SimOutput> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let noise = Normal::new(0.0, s.detection_noise).map_err(|_| Error::InvalidScenario("detection_noise".into()))?;
    let app_noise = Normal::new(0.0, s.appearance_noise).map_err(|_| Error::InvalidScenario("appearance_noise".into()))?;
    let bases: Vec<(u32, Vec<f64>)> = s.agents.iter().map(|a| (a.id, unit_vector(s.appearance_dim, a.appearance_seed))).collect();
    let gt = ground_truth(s);
    let mut detections = Vec::new();
    for g in gt.iter().filter(|g| g.visibility >= s.detection_cutoff) {
        let e: [f64; 4] = core::array::from_fn(|_| noise.sample(&mut rng));
        let b = g.bbox;
        let det = PixelBox::from_corners(b.left + e[0], b.top + e[1], b.right() + e[2], b.bottom() + e[3]);
        let base = &bases.iter().find(|(id, _)| *id == g.id).expect("known agent").1;
        let appearance = normalized(base.iter().map(|x| x + app_noise.sample(&mut rng)).collect());
        if det.is_valid() {
            detections.push(SimDetection { frame: g.frame, bbox: det, appearance, gt_id: g.id });
        }
    }
    Ok(SimOutput {
        frames: s.frame_count(),
        fps: s.fps,
        detections,
        gt,
        point_cloud: point_cloud(s),
        homography: s.homography(),
        egomotion: s.egomotion(),
    })
}

/// Depth-map style samples at the first frame: random pixels back-projected
/// to the first surface they see (ground or occluder front), with Gaussian
/// depth noise. Camera coordinates.
pub fn point_cloud(s: &Scenario) -> Vec<Point3> {
    let cam = &s.camera;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x5EED_C10D);
    let depth_noise = Normal::new(0.0, s.point_cloud_noise).expect("validated");
    let occ: Vec<(PixelBox, f64)> = s
        .occluders
        .iter()
        .filter_map(|o| {
            let b = occluder_box(cam, o, BevPoint::ZERO)?;
            let center = Point3::new(0.5 * (o.min.x + o.max.x), o.min.y, 0.5 * o.height);
            Some((b, cam.depth(center)))
        })
        .collect();
    let mut out = Vec::with_capacity(s.point_cloud_points);
    let mut attempts = 0;
    while out.len() < s.point_cloud_points && attempts < 50 * s.point_cloud_points.max(1) {
        attempts += 1;
        let p = PixelPoint::new(
            rng.random::<f64>() * cam.image_width as f64,
            rng.random::<f64>() * cam.image_height as f64,
        );
        let ground = cam.ground_hit(p).filter(|(_, b)| on_ground(s, *b));
        let blocker = occ
            .iter()
            .filter(|(b, _)| b.left <= p.u && p.u <= b.right() && b.top <= p.v && p.v <= b.bottom())
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        let depth = match ground {
            Some((q, _)) if q.z < blocker => q.z,
            _ if blocker.is_finite() => blocker,
            _ => continue,
        };
        let z = depth + depth_noise.sample(&mut rng);
        let r = cam.ray(p);
        out.push(Point3::new(r.x * z, r.y * z, z));
    }
    out
}

fn on_ground(s: &Scenario, p: BevPoint) -> bool {
    p.x.abs() <= s.ground_extent && (0.0..=s.ground_extent).contains(&p.y)
}

/// Ground the camera sees at the first frame, camera-local: inside the
/// ground extent, inside the image and not hidden behind an occluder.
pub fn visible_ground_mask(s: &Scenario, cell: f64) -> Result<GroundMask> {
    let cam = &s.camera;
    let e = s.ground_extent;
    let (w, h) = (cam.image_width as f64, cam.image_height as f64);
    GroundMask::from_fn(BevPoint::new(-e, 0.0), BevPoint::new(e, e), cell, |p| {
        let Some(px) = cam.project(Point3::new(p.x, p.y, 0.0)) else {
            return false;
        };
        if !((0.0..w).contains(&px.u) && (0.0..h).contains(&px.v)) {
            return false;
        }
        !occluders_in_front(s, BevPoint::ZERO, p.y)
            .iter()
            .any(|b| b.left <= px.u && px.u <= b.right() && b.top <= px.v && px.v <= b.bottom())
    })
}

/// Pixel pairs of the same world ground points seen at `frame - 1` and
/// `frame`, with Gaussian BEV noise of `bev_noise` meters on each side.
/// Points are drawn from the near field, 8 to 20 m ahead of the camera.
pub fn ground_correspondences(
    s: &Scenario,
    frame: Frame,
    n: usize,
    bev_noise: f64,
    seed: u64,
) -> Result<(Vec<PixelPoint>, Vec<PixelPoint>)> {
    if frame < 2 {
        return Err(Error::InvalidScenario("correspondences need a previous frame".into()));
    }
    let ego = s.egomotion();
    let (prev_off, cur_off) = (ego.offset(frame - 1), ego.offset(frame));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, bev_noise).map_err(|_| Error::InvalidScenario("bev_noise".into()))?;
    let mut prev = Vec::with_capacity(n);
    let mut cur = Vec::with_capacity(n);
    for _ in 0..n {
        let local = BevPoint::new(rng.random_range(-5.0..5.0), rng.random_range(8.0..20.0));
        let world = local + prev_off;
        let mut jitter = || BevPoint::new(noise.sample(&mut rng), noise.sample(&mut rng));
        let a = world - prev_off + jitter();
        let b = world - cur_off + jitter();
        let pa = s.camera.project(Point3::new(a.x, a.y, 0.0));
        let pb = s.camera.project(Point3::new(b.x, b.y, 0.0));
        if let (Some(pa), Some(pb)) = (pa, pb) {
            prev.push(pa);
            cur.push(pb);
        }
    }
    Ok((prev, cur))
}
