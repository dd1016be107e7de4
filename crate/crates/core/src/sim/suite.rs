//! Benchmark suites of constructed occlusions.
//!
//! Every agent walks a straight line (or turns once) and disappears behind a
//! wall built for it, so each agent has exactly one occlusion event. Agents
//! of a scene enter one after another on separate lanes; walls are only tall
//! enough to hide their own agent.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{agent_box, ground_truth, occluder_box, AgentSpec, CameraSpec, Occluder, Scenario};
use crate::eval::{occlusion_components, LabeledBox};
use crate::geometry::BevPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSpec {
    pub scenes: usize,
    pub agents_per_scene: usize,
    pub seed: u64,
    /// Heading change in degrees at the start of the occlusion; the sign is
    /// drawn per agent. Zero gives straight walkers.
    pub turn: f64,
    /// Range of the time, in seconds, the agent spends fully behind its
    /// wall. Stratified over all agents of the suite.
    pub cover_min: f64,
    pub cover_max: f64,
    /// Largest angle, degrees, between a walking direction and the image
    /// x axis.
    pub max_heading: f64,
    pub fps: f64,
    pub detection_noise: f64,
    pub appearance_noise: f64,
    pub camera: CameraSpec,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            scenes: 20,
            agents_per_scene: 3,
            seed: 0,
            turn: 0.0,
            cover_min: 0.3,
            cover_max: 5.0,
            max_heading: 50.0,
            fps: 20.0,
            detection_noise: 1.0,
            appearance_noise: 0.02,
            camera: CameraSpec { height: 6.0, tilt: 20.0, focal: 1200.0, image_width: 1920, image_height: 1080 },
        }
    }
}

/// Visibility threshold and window used to check that each agent has
/// exactly one occlusion.
const VIS_THRESHOLD: f64 = 0.1;
const VIS_WINDOW: usize = 5;
/// Longest accepted occlusion, seconds.
const MAX_EVENT: f64 = 5.9;
const MIN_EVENT: f64 = 0.5;
const WALL_DEPTH: f64 = 0.3;
const WALL_GAP: f64 = 2.0;
const CLEARANCE: f64 = 1.0;
const TRIES: usize = 400;

/// Straight walkers, 20 scenes of 3 agents.
pub fn linear_suite(seed: u64) -> Result<Vec<Scenario>> {
    build_suite(&SuiteSpec { seed, ..SuiteSpec::default() })
}

/// Agents turn by 30 degrees left or right when they go out of sight.
pub fn junction_suite(seed: u64) -> Result<Vec<Scenario>> {
    build_suite(&SuiteSpec { seed, turn: 30.0, ..SuiteSpec::default() })
}

pub fn build_suite(spec: &SuiteSpec) -> Result<Vec<Scenario>> {
    spec.camera.validate()?;
    if spec.scenes == 0 || spec.agents_per_scene == 0 || !(spec.cover_max >= spec.cover_min) || spec.cover_min < 0.0 {
        return Err(Error::InvalidScenario("empty suite or bad cover range".into()));
    }
    let total = spec.scenes * spec.agents_per_scene;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Stratified cover durations, shuffled across agents.
    let mut covers: Vec<f64> = (0..total)
        .map(|k| spec.cover_min + (spec.cover_max - spec.cover_min) * (k as f64 + rng.random::<f64>()) / total as f64)
        .collect();
    for i in (1..total).rev() {
        covers.swap(i, rng.random_range(0..=i));
    }
    (0..spec.scenes)
        .map(|i| build_scene(spec, i, &covers[i * spec.agents_per_scene..(i + 1) * spec.agents_per_scene], &mut rng))
        .collect()
}

fn empty_scene(spec: &SuiteSpec, index: usize) -> Scenario {
    Scenario {
        camera: spec.camera,
        ground_extent: 40.0,
        agents: Vec::new(),
        occluders: Vec::new(),
        fps: spec.fps,
        duration: 1.0,
        detection_noise: spec.detection_noise,
        appearance_noise: spec.appearance_noise,
        seed: spec.seed.wrapping_mul(1000).wrapping_add(index as u64),
        camera_path: Vec::new(),
        appearance_dim: 64,
        point_cloud_points: 2000,
        point_cloud_noise: 0.01,
        // Anchor frames of an occlusion must carry a detection.
        detection_cutoff: VIS_THRESHOLD,
    }
}

fn build_scene(spec: &SuiteSpec, index: usize, covers: &[f64], rng: &mut ChaCha8Rng) -> Result<Scenario> {
    let mut scene = empty_scene(spec, index);
    let mut start = 0.0;
    for (a, &cover) in covers.iter().enumerate() {
        let id = a as u32 + 1;
        let mut placed = false;
        let mut rejected = [0usize; 4];
        for _ in 0..TRIES {
            let Some((agent, wall)) = sample_agent(spec, id, a, start, cover, index, rng) else {
                rejected[0] += 1;
                continue;
            };
            let mut trial = scene.clone();
            trial.agents.push(agent.clone());
            trial.occluders.push(wall);
            trial.duration = agent.end_time() + 1.0;
            let verdict = check(&trial);
            if let Err(r) = verdict {
                rejected[r as usize] += 1;
            }
            if verdict.is_ok() {
                start = agent.end_time() + 0.5;
                scene = trial;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidScenario(alloc::format!("could not place agent {id} of scene {index} (cover {cover:.2} s, rejected {rejected:?})")));
        }
    }
    Ok(scene)
}

fn sample_agent(
    spec: &SuiteSpec,
    id: u32,
    lane: usize,
    start: f64,
    cover: f64,
    scene: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(AgentSpec, Occluder)> {
    let cam = &spec.camera;
    let speed = rng.random_range(0.8..1.4);
    let before = 3.5 + rng.random::<f64>();
    let after = cover + 3.0;
    let y = 11.0 + 3.5 * lane as f64 + rng.random::<f64>();
    let heading = rng.random_range(-spec.max_heading..=spec.max_heading).to_radians();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let turn = if rng.random::<bool>() { spec.turn } else { -spec.turn }.to_radians();
    let dir = BevPoint::new(sign * libm::cos(heading), libm::sin(heading));
    let x = -dir.x * speed * (after - before) / 2.0 + rng.random_range(-1.0..1.0);
    let hidden = BevPoint::new(x, y);
    let first = hidden - dir * (speed * before);
    let last = hidden + dir.rotated(turn) * (speed * after);
    let agent = AgentSpec {
        id,
        waypoints: vec![first, hidden, last],
        speed,
        height: rng.random_range(1.6..1.9),
        width: 0.5,
        appearance_seed: ((scene as u64) << 16) ^ (id as u64) ^ spec.seed.rotate_left(32),
        start_time: start,
    };

    // Span of the agent behind the wall.
    let t0 = start + before;
    let steps = libm::ceil(cover * spec.fps).max(1.0) as usize;
    let (mut near, mut far) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut left, mut right) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=steps {
        let p = agent.position(t0 + cover * k as f64 / steps as f64)?;
        let (b, _) = agent_box(cam, p, agent.width, agent.height)?;
        near = near.min(p.y);
        far = far.max(p.y);
        left = left.min(b.left);
        right = right.max(b.right());
    }
    let front = near - WALL_GAP - WALL_DEPTH;
    if front < 3.0 {
        return None;
    }
    // Tall enough that the line from the camera over the wall passes above
    // the head at the far end.
    let height = cam.height - (cam.height - agent.height) * front / far + 0.3;
    let mut wall = Occluder { min: BevPoint::new(-100.0, front), max: BevPoint::new(100.0, front + WALL_DEPTH), height };
    let margin = 2.0;
    wall.min.x = bisect(|v| occluder_box(cam, &Occluder { min: BevPoint::new(v, front), ..wall }, BevPoint::ZERO).map(|b| b.left), left - margin)?;
    wall.max.x =
        bisect(|v| occluder_box(cam, &Occluder { max: BevPoint::new(v, front + WALL_DEPTH), ..wall }, BevPoint::ZERO).map(|b| b.right()), right + margin)?;
    (wall.max.x > wall.min.x).then_some((agent, wall))
}

/// Smallest `v` in `[-100, 100]` with `f(v) >= target`, for increasing `f`.
fn bisect(f: impl Fn(f64) -> Option<f64>, target: f64) -> Option<f64> {
    let (mut lo, mut hi) = (-100.0, 100.0);
    if f(hi)? < target || f(lo)? > target {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn rect_distance(p: BevPoint, o: &Occluder) -> f64 {
    let dx = (o.min.x - p.x).max(p.x - o.max.x).max(0.0);
    let dy = (o.min.y - p.y).max(p.y - o.max.y).max(0.0);
    libm::hypot(dx, dy)
}

#[derive(Debug, Clone, Copy)]
enum Reject {
    OutOfImage = 1,
    TooClose = 2,
    Events = 3,
}

#[cfg(test)]
fn acceptable(s: &Scenario) -> bool {
    check(s).is_ok()
}

/// Every agent stays fully inside the image, keeps clear of its own wall and
/// has exactly one occlusion event of acceptable length.
fn check(s: &Scenario) -> core::result::Result<(), Reject> {
    let (w, h) = (s.camera.image_width as f64, s.camera.image_height as f64);
    let gt = ground_truth(s);
    let inside = gt.iter().all(|g| g.bbox.left >= 0.0 && g.bbox.top >= 0.0 && g.bbox.right() <= w && g.bbox.bottom() <= h);
    // Walls are pushed in agent order.
    let clear = gt.iter().all(|g| {
        let own = s.agents.iter().position(|a| a.id == g.id).and_then(|i| s.occluders.get(i));
        own.is_none_or(|o| rect_distance(g.bev, o) >= CLEARANCE)
    });
    if !inside {
        return Err(Reject::OutOfImage);
    }
    if !clear {
        return Err(Reject::TooClose);
    }
    let labeled: Vec<LabeledBox> =
        gt.iter().map(|g| LabeledBox { frame: g.frame, id: g.id, bbox: g.bbox, visibility: g.visibility }).collect();
    let events = occlusion_components(&labeled, VIS_THRESHOLD, VIS_WINDOW, s.fps);
    let one = s.agents.iter().all(|a| {
        let mine: Vec<_> = events.iter().filter(|e| e.gt_id == a.id).collect();
        mine.len() == 1 && (MIN_EVENT..MAX_EVENT).contains(&mine[0].duration)
    });
    if one {
        Ok(())
    } else {
        Err(Reject::Events)
    }
}
