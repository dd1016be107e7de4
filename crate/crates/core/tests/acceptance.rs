//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use bevtrack_core::assignment::assign;
use bevtrack_core::config::RunConfig;
use bevtrack_core::eval::{count_id_errors, fde, id_recall, occlusion_components, ForecastCase};
use bevtrack_core::experiment::{endpoint_outcomes, recall, run_suite, EndpointSetup, HomographySource};
use bevtrack_core::forecast::{forecast, preprocess, MotionModelSpec, ObservedTrajectory, PreprocessConfig};
use bevtrack_core::geometry::{calibrate, estimate_egomotion, estimate_homography, BevPoint, EgomotionTrack, Homography, LinearizedHomography, PixelPoint, Point3};
use bevtrack_core::sim::{generate, ground_correspondences, junction_suite, linear_suite, point_cloud, AgentSpec, CameraSpec, Scenario};
use bevtrack_core::tracker::{build_cost_matrix, Detection, GroundMask, MatchThresholds, SceneModel, Track, TrackState};
use bevtrack_core::{Frame, PixelBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn camera(tilt: f64) -> CameraSpec {
    CameraSpec { height: 6.0, tilt, focal: 1200.0, image_width: 1920, image_height: 1080 }
}

fn bare_scenario(cam: CameraSpec) -> Scenario {
    Scenario {
        camera: cam,
        ground_extent: 60.0,
        agents: vec![],
        occluders: vec![],
        fps: 20.0,
        duration: 5.0,
        detection_noise: 0.0,
        appearance_noise: 0.0,
        seed: 11,
        camera_path: vec![],
        appearance_dim: 16,
        point_cloud_points: 500,
        point_cloud_noise: 0.0,
        detection_cutoff: 0.25,
    }
}

/// Random visible ground points, camera-local, as (pixel, BEV).
fn ground_samples(cam: &CameraSpec, n: usize, max_range: f64, rng: &mut ChaCha8Rng) -> Vec<(PixelPoint, BevPoint)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let b = BevPoint::new(rng.random_range(-max_range..max_range), rng.random_range(0.0..max_range));
        if b.norm() > max_range {
            continue;
        }
        if let Some(p) = cam.project(Point3::new(b.x, b.y, 0.0)) {
            if (0.0..1920.0).contains(&p.u) && (0.0..1080.0).contains(&p.v) {
                out.push((p, b));
            }
        }
    }
    out
}

fn rmse(h: &Homography, pts: &[(PixelPoint, BevPoint)]) -> f64 {
    let s: f64 = pts.iter().map(|(p, b)| h.map(*p).map_or(f64::INFINITY, |q| q.distance(*b).powi(2))).sum();
    (s / pts.len() as f64).sqrt()
}

fn homography_recovery() -> Outcome {
    let cam = camera(30.0);
    let s = bare_scenario(cam);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cal = calibrate(&point_cloud(&s), &cam.intrinsics(), 0.02, 200, 0).expect("calibration");
    let held_out = ground_samples(&cam, 500, 40.0, &mut rng);
    let clean = rmse(&cal.fit.homography, &held_out);

    let noise = Normal::new(0.0, 0.5).unwrap();
    let noisy: Vec<(PixelPoint, BevPoint)> = ground_samples(&cam, 500, 25.0, &mut rng)
        .into_iter()
        .map(|(p, b)| (PixelPoint::new(p.u + noise.sample(&mut rng), p.v + noise.sample(&mut rng)), b))
        .collect();
    let fit = estimate_homography(&noisy).expect("fit");
    let near = ground_samples(&cam, 500, 10.0, &mut rng);
    let noisy_rmse = rmse(&fit.homography, &near);
    outcome(clean < 1e-6 && noisy_rmse < 0.05, format!("noiseless rmse {clean:.2e} m, 0.5 px noise rmse within 10 m {noisy_rmse:.4} m"))
}

/// Derivative of the exact map along a column, from the matrix entries.
fn exact_derivative(h: &Homography, u: f64, v: f64) -> BevPoint {
    let m = h.matrix();
    let [x, y, w] = h.apply_homogeneous(u, v);
    BevPoint::new((m[0][1] * w - x * m[2][1]) / (w * w), (m[1][1] * w - y * m[2][1]) / (w * w))
}

fn linearization_suite() -> Outcome {
    let h = camera(20.0).homography();
    let lh = LinearizedHomography::new(h, 1920, 1080, 0.2).expect("linearize");
    let (mut value_gap, mut slope_gap, mut max_step, mut round_trip) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for u in 0..1920 {
        let u = u as f64;
        let t = lh.threshold_at(u);
        let exact = h.map(PixelPoint::new(u, t.v_threshold)).expect("below the horizon");
        value_gap = value_gap.max(exact.distance(t.value));
        // The linear piece's slope, read off the map itself one row up.
        let above = lh.to_bev(PixelPoint::new(u, t.v_threshold - 1.0));
        let linear_slope = t.value - above;
        slope_gap = slope_gap.max(linear_slope.distance(exact_derivative(&h, u, t.v_threshold)));
        let mut prev = lh.to_bev(PixelPoint::new(u, 0.0));
        for v in 1..1080 {
            let cur = lh.to_bev(PixelPoint::new(u, v as f64));
            max_step = max_step.max(cur.distance(prev));
            prev = cur;
        }
    }
    for i in 0..200 {
        for j in 0..200 {
            let p = PixelPoint::new(1919.0 * i as f64 / 199.0, 1079.0 * j as f64 / 199.0);
            let back = lh.to_pixel(lh.to_bev(p)).map_or(f64::INFINITY, |q| (q.u - p.u).hypot(q.v - p.v));
            round_trip = round_trip.max(back);
        }
    }
    outcome(
        value_gap < 1e-9 && slope_gap < 1e-9 && max_step <= 0.2 + 1e-9 && round_trip < 1e-6,
        format!("value gap {value_gap:.1e}, slope gap {slope_gap:.1e}, max row step {max_step:.6} m, round trip {round_trip:.1e} px"),
    )
}

fn assignment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let m = common::random_matrix(&mut rng, 7);
        let got = assign(&m);
        if common::row_order_total(&m, &got) != common::brute_force_total(&m) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} of 1000 matrices differ from the exhaustive optimum"))
}

fn endpoint_recall() -> Outcome {
    let suite = linear_suite(0).expect("suite");
    let (mut truth_out, mut est_out) = (Vec::new(), Vec::new());
    for s in &suite {
        let out = generate(s).expect("render");
        let (w, hgt) = (s.camera.image_width, s.camera.image_height);
        let truth = LinearizedHomography::new(out.homography, w, hgt, 0.2).unwrap();
        let cal = calibrate(&out.point_cloud, &s.camera.intrinsics(), 0.05, 200, 0).expect("calibration");
        let est = LinearizedHomography::new(cal.fit.homography, w, hgt, 0.2).unwrap();
        let model = MotionModelSpec::kalman_cv();
        let setup = EndpointSetup {
            lh: &truth,
            truth: &truth,
            ego: None,
            model: &model,
            preprocess: PreprocessConfig { fps: s.fps, ..Default::default() },
            vis_threshold: 0.1,
            window: 5,
        };
        truth_out.extend(endpoint_outcomes(&out.gt, &setup).unwrap());
        est_out.extend(endpoint_outcomes(&out.gt, &EndpointSetup { lh: &est, ..setup.clone() }).unwrap());
    }
    let frac = |(a, b): (usize, usize)| a as f64 / b.max(1) as f64;
    let true_all = recall(&truth_out, 0.0, |o| o.bev);
    let est_all = recall(&est_out, 0.0, |o| o.bev);
    let true_long = recall(&truth_out, 2.0, |o| o.bev);
    let px_long = recall(&truth_out, 2.0, |o| o.pixel);
    let durations = truth_out.iter().map(|o| o.event.duration);
    let (lo, hi) = durations.fold((f64::INFINITY, 0.0f64), |(a, b), d| (a.min(d), b.max(d)));
    outcome(
        frac(true_all) >= 0.95 && frac(est_all) >= 0.80 && frac(px_long) < frac(true_long),
        format!(
            "true H {}/{}, estimated H {}/{}, gaps > 2 s: BEV {}/{} vs pixel {}/{} (occlusions {lo:.2}-{hi:.2} s)",
            true_all.0, true_all.1, est_all.0, est_all.1, true_long.0, true_long.1, px_long.0, px_long.1
        ),
    )
}

fn multimodality() -> Outcome {
    let junction = junction_suite(0).expect("suite");
    let straight = linear_suite(0).expect("suite");
    let fan = RunConfig { motion: MotionModelSpec::fan(vec![-30.0, 0.0, 30.0]), ..RunConfig::default() };
    let cv = RunConfig { motion: MotionModelSpec::kalman_cv(), ..RunConfig::default() };
    let run = |suite: &[Scenario], c: &RunConfig| run_suite(suite, c, HomographySource::PointCloud).expect("run");
    let (jf, jc) = (run(&junction, &fan), run(&junction, &cv));
    let (sf, sc) = (run(&straight, &fan), run(&straight, &cv));
    let frac = |(a, b): (usize, usize)| a as f64 / b.max(1) as f64;
    let (rf, rc) = (jf.recall_from(2.0), jc.recall_from(2.0));
    let idtr_ok = sf.idtr as f64 <= 1.1 * sc.idtr as f64;
    outcome(
        frac(rf) - frac(rc) >= 0.3 && idtr_ok,
        format!(
            "junction recall > 2 s: fan {}/{} vs kalman_cv {}/{}; straight IDTR fan {} vs kalman_cv {}",
            rf.0, rf.1, rc.0, rc.1, sf.idtr, sc.idtr
        ),
    )
}

fn tracker_improvement() -> Outcome {
    let suite = linear_suite(0).expect("suite");
    let with = RunConfig::default();
    let without = RunConfig { forecasting: false, ..RunConfig::default() };
    let a = run_suite(&suite, &with, HomographySource::PointCloud).expect("run");
    let b = run_suite(&suite, &without, HomographySource::PointCloud).expect("run");
    let idsw_ok = (a.idsw as f64) <= 0.5 * b.idsw as f64;
    let mut buckets_ok = true;
    let mut rows = Vec::new();
    for bb in b.id_recall.iter().filter(|x| x.lower >= 1.0) {
        let fa = a.id_recall.iter().find(|x| x.lower == bb.lower).map_or(0.0, |x| x.recall());
        buckets_ok &= fa > bb.recall();
        rows.push(format!("[{}s: {:.2} vs {:.2}]", bb.lower, fa, bb.recall()));
    }
    outcome(idsw_ok && buckets_ok, format!("IDSW {} vs baseline {}; recall {}", a.idsw, b.idsw, rows.join(" ")))
}

fn metric_oracles() -> Outcome {
    let edges = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0];
    let mut bad = Vec::new();
    let mut events_seen = 0;
    for seed in 0..50 {
        let (gt, corr) = common::metric_fixture(seed);
        let e = count_id_errors(&corr, 20.0, 2.0);
        let o = common::oracle_id_errors(&corr.pairs, 20.0, 2.0);
        let ev = occlusion_components(&gt, 0.1, 5, 20.0);
        let oev = common::oracle_occlusions(&gt, 0.1, 5, 20.0);
        let got: Vec<_> = ev.iter().map(|e| (e.gt_id, e.start_frame, e.end_frame, e.pre_frame, e.post_frame, e.duration)).collect();
        let rec: Vec<_> = id_recall(&ev, &corr, &edges).iter().map(|b| (b.lower, b.recovered, b.total)).collect();
        events_seen += got.len();
        if (e.idsw, e.idtr, e.id_lost_short, e.id_lost_long) != o || got != oev || rec != common::oracle_id_recall(&oev, &corr.pairs, &edges) {
            bad.push(seed);
        }
    }
    outcome(bad.is_empty(), format!("50 fixtures, {events_seen} occlusions, mismatching seeds {bad:?}"))
}

fn identity_scene() -> SceneModel {
    let lh = LinearizedHomography::new(Homography::IDENTITY, 2000, 2000, 0.2).unwrap();
    let mask = GroundMask::from_fn(BevPoint::new(0.0, 0.0), BevPoint::new(2000.0, 2000.0), 50.0, |_| true).unwrap();
    SceneModel::new(mask, lh, 20.0, None).unwrap()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn box_iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let w = (a.left + a.width).min(b.left + b.width) - a.left.max(b.left);
    let h = (a.top + a.height).min(b.top + b.height) - a.top.max(b.top);
    let inter = w.max(0.0) * h.max(0.0);
    inter / (a.width * a.height + b.width * b.height - inter)
}

fn cost_arithmetic() -> Outcome {
    let scene = identity_scene();
    let th = MatchThresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut gated = 0;
    for _ in 0..100 {
        let anchor = BevPoint::new(rng.random_range(400.0..1600.0), rng.random_range(400.0..1600.0));
        let (w, h) = (rng.random_range(2.0..6.0), rng.random_range(4.0..12.0));
        let last = PixelBox::new(anchor.x - w / 2.0, anchor.y - h, w, h);
        let obs = ObservedTrajectory { points: vec![anchor], dt: 0.4, fps: 20.0, last_frame: 10, extrapolated_prefix: 0, velocity: BevPoint::ZERO };
        let mut fc = forecast(&MotionModelSpec::static_model(), &obs, 5).unwrap();
        fc.advance().unwrap();
        let base = unit((0..8).map(|_| rng.random_range(-1.0..1.0)).collect());
        let mut d = Detection::new(10, last, vec![]);
        d.bev = anchor;
        let track = Track { id: 1, history: vec![d], state: TrackState::Inactive { since: 10, forecast: fc }, last_appearance: base.clone() };

        let shift = BevPoint::new(rng.random_range(-4.0..4.0), rng.random_range(-3.0..3.0));
        let dbox = PixelBox::new(last.left + shift.x, last.top + shift.y, w * rng.random_range(0.8..1.2), h);
        let mix = rng.random_range(0.0..1.0);
        let other = unit((0..8).map(|_| rng.random_range(-1.0..1.0)).collect());
        let app = unit(base.iter().zip(&other).map(|(a, b)| a + mix * b).collect());
        let mut det = Detection::new(11, dbox, app.clone());
        det.bev = BevPoint::new(dbox.left + dbox.width / 2.0, dbox.top + dbox.height);

        let m = build_cost_matrix(&[&track], &[det.clone()], &th, &scene);
        let iou = box_iou(&last, &dbox);
        let l2 = ((det.bev.x - anchor.x).powi(2) + (det.bev.y - anchor.y).powi(2)).sqrt();
        let sim: f64 = base.iter().zip(&app).map(|(a, b)| a * b).sum();
        let expected = if sim >= th.tau_app && iou >= th.tau_iou { iou + (th.tau_l2 - l2).max(0.0) } else { 0.0 };
        gated += usize::from(expected == 0.0);
        worst = worst.max((m.scores.get(0, 0) - expected).abs());
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.1e} over 100 triples ({gated} gated to zero)"))
}

fn fde_exactness() -> Outcome {
    let fps = 20.0;
    let cfg = PreprocessConfig { fps, ..Default::default() };
    let case = |model: &MotionModelSpec, v: BevPoint| {
        let at = |f: Frame| BevPoint::new(3.0, 7.0) + v * (f as f64 / fps);
        let history: Vec<(Frame, BevPoint)> = (1..=80).map(|f| (f, at(f))).collect();
        let obs = preprocess(&history, &cfg).unwrap();
        let fc = forecast(model, &obs, 80).unwrap();
        ForecastCase { track_id: 1, forecast: fc, future: (81..=160).map(|f| (f, at(f))).collect() }
    };
    let cv = fde(&[case(&MotionModelSpec::kalman_cv(), BevPoint::new(1.1, -0.6))], &[2.0, 4.0], fps).unwrap();
    let st = fde(&[case(&MotionModelSpec::static_model(), BevPoint::new(0.6, 0.8))], &[2.0, 4.0], fps).unwrap();
    let ok = cv.iter().all(|e| *e < 1e-9) && (st[0] - 2.0).abs() < 1e-9 && (st[1] - 4.0).abs() < 1e-9;
    outcome(ok, format!("kalman_cv {:.1e} / {:.1e} m, static {:.12} / {:.12} m", cv[0], cv[1], st[0], st[1]))
}

fn egomotion() -> Outcome {
    let mut s = bare_scenario(camera(20.0));
    s.agents = vec![AgentSpec { id: 1, waypoints: vec![BevPoint::new(0.0, 15.0)], speed: 1.0, height: 1.8, width: 0.5, appearance_seed: 1, start_time: 0.0 }];
    s.camera_path = (0..40).map(|i| BevPoint::new(0.05 * (i as f64 * 0.2).cos(), 0.03 + 0.01 * (i % 3) as f64)).collect();
    s.duration = 2.0;
    let truth = s.egomotion();
    let lh = LinearizedHomography::new(s.homography(), 1920, 1080, 0.2).unwrap();
    let recover = |noise: f64| {
        let deltas: Vec<BevPoint> = (2..=s.frame_count())
            .map(|f| {
                let (a, b) = ground_correspondences(&s, f, 500, noise, f as u64).unwrap();
                estimate_egomotion(&a, &b, &lh, &lh).unwrap()
            })
            .collect();
        let est = EgomotionTrack::from_deltas(1, &deltas);
        let cumulative = (1..=s.frame_count()).map(|f| est.offset(f).distance(truth.offset(f))).fold(0.0, f64::max);
        let per_frame = (2..=s.frame_count())
            .map(|f| (est.offset(f) - est.offset(f - 1)).distance(truth.offset(f) - truth.offset(f - 1)))
            .fold(0.0, f64::max);
        (cumulative, per_frame)
    };
    let (clean, _) = recover(0.0);
    let (_, noisy) = recover(0.05);
    let path_ok = generate(&s).unwrap().egomotion == truth;
    outcome(
        path_ok && clean < 1e-6 && noisy < 0.02,
        format!("noiseless cumulative error {clean:.1e} m, noisy per-frame error {noisy:.4} m"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("homography recovery", homography_recovery, Duration::from_secs(1)),
        ("linearization suite", linearization_suite, Duration::from_secs(5)),
        ("assignment oracle", assignment_oracle, Duration::from_secs(10)),
        ("endpoint recall on occlusion gaps", endpoint_recall, Duration::from_secs(120)),
        ("multimodal forecasting at junctions", multimodality, Duration::from_secs(120)),
        ("tracker improvement over the IoU baseline", tracker_improvement, Duration::from_secs(120)),
        ("metric oracles", metric_oracles, Duration::MAX),
        ("association score arithmetic", cost_arithmetic, Duration::MAX),
        ("FDE exactness", fde_exactness, Duration::MAX),
        ("egomotion recovery", egomotion, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.pass && took <= budget;
        failed += usize::from(!pass);
        let limit = if budget == Duration::MAX { String::new() } else { format!(", limit {budget:?}") };
        println!("{} {name}: {} ({took:.2?}{limit})", if pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 10 acceptance criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
