//! Brute-force reference implementations and fixture generators shared by
//! the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use bevtrack_core::assignment::ScoreMatrix;
use bevtrack_core::eval::{Correspondence, LabeledBox, MatchPair};
use bevtrack_core::{Frame, PixelBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best total over every partial one-to-one assignment, summing positive
/// entries in row order.
pub fn brute_force_total(m: &ScoreMatrix) -> f64 {
    fn go(m: &ScoreMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == m.rows() {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        go(m, row + 1, used, acc, best);
        for c in 0..m.cols() {
            let s = m.get(row, c);
            if !used[c] && s > 0.0 {
                used[c] = true;
                go(m, row + 1, used, acc + s, best);
                used[c] = false;
            }
        }
    }
    let mut best = 0.0;
    go(m, 0, &mut vec![false; m.cols()], 0.0, &mut best);
    best
}

/// Same total summed the way the brute force does.
pub fn row_order_total(m: &ScoreMatrix, pairs: &[(usize, usize)]) -> f64 {
    let mut p = pairs.to_vec();
    p.sort_unstable();
    p.iter().fold(0.0, |acc, &(r, c)| acc + m.get(r, c))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, max_dim: usize) -> ScoreMatrix {
    let rows = rng.random_range(0..=max_dim);
    let cols = rng.random_range(0..=max_dim);
    let mut m = ScoreMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = match rng.random_range(0..10) {
                0 | 1 => 0.0,
                2 => -rng.random::<f64>(),
                _ => rng.random::<f64>() * 3.0,
            };
            m.set(r, c, v);
        }
    }
    m
}

/// `(idsw, idtr, id_lost_short, id_lost_long)` straight from the
/// definitions, one identity at a time.
pub fn oracle_id_errors(pairs: &[MatchPair], fps: f64, split: f64) -> (usize, usize, usize, usize) {
    let mut by_gt: BTreeMap<u32, Vec<(Frame, u32)>> = BTreeMap::new();
    let mut by_hyp: BTreeMap<u32, Vec<(Frame, u32)>> = BTreeMap::new();
    for p in pairs {
        by_gt.entry(p.gt).or_default().push((p.frame, p.hyp));
        by_hyp.entry(p.hyp).or_default().push((p.frame, p.gt));
    }
    let (mut idsw, mut idtr, mut short, mut long) = (0, 0, 0, 0);
    for seq in by_gt.values_mut() {
        seq.sort_unstable();
        for w in seq.windows(2) {
            if w[0].1 != w[1].1 {
                idsw += 1;
                let unmatched = w[1].0 - w[0].0 - 1;
                if unmatched as f64 / fps > split {
                    long += 1;
                } else {
                    short += 1;
                }
            }
        }
    }
    for seq in by_hyp.values_mut() {
        seq.sort_unstable();
        idtr += seq.windows(2).filter(|w| w[0].1 != w[1].1).count();
    }
    (idsw, idtr, short, long)
}

/// `(gt_id, start, end, pre, post, duration)` of every occlusion, using a
/// window minimum followed by a window maximum over the visibility flags,
/// with frames outside the lifetime treated as visible.
pub fn oracle_occlusions(gt: &[LabeledBox], thr: f64, w: usize, fps: f64) -> Vec<(u32, Frame, Frame, Frame, Frame, f64)> {
    let mut by_id: BTreeMap<u32, BTreeMap<Frame, f64>> = BTreeMap::new();
    for g in gt {
        by_id.entry(g.id).or_default().insert(g.frame, g.visibility);
    }
    let mut out = Vec::new();
    for (id, vis) in by_id {
        let first = *vis.keys().next().unwrap() as i64;
        let last = *vis.keys().next_back().unwrap() as i64;
        let flag = |f: i64| f < first || f > last || vis.get(&(f as Frame)).is_some_and(|v| *v >= thr);
        let w = w.max(1) as i64;
        let eroded = |s: i64| (s..s + w).all(flag);
        let kept = |f: i64| (f - w + 1..=f).any(eroded);
        let smooth: Vec<bool> = (first..=last).map(kept).collect();
        let mut f = 0;
        while f < smooth.len() {
            if smooth[f] {
                f += 1;
                continue;
            }
            let s = f;
            while f < smooth.len() && !smooth[f] {
                f += 1;
            }
            if s > 0 && f < smooth.len() {
                let at = |k: usize| (first + k as i64) as Frame;
                out.push((id, at(s), at(f - 1), at(s - 1), at(f), (f - s) as f64 / fps));
            }
        }
    }
    out
}

/// `(lower, recovered, total)` per non-empty bucket.
pub fn oracle_id_recall(events: &[(u32, Frame, Frame, Frame, Frame, f64)], pairs: &[MatchPair], edges: &[f64]) -> Vec<(f64, usize, usize)> {
    let hyp = |gt: u32, f: Frame| pairs.iter().find(|p| p.gt == gt && p.frame == f).map(|p| p.hyp);
    let mut lowers = vec![0.0];
    lowers.extend_from_slice(edges);
    let mut out: Vec<(f64, usize, usize)> = lowers.iter().map(|&l| (l, 0, 0)).collect();
    for &(id, _, _, pre, post, d) in events {
        let mut b = 0;
        while b < edges.len() && d >= edges[b] {
            b += 1;
        }
        out[b].2 += 1;
        if let (Some(a), Some(c)) = (hyp(id, pre), hyp(id, post)) {
            if a == c {
                out[b].1 += 1;
            }
        }
    }
    out.retain(|b| b.2 > 0);
    out
}

/// Random ground-truth visibility and a one-to-one per-frame
/// correspondence with occasional identity changes.
pub fn metric_fixture(seed: u64) -> (Vec<LabeledBox>, Correspondence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tracks = rng.random_range(1..=5u32);
    let frames: Frame = rng.random_range(20..=200);
    let mut gt = Vec::new();
    let mut pairs = Vec::new();
    let mut hyp_of: Vec<u32> = (1..=tracks).collect();
    let mut next_hyp = tracks + 1;
    let mut lifetimes = Vec::new();
    for id in 1..=tracks {
        let start = rng.random_range(1..=frames / 2);
        let end = rng.random_range(start + 5..=frames);
        lifetimes.push((start, end));
        let mut visible = true;
        for f in start..=end {
            if rng.random::<f64>() < 0.12 {
                visible = !visible;
            }
            if rng.random::<f64>() < 0.03 {
                continue;
            }
            let v = match (visible, rng.random_range(0..20)) {
                (_, 0) => 0.1,
                (true, _) => rng.random_range(0.1..=1.0),
                (false, _) => rng.random_range(0.0..0.1),
            };
            gt.push(LabeledBox { frame: f, id, bbox: PixelBox::new(0.0, 0.0, 1.0, 1.0), visibility: v });
        }
    }
    for f in 1..=frames {
        let mut used = Vec::new();
        for id in 1..=tracks {
            let (start, end) = lifetimes[(id - 1) as usize];
            if f < start || f > end {
                continue;
            }
            match rng.random_range(0..100) {
                0..=2 => {
                    hyp_of[(id - 1) as usize] = next_hyp;
                    next_hyp += 1;
                }
                3..=4 => hyp_of[(id - 1) as usize] = rng.random_range(1..next_hyp),
                _ => {}
            }
            let h = hyp_of[(id - 1) as usize];
            if rng.random::<f64>() < 0.8 && !used.contains(&h) {
                used.push(h);
                pairs.push(MatchPair { frame: f, gt: id, hyp: h });
            }
        }
    }
    (gt, Correspondence::from_pairs(pairs))
}
