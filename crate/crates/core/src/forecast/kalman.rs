//! Constant-velocity Kalman filter with Rauch-Tung-Striebel smoothing, run
//! independently per BEV axis.

use alloc::vec::Vec;

/// Variances of the white-noise acceleration and of position measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanParams {
    pub process_noise: f64,
    pub obs_noise: f64,
}

type V2 = [f64; 2];
type M2 = [[f64; 2]; 2];

fn predict(x: V2, p: M2, dt: f64, q: f64) -> (V2, M2) {
    let xp = [x[0] + dt * x[1], x[1]];
    // F P F^T
    let a = p[0][0] + dt * (p[1][0] + p[0][1]) + dt * dt * p[1][1];
    let b = p[0][1] + dt * p[1][1];
    let c = p[1][0] + dt * p[1][1];
    let d = p[1][1];
    let (dt2, dt3, dt4) = (dt * dt, dt * dt * dt, dt * dt * dt * dt);
    let pp = [[a + q * dt4 / 4.0, b + q * dt3 / 2.0], [c + q * dt3 / 2.0, d + q * dt2]];
    (xp, pp)
}

fn inv2(m: M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

/// Smoothed `(position, velocity)` for each sample of a uniformly sampled
/// sequence. The state starts at the first sample with the given velocity
/// prior, so exactly linear input is reproduced exactly.
pub(crate) fn smooth_axis(z: &[f64], dt: f64, params: KalmanParams, v0: f64, v0_var: f64) -> Vec<V2> {
    let n = z.len();
    let (q, r) = (params.process_noise, params.obs_noise);
    let mut xf: Vec<V2> = Vec::with_capacity(n);
    let mut pf: Vec<M2> = Vec::with_capacity(n);
    let mut xp: Vec<V2> = Vec::with_capacity(n);
    let mut pp: Vec<M2> = Vec::with_capacity(n);

    let mut x = [z[0], v0];
    let mut p = [[r, 0.0], [0.0, v0_var]];
    xf.push(x);
    pf.push(p);
    xp.push(x);
    pp.push(p);
    for &zk in &z[1..] {
        let (xk, pk) = predict(x, p, dt, q);
        let s = pk[0][0] + r;
        let gain = [pk[0][0] / s, pk[1][0] / s];
        let innov = zk - xk[0];
        x = [xk[0] + gain[0] * innov, xk[1] + gain[1] * innov];
        p = [
            [(1.0 - gain[0]) * pk[0][0], (1.0 - gain[0]) * pk[0][1]],
            [pk[1][0] - gain[1] * pk[0][0], pk[1][1] - gain[1] * pk[0][1]],
        ];
        xp.push(xk);
        pp.push(pk);
        xf.push(x);
        pf.push(p);
    }

    let mut xs = xf.clone();
    for k in (0..n.saturating_sub(1)).rev() {
        // G = Pf F^T Pp^-1
        let pfk = pf[k];
        let pft = [[pfk[0][0] + dt * pfk[0][1], pfk[0][1]], [pfk[1][0] + dt * pfk[1][1], pfk[1][1]]];
        let ppi = inv2(pp[k + 1]);
        let g = [
            [pft[0][0] * ppi[0][0] + pft[0][1] * ppi[1][0], pft[0][0] * ppi[0][1] + pft[0][1] * ppi[1][1]],
            [pft[1][0] * ppi[0][0] + pft[1][1] * ppi[1][0], pft[1][0] * ppi[0][1] + pft[1][1] * ppi[1][1]],
        ];
        let diff = [xs[k + 1][0] - xp[k + 1][0], xs[k + 1][1] - xp[k + 1][1]];
        xs[k] = [
            xf[k][0] + g[0][0] * diff[0] + g[0][1] * diff[1],
            xf[k][1] + g[1][0] * diff[0] + g[1][1] * diff[1],
        ];
    }
    xs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_input_is_exact() {
        let z: Vec<f64> = (0..10).map(|k| 1.5 + 0.3 * k as f64).collect();
        let params = KalmanParams { process_noise: 0.01, obs_noise: 0.0625 };
        let s = smooth_axis(&z, 0.4, params, 0.3 / 0.4, 2.0 * 0.0625 / 0.16);
        for (k, st) in s.iter().enumerate() {
            assert!((st[0] - z[k]).abs() < 1e-12);
            assert!((st[1] - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn single_sample() {
        let params = KalmanParams { process_noise: 0.01, obs_noise: 0.0625 };
        let s = smooth_axis(&[2.0], 0.4, params, 0.0, 100.0);
        assert_eq!(s, alloc::vec![[2.0, 0.0]]);
    }
}
