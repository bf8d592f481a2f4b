//! Entanglement length from the fit `E_r = a + b e^{−r/ξ}`.

use crate::entanglement::EntanglementProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct LengthFit {
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub rms: f64,
    /// fitted separations `1..=r_max`
    pub r_max: usize,
    pub iterations: usize,
}

impl LengthFit {
    pub fn is_valid(&self) -> bool {
        self.xi.is_finite() && self.xi > 0.0
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.a + self.b * (-r / self.xi).exp()
    }
}

const MAX_ITER: usize = 500;

/// Fits `values[k] = a + b e^{−(k+1)/ξ}` with damped Gauss–Newton steps,
/// parameterized by `u = 1/ξ`.
pub fn fit_exponential(values: &[f64]) -> Option<LengthFit> {
    if values.len() < 3 {
        return None;
    }
    let r_max = values.len();
    let a0 = values[r_max - 1];
    let (d1, d2) = (values[0] - a0, values[1] - a0);
    let u0 = if d1 > 0.0 && d2 > 0.0 && d1 != d2 { (d1 / d2).ln().abs() } else { 1.0 };
    let b0 = d1 * u0.exp();

    let residuals = |p: &[f64; 3]| -> Vec<f64> {
        values.iter().enumerate().map(|(k, y)| p[0] + p[1] * (-(k as f64 + 1.0) * p[2]).exp() - y).collect()
    };
    let cost = |res: &[f64]| res.iter().map(|x| x * x).sum::<f64>();

    let mut p = [a0, b0, u0];
    let mut res = residuals(&p);
    let mut c = cost(&res);
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        // normal equations J^T J δ = −J^T r
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (k, rk) in res.iter().enumerate() {
            let r = k as f64 + 1.0;
            let e = (-r * p[2]).exp();
            let row = [1.0, e, -r * p[1] * e];
            for a in 0..3 {
                jtr[a] += row[a] * rk;
                for b in 0..3 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let grad = jtr.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if grad < 1e-15 || c < 1e-30 {
            break;
        }
        let mut improved = false;
        while mu < 1e12 {
            let mut m = jtj;
            for a in 0..3 {
                m[a][a] += mu * jtj[a][a].max(1e-12);
            }
            let Some(delta) = solve3(m, [-jtr[0], -jtr[1], -jtr[2]]) else {
                mu *= 10.0;
                continue;
            };
            let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            let tres = residuals(&trial);
            let tc = cost(&tres);
            if tc.is_finite() && tc < c {
                let small = delta.iter().zip(&trial).all(|(d, x)| d.abs() <= 1e-14 * x.abs().max(1e-8));
                p = trial;
                res = tres;
                c = tc;
                mu = (mu / 10.0).max(1e-15);
                improved = !small;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Some(LengthFit {
        a: p[0],
        b: p[1],
        xi: 1.0 / p[2],
        rms: (c / r_max as f64).sqrt(),
        r_max,
        iterations,
    })
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = rhs[r];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}

/// Fits the profile over `r = 1 … r_max`, `r_max` the largest `r` with
/// `E_r > eps`. `None` when fewer than three separations qualify.
pub fn entanglement_length(profile: &EntanglementProfile, eps: f64) -> Option<LengthFit> {
    let r_max = profile.values.iter().rposition(|&e| e > eps)? + 1;
    fit_exponential(&profile.values[..r_max])
}
