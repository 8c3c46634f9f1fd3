//! Hockett–Sherby hardening law
//! `σ(εp) = σsat − (σsat − σi)·exp(−a·εp^p)` fitted by Levenberg–Marquardt.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::lit;
use crate::{CoreError, Result};

pub const MIN_PLASTIC_POINTS: usize = 10;
const MAX_ITERATIONS: usize = 200;
const COST_TOLERANCE: f64 = 1e-10;
const P_MIN: f64 = 0.3;
const P_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HockettSherby<F> {
    pub sigma_i: F,
    pub sigma_sat: F,
    pub a: F,
    pub p: F,
    /// Root-mean-square residual of the fit, MPa.
    pub rms: F,
}

impl<F: Float> HockettSherby<F> {
    pub fn new(sigma_i: F, sigma_sat: F, a: F, p: F) -> Self {
        HockettSherby { sigma_i, sigma_sat, a, p, rms: F::zero() }
    }

    pub fn flow_stress(&self, eps_p: F) -> F {
        model([self.sigma_i, self.sigma_sat, self.a, self.p], eps_p)
    }
}

fn model<F: Float>(t: [F; 4], eps_p: F) -> F {
    let [si, ss, a, p] = t;
    ss - (ss - si) * (-a * eps_p.powf(p)).exp()
}

/// Projects parameters onto `σsat > σi > 0`, `a > 0`, `0.3 ≤ p ≤ 2`.
fn project<F: Float>(mut t: [F; 4], scale: F) -> [F; 4] {
    let tiny = lit::<F>(1e-9);
    t[0] = t[0].max(tiny * scale);
    t[1] = t[1].max(t[0] * (F::one() + tiny));
    t[2] = t[2].max(tiny);
    t[3] = t[3].max(lit(P_MIN)).min(lit(P_MAX));
    t
}

fn residuals<F: Float>(t: [F; 4], eps: &[F], sigma: &[F], out: &mut [F]) -> F {
    let mut cost = F::zero();
    for ((r, e), s) in out.iter_mut().zip(eps).zip(sigma) {
        *r = model(t, *e) - *s;
        cost = cost + *r * *r;
    }
    cost
}

/// Solves the 4×4 system by Gaussian elimination with partial pivoting.
fn solve4<F: Float>(mut m: [[F; 4]; 4], mut b: [F; 4]) -> Option<[F; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(m[pivot][col].abs() > F::zero()) {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [F::zero(); 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Least-squares fit with a central-difference Jacobian and Marquardt
/// scaling. Starts from `σi = σ[0]`, `σsat = 1.2·max σ`, `a = 5`, `p = 1`.
/// Only cost-decreasing steps are accepted, so the final cost never exceeds
/// the initial one.
pub fn fit_hockett_sherby<F: Float>(eps_p: &[F], sigma_true: &[F]) -> Result<HockettSherby<F>> {
    if eps_p.len() != sigma_true.len() {
        return Err(CoreError::Invalid("plastic strain and stress differ in length".into()));
    }
    if eps_p.len() < MIN_PLASTIC_POINTS {
        return Err(CoreError::Invalid(format!(
            "need at least {MIN_PLASTIC_POINTS} plastic points, got {}",
            eps_p.len()
        )));
    }
    if eps_p.iter().chain(sigma_true).any(|v| !v.is_finite()) || eps_p.iter().any(|e| *e <= F::zero()) {
        return Err(CoreError::Invalid("plastic data must be finite with positive strain".into()));
    }
    let max = sigma_true.iter().fold(F::neg_infinity(), |m, s| m.max(*s));
    if !(max > F::zero()) {
        return Err(CoreError::Invalid("true stress must be positive".into()));
    }
    let n = eps_p.len();
    let mut theta = project([sigma_true[0], lit::<F>(1.2) * max, lit(5.0), F::one()], max);
    let mut r = vec![F::zero(); n];
    let mut trial_r = vec![F::zero(); n];
    let mut cost = residuals(theta, eps_p, sigma_true, &mut r);
    let mut jac = vec![[F::zero(); 4]; n];
    let mut lambda = lit::<F>(1e-3);
    let h_rel = F::epsilon().cbrt();
    let (lambda_max, floor) = (lit::<F>(1e16), F::epsilon() * F::epsilon() * max * max * lit(n as f64));

    'outer: for _ in 0..MAX_ITERATIONS {
        if cost <= floor {
            break;
        }
        for k in 0..4 {
            let h = h_rel * theta[k].abs().max(F::one());
            let (mut up, mut down) = (theta, theta);
            up[k] = up[k] + h;
            down[k] = down[k] - h;
            for (row, e) in jac.iter_mut().zip(eps_p) {
                row[k] = (model(up, *e) - model(down, *e)) / (h + h);
            }
        }
        let mut jtj = [[F::zero(); 4]; 4];
        let mut jtr = [F::zero(); 4];
        for (row, ri) in jac.iter().zip(&r) {
            for i in 0..4 {
                jtr[i] = jtr[i] + row[i] * *ri;
                for j in 0..4 {
                    jtj[i][j] = jtj[i][j] + row[i] * row[j];
                }
            }
        }
        loop {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = row[i] + lambda * jtj[i][i].max(F::epsilon());
            }
            let rhs = jtr.map(|v| -v);
            if let Some(delta) = solve4(a, rhs) {
                let trial = project(
                    [theta[0] + delta[0], theta[1] + delta[1], theta[2] + delta[2], theta[3] + delta[3]],
                    max,
                );
                let trial_cost = residuals(trial, eps_p, sigma_true, &mut trial_r);
                if trial_cost.is_finite() && trial_cost < cost {
                    let change = (cost - trial_cost) / cost;
                    theta = trial;
                    cost = trial_cost;
                    std::mem::swap(&mut r, &mut trial_r);
                    lambda = (lambda / lit(3.0)).max(lit(1e-12));
                    if change < lit(COST_TOLERANCE) {
                        break 'outer;
                    }
                    break;
                }
            }
            lambda = lambda * lit(4.0);
            if lambda > lambda_max {
                // no descent direction left
                break 'outer;
            }
        }
    }
    if !cost.is_finite() {
        return Err(CoreError::NonConvergence("cost is not finite".into()));
    }
    let [sigma_i, sigma_sat, a, p] = theta;
    // a flat fitted curve over the data range leaves the parameters unidentified
    let (lo, hi) = eps_p
        .iter()
        .fold((F::infinity(), F::neg_infinity()), |(l, h), e| (l.min(*e), h.max(*e)));
    let span = (model(theta, hi) - model(theta, lo)).abs();
    let tol = lit::<F>(1e-6) * sigma_sat;
    if sigma_sat - sigma_i <= tol || span <= tol {
        return Err(CoreError::NonConvergence(
            "degenerate fit: no hardening within the data range".into(),
        ));
    }
    Ok(HockettSherby {
        sigma_i,
        sigma_sat,
        a,
        p,
        rms: (cost / lit(n as f64)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample(hs: &HockettSherby<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
        let eps: Vec<f64> = (0..n).map(|i| 0.002 + 0.298 * i as f64 / (n - 1) as f64).collect();
        let sig = eps.iter().map(|e| hs.flow_stress(*e)).collect();
        (eps, sig)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn recovers_noise_free_parameters() {
        let truth = HockettSherby::new(200.0, 420.0, 9.0, 0.9);
        let (eps, sig) = sample(&truth, 120);
        let fit = fit_hockett_sherby(&eps, &sig).unwrap();
        for (got, want) in [(fit.sigma_i, 200.0), (fit.sigma_sat, 420.0), (fit.a, 9.0), (fit.p, 0.9)] {
            assert!(rel(got, want) < 1e-6, "{got} vs {want}");
        }
        assert!(fit.rms < 1e-6);
    }

    #[test]
    fn tolerates_one_percent_noise() {
        let truth = HockettSherby::new(200.0, 420.0, 9.0, 0.9);
        let (eps, mut sig) = sample(&truth, 200);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.01).unwrap();
        for s in &mut sig {
            *s *= 1.0 + noise.sample(&mut rng);
        }
        let fit = fit_hockett_sherby(&eps, &sig).unwrap();
        for (got, want) in [(fit.sigma_i, 200.0), (fit.sigma_sat, 420.0), (fit.a, 9.0), (fit.p, 0.9)] {
            assert!(rel(got, want) < 0.05, "{got} vs {want}");
        }
        assert!(fit.rms <= 5.0);
    }

    #[test]
    fn constant_stress_is_degenerate() {
        let eps: Vec<f64> = (1..=30).map(|i| i as f64 * 0.01).collect();
        let sig = vec![250.0; 30];
        assert!(matches!(fit_hockett_sherby(&eps, &sig), Err(CoreError::NonConvergence(_))));
    }

    #[test]
    fn too_few_points() {
        assert!(fit_hockett_sherby(&[0.01; 5], &[100.0; 5]).is_err());
    }

    #[test]
    fn linear_solver() {
        let m = [[4.0, 1.0, 0.0, 0.0], [1.0, 3.0, 1.0, 0.0], [0.0, 1.0, 2.0, 1.0], [0.0, 0.0, 1.0, 5.0]];
        let x = solve4(m, [1.0, 2.0, 3.0, 4.0]).unwrap();
        for (row, b) in m.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            let lhs: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((lhs - b).abs() < 1e-12);
        }
        assert!(solve4([[0.0; 4]; 4], [1.0; 4]).is_none());
    }
}
