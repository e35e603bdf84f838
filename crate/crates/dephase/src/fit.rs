//! Damped (Levenberg–Marquardt style) weighted least squares.
//!
//! Small dense problems only: a handful of parameters, thousands of
//! points at most. Jacobians are taken by central differences on the
//! (possibly transformed) parameter vector; callers that need
//! positivity fit in log space and map uncertainties back with the
//! delta method.

use crate::error::{Error, Result};

/// Options for the damped least-squares loop.
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the largest relative parameter step falls below this.
    pub rel_step_tol: f64,
    pub lambda_init: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 200,
            rel_step_tol: 1e-8,
            lambda_init: 1e-3,
        }
    }
}

/// Converged fit: parameters, covariance from the local quadratic
/// approximation at the optimum, and diagnostics.
#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Covariance matrix, row major, `p × p`.
    pub covariance: Vec<f64>,
    /// Weighted residual sum of squares at the optimum.
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual degrees of freedom `n − p`.
    pub dof: usize,
}

impl LmFit {
    pub fn sigma(&self, i: usize) -> f64 {
        let p = self.params.len();
        self.covariance[i * p + i].max(0.0).sqrt()
    }
}

/// Minimize `Σ_i [(y_i − f(θ, x_i)) / σ_i]²` over θ.
///
/// When `sigmas` is `None` the fit is unweighted and the covariance is
/// scaled by the reduced chi-square, the usual convention when the
/// noise level is unknown.
pub fn fit_least_squares<F>(
    model: F,
    xs: &[f64],
    ys: &[f64],
    sigmas: Option<&[f64]>,
    theta0: &[f64],
    opts: LmOptions,
) -> Result<LmFit>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = xs.len();
    let p = theta0.len();
    if n != ys.len() {
        return Err(Error::invalid("ys", "length mismatch with xs"));
    }
    if let Some(s) = sigmas {
        if s.len() != n {
            return Err(Error::invalid("sigmas", "length mismatch with xs"));
        }
        if s.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::invalid("sigmas", "weights must be finite and > 0"));
        }
    }
    if n <= p {
        return Err(Error::FitFailure(format!(
            "{n} points cannot constrain {p} parameters"
        )));
    }
    let weight = |i: usize| sigmas.map(|s| 1.0 / s[i]).unwrap_or(1.0);

    let residuals = |theta: &[f64], out: &mut [f64]| -> Result<()> {
        for i in 0..n {
            let f = model(theta, xs[i]);
            if !f.is_finite() {
                return Err(Error::Numerical(format!(
                    "model returned non-finite value at x = {}",
                    xs[i]
                )));
            }
            out[i] = (ys[i] - f) * weight(i);
        }
        Ok(())
    };

    let mut theta = theta0.to_vec();
    let mut r = vec![0.0; n];
    residuals(&theta, &mut r)?;
    let mut chi2: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = vec![0.0; n * p];
    let mut r_lo = vec![0.0; n];
    let mut r_hi = vec![0.0; n];

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        // central-difference Jacobian of the residual vector
        for j in 0..p {
            let h = 1e-6 * theta[j].abs().max(1e-9);
            let mut lo = theta.clone();
            let mut hi = theta.clone();
            lo[j] -= h;
            hi[j] += h;
            residuals(&lo, &mut r_lo)?;
            residuals(&hi, &mut r_hi)?;
            for i in 0..n {
                jac[i * p + j] = (r_hi[i] - r_lo[i]) / (2.0 * h);
            }
        }
        // normal equations: (JᵀJ + λ diag) δ = −Jᵀr
        let mut a = vec![0.0; p * p];
        let mut g = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                g[j] -= jac[i * p + j] * r[i];
                for k in j..p {
                    a[j * p + k] += jac[i * p + j] * jac[i * p + k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                a[j * p + k] = a[k * p + j];
            }
        }

        let mut accepted = false;
        for _ in 0..16 {
            let mut damped = a.clone();
            for j in 0..p {
                let d = a[j * p + j].max(1e-300);
                damped[j * p + j] += lambda * d;
            }
            let Some(delta) = solve(&damped, &g, p) else {
                lambda = (lambda * 8.0).min(1e14);
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            let mut r_trial = vec![0.0; n];
            if residuals(&trial, &mut r_trial).is_err() {
                lambda = (lambda * 8.0).min(1e14);
                continue;
            }
            let chi2_trial: f64 = r_trial.iter().map(|v| v * v).sum();
            if chi2_trial.is_finite() && chi2_trial <= chi2 {
                let max_rel_step = delta
                    .iter()
                    .zip(&theta)
                    .map(|(d, t)| d.abs() / t.abs().max(1e-12))
                    .fold(0.0, f64::max);
                let rel_improvement = (chi2 - chi2_trial) / chi2.max(1e-300);
                theta = trial;
                r = r_trial;
                chi2 = chi2_trial;
                lambda = (lambda / 4.0).max(1e-14);
                accepted = true;
                // parameter-step or chi-square stationarity
                if max_rel_step < opts.rel_step_tol || rel_improvement < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda = (lambda * 8.0).min(1e14);
        }
        if converged {
            break;
        }
        if !accepted {
            // damping saturated: the current point is a (local) optimum
            converged = true;
            break;
        }
    }

    // covariance from JᵀJ at the optimum (recompute without damping)
    for j in 0..p {
        let h = 1e-6 * theta[j].abs().max(1e-9);
        let mut lo = theta.clone();
        let mut hi = theta.clone();
        lo[j] -= h;
        hi[j] += h;
        residuals(&lo, &mut r_lo)?;
        residuals(&hi, &mut r_hi)?;
        for i in 0..n {
            jac[i * p + j] = (r_hi[i] - r_lo[i]) / (2.0 * h);
        }
    }
    let mut a = vec![0.0; p * p];
    for i in 0..n {
        for j in 0..p {
            for k in 0..p {
                a[j * p + k] += jac[i * p + j] * jac[i * p + k];
            }
        }
    }
    let dof = n - p;
    let mut covariance = invert(&a, p).unwrap_or_else(|| vec![f64::NAN; p * p]);
    if sigmas.is_none() && dof > 0 {
        let scale = chi2 / dof as f64;
        for c in covariance.iter_mut() {
            *c *= scale;
        }
    }

    Ok(LmFit {
        params: theta,
        covariance,
        chi2,
        iterations,
        converged,
        dof,
    })
}

/// Weighted straight-line fit `y = a + b·x`, returning
/// `(a, b, σ_a, σ_b, chi2)`.
pub fn weighted_linear_fit(
    xs: &[f64],
    ys: &[f64],
    sigmas: Option<&[f64]>,
) -> Result<(f64, f64, f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::FitFailure("need ≥ 2 points for a line".into()));
    }
    let w = |i: usize| -> f64 {
        sigmas
            .map(|s| 1.0 / (s[i] * s[i]))
            .unwrap_or(1.0)
    };
    let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let wi = w(i);
        sw += wi;
        swx += wi * xs[i];
        swy += wi * ys[i];
        swxx += wi * xs[i] * xs[i];
        swxy += wi * xs[i] * ys[i];
    }
    let det = sw * swxx - swx * swx;
    if det.abs() < 1e-300 {
        return Err(Error::FitFailure("degenerate abscissas".into()));
    }
    let a = (swxx * swy - swx * swxy) / det;
    let b = (sw * swxy - swx * swy) / det;
    let chi2: f64 = (0..n)
        .map(|i| {
            let r = ys[i] - a - b * xs[i];
            w(i) * r * r
        })
        .sum();
    let mut var_a = swxx / det;
    let mut var_b = sw / det;
    if sigmas.is_none() && n > 2 {
        let scale = chi2 / (n - 2) as f64;
        var_a *= scale;
        var_b *= scale;
    }
    Ok((a, b, var_a.sqrt(), var_b.sqrt(), chi2))
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
fn solve(a: &[f64], b: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..p {
        let (pivot_row, pivot) = (col..p)
            .map(|r| (r, m[r * p + col].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if pivot < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for k in 0..p {
                m.swap(col * p + k, pivot_row * p + k);
            }
            x.swap(col, pivot_row);
        }
        let d = m[col * p + col];
        for r in (col + 1)..p {
            let factor = m[r * p + col] / d;
            if factor == 0.0 {
                continue;
            }
            for k in col..p {
                m[r * p + k] -= factor * m[col * p + k];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..p).rev() {
        let mut acc = x[col];
        for k in (col + 1)..p {
            acc -= m[col * p + k] * x[k];
        }
        x[col] = acc / m[col * p + col];
    }
    Some(x)
}

/// Invert a symmetric positive matrix column by column.
fn invert(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut out = vec![0.0; p * p];
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        let x = solve(a, &e, p)?;
        for row in 0..p {
            out[row * p + col] = x[row];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_exactly_on_clean_data() {
        let truth = [2.0, 0.35];
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| truth[0] * (-truth[1] * x).exp()).collect();
        let fit = fit_least_squares(
            |t, x| t[0] * (-t[1] * x).exp(),
            &xs,
            &ys,
            None,
            &[1.0, 1.0],
            LmOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        for (got, want) in fit.params.iter().zip(&truth) {
            assert!((got - want).abs() / want < 1e-8, "{got} vs {want}");
        }
        assert!(fit.chi2 < 1e-16);
    }

    #[test]
    fn weighted_fit_respects_sigmas() {
        // two inconsistent halves with very different weights: the
        // answer must follow the precise half
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let mut ys = vec![1.0; 20];
        for y in ys.iter_mut().skip(10) {
            *y = 3.0;
        }
        let mut sig = vec![0.01; 20];
        for s in sig.iter_mut().skip(10) {
            *s = 100.0;
        }
        let fit = fit_least_squares(
            |t, _| t[0],
            &xs,
            &ys,
            Some(&sig),
            &[2.0],
            LmOptions::default(),
        )
        .unwrap();
        assert!((fit.params[0] - 1.0).abs() < 1e-4, "got {}", fit.params[0]);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.7 * x).collect();
        let (a, b, sa, sb, chi2) = weighted_linear_fit(&xs, &ys, None).unwrap();
        assert!((a - 3.0).abs() < 1e-12);
        assert!((b + 0.7).abs() < 1e-12);
        assert!(chi2 < 1e-20);
        assert!(sa >= 0.0 && sb >= 0.0);
    }

    #[test]
    fn covariance_matches_linear_regression_formula() {
        // y = a + b·x with unit sigmas: the covariance has a closed form
        let xs: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let sig = vec![1.0; 16];
        let fit = fit_least_squares(
            |t, x| t[0] + t[1] * x,
            &xs,
            &ys,
            Some(&sig),
            &[0.5, 1.5],
            LmOptions::default(),
        )
        .unwrap();
        let (_, _, sa, sb, _) = weighted_linear_fit(&xs, &ys, Some(&sig)).unwrap();
        assert!((fit.sigma(0) - sa).abs() < 1e-6);
        assert!((fit.sigma(1) - sb).abs() < 1e-6);
    }

    #[test]
    fn rejects_underdetermined_problems() {
        let xs = [1.0, 2.0];
        let ys = [1.0, 2.0];
        assert!(fit_least_squares(
            |t, x| t[0] + t[1] * x + t[2] * x * x,
            &xs,
            &ys,
            None,
            &[0.0, 0.0, 0.0],
            LmOptions::default(),
        )
        .is_err());
    }
}
