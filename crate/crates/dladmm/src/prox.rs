//! Soft-threshold proximal operators for l1 objectives, their
//! almost-everywhere derivatives, and the warm-up proximal-gradient step.
//!
//! Entries sitting exactly on a threshold take derivative 0 (the dead-zone
//! branch), so gradients stay bounded.

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, Matrix};

/// sign(x) * max(|x| - tau_i, 0) with one threshold per row.
pub fn soft_threshold(x: &Matrix, tau: &[f64]) -> Result<Matrix> {
    if tau.len() != x.rows() {
        return Err(Error::Dim(format!(
            "soft_threshold: {} thresholds for {} rows",
            tau.len(),
            x.rows()
        )));
    }
    if tau.iter().any(|t| *t < 0.0 || !t.is_finite()) {
        return Err(Error::Argument("threshold must be nonnegative".into()));
    }
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        let t = tau[i];
        for j in 0..x.cols() {
            let v = x.get(i, j);
            out.set(i, j, v.signum() * (v.abs() - t).max(0.0));
        }
    }
    Ok(out)
}

/// Reverse-mode rule for soft_threshold.
///
/// grad_x = upstream masked by |x| > tau; grad_tau_i sums
/// -sign(x_ij) * upstream_ij over the active entries of row i.
pub fn soft_threshold_backward(
    x: &Matrix,
    tau: &[f64],
    upstream: &Matrix,
) -> Result<(Matrix, Vec<f64>)> {
    if tau.len() != x.rows() {
        return Err(Error::Dim("soft_threshold_backward: threshold length".into()));
    }
    x.check_same_shape(upstream, "soft_threshold_backward")?;
    let mut grad_x = Matrix::zeros(x.rows(), x.cols());
    let mut grad_tau = vec![0.0; x.rows()];
    for i in 0..x.rows() {
        let t = tau[i];
        for j in 0..x.cols() {
            let v = x.get(i, j);
            if v.abs() > t {
                let u = upstream.get(i, j);
                grad_x.set(i, j, u);
                grad_tau[i] -= v.signum() * u;
            }
        }
    }
    Ok((grad_x, grad_tau))
}

/// prox of lambda_reg*|.|_1 in the theta-weighted norm: soft threshold at
/// lambda_reg / theta_i per row.
pub fn prox_f(r: &Matrix, theta: &[f64], lambda_reg: f64) -> Result<Matrix> {
    if theta.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Argument("prox_f: theta must be positive".into()));
    }
    if lambda_reg < 0.0 {
        return Err(Error::Argument("prox_f: lambda_reg must be nonnegative".into()));
    }
    let tau: Vec<f64> = theta.iter().map(|t| lambda_reg / t).collect();
    soft_threshold(r, &tau)
}

/// prox of |.|_1 in the beta-weighted norm: soft threshold at 1 / beta_j per row.
pub fn prox_g(r: &Matrix, beta: &[f64]) -> Result<Matrix> {
    if beta.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::Argument("prox_g: beta must be positive".into()));
    }
    let tau: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
    soft_threshold(r, &tau)
}

#[derive(Debug, Clone)]
pub struct ProxGradResult {
    pub z: Matrix,
    /// Set when t * |A|^2 >= 1, i.e. the classical step-size condition fails.
    pub step_size_warning: bool,
}

/// One proximal-gradient step for min lambda_reg*|z|_1 + 1/2 |A z - b|_F^2.
pub fn prox_gradient_step(
    z: &Matrix,
    a: &Matrix,
    b: &Matrix,
    t: f64,
    lambda_reg: f64,
) -> Result<ProxGradResult> {
    if !(t > 0.0) {
        return Err(Error::Argument("step size must be positive".into()));
    }
    let resid = a.matmul(z)?.sub(b)?;
    let grad = a.tr_matmul(&resid)?;
    let arg = z.sub(&grad.scale(t))?;
    let theta = vec![1.0 / t; z.rows()];
    let out = prox_f(&arg, &theta, lambda_reg)?;
    let na = spectral_norm(a, 1e-10, 10_000);
    Ok(ProxGradResult {
        z: out,
        step_size_warning: t * na * na >= 1.0,
    })
}
