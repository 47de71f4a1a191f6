//! Training for the unrolled solver: the supervised square loss, the
//! duality-gap loss with a scaling projection onto the dual-feasible box,
//! hand-derived reverse-mode gradients through all K layers, and the
//! mini-batch SGD loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{check_d_positive, IterateState, LayerParams, ProblemInstance};
use crate::network::{forward, ForwardTape, Network};
use crate::prox::soft_threshold_backward;

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub dw: Matrix,
    pub dtheta: Vec<f64>,
    pub dbeta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GradientSet {
    pub layers: Vec<LayerGrads>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| LayerGrads {
                dw: Matrix::zeros(l.m(), l.d()),
                dtheta: vec![0.0; l.d()],
                dbeta: vec![0.0; l.m()],
            })
            .collect();
        GradientSet { layers }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.dw.is_finite()
                && l.dtheta.iter().all(|v| v.is_finite())
                && l.dbeta.iter().all(|v| v.is_finite())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Supervised,
    DualGap,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss_kind: LossKind,
    pub seed: u64,
    /// Clamp theta/beta positive after each step.
    pub project_params: bool,
    /// Also re-check D positivity per layer after each step and report
    /// failures; an eigen-decomposition per batch, so off by default.
    pub check_positivity: bool,
    /// Optional feasibility penalty added to the dual-gap loss; 0 disables.
    pub penalty_weight: f64,
    /// Keep every W_k fixed at its initial value and learn only theta/beta.
    /// Much lower capacity; generalizes better on small sample counts.
    pub freeze_w: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 64,
            loss_kind: LossKind::Supervised,
            seed: 0,
            project_params: true,
            check_positivity: false,
            penalty_weight: 0.0,
            freeze_w: false,
        }
    }
}

/// |Z_K - Z*|_F^2 + |E_K - E*|_F^2.
pub fn loss_supervised(final_state: &IterateState, z_true: &Matrix, e_true: &Matrix) -> Result<f64> {
    let dz = final_state.z.sub(z_true)?;
    let de = final_state.e.sub(e_true)?;
    Ok(dz.frob_norm().powi(2) + de.frob_norm().powi(2))
}

/// The Lagrange dual at lambda: -<lambda, X> on the dual-feasible box
/// (|A'lambda|_inf <= lambda_reg, |lambda|_inf <= 1), negative infinity
/// outside it.
pub fn dual_function(problem: &ProblemInstance, lambda: &Matrix) -> Result<f64> {
    problem.x.check_same_shape(lambda, "dual_function")?;
    let at_lambda = problem.a.tr_matmul(lambda)?;
    let tol = 1e-12;
    if at_lambda.max_abs() <= problem.lambda_reg + tol && lambda.max_abs() <= 1.0 + tol {
        Ok(-lambda.frob_dot(&problem.x)?)
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// Scale factor that pulls lambda into the dual-feasible box:
/// s = max(1, |lambda|_inf, |A'lambda|_inf / lambda_reg).
pub fn dual_scale(problem: &ProblemInstance, lambda: &Matrix) -> Result<f64> {
    let at_lambda = problem.a.tr_matmul(lambda)?;
    Ok(1.0f64
        .max(lambda.max_abs())
        .max(at_lambda.max_abs() / problem.lambda_reg))
}

/// Duality-gap loss: lambda_reg*|Z|_1 + |E|_1 + <lambda/s, X> with the
/// scaling projection above; always finite.
pub fn loss_dual_gap(problem: &ProblemInstance, final_state: &IterateState) -> Result<f64> {
    let s = dual_scale(problem, &final_state.lambda)?;
    let scaled = final_state.lambda.scale(1.0 / s);
    Ok(problem.lambda_reg * final_state.z.l1_norm()
        + final_state.e.l1_norm()
        + scaled.frob_dot(&problem.x)?)
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn argmax_abs(m: &Matrix) -> (usize, usize, f64) {
    let mut best = (0, 0, 0.0f64);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if v.abs() > best.2.abs() {
                best = (i, j, v);
            }
        }
    }
    best
}

/// Gradient seed of the dual-gap loss at the network output. The scale s
/// keeps only its active branch; ties resolve to the constant branch.
pub fn loss_dual_gap_grad(
    problem: &ProblemInstance,
    final_state: &IterateState,
) -> Result<IterateState> {
    let gz = final_state.z.map(|v| problem.lambda_reg * sign0(v));
    let ge = final_state.e.map(sign0);

    let lambda = &final_state.lambda;
    let at_lambda = problem.a.tr_matmul(lambda)?;
    let a_branch = lambda.max_abs();
    let b_branch = at_lambda.max_abs() / problem.lambda_reg;
    let s = 1.0f64.max(a_branch).max(b_branch);
    let glambda = if s <= 1.0 {
        problem.x.clone()
    } else {
        let lam_x = lambda.frob_dot(&problem.x)?;
        let mut g = problem.x.scale(1.0 / s);
        let coef = lam_x / (s * s);
        if a_branch >= b_branch {
            let (p, q, v) = argmax_abs(lambda);
            g.set(p, q, g.get(p, q) - coef * sign0(v));
        } else {
            // s = |(A'lambda)_pq| / lambda_reg; ds/dlambda sits on column q
            let (p, q, v) = argmax_abs(&at_lambda);
            let sgn = sign0(v) / problem.lambda_reg;
            for i in 0..problem.m() {
                let cur = g.get(i, q);
                g.set(i, q, cur - coef * sgn * problem.a.get(i, p));
            }
        }
        g
    };
    Ok(IterateState {
        z: gz,
        e: ge,
        lambda: glambda,
    })
}

/// Gradient seed of the supervised loss at the network output.
pub fn loss_supervised_grad(
    final_state: &IterateState,
    z_true: &Matrix,
    e_true: &Matrix,
) -> Result<IterateState> {
    Ok(IterateState {
        z: final_state.z.sub(z_true)?.scale(2.0),
        e: final_state.e.sub(e_true)?.scale(2.0),
        lambda: Matrix::zeros(e_true.rows(), e_true.cols()),
    })
}

fn row_sums_product(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    a.check_same_shape(b, "row_sums_product")?;
    let mut out = vec![0.0; a.rows()];
    for i in 0..a.rows() {
        let mut s = 0.0;
        for j in 0..a.cols() {
            s += a.get(i, j) * b.get(i, j);
        }
        out[i] = s;
    }
    Ok(out)
}

/// Reverse mode through the whole unroll. `seed` is dLoss/d(output state).
///
/// Accounts for theta's dual role (1/theta scaling of the pre-activation and
/// the lambda_reg/theta threshold) and beta's triple role (residual scaling,
/// E-step threshold 1/beta with shift lambda/beta, multiplier update).
pub fn backward(
    problem: &ProblemInstance,
    net: &Network,
    tape: &ForwardTape,
    seed: &IterateState,
) -> Result<GradientSet> {
    if tape.len() != net.depth() {
        return Err(Error::Argument(format!(
            "tape has {} layers but network has {}",
            tape.len(),
            net.depth()
        )));
    }
    let a = &problem.a;
    let mut grads = GradientSet::zeros_like(net);
    let mut gz = seed.z.clone();
    let mut ge = seed.e.clone();
    let mut gl = seed.lambda.clone();

    for k in (0..net.depth()).rev() {
        let params: &LayerParams = &net.layers[k];
        let rec = &tape[k];
        let inv_beta: Vec<f64> = params.beta.iter().map(|b| 1.0 / b).collect();
        let inv_theta: Vec<f64> = params.theta.iter().map(|t| 1.0 / t).collect();

        // lambda+ = lambda + beta o (A Z+ + E+ - X)
        let c = rec
            .output
            .lambda
            .sub(&rec.input.lambda)?
            .row_scale(&inv_beta)?;
        let mut dbeta = row_sums_product(&gl, &c)?;
        let gc = gl.row_scale(&params.beta)?;
        let mut g_z_out = gz.add(&a.tr_matmul(&gc)?)?;
        let g_e_out = ge.add(&gc)?;
        let mut gl_in = gl.clone();

        // E+ = soft(arg_e, 1/beta), arg_e = X - A Z+ - (1/beta) o lambda
        let tau_e: Vec<f64> = inv_beta.clone();
        let (g_arg_e, g_tau_e) = soft_threshold_backward(&rec.arg_e, &tau_e, &g_e_out)?;
        for j in 0..params.m() {
            dbeta[j] -= g_tau_e[j] * inv_beta[j] * inv_beta[j];
        }
        g_z_out = g_z_out.sub(&a.tr_matmul(&g_arg_e)?)?;
        gl_in = gl_in.sub(&g_arg_e.row_scale(&inv_beta)?)?;
        let shift_term = row_sums_product(&g_arg_e, &rec.input.lambda)?;
        for j in 0..params.m() {
            dbeta[j] += shift_term[j] * inv_beta[j] * inv_beta[j];
        }

        // Z+ = soft(arg_z, lambda_reg/theta), arg_z = Z - (1/theta) o W'P
        let tau_z: Vec<f64> = params
            .theta
            .iter()
            .map(|t| problem.lambda_reg / t)
            .collect();
        let (g_arg_z, g_tau_z) = soft_threshold_backward(&rec.arg_z, &tau_z, &g_z_out)?;
        let mut dtheta = vec![0.0; params.d()];
        for i in 0..params.d() {
            dtheta[i] -= g_tau_z[i] * problem.lambda_reg * inv_theta[i] * inv_theta[i];
        }
        // recover Q = W'P from the tape: Q = theta o (Z - arg_z)
        let q = rec.input.z.sub(&rec.arg_z)?.row_scale(&params.theta)?;
        let q_term = row_sums_product(&g_arg_z, &q)?;
        for i in 0..params.d() {
            dtheta[i] += q_term[i] * inv_theta[i] * inv_theta[i];
        }
        let mut gz_in = g_arg_z.clone();
        let gq = g_arg_z.row_scale(&inv_theta)?.scale(-1.0);
        // P = lambda + beta o T
        let p_mat = rec.input.lambda.add(&rec.t.row_scale(&params.beta)?)?;
        let dw = p_mat.matmul_tr(&gq)?;
        let gp = params.w.matmul(&gq)?;
        gl_in = gl_in.add(&gp)?;
        let p_term = row_sums_product(&gp, &rec.t)?;
        for j in 0..params.m() {
            dbeta[j] += p_term[j];
        }
        // T = A Z + E - X
        let gt = gp.row_scale(&params.beta)?;
        gz_in = gz_in.add(&a.tr_matmul(&gt)?)?;
        let ge_in = gt;

        grads.layers[k] = LayerGrads { dw, dtheta, dbeta };
        gz = gz_in;
        ge = ge_in;
        gl = gl_in;
    }
    Ok(grads)
}

#[derive(Debug, Clone)]
pub struct SgdOutcome {
    pub net: Network,
    /// Layers whose operator D lost positivity after the step; only
    /// populated when the config projects parameters.
    pub nonpositive_layers: Vec<usize>,
}

pub fn sgd_step(
    net: &Network,
    grads: &GradientSet,
    cfg: &TrainConfig,
    a: &Matrix,
) -> Result<SgdOutcome> {
    if grads.layers.len() != net.depth() {
        return Err(Error::Argument("gradient/network layer count mismatch".into()));
    }
    if !grads.is_finite() {
        let bad = grads
            .layers
            .iter()
            .position(|l| {
                !(l.dw.is_finite()
                    && l.dtheta.iter().all(|v| v.is_finite())
                    && l.dbeta.iter().all(|v| v.is_finite()))
            })
            .unwrap();
        return Err(Error::Divergence(format!(
            "non-finite gradient in layer {bad}"
        )));
    }
    let lr = cfg.learning_rate;
    let mut layers = Vec::with_capacity(net.depth());
    let mut nonpositive = Vec::new();
    for (k, (layer, g)) in net.layers.iter().zip(&grads.layers).enumerate() {
        let w = if cfg.freeze_w {
            layer.w.clone()
        } else {
            layer.w.sub(&g.dw.scale(lr))?
        };
        let mut theta: Vec<f64> = layer
            .theta
            .iter()
            .zip(&g.dtheta)
            .map(|(t, d)| t - lr * d)
            .collect();
        let mut beta: Vec<f64> = layer
            .beta
            .iter()
            .zip(&g.dbeta)
            .map(|(b, d)| b - lr * d)
            .collect();
        if cfg.project_params {
            for t in &mut theta {
                *t = t.max(1e-6);
            }
            for b in &mut beta {
                *b = b.max(1e-6);
            }
        }
        let new_layer = LayerParams::new(w, theta, beta)?;
        if cfg.project_params && cfg.check_positivity {
            // report only; the step itself is kept
            if !check_d_positive(&new_layer, a, 0.0)
                .map(|r| r.positive)
                .unwrap_or(false)
            {
                nonpositive.push(k);
            }
        }
        layers.push(new_layer);
    }
    Ok(SgdOutcome {
        net: Network {
            layers,
            lambda_reg: net.lambda_reg,
        },
        nonpositive_layers: nonpositive,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LossRecord {
    pub epoch: usize,
    pub batch: usize,
    pub loss: f64,
}

pub fn loss_log_csv(records: &[LossRecord]) -> String {
    let mut out = String::from("epoch,batch,loss\n");
    for r in records {
        out.push_str(&format!("{},{},{:.17e}\n", r.epoch, r.batch, r.loss));
    }
    out
}

/// Per-batch loss and gradient seed, both averaged over the batch columns.
fn batch_loss_and_seed(
    problem: &ProblemInstance,
    final_state: &IterateState,
    truth: Option<(&Matrix, &Matrix)>,
    cfg: &TrainConfig,
) -> Result<(f64, IterateState)> {
    let ncols = problem.n() as f64;
    let (mut loss, mut seed) = match cfg.loss_kind {
        LossKind::Supervised => {
            let (z_true, e_true) = truth.ok_or_else(|| {
                Error::Argument("supervised loss requires ground truth".into())
            })?;
            (
                loss_supervised(final_state, z_true, e_true)?,
                loss_supervised_grad(final_state, z_true, e_true)?,
            )
        }
        LossKind::DualGap => (
            loss_dual_gap(problem, final_state)?,
            loss_dual_gap_grad(problem, final_state)?,
        ),
    };
    if cfg.penalty_weight > 0.0 {
        let r = problem
            .a
            .matmul(&final_state.z)?
            .add(&final_state.e)?
            .sub(&problem.x)?;
        loss += cfg.penalty_weight * r.frob_norm().powi(2);
        let gr = r.scale(2.0 * cfg.penalty_weight);
        seed.z = seed.z.add(&problem.a.tr_matmul(&gr)?)?;
        seed.e = seed.e.add(&gr)?;
    }
    let inv = 1.0 / ncols;
    Ok((
        loss * inv,
        IterateState {
            z: seed.z.scale(inv),
            e: seed.e.scale(inv),
            lambda: seed.lambda.scale(inv),
        },
    ))
}

/// Shuffled mini-batch SGD; deterministic given the config seed.
pub fn train(
    net: &Network,
    dataset: &Dataset,
    cfg: &TrainConfig,
) -> Result<(Network, Vec<LossRecord>)> {
    if dataset.n_samples() == 0 {
        return Err(Error::Argument("dataset is empty".into()));
    }
    if cfg.batch_size < 1 {
        return Err(Error::Argument("batch_size must be >= 1".into()));
    }
    if cfg.loss_kind == LossKind::Supervised && !dataset.has_ground_truth() {
        return Err(Error::Argument(
            "supervised loss requires ground truth in the dataset".into(),
        ));
    }
    let full = ProblemInstance::new(dataset.a.clone(), dataset.x.clone(), net.lambda_reg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = net.clone();
    let mut log = Vec::new();
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..dataset.n_samples()).collect();
        order.shuffle(&mut rng);
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let problem = full.restrict_columns(chunk);
            let truth = dataset
                .z_true
                .as_ref()
                .zip(dataset.e_true.as_ref())
                .map(|(z, e)| (z.select_columns(chunk), e.select_columns(chunk)));
            let out = forward(&problem, &current, true).map_err(|e| {
                Error::Divergence(format!("epoch {epoch}, batch {batch_idx}: {e}"))
            })?;
            let tape = out.tape.as_ref().unwrap();
            let (loss, seed) = batch_loss_and_seed(
                &problem,
                &out.final_state,
                truth.as_ref().map(|(z, e)| (z, e)),
                cfg,
            )?;
            if !loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite loss at epoch {epoch}, batch {batch_idx}"
                )));
            }
            let grads = backward(&problem, &current, tape, &seed)?;
            current = sgd_step(&current, &grads, cfg, &dataset.a)?.net;
            log.push(LossRecord {
                epoch,
                batch: batch_idx,
                loss,
            });
        }
    }
    Ok((current, log))
}
