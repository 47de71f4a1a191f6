//! Classical linearized ADMM for min lambda_reg*|Z|_1 + |E|_1
//! s.t. X = A Z + E, with the E block handled by an exact prox.
//! Serves as the untrained baseline and as the oracle generator for the
//! convergence diagnostics.

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, Matrix};
use crate::model::{IterateState, ProblemInstance};
use crate::prox::{prox_f, prox_g};

#[derive(Debug, Clone)]
pub struct LadmmConfig {
    /// Penalty parameter.
    pub beta: f64,
    /// Step constant of the Z block; must exceed beta * |A|^2 for the
    /// implied operator D to be positive.
    pub l1: f64,
    pub max_iters: usize,
    /// Relative feasibility-residual stopping tolerance.
    pub tol_residual: f64,
    pub record_trace: bool,
}

impl LadmmConfig {
    /// beta with the tightest safe step, L1 = 1.001 * beta * |A|^2.
    pub fn with_default_l1(a: &Matrix, beta: f64, max_iters: usize, tol_residual: f64) -> Self {
        let na = spectral_norm(a, 1e-10, 10_000);
        LadmmConfig {
            beta,
            l1: 1.001 * beta * na * na,
            max_iters,
            tol_residual,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !(self.l1 > 0.0) {
            return Err(Error::Argument("beta and L1 must be positive".into()));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::Argument("tol_residual must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    /// |A Z + E - X|_F per iteration, after the update.
    pub residuals: Vec<f64>,
    /// lambda_reg*|Z|_1 + |E|_1 per iteration.
    pub objectives: Vec<f64>,
    /// Full iterates, present when the config asked for them.
    pub iterates: Option<Vec<IterateState>>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub state: IterateState,
    pub iterations: usize,
    /// Relative feasibility residual at termination.
    pub residual: f64,
    pub converged: bool,
    pub trace: SolveTrace,
}

pub fn ladmm_step(
    problem: &ProblemInstance,
    state: &IterateState,
    cfg: &LadmmConfig,
) -> Result<IterateState> {
    cfg.validate()?;
    let a = &problem.a;
    let t = a.matmul(&state.z)?.add(&state.e)?.sub(&problem.x)?;
    let inner = state.lambda.add(&t.scale(cfg.beta))?;
    let arg_z = state.z.sub(&a.tr_matmul(&inner)?.scale(1.0 / cfg.l1))?;
    let theta = vec![cfg.l1; a.cols()];
    let z_next = prox_f(&arg_z, &theta, problem.lambda_reg)?;
    if !z_next.is_finite() {
        return Err(Error::Divergence("Z update produced non-finite values".into()));
    }
    let az = a.matmul(&z_next)?;
    let arg_e = problem
        .x
        .sub(&az)?
        .sub(&state.lambda.scale(1.0 / cfg.beta))?;
    let beta_vec = vec![cfg.beta; a.rows()];
    let e_next = prox_g(&arg_e, &beta_vec)?;
    if !e_next.is_finite() {
        return Err(Error::Divergence("E update produced non-finite values".into()));
    }
    let resid = az.add(&e_next)?.sub(&problem.x)?;
    let lambda_next = state.lambda.add(&resid.scale(cfg.beta))?;
    if !lambda_next.is_finite() {
        return Err(Error::Divergence(
            "multiplier update produced non-finite values".into(),
        ));
    }
    Ok(IterateState {
        z: z_next,
        e: e_next,
        lambda: lambda_next,
    })
}

/// Iterates from zero until the relative feasibility residual drops below
/// tol_residual or max_iters is exhausted.
pub fn solve(problem: &ProblemInstance, cfg: &LadmmConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let (m, d, n) = (problem.m(), problem.d(), problem.n());
    let mut state = IterateState::zeros(m, d, n);
    let x_scale = problem.x.frob_norm().max(1.0);
    let mut trace = SolveTrace {
        iterates: cfg.record_trace.then(Vec::new),
        ..Default::default()
    };
    let mut residual = problem.feasibility_residual(&state)? / x_scale;
    if residual <= cfg.tol_residual {
        return Ok(SolveResult {
            state,
            iterations: 0,
            residual,
            converged: true,
            trace,
        });
    }
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        state = ladmm_step(problem, &state, cfg)
            .map_err(|e| Error::Divergence(format!("iteration {k}: {e}")))?;
        iterations = k + 1;
        residual = problem.feasibility_residual(&state)? / x_scale;
        trace.residuals.push(residual);
        trace.objectives.push(problem.objective(&state));
        if let Some(states) = trace.iterates.as_mut() {
            states.push(state.clone());
        }
        if residual <= cfg.tol_residual {
            break;
        }
    }
    Ok(SolveResult {
        state,
        iterations,
        residual,
        converged: residual <= cfg.tol_residual,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub state: IterateState,
    /// Relative feasibility residual actually achieved.
    pub residual: f64,
    pub converged: bool,
}

/// High-accuracy reference solution used as omega-star in the contraction
/// and distance diagnostics. Falls back to the best state reached when the
/// tolerance is out of reach.
pub fn oracle_solution(problem: &ProblemInstance, beta: f64) -> Result<OracleSolution> {
    let cfg = LadmmConfig::with_default_l1(&problem.a, beta, 200_000, 1e-12);
    let result = solve(problem, &cfg)?;
    Ok(OracleSolution {
        state: result.state,
        residual: result.residual,
        converged: result.converged,
    })
}
