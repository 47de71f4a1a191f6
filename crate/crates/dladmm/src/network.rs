//! The K-layer unrolled solver: per-layer learnable (W, theta, beta), a
//! forward pass that mirrors the LADMM recursion, and a tape capturing every
//! pre-activation value so reverse mode never has to recompute.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, Matrix};
use crate::model::{check_d_positive, IterateState, LayerParams, ProblemInstance};
use crate::prox::{prox_f, prox_g};

#[derive(Debug, Clone)]
pub struct Network {
    pub layers: Vec<LayerParams>,
    pub lambda_reg: f64,
}

impl Network {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn m(&self) -> usize {
        self.layers[0].m()
    }

    pub fn d(&self) -> usize {
        self.layers[0].d()
    }
}

/// Per-layer record of everything backprop needs: the input state, the
/// constraint residual T, and both prox arguments.
#[derive(Debug, Clone)]
pub struct LayerTape {
    pub input: IterateState,
    pub t: Matrix,
    /// Argument of the Z-step soft threshold.
    pub arg_z: Matrix,
    /// Argument of the E-step soft threshold.
    pub arg_e: Matrix,
    pub output: IterateState,
}

pub type ForwardTape = Vec<LayerTape>;

#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub final_state: IterateState,
    /// Output of every layer, in order; length K.
    pub layer_states: Vec<IterateState>,
    pub tape: Option<ForwardTape>,
}

/// All layers start at the LADMM parameterization: W = A, beta = beta0,
/// theta = (1 + margin) * beta0 * |A|^2, which keeps D positive.
pub fn init_network(
    a: &Matrix,
    k: usize,
    lambda_reg: f64,
    beta0: f64,
    margin: f64,
) -> Result<Network> {
    if k < 1 {
        return Err(Error::Argument("need at least one layer".into()));
    }
    if !(beta0 > 0.0) || !(margin > 0.0) || !(lambda_reg > 0.0) {
        return Err(Error::Argument(
            "beta0, margin and lambda_reg must be positive".into(),
        ));
    }
    let na = spectral_norm(a, 1e-10, 10_000);
    let theta0 = (1.0 + margin) * beta0 * na * na;
    let layer = LayerParams::new(a.clone(), vec![theta0; a.cols()], vec![beta0; a.rows()])?;
    Ok(Network {
        layers: vec![layer; k],
        lambda_reg,
    })
}

pub fn forward_layer(
    problem: &ProblemInstance,
    params: &LayerParams,
    state: &IterateState,
) -> Result<(IterateState, LayerTape)> {
    let a = &problem.a;
    if params.m() != a.rows() || params.d() != a.cols() {
        return Err(Error::Dim("layer parameters disagree with problem".into()));
    }
    let t = a.matmul(&state.z)?.add(&state.e)?.sub(&problem.x)?;
    let inner = state.lambda.add(&t.row_scale(&params.beta)?)?;
    let inv_theta: Vec<f64> = params.theta.iter().map(|t| 1.0 / t).collect();
    let arg_z = state
        .z
        .sub(&params.w.tr_matmul(&inner)?.row_scale(&inv_theta)?)?;
    let z_next = prox_f(&arg_z, &params.theta, problem.lambda_reg)?;
    let az = a.matmul(&z_next)?;
    let inv_beta: Vec<f64> = params.beta.iter().map(|b| 1.0 / b).collect();
    let arg_e = problem
        .x
        .sub(&az)?
        .sub(&state.lambda.row_scale(&inv_beta)?)?;
    let e_next = prox_g(&arg_e, &params.beta)?;
    let resid = az.add(&e_next)?.sub(&problem.x)?;
    let lambda_next = state.lambda.add(&resid.row_scale(&params.beta)?)?;
    let output = IterateState {
        z: z_next,
        e: e_next,
        lambda: lambda_next,
    };
    if !output.is_finite() {
        return Err(Error::Divergence("layer produced non-finite values".into()));
    }
    Ok((
        output.clone(),
        LayerTape {
            input: state.clone(),
            t,
            arg_z,
            arg_e,
            output,
        },
    ))
}

/// Chains the layers from zero initialization.
pub fn forward(problem: &ProblemInstance, net: &Network, capture: bool) -> Result<ForwardResult> {
    let mut state = IterateState::zeros(problem.m(), problem.d(), problem.n());
    let mut layer_states = Vec::with_capacity(net.depth());
    let mut tape = capture.then(|| Vec::with_capacity(net.depth()));
    for (k, params) in net.layers.iter().enumerate() {
        let (next, record) = forward_layer(problem, params, &state)
            .map_err(|e| Error::Divergence(format!("layer {k}: {e}")))?;
        layer_states.push(next.clone());
        if let Some(t) = tape.as_mut() {
            t.push(record);
        }
        state = next;
    }
    Ok(ForwardResult {
        final_state: state,
        layer_states,
        tape,
    })
}

// Versioned text serialization:
//   DLADMM v1 m d K lambda_reg
// then per layer: m lines of d entries for W, one line of d thetas,
// one line of m betas. 17 significant digits throughout.

pub fn write_network(net: &Network, path: &Path) -> Result<()> {
    let mut out = String::new();
    let (m, d) = (net.m(), net.d());
    writeln!(out, "DLADMM v1 {} {} {} {:.17e}", m, d, net.depth(), net.lambda_reg).unwrap();
    for layer in &net.layers {
        for i in 0..m {
            let row: Vec<String> = (0..d).map(|j| format!("{:.17e}", layer.w.get(i, j))).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        let th: Vec<String> = layer.theta.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", th.join(" ")).unwrap();
        let be: Vec<String> = layer.beta.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", be.join(" ")).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.split_whitespace();
    let magic = tokens.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty network file".into(),
    })?;
    let version = tokens.next().unwrap_or("");
    if magic != "DLADMM" || version != "v1" {
        return Err(Error::Format(format!(
            "unsupported network header '{magic} {version}'"
        )));
    }
    let mut next_num = |what: &str| -> Result<f64> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of file reading {what}"),
            })?
            .parse::<f64>()
            .map_err(|e| Error::Parse {
                line: 0,
                msg: format!("{what}: {e}"),
            })
    };
    let m = next_num("m")? as usize;
    let d = next_num("d")? as usize;
    let k = next_num("K")? as usize;
    let lambda_reg = next_num("lambda_reg")?;
    if m < 1 || d < 1 || k < 1 {
        return Err(Error::Format("invalid network dimensions".into()));
    }
    let mut layers = Vec::with_capacity(k);
    for _ in 0..k {
        let mut w = Matrix::zeros(m, d);
        for i in 0..m {
            for j in 0..d {
                w.set(i, j, next_num("W entry")?);
            }
        }
        let mut theta = Vec::with_capacity(d);
        for _ in 0..d {
            theta.push(next_num("theta entry")?);
        }
        let mut beta = Vec::with_capacity(m);
        for _ in 0..m {
            beta.push(next_num("beta entry")?);
        }
        layers.push(LayerParams::new(w, theta, beta)?);
    }
    Ok(Network { layers, lambda_reg })
}

/// Every layer of an initialized network passes the positivity check.
pub fn verify_init_positivity(net: &Network, a: &Matrix, margin: f64) -> Result<bool> {
    for layer in &net.layers {
        if !check_d_positive(layer, a, margin)?.positive {
            return Ok(false);
        }
    }
    Ok(true)
}
