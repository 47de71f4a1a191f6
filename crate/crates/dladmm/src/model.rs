//! Problem and iterate types shared by the solvers, plus the structural
//! operators the convergence diagnostics are built on: the linear operator
//! D(Z) = theta o Z - W'(beta o (A Z)) and the block quadratic form
//! <Z, D(Z)> + <E, beta o E> + <lambda, beta^-1 o lambda>.

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, symmetric_eigenvalues, Matrix};

/// One constrained problem: min lambda_reg*|Z|_1 + |E|_1 s.t. X = A Z + E.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: Matrix,
    pub x: Matrix,
    pub lambda_reg: f64,
}

impl ProblemInstance {
    pub fn new(a: Matrix, x: Matrix, lambda_reg: f64) -> Result<Self> {
        if a.rows() != x.rows() {
            return Err(Error::Dim(format!(
                "dictionary has {} rows but observations have {}",
                a.rows(),
                x.rows()
            )));
        }
        if !(lambda_reg > 0.0) {
            return Err(Error::Argument("lambda_reg must be positive".into()));
        }
        Ok(ProblemInstance { a, x, lambda_reg })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    /// Restriction of the problem to a subset of sample columns.
    pub fn restrict_columns(&self, idx: &[usize]) -> ProblemInstance {
        ProblemInstance {
            a: self.a.clone(),
            x: self.x.select_columns(idx),
            lambda_reg: self.lambda_reg,
        }
    }

    pub fn objective(&self, state: &IterateState) -> f64 {
        self.lambda_reg * state.z.l1_norm() + state.e.l1_norm()
    }

    /// Frobenius norm of A Z + E - X.
    pub fn feasibility_residual(&self, state: &IterateState) -> Result<f64> {
        let r = self.a.matmul(&state.z)?.add(&state.e)?.sub(&self.x)?;
        Ok(r.frob_norm())
    }
}

/// The (Z, E, lambda) triple carried by both solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub z: Matrix,
    pub e: Matrix,
    pub lambda: Matrix,
}

impl IterateState {
    pub fn zeros(m: usize, d: usize, n: usize) -> Self {
        IterateState {
            z: Matrix::zeros(d, n),
            e: Matrix::zeros(m, n),
            lambda: Matrix::zeros(m, n),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.e.is_finite() && self.lambda.is_finite()
    }

    pub fn sub(&self, other: &IterateState) -> Result<IterateState> {
        Ok(IterateState {
            z: self.z.sub(&other.z)?,
            e: self.e.sub(&other.e)?,
            lambda: self.lambda.sub(&other.lambda)?,
        })
    }
}

/// One layer's learnables: weight W plus per-row step/threshold theta and
/// per-row penalty beta, broadcast across sample columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w: Matrix,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LayerParams {
    pub fn new(w: Matrix, theta: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if theta.len() != w.cols() || beta.len() != w.rows() {
            return Err(Error::Dim(format!(
                "params: W is {}x{}, theta has {}, beta has {}",
                w.rows(),
                w.cols(),
                theta.len(),
                beta.len()
            )));
        }
        if !w.is_finite() {
            return Err(Error::Argument("W must be finite".into()));
        }
        if theta.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Argument("theta must be strictly positive".into()));
        }
        if beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Argument("beta must be strictly positive".into()));
        }
        Ok(LayerParams { w, theta, beta })
    }

    pub fn m(&self) -> usize {
        self.w.rows()
    }

    pub fn d(&self) -> usize {
        self.w.cols()
    }
}

/// apply_D: theta o Z - W'(beta o (A Z)).
pub fn apply_d(params: &LayerParams, a: &Matrix, z: &Matrix) -> Result<Matrix> {
    if a.cols() != z.rows() || a.rows() != params.m() || a.cols() != params.d() {
        return Err(Error::Dim(format!(
            "apply_d: A {}x{}, W {}x{}, Z {}x{}",
            a.rows(),
            a.cols(),
            params.w.rows(),
            params.w.cols(),
            z.rows(),
            z.cols()
        )));
    }
    let az = a.matmul(z)?.row_scale(&params.beta)?;
    let second = params.w.tr_matmul(&az)?;
    z.row_scale(&params.theta)?.sub(&second)
}

#[derive(Debug, Clone, Copy)]
pub struct PositivityReport {
    pub lambda_min: f64,
    pub positive: bool,
}

/// Smallest eigenvalue of the symmetric part of M = diag(theta) - W'diag(beta)A,
/// the per-column matrix of the operator D. `positive` means lambda_min > margin.
///
/// Dense Jacobi up to d = 512, shifted power iteration beyond.
pub fn check_d_positive(params: &LayerParams, a: &Matrix, margin: f64) -> Result<PositivityReport> {
    let d = params.d();
    if a.rows() != params.m() || a.cols() != d {
        return Err(Error::Dim("check_d_positive: A and params disagree".into()));
    }
    let scaled_a = a.row_scale(&params.beta)?;
    let wba = params.w.tr_matmul(&scaled_a)?;
    // symmetric part of diag(theta) - W'diag(beta)A
    let mut sym = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut v = -0.5 * (wba.get(i, j) + wba.get(j, i));
            if i == j {
                v += params.theta[i];
            }
            sym.set(i, j, v);
        }
    }
    let lambda_min = if d <= 512 {
        let ev = symmetric_eigenvalues(&sym)?;
        ev.into_iter().fold(f64::INFINITY, f64::min)
    } else {
        shifted_min_eigenvalue(&sym)?
    };
    Ok(PositivityReport {
        lambda_min,
        positive: lambda_min > margin,
    })
}

/// lambda_min via power iteration on s*I - S, where s bounds the spectrum.
fn shifted_min_eigenvalue(sym: &Matrix) -> Result<f64> {
    let d = sym.rows();
    // Gershgorin upper bound on the spectrum
    let mut shift = f64::NEG_INFINITY;
    for i in 0..d {
        let mut r = 0.0;
        for j in 0..d {
            if j != i {
                r += sym.get(i, j).abs();
            }
        }
        shift = shift.max(sym.get(i, i) + r);
    }
    let shifted = Matrix::from_fn(d, d, |i, j| {
        let v = -sym.get(i, j);
        if i == j {
            v + shift
        } else {
            v
        }
    });
    let mut v: Vec<f64> = (0..d).map(|i| ((i as f64 + 1.0) * 1.3).cos() + 0.6).collect();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= nv;
    }
    let mut prev = 0.0;
    for it in 0..10_000 {
        let mut w = vec![0.0; d];
        for i in 0..d {
            let row = &shifted.data()[i * d..(i + 1) * d];
            w[i] = row.iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let rayleigh: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return Ok(shift);
        }
        for j in 0..d {
            v[j] = w[j] / wn;
        }
        if it > 0 && (rayleigh - prev).abs() <= 1e-12 * rayleigh.abs().max(1.0) {
            return Ok(shift - rayleigh);
        }
        prev = rayleigh;
    }
    Err(Error::Numerical(format!(
        "min-eigenvalue power iteration did not converge; best estimate {}",
        shift - prev
    )))
}

/// Spectral norm of W - A, the sigma of the parameter set membership test.
pub fn weight_deviation(params: &LayerParams, a: &Matrix) -> Result<f64> {
    params.w.check_same_shape(a, "weight_deviation")?;
    let diff = params.w.sub(a)?;
    Ok(spectral_norm(&diff, 1e-10, 10_000))
}

/// The block operator of the contraction analysis, owning one layer's
/// parameters and the shared dictionary.
#[derive(Debug, Clone)]
pub struct HOperator<'a> {
    pub params: &'a LayerParams,
    pub a: &'a Matrix,
}

impl<'a> HOperator<'a> {
    pub fn new(params: &'a LayerParams, a: &'a Matrix) -> Self {
        HOperator { params, a }
    }

    /// <Z, D(Z)> + <E, beta o E> + <lambda, beta^-1 o lambda>.
    pub fn quadratic_form(&self, state: &IterateState) -> Result<f64> {
        self.inner_product(state, state)
    }

    /// <a, H(b)>, evaluated blockwise without materializing H.
    pub fn inner_product(&self, sa: &IterateState, sb: &IterateState) -> Result<f64> {
        let dz = apply_d(self.params, self.a, &sb.z)?;
        let z_term = sa.z.frob_dot(&dz)?;
        let e_term = sa.e.frob_dot(&sb.e.row_scale(&self.params.beta)?)?;
        let inv_beta: Vec<f64> = self.params.beta.iter().map(|b| 1.0 / b).collect();
        let l_term = sa.lambda.frob_dot(&sb.lambda.row_scale(&inv_beta)?)?;
        Ok(z_term + e_term + l_term)
    }

    /// Quadratic form of a - b; symmetric in its arguments when D is.
    pub fn distance_sq(&self, sa: &IterateState, sb: &IterateState) -> Result<f64> {
        self.quadratic_form(&sa.sub(sb)?)
    }
}
