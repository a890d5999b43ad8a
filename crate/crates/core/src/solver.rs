//! The ADMM-MM solver and the projected-gradient / block-coordinate-descent
//! baselines it is compared against.
//!
//! One ADMM-MM iteration, for observations `b`, operator `A`, model
//! parameters `θ` with `x = vec(X(θ))` and dual `z`:
//!
//! ```text
//! d ← A x − z / β
//! y ← argmin_y (1/β) D(b, y) + ½‖d − y‖²          (L2: y = b)
//! z ← z + β (y − A x)                              (L2: z = 0)
//! v ← x − (1/λ)(AᵀA x − Aᵀ(y + z / β))
//! θ ← ALS sweep(s) of θ toward v, ridge γ;  x ← vec(X(θ))
//! ```
//!
//! with `λ ≥ λ_max(AᵀA)` so the quadratic surrogate majorises the data term.
//! For the L2 loss the iteration is a pure MM step and the objective is
//! non-increasing.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::error::{GtdError, Result};
use crate::linops::{max_eigenvalue, LinearOperator};
use crate::losses::{check_kl_observations, eval_loss, loss_gradient, y_update, LossKind};
use crate::models::{init_params, khatri_rao_except, project, reconstruct, ModelKind, ModelSpec, TdParams};
use crate::tensor::{norm2, DenseTensor, Matrix};

/// Power-iteration settings used when `λ` is not overridden.
pub const EIG_TOL: f64 = 1e-10;
pub const EIG_MAX_ITER: usize = 2000;

/// KL gradients in the baselines are evaluated at `max(Ax, KL_GRAD_FLOOR)`.
pub const KL_GRAD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub loss: LossKind,
    /// Weight of the ridge penalty on the model parameters.
    pub alpha: f64,
    /// ADMM penalty parameter.
    pub beta: f64,
    /// Use this `λ` instead of estimating the spectral bound. It must still
    /// dominate the power-iteration estimate.
    pub lambda_override: Option<f64>,
    /// ALS sweeps per projection.
    pub sweeps_per_iter: usize,
    pub max_iter: usize,
    /// Relative change of `x` below which iteration stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            loss: LossKind::L2,
            alpha: 0.0,
            beta: 1.0,
            lambda_override: None,
            sweeps_per_iter: 1,
            max_iter: 1000,
            tol: 1e-8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_loss(loss: LossKind) -> Self {
        SolverConfig {
            loss,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(GtdError::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(GtdError::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(GtdError::invalid(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.sweeps_per_iter == 0 {
            return Err(GtdError::invalid("sweeps_per_iter must be at least 1"));
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0) || !l.is_finite() {
                return Err(GtdError::invalid(format!("lambda override must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Ridge weight of the projection: `α/λ` for L2, `2α/(βλ)` for L1 and KL.
pub fn gamma_for(loss: LossKind, alpha: f64, beta: f64, lambda: f64) -> f64 {
    match loss {
        LossKind::L2 => alpha / lambda,
        LossKind::L1 | LossKind::Kl => 2.0 * alpha / (beta * lambda),
    }
}

/// Returns the override after checking it against a power-iteration
/// estimate, or the estimated bound itself.
pub fn resolve_lambda(op: &dyn LinearOperator, cfg: &SolverConfig) -> Result<f64> {
    let bound = max_eigenvalue(op, EIG_TOL, EIG_MAX_ITER, cfg.seed)?;
    match cfg.lambda_override {
        None => Ok(bound.lambda),
        Some(l) => {
            let estimate = bound.lambda / crate::linops::SAFETY_FACTOR;
            if l < estimate * (1.0 - 1e-9) {
                return Err(GtdError::invalid(format!(
                    "lambda override {l} is below the estimated largest Gram eigenvalue {estimate}"
                )));
            }
            Ok(l)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    /// `D(b, Ax) + α·p(θ)` after the iteration.
    pub objective: f64,
    /// `‖y − Ax‖₂` (`‖b − Ax‖₂` for L2 and the baselines).
    pub residual: f64,
    /// Seconds since the solve started.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
}

impl SolverTrace {
    pub const CSV_HEADER: &'static str = "iter,objective,residual,elapsed_s";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&format!("{},{},{},{}\n", r.iter, r.objective, r.residual, r.elapsed));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Iterate state. `x` always equals `vec(X(theta))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub theta: TdParams,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
}

/// Result of a solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub params: TdParams,
    pub x: Vec<f64>,
    pub trace: SolverTrace,
    pub lambda: f64,
    /// Whether the relative-change criterion fired before `max_iter`.
    pub converged: bool,
}

/// `D(b, A·vec(X(θ))) + α·Σθ²`.
pub fn objective(
    b: &[f64],
    op: &dyn LinearOperator,
    theta: &TdParams,
    loss: LossKind,
    alpha: f64,
) -> Result<f64> {
    let x = reconstruct(theta)?;
    let ax = op.forward(x.data())?;
    Ok(eval_loss(loss, b, &ax)? + alpha * theta.penalty())
}

/// One MM step toward `b_eff`: the gradient step
/// `v = x − (1/λ)(AᵀA x − Aᵀ b_eff)` followed by the projection of `v`.
pub fn mm_x_step(
    state: &SolverState,
    b_eff: &[f64],
    op: &dyn LinearOperator,
    ridge: f64,
    sweeps: usize,
) -> Result<(TdParams, Vec<f64>)> {
    let gram = op.gram(&state.x)?;
    let atb = op.adjoint(b_eff)?;
    let inv = 1.0 / state.lambda;
    let v: Vec<f64> = state
        .x
        .iter()
        .zip(gram.iter().zip(&atb))
        .map(|(&x, (&g, &a))| x - inv * (g - a))
        .collect();
    project_vector(&state.theta, v, ridge, sweeps)
}

fn project_vector(theta: &TdParams, v: Vec<f64>, ridge: f64, sweeps: usize) -> Result<(TdParams, Vec<f64>)> {
    let target = DenseTensor::new(theta.shape(), v)?;
    let (p, x) = project(theta, &target, ridge, sweeps)?;
    Ok((p, x.into_vec()))
}

fn check_problem(b: &[f64], op: &dyn LinearOperator, spec: &ModelSpec, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if b.len() != op.out_dim() {
        return Err(GtdError::shape(format!(
            "{} observations for an operator with {} outputs",
            b.len(),
            op.out_dim()
        )));
    }
    if op.in_dim() != spec.numel() {
        return Err(GtdError::shape(format!(
            "operator input dimension {} vs model size {}",
            op.in_dim(),
            spec.numel()
        )));
    }
    if cfg.loss == LossKind::Kl {
        check_kl_observations(b)?;
    }
    Ok(())
}

fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let diff: f64 = old.iter().zip(new).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let scale = norm2(old);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Outcome of one iteration.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub record: IterRecord,
    pub relative_change: f64,
}

/// Shared driver interface for the three solvers.
pub trait IterativeSolver {
    fn step(&mut self) -> Result<Step>;
    fn params(&self) -> &TdParams;
    fn x(&self) -> &[f64];
    fn lambda(&self) -> f64;

    /// Iterates until the relative x-change drops below `tol` or `max_iter`
    /// iterations have run.
    fn run(mut self, max_iter: usize, tol: f64) -> Result<Solution>
    where
        Self: Sized,
    {
        let mut trace = SolverTrace::default();
        let mut converged = false;
        for _ in 0..max_iter {
            let step = self.step()?;
            if !step.record.objective.is_finite() {
                return Err(GtdError::Numerical(format!(
                    "objective became non-finite at iteration {}",
                    step.record.iter
                )));
            }
            trace.records.push(step.record);
            if step.relative_change < tol {
                converged = true;
                break;
            }
        }
        Ok(Solution {
            params: self.params().clone(),
            x: self.x().to_vec(),
            trace,
            lambda: self.lambda(),
            converged,
        })
    }
}

/// Step-by-step ADMM-MM iteration.
pub struct AdmmMm<'a> {
    b: &'a [f64],
    op: &'a dyn LinearOperator,
    cfg: SolverConfig,
    state: SolverState,
    iter: usize,
    start: Instant,
}

impl<'a> AdmmMm<'a> {
    pub fn new(b: &'a [f64], op: &'a dyn LinearOperator, spec: &ModelSpec, cfg: &SolverConfig) -> Result<Self> {
        check_problem(b, op, spec, cfg)?;
        let lambda = resolve_lambda(op, cfg)?;
        Self::with_lambda(b, op, spec, cfg, lambda)
    }

    /// Like [`AdmmMm::new`] but with `λ` supplied by the caller, unchecked.
    pub fn with_lambda(
        b: &'a [f64],
        op: &'a dyn LinearOperator,
        spec: &ModelSpec,
        cfg: &SolverConfig,
        lambda: f64,
    ) -> Result<Self> {
        check_problem(b, op, spec, cfg)?;
        let theta = init_params(spec)?;
        let x = reconstruct(&theta)?.into_vec();
        let state = SolverState {
            theta,
            x,
            y: b.to_vec(),
            z: vec![0.0; b.len()],
            lambda,
            gamma: gamma_for(cfg.loss, cfg.alpha, cfg.beta, lambda),
        };
        Ok(AdmmMm {
            b,
            op,
            cfg: cfg.clone(),
            state,
            iter: 0,
            start: Instant::now(),
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }
}

impl IterativeSolver for AdmmMm<'_> {
    fn step(&mut self) -> Result<Step> {
        let beta = self.cfg.beta;
        let st = &mut self.state;
        let b_eff = if self.cfg.loss == LossKind::L2 {
            self.b.to_vec()
        } else {
            let ax = self.op.forward(&st.x)?;
            let d: Vec<f64> = ax.iter().zip(&st.z).map(|(a, z)| a - z / beta).collect();
            st.y = y_update(self.cfg.loss, self.b, &d, beta)?;
            for ((z, y), a) in st.z.iter_mut().zip(&st.y).zip(&ax) {
                *z += beta * (y - a);
            }
            st.y.iter().zip(&st.z).map(|(y, z)| y + z / beta).collect()
        };
        let (theta, x) = mm_x_step(st, &b_eff, self.op, st.gamma, self.cfg.sweeps_per_iter)?;
        let rel = relative_change(&st.x, &x);
        st.theta = theta;
        st.x = x;
        self.iter += 1;

        let ax = self.op.forward(&st.x)?;
        let objective = eval_loss(self.cfg.loss, self.b, &ax)? + self.cfg.alpha * st.theta.penalty();
        let residual = norm2(&st.y.iter().zip(&ax).map(|(y, a)| y - a).collect::<Vec<_>>());
        Ok(Step {
            record: IterRecord {
                iter: self.iter,
                objective,
                residual,
                elapsed: self.start.elapsed().as_secs_f64(),
            },
            relative_change: rel,
        })
    }

    fn params(&self) -> &TdParams {
        &self.state.theta
    }

    fn x(&self) -> &[f64] {
        &self.state.x
    }

    fn lambda(&self) -> f64 {
        self.state.lambda
    }
}

/// Runs ADMM-MM from a seeded random model until the stopping rule fires.
pub fn admm_mm_solve(
    b: &[f64],
    op: &dyn LinearOperator,
    spec: &ModelSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    AdmmMm::new(b, op, spec, cfg)?.run(cfg.max_iter, cfg.tol)
}

/// Gradient of the data term with respect to `x`: `Aᵀ ∂D/∂y (b, Ax)`.
/// KL gradients are taken at `max(Ax, KL_GRAD_FLOOR)`.
pub fn data_gradient(b: &[f64], op: &dyn LinearOperator, x: &[f64], loss: LossKind) -> Result<Vec<f64>> {
    let mut ax = op.forward(x)?;
    if loss == LossKind::Kl {
        ax.iter_mut().for_each(|v| *v = v.max(KL_GRAD_FLOOR));
    }
    op.adjoint(&loss_gradient(loss, b, &ax)?)
}

fn baseline_record(
    b: &[f64],
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
    theta: &TdParams,
    x: &[f64],
    iter: usize,
    start: &Instant,
) -> Result<IterRecord> {
    let ax = op.forward(x)?;
    let objective = eval_loss(cfg.loss, b, &ax)? + cfg.alpha * theta.penalty();
    let residual = norm2(&b.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>());
    Ok(IterRecord {
        iter,
        objective,
        residual,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Projected gradient `x ← proj[x − μ ∇_x D(b, Ax)]`, with the projection
/// ridge `2μα` so the penalty enters as in a proximal-gradient step.
pub struct ProjectedGradient<'a> {
    b: &'a [f64],
    op: &'a dyn LinearOperator,
    cfg: SolverConfig,
    step_size: f64,
    theta: TdParams,
    x: Vec<f64>,
    lambda: f64,
    iter: usize,
    start: Instant,
}

impl<'a> ProjectedGradient<'a> {
    pub fn new(
        b: &'a [f64],
        op: &'a dyn LinearOperator,
        spec: &ModelSpec,
        cfg: &SolverConfig,
        step_size: f64,
    ) -> Result<Self> {
        check_problem(b, op, spec, cfg)?;
        if !(step_size >= 0.0) || !step_size.is_finite() {
            return Err(GtdError::invalid(format!("step size must be nonnegative, got {step_size}")));
        }
        let theta = init_params(spec)?;
        let x = reconstruct(&theta)?.into_vec();
        Ok(ProjectedGradient {
            b,
            op,
            cfg: cfg.clone(),
            step_size,
            theta,
            x,
            lambda: f64::NAN,
            iter: 0,
            start: Instant::now(),
        })
    }
}

impl IterativeSolver for ProjectedGradient<'_> {
    fn step(&mut self) -> Result<Step> {
        let grad = data_gradient(self.b, self.op, &self.x, self.cfg.loss)?;
        let v: Vec<f64> = self.x.iter().zip(&grad).map(|(x, g)| x - self.step_size * g).collect();
        let ridge = 2.0 * self.step_size * self.cfg.alpha;
        let (theta, x) = project_vector(&self.theta, v, ridge, self.cfg.sweeps_per_iter)?;
        let rel = relative_change(&self.x, &x);
        self.theta = theta;
        self.x = x;
        self.iter += 1;
        let record = baseline_record(self.b, self.op, &self.cfg, &self.theta, &self.x, self.iter, &self.start)?;
        Ok(Step {
            record,
            relative_change: rel,
        })
    }

    fn params(&self) -> &TdParams {
        &self.theta
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Projected-gradient baseline; `step` is the fixed step size `μ`.
pub fn pg_solve(
    b: &[f64],
    op: &dyn LinearOperator,
    spec: &ModelSpec,
    cfg: &SolverConfig,
    step: f64,
) -> Result<Solution> {
    ProjectedGradient::new(b, op, spec, cfg, step)?.run(cfg.max_iter, cfg.tol)
}

/// Gradient of `D(b, A·vec(X(θ))) + α·Σθ²` with respect to CP factor `k`:
/// the mode-`k` unfolding of the data gradient times the Khatri-Rao product
/// of the other factors, plus `2α U_k`.
pub fn cp_factor_gradient(
    b: &[f64],
    op: &dyn LinearOperator,
    factors: &[Matrix],
    k: usize,
    loss: LossKind,
    alpha: f64,
) -> Result<Matrix> {
    let params = TdParams::Cp {
        factors: factors.to_vec(),
    };
    let x = reconstruct(&params)?;
    let g = data_gradient(b, op, x.data(), loss)?;
    let g = DenseTensor::new(x.shape().to_vec(), g)?;
    let mut grad = g.unfold(k)?.matmul(&khatri_rao_except(factors, k)?)?;
    if alpha != 0.0 {
        for (gv, u) in grad.data_mut().iter_mut().zip(factors[k].data()) {
            *gv += 2.0 * alpha * u;
        }
    }
    Ok(grad)
}

/// Block coordinate descent on CP factors: each factor in turn takes a
/// gradient step of size `μ` using the latest values of the others.
pub struct Bcd<'a> {
    b: &'a [f64],
    op: &'a dyn LinearOperator,
    cfg: SolverConfig,
    step_size: f64,
    factors: Vec<Matrix>,
    params: TdParams,
    x: Vec<f64>,
    iter: usize,
    start: Instant,
}

impl<'a> Bcd<'a> {
    pub fn new(
        b: &'a [f64],
        op: &'a dyn LinearOperator,
        spec: &ModelSpec,
        cfg: &SolverConfig,
        step_size: f64,
    ) -> Result<Self> {
        if spec.kind != ModelKind::Cp {
            return Err(GtdError::invalid(format!(
                "block coordinate descent supports CP models only, got {}",
                spec.kind
            )));
        }
        check_problem(b, op, spec, cfg)?;
        if !(step_size >= 0.0) || !step_size.is_finite() {
            return Err(GtdError::invalid(format!("step size must be nonnegative, got {step_size}")));
        }
        let params = init_params(spec)?;
        let factors = match &params {
            TdParams::Cp { factors } => factors.clone(),
            _ => unreachable!("CP spec initialises CP parameters"),
        };
        let x = reconstruct(&params)?.into_vec();
        Ok(Bcd {
            b,
            op,
            cfg: cfg.clone(),
            step_size,
            factors,
            params,
            x,
            iter: 0,
            start: Instant::now(),
        })
    }
}

impl IterativeSolver for Bcd<'_> {
    fn step(&mut self) -> Result<Step> {
        for k in 0..self.factors.len() {
            let grad = cp_factor_gradient(self.b, self.op, &self.factors, k, self.cfg.loss, self.cfg.alpha)?;
            for (u, g) in self.factors[k].data_mut().iter_mut().zip(grad.data()) {
                *u -= self.step_size * g;
            }
        }
        self.params = TdParams::Cp {
            factors: self.factors.clone(),
        };
        let x = reconstruct(&self.params)?.into_vec();
        let rel = relative_change(&self.x, &x);
        self.x = x;
        self.iter += 1;
        let record = baseline_record(self.b, self.op, &self.cfg, &self.params, &self.x, self.iter, &self.start)?;
        Ok(Step {
            record,
            relative_change: rel,
        })
    }

    fn params(&self) -> &TdParams {
        &self.params
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn lambda(&self) -> f64 {
        f64::NAN
    }
}

/// Block-coordinate-descent baseline (CP only) with fixed step `μ`.
pub fn bcd_solve(
    b: &[f64],
    op: &dyn LinearOperator,
    spec: &ModelSpec,
    cfg: &SolverConfig,
    step: f64,
) -> Result<Solution> {
    Bcd::new(b, op, spec, cfg, step)?.run(cfg.max_iter, cfg.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{Identity, Mask};

    #[test]
    fn gamma_cases() {
        for loss in LossKind::ALL {
            assert_eq!(gamma_for(loss, 0.0, 2.0, 3.0), 0.0);
        }
        assert_eq!(gamma_for(LossKind::L2, 3.0, 4.0, 2.0), 1.5);
        assert_eq!(gamma_for(LossKind::Kl, 3.0, 4.0, 2.0), 0.75);
        assert_eq!(gamma_for(LossKind::L1, 3.0, 4.0, 2.0), 0.75);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.beta = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { tol: 0.0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { sweeps_per_iter: 0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lambda_override_must_dominate() {
        let op = Identity::new(8);
        let low = SolverConfig { lambda_override: Some(0.5), ..SolverConfig::default() };
        assert!(resolve_lambda(&op, &low).is_err());
        let ok = SolverConfig { lambda_override: Some(1.0), ..SolverConfig::default() };
        assert_eq!(resolve_lambda(&op, &ok).unwrap(), 1.0);
    }

    #[test]
    fn zero_iterations_return_initial_model() {
        let spec = ModelSpec::cp(vec![3, 3, 2], 2, 11).unwrap();
        let op = Identity::new(18);
        let b = vec![1.0; 18];
        for loss in LossKind::ALL {
            let cfg = SolverConfig { loss, max_iter: 0, ..SolverConfig::default() };
            let sol = admm_mm_solve(&b, &op, &spec, &cfg).unwrap();
            assert!(sol.trace.is_empty());
            assert_eq!(sol.params, init_params(&spec).unwrap());
        }
    }

    #[test]
    fn problem_checks() {
        let spec = ModelSpec::cp(vec![3, 3], 1, 0).unwrap();
        let op = Identity::new(9);
        let cfg = SolverConfig::default();
        assert!(admm_mm_solve(&[0.0; 8], &op, &spec, &cfg).is_err());
        let kl = SolverConfig::with_loss(LossKind::Kl);
        let mut b = vec![1.0; 9];
        b[3] = -1.0;
        assert!(admm_mm_solve(&b, &op, &spec, &kl).is_err());
        let mask = Mask::new(10, vec![0, 1]).unwrap();
        assert!(admm_mm_solve(&[0.0; 2], &mask, &spec, &cfg).is_err());
    }

    #[test]
    fn bcd_rejects_non_cp() {
        let spec = ModelSpec::new(ModelKind::Tucker, vec![3, 3], crate::models::Ranks::PerMode(vec![1, 1]), 0)
            .unwrap();
        let op = Identity::new(9);
        assert!(bcd_solve(&[0.0; 9], &op, &spec, &SolverConfig::default(), 0.1).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let t = SolverTrace {
            records: vec![IterRecord { iter: 1, objective: 2.5, residual: 0.5, elapsed: 0.01 }],
        };
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,objective,residual,elapsed_s\n1,2.5,0.5,0.01\n"));
    }
}
