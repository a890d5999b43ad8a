//! Low-rank tensor models (CP, Tucker, tensor train, tensor ring), their
//! reconstruction, and the ALS-based least-squares projection that acts as
//! the plug-and-play model slot of the solver.
//!
//! Every model is a list of blocks (factor matrices and/or core tensors).
//! One ALS sweep visits each block once and replaces it by the solution of its
//! ridge-regularised normal equations with every other block held fixed:
//!
//! * CP: factors in mode order.
//! * Tucker: factors in mode order, then the core.
//! * TT / TR: cores left to right, each solved against the contraction of
//!   all other cores taken cyclically. A tensor train is a ring whose
//!   closing bond has dimension one, so both share the same code.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GtdError, Result};
use crate::linalg::{jitter_for, solve_regularized, sym_eigen};
use crate::tensor::{khatri_rao, split_header, DenseTensor, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Cp,
    Tucker,
    Tt,
    Tr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Cp, ModelKind::Tucker, ModelKind::Tt, ModelKind::Tr];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cp => "cp",
            ModelKind::Tucker => "tucker",
            ModelKind::Tt => "tt",
            ModelKind::Tr => "tr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = GtdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cp" => Ok(ModelKind::Cp),
            "tucker" => Ok(ModelKind::Tucker),
            "tt" => Ok(ModelKind::Tt),
            "tr" => Ok(ModelKind::Tr),
            other => Err(GtdError::invalid(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Rank specification: a single CP rank, or a per-mode / per-bond sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ranks {
    Scalar(usize),
    PerMode(Vec<usize>),
}

/// Everything needed to instantiate a model: kind, target shape, ranks and
/// the seed for random initialisation.
///
/// Rank conventions for the sequence forms:
/// * Tucker: one rank per mode.
/// * TT: the `N - 1` internal bond ranks, or all `N + 1` with unit ends.
/// * TR: the `N` bond ranks `R0..R(N-1)`; core `k` is `R_k × J_k × R_(k+1 mod N)`.
///   `N + 1` entries are accepted when the first equals the last.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub shape: Vec<usize>,
    pub ranks: Ranks,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, shape: Vec<usize>, ranks: Ranks, seed: u64) -> Result<Self> {
        let spec = ModelSpec {
            kind,
            shape,
            ranks,
            seed,
        };
        spec.bond_ranks()?;
        Ok(spec)
    }

    pub fn cp(shape: Vec<usize>, rank: usize, seed: u64) -> Result<Self> {
        ModelSpec::new(ModelKind::Cp, shape, Ranks::Scalar(rank), seed)
    }

    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }

    /// Validated rank list in the model's canonical form: `[R]` for CP,
    /// per-mode ranks for Tucker, `N + 1` bonds for TT and `N` bonds for TR.
    pub fn bond_ranks(&self) -> Result<Vec<usize>> {
        let n = self.shape.len();
        if n == 0 || self.shape.contains(&0) {
            return Err(GtdError::invalid(format!(
                "model shape {:?} must be non-empty with positive entries",
                self.shape
            )));
        }
        let bad = |why: &str| {
            Err(GtdError::invalid(format!(
                "{} ranks {:?} for shape {:?}: {why}",
                self.kind, self.ranks, self.shape
            )))
        };
        let ranks = match (&self.kind, &self.ranks) {
            (ModelKind::Cp, Ranks::Scalar(r)) => vec![*r],
            (ModelKind::Cp, Ranks::PerMode(_)) => return bad("CP takes a single rank"),
            (_, Ranks::Scalar(_)) => return bad("expected a per-mode rank sequence"),
            (ModelKind::Tucker, Ranks::PerMode(r)) => {
                if r.len() != n {
                    return bad("expected one rank per mode");
                }
                r.clone()
            }
            (ModelKind::Tt, Ranks::PerMode(r)) => {
                if r.len() + 1 == n {
                    let mut full = vec![1];
                    full.extend(r);
                    full.push(1);
                    full
                } else if r.len() == n + 1 && r[0] == 1 && r[n] == 1 {
                    r.clone()
                } else {
                    return bad("expected N-1 internal ranks or N+1 ranks with unit ends");
                }
            }
            (ModelKind::Tr, Ranks::PerMode(r)) => {
                if r.len() == n {
                    r.clone()
                } else if r.len() == n + 1 && r[0] == r[n] {
                    r[..n].to_vec()
                } else {
                    return bad("expected N ranks (or N+1 with equal ends)");
                }
            }
        };
        if ranks.contains(&0) {
            return bad("ranks must be positive");
        }
        Ok(ranks)
    }
}

/// Parameters of a decomposition model.
///
/// TT and TR cores have shape `[R_left, J_k, R_right]`; a TT chain starts
/// and ends with unit bonds, a TR chain closes on itself.
#[derive(Debug, Clone, PartialEq)]
pub enum TdParams {
    Cp { factors: Vec<Matrix> },
    Tucker { core: DenseTensor, factors: Vec<Matrix> },
    Tt { cores: Vec<DenseTensor> },
    Tr { cores: Vec<DenseTensor> },
}

impl TdParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            TdParams::Cp { .. } => ModelKind::Cp,
            TdParams::Tucker { .. } => ModelKind::Tucker,
            TdParams::Tt { .. } => ModelKind::Tt,
            TdParams::Tr { .. } => ModelKind::Tr,
        }
    }

    /// Target tensor shape.
    pub fn shape(&self) -> Vec<usize> {
        match self {
            TdParams::Cp { factors } | TdParams::Tucker { factors, .. } => {
                factors.iter().map(Matrix::rows).collect()
            }
            TdParams::Tt { cores } | TdParams::Tr { cores } => {
                cores.iter().map(|c| c.shape()[1]).collect()
            }
        }
    }

    pub fn ranks(&self) -> Ranks {
        match self {
            TdParams::Cp { factors } => Ranks::Scalar(factors.first().map_or(0, Matrix::cols)),
            TdParams::Tucker { core, .. } => Ranks::PerMode(core.shape().to_vec()),
            TdParams::Tt { cores } => {
                let mut r: Vec<usize> = cores.iter().map(|c| c.shape()[0]).collect();
                r.push(cores.last().map_or(1, |c| c.shape()[2]));
                Ranks::PerMode(r)
            }
            TdParams::Tr { cores } => Ranks::PerMode(cores.iter().map(|c| c.shape()[0]).collect()),
        }
    }

    /// All parameter blocks in sweep order.
    pub fn blocks(&self) -> Vec<&[f64]> {
        match self {
            TdParams::Cp { factors } => factors.iter().map(Matrix::data).collect(),
            TdParams::Tucker { core, factors } => factors
                .iter()
                .map(Matrix::data)
                .chain(std::iter::once(core.data()))
                .collect(),
            TdParams::Tt { cores } | TdParams::Tr { cores } => {
                cores.iter().map(DenseTensor::data).collect()
            }
        }
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            TdParams::Cp { factors } => factors.iter_mut().map(Matrix::data_mut).collect(),
            TdParams::Tucker { core, factors } => factors
                .iter_mut()
                .map(Matrix::data_mut)
                .chain(std::iter::once(core.data_mut()))
                .collect(),
            TdParams::Tt { cores } | TdParams::Tr { cores } => {
                cores.iter_mut().map(DenseTensor::data_mut).collect()
            }
        }
    }

    /// Ridge penalty: sum of squared entries over every block.
    pub fn penalty(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|b| b.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        reconstruct(self)
    }

    /// Text container: `kind:` and `ranks:` lines, then every block in the
    /// tensor text format (factor matrices as two-way tensors), in sweep order.
    pub fn to_text(&self) -> String {
        let ranks = match self.ranks() {
            Ranks::Scalar(r) => r.to_string(),
            Ranks::PerMode(r) => r.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
        };
        let mut out = format!("kind: {}\nranks: {ranks}\n", self.kind());
        let push_matrix = |out: &mut String, m: &Matrix| {
            let t = DenseTensor::new(vec![m.rows(), m.cols()], m.data().to_vec())
                .expect("factor matrices are non-empty");
            out.push_str(&t.to_text());
        };
        match self {
            TdParams::Cp { factors } => factors.iter().for_each(|f| push_matrix(&mut out, f)),
            TdParams::Tucker { core, factors } => {
                factors.iter().for_each(|f| push_matrix(&mut out, f));
                out.push_str(&core.to_text());
            }
            TdParams::Tt { cores } | TdParams::Tr { cores } => {
                cores.iter().for_each(|c| out.push_str(&c.to_text()))
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<TdParams> {
        let (kind, rest) = split_header(text, "kind:")?;
        let kind: ModelKind = kind.parse()?;
        let (_, rest) = split_header(rest, "ranks:")?;
        let mut blocks = Vec::new();
        let mut current = String::new();
        for line in rest.lines() {
            if line.trim_start().starts_with("shape:") && !current.trim().is_empty() {
                blocks.push(DenseTensor::from_text(&current)?);
                current.clear();
            }
            current.push_str(line);
            current.push('\n');
        }
        if !current.trim().is_empty() {
            blocks.push(DenseTensor::from_text(&current)?);
        }
        let as_matrix = |t: DenseTensor| -> Result<Matrix> {
            match *t.shape() {
                [r, c] => Matrix::from_col_major(r, c, t.into_vec()),
                _ => Err(GtdError::Format("factor block must be two-way".into())),
            }
        };
        let params = match kind {
            ModelKind::Cp => TdParams::Cp {
                factors: blocks.into_iter().map(as_matrix).collect::<Result<_>>()?,
            },
            ModelKind::Tucker => {
                let core = blocks
                    .pop()
                    .ok_or_else(|| GtdError::Format("tucker container without core".into()))?;
                TdParams::Tucker {
                    core,
                    factors: blocks.into_iter().map(as_matrix).collect::<Result<_>>()?,
                }
            }
            ModelKind::Tt => TdParams::Tt { cores: blocks },
            ModelKind::Tr => TdParams::Tr { cores: blocks },
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks that internal dimensions chain.
    pub fn validate(&self) -> Result<()> {
        match self {
            TdParams::Cp { factors } => {
                let r = factors
                    .first()
                    .ok_or_else(|| GtdError::shape("CP model without factors"))?
                    .cols();
                if factors.iter().any(|f| f.cols() != r || f.rows() == 0) || r == 0 {
                    return Err(GtdError::shape("CP factors must share a positive column count"));
                }
            }
            TdParams::Tucker { core, factors } => {
                if core.order() != factors.len()
                    || core.shape().iter().zip(factors).any(|(&r, f)| f.cols() != r)
                {
                    return Err(GtdError::shape("Tucker core does not match factor ranks"));
                }
            }
            TdParams::Tt { cores } | TdParams::Tr { cores } => {
                if cores.is_empty() || cores.iter().any(|c| c.order() != 3) {
                    return Err(GtdError::shape("chain cores must be three-way"));
                }
                let n = cores.len();
                for k in 0..n {
                    if cores[k].shape()[2] != cores[(k + 1) % n].shape()[0] {
                        return Err(GtdError::shape(format!("bond {k} does not chain")));
                    }
                }
                if matches!(self, TdParams::Tt { .. }) && cores[0].shape()[0] != 1 {
                    return Err(GtdError::shape("TT boundary ranks must be 1"));
                }
            }
        }
        Ok(())
    }
}

/// Random initial parameters: i.i.d. standard normal entries, every block
/// then scaled by the same factor so the reconstruction has unit Frobenius
/// norm. Deterministic in `spec.seed`.
pub fn init_params(spec: &ModelSpec) -> Result<TdParams> {
    let ranks = spec.bond_ranks()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = |n: usize| -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    };
    let shape = &spec.shape;
    let n = shape.len();
    let mut params = match spec.kind {
        ModelKind::Cp => TdParams::Cp {
            factors: shape
                .iter()
                .map(|&j| Matrix::from_col_major(j, ranks[0], normal(j * ranks[0])))
                .collect::<Result<_>>()?,
        },
        ModelKind::Tucker => {
            let factors = shape
                .iter()
                .zip(&ranks)
                .map(|(&j, &r)| Matrix::from_col_major(j, r, normal(j * r)))
                .collect::<Result<Vec<_>>>()?;
            let core = DenseTensor::new(ranks.clone(), normal(ranks.iter().product()))?;
            TdParams::Tucker { core, factors }
        }
        ModelKind::Tt | ModelKind::Tr => {
            let cores = (0..n)
                .map(|k| {
                    let (rl, rr) = (ranks[k], ranks[(k + 1) % ranks.len()]);
                    DenseTensor::new(vec![rl, shape[k], rr], normal(rl * shape[k] * rr))
                })
                .collect::<Result<Vec<_>>>()?;
            if spec.kind == ModelKind::Tt {
                TdParams::Tt { cores }
            } else {
                TdParams::Tr { cores }
            }
        }
    };
    let norm = reconstruct(&params)?.frobenius_norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(GtdError::Numerical(format!(
            "random initialisation reconstructs to norm {norm}"
        )));
    }
    let nblocks = params.blocks().len() as f64;
    let s = norm.powf(-1.0 / nblocks);
    for block in params.blocks_mut() {
        block.iter_mut().for_each(|v| *v *= s);
    }
    Ok(params)
}

/// Dense tensor represented by `params`.
pub fn reconstruct(params: &TdParams) -> Result<DenseTensor> {
    params.validate()?;
    let shape = params.shape();
    match params {
        TdParams::Cp { factors } => {
            let rest = khatri_rao_except(factors, 0)?;
            let x0 = factors[0].matmul(&rest.transpose())?;
            DenseTensor::fold(&x0, 0, &shape)
        }
        TdParams::Tucker { core, factors } => {
            let mut t = core.clone();
            for (k, f) in factors.iter().enumerate() {
                t = t.mode_n_product(f, k)?;
            }
            Ok(t)
        }
        TdParams::Tt { cores } | TdParams::Tr { cores } => {
            let chain = contract_chain(cores.iter())?;
            let r = chain.shape()[0];
            let p = chain.shape()[1];
            let d = chain.data();
            let data = (0..p)
                .map(|j| (0..r).map(|a| d[a + r * j + r * p * a]).sum())
                .collect();
            DenseTensor::new(shape, data)
        }
    }
}

/// One ALS sweep of `params` toward target `v` with ridge coefficient `ridge`
/// on every block.
pub fn als_sweep(params: &TdParams, v: &DenseTensor, ridge: f64) -> Result<TdParams> {
    params.validate()?;
    if params.shape() != v.shape() {
        return Err(GtdError::shape(format!(
            "model shape {:?} vs target shape {:?}",
            params.shape(),
            v.shape()
        )));
    }
    if !(ridge >= 0.0) {
        return Err(GtdError::invalid(format!("ridge must be nonnegative, got {ridge}")));
    }
    let mut out = params.clone();
    match &mut out {
        TdParams::Cp { factors } => {
            for n in 0..factors.len() {
                factors[n] = cp_factor_update(factors, v, n, ridge)?;
            }
        }
        TdParams::Tucker { core, factors } => {
            for n in 0..factors.len() {
                factors[n] = tucker_factor_update(core, factors, v, n, ridge)?;
            }
            *core = tucker_core_update(factors, v, ridge)?;
        }
        TdParams::Tt { cores } | TdParams::Tr { cores } => {
            for k in 0..cores.len() {
                cores[k] = chain_core_update(cores, v, k, ridge)?;
            }
        }
    }
    Ok(out)
}

/// `sweeps` ALS sweeps warm-started from `params`; returns the new parameters
/// and their reconstruction. With `sweeps == 0` this is `(params, X(params))`.
pub fn project(
    params: &TdParams,
    v: &DenseTensor,
    ridge: f64,
    sweeps: usize,
) -> Result<(TdParams, DenseTensor)> {
    let mut p = params.clone();
    for _ in 0..sweeps {
        p = als_sweep(&p, v, ridge)?;
    }
    let x = reconstruct(&p)?;
    Ok((p, x))
}

/// Khatri-Rao product of all factors except `skip`, ordered so that rows
/// follow the column order of the mode-`skip` unfolding.
pub(crate) fn khatri_rao_except(factors: &[Matrix], skip: usize) -> Result<Matrix> {
    let r = factors[0].cols();
    let mut acc: Option<Matrix> = None;
    for (k, f) in factors.iter().enumerate() {
        if k == skip {
            continue;
        }
        acc = Some(match acc {
            None => f.clone(),
            Some(a) => khatri_rao(f, &a)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Matrix::from_col_major(1, r, vec![1.0; r]).expect("1xR")))
}

fn cp_factor_update(factors: &[Matrix], v: &DenseTensor, n: usize, ridge: f64) -> Result<Matrix> {
    let kr = khatri_rao_except(factors, n)?;
    let r = factors[n].cols();
    let mut gram = Matrix::from_col_major(r, r, vec![1.0; r * r])?;
    for (k, f) in factors.iter().enumerate() {
        if k != n {
            gram.hadamard_assign(&f.gram())?;
        }
    }
    let mttkrp = v.unfold(n)?.matmul(&kr)?;
    Ok(solve_regularized(&gram, &mttkrp.transpose(), ridge)?.transpose())
}

fn tucker_factor_update(
    core: &DenseTensor,
    factors: &[Matrix],
    v: &DenseTensor,
    n: usize,
    ridge: f64,
) -> Result<Matrix> {
    let mut partial = core.clone();
    for (k, f) in factors.iter().enumerate() {
        if k != n {
            partial = partial.mode_n_product(f, k)?;
        }
    }
    // X_(n) = U_n · Y_(n)
    let design = partial.unfold(n)?.transpose();
    let rhs = design.t_matmul(&v.unfold(n)?.transpose())?;
    Ok(solve_regularized(&design.gram(), &rhs, ridge)?.transpose())
}

/// Core update for vec(X) = (⊗ U_k) vec(G). The Kronecker Gram is
/// diagonalised mode by mode, so the system is solved exactly without
/// forming it.
fn tucker_core_update(factors: &[Matrix], v: &DenseTensor, ridge: f64) -> Result<DenseTensor> {
    let mut rhs = v.clone();
    for (k, f) in factors.iter().enumerate() {
        rhs = rhs.mode_n_product(&f.transpose(), k)?;
    }
    let eigs: Vec<(Vec<f64>, Matrix)> = factors.iter().map(|f| sym_eigen(&f.gram())).collect();
    let trace: f64 = factors.iter().map(|f| f.frobenius_norm().powi(2)).product();
    let size = rhs.len();
    let shift = ridge + jitter_for(trace, size);

    let mut rot = rhs;
    for (k, (_, q)) in eigs.iter().enumerate() {
        rot = rot.mode_n_product(&q.transpose(), k)?;
    }
    let shape = rot.shape().to_vec();
    let mut idx = vec![0usize; shape.len()];
    let top = eigs
        .iter()
        .map(|(l, _)| l.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .product::<f64>()
        + shift;
    for value in rot.data_mut() {
        let lam: f64 = idx.iter().zip(&eigs).map(|(&i, (l, _))| l[i]).product::<f64>() + shift;
        *value = if lam > top * 1e-14 && lam > 0.0 { *value / lam } else { 0.0 };
        crate::tensor::increment(&mut idx, &shape);
    }
    for (k, (_, q)) in eigs.iter().enumerate() {
        rot = rot.mode_n_product(q, k)?;
    }
    if rot.data().iter().any(|v| !v.is_finite()) {
        return Err(GtdError::Numerical("Tucker core update is non-finite".into()));
    }
    Ok(rot)
}

/// Contracts `[a, J1, b] [b, J2, c] ..` into `[a, J1·J2·.., z]` with the
/// physical indices first-fastest.
pub(crate) fn contract_chain<'a>(
    mut cores: impl Iterator<Item = &'a DenseTensor>,
) -> Result<DenseTensor> {
    let first = cores
        .next()
        .ok_or_else(|| GtdError::shape("empty core chain"))?;
    let mut acc = first.clone();
    for core in cores {
        let (a, p, b) = (acc.shape()[0], acc.shape()[1], acc.shape()[2]);
        let (b2, j, c) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        if b != b2 {
            return Err(GtdError::shape(format!("bond mismatch {b} vs {b2}")));
        }
        let left = Matrix::from_col_major(a * p, b, acc.into_vec())?;
        let right = Matrix::from_col_major(b, j * c, core.data().to_vec())?;
        acc = DenseTensor::new(vec![a, p * j, c], left.matmul(&right)?.into_data())?;
    }
    Ok(acc)
}

/// Solves for core `k` of a TT/TR chain. With `Z` the contraction of the
/// other cores starting at `k + 1` (cyclically), entry
/// `X[j_k, p] = Σ_{a,b} G_k[a, j_k, b] · Z[b, p, a]`, so the mode-1
/// unfolding of `G_k` is a ridge regression on the design `D[p, (a,b)]`.
fn chain_core_update(
    cores: &[DenseTensor],
    v: &DenseTensor,
    k: usize,
    ridge: f64,
) -> Result<DenseTensor> {
    let n = cores.len();
    let (rl, jk, rr) = (cores[k].shape()[0], cores[k].shape()[1], cores[k].shape()[2]);
    let sub = if n == 1 {
        let mut eye = DenseTensor::zeros(vec![rr, 1, rl])?;
        for a in 0..rl.min(rr) {
            eye.data_mut()[a + rr * a] = 1.0;
        }
        eye
    } else {
        contract_chain((1..n).map(|s| &cores[(k + s) % n]))?
    };
    let p = sub.shape()[1];
    let z = sub.data();
    let mut design = Matrix::zeros(p, rl * rr);
    for b in 0..rr {
        for a in 0..rl {
            let col = a + rl * b;
            for q in 0..p {
                design.set(q, col, z[b + rr * q + rr * p * a]);
            }
        }
    }
    let order: Vec<usize> = (0..n).map(|s| (k + s) % n).collect();
    let target = v.permute(&order)?.unfold(0)?;
    let rhs = design.t_matmul(&target.transpose())?;
    let g = solve_regularized(&design.gram(), &rhs, ridge)?.transpose();
    DenseTensor::fold(&g, 1, &[rl, jk, rr])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls_error(p: &TdParams, v: &DenseTensor) -> f64 {
        let x = reconstruct(p).unwrap();
        x.data()
            .iter()
            .zip(v.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn cp_rank_one_outer_product() {
        let p = TdParams::Cp {
            factors: vec![
                Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap(),
                Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap(),
            ],
        };
        let x = reconstruct(&p).unwrap();
        // [[3,4],[6,8]]
        assert_eq!(x.get(&[0, 0]), 3.0);
        assert_eq!(x.get(&[0, 1]), 4.0);
        assert_eq!(x.get(&[1, 0]), 6.0);
        assert_eq!(x.get(&[1, 1]), 8.0);
    }

    #[test]
    fn tucker_identity_factors_give_core() {
        let core = DenseTensor::new(vec![2, 3, 2], (0..12).map(|v| v as f64).collect()).unwrap();
        let p = TdParams::Tucker {
            core: core.clone(),
            factors: vec![Matrix::identity(2), Matrix::identity(3), Matrix::identity(2)],
        };
        assert_eq!(reconstruct(&p).unwrap(), core);
    }

    #[test]
    fn cp_init_shapes_and_determinism() {
        let spec = ModelSpec::cp(vec![4, 4, 4], 2, 7).unwrap();
        let a = init_params(&spec).unwrap();
        let b = init_params(&spec).unwrap();
        assert_eq!(a, b);
        match &a {
            TdParams::Cp { factors } => {
                assert_eq!(factors.len(), 3);
                assert!(factors.iter().all(|f| f.rows() == 4 && f.cols() == 2));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rank_validation() {
        assert!(ModelSpec::new(ModelKind::Cp, vec![3, 3], Ranks::PerMode(vec![2, 2]), 0).is_err());
        assert!(ModelSpec::new(ModelKind::Tucker, vec![3, 3], Ranks::Scalar(2), 0).is_err());
        assert!(ModelSpec::new(ModelKind::Tucker, vec![3, 3], Ranks::PerMode(vec![2]), 0).is_err());
        assert!(ModelSpec::cp(vec![3, 3], 0, 0).is_err());
        let tt = ModelSpec::new(ModelKind::Tt, vec![2, 3, 2], Ranks::PerMode(vec![1, 2, 2, 1]), 0)
            .unwrap();
        assert_eq!(tt.bond_ranks().unwrap(), vec![1, 2, 2, 1]);
        let tt = ModelSpec::new(ModelKind::Tt, vec![2, 3, 2], Ranks::PerMode(vec![2, 2]), 0).unwrap();
        assert_eq!(tt.bond_ranks().unwrap(), vec![1, 2, 2, 1]);
        assert!(ModelSpec::new(ModelKind::Tt, vec![2, 3, 2], Ranks::PerMode(vec![2, 2, 2, 2]), 0)
            .is_err());
        let tr = ModelSpec::new(ModelKind::Tr, vec![2, 3, 2], Ranks::PerMode(vec![2, 3, 2]), 0)
            .unwrap();
        assert_eq!(tr.bond_ranks().unwrap(), vec![2, 3, 2]);
    }

    #[test]
    fn zero_sweeps_is_identity() {
        let spec = ModelSpec::new(ModelKind::Tr, vec![3, 3, 2], Ranks::PerMode(vec![2, 2, 2]), 1)
            .unwrap();
        let p = init_params(&spec).unwrap();
        let v = DenseTensor::zeros(vec![3, 3, 2]).unwrap();
        let (q, x) = project(&p, &v, 0.0, 0).unwrap();
        assert_eq!(q, p);
        assert_eq!(x, reconstruct(&p).unwrap());
    }

    #[test]
    fn sweep_at_fixed_point_keeps_error() {
        for kind in ModelKind::ALL {
            let ranks = match kind {
                ModelKind::Cp => Ranks::Scalar(2),
                ModelKind::Tucker => Ranks::PerMode(vec![2, 2, 2]),
                ModelKind::Tt => Ranks::PerMode(vec![2, 2]),
                ModelKind::Tr => Ranks::PerMode(vec![2, 2, 2]),
            };
            let spec = ModelSpec::new(kind, vec![4, 3, 3], ranks, 3).unwrap();
            let p = init_params(&spec).unwrap();
            let v = reconstruct(&p).unwrap();
            let q = als_sweep(&p, &v, 0.0).unwrap();
            assert!(ls_error(&q, &v) < 1e-10, "{kind}: {}", ls_error(&q, &v));
        }
    }

    #[test]
    fn huge_ridge_drives_cp_factors_to_zero() {
        let spec = ModelSpec::cp(vec![4, 4, 3], 2, 5).unwrap();
        let p = init_params(&spec).unwrap();
        let v = reconstruct(&init_params(&ModelSpec::cp(vec![4, 4, 3], 2, 6).unwrap()).unwrap())
            .unwrap();
        let q = als_sweep(&p, &v, 1e12).unwrap();
        assert!(q.blocks().iter().flat_map(|b| b.iter()).all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = init_params(&ModelSpec::cp(vec![3, 3], 1, 0).unwrap()).unwrap();
        let v = DenseTensor::zeros(vec![3, 4]).unwrap();
        assert!(als_sweep(&p, &v, 0.0).is_err());
        assert!(als_sweep(&p, &DenseTensor::zeros(vec![3, 3]).unwrap(), -1.0).is_err());
    }

    #[test]
    fn params_text_round_trip() {
        for (kind, ranks) in [
            (ModelKind::Cp, Ranks::Scalar(2)),
            (ModelKind::Tucker, Ranks::PerMode(vec![2, 1, 2])),
            (ModelKind::Tt, Ranks::PerMode(vec![2, 2])),
            (ModelKind::Tr, Ranks::PerMode(vec![2, 1, 3])),
        ] {
            let p = init_params(&ModelSpec::new(kind, vec![3, 2, 4], ranks, 9).unwrap()).unwrap();
            let back = TdParams::from_text(&p.to_text()).unwrap();
            assert_eq!(back, p);
        }
        assert!(TdParams::from_text("kind: foo\nranks: 1\n").is_err());
    }
}
