//! Problem synthesis `b = A x0 + n` and the experiment runner behind
//! `gtd run`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::config::{ExperimentConfig, InputSource, KernelSpec, NoiseSpec, OperatorSpec, SolverChoice};
use crate::error::{GtdError, Result};
use crate::image_io::{load_image_ppm, write_image_ppm};
use crate::linops::{Blur, DenseOperator, Downsample, Identity, LinearOperator, Mask};
use crate::models::{init_params, ModelSpec};
use crate::solver::{objective, AdmmMm, Bcd, IterativeSolver, ProjectedGradient, Solution};
use crate::tensor::{norm2, DenseTensor};

/// A synthesised inverse problem.
#[derive(Debug)]
pub struct Problem {
    pub b: Vec<f64>,
    pub op: Box<dyn LinearOperator>,
    pub x0: DenseTensor,
}

/// Loads or generates the ground truth tensor.
pub fn ground_truth(input: &InputSource) -> Result<DenseTensor> {
    match input {
        InputSource::File(path) => {
            if !path.exists() {
                return Err(GtdError::Config(format!("input file {} not found", path.display())));
            }
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")) {
                load_image_ppm(path)
            } else {
                DenseTensor::read_text(path)
            }
        }
        InputSource::Synthetic {
            kind,
            shape,
            ranks,
            seed,
            scale,
            nonnegative,
        } => {
            let spec = ModelSpec::new(*kind, shape.clone(), ranks.clone(), *seed)?;
            let mut params = init_params(&spec)?;
            if *nonnegative {
                params = abs_params(params);
            }
            let mut x0 = params.reconstruct()?;
            let rms = x0.frobenius_norm() / (x0.len() as f64).sqrt();
            if rms > 0.0 {
                x0.scale(scale / rms);
            }
            Ok(x0)
        }
    }
}

fn abs_params(p: crate::models::TdParams) -> crate::models::TdParams {
    use crate::models::TdParams;
    let abs_m = |m: crate::tensor::Matrix| {
        let (r, c) = (m.rows(), m.cols());
        crate::tensor::Matrix::from_col_major(r, c, m.into_data().into_iter().map(f64::abs).collect())
            .expect("same dimensions")
    };
    let abs_t = |t: DenseTensor| {
        let shape = t.shape().to_vec();
        DenseTensor::new(shape, t.into_vec().into_iter().map(f64::abs).collect()).expect("same shape")
    };
    match p {
        TdParams::Cp { factors } => TdParams::Cp {
            factors: factors.into_iter().map(abs_m).collect(),
        },
        TdParams::Tucker { core, factors } => TdParams::Tucker {
            core: abs_t(core),
            factors: factors.into_iter().map(abs_m).collect(),
        },
        TdParams::Tt { cores } => TdParams::Tt {
            cores: cores.into_iter().map(abs_t).collect(),
        },
        TdParams::Tr { cores } => TdParams::Tr {
            cores: cores.into_iter().map(abs_t).collect(),
        },
    }
}

pub fn build_operator(spec: &OperatorSpec, shape: &[usize]) -> Result<Box<dyn LinearOperator>> {
    let n: usize = shape.iter().product();
    Ok(match spec {
        OperatorSpec::Identity => Box::new(Identity::new(n)),
        OperatorSpec::Mask { fraction, seed } => Box::new(Mask::random(n, *fraction, *seed)?),
        OperatorSpec::MaskFile(path) => Box::new(Mask::read(path, n)?),
        OperatorSpec::Blur(kernel) => {
            let k = match kernel {
                KernelSpec::File(path) => Blur::read_kernel(path)?,
                KernelSpec::Gaussian { size, sigma } => Blur::gaussian_kernel(*size, *sigma)?,
            };
            Box::new(Blur::new(shape.to_vec(), k)?)
        }
        OperatorSpec::Downsample { factor } => Box::new(Downsample::new(shape.to_vec(), *factor)?),
        OperatorSpec::Dense(path) => {
            let op = DenseOperator::read(path)?;
            if op.in_dim() != n {
                return Err(GtdError::shape(format!(
                    "dense operator has {} columns but the tensor has {n} entries",
                    op.in_dim()
                )));
            }
            Box::new(op)
        }
    })
}

/// Adds noise to clean observations in place.
pub fn apply_noise(clean: &mut [f64], noise: &NoiseSpec) -> Result<()> {
    match *noise {
        NoiseSpec::None => {}
        NoiseSpec::Gaussian { sigma, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Normal::new(0.0, sigma).map_err(|e| GtdError::invalid(e.to_string()))?;
            clean.iter_mut().for_each(|v| *v += dist.sample(&mut rng));
        }
        NoiseSpec::Impulse {
            fraction,
            amplitude,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let count = (fraction * clean.len() as f64).floor() as usize;
            for i in sample(&mut rng, clean.len(), count.min(clean.len())) {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                clean[i] += sign * amplitude;
            }
        }
        NoiseSpec::Poisson { seed } => {
            if let Some(i) = clean.iter().position(|&v| v < 0.0) {
                return Err(GtdError::invalid(format!(
                    "Poisson noise needs nonnegative clean observations, entry {i} is {}",
                    clean[i]
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in clean.iter_mut() {
                *v = if *v > 0.0 {
                    Poisson::new(*v)
                        .map_err(|e| GtdError::invalid(e.to_string()))?
                        .sample(&mut rng)
                } else {
                    0.0
                };
            }
        }
    }
    Ok(())
}

/// `x0` from the input source, `A` from the operator spec and
/// `b = A x0 + n`. Deterministic in the configured seeds.
pub fn synthesize_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let x0 = ground_truth(&cfg.input)?;
    let op = build_operator(&cfg.operator, x0.shape())?;
    let mut b = op.forward(x0.data())?;
    apply_noise(&mut b, &cfg.noise)?;
    Ok(Problem { b, op, x0 })
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: String,
    pub loss: String,
    pub operator: String,
    pub final_objective: f64,
    pub elapsed_s: f64,
    pub relative_error_vs_x0: f64,
}

impl SummaryRow {
    pub const CSV_HEADER: &'static str =
        "solver,loss,operator,final_objective,elapsed_s,relative_error_vs_x0";

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.solver, self.loss, self.operator, self.final_objective, self.elapsed_s, self.relative_error_vs_x0
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(GtdError::Format(format!("summary row needs 6 fields: `{line}`")));
        }
        let num = |s: &str| crate::tensor::parse_f64(s);
        Ok(SummaryRow {
            solver: f[0].to_string(),
            loss: f[1].to_string(),
            operator: f[2].to_string(),
            final_objective: num(f[3])?,
            elapsed_s: num(f[4])?,
            relative_error_vs_x0: num(f[5])?,
        })
    }
}

/// `‖x − x0‖ / ‖x0‖` (absolute error when `x0 = 0`).
pub fn relative_error(x: &[f64], x0: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    let scale = norm2(x0);
    if scale > 0.0 {
        norm2(&diff) / scale
    } else {
        norm2(&diff)
    }
}

/// Runs one configured solver on a problem.
pub fn run_solver(problem: &Problem, cfg: &ExperimentConfig, choice: SolverChoice) -> Result<Solution> {
    let spec = ModelSpec::new(
        cfg.model.kind,
        problem.x0.shape().to_vec(),
        cfg.model.ranks.clone(),
        cfg.model.seed,
    )?;
    let op = problem.op.as_ref();
    let b = &problem.b;
    let s = &cfg.solver;
    match choice {
        SolverChoice::AdmmMm => AdmmMm::new(b, op, &spec, s)?.run(s.max_iter, s.tol),
        SolverChoice::Pg { mu } => ProjectedGradient::new(b, op, &spec, s, mu)?.run(s.max_iter, s.tol),
        SolverChoice::Bcd { mu } => Bcd::new(b, op, &spec, s, mu)?.run(s.max_iter, s.tol),
    }
}

/// Paths written for one solver.
pub fn artifact_paths(dir: &Path, solver: &str) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("trace_{solver}.csv")),
        dir.join(format!("recon_{solver}.txt")),
        dir.join(format!("recon_{solver}.ppm")),
        dir.join(format!("params_{solver}.txt")),
    )
}

/// Synthesises the problem, runs every configured solver (concurrently, one
/// thread each) and writes into `cfg.output_dir`:
///
/// * `ground_truth.txt`, `observations.txt`
/// * per solver: `trace_<s>.csv`, `recon_<s>.txt`, `params_<s>.txt`, and
///   `recon_<s>.ppm` when the tensor is `H × W × 3`
/// * `summary.csv`
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let problem = synthesize_problem(cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    problem.x0.write_text(dir.join("ground_truth.txt"))?;
    if !problem.b.is_empty() {
        DenseTensor::new(vec![problem.b.len()], problem.b.clone())?.write_text(dir.join("observations.txt"))?;
    }

    let results: Vec<Result<SummaryRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .solvers
            .iter()
            .map(|&choice| {
                let problem = &problem;
                scope.spawn(move || run_and_write(problem, cfg, choice))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(GtdError::Numerical("solver thread panicked".into()))))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summary = String::from(SummaryRow::CSV_HEADER);
    summary.push('\n');
    for r in &rows {
        let _ = writeln!(summary, "{}", r.to_csv_line());
    }
    std::fs::write(dir.join("summary.csv"), summary)?;
    Ok(rows)
}

fn run_and_write(problem: &Problem, cfg: &ExperimentConfig, choice: SolverChoice) -> Result<SummaryRow> {
    let sol = run_solver(problem, cfg, choice)?;
    let (trace_p, recon_p, ppm_p, params_p) = artifact_paths(&cfg.output_dir, choice.name());
    sol.trace.write_csv(trace_p)?;
    let recon = DenseTensor::new(problem.x0.shape().to_vec(), sol.x.clone())?;
    recon.write_text(recon_p)?;
    if matches!(recon.shape(), [_, _, 3]) {
        write_image_ppm(&recon, ppm_p)?;
    }
    std::fs::write(params_p, sol.params.to_text())?;
    let final_objective = objective(&problem.b, problem.op.as_ref(), &sol.params, cfg.solver.loss, cfg.solver.alpha)?;
    Ok(SummaryRow {
        solver: choice.name().to_string(),
        loss: cfg.solver.loss.to_string(),
        operator: cfg.operator.label().to_string(),
        final_objective,
        elapsed_s: sol.trace.last().map_or(0.0, |r| r.elapsed),
        relative_error_vs_x0: relative_error(&sol.x, problem.x0.data()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_count() {
        let clean: Vec<f64> = (0..57).map(|i| i as f64 * 0.1).collect();
        let mut b = clean.clone();
        apply_noise(&mut b, &NoiseSpec::Impulse { fraction: 0.1, amplitude: 10.0, seed: 2 }).unwrap();
        let changed: Vec<f64> = b.iter().zip(&clean).map(|(x, c)| x - c).filter(|d| *d != 0.0).collect();
        assert_eq!(changed.len(), 5);
        assert!(changed.iter().all(|d| (d.abs() - 10.0).abs() < 1e-12));
    }

    #[test]
    fn poisson_rejects_negative_clean() {
        let mut b = vec![1.0, -0.5];
        assert!(apply_noise(&mut b, &NoiseSpec::Poisson { seed: 0 }).is_err());
        let mut b = vec![0.0, 3.0, 10.0];
        apply_noise(&mut b, &NoiseSpec::Poisson { seed: 0 }).unwrap();
        assert_eq!(b[0], 0.0);
        assert!(b.iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
    }

    #[test]
    fn summary_row_round_trip() {
        let row = SummaryRow {
            solver: "pg".into(),
            loss: "l1".into(),
            operator: "mask".into(),
            final_objective: 1.25,
            elapsed_s: 0.5,
            relative_error_vs_x0: 0.01,
        };
        assert_eq!(SummaryRow::parse_csv_line(&row.to_csv_line()).unwrap(), row);
    }
}
