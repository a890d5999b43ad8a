//! Experiment configuration.
//!
//! The file is a flat list of `section.key = value` lines. Blank lines and
//! text after `#` are ignored; list values are whitespace separated. Unknown
//! keys are rejected. See `README.md` for the full key table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{GtdError, Result};
use crate::losses::LossKind;
use crate::models::{ModelKind, Ranks};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    /// Tensor text file, or a binary PPM when the extension is `.ppm`.
    File(PathBuf),
    /// Reconstruction of a random model, rescaled so its RMS equals `scale`.
    Synthetic {
        kind: ModelKind,
        shape: Vec<usize>,
        ranks: Ranks,
        seed: u64,
        scale: f64,
        /// Use absolute values of the random parameters.
        nonnegative: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    File(PathBuf),
    Gaussian { size: usize, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Identity,
    /// Keeps a random `fraction` of the entries.
    Mask { fraction: f64, seed: u64 },
    MaskFile(PathBuf),
    Blur(KernelSpec),
    Downsample { factor: usize },
    Dense(PathBuf),
}

impl OperatorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            OperatorSpec::Identity => "identity",
            OperatorSpec::Mask { .. } | OperatorSpec::MaskFile(_) => "mask",
            OperatorSpec::Blur(_) => "blur",
            OperatorSpec::Downsample { .. } => "downsample",
            OperatorSpec::Dense(_) => "dense",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    None,
    Gaussian { sigma: f64, seed: u64 },
    /// Exactly `floor(fraction·I)` observations get `±amplitude` added.
    Impulse { fraction: f64, amplitude: f64, seed: u64 },
    /// Each clean observation is replaced by a Poisson draw with that mean.
    Poisson { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    AdmmMm,
    Pg { mu: f64 },
    Bcd { mu: f64 },
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::AdmmMm => "admm_mm",
            SolverChoice::Pg { .. } => "pg",
            SolverChoice::Bcd { .. } => "bcd",
        }
    }
}

/// Model to fit; its shape is taken from the input tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub ranks: Ranks,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSource,
    pub operator: OperatorSpec,
    pub noise: NoiseSpec,
    pub model: ModelConfig,
    pub solvers: Vec<SolverChoice>,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
}

/// Raw key/value view with tracking of consumed keys.
struct Entries {
    map: BTreeMap<String, String>,
    base: PathBuf,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse_value(key, &v),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self
            .take(key)
            .ok_or_else(|| GtdError::Config(format!("missing key `{key}`")))?;
        parse_value(key, &v)
    }

    fn path(&mut self, key: &str) -> Result<PathBuf> {
        let raw: String = self.require(key)?;
        Ok(self.base.join(raw))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let v = self
            .take(key)
            .ok_or_else(|| GtdError::Config(format!("missing key `{key}`")))?;
        v.split_whitespace().map(|t| parse_value(key, t)).collect()
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| GtdError::Config(format!("cannot parse `{raw}` for key `{key}`")))
}

fn parse_ranks(kind: ModelKind, values: Vec<usize>) -> Ranks {
    if kind == ModelKind::Cp && values.len() == 1 {
        Ranks::Scalar(values[0])
    } else {
        Ranks::PerMode(values)
    }
}

fn nonneg(key: &str, v: f64) -> Result<f64> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(GtdError::Config(format!("`{key}` must be a nonnegative number, got {v}")));
    }
    Ok(v)
}

impl ExperimentConfig {
    /// Parses config text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                GtdError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = k.trim().to_string();
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(GtdError::Config(format!("duplicate key `{key}`")));
            }
        }
        let mut e = Entries {
            map,
            base: base.to_path_buf(),
        };

        let source: String = e.take_or("input.source", "synthetic".to_string())?;
        let input = match source.as_str() {
            "file" => InputSource::File(e.path("input.path")?),
            "synthetic" => {
                let kind: ModelKind = e.take_or("input.model", ModelKind::Cp)?;
                InputSource::Synthetic {
                    kind,
                    shape: e.list("input.shape")?,
                    ranks: parse_ranks(kind, e.list("input.ranks")?),
                    seed: e.take_or("input.seed", 0)?,
                    scale: nonneg("input.scale", e.take_or("input.scale", 1.0)?)?,
                    nonnegative: e.take_or("input.nonnegative", false)?,
                }
            }
            other => return Err(GtdError::Config(format!("unknown input.source `{other}`"))),
        };

        let op_kind: String = e.require("operator.kind")?;
        let operator = match op_kind.as_str() {
            "identity" => OperatorSpec::Identity,
            "mask" => match e.take("operator.path") {
                Some(p) => OperatorSpec::MaskFile(e.base.join(p)),
                None => {
                    let fraction: f64 = e.require("operator.fraction")?;
                    if !(0.0..=1.0).contains(&fraction) {
                        return Err(GtdError::Config(format!(
                            "operator.fraction {fraction} outside [0, 1]"
                        )));
                    }
                    OperatorSpec::Mask {
                        fraction,
                        seed: e.take_or("operator.seed", 0)?,
                    }
                }
            },
            "blur" => {
                let kernel: String = e.take_or("operator.kernel", "gaussian".to_string())?;
                OperatorSpec::Blur(if kernel == "gaussian" {
                    KernelSpec::Gaussian {
                        size: e.take_or("operator.kernel_size", 5)?,
                        sigma: e.take_or("operator.sigma", 1.0)?,
                    }
                } else {
                    KernelSpec::File(e.base.join(kernel))
                })
            }
            "downsample" => OperatorSpec::Downsample {
                factor: e.take_or("operator.factor", 2)?,
            },
            "dense" => OperatorSpec::Dense(e.path("operator.path")?),
            other => return Err(GtdError::Config(format!("unknown operator.kind `{other}`"))),
        };

        let noise_kind: String = e.take_or("noise.kind", "none".to_string())?;
        let noise_seed: u64 = e.take_or("noise.seed", 0)?;
        let noise = match noise_kind.as_str() {
            "none" => NoiseSpec::None,
            "gaussian" => NoiseSpec::Gaussian {
                sigma: nonneg("noise.sigma", e.require("noise.sigma")?)?,
                seed: noise_seed,
            },
            "impulse" => {
                let fraction = nonneg("noise.fraction", e.require("noise.fraction")?)?;
                if fraction > 1.0 {
                    return Err(GtdError::Config("noise.fraction must not exceed 1".into()));
                }
                NoiseSpec::Impulse {
                    fraction,
                    amplitude: nonneg("noise.amplitude", e.require("noise.amplitude")?)?,
                    seed: noise_seed,
                }
            }
            "poisson" => NoiseSpec::Poisson { seed: noise_seed },
            other => return Err(GtdError::Config(format!("unknown noise.kind `{other}`"))),
        };

        let kind: ModelKind = e.require("model.kind")?;
        let model = ModelConfig {
            kind,
            ranks: parse_ranks(kind, e.list("model.ranks")?),
            seed: e.take_or("model.seed", 0)?,
        };

        let methods: Vec<String> = match e.take("solver.methods") {
            Some(v) => v.split_whitespace().map(str::to_string).collect(),
            None => vec!["admm_mm".to_string()],
        };
        let mut solvers = Vec::new();
        for m in methods {
            solvers.push(match m.as_str() {
                "admm_mm" => SolverChoice::AdmmMm,
                "pg" => SolverChoice::Pg { mu: e.require("solver.pg_mu")? },
                "bcd" => SolverChoice::Bcd { mu: e.require("solver.bcd_mu")? },
                other => return Err(GtdError::Config(format!("unknown solver `{other}`"))),
            });
        }
        if solvers.is_empty() {
            return Err(GtdError::Config("solver.methods is empty".into()));
        }

        let d = SolverConfig::default();
        let lambda: Option<f64> = e.take("solver.lambda").map(|v| parse_value("solver.lambda", &v)).transpose()?;
        let solver = SolverConfig {
            loss: e.take_or::<LossKind>("solver.loss", d.loss)?,
            alpha: e.take_or("solver.alpha", d.alpha)?,
            beta: e.take_or("solver.beta", d.beta)?,
            lambda_override: lambda,
            sweeps_per_iter: e.take_or("solver.sweeps", d.sweeps_per_iter)?,
            max_iter: e.take_or("solver.max_iter", d.max_iter)?,
            tol: e.take_or("solver.tol", d.tol)?,
            seed: e.take_or("solver.seed", d.seed)?,
        };
        solver.validate().map_err(|err| GtdError::Config(err.to_string()))?;

        let out: String = e.take_or("output.dir", "gtd-output".to_string())?;
        let output_dir = e.base.join(out);

        if let Some(k) = e.map.keys().next() {
            return Err(GtdError::Config(format!("unknown key `{k}`")));
        }
        Ok(ExperimentConfig {
            input,
            operator,
            noise,
            model,
            solvers,
            solver,
            output_dir,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|err| GtdError::Config(format!("cannot read {}: {err}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        ExperimentConfig::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
        input.shape = 4 4 2
        input.ranks = 2
        operator.kind = identity
        model.kind = cp
        model.ranks = 2
    ";

    #[test]
    fn minimal_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.operator, OperatorSpec::Identity);
        assert_eq!(cfg.noise, NoiseSpec::None);
        assert_eq!(cfg.solvers, vec![SolverChoice::AdmmMm]);
        assert_eq!(cfg.solver, SolverConfig::default());
        assert_eq!(cfg.model.ranks, Ranks::Scalar(2));
        assert_eq!(cfg.output_dir, Path::new("/tmp/gtd-output"));
    }

    #[test]
    fn full_config() {
        let dup = format!("{MINIMAL}\noperator.kind = mask");
        assert!(ExperimentConfig::parse(&dup, Path::new(".")).is_err());

        let text = "
            input.source = synthetic
            input.model = tucker
            input.shape = 6 6 3
            input.ranks = 2 2 2
            input.nonnegative = true
            input.scale = 5
            operator.kind = blur
            operator.kernel_size = 3
            operator.sigma = 0.8
            noise.kind = impulse
            noise.fraction = 0.1
            noise.amplitude = 10
            noise.seed = 4
            model.kind = tr
            model.ranks = 2 2 2
            solver.methods = admm_mm pg
            solver.pg_mu = 0.25
            solver.loss = l1
            solver.beta = 2
            solver.max_iter = 50
            output.dir = out
        ";
        let cfg = ExperimentConfig::parse(text, Path::new("/data")).unwrap();
        assert_eq!(cfg.operator, OperatorSpec::Blur(KernelSpec::Gaussian { size: 3, sigma: 0.8 }));
        assert_eq!(cfg.noise, NoiseSpec::Impulse { fraction: 0.1, amplitude: 10.0, seed: 4 });
        assert_eq!(cfg.solvers, vec![SolverChoice::AdmmMm, SolverChoice::Pg { mu: 0.25 }]);
        assert_eq!(cfg.solver.loss, LossKind::L1);
        assert_eq!(cfg.output_dir, Path::new("/data/out"));
        match cfg.input {
            InputSource::Synthetic { kind, nonnegative, scale, .. } => {
                assert_eq!(kind, ModelKind::Tucker);
                assert!(nonnegative);
                assert_eq!(scale, 5.0);
            }
            _ => panic!("expected synthetic input"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            format!("{MINIMAL}\nsolver.bogus = 1"),
            format!("{MINIMAL}\nnoise.kind = gaussian\nnoise.sigma = -1"),
            format!("{MINIMAL}\nsolver.methods = pg"),
            format!("{MINIMAL}\nsolver.beta = 0"),
            "operator.kind = identity\nmodel.kind = cp\nmodel.ranks = 1".to_string(),
            format!("{MINIMAL}\nnot a pair"),
        ];
        for text in bad {
            let err = ExperimentConfig::parse(&text, Path::new(".")).unwrap_err();
            assert!(matches!(err, GtdError::Config(_)), "{err:?}");
        }
    }
}
