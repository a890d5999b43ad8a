//! Data-fidelity losses `D(b, y)`, their proximal (y-update) solutions and
//! gradients.

use std::fmt;
use std::str::FromStr;

use crate::error::{GtdError, Result};

/// Smallest value used inside `log` for the KL loss.
pub const KL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// Squared Euclidean distance `Σ (b - y)²`.
    L2,
    /// `Σ |b - y|`.
    L1,
    /// I-divergence `Σ b log(b / y) + y - b`.
    Kl,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::L2, LossKind::L1, LossKind::Kl];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::L2 => "l2",
            LossKind::L1 => "l1",
            LossKind::Kl => "kl",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = GtdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(LossKind::L2),
            "l1" => Ok(LossKind::L1),
            "kl" => Ok(LossKind::Kl),
            other => Err(GtdError::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

fn check_pair(b: &[f64], y: &[f64]) -> Result<()> {
    if b.len() != y.len() {
        return Err(GtdError::shape(format!(
            "observation length {} vs estimate length {}",
            b.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Rejects negative observations, which the KL loss cannot model.
pub fn check_kl_observations(b: &[f64]) -> Result<()> {
    match b.iter().position(|&v| !(v >= 0.0)) {
        Some(i) => Err(GtdError::invalid(format!(
            "KL loss needs nonnegative observations, b[{i}] = {}",
            b[i]
        ))),
        None => Ok(()),
    }
}

pub fn eval_loss(kind: LossKind, b: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(b, y)?;
    let total = match kind {
        LossKind::L2 => b.iter().zip(y).map(|(bi, yi)| (bi - yi) * (bi - yi)).sum(),
        LossKind::L1 => b.iter().zip(y).map(|(bi, yi)| (bi - yi).abs()).sum(),
        LossKind::Kl => {
            check_kl_observations(b)?;
            b.iter()
                .zip(y)
                .map(|(&bi, &yi)| {
                    let log_term = if bi > 0.0 { bi * (bi / yi.max(KL_FLOOR)).ln() } else { 0.0 };
                    log_term + yi - bi
                })
                .sum()
        }
    };
    Ok(total)
}

/// Entrywise `sign(v)·max(|v| - rho, 0)`.
pub fn soft_threshold(v: &[f64], rho: f64) -> Vec<f64> {
    v.iter().map(|&x| soft(x, rho)).collect()
}

#[inline]
fn soft(x: f64, rho: f64) -> f64 {
    if x > rho {
        x - rho
    } else if x < -rho {
        x + rho
    } else {
        0.0
    }
}

/// Minimiser of `(1/β)·D(b, y) + ½‖d - y‖²` over `y`.
///
/// * L2: `y = b` (the squared loss is handled by the outer MM step, so no
///   splitting is needed).
/// * L1: `y = b + T_{1/β}(d - b)`.
/// * KL: the positive root of `β y² + (1 - β d) y - b = 0`.
pub fn y_update(kind: LossKind, b: &[f64], d: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_pair(b, d)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(GtdError::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(match kind {
        LossKind::L2 => b.to_vec(),
        LossKind::L1 => {
            let rho = 1.0 / beta;
            b.iter().zip(d).map(|(&bi, &di)| bi + soft(di - bi, rho)).collect()
        }
        LossKind::Kl => {
            check_kl_observations(b)?;
            b.iter().zip(d).map(|(&bi, &di)| kl_root(bi, di, beta)).collect()
        }
    })
}

fn kl_root(b: f64, d: f64, beta: f64) -> f64 {
    let t = beta * d - 1.0;
    let disc = (t * t + 4.0 * beta * b).sqrt();
    // Both branches equal (t + disc) / 2β; the second avoids cancellation
    // when t is large and negative.
    if t >= 0.0 {
        (t + disc) / (2.0 * beta)
    } else if b > 0.0 {
        2.0 * b / (disc - t)
    } else {
        0.0
    }
}

/// `∂D/∂y`. The L1 subgradient uses `sign(0) = 0`.
pub fn loss_gradient(kind: LossKind, b: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_pair(b, y)?;
    Ok(match kind {
        LossKind::L2 => b.iter().zip(y).map(|(bi, yi)| 2.0 * (yi - bi)).collect(),
        LossKind::L1 => b
            .iter()
            .zip(y)
            .map(|(bi, yi)| {
                let r = yi - bi;
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        LossKind::Kl => {
            check_kl_observations(b)?;
            if let Some(i) = y.iter().position(|&v| !(v > 0.0)) {
                return Err(GtdError::invalid(format!(
                    "KL gradient needs positive estimates, y[{i}] = {}",
                    y[i]
                )));
            }
            b.iter().zip(y).map(|(bi, yi)| 1.0 - bi / yi).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_is_zero_at_observation() {
        let b = [0.5, 2.0, 0.0, 3.25];
        for kind in LossKind::ALL {
            assert_eq!(eval_loss(kind, &b, &b).unwrap(), 0.0, "{kind}");
        }
    }

    #[test]
    fn l1_value() {
        assert_eq!(eval_loss(LossKind::L1, &[1.0, -2.0], &[0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn kl_value_and_guards() {
        let v = eval_loss(LossKind::Kl, &[1.0], &[2.0]).unwrap();
        assert!((v - ((0.5f64).ln() + 1.0)).abs() < 1e-15);
        assert!((v - 0.306_852_819_440_054_7).abs() < 1e-15);
        assert!(eval_loss(LossKind::Kl, &[-1.0], &[1.0]).is_err());
        // y = 0 where b > 0 stays finite through the floor
        assert!(eval_loss(LossKind::Kl, &[1.0], &[0.0]).unwrap().is_finite());
        assert!(eval_loss(LossKind::L2, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn soft_threshold_values() {
        assert_eq!(soft_threshold(&[1.2, -0.3, 0.5], 0.5), vec![1.2 - 0.5, 0.0, 0.0]);
        assert_eq!(soft_threshold(&[0.0; 3], 1.0), vec![0.0; 3]);
        assert_eq!(soft_threshold(&[-2.0], 0.5), vec![-1.5]);
    }

    #[test]
    fn kl_y_update_golden_ratio() {
        let y = y_update(LossKind::Kl, &[1.0], &[0.0], 1.0).unwrap();
        assert!((y[0] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        // stationarity (1/β)(1 - b/y) + (y - d) = 0
        assert!(((1.0 - 1.0 / y[0]) + y[0]).abs() < 1e-14);
    }

    #[test]
    fn kl_y_update_zero_observation() {
        for (d, beta) in [(3.0, 2.0), (0.2, 2.0), (-1.0, 0.5), (5.0, 0.1)] {
            let y = y_update(LossKind::Kl, &[0.0], &[d], beta).unwrap();
            let expect = (d - 1.0 / beta).max(0.0);
            assert!((y[0] - expect).abs() < 1e-12, "d={d} beta={beta}");
        }
    }

    #[test]
    fn l1_dead_zone_and_l2_passthrough() {
        assert_eq!(y_update(LossKind::L1, &[5.0], &[5.2], 2.0).unwrap(), vec![5.0]);
        assert_eq!(y_update(LossKind::L2, &[1.0, 2.0], &[7.0, 8.0], 3.0).unwrap(), vec![1.0, 2.0]);
        assert!(y_update(LossKind::L1, &[1.0], &[1.0], 0.0).is_err());
        assert!(y_update(LossKind::L1, &[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn gradients() {
        assert_eq!(loss_gradient(LossKind::L2, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(loss_gradient(LossKind::Kl, &[2.0], &[1.0]).unwrap(), vec![-1.0]);
        assert_eq!(loss_gradient(LossKind::L1, &[1.0, 1.0, 1.0], &[0.0, 1.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(loss_gradient(LossKind::Kl, &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn parse_kind() {
        assert_eq!("KL".parse::<LossKind>().unwrap(), LossKind::Kl);
        assert!("huber".parse::<LossKind>().is_err());
    }
}
