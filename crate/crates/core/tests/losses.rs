use gtd_core::{eval_loss, loss_gradient, soft_threshold, y_update, LossKind};
use proptest::prelude::*;

fn prox_value(kind: LossKind, b: &[f64], d: &[f64], beta: f64, y: &[f64]) -> f64 {
    let quad: f64 = d.iter().zip(y).map(|(a, c)| (a - c) * (a - c)).sum();
    eval_loss(kind, b, y).unwrap() / beta + 0.5 * quad
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn l1_and_kl_prox_resist_perturbation(
        b in prop::collection::vec(0.0f64..10.0, 1..8),
        dseed in prop::collection::vec(-5.0f64..10.0, 8),
        beta in 0.05f64..20.0,
    ) {
        let d = &dseed[..b.len()];
        for kind in [LossKind::L1, LossKind::Kl] {
            let y = y_update(kind, &b, d, beta).unwrap();
            let base = prox_value(kind, &b, d, beta, &y);
            for i in 0..b.len() {
                for delta in [1e-4, -1e-4] {
                    let mut yp = y.clone();
                    yp[i] += delta;
                    if kind == LossKind::Kl && yp[i] <= 0.0 {
                        continue;
                    }
                    prop_assert!(prox_value(kind, &b, d, beta, &yp) >= base - 1e-12);
                }
            }
        }
    }

    #[test]
    fn kl_prox_is_stationary_and_positive(
        b in prop::collection::vec(1e-3f64..50.0, 1..8),
        d in prop::collection::vec(-20.0f64..50.0, 8),
        beta in 0.01f64..100.0,
    ) {
        let d = &d[..b.len()];
        let y = y_update(LossKind::Kl, &b, d, beta).unwrap();
        for i in 0..b.len() {
            prop_assert!(y[i] > 0.0);
            let r = (1.0 - b[i] / y[i]) / beta + (y[i] - d[i]);
            prop_assert!(r.abs() <= 1e-10 * (1.0 + d[i].abs() + b[i] / y[i] / beta), "residual {}", r);
        }
    }

    #[test]
    fn soft_threshold_is_nonexpansive(
        u in prop::collection::vec(-10.0f64..10.0, 1..16),
        v in prop::collection::vec(-10.0f64..10.0, 16),
        rho in 0.0f64..5.0,
    ) {
        let v = &v[..u.len()];
        let tu = soft_threshold(&u, rho);
        let tv = soft_threshold(v, rho);
        let diff_out: Vec<f64> = tu.iter().zip(&tv).map(|(a, b)| a - b).collect();
        let diff_in: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff_out) <= norm(&diff_in) + 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences(
        b in prop::collection::vec(0.5f64..5.0, 1..6),
        offsets in prop::collection::vec(0.2f64..2.0, 6),
        signs in prop::collection::vec(any::<bool>(), 6),
    ) {
        // smooth points: y away from b (L1 kink) and positive (KL domain)
        let y: Vec<f64> = b
            .iter()
            .zip(offsets.iter().zip(&signs))
            .map(|(&bi, (&o, &s))| if s { bi + o } else { (bi - o).max(bi * 0.1) })
            .collect();
        let h = 1e-6;
        for kind in LossKind::ALL {
            let g = loss_gradient(kind, &b, &y).unwrap();
            for i in 0..b.len() {
                let (mut yp, mut ym) = (y.clone(), y.clone());
                yp[i] += h;
                ym[i] -= h;
                let fd = (eval_loss(kind, &b, &yp).unwrap() - eval_loss(kind, &b, &ym).unwrap()) / (2.0 * h);
                prop_assert!((g[i] - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{} {} vs {}", kind, g[i], fd);
            }
        }
    }
}

#[test]
fn l2_prox_is_the_observation() {
    let b = [1.0, -2.0, 3.5];
    assert_eq!(y_update(LossKind::L2, &b, &[10.0, 10.0, 10.0], 0.3).unwrap(), b.to_vec());
}

#[test]
fn kl_value_matches_formula() {
    let v = eval_loss(LossKind::Kl, &[1.0, 0.0, 4.0], &[2.0, 3.0, 4.0]).unwrap();
    let expect = (0.5f64).ln() + 2.0 - 1.0 + 3.0;
    assert!((v - expect).abs() < 1e-14);
}
