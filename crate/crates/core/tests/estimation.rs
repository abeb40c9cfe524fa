mod common;

use common::{max_abs, probit_data};
use robord::estimate::{fit, FitConfig};
use robord::inference::{mean_psi, sandwich, DEFAULT_FD_STEP};
use robord::model::objective;
use robord::{Dataset, LinkKind, Method, Params};

fn central_gradient(method: Method, params: &Params, data: &Dataset) -> Vec<f64> {
    let theta = params.to_vec();
    let p = params.beta.len();
    (0..theta.len())
        .map(|j| {
            let h = 1e-5 * theta[j].abs().max(1.0);
            let mut up = theta.clone();
            up[j] += h;
            let mut down = theta.clone();
            down[j] -= h;
            let fu = objective(method, &Params::from_slice(&up, p), LinkKind::Probit, data).unwrap();
            let fd = objective(method, &Params::from_slice(&down, p), LinkKind::Probit, data).unwrap();
            (fu - fd) / (2.0 * h)
        })
        .collect()
}

#[test]
fn ml_fit_lands_near_the_truth() {
    let data = probit_data(200, 21);
    let r = fit(&data, &FitConfig::new(Method::Ml, LinkKind::Probit)).unwrap();
    assert!(r.converged);
    let se = sandwich(Method::Ml, &r, &data, DEFAULT_FD_STEP).unwrap().std_errors();
    let truth = [2.5, 1.2, 0.7, -3.0, -0.7, 1.6, 3.9];
    for ((est, t), s) in r.params.to_vec().iter().zip(truth).zip(se) {
        assert!((est - t).abs() < 3.0 * s, "{est} vs {t} (se {s})");
    }
}

#[test]
fn robust_fits_are_stationary() {
    let data = probit_data(200, 22);
    for method in [
        Method::Dp { alpha: 0.3 },
        Method::Gamma { gamma: 0.3 },
        Method::Dp { alpha: 0.7 },
    ] {
        let r = fit(&data, &FitConfig::new(method, LinkKind::Probit)).unwrap();
        assert!(r.converged);
        assert!(r.params.delta.windows(2).all(|w| w[0] < w[1]));
        let g = central_gradient(method, &r.params, &data);
        assert!(max_abs(&g) <= 1e-4, "{method}: {g:?}");
    }
}

#[test]
fn estimating_equations_vanish_at_the_fit() {
    let data = probit_data(200, 23);
    for method in [Method::Ml, Method::Dp { alpha: 0.5 }] {
        let r = fit(&data, &FitConfig::new(method, LinkKind::Probit)).unwrap();
        let m = mean_psi(method, &r.params, LinkKind::Probit, &data).unwrap();
        assert!(max_abs(&m) <= 1e-4, "{method}: {m:?}");
    }
}

#[test]
fn row_permutation_leaves_the_fit_unchanged() {
    let data = probit_data(150, 24);
    let mut order: Vec<usize> = (0..data.n_rows()).collect();
    order.reverse();
    order.rotate_left(37);
    let shuffled = data.select_rows(&order);
    for method in [Method::Ml, Method::Gamma { gamma: 0.5 }] {
        let cfg = FitConfig::new(method, LinkKind::Probit);
        let a = fit(&data, &cfg).unwrap().params.to_vec();
        let b = fit(&shuffled, &cfg).unwrap().params.to_vec();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8, "{method}: {x} vs {y}");
        }
    }
}

#[test]
fn logit_and_loglog_fits_converge() {
    let data = probit_data(200, 25);
    for link in [LinkKind::Logit, LinkKind::LogLog, LinkKind::CLogLog, LinkKind::Cauchit] {
        let r = fit(&data, &FitConfig::new(Method::Dp { alpha: 0.3 }, link)).unwrap();
        assert!(r.converged, "{link}");
        assert!(r.objective.is_finite());
        // same sign as the truth
        assert!(r.params.beta[0] > 0.0, "{link}: {:?}", r.params);
    }
}

#[test]
fn empty_category_is_rejected() {
    let data = Dataset::new(vec![1; 6], (0..6).map(|i| vec![i as f64]).collect(), 2).unwrap();
    assert!(fit(&data, &FitConfig::new(Method::Ml, LinkKind::Probit)).is_err());
}
