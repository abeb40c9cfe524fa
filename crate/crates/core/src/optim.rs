//! Nelder-Mead simplex minimization with dimension-adaptive coefficients
//! (Gao and Han, 2012).

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Iteration budget, shared between the main run and any polish restarts.
    pub max_iters: usize,
    /// Stop once `max f - min f` over the simplex falls below this.
    pub f_tol: f64,
    /// Initial simplex edge along coordinate `j` is
    /// `initial_step * max(1, |x0_j|)`.
    pub initial_step: f64,
    /// Number of times the simplex is rebuilt around the best vertex after
    /// convergence, to guard against a collapsed simplex.
    pub max_polish: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            f_tol: 1e-10,
            initial_step: 0.25,
            max_polish: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
}

/// Minimizes `f` from `x0`. Non-finite values are treated as `+inf`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMead) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut converged = false;

    for round in 0..=opts.max_polish {
        let (x, fx, done) = run(&mut eval, &best_x, best_f, opts, &mut iterations, &mut history);
        let gain = best_f - fx;
        if fx <= best_f {
            best_x = x;
            best_f = fx;
        }
        if !done {
            converged = false;
            break;
        }
        converged = true;
        if round > 0 && !(gain > opts.f_tol) {
            break;
        }
    }

    Minimum {
        x: best_x,
        fx: best_f,
        iterations,
        evaluations,
        converged,
        history,
    }
}

fn run<E>(
    eval: &mut E,
    x0: &[f64],
    f0: f64,
    opts: &NelderMead,
    iterations: &mut usize,
    history: &mut Vec<f64>,
) -> (Vec<f64>, f64, bool)
where
    E: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (rho, chi, psi, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    values.push(f0);
    for j in 0..n {
        let mut v = x0.to_vec();
        v[j] += opts.initial_step * x0[j].abs().max(1.0);
        values.push(eval(&v));
        simplex.push(v);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (lo, hi, second) = (order[0], order[n], order[n.saturating_sub(1)]);
        if values[hi] - values[lo] < opts.f_tol || (values[hi] == values[lo] && values[lo].is_finite()) {
            return (simplex[lo].clone(), values[lo], true);
        }
        if *iterations >= opts.max_iters {
            return (simplex[lo].clone(), values[lo], false);
        }
        *iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        let point = |coef: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                *o = c + coef * (c - w);
            }
        };

        point(rho, &mut trial, &simplex[hi]);
        let fr = eval(&trial);
        if fr < values[lo] {
            point(rho * chi, &mut trial2, &simplex[hi]);
            let fe = eval(&trial2);
            if fe < fr {
                simplex[hi].copy_from_slice(&trial2);
                values[hi] = fe;
            } else {
                simplex[hi].copy_from_slice(&trial);
                values[hi] = fr;
            }
        } else if fr < values[second] {
            simplex[hi].copy_from_slice(&trial);
            values[hi] = fr;
        } else {
            let outside = fr < values[hi];
            let coef = if outside { rho * psi } else { -psi };
            point(coef, &mut trial2, &simplex[hi]);
            let fc = eval(&trial2);
            let accept = if outside { fc <= fr } else { fc < values[hi] };
            if accept {
                simplex[hi].copy_from_slice(&trial2);
                values[hi] = fc;
            } else {
                let best = simplex[lo].clone();
                for &i in &order[1..] {
                    for (v, b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + sigma * (*v - b);
                    }
                    values[i] = eval(&simplex[i]);
                }
            }
        }
        let best = values.iter().copied().fold(f64::INFINITY, f64::min);
        history.push(best.min(history.last().copied().unwrap_or(f64::INFINITY)));
    }
}
