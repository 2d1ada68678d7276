//! Nelder–Mead downhill simplex minimization.

/// Settings for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Per-coordinate offset of the initial simplex vertices.
    pub initial_step: f64,
    /// Stop when `f_max − f_min ≤ f_tol · |f_min|`.
    pub f_tol: f64,
    /// Stop when the simplex fits in a ball of this radius around its best point.
    pub x_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.05,
            f_tol: 1e-10,
            x_tol: 1e-6,
            max_evaluations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// True if a tolerance was met before the evaluation cap.
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`.
///
/// The initial simplex is `x0` plus `x0 + initial_step · e_i` for every
/// coordinate. A zero-dimensional problem returns `x0` after one evaluation.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let f0 = eval(x0, &mut evals);
    if n == 0 {
        return Minimum {
            x: x0.to_vec(),
            value: f0,
            evaluations: evals,
            converged: true,
        };
    }

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(f0);
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        vals.push(eval(&x, &mut evals));
        pts.push(x);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut converged = false;

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = vals[worst] - vals[best];
        let f_ok = spread <= opts.f_tol * vals[best].abs();
        let diameter = pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[best])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
            .sqrt();
        if f_ok || diameter <= opts.x_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evaluations {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);

        let along = |out: &mut Vec<f64>, from: &[f64], coef: f64, centroid: &[f64]| {
            for ((o, c), x) in out.iter_mut().zip(centroid).zip(from) {
                *o = c + coef * (c - x);
            }
        };

        along(&mut trial, &pts[worst], opts.reflection, &centroid);
        let fr = eval(&trial, &mut evals);

        if fr < vals[best] {
            along(&mut trial2, &pts[worst], opts.reflection * opts.expansion, &centroid);
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
            continue;
        }
        let contracted = if fr < vals[worst] {
            along(&mut trial2, &pts[worst], opts.reflection * opts.contraction, &centroid);
            let fc = eval(&trial2, &mut evals);
            (fc <= fr).then_some(fc)
        } else {
            along(&mut trial2, &pts[worst], -opts.contraction, &centroid);
            let fc = eval(&trial2, &mut evals);
            (fc < vals[worst]).then_some(fc)
        };
        if let Some(fc) = contracted {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for (x, a) in pts[i].iter_mut().zip(&anchor) {
                *x = a + opts.shrink * (*x - a);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    Minimum {
        x: pts[best].clone(),
        value: vals[best],
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn finds_rosenbrock_minimum() {
        let opts = NelderMeadOptions {
            initial_step: 0.5,
            f_tol: 0.0,
            x_tol: 1e-10,
            max_evaluations: 5000,
            ..Default::default()
        };
        let m = minimize(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn quadratic_in_five_dimensions() {
        let center = [1.0, -2.0, 0.5, 3.0, -0.25];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&center)
                .enumerate()
                .map(|(i, (a, b))| (i + 1) as f64 * (a - b) * (a - b))
                .sum::<f64>()
        };
        let opts = NelderMeadOptions {
            initial_step: 1.0,
            f_tol: 0.0,
            x_tol: 1e-9,
            max_evaluations: 20_000,
            ..Default::default()
        };
        let m = minimize(f, &[0.0; 5], &opts);
        for (x, c) in m.x.iter().zip(&center) {
            assert!((x - c).abs() < 1e-6);
        }
    }

    #[test]
    fn evaluation_cap_is_respected() {
        let opts = NelderMeadOptions {
            max_evaluations: 30,
            f_tol: 0.0,
            x_tol: 0.0,
            ..Default::default()
        };
        let mut calls = 0;
        let m = minimize(
            |x| {
                calls += 1;
                rosenbrock(x)
            },
            &[-1.2, 1.0],
            &opts,
        );
        assert!(!m.converged);
        assert_eq!(m.evaluations, calls);
        // One iteration may overrun by at most a shrink step.
        assert!(calls <= 30 + 3);
        assert!(m.value <= rosenbrock(&[-1.2, 1.0]));
    }

    #[test]
    fn zero_dimensions() {
        let m = minimize(|_| 4.0, &[], &NelderMeadOptions::default());
        assert_eq!((m.value, m.evaluations), (4.0, 1));
    }
}
