//! Box-projected Nelder-Mead maximizer with seeded restarts.
//!
//! Uses the dimension-adaptive coefficients of Gao & Han (2012), which
//! behave much better than the textbook ones past a handful of dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplexSearchConfig {
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Number of starts; the first uses `x0` as given, later ones perturb it.
    pub restarts: usize,
    pub initial_step: f64,
    /// Stop a start once both the value spread and the simplex diameter
    /// fall below this.
    pub tolerance: f64,
    /// Weight of squared equality violations in penalized searches.
    pub penalty: f64,
    pub seed: u64,
}

impl Default for SimplexSearchConfig {
    fn default() -> Self {
        SimplexSearchConfig {
            max_evals: 4000,
            restarts: 10,
            initial_step: 0.25,
            tolerance: 1e-10,
            penalty: 1e3,
            seed: 0,
        }
    }
}

/// Maximizes `f` over the box; returns the best point and value found.
pub fn nm_maximize<F>(f: F, x0: &[f64], bounds: &[(f64, f64)], cfg: &SimplexSearchConfig) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    nm_maximize_until(f, x0, bounds, cfg, None)
}

/// As [`nm_maximize`], but returns as soon as a value `>= target` is seen.
pub fn nm_maximize_until<F>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &SimplexSearchConfig,
    target: Option<f64>,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), bounds.len(), "start point and box differ in dimension");
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let reached = |v: f64| target.is_some_and(|t| v >= t);

    let start = project(x0, bounds);
    let mut best_x = start.clone();
    let mut best_v = eval(&start);
    if reached(best_v) || x0.is_empty() {
        return (best_x, best_v);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for restart in 0..cfg.restarts.max(1) {
        let origin = if restart == 0 {
            start.clone()
        } else {
            let noisy: Vec<f64> = start
                .iter()
                .map(|v| v + rng.random_range(-cfg.initial_step..=cfg.initial_step))
                .collect();
            project(&noisy, bounds)
        };
        let (x, v) = single_start(&mut eval, &origin, bounds, cfg, target);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
        if reached(best_v) {
            break;
        }
    }
    (best_x, best_v)
}

fn project(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter().zip(bounds).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect()
}

fn single_start<F>(
    eval: &mut F,
    origin: &[f64],
    bounds: &[(f64, f64)],
    cfg: &SimplexSearchConfig,
    target: Option<f64>,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = origin.len();
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    // Internally minimize g = -f.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let g0 = -eval(origin);
    simplex.push((origin.to_vec(), g0));
    let mut evals = 1;
    for i in 0..n {
        let mut x = origin.to_vec();
        let (lo, hi) = bounds[i];
        x[i] = if origin[i] + cfg.initial_step <= hi {
            origin[i] + cfg.initial_step
        } else if origin[i] - cfg.initial_step >= lo {
            origin[i] - cfg.initial_step
        } else if hi - origin[i] >= origin[i] - lo {
            hi
        } else {
            lo
        };
        let g = -eval(&x);
        evals += 1;
        simplex.push((x, g));
    }

    let reached = |g: f64| target.is_some_and(|t| -g >= t);
    while evals < cfg.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if reached(simplex[0].1) {
            break;
        }
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= cfg.tolerance && diameter <= cfg.tolerance {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            let x: Vec<f64> = centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect();
            project(&x, bounds)
        };
        let worst = simplex[n].0.clone();
        let g_worst = simplex[n].1;
        let g_second = simplex[n - 1].1;
        let g_best = simplex[0].1;

        let xr = along(alpha, &worst);
        let gr = -eval(&xr);
        evals += 1;
        if gr < g_best {
            let xe = along(alpha * gamma, &worst);
            let ge = -eval(&xe);
            evals += 1;
            simplex[n] = if ge < gr { (xe, ge) } else { (xr, gr) };
            continue;
        }
        if gr < g_second {
            simplex[n] = (xr, gr);
            continue;
        }
        let (xc, gc) = if gr < g_worst {
            let xc = along(alpha * rho, &worst);
            let gc = -eval(&xc);
            (xc, gc)
        } else {
            let xc = along(-rho, &worst);
            let gc = -eval(&xc);
            (xc, gc)
        };
        evals += 1;
        if gc < g_worst.min(gr) {
            simplex[n] = (xc, gc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].0.clone();
        for (x, g) in simplex.iter_mut().skip(1) {
            let shrunk: Vec<f64> = best.iter().zip(x.iter()).map(|(b, v)| b + sigma * (v - b)).collect();
            *x = project(&shrunk, bounds);
            *g = -eval(x);
            evals += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, g) = simplex.swap_remove(0);
    (x, -g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let (x, _) = nm_maximize(|x| -(x[0] - 0.3).powi(2), &[0.0], &[(0.0, 1.0)], &SimplexSearchConfig::default());
        assert!((x[0] - 0.3).abs() < 1e-4, "{x:?}");
    }

    #[test]
    fn constant_objective_returns_start_value() {
        let (x, v) = nm_maximize(|_| 7.0, &[0.2, 0.4], &[(0.0, 1.0); 2], &SimplexSearchConfig::default());
        assert_eq!(v, 7.0);
        assert_eq!(x.len(), 2);
    }

    #[test]
    fn stays_inside_the_box() {
        let cfg = SimplexSearchConfig::default();
        let (x, v) = nm_maximize(|x| x[0] + x[1], &[0.5, 0.5], &[(0.0, 1.0), (-1.0, 0.25)], &cfg);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 0.25).abs() < 1e-9);
        assert!((v - 1.25).abs() < 1e-9);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = SimplexSearchConfig {
            restarts: 4,
            seed: 11,
            ..Default::default()
        };
        let f = |x: &[f64]| -(x[0] - 0.1).abs() - (x[1] + 0.2).powi(2) + (3.0 * x[2]).sin();
        let a = nm_maximize(f, &[0.0; 3], &[(-1.0, 1.0); 3], &cfg);
        let b = nm_maximize(f, &[0.0; 3], &[(-1.0, 1.0); 3], &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn never_worse_than_start() {
        let cfg = SimplexSearchConfig {
            max_evals: 5,
            restarts: 1,
            ..Default::default()
        };
        let f = |x: &[f64]| -(x[0] * 10.0).cos();
        let (_, v) = nm_maximize(f, &[0.0], &[(-1.0, 1.0)], &cfg);
        assert!(v >= f(&[0.0]));
    }

    #[test]
    fn early_exit_at_target() {
        let mut calls = 0;
        let cfg = SimplexSearchConfig::default();
        let (_, v) = nm_maximize_until(
            |x| {
                calls += 1;
                -(x[0] - 0.5).powi(2)
            },
            &[0.0],
            &[(0.0, 1.0)],
            &cfg,
            Some(-0.01),
        );
        assert!(v >= -0.01);
        assert!(calls < 50, "{calls}");
    }
}
