//! Derivative-free minimizers: Nelder-Mead simplex and compass pattern search.

/// Result of a minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Best objective value after each iteration; never increases.
    pub trace: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop once the simplex diameter and the objective spread are both below this.
    pub tolerance: f64,
    /// Per-coordinate offsets of the initial simplex vertices.
    pub steps: Vec<f64>,
}

impl SimplexOptions {
    pub fn new(dim: usize, max_evals: usize, tolerance: f64, step: f64) -> Self {
        Self {
            max_evals,
            tolerance,
            steps: vec![step; dim],
        }
    }
}

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn sort_simplex(points: &mut [(Vec<f64>, f64)]) {
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
}

/// Minimizes `f` from `x0` with the standard simplex moves
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
///
/// The evaluation budget is checked once per iteration, so a final shrink
/// may overshoot `max_evals` by at most `dim` evaluations.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(opts.steps.len(), dim, "one simplex step per coordinate");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        sanitize(f(x))
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.steps[i];
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    sort_simplex(&mut simplex);

    let mut trace = vec![simplex[0].1];
    let mut converged = false;
    while evals < opts.max_evals {
        let best = &simplex[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = simplex[1..]
            .iter()
            .map(|(_, fx)| (fx - best.1).abs())
            .fold(0.0, f64::max);
        if diameter <= opts.tolerance && spread <= opts.tolerance {
            converged = true;
            break;
        }

        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(REFLECTION);
        let fr = eval(&xr, &mut evals);
        let mut shrink = false;
        if fr < simplex[0].1 {
            let xe = along(REFLECTION * EXPANSION);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else if fr < worst.1 {
            let xc = along(REFLECTION * CONTRACTION);
            let fc = eval(&xc, &mut evals);
            if fc <= fr {
                simplex[dim] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let xcc = along(-CONTRACTION);
            let fcc = eval(&xcc, &mut evals);
            if fcc < worst.1 {
                simplex[dim] = (xcc, fcc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let anchor = simplex[0].0.clone();
            for point in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&point.0)
                    .map(|(a, p)| a + SHRINK * (p - a))
                    .collect();
                let fx = eval(&x, &mut evals);
                *point = (x, fx);
            }
        }
        sort_simplex(&mut simplex);
        trace.push(simplex[0].1);
    }

    let (x, f) = simplex.swap_remove(0);
    Minimum {
        x,
        f,
        evals,
        trace,
        converged,
    }
}

/// Compass search: polls `±step` along each coordinate, moves to the first
/// improvement and halves the step when a full poll fails.
pub fn pattern_search<F>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    tolerance: f64,
    max_evals: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x = x0.to_vec();
    let mut fx = sanitize(f(&x));
    let mut evals = 1;
    let mut step = initial_step;
    let mut trace = vec![fx];
    let mut converged = false;
    'outer: while evals < max_evals {
        if step <= tolerance {
            converged = true;
            break;
        }
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                if evals >= max_evals {
                    break 'outer;
                }
                let mut y = x.clone();
                y[i] += dir * step;
                let fy = sanitize(f(&y));
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
        trace.push(fx);
    }
    Minimum {
        x,
        f: fx,
        evals,
        trace,
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
    fn parabola_1d() {
        let m = nelder_mead(
            |x| x[0] * x[0],
            &[3.0],
            &SimplexOptions::new(1, 2000, 1e-10, 0.5),
        );
        assert!(m.converged);
        assert!(m.x[0].abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn rosenbrock_valley() {
        let m = nelder_mead(
            rosenbrock,
            &[-1.2, 1.0],
            &SimplexOptions::new(2, 5000, 1e-12, 0.1),
        );
        assert!(m.evals <= 5000);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn trace_never_increases() {
        let m = nelder_mead(
            rosenbrock,
            &[0.0, 0.0],
            &SimplexOptions::new(2, 800, 1e-12, 0.3),
        );
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*m.trace.last().unwrap(), m.f);
    }

    #[test]
    fn budget_respected() {
        let m = nelder_mead(
            rosenbrock,
            &[-1.2, 1.0],
            &SimplexOptions::new(2, 50, 0.0, 0.1),
        );
        assert!(!m.converged);
        assert!(m.evals <= 50 + 2);
    }

    #[test]
    fn nan_objective_treated_as_worst() {
        let m = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[2.0],
            &SimplexOptions::new(1, 1000, 1e-10, 0.5),
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn compass_search_quadratic() {
        let m = pattern_search(
            |x| (x[0] - 0.3).powi(2) + (x[1] + 0.7).powi(2),
            &[0.0, 0.0],
            0.25,
            1e-9,
            10_000,
        );
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-8 && (m.x[1] + 0.7).abs() < 1e-8);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
