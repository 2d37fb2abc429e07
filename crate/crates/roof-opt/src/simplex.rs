//! Nelder-Mead with the dimension-adaptive coefficients of Gao and Han,
//! which behave much better than the classical (1, 2, 1/2, 1/2) past ~10
//! parameters.

#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig {
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Converged once the best value improved by less than
    /// `rel_tol * |best|` over this many iterations.
    pub window: usize,
    pub rel_tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Re-expansions around the best point after convergence.
    pub polish: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self { max_evals: 20_000, window: 100, rel_tol: 1e-9, step: 0.3, polish: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn stalled(history: &[f64], window: usize, rel_tol: f64) -> bool {
    if history.len() <= window {
        return false;
    }
    let now = history[history.len() - 1];
    let then = history[history.len() - 1 - window];
    then - now <= rel_tol * now.abs()
}

/// Minimize `f` from `x0`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], cfg: &SimplexConfig) -> SimplexResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return SimplexResult { x: Vec::new(), value: v, evals, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, shrink) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0, &mut evals);
    let mut step = cfg.step;
    let mut converged = false;

    for round in 0..=cfg.polish {
        let start_v = best_v;
        let mut pts: Vec<Vec<f64>> = vec![best_x.clone()];
        let mut vals = vec![best_v];
        for i in 0..n {
            let mut p = best_x.clone();
            p[i] += step;
            vals.push(eval(&p, &mut evals));
            pts.push(p);
        }
        let mut history = Vec::new();
        converged = false;
        while evals < cfg.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            history.push(vals[0]);
            if stalled(&history, cfg.window, cfg.rel_tol) {
                converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < vals[0] {
                let xe = along(alpha * gamma);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
            } else if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
            } else {
                let outside = fr < vals[n];
                let xc = if outside { along(alpha * rho) } else { along(-rho) };
                let fc = eval(&xc, &mut evals);
                if fc < fr.min(vals[n]) {
                    pts[n] = xc;
                    vals[n] = fc;
                } else {
                    for i in 1..=n {
                        let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + shrink * (x - b)).collect();
                        vals[i] = eval(&p, &mut evals);
                        pts[i] = p;
                    }
                }
            }
        }
        let i = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
        if vals[i] < best_v {
            best_v = vals[i];
            best_x = pts[i].clone();
        }
        if !converged || evals >= cfg.max_evals {
            break;
        }
        if round > 0 && start_v - best_v <= cfg.rel_tol * best_v.abs() {
            break;
        }
        step *= 0.1;
    }
    SimplexResult { x: best_x, value: best_v, evals, converged }
}
