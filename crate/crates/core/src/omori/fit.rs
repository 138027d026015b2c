//! Least-squares calibration of `(K, p, tau)` against a cumulative count curve.
//!
//! The search runs in `(ln K, p, ln tau)` so that `K` and `tau` stay positive.
//! Each iteration solves the damped, column-scaled linearized problem through
//! an SVD of the scaled Jacobian, which keeps the step well defined when the
//! curve is nearly linear and `K` and `tau` become hard to separate.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::Serialize;

use super::count::CountCurve;
use super::model::{cumulative_with_gradient, unit_cumulative, OmoriParams};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FitError {
    #[error("need at least 4 points to fit 3 parameters, got {0}")]
    TooFewPoints(usize),
    #[error("count curve is constant; nothing to fit")]
    ConstantCurve,
    #[error("time and count arrays differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("data contain a non-finite or negative value")]
    BadData,
    #[error("invalid initial parameters: {0:?}")]
    BadInit(OmoriParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative SSE reduction below which an accepted step ends the search.
    pub ftol: f64,
    /// Relative scaled step length below which the search ends.
    pub xtol: f64,
    /// Restart from a 5x5 grid over `(p, tau)` when no initial guess is given.
    pub grid_restarts: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-15,
            xtol: 1e-13,
            grid_restarts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmoriFit {
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub tau: f64,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `(J^T J)^-1` in `(K, p, tau)` at the solution, when invertible.
    pub sensitivity: Option<[[f64; 3]; 3]>,
}

impl OmoriFit {
    pub fn params(&self) -> OmoriParams {
        OmoriParams::new(self.k, self.p, self.tau)
    }

    pub fn predict(&self, t: f64) -> f64 {
        self.k * unit_cumulative(t, self.p, self.tau)
    }
}

/// Fits a count curve with default options.
pub fn fit_omori(curve: &CountCurve, init: Option<OmoriParams>) -> Result<OmoriFit, FitError> {
    let t: Vec<f64> = curve.t.iter().map(|&v| f64::from(v)).collect();
    let n: Vec<f64> = curve.n.iter().map(|&v| f64::from(v)).collect();
    fit_cumulative(&t, &n, init, &FitOptions::default())
}

/// Fits `N(t)` samples. Without `init`, starts from `p = 1.2`, `tau = T/10`
/// and every point of a 5x5 `(p, tau)` grid, keeping the lowest SSE.
pub fn fit_cumulative(
    t: &[f64],
    n: &[f64],
    init: Option<OmoriParams>,
    opts: &FitOptions,
) -> Result<OmoriFit, FitError> {
    if t.len() != n.len() {
        return Err(FitError::LengthMismatch(t.len(), n.len()));
    }
    if t.len() < 4 {
        return Err(FitError::TooFewPoints(t.len()));
    }
    if t.iter().chain(n).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(FitError::BadData);
    }
    if n.iter().all(|v| *v == n[0]) {
        return Err(FitError::ConstantCurve);
    }

    let problem = Problem { t, n };
    let starts = match init {
        Some(p) => {
            if p.validate().is_err() {
                return Err(FitError::BadInit(p));
            }
            vec![[p.k.ln(), p.p, p.tau.ln()]]
        }
        None => problem.default_starts(opts.grid_restarts),
    };

    let mut best: Option<Solution> = None;
    for x0 in starts {
        let sol = problem.levenberg_marquardt(x0, opts);
        if best.as_ref().is_none_or(|b| sol.sse < b.sse) {
            best = Some(sol);
        }
    }
    let best = best.expect("at least one start");
    let (k, p, tau) = (best.x[0].exp(), best.x[1], best.x[2].exp());
    Ok(OmoriFit {
        k,
        p,
        tau,
        sse: best.sse,
        converged: best.converged,
        iterations: best.iterations,
        sensitivity: problem.sensitivity(best.x),
    })
}

struct Problem<'a> {
    t: &'a [f64],
    n: &'a [f64],
}

struct Solution {
    x: [f64; 3],
    sse: f64,
    converged: bool,
    iterations: usize,
}

const P_LIMIT: f64 = 50.0;
const LN_TAU_LIMIT: f64 = 40.0;

impl Problem<'_> {
    fn default_starts(&self, grid: bool) -> Vec<[f64; 3]> {
        let horizon = self.t.iter().cloned().fold(0.0, f64::max).max(1.0);
        let mut starts = Vec::with_capacity(26);
        let mut push = |p: f64, tau: f64| {
            if let Some(x) = self.matched_start(p, tau, horizon) {
                starts.push(x);
            }
        };
        push(1.2, horizon / 10.0);
        if grid {
            for i in 0..5 {
                let p = 0.5 + 0.5 * i as f64;
                for j in 0..5 {
                    let tau = horizon.powf(j as f64 / 4.0);
                    push(p, tau);
                }
            }
        }
        starts
    }

    /// Start whose `K` makes the model hit the last data point exactly.
    fn matched_start(&self, p: f64, tau: f64, horizon: f64) -> Option<[f64; 3]> {
        let last = self.n[self.n.len() - 1];
        let target = if last > 0.0 {
            last
        } else {
            self.n.iter().cloned().fold(0.0, f64::max)
        };
        let g = unit_cumulative(horizon, p, tau);
        let k = target / g;
        (k.is_finite() && k > 0.0).then(|| [k.ln(), p, tau.ln()])
    }

    fn in_domain(x: [f64; 3]) -> bool {
        x.iter().all(|v| v.is_finite()) && x[1].abs() < P_LIMIT && x[2].abs() < LN_TAU_LIMIT
    }

    fn residuals(&self, x: [f64; 3]) -> Option<(DVector<f64>, f64)> {
        if !Self::in_domain(x) {
            return None;
        }
        let (k, p, tau) = (x[0].exp(), x[1], x[2].exp());
        let r = DVector::from_iterator(
            self.t.len(),
            self.t
                .iter()
                .zip(self.n)
                .map(|(&t, &n)| n - k * unit_cumulative(t, p, tau)),
        );
        let sse = r.norm_squared();
        sse.is_finite().then_some((r, sse))
    }

    fn jacobian(&self, x: [f64; 3]) -> DMatrix<f64> {
        let (k, p, tau) = (x[0].exp(), x[1], x[2].exp());
        let mut j = DMatrix::zeros(self.t.len(), 3);
        for (i, &t) in self.t.iter().enumerate() {
            let (_, g) = cumulative_with_gradient(t, k, p, tau);
            for c in 0..3 {
                j[(i, c)] = g[c];
            }
        }
        j
    }

    fn levenberg_marquardt(&self, x0: [f64; 3], opts: &FitOptions) -> Solution {
        let scale_n: f64 = self.n.iter().map(|v| v * v).sum();
        let Some((mut r, mut sse)) = self.residuals(x0) else {
            return Solution {
                x: x0,
                sse: f64::INFINITY,
                converged: false,
                iterations: 0,
            };
        };
        let mut x = x0;
        let mut diag = [0.0f64; 3];
        let mut lambda: Option<f64> = None;
        let mut converged = false;
        let mut iterations = 0;

        'outer: while iterations < opts.max_iterations {
            iterations += 1;
            if sse <= 1e-30 * scale_n {
                converged = true;
                break;
            }
            let mut jac = self.jacobian(x);
            if jac.iter().any(|v| !v.is_finite()) {
                break;
            }
            for (c, d) in diag.iter_mut().enumerate() {
                let norm = jac.column(c).norm();
                *d = d.max(if norm > 0.0 { norm } else { 1.0 });
                jac.column_mut(c).scale_mut(1.0 / *d);
            }
            let svd = jac.clone().svd(true, true);
            let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
                break;
            };
            let s = &svd.singular_values;
            let s_max = s.max();
            if !(s_max.is_finite() && s_max > 0.0) {
                break;
            }
            let utr = u.transpose() * &r;
            let lam = lambda.get_or_insert(1e-3 * s_max * s_max);

            loop {
                let mut step = [0.0f64; 3];
                for i in 0..s.len() {
                    let coeff = s[i] * utr[i] / (s[i] * s[i] + *lam);
                    for c in 0..3 {
                        step[c] += v_t[(i, c)] * coeff;
                    }
                }
                let candidate = [
                    x[0] + step[0] / diag[0],
                    x[1] + step[1] / diag[1],
                    x[2] + step[2] / diag[2],
                ];
                match self.residuals(candidate) {
                    Some((r_new, sse_new)) if sse_new < sse => {
                        let reduction = (sse - sse_new) / sse;
                        let step_norm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let x_norm = (0..3)
                            .map(|c| (diag[c] * candidate[c]).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        x = candidate;
                        r = r_new;
                        sse = sse_new;
                        *lam = (*lam * 0.2).max(1e-20 * s_max * s_max);
                        if reduction <= opts.ftol || step_norm <= opts.xtol * (x_norm + opts.xtol) {
                            converged = true;
                            break 'outer;
                        }
                        break;
                    }
                    _ => {
                        *lam *= 10.0;
                        if *lam > 1e32 * (s_max * s_max).max(1e-300) {
                            // no descent direction left at machine precision
                            converged = sse <= 1e-20 * scale_n || self.stationary(&jac, &r);
                            break 'outer;
                        }
                    }
                }
            }
        }
        Solution {
            x,
            sse,
            converged,
            iterations,
        }
    }

    /// Scaled gradient cosine test.
    fn stationary(&self, scaled_jac: &DMatrix<f64>, r: &DVector<f64>) -> bool {
        let rn = r.norm();
        if rn == 0.0 {
            return true;
        }
        let g = scaled_jac.transpose() * r;
        (0..3).all(|c| {
            let cn = scaled_jac.column(c).norm();
            cn == 0.0 || (g[c] / (cn * rn)).abs() <= 1e-8
        })
    }

    fn sensitivity(&self, x: [f64; 3]) -> Option<[[f64; 3]; 3]> {
        let (k, tau) = (x[0].exp(), x[2].exp());
        let j = self.jacobian(x);
        // chain rule back to (K, p, tau)
        let conv = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0 / k, 1.0, 1.0 / tau));
        let jn = j * conv;
        let jtj = jn.transpose() * &jn;
        let inv = Matrix3::from_iterator(jtj.iter().copied()).try_inverse()?;
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = inv[(r, c)];
            }
        }
        out.iter().flatten().all(|v| v.is_finite()).then_some(out)
    }
}
