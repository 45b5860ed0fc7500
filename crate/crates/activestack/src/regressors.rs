//! Linear stacking regressors.
//!
//! Ridge regression is solved in closed form via the normal equations of the
//! centered problem; the eigendecomposition route also yields the minimum-norm
//! solution when `lambda = 0` and the design is rank-deficient.
//!
//! The linear SVR minimizes
//! `0.5 w.w + C * sum(max(0, |y_k - (w.x_k + b)| - tube))` through its dual:
//! in split variables `alpha+/- in [0, C]` with `sum(alpha+ - alpha-) = 0`
//! the dual is a box-and-hyperplane quadratic program, solved here by a
//! primal-feasible active-set method. Each working-set subproblem is solved
//! through a symmetric pseudo-inverse, with an ascent-ray step when the
//! reduced problem is unbounded, so the method terminates at a first-order
//! optimal point of the concave dual. The intercept is recovered as the exact
//! primal minimizer for the returned weights. Both fits are deterministic
//! functions of their inputs, and the intercept is unpenalized in both.

use crate::domain::LinearModel;
use crate::error::{Error, Result};

/// Ridge regularization weight; the stacking experiments use 0.01.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RidgeConfig {
    pub lambda: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig { lambda: 0.01 }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ridge lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Linear SVR settings. `tube = 0` reproduces the plain L1-loss objective;
/// a positive tube gives the conventional epsilon-insensitive loss.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvrConfig {
    pub c: f64,
    pub tube: f64,
    /// First-order optimality tolerance, relative to the gradient scale.
    pub tol: f64,
    /// Cap on active-set iterations.
    pub max_iter: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 1.0,
            tube: 0.0,
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "svr c must be > 0, got {}",
                self.c
            )));
        }
        if !(self.tube >= 0.0 && self.tube.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "svr tube must be >= 0, got {}",
                self.tube
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "svr tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("svr max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of an SVR fit. `converged` is false when the iteration budget ran
/// out before reaching first-order optimality; the best iterate is returned
/// either way.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrFit {
    pub model: LinearModel,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn check_design(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::empty("regression with no training rows"));
    }
    let m = x[0].len();
    if m == 0 {
        return Err(Error::empty("regression with zero features"));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != m {
            return Err(Error::dims(format!("training row {i}"), m, row.len()));
        }
    }
    if y.len() != x.len() {
        return Err(Error::dims("training labels", x.len(), y.len()));
    }
    Ok(m)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed-form ridge fit minimizing `sum((y_k - yhat_k)^2) + lambda * w.w`
/// with an unpenalized intercept. With `lambda = 0` and a rank-deficient
/// design the minimum-norm least-squares solution is returned.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], cfg: &RidgeConfig) -> Result<LinearModel> {
    cfg.validate()?;
    let m = check_design(x, y)?;
    let k = x.len();

    let mut x_mean = vec![0.0; m];
    for row in x {
        for (acc, v) in x_mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut x_mean {
        *v /= k as f64;
    }
    let y_mean = y.iter().sum::<f64>() / k as f64;

    // Gram matrix and right-hand side of the centered normal equations.
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, &yk) in x.iter().zip(y) {
        let xc: Vec<f64> = row.iter().zip(&x_mean).map(|(v, mu)| v - mu).collect();
        let yc = yk - y_mean;
        for i in 0..m {
            rhs[i] += xc[i] * yc;
            for j in i..m {
                gram[i][j] += xc[i] * xc[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }

    let (eigenvalues, vectors) = jacobi_eigen(gram);
    // rhs in the eigenbasis, scaled by the (regularized or pseudo-) inverse
    // spectrum, then mapped back.
    let max_eig = eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let rank_tol = max_eig * 1e-12;
    let mut coeffs = vec![0.0; m];
    for e in 0..m {
        let mut proj = 0.0;
        for i in 0..m {
            proj += vectors[i][e] * rhs[i];
        }
        let eig = eigenvalues[e].max(0.0);
        let scale = if cfg.lambda > 0.0 {
            1.0 / (eig + cfg.lambda)
        } else if eig > rank_tol {
            1.0 / eig
        } else {
            0.0
        };
        coeffs[e] = proj * scale;
    }
    let mut weights = vec![0.0; m];
    for i in 0..m {
        for e in 0..m {
            weights[i] += vectors[i][e] * coeffs[e];
        }
    }
    let intercept = y_mean - dot(&weights, &x_mean);
    Ok(LinearModel::new(weights, intercept))
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix whose columns are eigenvectors.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n == 1 {
        return (vec![a[0][0]], v);
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| a[i][i]).collect();
    (eig, v)
}

/// Minimum-norm solution of a symmetric (possibly singular) system via the
/// Jacobi pseudo-inverse, plus the residual `rhs - A z` (the null-space
/// component of `rhs`, zero when the system is consistent).
fn symmetric_pseudo_solve(a: &[Vec<f64>], rhs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let (eigenvalues, vectors) = jacobi_eigen(a.to_vec());
    let max_abs = eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let cutoff = max_abs * 1e-11;
    let mut z = vec![0.0; n];
    for e in 0..n {
        if eigenvalues[e].abs() <= cutoff {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..n {
            proj += vectors[i][e] * rhs[i];
        }
        let scaled = proj / eigenvalues[e];
        for i in 0..n {
            z[i] += vectors[i][e] * scaled;
        }
    }
    let mut residual = rhs.to_vec();
    for i in 0..n {
        residual[i] -= dot(&a[i], &z);
    }
    (z, residual)
}

/// The primal SVR objective at `(w, b)`.
pub fn svr_objective(x: &[Vec<f64>], y: &[f64], cfg: &SvrConfig, model: &LinearModel) -> f64 {
    let reg: f64 = 0.5 * model.weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yk)| (yk - dot(&model.weights, row) - model.intercept).abs() - cfg.tube)
        .map(|e| e.max(0.0))
        .sum();
    reg + cfg.c * loss
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum VarState {
    Lower,
    Upper,
    Free,
}

/// Dual state for the active-set solve. Variable `i < k` is `alpha+_i`
/// (equality coefficient +1), variable `k + i` is `alpha-_i` (coefficient
/// -1); `beta_i = alpha+_i - alpha-_i` and `w = sum(beta_i x_i)`.
struct DualProblem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
    tube: f64,
    k: usize,
}

impl DualProblem<'_> {
    fn sign(&self, v: usize) -> f64 {
        if v < self.k {
            1.0
        } else {
            -1.0
        }
    }

    fn row(&self, v: usize) -> &[f64] {
        &self.x[v % self.k]
    }

    fn linear_coeff(&self, v: usize) -> f64 {
        if v < self.k {
            self.y[v] - self.tube
        } else {
            -self.y[v - self.k] - self.tube
        }
    }

    /// Gradient of the dual at the current `w`: `c_v - sign_v * (w . x_v)`.
    fn gradient(&self, v: usize, w: &[f64]) -> f64 {
        self.linear_coeff(v) - self.sign(v) * dot(w, self.row(v))
    }

    fn dual_value(&self, values: &[f64], w: &[f64]) -> f64 {
        let linear: f64 = values
            .iter()
            .enumerate()
            .map(|(v, &a)| self.linear_coeff(v) * a)
            .sum();
        linear - 0.5 * dot(w, w)
    }
}

/// Fits the linear SVR by an exact active-set solve of the dual quadratic
/// program; see the module docs. Deterministic: working-set changes always
/// pick the smallest qualifying index.
pub fn fit_svr(x: &[Vec<f64>], y: &[f64], cfg: &SvrConfig) -> Result<SvrFit> {
    cfg.validate()?;
    let m = check_design(x, y)?;
    let k = x.len();
    let problem = DualProblem {
        x,
        y,
        c: cfg.c,
        tube: cfg.tube,
        k,
    };

    // KKT slack tolerance in label units.
    let eps = cfg.tol * (1.0 + y.iter().fold(0.0f64, |s, v| s.max(v.abs())));

    let mut values = vec![0.0; 2 * k];
    let mut states = vec![VarState::Lower; 2 * k];
    let mut w = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut best = (f64::NEG_INFINITY, values.clone());

    while iterations < cfg.max_iter {
        iterations += 1;
        let free: Vec<usize> = (0..2 * k)
            .filter(|&v| states[v] == VarState::Free)
            .collect();

        if free.is_empty() {
            match most_violating_bound(&problem, &states, &w, eps) {
                Some(release) => {
                    states[release] = VarState::Free;
                    continue;
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }

        // Null-space step: directions over the free set satisfying
        // sum(sign_v d_v) = 0 are spanned by z_i = e_i - (a_i/a_0) e_0.
        // In that basis the reduced problem `max g.d - d.H.d/2` is an
        // unconstrained concave quadratic; a pseudo-inverse solve gives the
        // step, and an inconsistent right-hand side yields a zero-curvature
        // ascent ray instead.
        let f = free.len();
        let direction: Vec<f64> = if f == 1 {
            vec![0.0]
        } else {
            let a: Vec<f64> = free.iter().map(|&v| problem.sign(v)).collect();
            let g: Vec<f64> = free.iter().map(|&v| problem.gradient(v, &w)).collect();
            // Rows of H over the free set.
            let h: Vec<Vec<f64>> = free
                .iter()
                .map(|&vi| {
                    free.iter()
                        .map(|&vj| {
                            problem.sign(vi)
                                * problem.sign(vj)
                                * dot(problem.row(vi), problem.row(vj))
                        })
                        .collect()
                })
                .collect();
            // Reduced quantities in the null-space basis (dimension f - 1).
            let ratio: Vec<f64> = a.iter().map(|ai| ai / a[0]).collect();
            let reduced_g: Vec<f64> = (1..f).map(|i| g[i] - ratio[i] * g[0]).collect();
            let mut reduced_h = vec![vec![0.0; f - 1]; f - 1];
            for i in 1..f {
                for j in 1..f {
                    reduced_h[i - 1][j - 1] = h[i][j] - ratio[i] * h[0][j] - ratio[j] * h[i][0]
                        + ratio[i] * ratio[j] * h[0][0];
                }
            }
            let (u, residual) = symmetric_pseudo_solve(&reduced_h, &reduced_g);
            let res_norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
            let g_norm = reduced_g.iter().map(|r| r * r).sum::<f64>().sqrt();
            // Inconsistent system: ascend along the null component forever
            // (the boxes stop it); consistent: step to the stationary point.
            let coeffs = if res_norm > 1e-9 * (1.0 + g_norm) {
                residual
            } else {
                u
            };
            // Map back: d_0 = -sum(ratio_i c_i), d_i = c_i.
            let mut d = vec![0.0; f];
            d[1..f].copy_from_slice(&coeffs[..f - 1]);
            for i in 1..f {
                d[0] -= ratio[i] * coeffs[i - 1];
            }
            d
        };

        let step_norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if step_norm <= 1e-14 {
            match kkt_adjustment(&problem, &states, &free, &w, eps) {
                Some(StateChange::Release(v)) => {
                    states[v] = VarState::Free;
                    continue;
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }

        // Ratio test toward the target (a full step is t = 1; the step was
        // scaled so that covers the consistent case, and rays use infinity).
        let slope: f64 = free
            .iter()
            .enumerate()
            .map(|(i, &v)| problem.gradient(v, &w) * direction[i])
            .sum();
        if slope <= 0.0 {
            // Numerical stall: the computed direction no longer ascends.
            match kkt_adjustment(&problem, &states, &free, &w, eps) {
                Some(StateChange::Release(v)) => {
                    states[v] = VarState::Free;
                    continue;
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }
        let curvature: f64 = {
            let mut hw = vec![0.0; m];
            for (i, &v) in free.iter().enumerate() {
                let scale = direction[i] * problem.sign(v);
                for (acc, xv) in hw.iter_mut().zip(problem.row(v)) {
                    *acc += scale * xv;
                }
            }
            dot(&hw, &hw)
        };
        // Unconstrained maximizer along the direction.
        let t_star = if curvature > 0.0 {
            slope / curvature
        } else {
            f64::INFINITY
        };
        let mut t_max = t_star;
        let mut blocker: Option<(usize, VarState)> = None;
        for (i, &v) in free.iter().enumerate() {
            let d = direction[i];
            if d > 1e-14 {
                let room = (problem.c - values[v]) / d;
                if room < t_max {
                    t_max = room.max(0.0);
                    blocker = Some((v, VarState::Upper));
                }
            } else if d < -1e-14 {
                let room = -values[v] / d;
                if room < t_max {
                    t_max = room.max(0.0);
                    blocker = Some((v, VarState::Lower));
                }
            }
        }
        if !t_max.is_finite() {
            // A flat ascent ray with no blocking bound cannot happen on a
            // bounded feasible box; treat as a numerical stall.
            converged = true;
            break;
        }

        for (i, &v) in free.iter().enumerate() {
            values[v] = (values[v] + t_max * direction[i]).clamp(0.0, problem.c);
        }
        if let Some((v, bound)) = blocker {
            states[v] = bound;
            values[v] = match bound {
                VarState::Upper => problem.c,
                _ => 0.0,
            };
        }

        // Rebuild w exactly from the values to stop drift.
        w = vec![0.0; m];
        for v in 0..2 * k {
            if values[v] != 0.0 {
                let scale = values[v] * problem.sign(v);
                for (wv, xv) in w.iter_mut().zip(problem.row(v)) {
                    *wv += scale * xv;
                }
            }
        }

        let dual = problem.dual_value(&values, &w);
        if dual > best.0 {
            best = (dual, values.clone());
        }

        if blocker.is_none() {
            // Reached the stationary point of this working set; verify the
            // bound variables' KKT conditions.
            match kkt_adjustment(&problem, &states, &free, &w, eps) {
                Some(StateChange::Release(v)) => states[v] = VarState::Free,
                None => {
                    converged = true;
                    break;
                }
            }
        }
    }

    // Return the best feasible iterate seen (the final one, when converged).
    let final_dual = problem.dual_value(&values, &w);
    if !converged && best.0 > final_dual {
        values = best.1;
        w = vec![0.0; m];
        for v in 0..2 * k {
            if values[v] != 0.0 {
                let scale = values[v] * problem.sign(v);
                for (wv, xv) in w.iter_mut().zip(problem.row(v)) {
                    *wv += scale * xv;
                }
            }
        }
    }

    let intercept = optimal_intercept(x, y, cfg, &w);
    let model = LinearModel::new(w, intercept);
    let objective = svr_objective(x, y, cfg, &model);
    Ok(SvrFit {
        model,
        objective,
        converged,
        iterations,
    })
}

enum StateChange {
    Release(usize),
}

/// With no free variables, finds the bound variable whose KKT condition is
/// most violated (ties to the smallest index), or `None` when optimal.
fn most_violating_bound(
    problem: &DualProblem<'_>,
    states: &[VarState],
    w: &[f64],
    eps: f64,
) -> Option<usize> {
    // Feasible multiplier interval [lo, hi] from the bound conditions.
    let (lo, hi) = multiplier_interval(problem, states, &[], w);
    if lo <= hi + eps {
        return None;
    }
    let lambda = 0.5 * (lo + hi);
    pick_violator(problem, states, w, lambda, eps)
}

/// After reaching a stationary point on the free set, checks the bound
/// variables' KKT conditions against the free set's multiplier and releases
/// the worst violator.
fn kkt_adjustment(
    problem: &DualProblem<'_>,
    states: &[VarState],
    free: &[usize],
    w: &[f64],
    eps: f64,
) -> Option<StateChange> {
    let lambda = if free.is_empty() {
        let (lo, hi) = multiplier_interval(problem, states, free, w);
        if lo <= hi + eps {
            return None;
        }
        0.5 * (lo + hi)
    } else {
        // All free variables share the same multiplier at stationarity.
        let mut sum = 0.0;
        for &v in free {
            sum += problem.sign(v) * problem.gradient(v, w);
        }
        sum / free.len() as f64
    };
    pick_violator(problem, states, w, lambda, eps).map(StateChange::Release)
}

/// Multiplier interval implied by the bound variables' KKT inequalities.
fn multiplier_interval(
    problem: &DualProblem<'_>,
    states: &[VarState],
    free: &[usize],
    w: &[f64],
) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for v in 0..states.len() {
        if free.contains(&v) {
            continue;
        }
        let g = problem.gradient(v, w);
        let s = problem.sign(v);
        match (states[v], s > 0.0) {
            // lower bound: g - lambda*s <= 0
            (VarState::Lower, true) => lo = lo.max(g),
            (VarState::Lower, false) => hi = hi.min(-g),
            // upper bound: g - lambda*s >= 0
            (VarState::Upper, true) => hi = hi.min(g),
            (VarState::Upper, false) => lo = lo.max(-g),
            (VarState::Free, _) => {}
        }
    }
    (lo, hi)
}

/// Most violated bound condition at the given multiplier; `None` when every
/// violation is within `eps`. Never releases a variable whose split partner
/// is already free (the pair shares one stationarity equation).
fn pick_violator(
    problem: &DualProblem<'_>,
    states: &[VarState],
    w: &[f64],
    lambda: f64,
    eps: f64,
) -> Option<usize> {
    let k = problem.k;
    let mut worst = None;
    let mut worst_violation = eps;
    for v in 0..states.len() {
        if states[v] == VarState::Free {
            continue;
        }
        let partner = if v < k { v + k } else { v - k };
        if states[partner] == VarState::Free {
            continue;
        }
        let slack = problem.gradient(v, w) - lambda * problem.sign(v);
        let violation = match states[v] {
            VarState::Lower => slack,
            VarState::Upper => -slack,
            VarState::Free => unreachable!(),
        };
        if violation > worst_violation {
            worst_violation = violation;
            worst = Some(v);
        }
    }
    worst
}

/// Exact minimizer of the primal over the intercept for fixed weights: the
/// median of the loss breakpoints `r_k -/+ tube` with `r_k = y_k - w.x_k`.
fn optimal_intercept(x: &[Vec<f64>], y: &[f64], cfg: &SvrConfig, w: &[f64]) -> f64 {
    let mut breakpoints = Vec::with_capacity(2 * y.len());
    for (row, &yk) in x.iter().zip(y) {
        let r = yk - dot(w, row);
        breakpoints.push(r - cfg.tube);
        breakpoints.push(r + cfg.tube);
    }
    crate::numerics::median(&breakpoints).expect("non-empty training set")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_all_zero_targets_gives_zero_model() {
        let x = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 1.0]];
        let y = vec![0.0, 0.0, 0.0];
        let model = fit_ridge(&x, &y, &RidgeConfig::default()).unwrap();
        assert!(model.weights.iter().all(|w| w.abs() < 1e-12));
        assert!(model.intercept.abs() < 1e-12);
    }

    #[test]
    fn ridge_one_dimensional_hand_solution() {
        // Centered solution: w = Sxy / (Sxx + lambda) = 0.5 / 0.51.
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 1.0];
        let model = fit_ridge(&x, &y, &RidgeConfig { lambda: 0.01 }).unwrap();
        let expected_w = 0.5 / 0.51;
        assert!((model.weights[0] - expected_w).abs() < 1e-12);
        assert!((model.intercept - (0.5 - expected_w * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn ridge_row_duplication_identities() {
        let x = vec![vec![1.0, 0.5], vec![2.0, -1.0], vec![0.5, 3.0]];
        let y = vec![1.0, 2.0, 0.5];
        let doubled_x: Vec<Vec<f64>> = x.iter().chain(x.iter()).cloned().collect();
        let doubled_y: Vec<f64> = y.iter().chain(y.iter()).copied().collect();

        // lambda = 0: duplication leaves the solution unchanged.
        let a = fit_ridge(&x, &y, &RidgeConfig { lambda: 0.0 }).unwrap();
        let b = fit_ridge(&doubled_x, &doubled_y, &RidgeConfig { lambda: 0.0 }).unwrap();
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wa - wb).abs() < 1e-9);
        }
        assert!((a.intercept - b.intercept).abs() < 1e-9);

        // lambda > 0: duplication equals refitting with lambda / 2.
        let c = fit_ridge(&doubled_x, &doubled_y, &RidgeConfig { lambda: 0.02 }).unwrap();
        let d = fit_ridge(&x, &y, &RidgeConfig { lambda: 0.01 }).unwrap();
        for (wc, wd) in c.weights.iter().zip(&d.weights) {
            assert!((wc - wd).abs() < 1e-9);
        }
        assert!((c.intercept - d.intercept).abs() < 1e-9);
    }

    #[test]
    fn ridge_rank_deficient_lambda_zero_returns_minimum_norm() {
        // Two identical columns: any (w1, w2) with w1 + w2 = s fits equally;
        // minimum norm splits the weight evenly.
        let x = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let y = vec![2.0, 4.0, 6.0];
        let model = fit_ridge(&x, &y, &RidgeConfig { lambda: 0.0 }).unwrap();
        assert!((model.weights[0] - model.weights[1]).abs() < 1e-9);
        assert!((model.weights[0] - 1.0).abs() < 1e-9);
        assert!(model.intercept.abs() < 1e-9);
    }

    #[test]
    fn ridge_single_row_fits_through_mean() {
        let model = fit_ridge(&[vec![70.0, 72.0]], &[71.0], &RidgeConfig::default()).unwrap();
        assert!((model.predict(&[70.0, 72.0]).unwrap() - 71.0).abs() < 1e-9);
    }

    #[test]
    fn svr_constant_targets_interpolate_with_zero_weights() {
        let x = vec![vec![1.0], vec![2.0], vec![5.0]];
        let y = vec![70.0, 70.0, 70.0];
        let fit = fit_svr(&x, &y, &SvrConfig::default()).unwrap();
        assert!(fit.model.weights[0].abs() < 1e-12);
        assert!((fit.model.intercept - 70.0).abs() < 1e-12);
        assert!(fit.objective.abs() < 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn svr_two_point_solution_beats_grid_candidates() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 1.0];
        let fit = fit_svr(&x, &y, &SvrConfig::default()).unwrap();
        let mut grid_best = f64::INFINITY;
        let mut w = 0.0;
        while w <= 1.2 {
            let mut b = -0.2;
            while b <= 0.2 {
                let cand = LinearModel::new(vec![w], b);
                let obj = svr_objective(&x, &y, &SvrConfig::default(), &cand);
                if obj < grid_best {
                    grid_best = obj;
                }
                b += 0.001;
            }
            w += 0.001;
        }
        assert!(
            fit.objective <= grid_best + 1e-9,
            "solver {} vs grid {grid_best}",
            fit.objective
        );
        // The known optimum: w = 1, b = 0, objective 0.5.
        assert!((fit.objective - 0.5).abs() < 1e-9);
    }

    #[test]
    fn svr_objective_is_self_consistent() {
        let x = vec![vec![60.0, 62.0], vec![80.0, 83.0], vec![95.0, 90.0]];
        let y = vec![61.0, 81.0, 93.0];
        let cfg = SvrConfig::default();
        let fit = fit_svr(&x, &y, &cfg).unwrap();
        let recomputed = svr_objective(&x, &y, &cfg, &fit.model);
        assert!((fit.objective - recomputed).abs() < 1e-9);
    }

    #[test]
    fn svr_single_row_hits_the_label() {
        let fit = fit_svr(&[vec![70.0, 75.0]], &[72.0], &SvrConfig::default()).unwrap();
        assert!(fit.model.weights.iter().all(|w| *w == 0.0));
        assert_eq!(fit.model.intercept, 72.0);
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn svr_respects_positive_tube() {
        // With a wide tube, residuals inside the tube are free: w = 0 and any
        // centered b is optimal, objective 0.
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 1.0];
        let cfg = SvrConfig {
            tube: 1.0,
            ..SvrConfig::default()
        };
        let fit = fit_svr(&x, &y, &cfg).unwrap();
        assert!(fit.objective.abs() < 1e-12);
        assert!(fit.model.weights[0].abs() < 1e-12);
    }

    #[test]
    fn svr_tube_shrinks_the_loss() {
        let x = vec![
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, -1.0],
            vec![4.0, 0.5],
        ];
        let y = vec![1.2, 1.9, 3.4, 3.9];
        let plain = fit_svr(&x, &y, &SvrConfig::default()).unwrap();
        let tubed = fit_svr(
            &x,
            &y,
            &SvrConfig {
                tube: 0.3,
                ..SvrConfig::default()
            },
        )
        .unwrap();
        assert!(tubed.objective <= plain.objective + 1e-12);
    }

    #[test]
    fn svr_returned_objective_is_a_local_minimum() {
        let x = vec![
            vec![62.0, 60.0, 64.0],
            vec![81.0, 85.0, 78.0],
            vec![95.0, 90.0, 99.0],
            vec![72.0, 70.0, 75.0],
        ];
        let y = vec![61.0, 82.0, 94.0, 71.0];
        let cfg = SvrConfig::default();
        let fit = fit_svr(&x, &y, &cfg).unwrap();
        let mut rng = crate::numerics::RandomSource::new(31);
        for _ in 0..1000 {
            let mut pert = fit.model.clone();
            let mut norm2 = 0.0;
            let mut dir: Vec<f64> = (0..=pert.weights.len())
                .map(|_| {
                    let v = rng.next_f64() * 2.0 - 1.0;
                    norm2 += v * v;
                    v
                })
                .collect();
            let scale = 0.1 * rng.next_f64() / norm2.sqrt().max(1e-12);
            for v in &mut dir {
                *v *= scale;
            }
            for (w, d) in pert.weights.iter_mut().zip(&dir) {
                *w += d;
            }
            pert.intercept += dir[dir.len() - 1];
            let obj = svr_objective(&x, &y, &cfg, &pert);
            assert!(fit.objective <= obj + 1e-7, "{} > {}", fit.objective, obj);
        }
    }

    #[test]
    fn svr_handles_duplicate_rows() {
        let x = vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let y = vec![1.0, 1.1, 2.0, 2.1];
        let fit = fit_svr(&x, &y, &SvrConfig::default()).unwrap();
        let recomputed = svr_objective(&x, &y, &SvrConfig::default(), &fit.model);
        assert!((fit.objective - recomputed).abs() < 1e-9);
        assert!(fit.objective.is_finite());
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(RidgeConfig { lambda: -1.0 }.validate().is_err());
        assert!(SvrConfig {
            c: 0.0,
            ..SvrConfig::default()
        }
        .validate()
        .is_err());
        assert!(SvrConfig {
            tube: -0.1,
            ..SvrConfig::default()
        }
        .validate()
        .is_err());
        assert!(SvrConfig {
            tol: 0.0,
            ..SvrConfig::default()
        }
        .validate()
        .is_err());
        assert!(SvrConfig {
            max_iter: 0,
            ..SvrConfig::default()
        }
        .validate()
        .is_err());
    }
}
