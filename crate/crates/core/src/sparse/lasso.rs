use crate::error::{param, Result};
use crate::sparse::projection::GaussianProjection;

/// `min_x (1/(2m))‖target − Sx‖² + λ‖x‖₁`.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    pub projection: &'a GaussianProjection,
    pub target: &'a [f64],
    pub lambda: f64,
    /// Stop once the optimality residual is at most this.
    pub tolerance: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Sup-norm distance of the gradient from `−λ·∂‖x‖₁`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LassoProblem<'_> {
    fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(param(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.tolerance > 0.0) {
            return Err(param("tolerance must be positive"));
        }
        if self.target.len() != self.projection.rows() {
            return Err(param(format!(
                "target has length {}, projection has {} rows",
                self.target.len(),
                self.projection.rows()
            )));
        }
        Ok(())
    }

    fn residual_vec(&self, sx: &[f64]) -> Vec<f64> {
        sx.iter().zip(self.target).map(|(a, b)| a - b).collect()
    }

    fn value(&self, x: &[f64], r: &[f64]) -> f64 {
        let m = self.projection.rows() as f64;
        r.iter().map(|v| v * v).sum::<f64>() / (2.0 * m) + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `(1/m)·Sᵀ·r`.
    fn gradient(&self, r: &[f64]) -> Result<Vec<f64>> {
        let m = self.projection.rows() as f64;
        Ok(self.projection.apply_t(r)?.into_iter().map(|v| v / m).collect())
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual_vec(&self.projection.apply(x)?);
        Ok(self.value(x, &r))
    }

    /// `max_j` of `|g_j + λ·sign(x_j)|` on the support and `(|g_j| − λ)₊` off it.
    pub fn optimality_residual(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual_vec(&self.projection.apply(x)?);
        Ok(kkt(&self.gradient(&r)?, x, self.lambda))
    }
}

fn kkt(g: &[f64], x: &[f64], lambda: f64) -> f64 {
    g.iter()
        .zip(x)
        .map(|(&gj, &xj)| {
            if xj != 0.0 {
                (gj + lambda * xj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Accelerated proximal gradient (FISTA) with step `m/σ_max²`, restarting
/// the momentum whenever the objective would increase, so the accepted
/// objective values never go up.
pub fn lasso_solve(problem: &LassoProblem<'_>) -> Result<LassoSolution> {
    problem.check()?;
    let s = problem.projection;
    let d = s.cols();
    let m = s.rows() as f64;
    let sigma = s.sigma_max();
    let step = m / (sigma * sigma);
    let shrink = step * problem.lambda;

    let mut x = vec![0.0; d];
    let mut r = problem.residual_vec(&vec![0.0; s.rows()]);
    let mut f = problem.value(&x, &r);
    let mut g = problem.gradient(&r)?;
    let mut residual = kkt(&g, &x, problem.lambda);

    // Momentum point y and its residual S·y − target.
    let mut y = x.clone();
    let mut ry = r.clone();
    let mut gy = g.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;

    while residual > problem.tolerance && iterations < problem.max_iters {
        iterations += 1;
        let mut x_new: Vec<f64> = y
            .iter()
            .zip(&gy)
            .map(|(yi, gi)| soft_threshold(yi - step * gi, shrink))
            .collect();
        let mut r_new = problem.residual_vec(&s.apply(&x_new)?);
        let mut f_new = problem.value(&x_new, &r_new);
        if f_new > f {
            // Restart: plain proximal step from x, which cannot increase f.
            t = 1.0;
            x_new = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| soft_threshold(xi - step * gi, shrink))
                .collect();
            r_new = problem.residual_vec(&s.apply(&x_new)?);
            f_new = problem.value(&x_new, &r_new);
            if f_new > f {
                // Only reachable through rounding; keep the current iterate.
                x_new.clone_from(&x);
                r_new.clone_from(&r);
                f_new = f;
            }
        }
        let t_new = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_new;
        for i in 0..d {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        for i in 0..ry.len() {
            ry[i] = r_new[i] + beta * (r_new[i] - r[i]);
        }
        x = x_new;
        r = r_new;
        f = f_new;
        t = t_new;
        g = problem.gradient(&r)?;
        residual = kkt(&g, &x, problem.lambda);
        gy = if beta == 0.0 { g.clone() } else { problem.gradient(&ry)? };
    }
    Ok(LassoSolution {
        objective: f,
        converged: residual <= problem.tolerance,
        x,
        residual,
        iterations,
    })
}
