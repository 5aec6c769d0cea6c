//! Closed-form engine for d²/dx² on (0, ℓ): exact Dirichlet resolvent
//! kernel, Poisson operator, Dirichlet-to-Neumann matrices and exact
//! resolvents of extensions through the boundary correction formula
//! R_λ = R^D_λ + G_λ Π (B − Π P_λ Π)⁻¹ Π G*_λ.

use nalgebra::{DMatrix, DVector};

use crate::classifier::BoundaryProjector;
use crate::error::{Error, Result};
use crate::linalg;

/// Below this shift the λ = 0 closed forms are used; the sinh expressions
/// lose all digits as √λ → 0.
const LAMBDA_SWITCH: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct IntervalConfig {
    pub ell: f64,
    pub quad_points: usize,
}

impl IntervalConfig {
    pub fn new(ell: f64) -> Result<Self> {
        Self::with_quad(ell, 2048)
    }

    pub fn with_quad(ell: f64, quad_points: usize) -> Result<Self> {
        if !(ell > 0.0) {
            return Err(Error::domain("interval length must be positive"));
        }
        if quad_points < 16 {
            return Err(Error::domain("quadrature resolution must be at least 16"));
        }
        Ok(IntervalConfig { ell, quad_points })
    }

    fn check_point(&self, x: f64, name: &str) -> Result<()> {
        if !(0.0..=self.ell).contains(&x) {
            return Err(Error::domain(format!("{name} = {x} outside [0, {}]", self.ell)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryVector2 {
    pub xi1: f64,
    pub xi2: f64,
}

impl BoundaryVector2 {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        BoundaryVector2 { xi1, xi2 }
    }
}

/// Kernel of the Dirichlet resolvent R^D_λ.
///
/// For y ≤ x: (ℓ−x)·y/ℓ at λ = 0, and
/// sinh(√λ(ℓ−x))·sinh(√λ y)/(√λ·sinh(√λℓ)) for λ > 0; symmetric in (x, y).
pub fn rd_kernel(lambda: f64, x: f64, y: f64, cfg: &IntervalConfig) -> Result<f64> {
    cfg.check_point(x, "x")?;
    cfg.check_point(y, "y")?;
    if lambda < 0.0 {
        return Err(Error::domain("resolvent shift must be nonnegative"));
    }
    let (lo, hi) = if y <= x { (y, x) } else { (x, y) };
    if lambda < LAMBDA_SWITCH {
        Ok((cfg.ell - hi) * lo / cfg.ell)
    } else {
        let s = lambda.sqrt();
        Ok((s * (cfg.ell - hi)).sinh() * (s * lo).sinh() / (s * (s * cfg.ell).sinh()))
    }
}

/// Harmonic (λ-harmonic) extension of boundary data ξ = (ξ₁, ξ₂).
pub fn poisson_eval(lambda: f64, xi: BoundaryVector2, x: f64, cfg: &IntervalConfig) -> Result<f64> {
    cfg.check_point(x, "x")?;
    if lambda < 0.0 {
        return Err(Error::domain("resolvent shift must be nonnegative"));
    }
    if lambda < LAMBDA_SWITCH {
        Ok((x / cfg.ell) * (xi.xi2 - xi.xi1) + xi.xi1)
    } else {
        let s = lambda.sqrt();
        let denom = (s * cfg.ell).sinh();
        Ok((s * (cfg.ell - x)).sinh() / denom * xi.xi1 + (s * x).sinh() / denom * xi.xi2)
    }
}

/// Exact Dirichlet-to-Neumann matrix P_λ on the two boundary points, with
/// the inward-derivative sign convention (flux of the extension of (1,1)
/// is zero, both eigenvalues ≤ 0).
pub fn dtn_exact(lambda: f64, cfg: &IntervalConfig) -> Result<DMatrix<f64>> {
    if lambda < 0.0 {
        return Err(Error::domain("resolvent shift must be nonnegative"));
    }
    if lambda < LAMBDA_SWITCH {
        let c = 1.0 / cfg.ell;
        Ok(DMatrix::from_row_slice(2, 2, &[-c, c, c, -c]))
    } else {
        let s = lambda.sqrt();
        let denom = (s * cfg.ell).sinh();
        let diag = -s * (s * cfg.ell).cosh() / denom;
        let off = s / denom;
        Ok(DMatrix::from_row_slice(2, 2, &[diag, off, off, diag]))
    }
}

/// Composite Simpson with resolution doubling: accepted once doubling
/// changes the value by less than the tolerance.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n0: usize, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let eval = |n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    };
    let mut n = n0.max(16);
    if n % 2 == 1 {
        n += 1;
    }
    let mut prev = eval(n);
    for _ in 0..8 {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() < tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::numeric(format!(
        "quadrature did not settle below {tol:.1e} at resolution {n}"
    )))
}

/// Inner product ∫₀^ℓ f·g by the doubling quadrature.
pub fn inner_product(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, cfg: &IntervalConfig) -> Result<f64> {
    simpson(&|x| f(x) * g(x), 0.0, cfg.ell, cfg.quad_points, 1e-9)
}

/// Apply the Dirichlet resolvent to a function at one point, splitting the
/// integral at x (the kernel has a kink there).
pub fn rd_apply(lambda: f64, u: &dyn Fn(f64) -> f64, x: f64, cfg: &IntervalConfig) -> Result<f64> {
    cfg.check_point(x, "x")?;
    let ell = cfg.ell;
    let n0 = cfg.quad_points;
    if lambda < LAMBDA_SWITCH {
        let left = simpson(&|y| y * u(y), 0.0, x, n0, 1e-10)?;
        let right = simpson(&|y| (ell - y) * u(y), x, ell, n0, 1e-10)?;
        Ok(((ell - x) * left + x * right) / ell)
    } else {
        let s = lambda.sqrt();
        let denom = s * (s * ell).sinh();
        let left = simpson(&|y| (s * y).sinh() * u(y), 0.0, x, n0, 1e-10)?;
        let right = simpson(&|y| (s * (ell - y)).sinh() * u(y), x, ell, n0, 1e-10)?;
        Ok(((s * (ell - x)).sinh() * left + (s * x).sinh() * right) / denom)
    }
}

/// Adjoint of the Poisson operator applied to u: the boundary vector
/// (∫ G_λe₁·u, ∫ G_λe₂·u), which equals the flux trace of R^D_λ u.
pub fn poisson_adjoint(lambda: f64, u: &dyn Fn(f64) -> f64, cfg: &IntervalConfig) -> Result<DVector<f64>> {
    let g1 = |x: f64| poisson_eval(lambda, BoundaryVector2::new(1.0, 0.0), x, cfg).unwrap();
    let g2 = |x: f64| poisson_eval(lambda, BoundaryVector2::new(0.0, 1.0), x, cfg).unwrap();
    Ok(DVector::from_vec(vec![
        inner_product(&g1, u, cfg)?,
        inner_product(&g2, u, cfg)?,
    ]))
}

/// Uniform evaluation grid of `n` points including both endpoints.
pub fn default_grid(cfg: &IntervalConfig, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| cfg.ell * i as f64 / (n - 1) as f64).collect()
}

/// Apply the resolvent of the extension defined by `(Π, B)` to `u` at the
/// points `xs`: Dirichlet part plus the boundary correction
/// G_λ Π (B − Π P_λ Π)⁻¹ Π G*_λ u.
pub fn krein_apply_exact(
    pi: &BoundaryProjector,
    b: &DMatrix<f64>,
    lambda: f64,
    u: &dyn Fn(f64) -> f64,
    xs: &[f64],
    cfg: &IntervalConfig,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::domain("resolvent shift must be positive"));
    }
    pi.validate(2)?;
    let rd: Result<Vec<f64>> = xs.iter().map(|&x| rd_apply(lambda, u, x, cfg)).collect();
    let mut out = rd?;
    let w = DVector::from_element(2, 1.0);
    let v = pi.basis(2, &w);
    let k = v.ncols();
    if k == 0 {
        return Ok(out);
    }
    let p_lambda = dtn_exact(lambda, cfg)?;
    let t_hat = v.transpose() * (b - &p_lambda) * &v;
    let g_star = poisson_adjoint(lambda, u, cfg)?;
    let rhs = v.transpose() * &g_star;
    let lu = t_hat.clone().lu();
    let coeff = lu.solve(&rhs).ok_or(Error::SingularBoundaryBlock {
        pivot: linalg::max_abs(&t_hat),
        hint: format!("B − ΠP_λΠ is singular at shift λ = {lambda}; try a different shift"),
    })?;
    let xi = &v * coeff;
    let data = BoundaryVector2::new(xi[0], xi[1]);
    for (val, &x) in out.iter_mut().zip(xs) {
        *val += poisson_eval(lambda, data, x, cfg)?;
    }
    Ok(out)
}
