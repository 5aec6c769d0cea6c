//! Conservative finite-difference discretization of ∇·a∇ on an interval
//! and on a rectangle, in flux form: the stiffness matrix is assembled
//! face by face, so row sums vanish exactly in floating point and the
//! discrete half-Green identity is structural, not approximate.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub type Coefficient1D = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Coefficient2D = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Domain1D {
    pub ell: f64,
    pub n: usize,
    pub a: Coefficient1D,
    pub mu0: f64,
    pub mu1: f64,
}

impl Domain1D {
    pub fn uniform(ell: f64, n: usize) -> Result<Self> {
        Self::with_coefficient(ell, n, Arc::new(|_| 1.0), 1.0, 1.0)
    }

    pub fn with_coefficient(ell: f64, n: usize, a: Coefficient1D, mu0: f64, mu1: f64) -> Result<Self> {
        if !(ell > 0.0) {
            return Err(Error::domain("interval length must be positive"));
        }
        if n == 0 || n > 4096 {
            return Err(Error::domain("interior node count must be in 1..=4096"));
        }
        if !(0.0 < mu0 && mu0 <= mu1) {
            return Err(Error::domain("ellipticity bounds must satisfy 0 < mu0 <= mu1"));
        }
        Ok(Domain1D { ell, n, a, mu0, mu1 })
    }
}

#[derive(Clone)]
pub struct Domain2D {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub a: Coefficient2D,
    pub mu0: f64,
    pub mu1: f64,
}

impl Domain2D {
    pub fn uniform(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::with_coefficient(lx, ly, nx, ny, Arc::new(|_, _| 1.0), 1.0, 1.0)
    }

    pub fn with_coefficient(
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
        a: Coefficient2D,
        mu0: f64,
        mu1: f64,
    ) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::domain("rectangle side lengths must be positive"));
        }
        if nx < 3 || ny < 3 || nx > 64 || ny > 64 {
            return Err(Error::domain("interior grid counts must be in 3..=64"));
        }
        if !(0.0 < mu0 && mu0 <= mu1) {
            return Err(Error::domain("ellipticity bounds must satisfy 0 < mu0 <= mu1"));
        }
        Ok(Domain2D { lx, ly, nx, ny, a, mu0, mu1 })
    }
}

/// Assembled block form of the stiffness of F_N(u, v) = ⟨∇u, a∇v⟩ over
/// all nodes, partitioned into interior (I) and boundary (Γ) blocks, with
/// the interior lumped mass and boundary arc-length weights.
#[derive(Clone)]
pub struct DiscreteElliptic {
    pub q_ii: DMatrix<f64>,
    pub q_ib: DMatrix<f64>,
    pub q_bb: DMatrix<f64>,
    /// Interior lumped mass (cell volumes).
    pub mass: DVector<f64>,
    /// Boundary weights (endpoint weight 1 in 1D, arc length on the loop).
    pub w: DVector<f64>,
    pub interior_positions: Vec<[f64; 2]>,
    /// Boundary node positions in loop order (1D: the two endpoints).
    pub boundary_positions: Vec<[f64; 2]>,
    /// Chord length between consecutive loop nodes; empty in 1D.
    pub boundary_spacings: Vec<f64>,
    pub dim: usize,
    /// Characteristic length: ℓ in 1D, perimeter / 4 is not meaningful so
    /// 2D stores Lx (only the 1D classifier consumes this).
    pub ell: f64,
    pub mu1: f64,
}

fn partition(
    q: &DMatrix<f64>,
    interior: &[usize],
    boundary: &[usize],
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let ni = interior.len();
    let nb = boundary.len();
    let q_ii = DMatrix::from_fn(ni, ni, |r, c| q[(interior[r], interior[c])]);
    let q_ib = DMatrix::from_fn(ni, nb, |r, c| q[(interior[r], boundary[c])]);
    let q_bb = DMatrix::from_fn(nb, nb, |r, c| q[(boundary[r], boundary[c])]);
    (q_ii, q_ib, q_bb)
}

pub fn assemble_1d(domain: &Domain1D) -> Result<DiscreteElliptic> {
    let n = domain.n;
    let h = domain.ell / (n + 1) as f64;
    let nt = n + 2;
    let mut q = DMatrix::zeros(nt, nt);
    for i in 0..=n {
        let xm = (i as f64 + 0.5) * h;
        let af = (domain.a)(xm);
        if !(af >= domain.mu0 - 1e-12 && af <= domain.mu1 + 1e-12) {
            return Err(Error::domain(format!(
                "coefficient a({xm}) = {af} violates ellipticity bounds [{}, {}]",
                domain.mu0, domain.mu1
            )));
        }
        let tau = af / h;
        q[(i, i)] += tau;
        q[(i + 1, i + 1)] += tau;
        q[(i, i + 1)] -= tau;
        q[(i + 1, i)] -= tau;
    }
    let interior: Vec<usize> = (1..=n).collect();
    let boundary = vec![0, nt - 1];
    let (q_ii, q_ib, q_bb) = partition(&q, &interior, &boundary);
    // Cell volumes; the half-cells at the endpoints (the boundary carries
    // no L² mass) are folded into the adjacent interior cells, which keeps
    // total mass exact and the boundary response second-order accurate.
    let mut mass = DVector::from_element(n, h);
    mass[0] += h / 2.0;
    mass[n - 1] += h / 2.0;
    Ok(DiscreteElliptic {
        q_ii,
        q_ib,
        q_bb,
        mass,
        w: DVector::from_element(2, 1.0),
        interior_positions: (1..=n).map(|i| [i as f64 * h, 0.0]).collect(),
        boundary_positions: vec![[0.0, 0.0], [domain.ell, 0.0]],
        boundary_spacings: Vec::new(),
        dim: 1,
        ell: domain.ell,
        mu1: domain.mu1,
    })
}

pub fn assemble_2d(domain: &Domain2D) -> Result<DiscreteElliptic> {
    let (nx, ny) = (domain.nx, domain.ny);
    let hx = domain.lx / (nx + 1) as f64;
    let hy = domain.ly / (ny + 1) as f64;
    let cols = nx + 2;
    let rows = ny + 2;
    let nt = cols * rows;
    let id = |i: usize, j: usize| j * cols + i;
    let mut q = DMatrix::zeros(nt, nt);
    let check = |af: f64, x: f64, y: f64| -> Result<f64> {
        if !(af >= domain.mu0 - 1e-12 && af <= domain.mu1 + 1e-12) {
            return Err(Error::domain(format!(
                "coefficient a({x},{y}) = {af} violates ellipticity bounds"
            )));
        }
        Ok(af)
    };
    // Horizontal faces; boundary rows carry half dual width.
    for j in 0..rows {
        let dual = if j == 0 || j == rows - 1 { hy / 2.0 } else { hy };
        for i in 0..=nx {
            let (xm, ym) = ((i as f64 + 0.5) * hx, j as f64 * hy);
            let tau = check((domain.a)(xm, ym), xm, ym)? * dual / hx;
            let (p, r) = (id(i, j), id(i + 1, j));
            q[(p, p)] += tau;
            q[(r, r)] += tau;
            q[(p, r)] -= tau;
            q[(r, p)] -= tau;
        }
    }
    // Vertical faces; boundary columns carry half dual width.
    for i in 0..cols {
        let dual = if i == 0 || i == cols - 1 { hx / 2.0 } else { hx };
        for j in 0..=ny {
            let (xm, ym) = (i as f64 * hx, (j as f64 + 0.5) * hy);
            let tau = check((domain.a)(xm, ym), xm, ym)? * dual / hy;
            let (p, r) = (id(i, j), id(i, j + 1));
            q[(p, p)] += tau;
            q[(r, r)] += tau;
            q[(p, r)] -= tau;
            q[(r, p)] -= tau;
        }
    }
    // Interior nodes row-major; boundary nodes in loop order.
    let mut interior = Vec::with_capacity(nx * ny);
    let mut interior_positions = Vec::with_capacity(nx * ny);
    for j in 1..=ny {
        for i in 1..=nx {
            interior.push(id(i, j));
            interior_positions.push([i as f64 * hx, j as f64 * hy]);
        }
    }
    let mut boundary = Vec::new();
    let mut boundary_positions = Vec::new();
    let push = |i: usize, j: usize, boundary: &mut Vec<usize>, pos: &mut Vec<[f64; 2]>| {
        boundary.push(id(i, j));
        pos.push([i as f64 * hx, j as f64 * hy]);
    };
    for i in 0..cols {
        push(i, 0, &mut boundary, &mut boundary_positions);
    }
    for j in 1..rows {
        push(cols - 1, j, &mut boundary, &mut boundary_positions);
    }
    for i in (0..cols - 1).rev() {
        push(i, rows - 1, &mut boundary, &mut boundary_positions);
    }
    for j in (1..rows - 1).rev() {
        push(0, j, &mut boundary, &mut boundary_positions);
    }
    let nb = boundary.len();
    let boundary_spacings: Vec<f64> = (0..nb)
        .map(|k| {
            let a = boundary_positions[k];
            let b = boundary_positions[(k + 1) % nb];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .collect();
    // Node weight: average of the two adjacent chord lengths (corners get
    // (hx + hy)/2, edge nodes their tangential spacing).
    let w = DVector::from_fn(nb, |k, _| {
        let prev = boundary_spacings[(k + nb - 1) % nb];
        0.5 * (prev + boundary_spacings[k])
    });
    let (q_ii, q_ib, q_bb) = partition(&q, &interior, &boundary);
    // Tensor-product cell volumes with the boundary half-strips folded
    // into the first and last interior rows/columns; total mass Lx·Ly.
    let ext = |idx: usize, count: usize, h: f64| if idx == 1 || idx == count { 1.5 * h } else { h };
    let mut mass = DVector::zeros(nx * ny);
    for j in 1..=ny {
        for i in 1..=nx {
            mass[(j - 1) * nx + (i - 1)] = ext(i, nx, hx) * ext(j, ny, hy);
        }
    }
    Ok(DiscreteElliptic {
        q_ii,
        q_ib,
        q_bb,
        mass,
        w,
        interior_positions,
        boundary_positions,
        boundary_spacings,
        dim: 2,
        ell: domain.lx,
        mu1: domain.mu1,
    })
}

impl DiscreteElliptic {
    pub fn ni(&self) -> usize {
        self.q_ii.nrows()
    }

    pub fn nb(&self) -> usize {
        self.q_bb.nrows()
    }

    /// Full stiffness over interior-then-boundary ordering.
    pub fn stiffness_full(&self) -> DMatrix<f64> {
        let (ni, nb) = (self.ni(), self.nb());
        let mut q = DMatrix::zeros(ni + nb, ni + nb);
        q.view_mut((0, 0), (ni, ni)).copy_from(&self.q_ii);
        q.view_mut((0, ni), (ni, nb)).copy_from(&self.q_ib);
        q.view_mut((ni, 0), (nb, ni)).copy_from(&self.q_ib.transpose());
        q.view_mut((ni, ni), (nb, nb)).copy_from(&self.q_bb);
        q
    }

    fn shifted_interior(&self, lambda: f64) -> DMatrix<f64> {
        let mut s = self.q_ii.clone();
        for i in 0..self.ni() {
            s[(i, i)] += lambda * self.mass[i];
        }
        s
    }

    /// R^D_λ = (Q_ii/M + λ)⁻¹ in the mass-weighted sense.
    pub fn dirichlet_resolvent(&self, lambda: f64) -> Result<DMatrix<f64>> {
        if lambda < 0.0 {
            return Err(Error::domain("resolvent shift must be nonnegative"));
        }
        let rhs = DMatrix::from_diagonal(&self.mass);
        linalg::solve_refined(&self.shifted_interior(lambda), &rhs)
    }

    /// The Dirichlet generator A_D = −M⁻¹Q_ii.
    pub fn dirichlet_generator(&self) -> DMatrix<f64> {
        let ni = self.ni();
        DMatrix::from_fn(ni, ni, |i, j| -self.q_ii[(i, j)] / self.mass[i])
    }

    /// Poisson operator: boundary data to the λ-harmonic interior values.
    pub fn poisson_discrete(&self, lambda: f64) -> Result<DMatrix<f64>> {
        if lambda < 0.0 {
            return Err(Error::domain("resolvent shift must be nonnegative"));
        }
        linalg::solve_refined(&self.shifted_interior(lambda), &(-&self.q_ib))
    }

    /// Flux trace γ̂₁u = −W⁻¹(Qu)|_Γ of a full-grid vector
    /// (interior-then-boundary ordering), inward-derivative convention.
    pub fn flux_trace(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (ni, nb) = (self.ni(), self.nb());
        if u.len() != ni + nb {
            return Err(Error::domain("flux_trace expects a full-grid vector"));
        }
        let ui = u.rows(0, ni).into_owned();
        let ub = u.rows(ni, nb).into_owned();
        let qu = self.q_ib.transpose() * ui + &self.q_bb * ub;
        Ok(DVector::from_fn(nb, |i, _| -qu[i] / self.w[i]))
    }

    /// Flux trace of interior operators: maps an interior matrix column
    /// space through γ̂₁ with zero boundary values.
    pub fn flux_trace_interior(&self, cols: &DMatrix<f64>) -> DMatrix<f64> {
        let nb = self.nb();
        let qu = self.q_ib.transpose() * cols;
        DMatrix::from_fn(nb, cols.ncols(), |i, j| -qu[(i, j)] / self.w[i])
    }

    /// Schur-complement response map P_λ = γ̂₁K_λ; symmetric w.r.t. W and
    /// negative semidefinite, with P_0·1 = 0.
    pub fn dtn_discrete(&self, lambda: f64) -> Result<DMatrix<f64>> {
        let k = self.poisson_discrete(lambda)?;
        let nb = self.nb();
        let qk = self.q_ib.transpose() * k + &self.q_bb;
        Ok(DMatrix::from_fn(nb, nb, |i, j| -qk[(i, j)] / self.w[i]))
    }

    /// Adjoint of the Poisson operator, K_λ^⋆ = W⁻¹K_λᵀM, which equals
    /// the flux trace of the Dirichlet resolvent.
    pub fn poisson_adjoint(&self, lambda: f64) -> Result<DMatrix<f64>> {
        let k = self.poisson_discrete(lambda)?;
        let (ni, nb) = (self.ni(), self.nb());
        Ok(DMatrix::from_fn(nb, ni, |i, j| k[(j, i)] * self.mass[j] / self.w[i]))
    }

    /// The α-sequence whose limit recovers the zero-shift boundary
    /// response quadratic form: α(⟨K₀h, K_αh⟩_M − ⟨1, K_α(h²)⟩_M).
    pub fn plim_sequence(&self, h: &DVector<f64>, alphas: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.nb() {
            return Err(Error::domain("plim_sequence expects boundary data"));
        }
        let k0h = self.poisson_discrete(0.0)? * h;
        let h2 = h.component_mul(h);
        let mut out = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let ka = self.poisson_discrete(alpha)?;
            let kah = &ka * h;
            let kah2 = &ka * &h2;
            let mut acc = 0.0;
            for i in 0..self.ni() {
                acc += self.mass[i] * (k0h[i] * kah[i] - kah2[i]);
            }
            out.push(alpha * acc);
        }
        Ok(out)
    }

    /// Residual of the half-Green identity
    /// ⟨−Lu, v⟩_M − F(u,v) − ⟨γ̂₁u, γ₀v⟩_W (zero by construction).
    pub fn half_green_residual(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let (ni, nb) = (self.ni(), self.nb());
        if u.len() != ni + nb || v.len() != ni + nb {
            return Err(Error::domain("half_green_residual expects full-grid vectors"));
        }
        let q = self.stiffness_full();
        let qu = &q * u;
        let lhs: f64 = (0..ni).map(|i| qu[i] * v[i]).sum();
        let form = (u.transpose() * &q * v)[(0, 0)];
        let gamma1 = self.flux_trace(u)?;
        let pairing: f64 = (0..nb).map(|i| self.w[i] * gamma1[i] * v[ni + i]).sum();
        Ok((lhs - form - pairing).abs())
    }
}
