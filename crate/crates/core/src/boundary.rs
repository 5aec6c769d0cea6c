//! Constructors for boundary operators on the trace space: discrete
//! boundary Laplacians on loops, their fractional powers, Wentzell
//! families, circulant convolution generators, and jump/killing forms.

use nalgebra::{DMatrix, DVector};

use crate::classifier::BoundaryForm;
use crate::elliptic::DiscreteElliptic;
use crate::error::{Error, Result};
use crate::linalg;

/// Intrinsic geometry of the boundary node set.
#[derive(Debug, Clone)]
pub enum BoundaryGeometry {
    /// Two endpoints of an interval: no intrinsic connectivity.
    TwoPoint { weights: DVector<f64> },
    /// Closed polygonal loop; `spacings[i]` is the chord from node i to
    /// node i+1 (cyclic) and `weights` the arc-length node weights.
    Loop { spacings: DVector<f64>, weights: DVector<f64> },
}

impl BoundaryGeometry {
    pub fn uniform_loop(nb: usize, h: f64) -> Result<Self> {
        if nb < 3 || !(h > 0.0) {
            return Err(Error::domain("uniform loop needs nb >= 3 and h > 0"));
        }
        Ok(BoundaryGeometry::Loop {
            spacings: DVector::from_element(nb, h),
            weights: DVector::from_element(nb, h),
        })
    }

    pub fn weights(&self) -> &DVector<f64> {
        match self {
            BoundaryGeometry::TwoPoint { weights } => weights,
            BoundaryGeometry::Loop { weights, .. } => weights,
        }
    }

    pub fn nb(&self) -> usize {
        self.weights().len()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundaryGeometry::TwoPoint { weights } => {
                if weights.len() != 2 || weights.iter().any(|&w| !(w > 0.0)) {
                    return Err(Error::domain("two-point geometry needs two positive weights"));
                }
            }
            BoundaryGeometry::Loop { spacings, weights } => {
                if weights.len() < 3 || spacings.len() != weights.len() {
                    return Err(Error::domain("loop geometry needs >= 3 nodes and matching spacings"));
                }
                if spacings.iter().chain(weights.iter()).any(|&x| !(x > 0.0)) {
                    return Err(Error::domain("loop spacings and weights must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Geometry read off an assembled grid: interval ends in 1D, the
/// rectangle boundary loop in 2D.
pub fn geometry_of(disc: &DiscreteElliptic) -> BoundaryGeometry {
    if disc.dim == 1 {
        BoundaryGeometry::TwoPoint { weights: disc.w.clone() }
    } else {
        BoundaryGeometry::Loop { spacings: DVector::from_vec(disc.boundary_spacings.clone()), weights: disc.w.clone() }
    }
}

/// Discrete negative boundary Laplacian.
pub struct BoundaryLaplacian {
    /// Operator matrix (weighted-symmetric, PSD, row sums zero).
    pub matrix: DMatrix<f64>,
    /// Set for two-point geometries, which carry no intrinsic operator.
    pub degenerate: bool,
}

/// Second-difference operator along the loop with arc-length weights;
/// for a two-point boundary the operator is zero and flagged degenerate.
pub fn boundary_laplacian(geom: &BoundaryGeometry) -> Result<BoundaryLaplacian> {
    geom.validate()?;
    match geom {
        BoundaryGeometry::TwoPoint { .. } => {
            Ok(BoundaryLaplacian { matrix: DMatrix::zeros(2, 2), degenerate: true })
        }
        BoundaryGeometry::Loop { spacings, weights } => {
            let nb = weights.len();
            // Weighted form: Σ (h_i − h_{i+1})² / spacing_i; the operator
            // is W⁻¹ times the form matrix.
            let mut form = DMatrix::<f64>::zeros(nb, nb);
            for i in 0..nb {
                let j = (i + 1) % nb;
                let c = 1.0 / spacings[i];
                form[(i, i)] += c;
                form[(j, j)] += c;
                form[(i, j)] -= c;
                form[(j, i)] -= c;
            }
            let matrix = DMatrix::from_fn(nb, nb, |i, j| form[(i, j)] / weights[i]);
            Ok(BoundaryLaplacian { matrix, degenerate: false })
        }
    }
}

/// Spectral power of a weighted-symmetric PSD matrix, s ∈ (0, 1].
pub fn fractional_power(
    mtx: &DMatrix<f64>,
    weights: &DVector<f64>,
    s: f64,
) -> Result<DMatrix<f64>> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain("fractional exponent must lie in (0, 1]"));
    }
    if s == 1.0 {
        return Ok(mtx.clone());
    }
    let (vals, vecs) = linalg::weighted_sym_eigen(mtx, weights)?;
    let scale = vals.iter().cloned().fold(0.0_f64, |a, b| a.max(b.abs())).max(1.0);
    if vals.iter().any(|&x| x < -1e-10 * scale) {
        return Err(Error::contract("fractional_power requires a PSD matrix"));
    }
    // x^s has unbounded slope at 0, so eigenvalue round-off near the
    // kernel would smear into O(eps^s) entries; snap it to zero first.
    Ok(linalg::weighted_matrix_function(&vals, &vecs, weights, |x| {
        if x <= 1e-12 * scale {
            0.0
        } else {
            x.powf(s)
        }
    }))
}

/// Wentzell family B = b1·(−Δ) + bs·(−Δ)^s + b0·1 on a boundary loop.
pub fn wentzell_b(geom: &BoundaryGeometry, b1: f64, bs: f64, b0: f64, s: f64) -> Result<BoundaryForm> {
    if b1 < 0.0 || bs < 0.0 || b0 < 0.0 {
        return Err(Error::domain("Wentzell coefficients must be nonnegative"));
    }
    let lap = boundary_laplacian(geom)?;
    if lap.degenerate && (b1 > 0.0 || bs > 0.0) {
        return Err(Error::domain(
            "two-point boundaries have no intrinsic Laplacian; only the killing term b0 applies",
        ));
    }
    let w = geom.weights().clone();
    let nb = w.len();
    let mut b = DMatrix::zeros(nb, nb);
    if b1 > 0.0 {
        b += &lap.matrix * b1;
    }
    if bs > 0.0 {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain("fractional exponent must lie in (0, 1)"));
        }
        b += fractional_power(&lap.matrix, &w, s)? * bs;
    }
    for i in 0..nb {
        b[(i, i)] += b0;
    }
    BoundaryForm::full(b, w)
}

/// Circulant convolution generator on a uniform loop: local part
/// c·(−Δ) plus the jump sum ½Σ_y ν(y)(h(x+y) − 2h(x) + h(x−y)).
pub fn levy_circulant_b(geom: &BoundaryGeometry, c: f64, nu: &[f64]) -> Result<BoundaryForm> {
    let BoundaryGeometry::Loop { spacings, weights } = geom else {
        return Err(Error::domain("convolution generators need a loop boundary"));
    };
    let nb = weights.len();
    if c < 0.0 || nu.iter().any(|&x| x < 0.0) {
        return Err(Error::domain("convolution weights must be nonnegative"));
    }
    if nu.len() != nb {
        return Err(Error::domain("need one jump weight per loop offset"));
    }
    if nu[0] != 0.0 {
        return Err(Error::domain("the zero offset carries no jump mass"));
    }
    for k in 1..nb {
        if (nu[k] - nu[nb - k]).abs() > 1e-14 * nu[k].abs().max(1.0) {
            return Err(Error::domain("jump weights must be symmetric under y -> -y"));
        }
    }
    let uniform = spacings.iter().all(|&x| (x - spacings[0]).abs() < 1e-14 * spacings[0]);
    if !uniform {
        return Err(Error::domain("the convolution construction assumes a uniform loop"));
    }
    let mut b = if c > 0.0 {
        boundary_laplacian(geom)?.matrix * c
    } else {
        DMatrix::zeros(nb, nb)
    };
    for (k, &nk) in nu.iter().enumerate().skip(1) {
        if nk == 0.0 {
            continue;
        }
        for i in 0..nb {
            b[(i, i)] += nk;
            b[(i, (i + k) % nb)] -= 0.5 * nk;
            b[(i, (i + nb - k) % nb)] -= 0.5 * nk;
        }
    }
    BoundaryForm::full(b, weights.clone())
}

/// Rank-one mean-value coupling: b·γ₀u = mean flux, admissible traces
/// are the constants.
pub fn mean_value_projector(geom: &BoundaryGeometry, b: f64) -> Result<BoundaryForm> {
    geom.validate()?;
    BoundaryForm::mean_value(b, geom.weights().clone())
}

/// Mixed conditions: Dirichlet off the mask, zero flux on it.
pub fn mixed_dn_projector(geom: &BoundaryGeometry, mask: &[usize]) -> Result<BoundaryForm> {
    geom.validate()?;
    let nb = geom.nb();
    if mask.is_empty() {
        return Err(Error::domain("empty mask is plain Dirichlet; use the Zero projector"));
    }
    if mask.len() >= nb {
        return Err(Error::domain("full mask is plain Neumann; use the Full projector"));
    }
    BoundaryForm::mask(mask.to_vec(), geom.weights().clone())
}

/// Assemble B from explicit jump weights and killing rates so that the
/// boundary form is Σ_{i<j} J_ij (h_i−h_j)² + Σ κ_i h_i².
pub fn jump_killing_b(geom: &BoundaryGeometry, jump: &DMatrix<f64>, kappa: &DVector<f64>) -> Result<BoundaryForm> {
    geom.validate()?;
    let nb = geom.nb();
    if jump.nrows() != nb || jump.ncols() != nb || kappa.len() != nb {
        return Err(Error::domain("jump/killing dimensions must match the boundary"));
    }
    for i in 0..nb {
        if jump[(i, i)] != 0.0 {
            return Err(Error::domain("jump weights have zero diagonal"));
        }
        if kappa[i] < 0.0 {
            return Err(Error::domain("killing rates must be nonnegative"));
        }
        for j in 0..nb {
            if jump[(i, j)] < 0.0 {
                return Err(Error::domain("jump weights must be nonnegative"));
            }
            if (jump[(i, j)] - jump[(j, i)]).abs() > 1e-14 * jump[(i, j)].abs().max(1.0) {
                return Err(Error::domain("jump weights must be symmetric"));
            }
        }
    }
    let w = geom.weights();
    // Weighted form matrix WB: off-diagonal −J, diagonal row sum + κ.
    let mut wb = DMatrix::<f64>::zeros(nb, nb);
    for i in 0..nb {
        let mut row = kappa[i];
        for j in 0..nb {
            if i != j {
                wb[(i, j)] = -jump[(i, j)];
                row += jump[(i, j)];
            }
        }
        wb[(i, i)] = row;
    }
    let b = DMatrix::from_fn(nb, nb, |i, j| wb[(i, j)] / w[i]);
    BoundaryForm::full(b, w.clone())
}
