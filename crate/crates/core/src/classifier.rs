//! Decision procedures for boundary data `(Π, B)`.
//!
//! A boundary condition is a projector Π on the discrete trace space
//! together with a symmetric operator B on its range. The closed-form
//! two-point classification, the M-matrix test for Markov generators, the
//! brute-force semigroup oracle, and the jump/killing splitting all live
//! here; the heavier machinery (building the actual extension generator)
//! is in [`crate::krein`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Projector Π selecting admissible boundary traces.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryProjector {
    /// Π = 0: only zero traces (Dirichlet).
    Zero,
    /// Π = 1: all traces admissible.
    Full,
    /// Π = v ⊗ v for a unit vector v.
    RankOne(DVector<f64>),
    /// Traces supported on a subset of boundary nodes, zero elsewhere.
    Mask(Vec<usize>),
    /// Constant traces, projector onto span{1} weighted by arc length.
    MeanValue(DVector<f64>),
}

impl BoundaryProjector {
    pub fn validate(&self, nb: usize) -> Result<()> {
        match self {
            BoundaryProjector::Zero | BoundaryProjector::Full => Ok(()),
            BoundaryProjector::RankOne(v) => {
                if v.len() != nb {
                    return Err(Error::domain("rank-one vector length mismatch"));
                }
                if (v.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::domain("rank-one vector must have unit norm"));
                }
                Ok(())
            }
            BoundaryProjector::Mask(idx) => {
                if idx.is_empty() {
                    return Err(Error::domain("mask subset must be nonempty"));
                }
                if idx.iter().any(|&i| i >= nb) {
                    return Err(Error::domain("mask index out of range"));
                }
                let mut sorted = idx.clone();
                sorted.dedup();
                if sorted.len() != idx.len() {
                    return Err(Error::domain("mask indices must be distinct"));
                }
                Ok(())
            }
            BoundaryProjector::MeanValue(w) => {
                if w.len() != nb {
                    return Err(Error::domain("mean-value weight length mismatch"));
                }
                if w.iter().any(|&x| x <= 0.0) {
                    return Err(Error::domain("mean-value weights must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Rank of the projector on an `nb`-point boundary.
    pub fn rank(&self, nb: usize) -> usize {
        match self {
            BoundaryProjector::Zero => 0,
            BoundaryProjector::Full => nb,
            BoundaryProjector::RankOne(_) | BoundaryProjector::MeanValue(_) => 1,
            BoundaryProjector::Mask(idx) => idx.len(),
        }
    }

    /// `nb × k` basis of range(Π), orthonormal in the weighted inner
    /// product: `Vᵀ diag(w) V = I`.
    pub fn basis(&self, nb: usize, w: &DVector<f64>) -> DMatrix<f64> {
        match self {
            BoundaryProjector::Zero => DMatrix::zeros(nb, 0),
            BoundaryProjector::Full => {
                let mut v = DMatrix::zeros(nb, nb);
                for i in 0..nb {
                    v[(i, i)] = 1.0 / w[i].sqrt();
                }
                v
            }
            BoundaryProjector::RankOne(vec) => {
                let wnorm: f64 = (0..nb).map(|i| w[i] * vec[i] * vec[i]).sum::<f64>().sqrt();
                DMatrix::from_fn(nb, 1, |i, _| vec[i] / wnorm)
            }
            BoundaryProjector::Mask(idx) => {
                let mut v = DMatrix::zeros(nb, idx.len());
                for (j, &i) in idx.iter().enumerate() {
                    v[(i, j)] = 1.0 / w[i].sqrt();
                }
                v
            }
            BoundaryProjector::MeanValue(_) => {
                let total: f64 = w.iter().sum();
                DMatrix::from_element(nb, 1, 1.0 / total.sqrt())
            }
        }
    }

    /// The projection matrix Π = V Vᵀ diag(w), orthogonal in the weighted
    /// inner product.
    pub fn matrix(&self, nb: usize, w: &DVector<f64>) -> DMatrix<f64> {
        let v = self.basis(nb, w);
        let mut vt_w = v.transpose();
        for j in 0..nb {
            for i in 0..vt_w.nrows() {
                vt_w[(i, j)] *= w[j];
            }
        }
        &v * vt_w
    }
}

/// The pair `(Π, B)`: a symmetric boundary operator on range(Π) together
/// with the boundary quadrature weights. `B` is stored as a full `nb × nb`
/// matrix satisfying `ΠBΠ = B`.
#[derive(Debug, Clone)]
pub struct BoundaryForm {
    pub projector: BoundaryProjector,
    pub b: DMatrix<f64>,
    pub weights: DVector<f64>,
}

impl BoundaryForm {
    pub fn new(projector: BoundaryProjector, b: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        let nb = weights.len();
        if b.nrows() != nb || b.ncols() != nb {
            return Err(Error::domain("boundary operator dimension mismatch"));
        }
        if weights.iter().any(|&x| x <= 0.0) {
            return Err(Error::domain("boundary weights must be positive"));
        }
        projector.validate(nb)?;
        if linalg::weighted_asymmetry(&b, &weights) > 1e-11 {
            return Err(Error::contract("boundary operator not symmetric in the weighted inner product"));
        }
        let p = projector.matrix(nb, &weights);
        let pbp = &p * &b * &p;
        let scale = linalg::max_abs(&b).max(1.0);
        if linalg::max_abs(&(&pbp - &b)) > 1e-10 * scale {
            return Err(Error::contract("boundary operator must satisfy ΠBΠ = B"));
        }
        Ok(BoundaryForm { projector, b, weights })
    }

    pub fn nb(&self) -> usize {
        self.weights.len()
    }

    pub fn dirichlet(weights: DVector<f64>) -> Self {
        let nb = weights.len();
        BoundaryForm { projector: BoundaryProjector::Zero, b: DMatrix::zeros(nb, nb), weights }
    }

    pub fn neumann(weights: DVector<f64>) -> Self {
        let nb = weights.len();
        BoundaryForm { projector: BoundaryProjector::Full, b: DMatrix::zeros(nb, nb), weights }
    }

    pub fn robin(beta: f64, weights: DVector<f64>) -> Result<Self> {
        if beta < 0.0 {
            return Err(Error::domain("robin coefficient must be nonnegative"));
        }
        let nb = weights.len();
        BoundaryForm::new(BoundaryProjector::Full, DMatrix::from_diagonal(&DVector::from_element(nb, beta)), weights)
    }

    pub fn full(b: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        BoundaryForm::new(BoundaryProjector::Full, b, weights)
    }

    /// Rank-one constraint with a scalar coefficient: B = b · v vᵀ diag(w)
    /// where v is normalised to unit weighted norm.
    pub fn rank_one(v: DVector<f64>, b: f64, weights: DVector<f64>) -> Result<Self> {
        let nb = weights.len();
        if v.len() != nb {
            return Err(Error::domain("rank-one vector length mismatch"));
        }
        let unit = &v / v.norm();
        let proj = BoundaryProjector::RankOne(unit);
        let basis = proj.basis(nb, &weights);
        let mut bm = DMatrix::zeros(nb, nb);
        for i in 0..nb {
            for j in 0..nb {
                bm[(i, j)] = b * basis[(i, 0)] * basis[(j, 0)] * weights[j];
            }
        }
        BoundaryForm::new(proj, bm, weights)
    }

    /// Constant-trace constraint with mean flux response b.
    pub fn mean_value(b: f64, weights: DVector<f64>) -> Result<Self> {
        let proj = BoundaryProjector::MeanValue(weights.clone());
        let nb = weights.len();
        let basis = proj.basis(nb, &weights);
        let mut bm = DMatrix::zeros(nb, nb);
        for i in 0..nb {
            for j in 0..nb {
                bm[(i, j)] = b * basis[(i, 0)] * basis[(j, 0)] * weights[j];
            }
        }
        BoundaryForm::new(proj, bm, weights)
    }

    /// Mixed condition: zero trace off `indices`, zero flux on them.
    pub fn mask(indices: Vec<usize>, weights: DVector<f64>) -> Result<Self> {
        let nb = weights.len();
        BoundaryForm::new(BoundaryProjector::Mask(indices), DMatrix::zeros(nb, nb), weights)
    }

    /// Scalar coefficient of a rank-one form: `v̂ᵀ W B v̂` on the
    /// normalised range vector. Zero for higher-rank projectors' ranges.
    pub fn rank_one_coefficient(&self) -> Option<f64> {
        let nb = self.nb();
        if self.projector.rank(nb) != 1 {
            return None;
        }
        let v = self.projector.basis(nb, &self.weights);
        let mut acc = 0.0;
        for i in 0..nb {
            for j in 0..nb {
                acc += v[(i, 0)] * self.weights[i] * self.b[(i, j)] * v[(j, 0)];
            }
        }
        Some(acc)
    }

    /// The weighted form matrix W·B (entries of the boundary bilinear form
    /// in the nodal basis).
    pub fn weighted_b(&self) -> DMatrix<f64> {
        let nb = self.nb();
        DMatrix::from_fn(nb, nb, |i, j| self.weights[i] * self.b[(i, j)])
    }
}

/// Verdict of the two-point (and general) classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionClass {
    pub markovian: bool,
    pub conservative_recurrent: bool,
    pub transient: bool,
    pub description: String,
}

const CLASS_TOL: f64 = 1e-12;

fn rel_tol(b: &DMatrix<f64>) -> f64 {
    CLASS_TOL * linalg::max_abs(b).max(1.0)
}

/// Closed-form classification on a two-point boundary.
///
/// Full projector: Markovian iff b₁₁+b₁₂ ≥ 0, b₁₂+b₂₂ ≥ 0 and b₁₂ ≤ 0.
/// Rank-one: Markovian iff the constraint vector is (up to sign) one of
/// (1,1)/√2, (1,0), (0,1) and the scalar coefficient is ≥ 0. Conservative
/// (equivalently recurrent) iff the boundary form kills constants and
/// constants are admissible traces.
pub fn classify_2d(bf: &BoundaryForm, ell: f64) -> Result<ExtensionClass> {
    if bf.nb() != 2 {
        return Err(Error::domain("classify_2d requires a two-point boundary"));
    }
    if ell <= 0.0 {
        return Err(Error::domain("interval length must be positive"));
    }
    let wb = bf.weighted_b();
    let tol = rel_tol(&wb);
    match &bf.projector {
        BoundaryProjector::Zero => Ok(ExtensionClass {
            markovian: true,
            conservative_recurrent: false,
            transient: true,
            description: "Dirichlet".to_string(),
        }),
        BoundaryProjector::Full => {
            let (b11, b12, b22) = (wb[(0, 0)], wb[(0, 1)], wb[(1, 1)]);
            let markovian = b11 + b12 >= -tol && b12 + b22 >= -tol && b12 <= tol;
            let row_sums_zero = (b11 + b12).abs() <= tol && (b12 + b22).abs() <= tol;
            let recurrent = markovian && row_sums_zero;
            let zero = linalg::max_abs(&wb) <= CLASS_TOL;
            let p0 = DMatrix::from_row_slice(2, 2, &[-1.0 / ell, 1.0 / ell, 1.0 / ell, -1.0 / ell]);
            let is_krein = linalg::max_abs(&(&wb - &p0)) <= 1e-10 * (1.0 / ell).max(1.0);
            let description = if zero {
                "Neumann"
            } else if is_krein {
                "Krein extension"
            } else if markovian && b12.abs() <= tol {
                "Robin"
            } else if recurrent {
                "periodic-type"
            } else if markovian {
                "Feller"
            } else {
                "non-Markovian coupling"
            };
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: description.to_string(),
            })
        }
        BoundaryProjector::RankOne(v) => {
            let b = bf.rank_one_coefficient().unwrap_or(0.0);
            let tol_b = CLASS_TOL * b.abs().max(1.0);
            let matches = |target: &[f64; 2]| {
                let d_plus = ((v[0] - target[0]).powi(2) + (v[1] - target[1]).powi(2)).sqrt();
                let d_minus = ((v[0] + target[0]).powi(2) + (v[1] + target[1]).powi(2)).sqrt();
                d_plus.min(d_minus) <= 1e-12
            };
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let is_e0 = matches(&[s, s]);
            let is_e1 = matches(&[1.0, 0.0]);
            let is_e2 = matches(&[0.0, 1.0]);
            let markovian = (is_e0 || is_e1 || is_e2) && b >= -tol_b;
            let recurrent = is_e0 && markovian && b.abs() <= tol_b;
            let description = if !markovian {
                "non-Markovian trace constraint"
            } else if is_e0 && recurrent {
                "periodic-type"
            } else if is_e0 {
                "constant-trace Robin"
            } else {
                "mixed Dirichlet-Neumann"
            };
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: description.to_string(),
            })
        }
        _ => Err(Error::domain("classify_2d supports Zero, Full and RankOne projectors")),
    }
}

/// Classification for arbitrary boundary size; defers to the closed-form
/// rules on two points and to the M-matrix test otherwise.
pub fn classify(bf: &BoundaryForm, ell: f64) -> Result<ExtensionClass> {
    let nb = bf.nb();
    if nb == 2 && matches!(bf.projector, BoundaryProjector::Zero | BoundaryProjector::Full | BoundaryProjector::RankOne(_)) {
        return classify_2d(bf, ell);
    }
    let wb = bf.weighted_b();
    let tol = rel_tol(&wb);
    match &bf.projector {
        BoundaryProjector::Zero => Ok(ExtensionClass {
            markovian: true,
            conservative_recurrent: false,
            transient: true,
            description: "Dirichlet".to_string(),
        }),
        BoundaryProjector::Full => {
            let verdict = is_markov_generator(&bf.b, &bf.weights)?;
            let ones = DVector::from_element(nb, 1.0);
            let kills_const = linalg::max_abs_vec(&(&wb * &ones)) <= tol * (nb as f64);
            let markovian = verdict.markovian;
            let recurrent = markovian && kills_const;
            let description = if linalg::max_abs(&wb) <= CLASS_TOL {
                "Neumann"
            } else if markovian && recurrent {
                "conservative boundary diffusion"
            } else if markovian {
                "Wentzell"
            } else {
                "non-Markovian coupling"
            };
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: description.to_string(),
            })
        }
        BoundaryProjector::Mask(idx) => {
            // Clamping preserves "zero off the mask", so the form is
            // Dirichlet iff its restriction to the mask block is.
            let k = idx.len();
            let sub_b = DMatrix::from_fn(k, k, |p, q| bf.b[(idx[p], idx[q])]);
            let sub_w = DVector::from_fn(k, |p, _| bf.weights[idx[p]]);
            let markovian = is_markov_generator(&sub_b, &sub_w)?.markovian;
            // A proper mask excludes constants from the trace space.
            let proper = k < nb;
            let sub_wb = DMatrix::from_fn(k, k, |p, q| sub_w[p] * sub_b[(p, q)]);
            let kills_const =
                linalg::max_abs_vec(&(&sub_wb * DVector::from_element(k, 1.0))) <= rel_tol(&sub_wb) * (k as f64);
            let recurrent = markovian && !proper && kills_const;
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: "mixed Dirichlet-Neumann".to_string(),
            })
        }
        BoundaryProjector::MeanValue(_) => {
            let b = bf.rank_one_coefficient().unwrap_or(0.0);
            let tol_b = CLASS_TOL * b.abs().max(1.0);
            let markovian = b >= -tol_b;
            let recurrent = markovian && b.abs() <= tol_b;
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: if recurrent { "mean-value conservative" } else { "mean-value Robin" }.to_string(),
            })
        }
        BoundaryProjector::RankOne(v) => {
            // The range {c·v} is stable under clamping iff v is (up to
            // sign) a scaled indicator; with equal positive entries on its
            // support the clamp stays on the line.
            let b = bf.rank_one_coefficient().unwrap_or(0.0);
            let tol_b = CLASS_TOL * b.abs().max(1.0);
            let max_entry = v.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
            let sign = if v.iter().find(|&&x| x.abs() > 1e-12 * max_entry).copied().unwrap_or(1.0) >= 0.0 {
                1.0
            } else {
                -1.0
            };
            let indicator = v
                .iter()
                .all(|&x| x.abs() <= 1e-12 * max_entry || (sign * x - max_entry).abs() <= 1e-12 * max_entry);
            let markovian = indicator && b >= -tol_b;
            let full_support = v.iter().all(|&x| x.abs() > 1e-12 * max_entry);
            let recurrent = markovian && full_support && b.abs() <= tol_b;
            Ok(ExtensionClass {
                markovian,
                conservative_recurrent: recurrent,
                transient: markovian && !recurrent,
                description: if markovian { "indicator trace constraint" } else { "non-Markovian trace constraint" }
                    .to_string(),
            })
        }
    }
}

/// Result of the M-matrix test.
#[derive(Debug, Clone)]
pub struct GeneratorVerdict {
    pub markovian: bool,
    /// First violation: (row, col, weighted entry, reason).
    pub violation: Option<(usize, usize, f64, String)>,
}

/// M-matrix criterion: `M` generates a Markov semigroup (as `e^{-tM}`)
/// iff the weighted form matrix W·M has nonpositive off-diagonal entries
/// and nonnegative row sums.
pub fn is_markov_generator(m: &DMatrix<f64>, weights: &DVector<f64>) -> Result<GeneratorVerdict> {
    let n = m.nrows();
    if m.ncols() != n || weights.len() != n {
        return Err(Error::domain("is_markov_generator: dimension mismatch"));
    }
    if linalg::weighted_asymmetry(m, weights) > 1e-12 {
        return Err(Error::contract("is_markov_generator: weighted matrix not symmetric"));
    }
    let wm = DMatrix::from_fn(n, n, |i, j| weights[i] * m[(i, j)]);
    let tol = CLASS_TOL * linalg::max_abs(&wm).max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != j && wm[(i, j)] > tol {
                return Ok(GeneratorVerdict {
                    markovian: false,
                    violation: Some((i, j, wm[(i, j)], "positive off-diagonal entry".to_string())),
                });
            }
        }
        let row_sum: f64 = wm.row(i).iter().sum();
        if row_sum < -tol * (n as f64) {
            return Ok(GeneratorVerdict {
                markovian: false,
                violation: Some((i, i, row_sum, "negative row sum".to_string())),
            });
        }
    }
    Ok(GeneratorVerdict { markovian: true, violation: None })
}

/// Options for the semigroup oracle.
#[derive(Debug, Clone)]
pub struct BruteForceOpts {
    pub times: Vec<f64>,
    pub n_samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for BruteForceOpts {
    fn default() -> Self {
        BruteForceOpts { times: vec![0.01, 0.1, 1.0], n_samples: 32, tol: 1e-8, seed: 7 }
    }
}

/// A concrete Markov-property violation found by the oracle.
#[derive(Debug, Clone)]
pub struct MarkovWitness {
    pub t: f64,
    pub entry: usize,
    pub value: f64,
    pub input: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub markovian: bool,
    pub witness: Option<MarkovWitness>,
}

/// Definition-level oracle: evolves 0 ≤ u ≤ 1 through `e^{-tM}` (weighted
/// symmetric eigendecomposition) and looks for values escaping [0, 1].
/// The corpus always contains the constant 1 and every coordinate
/// indicator, plus seeded uniform samples.
pub fn brute_force_markov(m: &DMatrix<f64>, weights: &DVector<f64>, opts: &BruteForceOpts) -> Result<OracleVerdict> {
    let n = m.nrows();
    if m.ncols() != n || weights.len() != n {
        return Err(Error::domain("brute_force_markov: dimension mismatch"));
    }
    let (vals, vecs) = linalg::weighted_sym_eigen(m, weights)?;
    let mut corpus: Vec<DVector<f64>> = Vec::with_capacity(1 + n + opts.n_samples);
    corpus.push(DVector::from_element(n, 1.0));
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        corpus.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.n_samples {
        corpus.push(DVector::from_fn(n, |_, _| rng.gen::<f64>()));
    }
    for &t in &opts.times {
        let et = linalg::weighted_matrix_function(&vals, &vecs, weights, |x| (-t * x).exp());
        for u in &corpus {
            let v = &et * u;
            for i in 0..n {
                if v[i] < -opts.tol || v[i] > 1.0 + opts.tol {
                    return Ok(OracleVerdict {
                        markovian: false,
                        witness: Some(MarkovWitness { t, entry: i, value: v[i], input: u.clone() }),
                    });
                }
            }
        }
    }
    Ok(OracleVerdict { markovian: true, witness: None })
}

/// Splitting of a Markov generator into jump weights and killing rates:
/// the weighted form equals Σ_{i<j} J_ij (u_i−u_j)² + Σ_i κ_i u_i².
pub fn beurling_deny_split(m: &DMatrix<f64>, weights: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let verdict = is_markov_generator(m, weights)?;
    if !verdict.markovian {
        let (i, j, v, why) = verdict.violation.unwrap();
        return Err(Error::contract(format!(
            "beurling_deny_split needs a Markov generator; {why} at ({i},{j}) = {v:.3e}"
        )));
    }
    let n = m.nrows();
    let wm = DMatrix::from_fn(n, n, |i, j| weights[i] * m[(i, j)]);
    let mut jump = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                jump[(i, j)] = (-0.5 * (wm[(i, j)] + wm[(j, i)])).max(0.0);
            }
        }
    }
    let kappa = DVector::from_fn(n, |i, _| wm.row(i).iter().sum::<f64>().max(0.0));
    Ok((jump, kappa))
}

/// Evaluate the jump/killing form on a vector.
pub fn jump_killing_energy(jump: &DMatrix<f64>, kappa: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += jump[(i, j)] * (u[i] - u[j]).powi(2);
        }
        acc += kappa[i] * u[i] * u[i];
    }
    acc
}

/// Clamp to [0, 1] componentwise (the unit contraction).
pub fn unit_contraction(u: &DVector<f64>) -> DVector<f64> {
    u.map(|x| x.clamp(0.0, 1.0))
}

/// Does the quadratic form decrease under the unit contraction of `u`?
pub fn form_contraction_check(q: &DMatrix<f64>, u: &DVector<f64>) -> bool {
    let clamped = unit_contraction(u);
    let fu = (u.transpose() * q * u)[(0, 0)];
    let fc = (clamped.transpose() * q * &clamped)[(0, 0)];
    fc <= fu + 1e-10 * fu.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ones(n: usize) -> DVector<f64> {
        DVector::from_element(n, 1.0)
    }

    #[test]
    fn neumann_is_recurrent() {
        let bf = BoundaryForm::neumann(ones(2));
        let c = classify_2d(&bf, 1.0).unwrap();
        assert!(c.markovian && c.conservative_recurrent && !c.transient);
        assert_eq!(c.description, "Neumann");
    }

    #[test]
    fn krein_extension_not_markovian() {
        let p0 = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let bf = BoundaryForm::full(p0, ones(2)).unwrap();
        let c = classify_2d(&bf, 1.0).unwrap();
        assert!(!c.markovian);
        assert_eq!(c.description, "Krein extension");
    }

    #[test]
    fn non_admissible_rank_one_vector() {
        let bf = BoundaryForm::rank_one(DVector::from_vec(vec![0.6, 0.8]), 1.0, ones(2)).unwrap();
        let c = classify_2d(&bf, 1.0).unwrap();
        assert!(!c.markovian);
    }

    #[test]
    fn rank_one_axis_vectors_are_markovian() {
        for v in [vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]] {
            let bf = BoundaryForm::rank_one(DVector::from_vec(v), 0.5, ones(2)).unwrap();
            let c = classify_2d(&bf, 1.0).unwrap();
            assert!(c.markovian && c.transient);
        }
    }

    #[test]
    fn periodic_type_is_recurrent() {
        let bf = BoundaryForm::rank_one(DVector::from_vec(vec![1.0, 1.0]), 0.0, ones(2)).unwrap();
        let c = classify_2d(&bf, 1.0).unwrap();
        assert!(c.markovian && c.conservative_recurrent);
        assert_eq!(c.description, "periodic-type");
    }

    #[test]
    fn dirichlet_is_transient() {
        let bf = BoundaryForm::dirichlet(ones(2));
        let c = classify_2d(&bf, 1.0).unwrap();
        assert!(c.markovian && c.transient);
        assert_eq!(c.description, "Dirichlet");
    }

    #[test]
    fn classification_is_scale_invariant() {
        let b = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 0.9]);
        for c in [1e-6, 1.0, 1e6] {
            let bf = BoundaryForm::full(&b * c, ones(2)).unwrap();
            let cls = classify_2d(&bf, 1.0).unwrap();
            assert!(cls.markovian, "scale {c}");
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.5, 0.5, 0.5, 0.9]);
        for c in [1e-6, 1.0, 1e6] {
            let bf = BoundaryForm::full(&bad * c, ones(2)).unwrap();
            let cls = classify_2d(&bf, 1.0).unwrap();
            assert!(!cls.markovian, "scale {c}");
        }
    }

    #[test]
    fn m_matrix_criterion_examples() {
        let w = ones(2);
        let good = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(is_markov_generator(&good, &w).unwrap().markovian);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let verdict = is_markov_generator(&bad, &w).unwrap();
        assert!(!verdict.markovian);
        assert!(verdict.violation.unwrap().3.contains("off-diagonal"));
        let theta = DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 2.0]);
        assert!(is_markov_generator(&theta, &w).unwrap().markovian);
    }

    #[test]
    fn negative_row_sum_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, -1.0, 0.5]);
        let verdict = is_markov_generator(&m, &ones(2)).unwrap();
        assert!(!verdict.markovian);
        assert!(verdict.violation.unwrap().3.contains("row sum"));
    }

    #[test]
    fn oracle_on_diagonal_generator() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let v = brute_force_markov(&m, &ones(2), &BruteForceOpts::default()).unwrap();
        assert!(v.markovian);
    }

    #[test]
    fn oracle_finds_witness_for_positive_coupling() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let v = brute_force_markov(&m, &ones(2), &BruteForceOpts::default()).unwrap();
        assert!(!v.markovian);
        let w = v.witness.unwrap();
        assert!(w.value < -1e-8 || w.value > 1.0 + 1e-8);
    }

    #[test]
    fn oracle_rejects_theta_plus_p0() {
        // Θ = [[2,−1/2],[−1/2,2]] passes the M-matrix test, but shifting
        // by the zero-shift boundary response [[−1,1],[1,−1]] produces a
        // positive coupling that the semigroup oracle catches.
        let b_theta = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let v = brute_force_markov(&b_theta, &ones(2), &BruteForceOpts::default()).unwrap();
        assert!(!v.markovian);
    }

    #[test]
    fn split_matches_hand_expansion() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 3.0]);
        let (j, k) = beurling_deny_split(&m, &ones(2)).unwrap();
        assert_abs_diff_eq!(j[(0, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[1], 2.0, epsilon = 1e-14);
        let u = DVector::from_vec(vec![0.3, -0.7]);
        let direct = (u.transpose() * &m * &u)[(0, 0)];
        assert_abs_diff_eq!(jump_killing_energy(&j, &k, &u), direct, epsilon = 1e-12);
    }

    #[test]
    fn split_pure_jump_and_pure_killing() {
        let jump_gen = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let (j, k) = beurling_deny_split(&jump_gen, &ones(2)).unwrap();
        assert_abs_diff_eq!(j[(0, 1)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.norm(), 0.0, epsilon = 1e-14);
        let kill_gen = DMatrix::from_diagonal(&ones(2));
        let (j2, k2) = beurling_deny_split(&kill_gen, &ones(2)).unwrap();
        assert_abs_diff_eq!(j2.norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k2[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn split_rejects_non_markovian() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(beurling_deny_split(&m, &ones(2)).is_err());
    }

    #[test]
    fn contraction_check_trivial_cases() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let inside = DVector::from_vec(vec![0.2, 0.9]);
        assert!(form_contraction_check(&q, &inside));
        let outside = DVector::from_vec(vec![1.5, -0.2]);
        assert!(form_contraction_check(&q, &outside));
    }

    #[test]
    fn projector_basis_weighted_orthonormal() {
        let w = DVector::from_vec(vec![0.5, 2.0, 1.5]);
        for p in [
            BoundaryProjector::Full,
            BoundaryProjector::RankOne(DVector::from_vec(vec![0.6, 0.0, 0.8])),
            BoundaryProjector::Mask(vec![0, 2]),
            BoundaryProjector::MeanValue(w.clone()),
        ] {
            let v = p.basis(3, &w);
            let k = v.ncols();
            for a in 0..k {
                for b in 0..k {
                    let dot: f64 = (0..3).map(|i| w[i] * v[(i, a)] * v[(i, b)]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(dot, expect, epsilon = 1e-13);
                }
            }
            // Projection matrix is idempotent.
            let pm = p.matrix(3, &w);
            assert!(linalg::max_abs(&(&pm * &pm - &pm)) < 1e-12);
        }
    }

    #[test]
    fn boundary_form_rejects_asymmetric_b() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(BoundaryForm::full(b, ones(2)).is_err());
    }

    #[test]
    fn boundary_form_rejects_unprojected_b() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let bf = BoundaryForm::new(BoundaryProjector::RankOne(DVector::from_vec(vec![1.0, 0.0])), b, ones(2));
        assert!(bf.is_err());
    }

    #[test]
    fn mean_value_form_energy_on_constants() {
        let w = DVector::from_vec(vec![0.5, 0.5, 1.0, 1.0]);
        let total: f64 = w.iter().sum();
        let bf = BoundaryForm::mean_value(2.0, w.clone()).unwrap();
        let wb = bf.weighted_b();
        let one = DVector::from_element(4, 1.0);
        let energy = (one.transpose() * &wb * &one)[(0, 0)];
        // f(1) = b·|Γ| for the mean-value form.
        assert_abs_diff_eq!(energy, 2.0 * total, epsilon = 1e-12);
    }

    #[test]
    fn general_classify_mask_is_transient() {
        let bf = BoundaryForm::mask(vec![0, 1], DVector::from_element(4, 1.0)).unwrap();
        let c = classify(&bf, 1.0).unwrap();
        assert!(c.markovian && c.transient && !c.conservative_recurrent);
    }

    #[test]
    fn general_classify_mean_value() {
        let w = DVector::from_element(4, 0.5);
        let c0 = classify(&BoundaryForm::mean_value(0.0, w.clone()).unwrap(), 1.0).unwrap();
        assert!(c0.markovian && c0.conservative_recurrent);
        let c1 = classify(&BoundaryForm::mean_value(1.0, w).unwrap(), 1.0).unwrap();
        assert!(c1.markovian && c1.transient);
    }
}
