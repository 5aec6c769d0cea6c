//! Experiment configuration: a single JSON document describing the
//! domain, the boundary condition, and the numerical grids. Parsing is
//! lossless: serializing a parsed config reproduces the same document.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::classifier::BoundaryForm;
use crate::elliptic::{assemble_1d, assemble_2d, DiscreteElliptic, Domain1D, Domain2D};
use crate::error::{Error, Result};
use crate::interval;

/// Named diffusion coefficients, so configs stay plain data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientPreset {
    #[default]
    Unit,
    /// a(x) = 1 + x/2 (1D) or 1 + (x+y)/4 (2D).
    Affine,
    /// a(x) = 1.5 + sin(pi x)/2, uniformly elliptic.
    Sine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    OneD {
        ell: f64,
        n: usize,
        #[serde(default)]
        coefficient: CoefficientPreset,
    },
    TwoD {
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
        #[serde(default)]
        coefficient: CoefficientPreset,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
    Robin { beta: f64 },
    /// Dense boundary operator on the full trace space, row-major.
    Full { b: Vec<Vec<f64>> },
    /// One admissible trace direction with a scalar coefficient.
    RankOne { direction: Vec<f64>, b: f64 },
    MeanValue { b: f64 },
    /// Dirichlet off the mask, zero flux on it.
    Mask { indices: Vec<usize> },
    Wentzell { b1: f64, bs: f64, b0: f64, s: f64 },
    Levy { c: f64, nu: Vec<f64> },
    /// B equal to the weighted zero-shift response operator.
    KreinExtension,
}

fn default_lambdas() -> Vec<f64> {
    vec![0.5, 1.0, 5.0]
}

fn default_times() -> Vec<f64> {
    vec![0.05, 0.5]
}

fn default_seed() -> u64 {
    7
}

fn default_tolerance() -> f64 {
    1e-8
}

/// One axis of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return Ok(Vec::new());
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::config("sweep endpoints must be finite"));
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let d = (self.stop - self.start) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| self.start + d * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub boundary: BoundarySpec,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::config("resolvent shifts must be positive"));
        }
        if self.times.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::config("times must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        Ok(())
    }

    pub fn ell(&self) -> f64 {
        match &self.domain {
            DomainSpec::OneD { ell, .. } => *ell,
            DomainSpec::TwoD { lx, .. } => *lx,
        }
    }

    pub fn assemble(&self) -> Result<DiscreteElliptic> {
        match &self.domain {
            DomainSpec::OneD { ell, n, coefficient } => {
                let dom = match coefficient {
                    CoefficientPreset::Unit => Domain1D::uniform(*ell, *n)?,
                    CoefficientPreset::Affine => {
                        Domain1D::with_coefficient(*ell, *n, std::sync::Arc::new(|x| 1.0 + 0.5 * x), 1.0, 1.0 + 0.5 * ell)?
                    }
                    CoefficientPreset::Sine => Domain1D::with_coefficient(*ell, *n, std::sync::Arc::new(|x| 1.5 + 0.5 * (std::f64::consts::PI * x).sin()), 1.0, 2.0)?,
                };
                assemble_1d(&dom)
            }
            DomainSpec::TwoD { lx, ly, nx, ny, coefficient } => {
                let dom = match coefficient {
                    CoefficientPreset::Unit => Domain2D::uniform(*lx, *ly, *nx, *ny)?,
                    CoefficientPreset::Affine => {
                        Domain2D::with_coefficient(*lx, *ly, *nx, *ny, std::sync::Arc::new(|x, y| 1.0 + 0.25 * (x + y)), 1.0, 1.0 + 0.25 * (lx + ly))?
                    }
                    CoefficientPreset::Sine => {
                        Domain2D::with_coefficient(*lx, *ly, *nx, *ny, std::sync::Arc::new(|x, y| 1.5 + 0.5 * (std::f64::consts::PI * (x + y)).sin()), 1.0, 2.0)?
                    }
                };
                assemble_2d(&dom)
            }
        }
    }

    /// Build the boundary form for an assembled grid.
    pub fn boundary_form(&self, disc: &DiscreteElliptic) -> Result<BoundaryForm> {
        let w = disc.w.clone();
        let nb = disc.nb();
        match &self.boundary {
            BoundarySpec::Dirichlet => Ok(BoundaryForm::dirichlet(w)),
            BoundarySpec::Neumann => Ok(BoundaryForm::neumann(w)),
            BoundarySpec::Robin { beta } => BoundaryForm::robin(*beta, w),
            BoundarySpec::Full { b } => {
                if b.len() != nb || b.iter().any(|row| row.len() != nb) {
                    return Err(Error::config(format!(
                        "boundary operator must be {nb}x{nb} for this grid"
                    )));
                }
                let m = DMatrix::from_fn(nb, nb, |i, j| b[i][j]);
                BoundaryForm::full(m, w)
            }
            BoundarySpec::RankOne { direction, b } => {
                if direction.len() != nb {
                    return Err(Error::config(format!("trace direction must have {nb} entries")));
                }
                BoundaryForm::rank_one(DVector::from_row_slice(direction), *b, w)
            }
            BoundarySpec::MeanValue { b } => BoundaryForm::mean_value(*b, w),
            BoundarySpec::Mask { indices } => BoundaryForm::mask(indices.clone(), w),
            BoundarySpec::Wentzell { b1, bs, b0, s } => {
                boundary::wentzell_b(&boundary::geometry_of(disc), *b1, *bs, *b0, *s)
            }
            BoundarySpec::Levy { c, nu } => {
                boundary::levy_circulant_b(&boundary::geometry_of(disc), *c, nu)
            }
            BoundarySpec::KreinExtension => {
                let p0 = if disc.dim == 1 {
                    interval::dtn_exact(0.0, &interval::IntervalConfig::new(disc.ell)?)?
                } else {
                    disc.dtn_discrete(0.0)?
                };
                BoundaryForm::full(p0, w)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainSpec::OneD { ell: 1.0, n: 50, coefficient: CoefficientPreset::Unit },
            boundary: BoundarySpec::Robin { beta: 1.0 },
            lambdas: default_lambdas(),
            times: default_times(),
            seed: 7,
            tolerance: 1e-8,
            sweep: Vec::new(),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = sample();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, serde_json::to_string_pretty(&back).unwrap());
    }

    #[test]
    fn defaults_fill_in() {
        let text = r#"{
            "domain": {"kind": "one-d", "ell": 1.0, "n": 20},
            "boundary": {"kind": "neumann"}
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.lambdas, vec![0.5, 1.0, 5.0]);
        assert_eq!(cfg.seed, 7);
        cfg.validate().unwrap();
    }

    #[test]
    fn builds_grid_and_boundary_form() {
        let cfg = sample();
        let d = cfg.assemble().unwrap();
        assert_eq!(d.ni(), 50);
        let bf = cfg.boundary_form(&d).unwrap();
        assert_eq!(bf.nb(), 2);
    }

    #[test]
    fn rejects_bad_dimensions_and_values() {
        let mut cfg = sample();
        cfg.boundary = BoundarySpec::Full { b: vec![vec![1.0]] };
        let d = cfg.assemble().unwrap();
        assert!(cfg.boundary_form(&d).is_err());
        cfg.lambdas = vec![-1.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_axis_values() {
        let ax = SweepAxis { name: "b12".into(), start: -1.0, stop: 1.0, steps: 5 };
        assert_eq!(ax.values().unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let empty = SweepAxis { name: "x".into(), start: 0.0, stop: 1.0, steps: 0 };
        assert!(empty.values().unwrap().is_empty());
    }

    #[test]
    fn two_d_wentzell_config_builds() {
        let cfg = ExperimentConfig {
            domain: DomainSpec::TwoD {
                lx: 1.0,
                ly: 1.0,
                nx: 6,
                ny: 6,
                coefficient: CoefficientPreset::Unit,
            },
            boundary: BoundarySpec::Wentzell { b1: 1.0, bs: 0.0, b0: 0.0, s: 0.5 },
            lambdas: default_lambdas(),
            times: default_times(),
            seed: 7,
            tolerance: 1e-8,
            sweep: Vec::new(),
        };
        let d = cfg.assemble().unwrap();
        let bf = cfg.boundary_form(&d).unwrap();
        assert_eq!(bf.nb(), d.nb());
    }
}
