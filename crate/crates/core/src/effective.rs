//! Non-Hermitian effective matrix generating the single-excitation amplitude
//! evolution `psi_dot = -i M psi`, together with its characteristic
//! polynomial.
//!
//! The basis ordering is atoms first, photon last (the global ground state is
//! excluded: quantum jumps only feed it and never return). Atoms couple to
//! each other exclusively through the cavity mode, so `M` is an arrowhead
//! matrix: complex diagonal `delta_i - i gamma_i` (and `-i kappa` for the
//! photon), real couplings `g_i` on the photon row and column.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{basis, BasisState, ConfigError, SystemConfig};
use crate::poly;

/// Largest matrix dimension the polynomial machinery accepts.
pub const MAX_DIM: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EffectiveError {
    #[error("matrix dimension {0} exceeds the supported maximum {MAX_DIM}")]
    DimensionTooLarge(usize),
}

/// Dense complex matrix over the excited part of the single-excitation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrix {
    dim: usize,
    entries: Array2<C64>,
    basis_labels: Vec<BasisState>,
}

impl EffectiveMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    /// Basis labels for rows/columns; `OnePhoton` is always last.
    pub fn basis_labels(&self) -> &[BasisState] {
        &self.basis_labels
    }

    pub fn photon_index(&self) -> usize {
        self.dim - 1
    }

    /// Largest row sum of entry magnitudes (infinity norm).
    pub fn norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.entries.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().iter().sum()
    }

    #[cfg(test)]
    pub(crate) fn from_entries(entries: Array2<C64>) -> Self {
        let dim = entries.nrows();
        let mut basis_labels: Vec<BasisState> = (0..dim - 1).map(BasisState::AtomExcited).collect();
        basis_labels.push(BasisState::OnePhoton);
        Self {
            dim,
            entries,
            basis_labels,
        }
    }
}

/// Builds the effective matrix of a valid config.
pub fn build_effective_matrix(cfg: &SystemConfig) -> Result<EffectiveMatrix, ConfigError> {
    cfg.validate()?;
    let n = cfg.n_atoms();
    let dim = n + 1;
    let photon = n;
    let mut entries = Array2::<C64>::zeros((dim, dim));
    for (i, atom) in cfg.atoms.iter().enumerate() {
        entries[[i, i]] = C64::new(atom.delta, -atom.gamma);
        entries[[i, photon]] = C64::new(atom.g, 0.0);
        entries[[photon, i]] = C64::new(atom.g, 0.0);
    }
    entries[[photon, photon]] = C64::new(0.0, -cfg.kappa);
    let mut basis_labels = basis(cfg);
    basis_labels.pop(); // drop Ground
    Ok(EffectiveMatrix {
        dim,
        entries,
        basis_labels,
    })
}

/// Monic coefficients of `det(lambda I - M)` in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialCoefficients {
    #[serde(serialize_with = "crate::serialize::complex_seq")]
    coeffs: Vec<C64>,
}

impl PolynomialCoefficients {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Ascending coefficients `c_0 ... c_d` with `c_d = 1`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.coeffs, z)
    }

    /// Value together with the rounding majorant used in vanishing checks.
    pub fn eval_with_scale(&self, z: C64) -> (C64, f64) {
        poly::eval_with_scale(&self.coeffs, z)
    }
}

/// Characteristic polynomial by the Leverrier-Faddeev trace recursion.
///
/// Exact up to rounding for these dimensions and free of pivoting choices, so
/// identical inputs give bit-identical coefficients.
pub fn characteristic_polynomial(
    m: &EffectiveMatrix,
) -> Result<PolynomialCoefficients, EffectiveError> {
    let n = m.dim();
    if n > MAX_DIM {
        return Err(EffectiveError::DimensionTooLarge(n));
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let mut work = Array2::<C64>::eye(n);
    for k in 1..=n {
        work = m.entries().dot(&work);
        let c = -work.diag().iter().sum::<C64>() / k as f64;
        coeffs[n - k] = c;
        for i in 0..n {
            work[[i, i]] += c;
        }
    }
    Ok(PolynomialCoefficients { coeffs })
}
