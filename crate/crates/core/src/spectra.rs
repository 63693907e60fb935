//! Complex eigendecomposition of effective matrices, polariton energies, and
//! exceptional-point location and diagnostics.
//!
//! Eigenvalues come from the characteristic polynomial (the representation
//! the closed-form analysis works in) via Aberth-Ehrlich iteration, and one
//! eigenvector per root from inverse iteration with a single shifted solve.
//! Near a coalescence the eigenvector matrix is intrinsically ill-conditioned;
//! the spectrum reports its reciprocal condition number instead of failing,
//! and eigenvector residuals degrade from ~1e-12 to the square root of that
//! scale inside the coalescence neighborhood.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::effective::{
    build_effective_matrix, characteristic_polynomial, EffectiveError, EffectiveMatrix,
};
use crate::linalg;
use crate::model::{AtomSpec, ConfigError, ParamPath, PathError, SystemConfig};
use crate::parallel;
use crate::poly;

/// Eigenvector-matrix reciprocal condition below which roots are flagged as
/// near-defective (condition number above 1e6).
const DEFECTIVE_RCOND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Dimension(#[from] EffectiveError),
    #[error(transparent)]
    NoConvergence(#[from] poly::NoConvergence),
    #[error("kappa == gamma_b ({0}): coalescence coupling degenerates to zero")]
    DegenerateEp(f64),
    #[error("third-order coalescence requires gamma_c/2 < kappa < gamma_c, got kappa={kappa}, gamma_c={gamma_c}")]
    OutsideEp3Window { kappa: f64, gamma_c: f64 },
    #[error("splitting-exponent fit failed: {0}")]
    FitFailure(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Full spectrum of an effective matrix.
///
/// Eigenvalues are sorted by ascending imaginary part, ties broken by real
/// part; eigenvectors are the matching unit-norm columns with the global
/// phase fixed so the largest-magnitude entry is real positive.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    #[serde(serialize_with = "crate::serialize::complex_seq")]
    eigenvalues: Vec<C64>,
    #[serde(serialize_with = "crate::serialize::complex_matrix")]
    eigenvectors: Array2<C64>,
    /// Reciprocal 1-norm condition number of the eigenvector matrix.
    condition: f64,
    near_defective: bool,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Eigenvector for eigenvalue `k`, as a column view.
    pub fn eigenvector(&self, k: usize) -> ndarray::ArrayView1<'_, C64> {
        self.eigenvectors.column(k)
    }

    pub fn eigenvectors(&self) -> &Array2<C64> {
        &self.eigenvectors
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn near_defective(&self) -> bool {
        self.near_defective
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn seeded_unit_vector(dim: usize, seed: u64) -> Array1<C64> {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v: Array1<C64> = (0..dim).map(|_| C64::new(next(), next())).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}

fn inverse_iteration(m: &Array2<C64>, lambda: C64, seed: u64) -> Array1<C64> {
    let dim = m.nrows();
    let mut shifted = m.clone();
    for i in 0..dim {
        shifted[[i, i]] -= lambda;
    }
    let floor = f64::EPSILON * linalg::one_norm(&shifted.view()).max(1.0);
    let mut v = seeded_unit_vector(dim, seed);
    for _ in 0..3 {
        let x = linalg::solve(&shifted.view(), v.as_slice().unwrap(), floor);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = x.mapv(|z| z / norm);
    }
    v
}

fn fix_phase(v: &mut Array1<C64>) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    if best > 0.0 {
        let phase = v[idx] / best;
        v.mapv_inplace(|z| z / phase);
    }
}

/// Eigenvalues (with multiplicity) and eigenvectors of an effective matrix.
pub fn eigenpairs(m: &EffectiveMatrix) -> Result<Spectrum, SpectraError> {
    let charpoly = characteristic_polynomial(m)?;
    let mut eigenvalues = poly::all_roots(charpoly.coeffs())?;
    eigenvalues.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());

    let dim = m.dim();
    // Group repeated eigenvalues so degenerate subspaces get independent
    // start vectors and intra-group deflation.
    let mut group = vec![usize::MAX; dim];
    let mut n_groups = 0;
    for i in 0..dim {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = n_groups;
        for j in i + 1..dim {
            if group[j] == usize::MAX
                && (eigenvalues[i] - eigenvalues[j]).norm() <= 1e-12 * (1.0 + eigenvalues[i].norm())
            {
                group[j] = n_groups;
            }
        }
        n_groups += 1;
    }

    let mut eigenvectors = Array2::<C64>::zeros((dim, dim));
    for gid in 0..n_groups {
        let members: Vec<usize> = (0..dim).filter(|&i| group[i] == gid).collect();
        let mut accepted: Vec<Array1<C64>> = Vec::new();
        for (j, &k) in members.iter().enumerate() {
            let raw = inverse_iteration(m.entries(), eigenvalues[k], (gid * 16 + j) as u64 + 1);
            let mut v = raw.clone();
            for prev in &accepted {
                let overlap: C64 = prev.iter().zip(v.iter()).map(|(p, x)| p.conj() * x).sum();
                v = &v - &prev.mapv(|p| p * overlap);
            }
            let rem = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut chosen = if rem > 1e-8 {
                // genuinely independent direction in a degenerate subspace
                v.mapv(|z| z / rem)
            } else {
                // defective eigenvalue: only one eigenvector exists
                raw
            };
            fix_phase(&mut chosen);
            accepted.push(chosen.clone());
            eigenvectors.column_mut(k).assign(&chosen);
        }
    }

    let condition = linalg::rcond_one(&eigenvectors.view());
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        condition,
        near_defective: condition < DEFECTIVE_RCOND,
    })
}

/// Smallest pairwise eigenvalue distance and largest pairwise eigenvector
/// overlap `|<v_i|v_j>|` of a spectrum.
pub fn coalescence(spec: &Spectrum) -> (f64, f64) {
    let n = spec.dim();
    let mut min_gap = f64::INFINITY;
    let mut max_overlap: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            min_gap = min_gap.min((spec.eigenvalues[i] - spec.eigenvalues[j]).norm());
            let overlap: C64 = spec
                .eigenvector(i)
                .iter()
                .zip(spec.eigenvector(j).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            max_overlap = max_overlap.max(overlap.norm());
        }
    }
    (min_gap, max_overlap)
}

/// Coupling at which the two polaritons of a single atom coalesce:
/// `g = |kappa - gamma_b| / 2`.
pub fn ep2_coupling(kappa: f64, gamma_b: f64) -> Result<f64, SpectraError> {
    if kappa == gamma_b {
        return Err(SpectraError::DegenerateEp(kappa));
    }
    Ok((kappa - gamma_b).abs() / 2.0)
}

/// Parameters placing two unexcited atoms at a third-order coalescence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ep3Parameters {
    pub gamma_b: f64,
    pub g_b: f64,
}

/// Decay of atom B and common coupling for a third-order coalescence, given
/// the cavity loss and the decay of atom C.
///
/// The two atomic decays must straddle the cavity loss symmetrically
/// (`gamma_b = 2 kappa - gamma_c`), which requires `gamma_c/2 < kappa < gamma_c`.
pub fn ep3_parameters(kappa: f64, gamma_c: f64) -> Result<Ep3Parameters, SpectraError> {
    if !(gamma_c / 2.0 < kappa && kappa < gamma_c) {
        return Err(SpectraError::OutsideEp3Window { kappa, gamma_c });
    }
    Ok(Ep3Parameters {
        gamma_b: 2.0 * kappa - gamma_c,
        g_b: (gamma_c - kappa) / std::f64::consts::SQRT_2,
    })
}

/// Complex energies of the two polaritons formed by one atom and the cavity:
/// `-i (kappa + gamma_b)/2 +- sqrt(g_b^2 - ((kappa - gamma_b)/2)^2)`.
///
/// The square root is the principal complex root, covering both the split
/// (real separation) and overdamped (imaginary separation) regimes.
pub fn polariton_pair(kappa: f64, gamma_b: f64, g_b: f64) -> (C64, C64) {
    let center = C64::new(0.0, -(kappa + gamma_b) / 2.0);
    let half = (kappa - gamma_b) / 2.0;
    let split = C64::new(g_b * g_b - half * half, 0.0).sqrt();
    (center + split, center - split)
}

fn min_gap_of(cfg: &SystemConfig) -> Result<f64, SpectraError> {
    let m = build_effective_matrix(cfg)?;
    let spec = eigenpairs(&m)?;
    Ok(coalescence(&spec).0)
}

/// Fits the power `p` in `gap ~ eps^p` when the named parameter is scaled by
/// `1 + eps` away from a coalescence; `0.5` signals a second-order point,
/// `1/3` a third-order one, and `1` an ordinary simple spectrum.
pub fn splitting_exponent(
    cfg_at_ep: &SystemConfig,
    param: ParamPath,
    eps_grid: &[f64],
) -> Result<f64, SpectraError> {
    if eps_grid.len() < 3 {
        return Err(SpectraError::FitFailure(
            "need at least 3 grid points".into(),
        ));
    }
    if eps_grid.windows(2).any(|w| w[0] >= w[1]) || eps_grid[0] <= 0.0 {
        return Err(SpectraError::FitFailure(
            "epsilon grid must be positive and strictly increasing".into(),
        ));
    }
    if eps_grid[eps_grid.len() - 1] / eps_grid[0] < 100.0 {
        return Err(SpectraError::FitFailure(
            "epsilon grid must span at least two decades".into(),
        ));
    }
    let base_value = param.get(cfg_at_ep)?;
    let gap0 = min_gap_of(cfg_at_ep)?;

    let splittings: Vec<Result<f64, SpectraError>> = parallel::map(eps_grid, |&eps| {
        let perturbed = param.set(cfg_at_ep, base_value * (1.0 + eps))?;
        Ok((min_gap_of(&perturbed)? - gap0).abs())
    });
    let mut values = Vec::with_capacity(eps_grid.len());
    for s in splittings {
        values.push(s?);
    }
    if values.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(SpectraError::FitFailure(
            "perturbation leaves the gap unchanged".into(),
        ));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectraError::FitFailure(
            "gap sequence is not monotone".into(),
        ));
    }

    // least-squares slope of log(gap) against log(eps)
    let logs: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&values)
        .map(|(&e, &s)| (e.ln(), s.ln()))
        .collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    let sxy = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>();
    Ok(sxy / sxx)
}

/// Diagnostics of a located exceptional point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpReport {
    /// Coalescence order (2 or 3).
    pub order: u8,
    pub kappa: f64,
    pub gamma_b: f64,
    pub gamma_c: Option<f64>,
    pub g_b: f64,
    pub min_gap: f64,
    pub max_overlap: f64,
    pub splitting_exponent: f64,
}

/// Log-spaced default grid for splitting-exponent fits, 1e-6 to 1e-3.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..13)
        .map(|k| 10f64.powf(-6.0 + 3.0 * k as f64 / 12.0))
        .collect()
}

/// Locates and characterizes the second-order point of one unexcited atom.
pub fn ep2_report(kappa: f64, gamma_b: f64) -> Result<EpReport, SpectraError> {
    let g_b = ep2_coupling(kappa, gamma_b)?;
    let cfg = SystemConfig::new(kappa, vec![AtomSpec::new(g_b, gamma_b).excited()]);
    let spec = eigenpairs(&build_effective_matrix(&cfg)?)?;
    let (min_gap, max_overlap) = coalescence(&spec);
    let exponent = splitting_exponent(&cfg, ParamPath::AtomG(0), &default_epsilon_grid())?;
    Ok(EpReport {
        order: 2,
        kappa,
        gamma_b,
        gamma_c: None,
        g_b,
        min_gap,
        max_overlap: max_overlap.min(1.0),
        splitting_exponent: exponent,
    })
}

/// Locates and characterizes the third-order point of two unexcited atoms.
pub fn ep3_report(kappa: f64, gamma_c: f64) -> Result<EpReport, SpectraError> {
    let params = ep3_parameters(kappa, gamma_c)?;
    let cfg = SystemConfig::new(
        kappa,
        vec![
            AtomSpec::new(params.g_b, params.gamma_b).excited(),
            AtomSpec::new(params.g_b, gamma_c),
        ],
    );
    let spec = eigenpairs(&build_effective_matrix(&cfg)?)?;
    let (min_gap, max_overlap) = coalescence(&spec);
    let exponent = splitting_exponent(&cfg, ParamPath::AtomG(0), &default_epsilon_grid())?;
    Ok(EpReport {
        order: 3,
        kappa,
        gamma_b: params.gamma_b,
        gamma_c: Some(gamma_c),
        g_b: params.g_b,
        min_gap,
        max_overlap: max_overlap.min(1.0),
        splitting_exponent: exponent,
    })
}
