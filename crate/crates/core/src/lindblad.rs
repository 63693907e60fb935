//! Density-matrix propagation of the full master equation in the truncated
//! single-excitation basis (ground state included), plus the matching
//! amplitude-vector integrator.
//!
//! This is the oracle the closed-form rate predictions are tested against:
//! the master equation knows nothing about the effective-matrix reduction,
//! yet for a single initial excitation the excited-block elements factorize
//! as `rho_ij(t) = psi_i(t) conj(psi_j(t))` exactly.
//!
//! Integration is classical fixed-step fourth-order Runge-Kutta. Fixed steps
//! keep fixtures bit-reproducible; the step bound `dt * max_rate <= 0.05`
//! keeps the local error at the 0.05^5 level. The state is re-Hermitized
//! every step, which removes the dominant drift mode.

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg;
use crate::model::{ConfigError, SystemConfig};

/// Integrator step-size safety factor: `dt <= STEP_SAFETY / max_rate`.
pub const STEP_SAFETY: f64 = 0.05;
/// Trace drift beyond this aborts a run as numerically unstable.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Trajectories keep at most this many snapshots regardless of run length.
pub const MAX_SNAPSHOTS: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("density matrix dimension {got} does not match basis dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step dt={dt} exceeds the stability bound {bound} (= {STEP_SAFETY}/max rate)")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("t_end must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("trace drifted to |tr - 1| = {drift:.3e} at t = {t}: integration unstable")]
    TraceDrift { t: f64, drift: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Hermitian density matrix over the full basis, ground state last.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<C64>,
}

impl DensityMatrix {
    /// Pure state `|k><k|`.
    pub fn pure(dim: usize, k: usize) -> Self {
        let mut entries = Array2::zeros((dim, dim));
        entries[[k, k]] = C64::new(1.0, 0.0);
        Self { entries }
    }

    pub fn from_entries(entries: Array2<C64>) -> Self {
        assert_eq!(entries.nrows(), entries.ncols());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().iter().sum()
    }

    /// Population of basis state `k` (real part of the diagonal).
    pub fn population(&self, k: usize) -> f64 {
        self.entries[[k, k]].re
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue; negative values beyond rounding indicate a
    /// positivity violation.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.entries.view())[0]
    }
}

/// Precomputed master-equation generator for one config.
struct Generator {
    n_atoms: usize,
    dim: usize,
    g: Vec<f64>,
    delta: Vec<f64>,
    /// Amplitude decay weight per decaying basis state (atoms then photon).
    weights: Vec<f64>,
}

impl Generator {
    fn new(cfg: &SystemConfig) -> Self {
        let n_atoms = cfg.n_atoms();
        let mut weights: Vec<f64> = cfg.atoms.iter().map(|a| a.gamma).collect();
        weights.push(cfg.kappa);
        Self {
            n_atoms,
            dim: n_atoms + 2,
            g: cfg.atoms.iter().map(|a| a.g).collect(),
            delta: cfg.atoms.iter().map(|a| a.delta).collect(),
            weights,
        }
    }

    /// Writes the master-equation right-hand side into `out`.
    ///
    /// Coherent part from the star-coupling Hamiltonian (atom detunings on
    /// the diagonal, couplings to the photon), dissipative part from the
    /// cavity and per-atom lowering channels, every one of which feeds the
    /// ground state.
    fn apply(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        let (n, dim, photon) = (self.n_atoms, self.dim, self.n_atoms);
        out.fill(C64::new(0.0, 0.0));
        let minus_i = C64::new(0.0, -1.0);

        // -i (H rho - rho H), exploiting the star sparsity of H
        for c in 0..dim {
            let mut photon_row = C64::new(0.0, 0.0);
            for j in 0..n {
                photon_row += self.g[j] * rho[[j, c]];
            }
            for i in 0..n {
                let h_rho = self.delta[i] * rho[[i, c]] + self.g[i] * rho[[photon, c]];
                out[[i, c]] += minus_i * h_rho;
            }
            out[[photon, c]] += minus_i * photon_row;
        }
        for r in 0..dim {
            let mut photon_col = C64::new(0.0, 0.0);
            for j in 0..n {
                photon_col += rho[[r, j]] * self.g[j];
            }
            for j in 0..n {
                let rho_h = rho[[r, j]] * self.delta[j] + rho[[r, photon]] * self.g[j];
                out[[r, j]] -= minus_i * rho_h;
            }
            out[[r, photon]] -= minus_i * photon_col;
        }

        // dissipators: state k decays to ground with amplitude weight w
        let ground = dim - 1;
        for (k, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for c in 0..dim {
                out[[k, c]] -= w * rho[[k, c]];
            }
            for r in 0..dim {
                out[[r, k]] -= w * rho[[r, k]];
            }
            out[[ground, ground]] += 2.0 * w * rho[[k, k]];
        }
    }
}

/// Time derivative of `rho` under the full master equation.
pub fn liouvillian_apply(
    cfg: &SystemConfig,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, EvolveError> {
    cfg.validate()?;
    let expected = cfg.basis_dim();
    if rho.dim() != expected {
        return Err(EvolveError::DimensionMismatch {
            expected,
            got: rho.dim(),
        });
    }
    let gen = Generator::new(cfg);
    let mut out = Array2::zeros((expected, expected));
    gen.apply(rho.entries(), &mut out);
    Ok(DensityMatrix::from_entries(out))
}

/// Largest stable step for a config: `0.05 / max(kappa, gamma_i, g_i, |delta_i|)`.
pub fn step_bound(cfg: &SystemConfig) -> f64 {
    STEP_SAFETY / cfg.max_rate()
}

/// Time grid with density-matrix snapshots and derived populations.
#[derive(Debug, Clone)]
pub struct Trajectory {
    kappa: f64,
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    /// `populations[k][s]`: diagonal of basis state `k` at snapshot `s`.
    populations: Vec<Vec<f64>>,
    trace_errors: Vec<f64>,
}

impl Trajectory {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn populations(&self) -> &[Vec<f64>] {
        &self.populations
    }

    pub fn trace_errors(&self) -> &[f64] {
        &self.trace_errors
    }

    pub fn n_atoms(&self) -> usize {
        self.populations.len() - 2
    }

    #[cfg(test)]
    pub(crate) fn synthetic(kappa: f64, times: Vec<f64>, populations: Vec<Vec<f64>>) -> Self {
        let n = times.len();
        Self {
            kappa,
            times,
            states: Vec::new(),
            populations,
            trace_errors: vec![0.0; n],
        }
    }

    /// CSV export: `t, pop_atom_0..pop_atom_{N-1}, pop_photon, pop_ground, trace_error`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let n = self.n_atoms();
        write!(w, "t")?;
        for i in 0..n {
            write!(w, ",pop_atom_{i}")?;
        }
        writeln!(w, ",pop_photon,pop_ground,trace_error")?;
        for (s, &t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for k in 0..self.populations.len() {
                write!(w, ",{}", self.populations[k][s])?;
            }
            writeln!(w, ",{}", self.trace_errors[s])?;
        }
        Ok(())
    }
}

struct Rk4Buffers {
    k1: Array2<C64>,
    k2: Array2<C64>,
    k3: Array2<C64>,
    k4: Array2<C64>,
    tmp: Array2<C64>,
}

fn check_run(cfg: &SystemConfig, t_end: f64, dt: f64) -> Result<usize, EvolveError> {
    cfg.validate()?;
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(EvolveError::InvalidDuration(t_end));
    }
    let bound = step_bound(cfg);
    if dt.is_nan() || dt <= 0.0 || dt > bound * (1.0 + 1e-12) {
        return Err(EvolveError::StepTooLarge { dt, bound });
    }
    Ok((t_end / dt).ceil() as usize)
}

fn snapshot_stride(n_steps: usize) -> usize {
    n_steps.div_ceil(MAX_SNAPSHOTS).max(1)
}

/// Propagates the master equation from the excited atom's pure state.
///
/// Snapshots are thinned to at most [`MAX_SNAPSHOTS`] evenly strided steps
/// (always including the first and last).
pub fn evolve(cfg: &SystemConfig, t_end: f64, dt: f64) -> Result<Trajectory, EvolveError> {
    let n_steps = check_run(cfg, t_end, dt)?;
    let gen = Generator::new(cfg);
    let dim = gen.dim;
    let stride = snapshot_stride(n_steps);

    let mut rho = Array2::<C64>::zeros((dim, dim));
    rho[[cfg.excited_index(), cfg.excited_index()]] = C64::new(1.0, 0.0);
    let mut buf = Rk4Buffers {
        k1: Array2::zeros((dim, dim)),
        k2: Array2::zeros((dim, dim)),
        k3: Array2::zeros((dim, dim)),
        k4: Array2::zeros((dim, dim)),
        tmp: Array2::zeros((dim, dim)),
    };

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut populations: Vec<Vec<f64>> = vec![Vec::new(); dim];
    let mut trace_errors = Vec::new();
    let record = |step: usize,
                  rho: &Array2<C64>,
                  times: &mut Vec<f64>,
                  states: &mut Vec<DensityMatrix>,
                  populations: &mut Vec<Vec<f64>>,
                  trace_errors: &mut Vec<f64>| {
        times.push(step as f64 * dt);
        for (k, series) in populations.iter_mut().enumerate() {
            series.push(rho[[k, k]].re);
        }
        let trace: C64 = rho.diag().iter().sum();
        trace_errors.push((trace.re - 1.0).hypot(trace.im));
        states.push(DensityMatrix::from_entries(rho.clone()));
    };
    record(
        0,
        &rho,
        &mut times,
        &mut states,
        &mut populations,
        &mut trace_errors,
    );

    for step in 1..=n_steps {
        gen.apply(&rho, &mut buf.k1);
        Zip::from(&mut buf.tmp)
            .and(&rho)
            .and(&buf.k1)
            .for_each(|t, &r, &k| {
                *t = r + k * (dt / 2.0);
            });
        gen.apply(&buf.tmp, &mut buf.k2);
        Zip::from(&mut buf.tmp)
            .and(&rho)
            .and(&buf.k2)
            .for_each(|t, &r, &k| {
                *t = r + k * (dt / 2.0);
            });
        gen.apply(&buf.tmp, &mut buf.k3);
        Zip::from(&mut buf.tmp)
            .and(&rho)
            .and(&buf.k3)
            .for_each(|t, &r, &k| {
                *t = r + k * dt;
            });
        gen.apply(&buf.tmp, &mut buf.k4);
        Zip::from(&mut rho)
            .and(&buf.k1)
            .and(&buf.k2)
            .and(&buf.k3)
            .and(&buf.k4)
            .for_each(|r, &k1, &k2, &k3, &k4| {
                *r += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
            });
        // re-Hermitize: rho <- (rho + rho^dagger)/2
        for i in 0..dim {
            for j in i + 1..dim {
                let sym = (rho[[i, j]] + rho[[j, i]].conj()) / 2.0;
                rho[[i, j]] = sym;
                rho[[j, i]] = sym.conj();
            }
            rho[[i, i]] = C64::new(rho[[i, i]].re, 0.0);
        }

        let trace: C64 = rho.diag().iter().sum();
        let drift = (trace.re - 1.0).hypot(trace.im);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(EvolveError::TraceDrift {
                t: step as f64 * dt,
                drift,
            });
        }
        if step % stride == 0 || step == n_steps {
            record(
                step,
                &rho,
                &mut times,
                &mut states,
                &mut populations,
                &mut trace_errors,
            );
        }
    }

    Ok(Trajectory {
        kappa: cfg.kappa,
        times,
        states,
        populations,
        trace_errors,
    })
}

/// Amplitude series from the effective-matrix evolution, on the same grid and
/// with the same integrator as [`evolve`].
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    times: Vec<f64>,
    /// One amplitude vector (length N+1: atoms then photon) per snapshot.
    amplitudes: Vec<Array1<C64>>,
}

impl AmplitudeTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &[Array1<C64>] {
        &self.amplitudes
    }

    /// `|psi_k(t)|^2` series for component `k`.
    pub fn population(&self, k: usize) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|psi| psi[k].norm_sqr())
            .collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|psi| psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

/// Integrates `psi_dot = -i M psi` from the excited atom's basis vector.
pub fn amplitude_evolve(
    cfg: &SystemConfig,
    t_end: f64,
    dt: f64,
) -> Result<AmplitudeTrajectory, EvolveError> {
    let n_steps = check_run(cfg, t_end, dt)?;
    let m = crate::effective::build_effective_matrix(cfg).expect("validated above");
    let dim = m.dim();
    let stride = snapshot_stride(n_steps);
    let minus_i_m = m.entries().mapv(|z| z * C64::new(0.0, -1.0));

    let mut psi = Array1::<C64>::zeros(dim);
    psi[cfg.excited_index()] = C64::new(1.0, 0.0);
    let rhs = |p: &Array1<C64>| minus_i_m.dot(p);

    let mut times = vec![0.0];
    let mut amplitudes = vec![psi.clone()];
    for step in 1..=n_steps {
        let k1 = rhs(&psi);
        let k2 = rhs(&(&psi + &(&k1 * (dt / 2.0))));
        let k3 = rhs(&(&psi + &(&k2 * (dt / 2.0))));
        let k4 = rhs(&(&psi + &(&k3 * dt)));
        psi = &psi + &((k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0));
        if step % stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
            amplitudes.push(psi.clone());
        }
    }
    Ok(AmplitudeTrajectory { times, amplitudes })
}
