//! Closed-form decay rates for a weakly coupled excited atom, and numerical
//! rate extraction from trajectories and spectra.
//!
//! Rate convention: every function here returns an amplitude rate; the
//! corresponding population decays at twice that value, and the trajectory
//! fit resolves the factor of two before reporting.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::effective::EffectiveMatrix;
use crate::lindblad::Trajectory;
use crate::model::SystemConfig;
use crate::spectra::{self, SpectraError};

/// Fits with larger rms log-residual than this are rejected as
/// non-exponential.
pub const MAX_LOG_RESIDUAL: f64 = 0.05;
/// Settling time (units of 1/kappa) discarded before fitting, so polariton
/// transients do not contaminate the slow exponential.
pub const BURN_IN_KAPPA_UNITS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("gamma_b = 0: cooperativity diverges, use the eigenvalue route instead")]
    ZeroGammaB,
    #[error("gamma_c (2 kappa - gamma_c) must be positive, got gamma_c={gamma_c}, kappa={kappa}")]
    DenominatorNonpositive { gamma_c: f64, kappa: f64 },
    #[error("third-order formula requires gamma_c/2 < kappa < gamma_c, got kappa={kappa}, gamma_c={gamma_c}")]
    OutsideEp3Window { kappa: f64, gamma_c: f64 },
    #[error("response pole sits on the real axis (kappa = gamma_b = 0)")]
    PoleAtRealAxis,
    #[error("population never reached the fit window; extend t_end beyond {t_end}")]
    WindowNotReached { t_end: f64 },
    #[error("non-exponential decay: rms log-residual {rms:.3} exceeds {MAX_LOG_RESIDUAL}")]
    OscillatoryResidual { rms: f64 },
    #[error(
        "ambiguous slow mode: top excited-direction overlaps {best:.4} and {second:.4} within 1%"
    )]
    AmbiguousSlowMode { best: f64, second: f64 },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Weak-coupling cavity-enhanced decay of a resonant atom: `g_a^2 / kappa`.
pub fn purcell_rate(g_a: f64, kappa: f64) -> f64 {
    g_a * g_a / kappa
}

/// Cooperativity of an unexcited atom: `C = g_b^2 / (gamma_b kappa)`.
pub fn cooperativity(g_b: f64, gamma_b: f64, kappa: f64) -> Result<f64, RateError> {
    if gamma_b == 0.0 {
        return Err(RateError::ZeroGammaB);
    }
    Ok(g_b * g_b / (gamma_b * kappa))
}

/// Rate left after interference with the unexcited atom's polaritons:
/// `gamma / (1 + c)`.
pub fn inhibited_rate(gamma: f64, c: f64) -> f64 {
    gamma / (1.0 + c)
}

/// Inhibited rate at the second-order coalescence coupling:
/// `gamma (1 - ((kappa - gamma_b)/(kappa + gamma_b))^2)`.
pub fn ep2_rate(gamma: f64, kappa: f64, gamma_b: f64) -> f64 {
    let r = (kappa - gamma_b) / (kappa + gamma_b);
    gamma * (1.0 - r * r)
}

/// Inhibited rate with two equal-coupling unexcited atoms whose decays
/// straddle the cavity loss: `gamma / (1 + 2 g_b^2 / (gamma_c (2 kappa - gamma_c)))`.
pub fn three_atom_rate(gamma: f64, g_b: f64, gamma_c: f64, kappa: f64) -> Result<f64, RateError> {
    let denom = gamma_c * (2.0 * kappa - gamma_c);
    if denom <= 0.0 {
        return Err(RateError::DenominatorNonpositive { gamma_c, kappa });
    }
    Ok(gamma / (1.0 + 2.0 * g_b * g_b / denom))
}

/// Three-atom inhibited rate at the third-order coalescence:
/// `gamma (gamma_c / kappa) (2 - gamma_c / kappa)`.
pub fn ep3_rate(gamma: f64, gamma_c: f64, kappa: f64) -> Result<f64, RateError> {
    if !(gamma_c / 2.0 < kappa && kappa < gamma_c) {
        return Err(RateError::OutsideEp3Window { kappa, gamma_c });
    }
    let x = gamma_c / kappa;
    Ok(gamma * x * (2.0 - x))
}

/// Cavity-enhanced decay of a detuned atom: `g_a^2 kappa / (kappa^2 + delta^2)`.
pub fn detuned_rate(g_a: f64, kappa: f64, delta: f64) -> f64 {
    g_a * g_a * kappa / (kappa * kappa + delta * delta)
}

/// Detuned decay modified by a resonant unexcited atom:
/// `g_a^2 Im{ g_b^2/(delta + i gamma_b) - i kappa - delta }^-1`.
pub fn enhanced_detuned_rate(
    g_a: f64,
    g_b: f64,
    gamma_b: f64,
    kappa: f64,
    delta: f64,
) -> Result<f64, RateError> {
    if delta == 0.0 && gamma_b == 0.0 {
        return Err(RateError::PoleAtRealAxis);
    }
    let response = g_b * g_b / C64::new(delta, gamma_b) - C64::new(delta, kappa);
    if response.norm() == 0.0 {
        return Err(RateError::PoleAtRealAxis);
    }
    Ok(g_a * g_a * response.inv().im)
}

/// Same quantity through the polariton energies:
/// `-g_a^2 Im{ (delta + i gamma_b) / ((delta - l_+)(delta - l_-)) }`.
///
/// Kept as an independent route; the two forms must agree to rounding and the
/// test suite enforces that.
pub fn enhanced_detuned_rate_via_polaritons(
    g_a: f64,
    g_b: f64,
    gamma_b: f64,
    kappa: f64,
    delta: f64,
) -> Result<f64, RateError> {
    let (lp, lm) = spectra::polariton_pair(kappa, gamma_b, g_b);
    let denom = (delta - lp) * (delta - lm);
    if denom.norm() == 0.0 {
        return Err(RateError::PoleAtRealAxis);
    }
    Ok(-g_a * g_a * (C64::new(delta, gamma_b) / denom).im)
}

/// Which closed form a prediction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaTag {
    /// Cooperativity inhibition `gamma/(1 + C)`.
    Cooperativity,
    /// Second-order-coalescence form.
    Ep2,
    /// Two unexcited atoms, general coupling.
    ThreeAtom,
    /// Two unexcited atoms at the third-order coalescence.
    Ep3,
    /// Bare detuned decay.
    Detuned,
    /// Detuned decay modified by a resonant unexcited atom.
    DetunedEnhanced,
    /// No closed form applies.
    None,
}

impl FormulaTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulaTag::Cooperativity => "cooperativity",
            FormulaTag::Ep2 => "ep2",
            FormulaTag::ThreeAtom => "three_atom",
            FormulaTag::Ep3 => "ep3",
            FormulaTag::Detuned => "detuned",
            FormulaTag::DetunedEnhanced => "detuned_enhanced",
            FormulaTag::None => "none",
        }
    }
}

impl std::fmt::Display for FormulaTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn approx_eq(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.abs().max(1.0)
}

/// Picks the most specific closed form applicable to a config and evaluates
/// it, returning the predicted amplitude rate of the excited atom.
pub fn closed_form_prediction(cfg: &SystemConfig) -> (FormulaTag, Option<f64>) {
    if cfg.validate().is_err() {
        return (FormulaTag::None, None);
    }
    let kappa = cfg.kappa;
    let a = cfg.atoms[cfg.excited_index()];
    let others: Vec<_> = cfg
        .atoms
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != cfg.excited_index())
        .map(|(_, atom)| *atom)
        .collect();
    let gamma = purcell_rate(a.g, kappa);
    // the closed forms assume the excited atom is otherwise lossless
    if a.gamma != 0.0 {
        return (FormulaTag::None, None);
    }

    match others.as_slice() {
        [] => {
            if a.delta == 0.0 {
                (FormulaTag::Cooperativity, Some(gamma))
            } else {
                (FormulaTag::Detuned, Some(detuned_rate(a.g, kappa, a.delta)))
            }
        }
        [b] if b.delta == 0.0 => {
            if a.delta != 0.0 {
                return match enhanced_detuned_rate(a.g, b.g, b.gamma, kappa, a.delta) {
                    Ok(rate) => (FormulaTag::DetunedEnhanced, Some(rate)),
                    Err(_) => (FormulaTag::None, None),
                };
            }
            if b.g == 0.0 {
                return (FormulaTag::Cooperativity, Some(gamma));
            }
            if b.gamma == 0.0 {
                return (FormulaTag::None, None);
            }
            if let Ok(g_ep) = spectra::ep2_coupling(kappa, b.gamma) {
                if approx_eq(b.g, g_ep, kappa.max(b.gamma)) {
                    return (FormulaTag::Ep2, Some(ep2_rate(gamma, kappa, b.gamma)));
                }
            }
            let c = cooperativity(b.g, b.gamma, kappa).expect("gamma_b > 0 checked");
            (FormulaTag::Cooperativity, Some(inhibited_rate(gamma, c)))
        }
        [b, c]
            if a.delta == 0.0
                && b.delta == 0.0
                && c.delta == 0.0
                && approx_eq(b.g, c.g, b.g.max(c.g))
                && approx_eq(b.gamma + c.gamma, 2.0 * kappa, kappa) =>
        {
            let gamma_c = b.gamma.max(c.gamma);
            if let Ok(p) = spectra::ep3_parameters(kappa, gamma_c) {
                if approx_eq(b.g, p.g_b, kappa) {
                    if let Ok(rate) = ep3_rate(gamma, gamma_c, kappa) {
                        return (FormulaTag::Ep3, Some(rate));
                    }
                }
            }
            match three_atom_rate(gamma, b.g, gamma_c, kappa) {
                Ok(rate) => (FormulaTag::ThreeAtom, Some(rate)),
                Err(_) => (FormulaTag::None, None),
            }
        }
        _ => (FormulaTag::None, None),
    }
}

/// Result of an exponential-decay fit, in the amplitude-rate convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// Fitted amplitude rate (population slope divided by two).
    pub extracted_rate: f64,
    pub fit_window: (f64, f64),
    pub rms_log_residual: f64,
    pub formula: FormulaTag,
    pub closed_form_prediction: Option<f64>,
    /// Signed `(extracted - prediction) / prediction`.
    pub relative_deviation: Option<f64>,
}

impl DecayReport {
    /// Attaches a closed-form prediction and its deviation.
    pub fn with_prediction(mut self, formula: FormulaTag, prediction: Option<f64>) -> Self {
        self.formula = formula;
        self.closed_form_prediction = prediction;
        self.relative_deviation = prediction.map(|p| (self.extracted_rate - p) / p);
        self
    }
}

/// Log-linear least-squares decay fit of one population series.
///
/// The fit window starts where the population has dropped to `exp(-0.5)` of
/// its post-burn-in value and ends at `exp(-3)` of it, with the first
/// `10/kappa` of the trajectory discarded as transient. The fitted population
/// slope is halved into an amplitude rate.
pub fn extract_decay_rate(traj: &Trajectory, state_index: usize) -> Result<DecayReport, RateError> {
    let times = traj.times();
    let pops = &traj.populations()[state_index];
    let t_end = *times.last().expect("nonempty trajectory");
    let window_err = RateError::WindowNotReached { t_end };

    let t_burn = BURN_IN_KAPPA_UNITS / traj.kappa();
    let ib = times
        .iter()
        .position(|&t| t >= t_burn)
        .ok_or(window_err.clone())?;
    let p0 = pops[ib];
    if p0.is_nan() || p0 <= 0.0 {
        return Err(window_err);
    }
    let hi = p0 * (-0.5f64).exp();
    let lo = p0 * (-3.0f64).exp();
    let start = (ib..times.len())
        .find(|&s| pops[s] <= hi)
        .ok_or(window_err.clone())?;
    let end = (start..times.len())
        .find(|&s| pops[s] <= lo)
        .ok_or(window_err.clone())?;
    if end - start + 1 < 8 {
        return Err(window_err);
    }

    let mut pts = Vec::with_capacity(end - start + 1);
    for s in start..=end {
        if pops[s].is_nan() || pops[s] <= 0.0 {
            return Err(RateError::OscillatoryResidual { rms: f64::INFINITY });
        }
        pts.push((times[s], pops[s].ln()));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum::<f64>();
    let sty = pts
        .iter()
        .map(|p| (p.0 - mean_t) * (p.1 - mean_y))
        .sum::<f64>();
    let slope = sty / stt;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - (mean_y + slope * (p.0 - mean_t))).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if rms > MAX_LOG_RESIDUAL {
        return Err(RateError::OscillatoryResidual { rms });
    }
    if slope >= 0.0 {
        return Err(RateError::OscillatoryResidual { rms });
    }
    Ok(DecayReport {
        extracted_rate: -slope / 2.0,
        fit_window: (times[start], times[end]),
        rms_log_residual: rms,
        formula: FormulaTag::None,
        closed_form_prediction: None,
        relative_deviation: None,
    })
}

/// Runs the master equation and fits the excited atom's population, attaching
/// the applicable closed-form prediction.
pub fn decay_report(cfg: &SystemConfig, traj: &Trajectory) -> Result<DecayReport, RateError> {
    let report = extract_decay_rate(traj, cfg.excited_index())?;
    let (tag, prediction) = closed_form_prediction(cfg);
    Ok(report.with_prediction(tag, prediction))
}

/// Slow decay mode selected by eigenvector weight on the excited atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowMode {
    /// Amplitude decay rate `-Im lambda` of the selected mode.
    pub rate: f64,
    /// `|<excited atom | eigenvector>|`, the selection confidence.
    pub overlap: f64,
    #[serde(serialize_with = "crate::serialize::complex")]
    pub eigenvalue: C64,
}

/// Picks the eigenmode carrying the excited atom and returns its decay rate.
///
/// Selection is by eigenvector overlap with the excited direction rather than
/// by smallest damping: with a long-lived polariton the least-damped mode can
/// be the wrong one.
pub fn slow_mode_rate(m: &EffectiveMatrix, excited_index: usize) -> Result<SlowMode, RateError> {
    let spec = spectra::eigenpairs(m)?;
    let overlaps: Vec<f64> = (0..spec.dim())
        .map(|k| spec.eigenvector(k)[excited_index].norm())
        .collect();
    let mut order: Vec<usize> = (0..overlaps.len()).collect();
    order.sort_by(|&i, &j| overlaps[j].partial_cmp(&overlaps[i]).unwrap());
    let best = order[0];
    if order.len() > 1 {
        let second = order[1];
        if overlaps[best] - overlaps[second] < 0.01 * overlaps[best] {
            return Err(RateError::AmbiguousSlowMode {
                best: overlaps[best],
                second: overlaps[second],
            });
        }
    }
    Ok(SlowMode {
        rate: -spec.eigenvalues()[best].im,
        overlap: overlaps[best],
        eigenvalue: spec.eigenvalues()[best],
    })
}

/// Default run length for rate fits: `50 / predicted_rate`, long enough that
/// the fit window closes with a wide margin.
pub fn recommended_t_end(predicted_rate: f64) -> f64 {
    50.0 / predicted_rate
}
