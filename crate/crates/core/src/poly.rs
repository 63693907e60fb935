//! Complex polynomial root finding by Aberth-Ehrlich simultaneous iteration.
//!
//! Coefficients are stored in ascending powers. Degrees stay below ten here,
//! so every sweep is cheap and the iteration simply runs until the residual
//! criterion holds for every root.
//!
//! Roots of multiplicity m extracted from rounded coefficients scatter like
//! eps^(1/m), which would blur an exact triple eigenvalue to ~1e-5. The
//! cluster-collapse pass below recovers such roots to near machine precision
//! by Newton iteration on the (m-1)-th derivative, and only commits the
//! collapse when the residual at the candidate is consistent with an exact
//! m-fold root.

use num_complex::Complex64 as C64;
use thiserror::Error;

const MAX_SWEEPS: usize = 500;
/// Residual acceptance in units of the Horner rounding floor `n eps scale`;
/// roots are polished until evaluation noise is all that is left.
const RESIDUAL_NOISE_UNITS: f64 = 4.0;
const CORRECTION_TOL: f64 = 4.0 * f64::EPSILON;
/// Single-linkage distance (relative to 1 + |z|) for multiple-root candidates.
const CLUSTER_LINK: f64 = 1e-3;
/// Residual budget, in units of eval rounding, below which a cluster is
/// accepted as an exact multiple root.
const COLLAPSE_NOISE_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("root iteration did not converge within {MAX_SWEEPS} sweeps")]
pub struct NoConvergence;

/// Horner evaluation; returns the value and the rounding majorant
/// `sum_k |c_k| |z|^k` that calibrates "as small as noise allows".
pub fn eval_with_scale(coeffs: &[C64], z: C64) -> (C64, f64) {
    let mut value = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    let zabs = z.norm();
    for c in coeffs.iter().rev() {
        value = value * z + c;
        scale = scale * zabs + c.norm();
    }
    (value, scale)
}

pub fn eval(coeffs: &[C64], z: C64) -> C64 {
    eval_with_scale(coeffs, z).0
}

/// Coefficients of the derivative polynomial.
pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// All complex roots of the polynomial with the given ascending coefficients.
///
/// The leading coefficient must be nonzero; the polynomial is normalized to
/// monic internally. Residuals satisfy `|p(root)| <= 1e-13 * scale(root)` on
/// return, and confirmed multiple roots are collapsed to a common value.
pub fn all_roots(coeffs: &[C64]) -> Result<Vec<C64>, NoConvergence> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    if degree == 1 {
        return Ok(vec![-monic[0]]);
    }
    let deriv = derivative(&monic);

    // Initial guesses on a circle around the root centroid, radius from the
    // Cauchy bound, angles offset to avoid symmetry locking.
    let center = -monic[degree - 1] / degree as f64;
    let radius = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<C64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.39;
            center + C64::new(0.0, angle).exp() * (0.5 * radius)
        })
        .collect();

    let noise_floor = |scale: f64| RESIDUAL_NOISE_UNITS * degree as f64 * f64::EPSILON * scale;
    let mut done = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut all_converged = true;
        for k in 0..degree {
            let z = roots[k];
            let (p, scale) = eval_with_scale(&monic, z);
            if p.norm() <= noise_floor(scale) {
                continue;
            }
            let pd = eval(&deriv, z);
            let newton = if pd.norm() > 0.0 {
                p / pd
            } else {
                // stationary point: sidestep and retry next sweep
                all_converged = false;
                roots[k] = z + C64::new(1e-6 * (1.0 + z.norm()), 1e-6);
                continue;
            };
            let mut repulsion = C64::new(0.0, 0.0);
            for (j, &other) in roots.iter().enumerate() {
                if j != k && (z - other).norm() > 1e-300 {
                    repulsion += 1.0 / (z - other);
                }
            }
            let denom = C64::new(1.0, 0.0) - newton * repulsion;
            let correction = if denom.norm() > 1e-12 {
                newton / denom
            } else {
                newton
            };
            roots[k] = z - correction;
            if correction.norm() > CORRECTION_TOL * (1.0 + roots[k].norm()) {
                all_converged = false;
            }
        }
        if all_converged {
            done = true;
            break;
        }
    }
    if !done {
        // Accept the sweep-limited roots only if every residual is at the
        // noise criterion already (stagnation near multiple roots).
        let ok = roots.iter().all(|&z| {
            let (p, scale) = eval_with_scale(&monic, z);
            p.norm() <= noise_floor(scale)
        });
        if !ok {
            return Err(NoConvergence);
        }
    }

    collapse_multiple_roots(&monic, &mut roots);
    Ok(roots)
}

/// Groups root approximations by single linkage and, where the coefficients
/// are consistent with an exact m-fold root, replaces the whole group by the
/// simple root of the (m-1)-th derivative.
fn collapse_multiple_roots(monic: &[C64], roots: &mut [C64]) {
    let n = roots.len();
    if n < 2 {
        return;
    }
    let mut group = vec![usize::MAX; n];
    let mut n_groups = 0;
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = n_groups;
        // grow the cluster transitively
        let mut changed = true;
        while changed {
            changed = false;
            for j in 0..n {
                if group[j] != usize::MAX {
                    continue;
                }
                let linked = (0..n).any(|k| {
                    group[k] == n_groups
                        && (roots[j] - roots[k]).norm() <= CLUSTER_LINK * (1.0 + roots[k].norm())
                });
                if linked {
                    group[j] = n_groups;
                    changed = true;
                }
            }
        }
        n_groups += 1;
    }

    for gid in 0..n_groups {
        let members: Vec<usize> = (0..n).filter(|&i| group[i] == gid).collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mean = members.iter().map(|&i| roots[i]).sum::<C64>() / m as f64;
        // Newton on p^(m-1), which has a simple (hence well-conditioned) root
        // at an exact m-fold root of p.
        let mut q = monic.to_vec();
        for _ in 0..m - 1 {
            q = derivative(&q);
        }
        let qd = derivative(&q);
        let mut z = mean;
        let mut ok = false;
        for _ in 0..64 {
            let qv = eval(&q, z);
            let qdv = eval(&qd, z);
            if qdv.norm() == 0.0 {
                break;
            }
            let step = qv / qdv;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
                ok = true;
                break;
            }
        }
        if !ok || (z - mean).norm() > 10.0 * CLUSTER_LINK * (1.0 + mean.norm()) {
            continue;
        }
        let (p, scale) = eval_with_scale(monic, z);
        let noise = COLLAPSE_NOISE_FACTOR * (n as f64) * f64::EPSILON * scale;
        if p.norm() <= noise {
            for &i in &members {
                roots[i] = z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sort_by_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn cubic_with_real_roots() {
        // (z-1)(z-2)(z-3) = z^3 - 6 z^2 + 11 z - 6
        let coeffs = [c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)];
        let roots = sort_by_re(all_roots(&coeffs).unwrap());
        for (root, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((root - c(want, 0.0)).norm() < 1e-12, "{root} vs {want}");
        }
    }

    #[test]
    fn quadratic_imaginary_pair() {
        let coeffs = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let mut roots = all_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((roots[0] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((roots[1] - c(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn linear_polynomial() {
        let coeffs = [c(3.0, -1.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - c(-3.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn double_root_collapses_exactly() {
        // (z-2)^2 = z^2 - 4z + 4
        let coeffs = [c(4.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs).unwrap();
        assert_eq!(roots[0], roots[1]);
        assert!((roots[0] - c(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn triple_root_recovered_to_machine_precision() {
        // (z+i)^3 = z^3 + 3i z^2 - 3 z - i
        let coeffs = [c(0.0, -1.0), c(-3.0, 0.0), c(0.0, 3.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs).unwrap();
        for root in &roots {
            assert!(
                (root - c(0.0, -1.0)).norm() < 1e-12,
                "triple root not collapsed: {root}"
            );
        }
    }

    #[test]
    fn nearby_but_distinct_roots_not_collapsed() {
        // (z-1)(z-1-1e-4): separation well above the collapse noise floor
        let a = c(1.0, 0.0);
        let b = c(1.0 + 1e-4, 0.0);
        let coeffs = [a * b, -(a + b), c(1.0, 0.0)];
        let roots = sort_by_re(all_roots(&coeffs).unwrap());
        let gap = (roots[1] - roots[0]).norm();
        assert!((gap - 1e-4).abs() < 1e-9, "gap {gap}");
    }

    #[test]
    fn residuals_meet_documented_bound() {
        let coeffs = [
            c(0.3, -2.0),
            c(-1.5, 0.7),
            c(0.0, 4.0),
            c(2.0, -0.1),
            c(-0.8, 0.0),
            c(1.0, 0.0),
        ];
        for root in all_roots(&coeffs).unwrap() {
            let (p, scale) = eval_with_scale(&coeffs, root);
            assert!(p.norm() <= 1e-13 * scale, "residual {} at {root}", p.norm());
        }
    }
}
