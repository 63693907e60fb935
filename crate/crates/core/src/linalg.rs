//! Small dense complex linear algebra: LU solves for inverse iteration and a
//! Jacobi eigensolver for Hermitian matrices. Everything here targets
//! dimensions below ten; no blocking, no pivot growth heroics.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64 as C64;

/// Maximum column-sum norm.
pub fn one_norm(a: &ArrayView2<C64>) -> f64 {
    let n = a.ncols();
    (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `a x = b` by LU with partial pivoting on a local copy of `a`.
///
/// Pivots smaller in magnitude than `pivot_floor` are replaced by a value of
/// that magnitude (same complex phase), which turns solves against singular
/// shifts into large but finite null-direction amplifiers. Pass `0.0` to get
/// the unmodified factorization.
pub fn solve(a: &ArrayView2<C64>, b: &[C64], pivot_floor: f64) -> Array1<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    assert_eq!(n, b.len(), "rhs length mismatch");
    let mut lu = a.to_owned();
    let mut x: Vec<C64> = b.to_vec();

    for k in 0..n {
        let (mut p, mut best) = (k, lu[[k, k]].norm());
        for r in k + 1..n {
            let m = lu[[r, k]].norm();
            if m > best {
                best = m;
                p = r;
            }
        }
        if p != k {
            for c in 0..n {
                let tmp = lu[[k, c]];
                lu[[k, c]] = lu[[p, c]];
                lu[[p, c]] = tmp;
            }
            x.swap(k, p);
        }
        let mut piv = lu[[k, k]];
        if piv.norm() < pivot_floor {
            piv = if piv.norm() == 0.0 {
                C64::new(pivot_floor, 0.0)
            } else {
                piv * (pivot_floor / piv.norm())
            };
            lu[[k, k]] = piv;
        }
        for r in k + 1..n {
            let factor = lu[[r, k]] / piv;
            lu[[r, k]] = factor;
            for c in k + 1..n {
                let sub = factor * lu[[k, c]];
                lu[[r, c]] -= sub;
            }
            let sub = factor * x[k];
            x[r] -= sub;
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in k + 1..n {
            acc -= lu[[k, c]] * x[c];
        }
        x[k] = acc / lu[[k, k]];
    }
    Array1::from(x)
}

/// Reciprocal 1-norm condition number, `1 / (||A||_1 * ||A^-1||_1)`.
///
/// Returns 0 when the inverse overflows or is not finite, which is how
/// defective eigenvector matrices announce themselves.
pub fn rcond_one(a: &ArrayView2<C64>) -> f64 {
    let n = a.nrows();
    let norm_a = one_norm(a);
    if norm_a == 0.0 {
        return 0.0;
    }
    let mut inv = Array2::<C64>::zeros((n, n));
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = solve(a, &e, 0.0);
        e[j] = C64::new(0.0, 0.0);
        if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return 0.0;
        }
        inv.column_mut(j).assign(&col);
    }
    let norm_inv = one_norm(&inv.view());
    if norm_inv == 0.0 || !norm_inv.is_finite() {
        return 0.0;
    }
    1.0 / (norm_a * norm_inv)
}

/// All eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returned ascending. Accuracy is a small multiple of machine epsilon times
/// the matrix norm, which is what the density-matrix positivity checks need.
pub fn hermitian_eigenvalues(a: &ArrayView2<C64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    let mut m = a.to_owned();

    let off = |m: &Array2<C64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[[i, j]].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let scale = one_norm(a).max(1e-300);

    for _sweep in 0..40 {
        if off(&m) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = m[[p, q]];
                let babs = b.norm();
                if babs <= 1e-300 {
                    continue;
                }
                let phase = b / babs;
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * planar rotation [[c, s], [-s, c]]
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -s * phase.conj();
                let uqq = c * phase.conj();
                for r in 0..n {
                    let mp = m[[r, p]];
                    let mq = m[[r, q]];
                    m[[r, p]] = mp * upp + mq * uqp;
                    m[[r, q]] = mp * upq + mq * uqq;
                }
                for cidx in 0..n {
                    let mp = m[[p, cidx]];
                    let mq = m[[q, cidx]];
                    m[[p, cidx]] = upp.conj() * mp + uqp.conj() * mq;
                    m[[q, cidx]] = upq.conj() * mp + uqq.conj() * mq;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}
