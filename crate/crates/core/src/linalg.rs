//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq = r e^{iφ}` with
//! `diag(1, e^{-iφ})`, then applies the real symmetric Jacobi rotation that
//! annihilates the resulting real off-diagonal entry. Sweeps continue until the
//! off-diagonal Frobenius norm drops to `1e-13 · dim · ‖A‖_F`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `|a_kl - conj(a_lk)|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`; its largest-magnitude
    /// component is real and positive.
    pub vectors: Vec<Vec<Complex64>>,
    pub sweeps: usize,
}

/// Eigendecomposition of the row-major `dim × dim` Hermitian matrix `entries`.
pub fn hermitian_eig(dim: usize, entries: &[Complex64]) -> Result<HermitianEigen> {
    if entries.len() != dim * dim {
        return Err(Error::Shape(format!(
            "{dim}x{dim} matrix needs {} entries, got {}",
            dim * dim,
            entries.len()
        )));
    }
    if dim == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: vec![],
            sweeps: 0,
        });
    }
    let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for k in 0..dim {
        for l in k..dim {
            let dev = (entries[k * dim + l] - entries[l * dim + k].conj()).norm();
            if dev > HERMITIAN_TOL * scale || !dev.is_finite() {
                return Err(Error::Matrix(format!(
                    "matrix is not Hermitian: |a[{k}][{l}] - conj(a[{l}][{k}])| = {dev:e}"
                )));
            }
        }
    }

    // Symmetrize from the upper triangle; keep the diagonal real.
    let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        a[k * dim + k] = Complex64::new(entries[k * dim + k].re, 0.0);
        for l in k + 1..dim {
            let z = 0.5 * (entries[k * dim + l] + entries[l * dim + k].conj());
            a[k * dim + l] = z;
            a[l * dim + k] = z.conj();
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        v[k * dim + k] = Complex64::new(1.0, 0.0);
    }

    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOL * dim as f64 * frob;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, dim);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Matrix(format!(
                "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps (off-diagonal norm {off:e})"
            )));
        }
        sweeps += 1;
        for p in 0..dim {
            for q in p + 1..dim {
                rotate(&mut a, &mut v, dim, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[j * dim + j].re.total_cmp(&a[i * dim + i].re));
    let values = order.iter().map(|&i| a[i * dim + i].re).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<Complex64> = (0..dim).map(|r| v[r * dim + col]).collect();
            fix_phase(&mut vec);
            vec
        })
        .collect();
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm(a: &[Complex64], dim: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..dim {
        for l in 0..dim {
            if k != l {
                s += a[k * dim + l].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates the unitary into `v`.
fn rotate(a: &mut [Complex64], v: &mut [Complex64], dim: usize, p: usize, q: usize) {
    let apq = a[p * dim + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p * dim + p].re;
    let aqq = a[q * dim + q].re;
    // skip pivots already negligible against both diagonal entries
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[p * dim + q] = Complex64::new(0.0, 0.0);
        a[q * dim + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G on (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let g_qp = -s * phase.conj();
    let g_qq = c * phase.conj();

    // A <- A G (columns)
    for k in 0..dim {
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        a[k * dim + p] = c * akp + g_qp * akq;
        a[k * dim + q] = s * akp + g_qq * akq;
    }
    // A <- G^† A (rows)
    for k in 0..dim {
        let apk = a[p * dim + k];
        let aqk = a[q * dim + k];
        a[p * dim + k] = c * apk + g_qp.conj() * aqk;
        a[q * dim + k] = s * apk + g_qq.conj() * aqk;
    }
    a[p * dim + q] = Complex64::new(0.0, 0.0);
    a[q * dim + p] = Complex64::new(0.0, 0.0);
    a[p * dim + p].im = 0.0;
    a[q * dim + q].im = 0.0;
    // V <- V G
    for k in 0..dim {
        let vkp = v[k * dim + p];
        let vkq = v[k * dim + q];
        v[k * dim + p] = c * vkp + g_qp * vkq;
        v[k * dim + q] = s * vkp + g_qq * vkq;
    }
}

/// Rotates `vec` so its largest-magnitude component is real and positive
/// (first such component on ties).
pub(crate) fn fix_phase(vec: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in vec.iter().enumerate() {
        let n = z.norm();
        if n > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = n;
        }
    }
    if best_norm <= 0.0 {
        return;
    }
    let phase = vec[best].conj() / best_norm;
    for z in vec.iter_mut() {
        *z *= phase;
    }
    vec[best] = Complex64::new(vec[best].re, 0.0);
}
