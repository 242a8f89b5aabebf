//! Reduced density matrices and the Schmidt decomposition of bipartite pure states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::state::{dot, StateVector, SubsystemSplit};

/// Schmidt coefficients below this are counted as zero for the rank.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Which side of a bipartite split to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Density matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity (eigenvalues ≥ -1e-10).
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{dim}x{dim} density matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for k in 0..dim {
            for l in k..dim {
                if (entries[k * dim + l] - entries[l * dim + k].conj()).norm() > 1e-12 {
                    return Err(Error::Matrix(format!("entry ({k},{l}) breaks Hermiticity")));
                }
            }
        }
        let m = Self { dim, entries };
        let trace = m.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::Matrix(format!("trace is {trace}, expected 1")));
        }
        let eig = m.eig()?;
        if let Some(&low) = eig.values.last() {
            if low < -1e-10 {
                return Err(Error::Matrix(format!("negative eigenvalue {low:e}")));
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.entries[k * self.dim + k].re).sum()
    }

    pub fn eig(&self) -> Result<HermitianEigen> {
        hermitian_eig(self)
    }
}

/// Eigendecomposition with eigenvalues in descending order.
pub fn hermitian_eig(m: &DensityMatrix) -> Result<HermitianEigen> {
    linalg::hermitian_eig(m.dim, &m.entries)
}

fn require_bipartite(split: &SubsystemSplit) -> Result<(usize, usize)> {
    match split.factor_dims() {
        &[u, v] => Ok((u, v)),
        dims => Err(Error::Split(format!(
            "operation needs a bipartite split, got {} factors",
            dims.len()
        ))),
    }
}

/// Coefficient matrix `γ[i][j]` (row-major `u × v`) of `psi` under a bipartite split.
pub fn coefficient_matrix(psi: &StateVector, split: &SubsystemSplit) -> Result<(usize, usize, Vec<Complex64>)> {
    let (u, v) = require_bipartite(split)?;
    Ok((u, v, split.arrange(psi)?))
}

/// `(ρ_A)_{kl} = Σ_t χ_{kt} χ*_{lt}` or `(ρ_B)_{qr} = Σ_t χ_{tq} χ*_{tr}`.
pub fn reduced_density_matrix(psi: &StateVector, split: &SubsystemSplit, keep: Keep) -> Result<DensityMatrix> {
    psi.require_normalized()?;
    let (u, v, chi) = coefficient_matrix(psi, split)?;
    let entries = match keep {
        Keep::A => gram(&chi, u, v, |k, t| k * v + t),
        Keep::B => gram(&chi, v, u, |q, t| t * v + q),
    };
    let dim = if keep == Keep::A { u } else { v };
    Ok(DensityMatrix { dim, entries })
}

/// `m[k][l] = Σ_t x[idx(k,t)] conj(x[idx(l,t)])`, filled Hermitian from the upper triangle.
fn gram(x: &[Complex64], dim: usize, inner: usize, idx: impl Fn(usize, usize) -> usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        for l in k..dim {
            let s: Complex64 = (0..inner).map(|t| x[idx(k, t)] * x[idx(l, t)].conj()).sum();
            m[k * dim + l] = s;
            m[l * dim + k] = s.conj();
        }
        m[k * dim + k].im = 0.0;
    }
    m
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SchmidtResult {
    /// `p_k`, descending; `min(u, v)` entries.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<Vec<Complex64>>,
    pub right_basis: Vec<Vec<Complex64>>,
    pub entropy_bits: f64,
    pub entropy_nats: f64,
    pub participation: f64,
    pub rank: usize,
    /// Largest eigenvalue cluster has gap below 1e-10 (basis within it is arbitrary).
    pub degenerate_top: bool,
}

impl SchmidtResult {
    /// `Σ_k √p_k |α_k⟩⊗|β_k⟩` in the split's factor-ordered layout.
    pub fn reconstruct_arranged(&self) -> Vec<Complex64> {
        let u = self.left_basis.first().map_or(0, Vec::len);
        let v = self.right_basis.first().map_or(0, Vec::len);
        let mut out = vec![Complex64::new(0.0, 0.0); u * v];
        for (k, &p) in self.coefficients.iter().enumerate() {
            let w = p.max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            for i in 0..u {
                let a = w * self.left_basis[k][i];
                for j in 0..v {
                    out[i * v + j] += a * self.right_basis[k][j];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self, split: &SubsystemSplit) -> Result<StateVector> {
        split.restore(&self.reconstruct_arranged())
    }
}

/// Schmidt decomposition via the eigenvectors of `ρ_A`. Each `β_k` is the
/// contraction `(⟨α_k| ⊗ 1)|ψ⟩ / √p_k`, so the relative phases reproduce `ψ`.
pub fn schmidt_decompose(psi: &StateVector, split: &SubsystemSplit) -> Result<SchmidtResult> {
    let rho_a = reduced_density_matrix(psi, split, Keep::A)?;
    let (u, v, chi) = coefficient_matrix(psi, split)?;
    let eig = rho_a.eig()?;
    let r = u.min(v);

    let coefficients: Vec<f64> = eig.values[..r].to_vec();
    let left_basis: Vec<Vec<Complex64>> = eig.vectors[..r].to_vec();
    let mut right_basis: Vec<Vec<Complex64>> = Vec::with_capacity(r);
    for k in 0..r {
        let alpha = &left_basis[k];
        let mut beta: Vec<Complex64> = (0..v)
            .map(|j| (0..u).map(|i| alpha[i].conj() * chi[i * v + j]).sum())
            .collect();
        let mut usable = coefficients[k] >= RANK_CUTOFF;
        if usable {
            for prev in &right_basis {
                let o = dot(prev, &beta);
                for (b, p) in beta.iter_mut().zip(prev) {
                    *b -= o * p;
                }
            }
            let n = norm(&beta);
            usable = n > 0.0;
            if usable {
                beta.iter_mut().for_each(|b| *b /= n);
            }
        }
        if !usable {
            beta = complete_basis(&right_basis, v);
        }
        right_basis.push(beta);
    }

    let clamped: Vec<f64> = coefficients.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let normalized: Vec<f64> = clamped.iter().map(|p| p / total).collect();
    let entropy_bits = entropy_bits(&normalized)?;
    let degenerate_top = coefficients.len() > 1 && coefficients[0] - coefficients[1] < 1e-10;
    Ok(SchmidtResult {
        rank: coefficients.iter().filter(|&&p| p >= RANK_CUTOFF).count(),
        participation: participation(&normalized)?,
        entropy_nats: entropy_bits * std::f64::consts::LN_2,
        entropy_bits,
        degenerate_top,
        coefficients,
        left_basis,
        right_basis,
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A unit vector orthogonal to every vector of `basis` (Gram–Schmidt over the standard basis).
pub(crate) fn complete_basis(basis: &[Vec<Complex64>], dim: usize) -> Vec<Complex64> {
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for e in 0..dim {
        let mut cand = vec![Complex64::new(0.0, 0.0); dim];
        cand[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let o = dot(b, &cand);
                for (c, x) in cand.iter_mut().zip(b) {
                    *c -= o * x;
                }
            }
        }
        let n = norm(&cand);
        if n > 0.5 {
            cand.iter_mut().for_each(|c| *c /= n);
            return cand;
        }
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, cand));
        }
    }
    let (n, mut cand) = best.expect("dimension is positive");
    cand.iter_mut().for_each(|c| *c /= n);
    cand
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|&&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::Domain(format!("coefficient {bad} is negative or not finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!("coefficients sum to {total}, expected 1")));
    }
    Ok(())
}

/// `S = -Σ p_k log₂ p_k` with `0 log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    let s: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    Ok(s.max(0.0))
}

/// Participation number `K = 1/Σ p_k²`.
pub fn participation(p: &[f64]) -> Result<f64> {
    if p.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("participation of an all-zero distribution".into()));
    }
    check_distribution(p)?;
    let s: f64 = p.iter().map(|&x| x.max(0.0).powi(2)).sum();
    Ok(1.0 / s)
}

/// Closed form for a qubit factor against the rest.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct QubitSplitResult {
    /// `C = Σ_{j>k} |χ_{0j}χ_{1k} - χ_{1j}χ_{0k}|²`.
    pub concurrence_sq: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Angle with `cos θ_max = μ₊`.
    pub theta_max: f64,
    /// Angle with `cos θ = √μ₊`, i.e. the Schmidt amplitude form.
    pub theta_max_amplitude: f64,
}

/// Roots `μ± = ½[1 ± √(1-4C)]` of the quadratic for a `(2, u)` split.
pub fn qubit_split_closed_form(psi: &StateVector, split: &SubsystemSplit) -> Result<QubitSplitResult> {
    let (q, u, chi) = coefficient_matrix(psi, split)?;
    if q != 2 {
        return Err(Error::Split(format!(
            "closed form needs a qubit first factor, got dimension {q}"
        )));
    }
    psi.require_normalized()?;
    let mut c = 0.0;
    for j in 1..u {
        for k in 0..j {
            let minor = chi[j] * chi[u + k] - chi[u + j] * chi[k];
            c += minor.norm_sqr();
        }
    }
    let disc = (1.0 - 4.0 * c).max(0.0).sqrt();
    let mu_plus = 0.5 * (1.0 + disc);
    let mu_minus = 0.5 * (1.0 - disc);
    Ok(QubitSplitResult {
        concurrence_sq: c,
        mu_plus,
        mu_minus,
        theta_max: mu_plus.clamp(-1.0, 1.0).acos(),
        theta_max_amplitude: mu_plus.sqrt().clamp(0.0, 1.0).acos(),
    })
}
