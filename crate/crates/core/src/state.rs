//! Pure states as complex amplitude tensors.
//!
//! A [`StateVector`] stores amplitudes in row-major (big-endian) order over its
//! declared subsystem dimensions: the first subsystem is the slowest-varying
//! index. A [`SubsystemSplit`] groups those subsystems into the factors of a
//! product-state problem; factor multi-indices are row-major over the factor
//! dimensions in declared order.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on `|<psi|psi> - 1|` for a state to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Shape(format!(
                "dimensions must be a non-empty list of positive integers, got {dims:?}"
            )));
        }
        let n = checked_product(&dims)?;
        if n != amps.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} require {n} amplitudes, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Domain("amplitudes must be finite".into()));
        }
        Ok(Self { dims, amps })
    }

    /// Computational basis state `|index>` in row-major order.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = checked_product(&dims)?;
        if index >= n {
            return Err(Error::Index {
                position: 0,
                index,
                dim: n,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `qubits` qubits.
    pub fn ghz(qubits: usize) -> Self {
        let n = 1usize << qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(h, 0.0);
        amps[n - 1] = Complex64::new(h, 0.0);
        Self {
            dims: vec![2; qubits],
            amps,
        }
    }

    /// Equal superposition of all single-excitation basis states.
    pub fn w(qubits: usize) -> Self {
        let n = 1usize << qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        let c = 1.0 / (qubits as f64).sqrt();
        for q in 0..qubits {
            amps[1 << q] = Complex64::new(c, 0.0);
        }
        Self {
            dims: vec![2; qubits],
            amps,
        }
    }

    /// Haar-random normalized state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<Self> {
        let n = checked_product(&dims)?;
        let amps: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
        Self::new(dims, amps)?.normalized()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::Normalization {
                norm_sq: self.norm_sq(),
            })
        }
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sq().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize the zero state".into()));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(self)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Tensor product `self ⊗ other`; the subsystem lists are concatenated.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { dims, amps }
    }

    /// Applies `op` (row-major `d × d`, `d = factor_dims[factor]`) to one factor of `split`.
    pub fn apply_local(
        &self,
        split: &SubsystemSplit,
        factor: usize,
        op: &[Complex64],
    ) -> Result<StateVector> {
        split.check_state(self)?;
        let d = split.factor_dim(factor)?;
        if op.len() != d * d {
            return Err(Error::Shape(format!(
                "operator on a {d}-dimensional factor needs {} entries, got {}",
                d * d,
                op.len()
            )));
        }
        let arranged = split.arrange(self)?;
        let fd = split.factor_dims();
        let inner: usize = fd[factor + 1..].iter().product();
        let outer: usize = fd[..factor].iter().product();
        let mut out = vec![Complex64::new(0.0, 0.0); arranged.len()];
        for o in 0..outer {
            for r in 0..d {
                for c in 0..d {
                    let m = op[r * d + c];
                    if m == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let dst = (o * d + r) * inner;
                    let src = (o * d + c) * inner;
                    for t in 0..inner {
                        out[dst + t] += m * arranged[src + t];
                    }
                }
            }
        }
        split.restore(&out)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector(dims={:?}, [", self.dims)?;
        for (i, a) in self.amps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "])")
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or_else(|| {
        Error::Size(format!("dimension product of {dims:?} overflows"))
    })
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Grouping of a state's subsystems into the factors `A, B, C, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemSplit {
    subsystem_dims: Vec<usize>,
    groups: Vec<Vec<usize>>,
    factor_dims: Vec<usize>,
}

impl SubsystemSplit {
    /// `groups` must partition `0..subsystem_dims.len()` into at least two
    /// non-empty groups, each with total dimension at least 2.
    pub fn new(subsystem_dims: &[usize], groups: Vec<Vec<usize>>) -> Result<Self> {
        let k = subsystem_dims.len();
        if groups.len() < 2 {
            return Err(Error::Split(format!(
                "need at least two factors, got {}",
                groups.len()
            )));
        }
        let mut seen = vec![false; k];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::Split("empty factor group".into()));
            }
            for &s in g {
                if s >= k {
                    return Err(Error::Split(format!(
                        "subsystem {s} does not exist (state has {k})"
                    )));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::Split(format!("subsystem {s} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::Split(format!("subsystem {missing} is not assigned")));
        }
        let factor_dims: Vec<usize> = groups
            .iter()
            .map(|g| g.iter().map(|&s| subsystem_dims[s]).product())
            .collect();
        if let Some(f) = factor_dims.iter().position(|&d| d < 2) {
            return Err(Error::Split(format!(
                "factor {f} has dimension {}; dimension-1 factors are not allowed",
                factor_dims[f]
            )));
        }
        Ok(Self {
            subsystem_dims: subsystem_dims.to_vec(),
            groups,
            factor_dims,
        })
    }

    /// Every subsystem is its own factor.
    pub fn each_subsystem(subsystem_dims: &[usize]) -> Result<Self> {
        Self::new(subsystem_dims, (0..subsystem_dims.len()).map(|s| vec![s]).collect())
    }

    /// Two factors: `left` (in the given order) and the remaining subsystems.
    pub fn bipartite(subsystem_dims: &[usize], left: &[usize]) -> Result<Self> {
        let right: Vec<usize> = (0..subsystem_dims.len())
            .filter(|s| !left.contains(s))
            .collect();
        Self::new(subsystem_dims, vec![left.to_vec(), right])
    }

    /// Parses `"0,1|2"`: subsystem indices separated by `,`, factors by `|`.
    pub fn parse(spec: &str, subsystem_dims: &[usize]) -> Result<Self> {
        let groups = spec
            .split('|')
            .map(|g| {
                g.split(',')
                    .map(|s| {
                        s.trim().parse::<usize>().map_err(|_| {
                            Error::Split(format!("cannot parse subsystem index {s:?} in {spec:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(subsystem_dims, groups)
    }

    /// Bipartite split `(factor | all other factors in order)`.
    pub fn peel(&self, factor: usize) -> Result<Self> {
        self.factor_dim(factor)?;
        let rest: Vec<usize> = self
            .groups
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != factor)
            .flat_map(|(_, g)| g.iter().copied())
            .collect();
        Self::new(&self.subsystem_dims, vec![self.groups[factor].clone(), rest])
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn num_factors(&self) -> usize {
        self.groups.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn factor_dim(&self, factor: usize) -> Result<usize> {
        self.factor_dims.get(factor).copied().ok_or(Error::Label {
            label: factor,
            factors: self.groups.len(),
        })
    }

    /// True when factors are the subsystems in declared order (no permutation needed).
    pub fn is_contiguous(&self) -> bool {
        self.groups.iter().flatten().copied().eq(0..self.subsystem_dims.len())
    }

    pub fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.dims() != self.subsystem_dims.as_slice() {
            return Err(Error::Shape(format!(
                "state dims {:?} do not match split dims {:?}",
                psi.dims(),
                self.subsystem_dims
            )));
        }
        Ok(())
    }

    /// Row-major flat index of a factor multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        flat_index(multi, &self.factor_dims)
    }

    /// Inverse of [`SubsystemSplit::flat_index`].
    pub fn multi_index(&self, flat: usize) -> Result<Vec<usize>> {
        multi_index(flat, &self.factor_dims)
    }

    /// Amplitudes reordered so the flat index is row-major over the factors
    /// (and within a factor, over its subsystems in group order).
    pub fn arrange(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        self.check_state(psi)?;
        if self.is_contiguous() {
            return Ok(psi.amplitudes().to_vec());
        }
        let map = self.layout_map();
        Ok(map.iter().map(|&orig| psi.amplitudes()[orig]).collect())
    }

    /// Inverse of [`SubsystemSplit::arrange`]: factor-ordered amplitudes back to a state.
    pub fn restore(&self, arranged: &[Complex64]) -> Result<StateVector> {
        if arranged.len() != self.total_dim() {
            return Err(Error::Shape(format!(
                "expected {} amplitudes, got {}",
                self.total_dim(),
                arranged.len()
            )));
        }
        if self.is_contiguous() {
            return StateVector::new(self.subsystem_dims.clone(), arranged.to_vec());
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); arranged.len()];
        for (k, &orig) in self.layout_map().iter().enumerate() {
            amps[orig] = arranged[k];
        }
        StateVector::new(self.subsystem_dims.clone(), amps)
    }

    /// `map[k]` = original flat index of the `k`-th factor-ordered amplitude.
    fn layout_map(&self) -> Vec<usize> {
        let order: Vec<usize> = self.groups.iter().flatten().copied().collect();
        let ordered_dims: Vec<usize> = order.iter().map(|&s| self.subsystem_dims[s]).collect();
        let k = self.subsystem_dims.len();
        let mut orig_strides = vec![1usize; k];
        for s in (0..k.saturating_sub(1)).rev() {
            orig_strides[s] = orig_strides[s + 1] * self.subsystem_dims[s + 1];
        }
        let strides: Vec<usize> = order.iter().map(|&s| orig_strides[s]).collect();
        let n = self.total_dim();
        let mut map = Vec::with_capacity(n);
        let mut counter = vec![0usize; k];
        let mut offset = 0usize;
        for _ in 0..n {
            map.push(offset);
            for p in (0..k).rev() {
                counter[p] += 1;
                offset += strides[p];
                if counter[p] < ordered_dims[p] {
                    break;
                }
                offset -= strides[p] * counter[p];
                counter[p] = 0;
            }
        }
        map
    }
}

impl fmt::Display for SubsystemSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (j, s) in g.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

/// Row-major flat index of `multi` over `shape`.
pub fn flat_index(multi: &[usize], shape: &[usize]) -> Result<usize> {
    if multi.len() != shape.len() {
        return Err(Error::Shape(format!(
            "multi-index has {} components, shape has {}",
            multi.len(),
            shape.len()
        )));
    }
    let mut flat = 0usize;
    for (position, (&i, &d)) in multi.iter().zip(shape).enumerate() {
        if i >= d {
            return Err(Error::Index {
                position,
                index: i,
                dim: d,
            });
        }
        flat = flat * d + i;
    }
    Ok(flat)
}

/// Row-major multi-index of `flat` over `shape`.
pub fn multi_index(flat: usize, shape: &[usize]) -> Result<Vec<usize>> {
    let n: usize = shape.iter().product();
    if flat >= n {
        return Err(Error::Index {
            position: 0,
            index: flat,
            dim: n,
        });
    }
    let mut out = vec![0usize; shape.len()];
    let mut rem = flat;
    for (slot, &d) in out.iter_mut().zip(shape).rev() {
        *slot = rem % d;
        rem /= d;
    }
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dims() != b.dims() {
        return Err(Error::Shape(format!(
            "inner product of states with dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(dot(a.amplitudes(), b.amplitudes()))
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Product state `a ⊗ b ⊗ ...` laid out over the split's original subsystems.
pub fn assemble_product(factors: &[Vec<Complex64>], split: &SubsystemSplit) -> Result<StateVector> {
    split.restore(&outer_product(factors, split.factor_dims())?)
}

/// Row-major outer product of the factor vectors.
pub(crate) fn outer_product(factors: &[Vec<Complex64>], dims: &[usize]) -> Result<Vec<Complex64>> {
    if factors.len() != dims.len() {
        return Err(Error::Shape(format!(
            "{} factors supplied for {} split factors",
            factors.len(),
            dims.len()
        )));
    }
    for (f, (v, &d)) in factors.iter().zip(dims).enumerate() {
        if v.len() != d {
            return Err(Error::Shape(format!(
                "factor {f} has length {}, expected {d}",
                v.len()
            )));
        }
    }
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for v in factors {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for a in &out {
            next.extend(v.iter().map(|b| a * b));
        }
        out = next;
    }
    Ok(out)
}

/// `|phi - psi|^2`.
pub fn distance_squared(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    if phi.dims() != psi.dims() {
        return Err(Error::Shape(format!(
            "distance between states with dims {:?} and {:?}",
            phi.dims(),
            psi.dims()
        )));
    }
    Ok(phi
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum())
}
