//! Nearest product states and the geometric measure of entanglement.
//!
//! The distance `D² = |φ - ψ|²` to an unnormalized product state
//! `φ = a ⊗ b ⊗ c ⊗ ...` is stationary when, for every factor,
//!
//! ```text
//! a_i* N_B N_C ... = Σ_{j,k,...} b_j c_k ... χ*_{ijk...}
//! ```
//!
//! with `N_X = ⟨X|X⟩`. With the other factors fixed that row is linear in the
//! remaining factor, so solving it exactly is one step of an alternating
//! (rank-1 ALS) scheme; each step minimizes `D²` over one factor. At a critical
//! point `⟨φ|ψ⟩ = ⟨φ|φ⟩ = N_A N_B ...`, `cos θ_C = √(N_A N_B ...)` and
//! `D² = sin² θ_C`. The distance to the normalized state `φ/|φ|` is
//! `D_N² = 2(1 - cos θ_C)`.
//!
//! For a bipartite split the equations decouple into eigenproblems of the
//! reduced density matrices; [`bipartite_closed_form`] solves them directly.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schmidt::{schmidt_decompose, reduced_density_matrix, Keep};
use crate::state::{distance_squared, gaussian, inner_product, outer_product, StateVector, SubsystemSplit};

/// Relative contraction norm below which an update is treated as annihilating the factor.
const ZERO_CONTRACTION: f64 = 1e-14;
/// Stop once the relative change of the norm product per sweep falls below this
/// (together with the residual tolerance).
const RELATIVE_CHANGE_TOL: f64 = 1e-12;
/// Critical values closer than this are reported once.
const DISTINCT_VALUE_TOL: f64 = 1e-9;
/// Norm products within this are tied; the smaller residual wins.
const TIE_TOL: f64 = 1e-12;
/// Eigenvalue gap below which the closed-form maximizer is flagged as degenerate.
const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub factors: Vec<Vec<Complex64>>,
    /// `N_f = Σ_i |x_{f,i}|²`.
    pub factor_norms: Vec<f64>,
    /// `N_A N_B N_C ...`, which is `⟨φ|φ⟩`.
    pub norm_product: f64,
}

impl ProductState {
    pub fn new(factors: Vec<Vec<Complex64>>) -> Self {
        let factor_norms: Vec<f64> = factors.iter().map(|v| norm_sq(v)).collect();
        let norm_product = factor_norms.iter().product();
        Self {
            factors,
            factor_norms,
            norm_product,
        }
    }

    /// `φ` laid out over the split's subsystems.
    pub fn assemble(&self, split: &SubsystemSplit) -> Result<StateVector> {
        split.restore(&outer_product(&self.factors, split.factor_dims())?)
    }

    /// Factors rescaled to unit norm.
    pub fn unit_factors(&self) -> Vec<Vec<Complex64>> {
        self.factors
            .iter()
            .zip(&self.factor_norms)
            .map(|(v, n)| {
                let s = 1.0 / n.sqrt();
                v.iter().map(|z| z * s).collect()
            })
            .collect()
    }

    fn refresh(&mut self) {
        self.factor_norms = self.factors.iter().map(|v| norm_sq(v)).collect();
        self.norm_product = self.factor_norms.iter().product();
    }

    /// Rescales every factor to the geometric mean of the norms; `φ` is unchanged.
    fn rebalance(&mut self) {
        let m = self.factors.len() as f64;
        let logs: f64 = self.factor_norms.iter().map(|n| n.ln()).sum();
        let target = (logs / m).exp();
        for (v, &n) in self.factors.iter_mut().zip(&self.factor_norms) {
            let s = (target / n).sqrt();
            v.iter_mut().for_each(|z| *z *= s);
        }
        self.refresh();
    }

    fn check_shape(&self, split: &SubsystemSplit) -> Result<()> {
        let dims = split.factor_dims();
        if self.factors.len() != dims.len()
            || self.factors.iter().zip(dims).any(|(v, &d)| v.len() != d)
        {
            return Err(Error::Shape(format!(
                "product state with factor lengths {:?} does not fit split factor dims {dims:?}",
                self.factors.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub starts: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            max_sweeps: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Alternating updates of the unnormalized stationarity equations.
    Alternating,
    /// Alternating updates with unit-norm factors; `Λ` read off as `⟨φ_N|ψ⟩`.
    NormalizedVariant,
    /// Largest eigenpair of the reduced density matrices.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricResult {
    pub method: Method,
    /// The critical point as an unnormalized product state.
    pub product_state: ProductState,
    /// `Λ = √(N_A N_B ...)`.
    pub lambda: f64,
    pub cos_theta_c: f64,
    /// `1 - N_A N_B ...`, the entanglement measure.
    pub sin2_theta_c: f64,
    /// Measured `|φ - ψ|²`.
    pub d2_unnormalized: f64,
    /// Measured `|φ/|φ| - ψ|²`.
    pub d2_normalized: f64,
    /// Measured `⟨φ|ψ⟩`.
    pub overlap: Complex64,
    /// Max violation of the stationarity equations.
    pub residual: f64,
    pub sweeps: usize,
    pub starts_used: usize,
    pub converged: bool,
    /// Distinct norm products of all converged starts (or the marginal spectrum
    /// for the closed form), descending.
    pub critical_values: Vec<f64>,
    /// Best critical value not unique (closed form: top eigenvalue gap below 1e-10).
    pub degenerate: bool,
}

/// Factor-ordered amplitudes with precomputed strides.
struct Problem {
    chi: Vec<Complex64>,
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Problem {
    fn new(psi: &StateVector, split: &SubsystemSplit) -> Result<Self> {
        let chi = split.arrange(psi)?;
        let dims = split.factor_dims().to_vec();
        let mut strides = vec![1usize; dims.len()];
        for f in (0..dims.len() - 1).rev() {
            strides[f] = strides[f + 1] * dims[f + 1];
        }
        Ok(Self { chi, dims, strides })
    }

    /// `g_i = Σ χ_{..i..} Π_{h≠f} conj(x_h)`: the right-hand side of factor `f`'s
    /// stationarity row, conjugated.
    fn contract(&self, factors: &[Vec<Complex64>], f: usize) -> Vec<Complex64> {
        let m = self.dims.len();
        let mut g = vec![Complex64::new(0.0, 0.0); self.dims[f]];
        let conj: Vec<Vec<Complex64>> = factors.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect();
        let mut idx = vec![0usize; m];
        for &amp in &self.chi {
            let mut w = amp;
            for h in 0..m {
                if h != f {
                    w *= conj[h][idx[h]];
                }
            }
            g[idx[f]] += w;
            for h in (0..m).rev() {
                idx[h] += 1;
                if idx[h] < self.dims[h] {
                    break;
                }
                idx[h] = 0;
            }
        }
        g
    }

    fn residual(&self, ps: &ProductState) -> f64 {
        let mut worst: f64 = 0.0;
        for f in 0..self.dims.len() {
            let others: f64 = ps
                .factor_norms
                .iter()
                .enumerate()
                .filter(|&(h, _)| h != f)
                .map(|(_, n)| n)
                .product();
            let g = self.contract(&ps.factors, f);
            for (x, gi) in ps.factors[f].iter().zip(&g) {
                worst = worst.max((x * others - gi).norm());
            }
        }
        worst
    }

    /// `max |g_i - Λ c_i|` for unit-norm factors, `Λ = Re⟨φ_N|ψ⟩`.
    fn normalized_residual(&self, factors: &[Vec<Complex64>]) -> (f64, f64) {
        let g0 = self.contract(factors, 0);
        let lambda = factors[0].iter().zip(&g0).map(|(c, g)| c.conj() * g).sum::<Complex64>().re;
        let mut worst: f64 = 0.0;
        for f in 0..self.dims.len() {
            let g = if f == 0 { g0.clone() } else { self.contract(factors, f) };
            for (c, gi) in factors[f].iter().zip(&g) {
                worst = worst.max((gi - lambda * c).norm());
            }
        }
        (worst, lambda)
    }

    /// One cyclic pass; each factor solves its stationarity row with the others
    /// fixed. Returns the norm of the last contraction.
    fn sweep(&self, ps: &mut ProductState, variant: Method) -> Result<f64> {
        let mut last = 0.0;
        for f in 0..self.dims.len() {
            let g = self.contract(&ps.factors, f);
            let others: f64 = ps
                .factor_norms
                .iter()
                .enumerate()
                .filter(|&(h, _)| h != f)
                .map(|(_, n)| n)
                .product();
            let gn = norm_sq(&g).sqrt();
            if gn.is_nan() || gn <= ZERO_CONTRACTION * others.sqrt() {
                return Err(Error::ZeroContraction { factor: f });
            }
            let scale = match variant {
                Method::NormalizedVariant => 1.0 / gn,
                _ => 1.0 / others,
            };
            ps.factors[f] = g.iter().map(|z| z * scale).collect();
            ps.refresh();
            if variant != Method::NormalizedVariant {
                ps.rebalance();
            }
            last = gn;
        }
        Ok(last)
    }

    fn start(&self, index: usize, attempt: u64, seed: u64) -> ProductState {
        if index == 0 && attempt == 0 {
            let (best, _) = self
                .chi
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (k, z)| if z.norm() > acc.1 { (k, z.norm()) } else { acc });
            let factors = self
                .dims
                .iter()
                .zip(&self.strides)
                .map(|(&d, &s)| {
                    let mut v = vec![Complex64::new(0.0, 0.0); d];
                    v[(best / s) % d] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect();
            return ProductState::new(factors);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((index as u64) << 1) | attempt);
        let factors = self
            .dims
            .iter()
            .map(|&d| (0..d).map(|_| gaussian(&mut rng)).collect())
            .collect();
        ProductState::new(factors)
    }

    fn run(&self, init: ProductState, config: &SolverConfig, variant: Method, mut history: Option<&mut Vec<f64>>) -> Result<Run> {
        let normalized = variant == Method::NormalizedVariant;
        let mut ps = init;
        if normalized {
            ps = ProductState::new(ps.unit_factors());
        } else {
            ps.rebalance();
        }
        let check = |ps: &ProductState| -> (f64, f64) {
            if normalized {
                self.normalized_residual(&ps.factors)
            } else {
                (self.residual(ps), ps.norm_product.sqrt())
            }
        };
        let mut previous = f64::NAN;
        for sweep in 1..=config.max_sweeps {
            let last = self.sweep(&mut ps, variant)?;
            // Λ after the last update of a unit-norm sweep is the contraction norm
            let value = if normalized { last } else { ps.norm_product };
            if let Some(h) = history.as_deref_mut() {
                h.push(self.distance_sq(&ps));
            }
            let change = (value - previous).abs() / value.abs().max(f64::MIN_POSITIVE);
            previous = value;
            if change < RELATIVE_CHANGE_TOL {
                let (residual, lambda) = check(&ps);
                if residual < config.tol {
                    return Ok(Run::finish(ps, variant, lambda, residual, sweep, true));
                }
            }
        }
        let (residual, lambda) = check(&ps);
        Ok(Run::finish(ps, variant, lambda, residual, config.max_sweeps, residual < config.tol))
    }

    fn distance_sq(&self, ps: &ProductState) -> f64 {
        let phi = outer_product(&ps.factors, &self.dims).expect("factors fit the problem");
        phi.iter().zip(&self.chi).map(|(a, b)| (a - b).norm_sqr()).sum()
    }
}

struct Run {
    state: ProductState,
    residual: f64,
    sweeps: usize,
    converged: bool,
}

impl Run {
    fn finish(ps: ProductState, variant: Method, lambda: f64, residual: f64, sweeps: usize, converged: bool) -> Run {
        let state = if variant == Method::NormalizedVariant {
            // express the unit-norm critical point as the equivalent unnormalized one
            let m = ps.factors.len() as f64;
            let s = lambda.max(0.0).powf(1.0 / m);
            ProductState::new(ps.factors.iter().map(|v| v.iter().map(|z| z * s).collect()).collect())
        } else {
            ps
        };
        Run {
            state,
            residual,
            sweeps,
            converged,
        }
    }
}

/// Max-norm violation of the stationarity equations at `ps`.
pub fn fixed_point_residual(psi: &StateVector, split: &SubsystemSplit, ps: &ProductState) -> Result<f64> {
    ps.check_shape(split)?;
    Ok(Problem::new(psi, split)?.residual(ps))
}

/// One cyclic pass of exact per-factor updates, rebalancing factor norms after each.
pub fn sweep_update(psi: &StateVector, split: &SubsystemSplit, ps: &ProductState) -> Result<ProductState> {
    ps.check_shape(split)?;
    if ps.factor_norms.contains(&0.0) {
        return Err(Error::Domain("product state has a zero factor".into()));
    }
    let problem = Problem::new(psi, split)?;
    let mut next = ps.clone();
    problem.sweep(&mut next, Method::Alternating)?;
    Ok(next)
}

/// A single alternating run from `init`, with `D²` recorded after every sweep.
#[derive(Debug, Clone)]
pub struct AlternatingTrace {
    pub product_state: ProductState,
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub d2_history: Vec<f64>,
}

pub fn optimize_from(
    psi: &StateVector,
    split: &SubsystemSplit,
    init: ProductState,
    config: &SolverConfig,
) -> Result<AlternatingTrace> {
    psi.require_normalized()?;
    init.check_shape(split)?;
    let problem = Problem::new(psi, split)?;
    let mut history = Vec::new();
    let run = problem.run(init, config, Method::Alternating, Some(&mut history))?;
    Ok(AlternatingTrace {
        product_state: run.state,
        residual: run.residual,
        sweeps: run.sweeps,
        converged: run.converged,
        d2_history: history,
    })
}

/// Random complex-Gaussian starting point drawn from the solver's start stream `index`.
pub fn random_start(split: &SubsystemSplit, seed: u64, index: usize) -> ProductState {
    let problem = Problem {
        chi: vec![],
        dims: split.factor_dims().to_vec(),
        strides: vec![1; split.num_factors()],
    };
    problem.start(index.max(1), 0, seed)
}

/// Multistart alternating search for the closest unnormalized product state.
pub fn nearest_product_state(psi: &StateVector, split: &SubsystemSplit, config: &SolverConfig) -> Result<GeometricResult> {
    multistart(psi, split, config, Method::Alternating)
}

/// Same search with unit-norm factors.
pub fn normalized_variant(psi: &StateVector, split: &SubsystemSplit, config: &SolverConfig) -> Result<GeometricResult> {
    multistart(psi, split, config, Method::NormalizedVariant)
}

fn multistart(psi: &StateVector, split: &SubsystemSplit, config: &SolverConfig, variant: Method) -> Result<GeometricResult> {
    psi.require_normalized()?;
    if config.starts == 0 {
        return Err(Error::Domain("at least one start is required".into()));
    }
    let problem = Problem::new(psi, split)?;
    // (run, runs executed for this slot); a start that annihilates a factor is
    // replaced once by a fresh random start
    let outcomes: Vec<(Option<Run>, usize)> = (0..config.starts)
        .into_par_iter()
        .map(|index| {
            let mut used = 0;
            for attempt in 0..2 {
                used += 1;
                let init = problem.start(index, attempt, config.seed);
                match problem.run(init, config, variant, None) {
                    Ok(run) => return Ok((Some(run), used)),
                    Err(Error::ZeroContraction { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Ok((None, used))
        })
        .collect::<Result<Vec<_>>>()?;

    let starts_used = outcomes.iter().map(|(_, u)| u).sum();
    let runs: Vec<Run> = outcomes.into_iter().filter_map(|(r, _)| r).collect();
    if runs.is_empty() {
        return Err(Error::Domain("every start annihilated a factor".into()));
    }

    let mut critical: Vec<f64> = runs.iter().filter(|r| r.converged).map(|r| r.state.norm_product).collect();
    critical.sort_by(|a, b| b.total_cmp(a));
    critical.dedup_by(|a, b| (*a - *b).abs() < DISTINCT_VALUE_TOL);

    let better = |a: &Run, b: &Run| -> bool {
        let (x, y) = (a.state.norm_product, b.state.norm_product);
        if (x - y).abs() <= TIE_TOL {
            a.residual < b.residual
        } else {
            x > y
        }
    };
    let pick = |converged_only: bool| -> Option<&Run> {
        let mut best: Option<&Run> = None;
        for r in runs.iter().filter(|r| r.converged || !converged_only) {
            if best.is_none_or(|b| better(r, b)) {
                best = Some(r);
            }
        }
        best
    };

    match pick(true) {
        Some(best) => {
            let degenerate = critical.len() > 1 && critical[0] - critical[1] < 1e-10;
            finish(psi, split, best, variant, starts_used, critical, degenerate)
        }
        None => {
            let best = pick(false).expect("runs is non-empty");
            let partial = finish(psi, split, best, variant, starts_used, critical, false)?;
            Err(Error::Convergence {
                max_sweeps: config.max_sweeps,
                best: Box::new(partial),
            })
        }
    }
}

fn finish(
    psi: &StateVector,
    split: &SubsystemSplit,
    run: &Run,
    method: Method,
    starts_used: usize,
    critical_values: Vec<f64>,
    degenerate: bool,
) -> Result<GeometricResult> {
    let mut r = measure(psi, split, run.state.clone(), method)?;
    r.residual = run.residual;
    r.sweeps = run.sweeps;
    r.starts_used = starts_used;
    r.converged = run.converged;
    r.critical_values = critical_values;
    r.degenerate = degenerate;
    Ok(r)
}

/// Builds a result with all measured quantities for the product state `ps`.
fn measure(psi: &StateVector, split: &SubsystemSplit, ps: ProductState, method: Method) -> Result<GeometricResult> {
    let phi = ps.assemble(split)?;
    let overlap = inner_product(&phi, psi)?;
    let d2_unnormalized = distance_squared(&phi, psi)?;
    let lambda = ps.norm_product.sqrt();
    let d2_normalized = if lambda > 0.0 {
        distance_squared(&phi.scaled(Complex64::new(1.0 / lambda, 0.0)), psi)?
    } else {
        f64::NAN
    };
    Ok(GeometricResult {
        method,
        lambda,
        cos_theta_c: lambda,
        sin2_theta_c: 1.0 - ps.norm_product,
        d2_unnormalized,
        d2_normalized,
        overlap,
        residual: 0.0,
        sweeps: 0,
        starts_used: 0,
        converged: true,
        critical_values: vec![],
        degenerate: false,
        product_state: ps,
    })
}

/// Bipartite solution: `N_A N_B` is the largest eigenvalue of `ρ_A` with the
/// factors along the matching eigenvectors of `ρ_A` and `ρ_B`.
pub fn bipartite_closed_form(psi: &StateVector, split: &SubsystemSplit) -> Result<GeometricResult> {
    if split.num_factors() != 2 {
        return Err(Error::Split(format!(
            "closed form needs a bipartite split, got {} factors",
            split.num_factors()
        )));
    }
    let spectrum = reduced_density_matrix(psi, split, Keep::A)?.eig()?.values;
    let schmidt = schmidt_decompose(psi, split)?;
    let top = schmidt.coefficients[0];
    // each factor carries norm √λ so that N_A N_B = λ
    let s = top.max(0.0).powf(0.25);
    let factors = vec![
        schmidt.left_basis[0].iter().map(|z| z * s).collect(),
        schmidt.right_basis[0].iter().map(|z| z * s).collect(),
    ];
    let ps = ProductState::new(factors);
    let residual = Problem::new(psi, split)?.residual(&ps);
    let mut r = measure(psi, split, ps, Method::ClosedForm)?;
    r.residual = residual;
    r.degenerate = spectrum.len() > 1 && spectrum[0] - spectrum[1] < DEGENERACY_GAP;
    r.critical_values = spectrum;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubits(n: usize) -> SubsystemSplit {
        SubsystemSplit::each_subsystem(&vec![2; n]).unwrap()
    }

    #[test]
    fn residual_vanishes_at_exact_factors_of_a_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = [2, 3, 2];
        let split = SubsystemSplit::each_subsystem(&dims).unwrap();
        let factors: Vec<Vec<Complex64>> = dims
            .iter()
            .map(|&d| {
                let v: Vec<Complex64> = (0..d).map(|_| gaussian(&mut rng)).collect();
                let n = norm_sq(&v).sqrt();
                v.iter().map(|z| z / n).collect()
            })
            .collect();
        let ps = ProductState::new(factors);
        let psi = ps.assemble(&split).unwrap();
        assert!(fixed_point_residual(&psi, &split, &ps).unwrap() < 1e-12);
    }

    #[test]
    fn bell_critical_point_on_the_basis_axis() {
        // a = (α, 0), b = (β, 0) is critical iff αβ = 1/√2, i.e. α = β = 2^{-1/4}
        let psi = StateVector::ghz(2);
        let x = 2f64.powf(-0.25);
        let ps = ProductState::new(vec![vec![c(x), c(0.0)], vec![c(x), c(0.0)]]);
        assert!(fixed_point_residual(&psi, &qubits(2), &ps).unwrap() < 1e-12);
        assert!((ps.norm_product - 0.5).abs() < 1e-15);

        // (1/√2, 0) ⊗ (1/√2, 0) violates the first row by |½·(1/√2) - ½|
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ps = ProductState::new(vec![vec![c(h), c(0.0)], vec![c(h), c(0.0)]]);
        let r = fixed_point_residual(&psi, &qubits(2), &ps).unwrap();
        assert!((r - (0.5 - 0.5 * h)).abs() < 1e-15);
    }

    #[test]
    fn random_product_state_is_not_critical_for_bell() {
        let psi = StateVector::ghz(2);
        let ps = random_start(&qubits(2), 3, 1);
        assert!(fixed_point_residual(&psi, &qubits(2), &ps).unwrap() > 1e-3);
        let bad = ProductState::new(vec![vec![c(1.0); 3], vec![c(1.0); 2]]);
        assert!(matches!(fixed_point_residual(&psi, &qubits(2), &bad), Err(Error::Shape(_))));
    }

    #[test]
    fn sweep_keeps_a_critical_point() {
        let psi = StateVector::ghz(2);
        let x = 2f64.powf(-0.25);
        let ps = ProductState::new(vec![vec![c(x), c(0.0)], vec![c(x), c(0.0)]]);
        let next = sweep_update(&psi, &qubits(2), &ps).unwrap();
        for (a, b) in next.factors.iter().flatten().zip(ps.factors.iter().flatten()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    /// Independent update rule: a ← Γ b* / N_B, b ← Γᵀ a* / N_A, with no rebalancing.
    fn oracle_bipartite_sweep(gamma: &[Complex64], u: usize, v: usize, a: &mut Vec<Complex64>, b: &mut Vec<Complex64>) {
        let nb = norm_sq(b);
        *a = (0..u).map(|i| (0..v).map(|j| gamma[i * v + j] * b[j].conj()).sum::<Complex64>() / nb).collect();
        let na = norm_sq(a);
        *b = (0..v).map(|j| (0..u).map(|i| gamma[i * v + j] * a[i].conj()).sum::<Complex64>() / na).collect();
    }

    #[test]
    fn bell_from_basis_start_converges_immediately() {
        let psi = StateVector::ghz(2);
        let split = qubits(2);
        let mut ps = ProductState::new(vec![vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]]);
        let (mut a, mut b) = (ps.factors[0].clone(), ps.factors[1].clone());
        for _ in 0..3 {
            ps = sweep_update(&psi, &split, &ps).unwrap();
            oracle_bipartite_sweep(psi.amplitudes(), 2, 2, &mut a, &mut b);
        }
        let oracle_np = norm_sq(&a) * norm_sq(&b);
        assert!((oracle_np - 0.5).abs() < 1e-15);
        assert!((ps.norm_product - 0.5).abs() < 1e-15);
        // same φ as the unrebalanced oracle
        let phi = ps.assemble(&split).unwrap();
        let oracle_phi = ProductState::new(vec![a, b]).assemble(&split).unwrap();
        assert!(distance_squared(&phi, &oracle_phi).unwrap() < 1e-28);
    }

    #[test]
    fn product_target_reaches_unit_norm_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let split = SubsystemSplit::each_subsystem(&[3, 2, 4]).unwrap();
        let psi = StateVector::random(vec![3], &mut rng)
            .unwrap()
            .tensor(&StateVector::random(vec![2], &mut rng).unwrap())
            .tensor(&StateVector::random(vec![4], &mut rng).unwrap());
        for start in 1..5 {
            let trace = optimize_from(&psi, &split, random_start(&split, 77, start), &SolverConfig::default()).unwrap();
            assert!(trace.converged);
            assert!((trace.product_state.norm_product - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_contraction_is_reported() {
        // ψ = |11>, start b = e0 makes the update of a vanish
        let psi = StateVector::basis(vec![2, 2], 3).unwrap();
        let ps = ProductState::new(vec![vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]]);
        assert!(matches!(
            sweep_update(&psi, &qubits(2), &ps),
            Err(Error::ZeroContraction { factor: 0 })
        ));
    }

    #[test]
    fn product_state_has_zero_measure() {
        let psi = StateVector::basis(vec![2, 3, 2], 7).unwrap();
        let split = SubsystemSplit::each_subsystem(&[2, 3, 2]).unwrap();
        let r = nearest_product_state(&psi, &split, &SolverConfig::default()).unwrap();
        assert!(r.sin2_theta_c.abs() < 1e-9);
        assert!((r.lambda - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_measure_matches_marginal_eigenvalue() {
        let r = nearest_product_state(&StateVector::ghz(2), &qubits(2), &SolverConfig::default()).unwrap();
        assert!((r.product_state.norm_product - 0.5).abs() < 1e-10);
        assert!((r.sin2_theta_c - 0.5).abs() < 1e-10);
        assert!((r.d2_unnormalized - 0.5).abs() < 1e-10);
        assert!((r.d2_normalized - 2.0 * (1.0 - 0.5f64.sqrt())).abs() < 1e-9);
        assert!(r.converged);
    }

    /// max over nonnegative real qubit products (cos t_k, sin t_k) of |⟨φ|ψ⟩|²
    /// by grid search with step 0.005; exact for states with nonnegative amplitudes.
    fn grid_oracle(psi: &StateVector) -> f64 {
        let m = psi.dims().len();
        let steps = (std::f64::consts::FRAC_PI_2 / 0.005).ceil() as usize;
        let grid: Vec<(f64, f64)> = (0..=steps)
            .map(|s| {
                let t = std::f64::consts::FRAC_PI_2 * s as f64 / steps as f64;
                (t.cos(), t.sin())
            })
            .collect();
        let amps: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
        let mut best: f64 = 0.0;
        let mut idx = vec![0usize; m];
        loop {
            let mut ov = 0.0;
            for (k, a) in amps.iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                let mut w = *a;
                for q in 0..m {
                    let bit = (k >> (m - 1 - q)) & 1;
                    let (co, si) = grid[idx[q]];
                    w *= if bit == 0 { co } else { si };
                }
                ov += w;
            }
            best = best.max(ov * ov);
            let mut q = m;
            loop {
                if q == 0 {
                    return best;
                }
                q -= 1;
                idx[q] += 1;
                if idx[q] < grid.len() {
                    break;
                }
                idx[q] = 0;
            }
        }
    }

    #[test]
    fn ghz_and_w_match_grid_search() {
        for (psi, expected) in [(StateVector::ghz(3), 0.5), (StateVector::w(3), 4.0 / 9.0)] {
            let oracle = grid_oracle(&psi);
            assert!((oracle - expected).abs() < 1e-3, "oracle {oracle}");
            let r = nearest_product_state(&psi, &qubits(3), &SolverConfig::default()).unwrap();
            assert!((r.product_state.norm_product - expected).abs() < 1e-9);
            assert!((r.sin2_theta_c - (1.0 - expected)).abs() < 1e-9);
            assert!(r.product_state.norm_product >= oracle - 1e-12);
        }
    }

    #[test]
    fn normalized_variant_examples() {
        let config = SolverConfig::default();
        let prod = StateVector::basis(vec![2, 2], 2).unwrap();
        let r = normalized_variant(&prod, &qubits(2), &config).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-12);
        assert!(r.d2_normalized.abs() < 1e-12);

        let r = normalized_variant(&StateVector::ghz(2), &qubits(2), &config).unwrap();
        assert!((r.lambda - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!((r.d2_normalized - 0.585_786_437_626_904_9).abs() < 1e-9);
        assert_eq!(r.method, Method::NormalizedVariant);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let psi = StateVector::random(vec![2, 2], &mut rng).unwrap();
            let top = reduced_density_matrix(&psi, &qubits(2), Keep::A).unwrap().eig().unwrap().values[0];
            let r = normalized_variant(&psi, &qubits(2), &config).unwrap();
            assert!((r.lambda - top.sqrt()).abs() < 1e-8);
            assert!((r.d2_normalized - 2.0 * (1.0 - r.lambda)).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_examples() {
        let prod = StateVector::basis(vec![2, 3], 4).unwrap();
        let split = SubsystemSplit::each_subsystem(&[2, 3]).unwrap();
        let r = bipartite_closed_form(&prod, &split).unwrap();
        assert!((r.critical_values[0] - 1.0).abs() < 1e-14);
        assert!(r.sin2_theta_c.abs() < 1e-14);

        let psi = StateVector::from_real(vec![2, 2], &[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()]).unwrap();
        let r = bipartite_closed_form(&psi, &qubits(2)).unwrap();
        assert!((r.sin2_theta_c - 0.1).abs() < 1e-14);
        assert!(r.residual < 1e-14);
        assert!(!r.degenerate);
        assert!(bipartite_closed_form(&StateVector::ghz(2), &qubits(2)).unwrap().degenerate);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let split = SubsystemSplit::each_subsystem(&[3, 4]).unwrap();
        for _ in 0..5 {
            let psi = StateVector::random(vec![3, 4], &mut rng).unwrap();
            let closed = bipartite_closed_form(&psi, &split).unwrap();
            let als = nearest_product_state(&psi, &split, &SolverConfig::default()).unwrap();
            assert!((closed.product_state.norm_product - als.product_state.norm_product).abs() < 1e-8);
            assert!(closed.residual < 1e-12);
        }
        assert!(matches!(bipartite_closed_form(&StateVector::ghz(3), &qubits(3)), Err(Error::Split(_))));
    }

    #[test]
    fn d2_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let split = SubsystemSplit::each_subsystem(&[2, 3, 2, 2]).unwrap();
        for _ in 0..5 {
            let psi = StateVector::random(vec![2, 3, 2, 2], &mut rng).unwrap();
            let start = rng.random_range(1..100);
            let trace = optimize_from(&psi, &split, random_start(&split, 5, start), &SolverConfig::default()).unwrap();
            for w in trace.d2_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn measure_is_invariant_under_local_unitaries() {
        // phases and a Hadamard on individual qubits
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let split = qubits(3);
        let psi = StateVector::random(vec![2, 2, 2], &mut rng).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = [c(h), c(h), c(h), c(-h)];
        let phase = [c(1.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, 0.7)];
        let moved = psi.apply_local(&split, 0, &had).unwrap().apply_local(&split, 2, &phase).unwrap();
        let a = nearest_product_state(&psi, &split, &SolverConfig::default()).unwrap();
        let b = nearest_product_state(&moved, &split, &SolverConfig::default()).unwrap();
        assert!((a.sin2_theta_c - b.sin2_theta_c).abs() < 1e-8);
    }

    #[test]
    fn results_are_deterministic_for_a_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = StateVector::random(vec![2, 2, 2], &mut rng).unwrap();
        let config = SolverConfig { seed: 42, ..Default::default() };
        let a = nearest_product_state(&psi, &qubits(3), &config).unwrap();
        let b = nearest_product_state(&psi, &qubits(3), &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn convergence_failure_carries_best_partial_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let psi = StateVector::random(vec![3, 3, 3], &mut rng).unwrap();
        let config = SolverConfig { max_sweeps: 1, starts: 2, ..Default::default() };
        match nearest_product_state(&psi, &SubsystemSplit::each_subsystem(&[3, 3, 3]).unwrap(), &config) {
            Err(Error::Convergence { best, .. }) => {
                assert!(!best.converged);
                assert!(best.product_state.norm_product > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
