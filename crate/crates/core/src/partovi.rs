//! Sequential Schmidt decomposition of a multipartite state.
//!
//! The first factor of an ordering is split off from the rest by a bipartite
//! Schmidt decomposition, `|ψ⟩ = Σ_a √p_a |ψ_a^A⟩ ⊗ |ψ_a^{BC..}⟩`; every remainder
//! branch is then decomposed the same way with the next factor, until two
//! factors remain. The chain expands `ψ` over branch paths with weights
//! `p_a · p_{a;b} · ...`. The chained product state keeps the largest branch at
//! every stage, and its angle to `ψ` gives the chain measure, which depends on
//! the ordering.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schmidt::{schmidt_decompose, RANK_CUTOFF};
use crate::state::{assemble_product, inner_product, StateVector, SubsystemSplit};

/// Largest factor count searched exhaustively by [`minimize_over_orderings`].
pub const MAX_EXHAUSTIVE_FACTORS: usize = 8;

/// Orderings whose chain measures differ by less than this are tied.
const ORDERING_TIE_TOL: f64 = 1e-12;

/// One bipartite Schmidt step `(peeled | rest)` on one branch of the chain.
#[derive(Debug, Clone)]
pub struct ChainStage {
    /// Branch indices of the earlier stages leading here (empty for the first stage).
    pub branch: Vec<usize>,
    pub peeled_factor: usize,
    /// Factor labels of the remainder states, in their tensor order.
    pub remaining_factors: Vec<usize>,
    /// Schmidt coefficients of the kept branches, descending.
    pub coefficients: Vec<f64>,
    pub peeled_basis: Vec<Vec<Complex64>>,
    /// Normalized partner state on the remaining factors for each kept branch.
    pub remainder_states: Vec<StateVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointCoefficient {
    pub branch: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct PartoviChainResult {
    pub ordering: Vec<usize>,
    pub stages: Vec<ChainStage>,
    /// `p_a · p_{a;b} · ...` for every kept branch path, in lexicographic path order.
    pub joint_coefficients: Vec<JointCoefficient>,
    /// Unit factors of the chained product state, in the split's factor order.
    pub top_branch_factors: Vec<Vec<Complex64>>,
    pub chain_cos_theta: f64,
    pub chain_sin2_theta: f64,
    pub reconstruction_fidelity: f64,
}

/// Schmidt step splitting factor `peel` from the other factors of `split`.
pub fn peel_stage(state: &StateVector, split: &SubsystemSplit, peel: usize) -> Result<ChainStage> {
    let bipartite = split.peel(peel)?;
    let schmidt = schmidt_decompose(state, &bipartite)?;
    let remaining_factors: Vec<usize> = (0..split.num_factors()).filter(|&f| f != peel).collect();
    let rest_dims: Vec<usize> = remaining_factors.iter().map(|&f| split.factor_dims()[f]).collect();

    let kept = schmidt
        .coefficients
        .iter()
        .take_while(|&&p| p >= RANK_CUTOFF)
        .count()
        .max(1);
    let remainder_states = schmidt.right_basis[..kept]
        .iter()
        .map(|beta| StateVector::new(rest_dims.clone(), beta.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainStage {
        branch: vec![],
        peeled_factor: peel,
        remaining_factors,
        coefficients: schmidt.coefficients[..kept].to_vec(),
        peeled_basis: schmidt.left_basis[..kept].to_vec(),
        remainder_states,
    })
}

/// One term of the chained expansion: weight and one unit vector per ordering position.
struct Term {
    weight: f64,
    vectors: Vec<Vec<Complex64>>,
}

struct ChainBuilder {
    stages: Vec<ChainStage>,
    joint: Vec<JointCoefficient>,
    terms: Vec<Term>,
}

impl ChainBuilder {
    /// `state` lives on the factors `labels` (in that tensor order); peels `labels[0]`.
    fn descend(&mut self, state: &StateVector, labels: &[usize], branch: Vec<usize>, weight: f64) -> Result<Vec<Term>> {
        let local = SubsystemSplit::each_subsystem(state.dims())?;
        let mut stage = peel_stage(state, &local, 0)?;
        stage.branch = branch.clone();
        stage.peeled_factor = labels[0];
        stage.remaining_factors = labels[1..].to_vec();

        let mut terms = Vec::new();
        for (k, (&p, alpha)) in stage.coefficients.iter().zip(&stage.peeled_basis).enumerate() {
            let mut path = branch.clone();
            path.push(k);
            let rest = &stage.remainder_states[k];
            if labels.len() == 2 {
                self.joint.push(JointCoefficient {
                    branch: path,
                    weight: weight * p,
                });
                terms.push(Term {
                    weight: p,
                    vectors: vec![alpha.clone(), rest.amplitudes().to_vec()],
                });
            } else {
                for sub in self.descend(rest, &labels[1..], path, weight * p)? {
                    let mut vectors = Vec::with_capacity(labels.len());
                    vectors.push(alpha.clone());
                    vectors.extend(sub.vectors);
                    terms.push(Term {
                        weight: p * sub.weight,
                        vectors,
                    });
                }
            }
        }
        self.stages.push(stage);
        Ok(terms)
    }
}

fn check_ordering(split: &SubsystemSplit, ordering: &[usize]) -> Result<()> {
    let m = split.num_factors();
    if m < 2 {
        return Err(Error::Split("a chain needs at least two factors".into()));
    }
    let mut seen = vec![false; m];
    for &f in ordering {
        if f >= m {
            return Err(Error::Label { label: f, factors: m });
        }
        seen[f] = true;
    }
    if ordering.len() != m || seen.contains(&false) {
        return Err(Error::Split(format!(
            "ordering {ordering:?} is not a permutation of the {m} factors"
        )));
    }
    Ok(())
}

/// Full sequential decomposition of `psi` peeling the factors in `ordering`.
pub fn build_chain(psi: &StateVector, split: &SubsystemSplit, ordering: &[usize]) -> Result<PartoviChainResult> {
    check_ordering(split, ordering)?;
    psi.require_normalized()?;
    let factor_dims = split.factor_dims();
    let by_factor = StateVector::new(factor_dims.to_vec(), split.arrange(psi)?)?;
    let reorder = SubsystemSplit::new(factor_dims, ordering.iter().map(|&f| vec![f]).collect())?;
    let ordered_dims: Vec<usize> = ordering.iter().map(|&f| factor_dims[f]).collect();
    let ordered = StateVector::new(ordered_dims, reorder.arrange(&by_factor)?)?;

    let mut builder = ChainBuilder {
        stages: vec![],
        joint: vec![],
        terms: vec![],
    };
    builder.terms = builder.descend(&ordered, ordering, vec![], 1.0)?;
    builder.stages.sort_by(|a, b| a.branch.len().cmp(&b.branch.len()).then_with(|| a.branch.cmp(&b.branch)));
    builder.joint.sort_by(|a, b| a.branch.cmp(&b.branch));

    let to_factor_order = |vectors: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![]; ordering.len()];
        for (pos, &f) in ordering.iter().enumerate() {
            out[f] = vectors[pos].clone();
        }
        out
    };

    let mut rebuilt = vec![Complex64::new(0.0, 0.0); psi.len()];
    for term in &builder.terms {
        let piece = assemble_product(&to_factor_order(&term.vectors), split)?;
        let w = term.weight.max(0.0).sqrt();
        for (r, a) in rebuilt.iter_mut().zip(piece.amplitudes()) {
            *r += w * a;
        }
    }
    let rebuilt = StateVector::new(psi.dims().to_vec(), rebuilt)?;
    let psi_norm = psi.norm_sq();
    let reconstruction_fidelity = inner_product(psi, &rebuilt)?.norm_sqr() / (psi_norm * rebuilt.norm_sq());

    // the first term follows branch 0 at every stage
    let top_branch_factors = to_factor_order(&builder.terms[0].vectors);
    let phi = assemble_product(&top_branch_factors, split)?;
    let chain_cos_theta = inner_product(psi, &phi)?.norm() / (phi.norm_sq() * psi_norm).sqrt();

    Ok(PartoviChainResult {
        ordering: ordering.to_vec(),
        stages: builder.stages,
        joint_coefficients: builder.joint,
        top_branch_factors,
        chain_cos_theta,
        chain_sin2_theta: 1.0 - chain_cos_theta * chain_cos_theta,
        reconstruction_fidelity,
    })
}

#[derive(Debug, Clone)]
pub struct OrderingSearch {
    pub best: PartoviChainResult,
    /// `(ordering, chain_sin2_theta)` for every permutation, lexicographic.
    pub table: Vec<(Vec<usize>, f64)>,
}

/// Evaluates every ordering and keeps the smallest chain measure; ties go to
/// the lexicographically first ordering.
pub fn minimize_over_orderings(psi: &StateVector, split: &SubsystemSplit) -> Result<OrderingSearch> {
    let m = split.num_factors();
    if m > MAX_EXHAUSTIVE_FACTORS {
        return Err(Error::Size(format!(
            "{m} factors exceed the exhaustive ordering limit of {MAX_EXHAUSTIVE_FACTORS}; \
             evaluate chosen orderings with build_chain instead"
        )));
    }
    let orderings: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let chains = orderings
        .par_iter()
        .map(|o| build_chain(psi, split, o))
        .collect::<Result<Vec<_>>>()?;

    let table = chains.iter().map(|c| (c.ordering.clone(), c.chain_sin2_theta)).collect();
    let mut best = 0;
    for (i, c) in chains.iter().enumerate().skip(1) {
        if c.chain_sin2_theta < chains[best].chain_sin2_theta - ORDERING_TIE_TOL {
            best = i;
        }
    }
    let best = chains.into_iter().nth(best).expect("at least one ordering");
    Ok(OrderingSearch { best, table })
}
