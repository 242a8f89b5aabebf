// The unnormalized and unit-norm formulations reach the same critical point:
// `D² = 1 - Λ²` for the former and `D_N² = 2(1 - Λ)` for the latter.

use std::error::Error;

use entangle::geometric::{bipartite_closed_form, nearest_product_state, normalized_variant, SolverConfig};
use entangle::state::{StateVector, SubsystemSplit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = SolverConfig::default();
    let psi = StateVector::random(vec![3, 4], &mut ChaCha8Rng::seed_from_u64(11))?;
    let split = SubsystemSplit::each_subsystem(psi.dims())?;
    let als = nearest_product_state(&psi, &split, &config)?;
    let unit = normalized_variant(&psi, &split, &config)?;
    let eig = bipartite_closed_form(&psi, &split)?;
    for r in [&als, &unit, &eig] {
        println!(
            "{:?}: Lambda = {:.12}  D^2 = {:.12}  D_N^2 = {:.12}",
            r.method, r.lambda, r.d2_unnormalized, r.d2_normalized
        );
    }
    let lambda = eig.lambda;
    assert!((als.d2_unnormalized - (1.0 - lambda * lambda)).abs() < 1e-9);
    assert!((unit.d2_normalized - 2.0 * (1.0 - lambda)).abs() < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
