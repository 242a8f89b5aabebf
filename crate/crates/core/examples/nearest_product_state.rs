// Closest product state and geometric measure for GHZ, W and a random four-party state.

use std::error::Error;

use entangle::geometric::{fixed_point_residual, nearest_product_state, SolverConfig};
use entangle::state::{StateVector, SubsystemSplit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = SolverConfig::default();
    let three = SubsystemSplit::each_subsystem(&[2, 2, 2])?;
    for (name, psi) in [("GHZ", StateVector::ghz(3)), ("W", StateVector::w(3))] {
        let r = nearest_product_state(&psi, &three, &config)?;
        println!(
            "{name}: sin^2 theta_C = {:.12}, Lambda = {:.12}, critical values {:?}",
            r.sin2_theta_c, r.lambda, r.critical_values
        );
    }

    let dims = vec![2, 3, 2, 2];
    let psi = StateVector::random(dims.clone(), &mut ChaCha8Rng::seed_from_u64(3))?;
    let split = SubsystemSplit::parse("0|1|2,3", &dims)?;
    let r = nearest_product_state(&psi, &split, &config)?;
    let residual = fixed_point_residual(&psi, &split, &r.product_state)?;
    println!(
        "random 2x3x4: N_A N_B N_C = {:.12}, <phi|psi> = {:.12}, residual {residual:.1e}, {} sweeps",
        r.product_state.norm_product, r.overlap, r.sweeps
    );
    assert!((r.d2_unnormalized - r.sin2_theta_c).abs() < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
