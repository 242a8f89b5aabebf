// A qubit against an arbitrary partner: the marginal spectrum from the 2x2 minors.

use std::error::Error;

use entangle::schmidt::{qubit_split_closed_form, reduced_density_matrix, Keep};
use entangle::state::{StateVector, SubsystemSplit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let w = StateVector::w(3);
    let split = SubsystemSplit::parse("0|1,2", w.dims())?;
    let q = qubit_split_closed_form(&w, &split)?;
    println!("W, qubit 0 | rest: C = {:.12}, mu = ({:.12}, {:.12})", q.concurrence_sq, q.mu_plus, q.mu_minus);
    println!("theta_max = {:.12} (cos = mu+), {:.12} (cos = sqrt mu+)", q.theta_max, q.theta_max_amplitude);

    let psi = StateVector::random(vec![2, 5], &mut ChaCha8Rng::seed_from_u64(5))?;
    let split = SubsystemSplit::each_subsystem(psi.dims())?;
    let q = qubit_split_closed_form(&psi, &split)?;
    let spectrum = reduced_density_matrix(&psi, &split, Keep::A)?.eig()?.values;
    println!("random 2x5: mu = ({:.12}, {:.12}), eig rho_A = {spectrum:?}", q.mu_plus, q.mu_minus);
    assert!((q.mu_plus - spectrum[0]).abs() < 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
