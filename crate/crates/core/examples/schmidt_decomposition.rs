// Schmidt decomposition of a qutrit-qubit state and of a random 4x3 state.

use std::error::Error;

use entangle::schmidt::{reduced_density_matrix, schmidt_decompose, Keep};
use entangle::state::{inner_product, StateVector, SubsystemSplit};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let amps = vec![
        Complex64::new(0.7f64.sqrt(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.2f64.sqrt()),
        Complex64::from_polar(0.1f64.sqrt(), std::f64::consts::FRAC_PI_3),
        Complex64::new(0.0, 0.0),
    ];
    let psi = StateVector::new(vec![3, 2], amps)?;
    let split = SubsystemSplit::each_subsystem(psi.dims())?;
    let r = schmidt_decompose(&psi, &split)?;
    println!("p = {:?}", r.coefficients);
    println!("S = {:.12} bits ({:.12} nats), K = {:.12}", r.entropy_bits, r.entropy_nats, r.participation);

    // both marginals carry the same nonzero spectrum
    let rho_a = reduced_density_matrix(&psi, &split, Keep::A)?.eig()?.values;
    let rho_b = reduced_density_matrix(&psi, &split, Keep::B)?.eig()?.values;
    println!("spec rho_A = {rho_a:?}\nspec rho_B = {rho_b:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dims = vec![2, 2, 3];
    let psi = StateVector::random(dims.clone(), &mut rng)?;
    let split = SubsystemSplit::parse("0,1|2", &dims)?;
    let r = schmidt_decompose(&psi, &split)?;
    let rebuilt = r.reconstruct(&split)?;
    let fidelity = inner_product(&psi, &rebuilt)?.norm_sqr();
    println!("random (0,1|2): rank {}, fidelity {fidelity:.15}", r.rank);
    assert!(fidelity > 1.0 - 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
