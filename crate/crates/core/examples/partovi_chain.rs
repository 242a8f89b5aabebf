// Sequential Schmidt chains: the result depends on which factor is peeled first.

use std::error::Error;

use entangle::partovi::{build_chain, minimize_over_orderings};
use entangle::state::{StateVector, SubsystemSplit};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let psi = StateVector::from_real(
        vec![2, 2, 2],
        &[0.6f64.sqrt(), 0.0, 0.0, 0.2f64.sqrt(), 0.0, 0.0, 0.0, 0.2f64.sqrt()],
    )?;
    let split = SubsystemSplit::each_subsystem(psi.dims())?;
    let search = minimize_over_orderings(&psi, &split)?;
    for (ordering, sin2) in &search.table {
        println!("{ordering:?}: chain sin^2 = {sin2:.12}");
    }
    println!("best ordering {:?}", search.best.ordering);

    let chain = build_chain(&StateVector::ghz(3), &split, &[0, 1, 2])?;
    for j in &chain.joint_coefficients {
        println!("GHZ branch {:?}: weight {:.12}", j.branch, j.weight);
    }
    println!("GHZ reconstruction fidelity {:.15}", chain.reconstruction_fidelity);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
