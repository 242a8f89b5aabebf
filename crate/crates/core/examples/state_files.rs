// Writing a state document and running the command-line entry point on it in-process.

use std::error::Error;

use entangle::cli::{run, ReportEnvelope, StateFile};
use entangle::state::StateVector;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let doc = StateFile::from_state(&StateVector::ghz(3), Some("ghz3"));
    let text = serde_json::to_string(&doc)?;

    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run(
        ["entangle", "geometric", "--json", "-"],
        &mut text.as_bytes(),
        &mut stdout,
        &mut stderr,
    );
    let report: ReportEnvelope = serde_json::from_slice(&stdout)?;
    println!(
        "exit {code}: {} on {} gives sin^2 theta_C = {}",
        report.command, report.input_label, report.results["sin2_theta_c"]
    );

    let code = run(["entangle", "verify", "--split", "0|1,2", "-"], &mut text.as_bytes(), &mut stdout, &mut stderr);
    println!("verify exit {code}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
