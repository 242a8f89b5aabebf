//! Acceptance criteria 1-8. Runs without the libtest harness so each criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use entangle::cli::parse_state_file;
use entangle::error::Error;
use entangle::geometric::{nearest_product_state, optimize_from, random_start, SolverConfig};
use entangle::partovi::{build_chain, minimize_over_orderings};
use entangle::schmidt::{qubit_split_closed_form, reduced_density_matrix, schmidt_decompose, Keep};
use entangle::state::{assemble_product, distance_squared, inner_product, StateVector, SubsystemSplit};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

/// Random subsystem dims (product ≤ 64) grouped into 2-4 factors.
fn random_split(rng: &mut ChaCha8Rng) -> SubsystemSplit {
    loop {
        let k = rng.random_range(2..=6);
        let dims: Vec<usize> = (0..k).map(|_| rng.random_range(2..=4)).collect();
        if dims.iter().product::<usize>() > 64 {
            continue;
        }
        let m = rng.random_range(2..=k.min(4));
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(rng);
        let mut cuts: Vec<usize> = (1..k).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts[..m - 1].to_vec();
        cuts.sort();
        let mut groups = Vec::new();
        let mut start = 0;
        for c in cuts.into_iter().chain(std::iter::once(k)) {
            groups.push(order[start..c].to_vec());
            start = c;
        }
        return SubsystemSplit::new(&dims, groups).unwrap();
    }
}

fn random_state(split: &SubsystemSplit, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::random(split.subsystem_dims().to_vec(), rng).unwrap()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn identity_suite() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let config = SolverConfig::default();
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    let mut violations = 0;
    for _ in 0..200 {
        let split = random_split(&mut rng);
        let psi = random_state(&split, &mut rng);
        let r = match nearest_product_state(&psi, &split, &config) {
            Ok(r) => r,
            Err(Error::Convergence { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        checked += 1;
        let np = r.product_state.norm_product;
        let phi = r.product_state.assemble(&split).unwrap();
        let overlap = inner_product(&phi, &psi).unwrap();
        let d2 = distance_squared(&phi, &psi).unwrap();
        let phi_n = phi.normalized().unwrap();
        let d2n = distance_squared(&phi_n, &psi).unwrap();
        let devs = [
            (overlap - Complex64::new(np, 0.0)).norm(),
            (d2 - (1.0 - np)).abs(),
            (d2n - 2.0 * (1.0 - np.sqrt())).abs(),
        ];
        let dev = devs.iter().copied().fold(0.0, f64::max);
        worst = worst.max(dev);
        if dev > 1e-9 || np > 1.0 + 1e-10 {
            violations += 1;
        }
    }
    let elapsed = t0.elapsed();
    verdict(
        violations == 0 && checked > 0 && elapsed <= Duration::from_secs(60),
        format!(
            "{checked} converged results checked ({skipped} unconverged), worst deviation {worst:.2e} (tol 1e-9), {:.2}s (limit 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn schmidt_correspondence() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let config = SolverConfig::default();
    let (mut worst_np, mut worst_spec) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = rng.random_range(2..=8);
        let v = rng.random_range(2..=8);
        let psi = StateVector::random(vec![u, v], &mut rng).unwrap();
        let split = SubsystemSplit::each_subsystem(&[u, v]).unwrap();
        let spec_a = reduced_density_matrix(&psi, &split, Keep::A).unwrap().eig().unwrap().values;
        let spec_b = reduced_density_matrix(&psi, &split, Keep::B).unwrap().eig().unwrap().values;
        worst_spec = worst_spec.max(max_dev(&spec_a, &spec_b));
        let r = nearest_product_state(&psi, &split, &config).unwrap();
        worst_np = worst_np.max((r.product_state.norm_product - spec_a[0]).abs());
    }
    let elapsed = t0.elapsed();
    verdict(
        worst_np <= 1e-8 && worst_spec <= 1e-10 && elapsed <= Duration::from_secs(30),
        format!(
            "|N_A N_B - lambda_max| <= {worst_np:.2e} (tol 1e-8), spectra differ <= {worst_spec:.2e} (tol 1e-10), {:.2}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn qubit_closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let (mut worst_mu, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = rng.random_range(2..=16);
        let psi = StateVector::random(vec![2, u], &mut rng).unwrap();
        let split = SubsystemSplit::each_subsystem(&[2, u]).unwrap();
        let q = qubit_split_closed_form(&psi, &split).unwrap();
        let spec = reduced_density_matrix(&psi, &split, Keep::A).unwrap().eig().unwrap().values;
        worst_mu = worst_mu.max(max_dev(&[q.mu_plus, q.mu_minus], &spec));
        worst_sum = worst_sum.max((q.mu_plus + q.mu_minus - 1.0).abs());
    }
    verdict(
        worst_mu <= 1e-10 && worst_sum <= 1e-12,
        format!("mu vs spectrum <= {worst_mu:.2e} (tol 1e-10), |mu+ + mu- - 1| <= {worst_sum:.2e} (tol 1e-12)"),
    )
}

/// Largest `|<a⊗b⊗...|ψ>|²` over unit factors `(cos t, sin t)`.
///
/// For a state with nonnegative real amplitudes replacing every factor entry by
/// its modulus cannot lower the overlap, so this restricted search is exact.
struct GridOracle<'a> {
    psi: &'a StateVector,
    qubits: usize,
}

impl GridOracle<'_> {
    fn overlap_sq(&self, t: &[f64]) -> f64 {
        let mut s = 0.0;
        for (idx, a) in self.psi.amplitudes().iter().enumerate() {
            let mut w = a.re;
            for (q, &tq) in t.iter().enumerate() {
                let bit = (idx >> (self.qubits - 1 - q)) & 1;
                w *= if bit == 0 { tq.cos() } else { tq.sin() };
            }
            s += w;
        }
        s * s
    }

    fn grid(&self, steps: usize) -> (f64, Vec<f64>) {
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        let mut best = (f64::MIN, vec![0.0; self.qubits]);
        let total = (steps + 1).pow(self.qubits as u32);
        let mut t = vec![0.0; self.qubits];
        for mut code in 0..total {
            for x in t.iter_mut() {
                *x = (code % (steps + 1)) as f64 * h;
                code /= steps + 1;
            }
            let v = self.overlap_sq(&t);
            if v > best.0 {
                best = (v, t.clone());
            }
        }
        best
    }

    /// Compass search from the grid optimum down to step 1e-12.
    fn refine(&self, start: (f64, Vec<f64>), step: f64) -> f64 {
        let (mut best, mut t) = start;
        let mut h = step;
        while h > 1e-12 {
            let mut improved = false;
            for q in 0..self.qubits {
                for dir in [-1.0, 1.0] {
                    let mut trial = t.clone();
                    trial[q] += dir * h;
                    let v = self.overlap_sq(&trial);
                    if v > best {
                        best = v;
                        t = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best
    }
}

fn canonical_values() -> Verdict {
    let config = SolverConfig::default();
    let cases = [
        ("Bell", StateVector::ghz(2), 0.5),
        ("GHZ", StateVector::ghz(3), 0.5),
        ("W", StateVector::w(3), 5.0 / 9.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, psi, expected) in cases {
        let qubits = psi.dims().len();
        let oracle = GridOracle { psi: &psi, qubits };
        let steps = 160;
        let coarse = oracle.grid(steps);
        let grid_value = 1.0 - coarse.0;
        let refined = 1.0 - oracle.refine(coarse, std::f64::consts::FRAC_PI_2 / steps as f64);
        let split = SubsystemSplit::each_subsystem(psi.dims()).unwrap();
        let solver = nearest_product_state(&psi, &split, &config).unwrap().sin2_theta_c;
        let pass = (grid_value - expected).abs() <= 1e-3 && (solver - refined).abs() <= 1e-6;
        ok &= pass;
        parts.push(format!(
            "{name}: grid {grid_value:.6}, refined {refined:.12}, solver {solver:.12}"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn schmidt_reconstruction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let (mut worst_fid, mut worst_info) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = rng.random_range(2..=8);
        let v = rng.random_range(2..=8);
        let psi = StateVector::random(vec![u, v], &mut rng).unwrap();
        let split = SubsystemSplit::each_subsystem(&[u, v]).unwrap();
        let r = schmidt_decompose(&psi, &split).unwrap();
        let factors_a = &r.left_basis;
        let factors_b = &r.right_basis;
        let mut rebuilt = vec![Complex64::new(0.0, 0.0); u * v];
        for k in 0..r.coefficients.len() {
            let term = assemble_product(&[factors_a[k].clone(), factors_b[k].clone()], &split).unwrap();
            for (x, y) in rebuilt.iter_mut().zip(term.amplitudes()) {
                *x += r.coefficients[k].max(0.0).sqrt() * y;
            }
        }
        let rebuilt = StateVector::new(vec![u, v], rebuilt).unwrap();
        let fid = inner_product(&psi, &rebuilt).unwrap().norm_sqr();
        worst_fid = worst_fid.max(1.0 - fid);
        let s: f64 = r.coefficients.iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum();
        let k = 1.0 / r.coefficients.iter().map(|p| p * p).sum::<f64>();
        worst_info = worst_info
            .max((s - r.entropy_bits).abs())
            .max((s * std::f64::consts::LN_2 - r.entropy_nats).abs())
            .max((k - r.participation).abs());
    }
    verdict(
        worst_fid <= 1e-9 && worst_info <= 1e-10,
        format!("1 - fidelity <= {worst_fid:.2e} (tol 1e-9), entropy/K deviation <= {worst_info:.2e} (tol 1e-10)"),
    )
}

fn corpus_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn corpus() -> Vec<(String, StateVector)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let (psi, _) = parse_state_file(&text, false).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), psi)
        })
        .collect()
}

fn partovi_chain() -> Verdict {
    let mut states = corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6);
    for n in [4, 5] {
        states.push((format!("random {n}-qubit"), StateVector::random(vec![2; n], &mut rng).unwrap()));
        states.push((format!("GHZ {n}"), StateVector::ghz(n)));
        states.push((format!("W {n}"), StateVector::w(n)));
    }
    let (mut worst_fid, mut orderings, mut spread_max) = (0.0f64, 0, (0.0f64, String::new()));
    let mut table_ok = true;
    for (name, psi) in &states {
        let split = SubsystemSplit::each_subsystem(psi.dims()).unwrap();
        let search = minimize_over_orderings(psi, &split).unwrap();
        for (ordering, _) in &search.table {
            let c = build_chain(psi, &split, ordering).unwrap();
            worst_fid = worst_fid.max(1.0 - c.reconstruction_fidelity);
            orderings += 1;
        }
        let values: Vec<f64> = search.table.iter().map(|(_, v)| *v).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if split.num_factors() == 3 {
            table_ok &= values.len() == 6 && search.best.chain_sin2_theta == min;
        }
        if max - min > spread_max.0 {
            spread_max = (max - min, name.clone());
        }
    }
    verdict(
        worst_fid <= 1e-8 && table_ok && spread_max.0 > 1e-3,
        format!(
            "{} states, {orderings} orderings, 1 - fidelity <= {worst_fid:.2e} (tol 1e-8), m=3 tables complete: {table_ok}, largest ordering spread {:.6} ({})",
            states.len(),
            spread_max.0,
            spread_max.1
        ),
    )
}

fn als_monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    let config = SolverConfig::default();
    let (mut starts, mut converged, mut worst_rise) = (0, 0, 0.0f64);
    for instance in 0..50 {
        let split = random_split(&mut rng);
        let psi = random_state(&split, &mut rng);
        for index in 1..=16 {
            let init = random_start(&split, instance, index);
            let d0 = distance_squared(&init.assemble(&split).unwrap(), &psi).unwrap();
            let trace = optimize_from(&psi, &split, init, &config).unwrap();
            let mut prev = d0;
            for &d in &trace.d2_history {
                worst_rise = worst_rise.max(d - prev);
                prev = d;
            }
            starts += 1;
            converged += trace.converged as usize;
        }
    }
    let rate = converged as f64 / starts as f64;
    verdict(
        worst_rise <= 1e-12 && rate >= 0.95,
        format!("largest D^2 increase {worst_rise:.2e} (slack 1e-12), {converged}/{starts} starts converged ({:.1}%, need 95%)", 100.0 * rate),
    )
}

fn cli_round_trip() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_entangle");
    let mut failures = Vec::new();
    let files = corpus();
    for (name, _) in &files {
        let path = corpus_dir().join(name);
        let status = Command::new(bin).arg("verify").arg(&path).output().unwrap().status;
        if status.code() != Some(0) {
            failures.push(format!("verify {name} exited {:?}", status.code()));
        }
        let run = || {
            Command::new(bin)
                .args(["summary", "--json", "--seed", "7"])
                .arg(&path)
                .output()
                .unwrap()
                .stdout
        };
        let first = run();
        if first.is_empty() || run() != first {
            failures.push(format!("summary {name} not byte-identical"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("verify exit 0 and identical JSON on all {} corpus files", files.len())
        } else {
            failures.join("; ")
        },
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("identity suite", identity_suite),
        ("Schmidt correspondence", schmidt_correspondence),
        ("qubit closed form", qubit_closed_form),
        ("canonical values", canonical_values),
        ("Schmidt reconstruction", schmidt_reconstruction),
        ("sequential chain", partovi_chain),
        ("ALS monotonicity", als_monotonicity),
        ("CLI round-trip", cli_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        failed += !v.passed as usize;
        println!(
            "criterion {} {:<24} {}  {}",
            i + 1,
            name,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
