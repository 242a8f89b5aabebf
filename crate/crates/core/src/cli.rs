//! The `entangle` command-line front end.
//!
//! ```text
//! entangle <schmidt|geometric|partovi|summary|verify> [--split SPEC] [--tol X]
//!          [--starts N] [--max-sweeps N] [--seed N] [--normalize]
//!          [--normalized-variant] [--closed-form] [--json] <file|->
//! ```
//!
//! Exit codes: 0 success, 1 violated identity (`verify`), 2 usage or parse
//! error, 3 convergence failure.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::geometric::{
    bipartite_closed_form, nearest_product_state, normalized_variant, GeometricResult, SolverConfig,
};
use crate::partovi::{minimize_over_orderings, PartoviChainResult, MAX_EXHAUSTIVE_FACTORS};
use crate::schmidt::{qubit_split_closed_form, reduced_density_matrix, schmidt_decompose, Keep};
use crate::state::{inner_product, StateVector, SubsystemSplit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Convergence { .. } | Error::Matrix(_)) => EXIT_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}

/// On-disk state document. Amplitudes are `[re, im]` pairs in row-major order over `dims`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_state(psi: &StateVector, label: Option<&str>) -> Self {
        Self {
            dims: psi.dims().to_vec(),
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            label: label.map(str::to_owned),
        }
    }

    /// Validates the document; `normalize` rescales instead of rejecting off-norm input.
    pub fn into_state(self, normalize: bool) -> Result<StateVector, CliError> {
        if self.dims.is_empty() {
            return Err(CliError::Parse("field `dims`: must list at least one subsystem".into()));
        }
        if let Some(i) = self.dims.iter().position(|&d| d < 2) {
            return Err(CliError::Parse(format!(
                "field `dims[{i}]`: subsystem dimension must be at least 2, got {}",
                self.dims[i]
            )));
        }
        let total = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| CliError::Parse("field `dims`: total dimension overflows".into()))?;
        if self.amplitudes.len() != total {
            return Err(CliError::Parse(format!(
                "field `amplitudes`: dims {:?} need {total} entries, got {}",
                self.dims,
                self.amplitudes.len()
            )));
        }
        if let Some(i) = self.amplitudes.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(CliError::Parse(format!("field `amplitudes[{i}]`: non-finite value")));
        }
        let amps: Vec<Complex64> = self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let psi = StateVector::new(self.dims, amps)?;
        if psi.norm_sq() == 0.0 {
            return Err(CliError::Parse("field `amplitudes`: zero state".into()));
        }
        if normalize {
            return Ok(psi.normalized()?);
        }
        psi.require_normalized().map_err(|e| {
            CliError::Parse(format!("field `amplitudes`: {e} (pass --normalize to rescale)"))
        })?;
        Ok(psi)
    }
}

/// Parses a state document; JSON syntax errors report line and column.
pub fn parse_state_file(text: &str, normalize: bool) -> Result<(StateVector, Option<String>), CliError> {
    let doc: StateFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let label = doc.label.clone();
    Ok((doc.into_state(normalize)?, label))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub tol: f64,
    pub starts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    pub split: String,
    pub normalize: bool,
    pub method: Option<String>,
    pub ordering_policy: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual: Option<f64>,
    pub sweeps: Option<usize>,
    pub starts_used: Option<usize>,
    pub warnings: Vec<String>,
}

/// Machine-readable report emitted by `--json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub input_label: String,
    pub command: String,
    pub parameters: Parameters,
    pub results: Value,
    pub diagnostics: Diagnostics,
}

#[derive(Parser, Debug)]
#[command(name = "entangle", version, about = "Entanglement measures of pure multipartite states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Schmidt decomposition, entropy and participation for each factor against the rest
    Schmidt(Common),
    /// Nearest product state and the geometric measure
    Geometric {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodFlags,
    },
    /// Sequential Schmidt chain over all factor orderings
    Partovi(Common),
    /// All of the above
    Summary {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodFlags,
    },
    /// Check the cross-module identities on the input state
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Factor grouping such as "0,1|2"; defaults to one factor per subsystem
    #[arg(long)]
    split: Option<String>,
    /// Residual tolerance of the alternating solver
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rescale the input to unit norm instead of rejecting it
    #[arg(long)]
    normalize: bool,
    /// Emit the JSON report envelope
    #[arg(long)]
    json: bool,
    /// State file, or `-` for standard input
    file: String,
}

#[derive(Args, Debug)]
struct MethodFlags {
    /// Iterate with unit-norm factors
    #[arg(long, conflicts_with = "closed_form")]
    normalized_variant: bool,
    /// Use the reduced-density-matrix eigenpair (bipartite splits only)
    #[arg(long)]
    closed_form: bool,
}

impl Common {
    fn config(&self) -> Result<SolverConfig, CliError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.starts == 0 || self.max_sweeps == 0 {
            return Err(CliError::Usage("--starts and --max-sweeps must be positive".into()));
        }
        Ok(SolverConfig {
            starts: self.starts,
            max_sweeps: self.max_sweeps,
            tol: self.tol,
            seed: self.seed,
        })
    }
}

/// A loaded state with its split.
struct Input {
    psi: StateVector,
    split: SubsystemSplit,
    label: String,
}

fn load(common: &Common, stdin: &mut dyn Read) -> Result<Input, CliError> {
    let mut text = String::new();
    let read = if common.file == "-" {
        stdin.read_to_string(&mut text)
    } else {
        std::fs::File::open(&common.file).and_then(|mut f| f.read_to_string(&mut text))
    };
    read.map_err(|source| CliError::Io {
        path: common.file.clone(),
        source,
    })?;
    let (psi, label) = parse_state_file(&text, common.normalize)?;
    let split = match &common.split {
        Some(spec) => SubsystemSplit::parse(spec, psi.dims())?,
        None => SubsystemSplit::each_subsystem(psi.dims()).map_err(|e| {
            CliError::Usage(format!("{e}; a single-subsystem state needs no analysis"))
        })?,
    };
    let label = label.unwrap_or_else(|| if common.file == "-" { "stdin".into() } else { common.file.clone() });
    Ok(Input { psi, split, label })
}

fn split_spec(split: &SubsystemSplit) -> String {
    split
        .groups()
        .iter()
        .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("|")
}

/// Bipartitions analysed by `schmidt`: the split itself when bipartite, else each factor against the rest.
fn bipartitions(split: &SubsystemSplit) -> Result<Vec<(usize, SubsystemSplit)>, Error> {
    if split.num_factors() == 2 {
        return Ok(vec![(0, split.clone())]);
    }
    (0..split.num_factors()).map(|f| Ok((f, split.peel(f)?))).collect()
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vectors_json(vs: &[Vec<Complex64>]) -> Value {
    Value::Array(vs.iter().map(|v| Value::Array(v.iter().copied().map(complex_json).collect())).collect())
}

fn schmidt_results(input: &Input, warnings: &mut Vec<String>) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    for (factor, bip) in bipartitions(&input.split)? {
        let r = schmidt_decompose(&input.psi, &bip)?;
        let qubit = if bip.factor_dims()[0] == 2 {
            Some(qubit_split_closed_form(&input.psi, &bip)?)
        } else if bip.factor_dims()[1] == 2 {
            let swapped = SubsystemSplit::new(bip.subsystem_dims(), vec![bip.groups()[1].clone(), bip.groups()[0].clone()])?;
            Some(qubit_split_closed_form(&input.psi, &swapped)?)
        } else {
            None
        };
        if r.degenerate_top {
            warnings.push(format!("split {}: degenerate top Schmidt coefficient", split_spec(&bip)));
        }
        rows.push(json!({
            "factor": factor,
            "split": split_spec(&bip),
            "coefficients": r.coefficients,
            "entropy_bits": r.entropy_bits,
            "entropy_nats": r.entropy_nats,
            "participation": r.participation,
            "rank": r.rank,
            "degenerate_top": r.degenerate_top,
            "left_basis": vectors_json(&r.left_basis),
            "right_basis": vectors_json(&r.right_basis),
            "qubit_closed_form": qubit,
        }));
    }
    Ok(json!({ "bipartitions": rows }))
}

fn geometric_json(r: &GeometricResult) -> Value {
    json!({
        "method": r.method,
        "sin2_theta_c": r.sin2_theta_c,
        "lambda": r.lambda,
        "cos_theta_c": r.cos_theta_c,
        "norm_product": r.product_state.norm_product,
        "d2_unnormalized": r.d2_unnormalized,
        "d2_normalized": r.d2_normalized,
        "overlap": complex_json(r.overlap),
        "factor_norms": r.product_state.factor_norms,
        "unit_factors": vectors_json(&r.product_state.unit_factors()),
        "critical_values": r.critical_values,
        "degenerate": r.degenerate,
        "converged": r.converged,
    })
}

fn run_geometric(input: &Input, config: &SolverConfig, method: &MethodFlags) -> Result<GeometricResult, CliError> {
    let r = if method.closed_form {
        bipartite_closed_form(&input.psi, &input.split)?
    } else if method.normalized_variant {
        normalized_variant(&input.psi, &input.split, config)?
    } else {
        nearest_product_state(&input.psi, &input.split, config)?
    };
    Ok(r)
}

fn record_geometric(r: &GeometricResult, diagnostics: &mut Diagnostics) {
    diagnostics.residual = Some(r.residual);
    diagnostics.sweeps = Some(r.sweeps);
    diagnostics.starts_used = Some(r.starts_used);
    if r.degenerate {
        diagnostics
            .warnings
            .push("best critical value is degenerate; the product state is not unique".into());
    }
}

fn chain_json(c: &PartoviChainResult) -> Value {
    let stages: Vec<Value> = c
        .stages
        .iter()
        .map(|s| {
            json!({
                "branch": s.branch,
                "peeled_factor": s.peeled_factor,
                "remaining_factors": s.remaining_factors,
                "coefficients": s.coefficients,
            })
        })
        .collect();
    let joint: Vec<Value> = c
        .joint_coefficients
        .iter()
        .map(|j| json!({ "branch": j.branch, "weight": j.weight }))
        .collect();
    json!({
        "ordering": c.ordering,
        "chain_sin2_theta": c.chain_sin2_theta,
        "chain_cos_theta": c.chain_cos_theta,
        "reconstruction_fidelity": c.reconstruction_fidelity,
        "joint_coefficients": joint,
        "stages": stages,
        "top_branch_factors": vectors_json(&c.top_branch_factors),
    })
}

const ORDERING_POLICY: &str = "exhaustive; lexicographic tie-break; product state from the top branch of each stage";

fn partovi_results(input: &Input) -> Result<Value, CliError> {
    if input.split.num_factors() > MAX_EXHAUSTIVE_FACTORS {
        return Err(CliError::Usage(format!(
            "partovi searches at most {MAX_EXHAUSTIVE_FACTORS} factors exhaustively; group subsystems with --split"
        )));
    }
    let search = minimize_over_orderings(&input.psi, &input.split)?;
    let table: Vec<Value> = search
        .table
        .iter()
        .map(|(o, v)| json!({ "ordering": o, "chain_sin2_theta": v }))
        .collect();
    Ok(json!({ "best": chain_json(&search.best), "orderings": table }))
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    deviation: f64,
    tolerance: f64,
    passed: bool,
}

fn check(checks: &mut Vec<Check>, name: impl Into<String>, deviation: f64, tolerance: f64) {
    checks.push(Check {
        name: name.into(),
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    });
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn verify_checks(input: &Input, config: &SolverConfig) -> Result<(Vec<Check>, GeometricResult), CliError> {
    let (psi, split) = (&input.psi, &input.split);
    let mut checks = Vec::new();

    for (_, bip) in bipartitions(split)? {
        let tag = split_spec(&bip);
        let spec_a = reduced_density_matrix(psi, &bip, Keep::A)?.eig()?.values;
        let spec_b = reduced_density_matrix(psi, &bip, Keep::B)?.eig()?.values;
        check(&mut checks, format!("[{tag}] spectrum rho_A = rho_B"), max_dev(&spec_a, &spec_b), 1e-10);

        let schmidt = schmidt_decompose(psi, &bip)?;
        let rebuilt = schmidt.reconstruct(&bip)?;
        let fidelity = inner_product(psi, &rebuilt)?.norm_sqr();
        check(&mut checks, format!("[{tag}] Schmidt reconstruction 1 - fidelity"), 1.0 - fidelity, 1e-9);

        for side in 0..2 {
            if bip.factor_dims()[side] != 2 {
                continue;
            }
            let oriented = if side == 0 {
                bip.clone()
            } else {
                SubsystemSplit::new(bip.subsystem_dims(), vec![bip.groups()[1].clone(), bip.groups()[0].clone()])?
            };
            let q = qubit_split_closed_form(psi, &oriented)?;
            let marginal = reduced_density_matrix(psi, &oriented, Keep::A)?.eig()?.values;
            check(
                &mut checks,
                format!("[{}] qubit closed form mu vs marginal spectrum", split_spec(&oriented)),
                max_dev(&[q.mu_plus, q.mu_minus], &marginal),
                1e-10,
            );
            check(
                &mut checks,
                format!("[{}] mu_plus + mu_minus = 1", split_spec(&oriented)),
                (q.mu_plus + q.mu_minus - 1.0).abs(),
                1e-12,
            );
        }
    }

    let g = nearest_product_state(psi, split, config)?;
    let np = g.product_state.norm_product;
    check(&mut checks, "<phi|psi> = <phi|phi>", (g.overlap - Complex64::new(np, 0.0)).norm(), 1e-9);
    check(&mut checks, "D^2 = 1 - Lambda^2", (g.d2_unnormalized - (1.0 - np)).abs(), 1e-9);
    check(&mut checks, "D_N^2 = 2(1 - Lambda)", (g.d2_normalized - 2.0 * (1.0 - np.sqrt())).abs(), 1e-9);
    check(&mut checks, "Lambda^2 <= 1", (np - 1.0).max(0.0), 1e-10);

    if split.num_factors() == 2 {
        let top = reduced_density_matrix(psi, split, Keep::A)?.eig()?.values[0];
        check(&mut checks, "Lambda^2 = largest marginal eigenvalue", (np - top).abs(), 1e-8);
    }

    if split.num_factors() <= MAX_EXHAUSTIVE_FACTORS {
        let search = minimize_over_orderings(psi, split)?;
        let n = search.table.len();
        let mut worst_fidelity = 0.0f64;
        let mut worst_joint = 0.0f64;
        for (ordering, _) in &search.table {
            let c = crate::partovi::build_chain(psi, split, ordering)?;
            worst_fidelity = worst_fidelity.max(1.0 - c.reconstruction_fidelity);
            let total: f64 = c.joint_coefficients.iter().map(|j| j.weight).sum();
            worst_joint = worst_joint.max((total - 1.0).abs());
        }
        check(&mut checks, format!("chain reconstruction 1 - fidelity ({n} orderings)"), worst_fidelity, 1e-8);
        check(&mut checks, format!("chain joint coefficients sum to 1 ({n} orderings)"), worst_joint, 1e-9);
    }
    Ok((checks, g))
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

/// Plain-text rendering of a results tree.
fn render(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if is_scalar_list(v) {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(v)));
                } else if v.is_object() || v.is_array() {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render(v, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(v)));
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if item.is_object() {
                    out.push_str(&format!("{pad}-\n"));
                    render(item, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}- {}\n", inline(item)));
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}

fn is_scalar_list(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| !i.is_object() && (!i.is_array() || is_scalar_list(i))),
        _ => false,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => format_sig(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(inline).collect::<Vec<_>>().join(", ")),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

struct Outcome {
    envelope: ReportEnvelope,
    code: i32,
}

fn execute(cli: Cli, stdin: &mut dyn Read) -> Result<Outcome, CliError> {
    let (name, common, method) = match &cli.command {
        Command::Schmidt(c) => ("schmidt", c, None),
        Command::Geometric { common, method } => ("geometric", common, Some(method)),
        Command::Partovi(c) => ("partovi", c, None),
        Command::Summary { common, method } => ("summary", common, Some(method)),
        Command::Verify(c) => ("verify", c, None),
    };
    let config = common.config()?;
    let input = load(common, stdin)?;
    let mut diagnostics = Diagnostics::default();
    let mut code = EXIT_OK;
    let method_name = method.map(|m| {
        if m.closed_form {
            "closed_form"
        } else if m.normalized_variant {
            "normalized_variant"
        } else {
            "alternating"
        }
        .to_string()
    });
    let mut ordering_policy = None;

    let results = match &cli.command {
        Command::Schmidt(_) => schmidt_results(&input, &mut diagnostics.warnings)?,
        Command::Geometric { method, .. } => {
            let r = run_geometric(&input, &config, method)?;
            record_geometric(&r, &mut diagnostics);
            geometric_json(&r)
        }
        Command::Partovi(_) => {
            ordering_policy = Some(ORDERING_POLICY.to_string());
            partovi_results(&input)?
        }
        Command::Summary { method, .. } => {
            let schmidt = schmidt_results(&input, &mut diagnostics.warnings)?;
            let r = run_geometric(&input, &config, method)?;
            record_geometric(&r, &mut diagnostics);
            let partovi = if input.split.num_factors() <= MAX_EXHAUSTIVE_FACTORS {
                ordering_policy = Some(ORDERING_POLICY.to_string());
                partovi_results(&input)?
            } else {
                diagnostics
                    .warnings
                    .push(format!("partovi skipped: more than {MAX_EXHAUSTIVE_FACTORS} factors"));
                Value::Null
            };
            json!({ "schmidt": schmidt, "geometric": geometric_json(&r), "partovi": partovi })
        }
        Command::Verify(_) => {
            let (checks, g) = verify_checks(&input, &config)?;
            record_geometric(&g, &mut diagnostics);
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                code = EXIT_VIOLATION;
            }
            json!({ "passed": failed == 0, "failed": failed, "checks": checks })
        }
    };

    let envelope = ReportEnvelope {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_label: input.label,
        command: name.to_string(),
        parameters: Parameters {
            tol: config.tol,
            starts: config.starts,
            max_sweeps: config.max_sweeps,
            seed: config.seed,
            split: split_spec(&input.split),
            normalize: common.normalize,
            method: method_name,
            ordering_policy,
        },
        results,
        diagnostics,
    };
    Ok(Outcome { envelope, code })
}

fn render_human(env: &ReportEnvelope) -> String {
    let mut out = format!(
        "{} {}  input: {}  split: {}\n",
        env.command, env.tool_version, env.input_label, env.parameters.split
    );
    if env.command == "verify" {
        let checks = env.results["checks"].as_array().cloned().unwrap_or_default();
        for c in &checks {
            out.push_str(&format!(
                "{:4}  {:<56} {:>20}  (tol {})\n",
                if c["passed"].as_bool() == Some(true) { "ok" } else { "FAIL" },
                c["name"].as_str().unwrap_or_default(),
                inline(&c["deviation"]),
                inline(&c["tolerance"]),
            ));
        }
        out.push_str(&format!(
            "{} of {} checks passed\n",
            checks.len() as u64 - env.results["failed"].as_u64().unwrap_or(0),
            checks.len()
        ));
    } else {
        render(&env.results, 0, &mut out);
    }
    if let Some(r) = env.diagnostics.residual {
        out.push_str(&format!(
            "residual {}  sweeps {}  starts {}\n",
            format_sig(r),
            env.diagnostics.sweeps.unwrap_or(0),
            env.diagnostics.starts_used.unwrap_or(0)
        ));
    }
    out
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let to_stdout = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if to_stdout { stdout } else { stderr };
            let _ = write!(sink, "{e}");
            return if to_stdout { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let json = match &cli.command {
        Command::Schmidt(c) | Command::Partovi(c) | Command::Verify(c) => c.json,
        Command::Geometric { common, .. } | Command::Summary { common, .. } => common.json,
    };
    match execute(cli, stdin) {
        Ok(outcome) => {
            for w in &outcome.envelope.diagnostics.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let text = if json {
                let mut s = serde_json::to_string_pretty(&outcome.envelope).expect("report serializes");
                s.push('\n');
                s
            } else {
                render_human(&outcome.envelope)
            };
            if stdout.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "entangle: {e}");
            e.exit_code()
        }
    }
}
