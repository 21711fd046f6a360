//! Scenario runner behind the `oscwalk` binary: load or generate instances,
//! run either problem or either reduction with dual-path verification, and
//! emit JSON/CSV reports plus machine-readable golden vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_hamiltonian_exact, evolve_schrodinger_exact, total_energy_dense};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::harmonic_oscillator::{
    all_outcomes, classify_stability, kappa_to_a, total_energy, Outcome, SpringSystem,
    StabilityCase,
};
use crate::ho_to_qw;
use crate::oracle::Oracle;
use crate::quantum_walk::{validate_qw_problem, QuantumWalkProblem};
use crate::qw_to_ho;
use crate::transition::TransitionOracle;
use crate::variants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Run a quantum walk and report its output distribution.
    Qw,
    /// Run a spring system and report its energy distribution.
    Ho,
    /// Walk-to-oscillator reduction with dual-path verification.
    QwToHo,
    /// Oscillator-to-walk reduction with dual-path verification.
    HoToQw,
    /// Check the three worked matrix examples and their stability cases.
    AppendixA,
    /// Check the worked two-vertex reconstruction example.
    AppendixB,
    /// Check the sampling/estimation/decision conversions.
    VariantsCheck,
}

impl Scenario {
    fn name(&self) -> &'static str {
        match self {
            Scenario::Qw => "qw",
            Scenario::Ho => "ho",
            Scenario::QwToHo => "qw-to-ho",
            Scenario::HoToQw => "ho-to-qw",
            Scenario::AppendixA => "appendix-a",
            Scenario::AppendixB => "appendix-b",
            Scenario::VariantsCheck => "variants-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "oscwalk",
    about = "Quantum walks, coupled oscillator networks, and the reductions between them"
)]
pub struct Cli {
    /// Pipeline to run.
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,

    /// Instance file (JSON); format depends on the scenario.
    #[arg(long)]
    pub instance: Option<PathBuf>,

    /// Builtin instance generator, `kind:size[:seed]`. Kinds: path, cycle,
    /// star, random-regular, random-sparse, appendix-a-1, appendix-a-2,
    /// appendix-a-3, appendix-b. Without --scenario, writes the graph file.
    #[arg(long)]
    pub generate: Option<String>,

    /// Final evolution time for generated instances.
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,

    /// Comma-separated probe times; defaults to t_final only.
    #[arg(long)]
    pub probe_times: Option<String>,

    /// Distribution-error tolerance for pass/fail.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// RNG seed for generators and the variants scenario.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the golden vectors for the worked examples into this directory.
    #[arg(long)]
    pub emit_golden: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub query_counts: BTreeMap<String, u64>,
    pub wall_clock_seconds: f64,
}

impl VerificationReport {
    fn new(scenario: Scenario) -> Self {
        Self {
            scenario: scenario.name().to_string(),
            pass: true,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            query_counts: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        }
    }

    fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value <= tolerance;
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            pass,
        });
    }

    fn metric(&mut self, name: &str, value: impl Serialize) {
        self.metrics.insert(
            name.to_string(),
            serde_json::to_value(value).expect("serializable metric"),
        );
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flattened projection: one record per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record,name,value,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "check,{},{},{},{}\n",
                c.name, c.value, c.tolerance, c.pass
            ));
        }
        for (name, value) in &self.metrics {
            let rendered = match value {
                serde_json::Value::Number(x) => x.to_string(),
                other => format!("\"{}\"", other.to_string().replace('"', "\"\"")),
            };
            out.push_str(&format!("metric,{name},{rendered},,\n"));
        }
        for (name, count) in &self.query_counts {
            out.push_str(&format!("query,{name},{count},,\n"));
        }
        out.push_str(&format!(
            "summary,pass,{},,{}\n",
            self.pass, self.pass
        ));
        out
    }
}

/// Graph file: `{ "n": int, "edges": [[v, w, weight], ...] }` with `v <= w`,
/// each undirected edge listed once; self-loops allowed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphFile {
    pub fn to_oracle(&self) -> Result<Oracle> {
        for &(v, w, x) in &self.edges {
            if v > w || w >= self.n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({v}, {w}) violates v <= w < n = {}",
                    self.n
                )));
            }
            if !x.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "edge ({v}, {w}) has non-finite weight"
                )));
            }
        }
        Ok(Oracle::from_edges(self.n, &self.edges))
    }
}

/// Walk problem file: graph fields plus `"initial": [[vertex, re, im], ...]`
/// and `"t_final"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QwProblemFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub initial: Vec<(usize, f64, f64)>,
    pub t_final: f64,
}

impl QwProblemFile {
    pub fn to_problem(&self) -> Result<QuantumWalkProblem> {
        let graph = GraphFile {
            n: self.n,
            edges: self.edges.clone(),
        };
        let initial = self
            .initial
            .iter()
            .map(|&(v, re, im)| (v, Complex64::new(re, im)))
            .collect();
        Ok(QuantumWalkProblem::new(
            graph.to_oracle()?,
            initial,
            self.t_final,
        ))
    }
}

/// Spring problem file: graph fields (spring constants) plus sparse
/// `"q0"`/`"p0"` lists and `"t_final"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoProblemFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub q0: Vec<(usize, f64)>,
    #[serde(default)]
    pub p0: Vec<(usize, f64)>,
    pub t_final: f64,
}

impl HoProblemFile {
    pub fn to_system(&self) -> Result<SpringSystem> {
        let graph = GraphFile {
            n: self.n,
            edges: self.edges.clone(),
        };
        Ok(SpringSystem::new(
            graph.to_oracle()?,
            self.q0.clone(),
            self.p0.clone(),
            self.t_final,
        ))
    }
}

/// Deterministic builtin graphs. Random kinds draw weights in (0, 1] and
/// never emit self-loops.
pub fn generate_graph(kind: &str, size: usize, seed: u64) -> Result<GraphFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = |rng: &mut ChaCha8Rng| 1.0 - rng.gen::<f64>() * 0.9;
    let edges: Vec<(usize, usize, f64)> = match kind {
        "path" => (0..size.saturating_sub(1)).map(|v| (v, v + 1, 1.0)).collect(),
        "cycle" => {
            if size < 3 {
                return Err(Error::InvalidInstance("cycle needs size >= 3".into()));
            }
            let mut e: Vec<_> = (0..size - 1).map(|v| (v, v + 1, 1.0)).collect();
            e.push((0, size - 1, 1.0));
            e
        }
        "star" => (1..size).map(|v| (0, v, 1.0)).collect(),
        "random-sparse" => {
            let mut e = Vec::new();
            let p = (3.0 / size as f64).min(1.0);
            for v in 0..size {
                for w in (v + 1)..size {
                    if rng.gen::<f64>() < p {
                        e.push((v, w, weight(&mut rng)));
                    }
                }
            }
            if e.is_empty() && size >= 2 {
                e.push((0, 1, weight(&mut rng)));
            }
            e
        }
        "random-regular" => {
            if size < 5 {
                return Err(Error::InvalidInstance("random-regular needs size >= 5".into()));
            }
            // Circulant graph over two random distinct offsets: 4-regular,
            // deterministic in the seed.
            let half = size / 2;
            let o1 = rng.gen_range(1..half.max(2));
            let mut o2 = rng.gen_range(1..half.max(2));
            while o2 == o1 {
                o2 = rng.gen_range(1..half.max(2));
            }
            let mut seen = BTreeSet::new();
            let mut e = Vec::new();
            for &o in &[o1, o2] {
                let x = weight(&mut rng);
                for v in 0..size {
                    let w = (v + o) % size;
                    let (a, b) = (v.min(w), v.max(w));
                    if a != b && seen.insert((a, b)) {
                        e.push((a, b, x));
                    }
                }
            }
            e.sort_by_key(|&(a, b, _)| (a, b));
            e
        }
        "appendix-a-1" => {
            return Ok(GraphFile {
                n: 3,
                edges: vec![(0, 1, 1.0), (1, 2, 1.0)],
            })
        }
        "appendix-a-2" => {
            return Ok(GraphFile {
                n: 4,
                edges: vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
            })
        }
        "appendix-a-3" => {
            return Ok(GraphFile {
                n: 4,
                edges: vec![
                    (0, 0, 6.0),
                    (1, 1, 6.0),
                    (2, 2, 6.0),
                    (3, 3, 6.0),
                    (0, 1, 1.0),
                    (0, 2, 1.0),
                    (0, 3, 1.0),
                ],
            })
        }
        "appendix-b" => {
            return Ok(GraphFile {
                n: 2,
                edges: vec![(0, 0, 2.0), (1, 1, 2.0), (0, 1, 1.0)],
            })
        }
        other => return Err(Error::UnknownInstanceKind(other.to_string())),
    };
    if size == 0 {
        return Err(Error::InvalidInstance("size must be positive".into()));
    }
    Ok(GraphFile { n: size, edges })
}

fn parse_generate_spec(spec: &str) -> Result<GraphFile> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(Error::InvalidInstance(format!(
            "generator spec {spec:?} is not kind:size[:seed]"
        )));
    }
    let kind = parts[0];
    let size: usize = parts
        .get(1)
        .map(|s| s.parse())
        .transpose()
        .map_err(|_| Error::InvalidInstance(format!("bad size in {spec:?}")))?
        .unwrap_or(0);
    let seed: u64 = parts
        .get(2)
        .map(|s| s.parse())
        .transpose()
        .map_err(|_| Error::InvalidInstance(format!("bad seed in {spec:?}")))?
        .unwrap_or(0);
    generate_graph(kind, size, seed)
}

fn probe_times(cli: &Cli, t_final: f64) -> Result<Vec<f64>> {
    match &cli.probe_times {
        None => Ok(vec![t_final]),
        Some(text) => {
            let mut times = Vec::new();
            for part in text.split(',') {
                let t: f64 = part
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInstance(format!("bad probe time {part:?}")))?;
                if t < 0.0 {
                    return Err(Error::InvalidInstance("probe times must be >= 0".into()));
                }
                times.push(t);
            }
            Ok(times)
        }
    }
}

fn resolve_qw_problem(cli: &Cli) -> Result<QuantumWalkProblem> {
    if let Some(path) = &cli.instance {
        let file: QwProblemFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        return file.to_problem();
    }
    if let Some(spec) = &cli.generate {
        let graph = parse_generate_spec(spec)?;
        return Ok(QuantumWalkProblem::single_vertex(
            graph.to_oracle()?,
            0,
            cli.t_final,
        ));
    }
    Err(Error::InvalidInstance(
        "scenario needs --instance or --generate".into(),
    ))
}

fn resolve_ho_system(cli: &Cli) -> Result<SpringSystem> {
    if let Some(path) = &cli.instance {
        let file: HoProblemFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        return file.to_system();
    }
    if let Some(spec) = &cli.generate {
        let graph = parse_generate_spec(spec)?;
        return Ok(SpringSystem::new(
            graph.to_oracle()?,
            Vec::new(),
            vec![(0, 1.0)],
            cli.t_final,
        ));
    }
    Err(Error::InvalidInstance(
        "scenario needs --instance or --generate".into(),
    ))
}

fn distribution_metric(dist: impl Iterator<Item = (String, f64)>) -> BTreeMap<String, f64> {
    dist.collect()
}

fn run_qw(cli: &Cli, report: &mut VerificationReport) -> Result<()> {
    let problem = resolve_qw_problem(cli)?;
    let validation = validate_qw_problem(&problem);
    report.check(
        "problem_valid",
        validation.violations.len() as f64,
        0.0,
    );
    let t_dense = problem.adjacency.dense()?;
    for &t in &probe_times(cli, problem.t_final)? {
        let state = evolve_schrodinger_exact(&t_dense, &problem.initial_dense(), t)?;
        report.check(
            &format!("norm_drift_t{t}"),
            (state.norm_squared() - 1.0).abs(),
            cli.tol.max(1e-10),
        );
    }
    let dist = problem.output_distribution()?;
    report.metric(
        "distribution",
        distribution_metric(dist.iter().map(|(v, p)| (v.to_string(), p))),
    );
    report
        .query_counts
        .insert("adjacency".into(), problem.adjacency.queries());
    Ok(())
}

fn run_ho(cli: &Cli, report: &mut VerificationReport) -> Result<()> {
    let system = resolve_ho_system(cli)?;
    let a = kappa_to_a(&system.kappa).dense()?;
    let initial = system.initial_dense();
    let h0 = total_energy(&system.kappa, &initial)?;
    report.metric("energy", h0);
    for &t in &probe_times(cli, system.t_final)? {
        let state = evolve_hamiltonian_exact(&a, &initial, t)?;
        let ht = total_energy_dense(&a, &state);
        report.check(
            &format!("energy_drift_t{t}"),
            ((ht - h0) / h0).abs(),
            cli.tol.max(1e-10),
        );
    }
    let dist = system.output_distribution()?;
    report.metric(
        "distribution",
        distribution_metric(dist.iter().map(|(s, p)| (s.to_string(), p))),
    );
    report
        .query_counts
        .insert("kappa".into(), system.kappa.queries());
    Ok(())
}

fn run_qw_to_ho(cli: &Cli, report: &mut VerificationReport) -> Result<()> {
    let problem = resolve_qw_problem(cli)?;
    let reduction = qw_to_ho::full_reduction(&problem, None)?;
    let mut max_dist_error: f64 = 0.0;
    for &t in &probe_times(cli, problem.t_final)? {
        let direct = problem.output_distribution_at(t)?;
        let via = reduction.reconstructed_distribution_at(t)?;
        max_dist_error = max_dist_error.max(direct.max_abs_difference(&via));
    }
    report.check("max_dist_error", max_dist_error, cli.tol);
    report.metric("max_dist_error", max_dist_error);
    report.metric("gamma", reduction.gamma);
    report.metric(
        "energy",
        total_energy(&reduction.kappa_bar, &reduction.system.initial_dense())?,
    );

    let mut column_sum_error: f64 = 0.0;
    for s in all_outcomes(&reduction.kappa_bar)? {
        column_sum_error = column_sum_error.max((reduction.c.column_sum(&s) - 1.0).abs());
    }
    report.check("C_column_sum_error", column_sum_error, 1e-10);
    report.metric("C_column_sum_error", column_sum_error);

    report
        .query_counts
        .insert("adjacency".into(), problem.adjacency.queries());
    report
        .query_counts
        .insert("shifted".into(), reduction.shifted.queries());
    report.query_counts.insert("C".into(), reduction.c.queries());
    Ok(())
}

fn run_ho_to_qw(cli: &Cli, report: &mut VerificationReport) -> Result<()> {
    let system = resolve_ho_system(cli)?;
    let reduction = ho_to_qw::full_reduction(&system)?;
    let b_dense = reduction.b.dense()?;
    let walk_t = reduction.problem.adjacency.dense()?;

    let mut max_dist_error: f64 = 0.0;
    let mut subspace_residual: f64 = 0.0;
    for &t in &probe_times(cli, system.t_final)? {
        let direct = system.output_distribution_at(t)?;
        let via = reduction.reconstructed_distribution_at(t)?;
        max_dist_error = max_dist_error.max(direct.max_abs_difference(&via));
        let state = evolve_schrodinger_exact(&walk_t, &reduction.problem.initial_dense(), t)?;
        let sub = ho_to_qw::check_subspace_constraint(&state.amplitudes, &b_dense);
        subspace_residual = subspace_residual
            .max(sub.max_component_violation)
            .max(sub.range_residual);
    }
    report.check("max_dist_error", max_dist_error, cli.tol);
    report.metric("max_dist_error", max_dist_error);
    report.check("subspace_residual", subspace_residual, 1e-8);
    report.metric("subspace_residual", subspace_residual);

    let nonneg_violations = walk_t.iter().filter(|&&x| x < 0.0).count();
    report.check("nonneg_violations", nonneg_violations as f64, 0.0);
    report.metric("nonneg_violations", nonneg_violations);
    report.metric("energy", reduction.h);

    report
        .query_counts
        .insert("kappa".into(), system.kappa.queries());
    report.query_counts.insert("B".into(), reduction.b.queries());
    report
        .query_counts
        .insert("walk_T".into(), reduction.problem.adjacency.queries());
    Ok(())
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn case_label(case: StabilityCase) -> f64 {
    match case {
        StabilityCase::Case1 => 1.0,
        StabilityCase::Case2 => 2.0,
        StabilityCase::Case3 => 3.0,
    }
}

fn split_of(t: &Oracle) -> Result<DMatrix<f64>> {
    qw_to_ho::build_doubled_a_unchecked(t).dense()
}

fn run_appendix_a(report: &mut VerificationReport) -> Result<()> {
    let t1 = fixtures::t1_dense();
    let t1_sq = &t1 * &t1;
    let golden_t1_sq =
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0]);
    report.check("example1_T_squared", max_abs_diff(&t1_sq, &golden_t1_sq), 0.0);

    let t2 = fixtures::t2_dense();
    let t3 = fixtures::t3_dense();
    let shift_err = max_abs_diff(&t3, &(&t2 + DMatrix::identity(4, 4) * 6.0));
    report.check("example3_T_is_shifted_star", shift_err, 0.0);

    let split3 = split_of(&fixtures::t3_shifted_star())?;
    let ad = split3.view((0, 0), (4, 4)).clone_owned();
    let ao = -split3.view((0, 4), (4, 4)).clone_owned();
    let golden_ad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        39.0, 37.0, 37.0, 37.0,
    ]));
    report.check("example3_A_diag", max_abs_diff(&ad, &golden_ad), 0.0);
    let golden_row = [0.0, 12.0, 12.0, 12.0];
    let row_err = (0..4)
        .map(|j| (ao[(0, j)] - golden_row[j]).abs())
        .fold(0.0f64, f64::max);
    report.check("example3_A_offdiag_row", row_err, 0.0);
    report.metric("example3_A_diag", (0..4).map(|i| ad[(i, i)]).collect::<Vec<_>>());
    report.metric("example3_A_offdiag_row", golden_row.to_vec());

    let cases = [
        ("example1_case", fixtures::t1_path(), 1.0),
        ("example2_case", fixtures::t2_star(), 3.0),
        ("example3_case", fixtures::t3_shifted_star(), 1.0),
    ];
    let mut labels = Vec::new();
    for (name, t, expected) in cases {
        let label = case_label(classify_stability(&split_of(&t)?));
        report.check(name, (label - expected).abs(), 0.0);
        labels.push(label as u8);
    }
    report.metric("stability_cases", labels);
    Ok(())
}

fn run_appendix_b(report: &mut VerificationReport) -> Result<()> {
    let shifted = fixtures::two_vertex_shifted();
    let (_, kappa) = qw_to_ho::build_doubled_a(&shifted)?;
    let c = qw_to_ho::build_transition_c(&shifted, 2);

    let x = (1.0f64 / 5.0).sqrt();
    let state = crate::dynamics::PhaseState::new(
        nalgebra::DVector::from_vec(vec![x, 0.0, -x, 0.0]),
        nalgebra::DVector::zeros(4),
        0.0,
    );
    let p_ho = crate::harmonic_oscillator::energy_distribution(&kappa, &state)?;
    let p_qw = qw_to_ho::reconstruct_pqw(&p_ho, &c)?;
    report.check("P_QW_vertex0", (p_qw.probability(0) - 0.8).abs(), 1e-12);
    report.check("P_QW_vertex1", (p_qw.probability(1) - 0.2).abs(), 1e-12);
    report.metric(
        "distribution",
        distribution_metric(p_qw.iter().map(|(v, p)| (v.to_string(), p))),
    );

    let mut min_entry = f64::INFINITY;
    let mut entries = BTreeSet::new();
    for s in all_outcomes(&kappa)? {
        for (_, value) in c.col(&s) {
            min_entry = min_entry.min(value);
            entries.insert(format!("{value}"));
        }
    }
    report.check("min_C_entry_is_minus_one", (min_entry + 1.0).abs(), 1e-12);
    report.metric("min_C_entry", min_entry);
    report.metric("C_entries", entries.into_iter().collect::<Vec<_>>());
    report.query_counts.insert("C".into(), c.queries());
    Ok(())
}

fn run_variants_check(cli: &Cli, report: &mut VerificationReport) -> Result<()> {
    let dist = vec![(0usize, 0.8), (1usize, 0.2)];
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);

    let sampler = variants::Sampler::from_distribution(dist.clone());
    let est = variants::estimate_from_samples(&sampler, |&v| v == 0, 0.02, 1e-6, &mut rng);
    report.check("sample_estimate_error", (est - 0.8).abs(), 0.02);
    report.metric("sample_estimate", est);

    let decider = variants::Decider::exact(dist);
    decider.reset_and_read_calls();
    let via_decider = variants::estimate_from_decider(&decider, |&v| v == 0, 1.0 / 64.0)?;
    let calls = decider.reset_and_read_calls();
    report.check("decider_estimate_error", (via_decider - 0.8).abs(), 1.0 / 64.0);
    report.check("decider_calls_minus_budget", calls.saturating_sub(6) as f64, 0.0);
    report.metric("decider_estimate", via_decider);
    report.metric("decider_calls", calls);

    let c = qw_to_ho::build_transition_c(&fixtures::two_vertex_shifted(), 2);
    let wall = variants::Sampler::from_distribution(vec![(Outcome::Spring(1, 1), 1.0)]);
    let refused = matches!(
        variants::map_sample_via_c(&wall, &c, &mut rng),
        Err(Error::NegativeTransitionEntries)
    );
    report.check("negative_sampling_refused", if refused { 0.0 } else { 1.0 }, 0.0);

    let identity: TransitionOracle<usize, usize> = TransitionOracle::identity();
    let exact = variants::Estimator::exact(vec![(0usize, 0.8), (1usize, 0.2)]);
    let mapped = variants::map_estimates_via_c(&exact, &identity, &0, 1e-9);
    report.check("estimate_mapping_error", (mapped - 0.8).abs(), 1e-12);
    Ok(())
}

pub fn run_scenario(cli: &Cli, scenario: Scenario) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new(scenario);
    match scenario {
        Scenario::Qw => run_qw(cli, &mut report)?,
        Scenario::Ho => run_ho(cli, &mut report)?,
        Scenario::QwToHo => run_qw_to_ho(cli, &mut report)?,
        Scenario::HoToQw => run_ho_to_qw(cli, &mut report)?,
        Scenario::AppendixA => run_appendix_a(&mut report)?,
        Scenario::AppendixB => run_appendix_b(&mut report)?,
        Scenario::VariantsCheck => run_variants_check(cli, &mut report)?,
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Writes the worked-example golden vectors as JSON files.
pub fn emit_golden(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let write = |name: &str, value: serde_json::Value| -> Result<()> {
        fs::write(dir.join(name), serde_json::to_string_pretty(&value)?)?;
        Ok(())
    };

    write(
        "example1_t_squared.json",
        serde_json::json!([[1, 0, 1], [0, 2, 0], [1, 0, 1]]),
    )?;
    write("example3_a_diag.json", serde_json::json!([39, 37, 37, 37]))?;
    write("example3_a_offdiag_row.json", serde_json::json!([0, 12, 12, 12]))?;
    write("stability_cases.json", serde_json::json!([1, 3, 1]))?;

    write(
        "two_vertex_kappa.json",
        serde_json::json!({ "wall": 1.0, "cross": 4.0 }),
    )?;
    let c = qw_to_ho::build_transition_c(&fixtures::two_vertex_shifted(), 2);
    let mut rows = serde_json::Map::new();
    for v in 0..2usize {
        let mut entries: Vec<(String, f64)> = c
            .row(&v)
            .into_iter()
            .map(|(s, x)| (s.to_string(), x))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        rows.insert(v.to_string(), serde_json::to_value(entries)?);
    }
    write("two_vertex_c_rows.json", serde_json::Value::Object(rows))?;
    write(
        "two_vertex_distribution.json",
        serde_json::json!({ "0": 0.8, "1": 0.2 }),
    )?;
    Ok(())
}

fn write_payload(cli: &Cli, payload: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, payload)?,
        None => println!("{payload}"),
    }
    Ok(())
}

fn run_inner(cli: &Cli) -> Result<bool> {
    if let Some(dir) = &cli.emit_golden {
        emit_golden(dir)?;
        if cli.scenario.is_none() {
            return Ok(true);
        }
    }
    let Some(scenario) = cli.scenario else {
        if let Some(spec) = &cli.generate {
            let graph = parse_generate_spec(spec)?;
            write_payload(cli, &serde_json::to_string_pretty(&graph)?)?;
            return Ok(true);
        }
        return Err(Error::InvalidInstance(
            "nothing to do: pass --scenario, --generate, or --emit-golden".into(),
        ));
    };
    let report = run_scenario(cli, scenario)?;
    let payload = match cli.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    write_payload(cli, &payload)?;
    Ok(report.pass)
}

/// Entry point for the binary; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
