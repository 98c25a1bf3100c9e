//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 unreadable or
//! malformed topology file, 3 well-formed but invalid topology.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{analyze, fmt_dof, AnalyzeOptions, BoundReport};
use crate::cycles::{CompletedCycle, CycleFragment, DEFAULT_MAX_CYCLE_COUNT, DEFAULT_MAX_CYCLE_LEN};
use crate::graphs::{GraphBundle, Pair};
use crate::oracle::{
    entropy_gap_report, estimate_alignment_probability, expected_image_size_checks, random_pmf,
    scan_alignment_extents, submodularity_independent, submodularity_joint, AisInstance, AisParams, OracleError,
    Psi, SUBMODULARITY_TOLERANCE,
};
use crate::scheme::{
    build_four_ninths_scheme, build_half_scheme, set_label, validate_scheme_structure, Infeasible, RatioJson,
    TransmissionScheme,
};
use crate::simulator::{
    common_alphabet_from_backoff, run_trials, scheme_label, substream, write_csv, ChannelModel, SimConfig, SimError,
    SimMode, SimSummary,
};
use crate::topology::{emit_topology, fixture_text, parse_topology, NetworkTopology, TopologyError, FIXTURE_NAMES};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Topology { path: PathBuf, source: TopologyError },
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } => 2,
            CliError::Topology { source, .. } if source.is_syntax() => 2,
            CliError::Topology { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "timdof", version, about = "DoF bounds and schemes for partially connected interference networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph structures, the odd-cycle bound and the 1/2-DoF test.
    Analyze(AnalyzeArgs),
    /// Build and structurally validate a slot scheme.
    Scheme(SchemeArgs),
    /// Run decode trials of a scheme on the floor channel or AWGN.
    Simulate(SimulateArgs),
    /// Brute-force checks of the aligned-image-set inequalities.
    Oracle(OracleArgs),
    /// List, print or write the built-in fixtures.
    Fixtures(FixturesArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    topology: PathBuf,
    #[arg(long)]
    json: bool,
    /// Write network.dot, reduced.dot and cycle.dot into DIR.
    #[arg(long, value_name = "DIR")]
    dot: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLE_LEN)]
    max_cycle_len: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_CYCLE_COUNT)]
    max_cycles: usize,
    /// Lift both cycle caps.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SchemeKind {
    /// 1/2 if feasible, otherwise 4/9.
    Auto,
    Half,
    FourNinths,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    topology: PathBuf,
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum, default_value = "auto")]
    kind: SchemeKind,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    topology: PathBuf,
    /// Input ceilings, comma separated; one summary row each.
    #[arg(long, value_delimiter = ',', default_values_t = [1000u64])]
    pbar: Vec<u64>,
    /// Common alphabet size.
    #[arg(long, default_value_t = 4)]
    qc: u64,
    /// Derive the common alphabet as floor(pbar^(1/3 - delta_c)) instead of --qc.
    #[arg(long, conflicts_with = "qc")]
    delta_c: Option<f64>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Gaussian channel with PAM symbols instead of the floor channel.
    #[arg(long)]
    awgn: bool,
    #[arg(long, default_value_t = 40.0, requires = "awgn")]
    snr_db: f64,
    #[arg(long, value_enum, default_value = "auto")]
    kind: SchemeKind,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PsiKind {
    Lexmin,
    Minmax,
    Random,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 3)]
    pbar: u64,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Gain draws per Monte Carlo estimate.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Anchors for the image-size check; 0 checks every support element.
    #[arg(long, default_value_t = 0)]
    nus: usize,
    /// (lambda, nu) pairs for the alignment-probability check.
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    /// Random independent triples for the submodularity check.
    #[arg(long, default_value_t = 100)]
    triples: usize,
    /// Interval scan over a, a' in 0..=N.
    #[arg(long, default_value_t = 12)]
    interval_max: u64,
    #[arg(long, default_value_t = 1e-6)]
    grid_step: f64,
    #[arg(long, value_enum, default_value = "lexmin")]
    psi: PsiKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct FixturesArgs {
    /// Print this fixture's text.
    name: Option<String>,
    /// Write every fixture as NAME.tim into DIR.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let target: &mut dyn Write = if shown { out } else { err };
            let _ = write!(target, "{}", e.render());
            return if shown { 0 } else { 1 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Scheme(a) => cmd_scheme(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Fixtures(a) => cmd_fixtures(a, out),
    }
}

pub fn load_topology(path: &Path) -> Result<NetworkTopology, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_topology(&text).map_err(|source| CliError::Topology {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = load_topology(&a.topology)?;
    let options = if a.exhaustive {
        AnalyzeOptions::exhaustive()
    } else {
        AnalyzeOptions {
            max_cycle_len: a.max_cycle_len,
            max_cycles: a.max_cycles,
        }
    };
    let report = analyze(&t, &options);
    if let Some(dir) = &a.dot {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("network.dot"), emit_dot(&report.bundle))?;
        fs::write(dir.join("reduced.dot"), emit_reduced_dot(&report.bundle))?;
        if let Some(c) = &report.certificate {
            fs::write(dir.join("cycle.dot"), emit_cycle_dot(c))?;
        }
    }
    let format = if a.json { "json" } else { "text" };
    out.write_all(emit_report(&report, format)?.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct TopologyJson {
    users: usize,
    heard: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct ReducedJson {
    vertices: Vec<Vec<usize>>,
    edges: Vec<[Vec<usize>; 2]>,
    bipartite: bool,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    topology: TopologyJson,
    alignment_edges: Vec<Pair>,
    conflict_edges: Vec<Pair>,
    alignment_sets: &'a [Vec<usize>],
    internal_conflicts: Vec<Pair>,
    reduced_graph: ReducedJson,
    best_completed_cycle: Option<CycleFragment>,
    theorem1_bound: Option<RatioJson>,
    half_dof: crate::bounds::HalfDof,
    possibly_not_tightest: bool,
    notes: &'a [String],
}

fn report_json(r: &BoundReport) -> ReportJson<'_> {
    let b = &r.bundle;
    ReportJson {
        topology: TopologyJson {
            users: r.topology.users(),
            heard: (1..=r.topology.users())
                .map(|k| r.topology.heard(k).iter().copied().collect())
                .collect(),
        },
        alignment_edges: b.alignment_edges.iter().copied().collect(),
        conflict_edges: b.conflict_edges.iter().copied().collect(),
        alignment_sets: &b.sets,
        internal_conflicts: b.internal_conflicts.iter().copied().collect(),
        reduced_graph: ReducedJson {
            vertices: b.reduced.vertices.iter().map(|&s| b.sets[s].clone()).collect(),
            edges: b
                .reduced
                .edges
                .iter()
                .map(|e| [b.sets[e.lo()].clone(), b.sets[e.hi()].clone()])
                .collect(),
            bipartite: b.reduced_bipartite(),
        },
        best_completed_cycle: r.certificate.as_ref().map(|c| c.fragment(b)),
        theorem1_bound: r.theorem1_bound.map(RatioJson::from),
        half_dof: r.half_dof,
        possibly_not_tightest: r.possibly_not_tightest,
        notes: &r.notes,
    }
}

fn edge_list(edges: impl IntoIterator<Item = Pair>) -> String {
    let parts: Vec<String> = edges.into_iter().map(|p| format!("{}-{}", p.lo(), p.hi())).collect();
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(" ")
    }
}

fn cycle_text(c: &CompletedCycle) -> String {
    let parts: Vec<String> = c
        .paths
        .iter()
        .map(|p| {
            let inner: Vec<String> = p.iter().map(|m| m.to_string()).collect();
            format!("[{}]", inner.join("-"))
        })
        .collect();
    format!(
        "{} x (m={}, m2={}, l_sigma={})",
        parts.join(" x "),
        c.params.m,
        c.params.m2,
        c.params.l_sigma
    )
}

fn report_text(r: &BoundReport) -> String {
    let b = &r.bundle;
    let mut rows: Vec<(&str, String)> = vec![
        ("users", r.topology.users().to_string()),
        (
            "alignment sets",
            b.sets.iter().map(|s| set_label(s)).collect::<Vec<_>>().join(" "),
        ),
        ("alignment edges", edge_list(b.alignment_edges.iter().copied())),
        ("conflict edges", edge_list(b.conflict_edges.iter().copied())),
        ("internal conflicts", edge_list(b.internal_conflicts.iter().copied())),
        (
            "reduced graph",
            format!(
                "{} vertices, {} edges, {}",
                b.reduced.vertices.len(),
                b.reduced.edges.len(),
                if b.reduced_bipartite() { "bipartite" } else { "not bipartite" }
            ),
        ),
        (
            "half DoF",
            format!(
                "{} ({})",
                if r.half_dof.feasible { "feasible" } else { "infeasible" },
                r.half_dof.reason()
            ),
        ),
        (
            "cycle bound",
            r.theorem1_bound.map(fmt_dof).unwrap_or_else(|| "none".into()),
        ),
        (
            "completed cycle",
            r.certificate.as_ref().map(cycle_text).unwrap_or_else(|| "none".into()),
        ),
        (
            "possibly not tightest",
            if r.possibly_not_tightest { "yes" } else { "no" }.into(),
        ),
    ];
    for note in &r.notes {
        rows.push(("note", note.clone()));
    }
    table(&rows)
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        writeln!(s, "{k:<width$}  {v}").unwrap();
    }
    s
}

/// Renders a report as `"json"` or `"text"`.
pub fn emit_report(report: &BoundReport, format: &str) -> Result<String, CliError> {
    match format {
        "json" => {
            let mut s = serde_json::to_string_pretty(&report_json(report))?;
            s.push('\n');
            Ok(s)
        }
        "text" => Ok(report_text(report)),
        other => Err(CliError::UnknownFormat(other.into())),
    }
}

/// Messages as nodes; alignment edges solid black, conflict edges dashed red.
pub fn emit_dot(bundle: &GraphBundle) -> String {
    let mut s = String::from("graph network {\n  node [shape=circle];\n");
    for k in 1..=bundle.users {
        writeln!(s, "  {k};").unwrap();
    }
    for e in &bundle.alignment_edges {
        writeln!(s, "  {} -- {} [style=solid, color=black];", e.lo(), e.hi()).unwrap();
    }
    for e in &bundle.conflict_edges {
        writeln!(s, "  {} -- {} [style=dashed, color=red];", e.lo(), e.hi()).unwrap();
    }
    s.push_str("}\n");
    s
}

/// Alignment sets of size two or more, joined by dashed red conflict edges.
pub fn emit_reduced_dot(bundle: &GraphBundle) -> String {
    let mut s = String::from("graph reduced {\n  node [shape=box];\n");
    for &v in &bundle.reduced.vertices {
        writeln!(s, "  s{v} [label=\"{}\"];", set_label(&bundle.sets[v])).unwrap();
    }
    for e in &bundle.reduced.edges {
        writeln!(s, "  s{} -- s{} [style=dashed, color=red];", e.lo(), e.hi()).unwrap();
    }
    s.push_str("}\n");
    s
}

/// The messages of a completed cycle with its alignment paths and `m` conflict edges.
pub fn emit_cycle_dot(c: &CompletedCycle) -> String {
    let mut s = String::from("graph completed_cycle {\n  node [shape=circle];\n");
    for m in c.message_sequence() {
        writeln!(s, "  {m};").unwrap();
    }
    for p in &c.paths {
        for w in p.windows(2) {
            writeln!(s, "  {} -- {} [style=solid, color=black];", w[0], w[1]).unwrap();
        }
    }
    for &(a, b) in &c.conflict_edges {
        writeln!(s, "  {a} -- {b} [style=dashed, color=red];").unwrap();
    }
    s.push_str("}\n");
    s
}

fn choose_scheme(bundle: &GraphBundle, kind: SchemeKind) -> Result<TransmissionScheme, Infeasible> {
    match kind {
        SchemeKind::Half => build_half_scheme(bundle),
        SchemeKind::FourNinths => build_four_ninths_scheme(bundle),
        SchemeKind::Auto => build_half_scheme(bundle).or_else(|half| {
            build_four_ninths_scheme(bundle).map_err(|four| Infeasible(format!("1/2: {}; 4/9: {}", half.0, four.0)))
        }),
    }
}

fn cmd_scheme(a: SchemeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = load_topology(&a.topology)?;
    let bundle = GraphBundle::build(&t);
    let scheme = match choose_scheme(&bundle, a.kind) {
        Ok(s) => s,
        Err(reason) => {
            if a.json {
                let v = serde_json::json!({ "feasible": false, "reason": reason.0 });
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                writeln!(out, "{reason}")?;
            }
            return Ok(());
        }
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&scheme.to_json())?)?;
        return Ok(());
    }
    let validation = validate_scheme_structure(&scheme, &t).expect("scheme built from this topology");
    let mut rows: Vec<(&str, String)> = vec![
        ("scheme", scheme_label(&scheme).into()),
        ("slots", scheme.slots.to_string()),
        ("nominal DoF", fmt_dof(scheme.nominal_dof)),
        (
            "powers",
            format!("private {}, common {}", scheme.private_power, scheme.common_power),
        ),
        ("decode order", scheme.decode_order().join(", ")),
    ];
    for (set, slot) in scheme.sets.iter().zip(&scheme.set_slot) {
        rows.push(("slot", format!("{} -> {}", set_label(set), slot)));
    }
    write!(out, "{}", table(&rows))?;
    writeln!(out)?;
    writeln!(out, "receiver  free slot  private slots  free-slot commons  clean private")?;
    for r in &validation.receivers {
        let free = r.free_slot.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<8}  {:<9}  {:<13}  {:<17}  {}",
            r.receiver,
            free,
            r.private_slots.label(),
            r.free_slot_commons.label(),
            r.clean_private.label()
        )?;
    }
    writeln!(
        out,
        "\nstructural validation: {}",
        if validation.all_pass() { "pass" } else { "FAIL" }
    )?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = load_topology(&a.topology)?;
    let bundle = GraphBundle::build(&t);
    let scheme = choose_scheme(&bundle, a.kind).map_err(|e| CliError::Usage(format!("no scheme: {}", e.0)))?;
    let mut rows = Vec::with_capacity(a.pbar.len());
    for &pbar in &a.pbar {
        let qc = a.delta_c.map_or(a.qc, |d| common_alphabet_from_backoff(pbar, d));
        let config = SimConfig {
            mode: if a.awgn {
                SimMode::Awgn { snr_db: a.snr_db }
            } else {
                SimMode::Deterministic
            },
            model: ChannelModel::default(),
            threads: a.threads,
            ..SimConfig::new(pbar, qc, a.trials, a.seed)
        };
        rows.push(run_trials(&scheme, &t, &config)?);
    }
    if let Some(path) = &a.csv {
        write_csv(fs::File::create(path)?, &rows)?;
    }
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
    } else {
        write!(out, "{}", summary_table(&rows))?;
    }
    Ok(())
}

fn summary_table(rows: &[SimSummary]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:>9}  {:>4}  {:>7}  {:<11}  {:>10}  {:>10}  {:>10}  {:>10}",
        "pbar", "qc", "trials", "scheme", "err_total", "err_mac", "err_priv", "rate_ratio"
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            "{:>9}  {:>4}  {:>7}  {:<11}  {:>10.6}  {:>10.6}  {:>10.6}  {:>10.6}",
            r.pbar, r.qc, r.trials, r.scheme, r.err_rate_total, r.err_mac, r.err_private, r.rate_ratio_mean
        )
        .unwrap();
    }
    if let Some(snr) = rows.first().and_then(|r| r.snr_db) {
        writeln!(s, "AWGN at {snr} dB").unwrap();
    }
    s
}

/// One line of the oracle verdict table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub check: String,
    pub instance: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    /// `None` for report-only rows.
    pub pass: Option<bool>,
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| oracle_rows(&a))?,
        None => oracle_rows(&a)?,
    };
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_writer(fs::File::create(path)?);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    writeln!(
        out,
        "{:<26}  {:<44}  {:>12}  {:>12}  {:>12}  verdict",
        "check", "instance", "measured", "bound", "margin"
    )?;
    for r in &rows {
        let verdict = match r.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "report",
        };
        writeln!(
            out,
            "{:<26}  {:<44}  {:>12.6e}  {:>12.6e}  {:>12.6e}  {verdict}",
            r.check, r.instance, r.measured, r.bound, r.margin
        )?;
    }
    Ok(())
}

fn oracle_rows(a: &OracleArgs) -> Result<Vec<OracleRow>, CliError> {
    let mut rows = Vec::new();
    let model = ChannelModel::default();

    // submodularity: worst lhs - rhs over the triples
    let mut worst_joint = f64::NEG_INFINITY;
    let mut worst_indep = f64::NEG_INFINITY;
    for i in 0..a.triples as u64 {
        let mut rng = substream(a.seed, i);
        let (p1, p2, p3) = (random_pmf(6, &mut rng), random_pmf(6, &mut rng), random_pmf(6, &mut rng));
        let indep = submodularity_independent(&p1, &p2, &p3)?;
        let mut joint = crate::oracle::Joint3::new();
        for (&x, &px) in &p1 {
            for (&y, &py) in &p2 {
                for (&z, &pz) in &p3 {
                    joint.insert((x, y, z), px * py * pz);
                }
            }
        }
        let joint = submodularity_joint(&joint)?;
        worst_joint = worst_joint.max(joint.lhs - joint.rhs);
        worst_indep = worst_indep.max(indep.lhs - indep.rhs);
    }
    if a.triples > 0 {
        for (check, worst) in [("submodularity joint", worst_joint), ("submodularity independent", worst_indep)] {
            rows.push(OracleRow {
                check: check.into(),
                instance: format!("{} triples, supports <= 6", a.triples),
                measured: worst,
                bound: SUBMODULARITY_TOLERANCE,
                margin: SUBMODULARITY_TOLERANCE - worst,
                pass: Some(worst <= SUBMODULARITY_TOLERANCE),
            });
        }
    }

    // interval confinement: worst extent * |a - a'| against 4
    let mut worst = (0.0f64, 0u64, 0u64);
    let mut all_pass = true;
    for x in 0..=a.interval_max {
        for y in 0..=a.interval_max {
            if x == y {
                continue;
            }
            for c in scan_alignment_extents(x, y, &model, a.grid_step)? {
                all_pass &= c.passes();
                let scaled = c.extent * x.abs_diff(y) as f64;
                if scaled > worst.0 {
                    worst = (scaled, x, y);
                }
            }
        }
    }
    if a.interval_max > 0 {
        rows.push(OracleRow {
            check: "interval confinement".into(),
            instance: format!(
                "a,a' in 0..={}, step {:e}, worst a={} a'={}",
                a.interval_max, a.grid_step, worst.1, worst.2
            ),
            measured: worst.0,
            bound: 4.0,
            margin: 4.0 - worst.0,
            pass: Some(all_pass),
        });
    }

    let psi = match a.psi {
        PsiKind::Lexmin => Psi::LexMin,
        PsiKind::Minmax => Psi::MinMax,
        PsiKind::Random => Psi::Random { seed: a.seed },
    };
    let params = AisParams::random(a.m, a.pbar, model, psi, &mut substream(a.seed, u64::MAX));
    let inst = AisInstance::new(params)?;
    let label = format!("pbar={} m={} support={}", a.pbar, a.m, inst.len());

    let nus: Vec<usize> = if a.nus == 0 || a.nus >= inst.len() {
        (0..inst.len()).collect()
    } else {
        let mut v = sample(&mut substream(a.seed, u64::MAX - 1), inst.len(), a.nus).into_vec();
        v.sort_unstable();
        v
    };
    let sizes = expected_image_size_checks(&inst, &nus, a.samples, a.seed);
    if let Some(w) = sizes
        .iter()
        .max_by(|x, y| (x.mean - 3.0 * x.stderr).total_cmp(&(y.mean - 3.0 * y.stderr)))
    {
        rows.push(OracleRow {
            check: "image set size".into(),
            instance: format!("{label}, {} anchors, {} samples", nus.len(), a.samples),
            measured: w.mean,
            bound: w.bound,
            margin: w.bound + 3.0 * w.stderr - w.mean,
            pass: Some(sizes.iter().all(|r| r.passes())),
        });
    }

    if inst.len() >= 2 && a.pairs > 0 {
        let mut rng = substream(a.seed, u64::MAX - 2);
        let mut estimates = Vec::with_capacity(a.pairs);
        for j in 0..a.pairs as u64 {
            let pair = sample(&mut rng, inst.len(), 2).into_vec();
            estimates.push(estimate_alignment_probability(
                &inst,
                pair[1],
                pair[0],
                a.samples,
                a.seed.wrapping_add(j + 1),
            ));
        }
        let w = estimates
            .iter()
            .min_by(|x, y| (x.bound + 3.0 * x.stderr - x.estimate).total_cmp(&(y.bound + 3.0 * y.stderr - y.estimate)))
            .expect("at least one pair");
        rows.push(OracleRow {
            check: "alignment probability".into(),
            instance: format!("{label}, {} pairs, {} samples", a.pairs, a.samples),
            measured: w.estimate,
            bound: w.bound,
            margin: w.bound + 3.0 * w.stderr - w.estimate,
            pass: Some(estimates.iter().all(|e| e.passes())),
        });
    }

    let gap = entropy_gap_report(&inst, a.samples.min(200), a.seed);
    rows.push(OracleRow {
        check: "entropy gap (bits)".into(),
        instance: label,
        measured: gap.gap,
        bound: gap.reference,
        margin: gap.reference - gap.gap,
        pass: None,
    });
    Ok(rows)
}

fn cmd_fixtures(a: FixturesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        for name in FIXTURE_NAMES {
            fs::write(dir.join(format!("{name}.tim")), fixture_text(name).expect("built-in fixture"))?;
        }
    }
    match &a.name {
        Some(name) => {
            let text = fixture_text(name).map_err(|e| CliError::Usage(e.to_string()))?;
            let t = parse_topology(text).expect("built-in fixture parses");
            out.write_all(emit_topology(&t).as_bytes())?;
        }
        None if a.out.is_none() => {
            for name in FIXTURE_NAMES {
                writeln!(out, "{name}")?;
            }
        }
        None => {}
    }
    Ok(())
}
