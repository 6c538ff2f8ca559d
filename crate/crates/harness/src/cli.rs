//! Command-line interface of the `fairkc` binary.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fairkc::fairshift::{build_shift_graph, collect_candidates};
use fairkc::offline::{solve_offline_detailed, PrefixSearch};
use fairkc::streaming::{
    ladder_beta, memory_envelope, write_replay, ReplayHeader, ReplayReader, StreamConfig, StreamPoint, StreamingSolver,
};
use fairkc::{check_fairness, Dataset64, FairnessBounds, Metric, ProblemInstance};
use serde::Serialize;

use crate::config::{load_config, load_from, Algorithm};
use crate::error::{HarnessError, Result};
use crate::experiment::{k_from_fraction, run_algorithm, run_experiment, RunSeed};
use crate::ingest::{ingest_csv, scan_csv, stream_csv};
use crate::report::{emit_report, parse_report_json, parse_rows_csv, write_rows_csv, Format, Report};
use crate::synth::{generate_blobs, SyntheticSpec};

#[derive(Debug, Parser)]
#[command(name = "fairkc", version, about = "Fair k-center clustering with range quotas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Offline solver on a CSV or replay file.
    Solve(SolveArgs),
    /// One-pass streaming solver over a CSV or replay file.
    Stream(StreamArgs),
    /// Exact-quota baseline (Major, Minor or proportional allocation).
    Baseline(BaselineArgs),
    /// Exhaustive optimum (small inputs only).
    Oracle(InstanceArgs),
    /// Writes a synthetic blob dataset (CSV, or replay when the output ends in `.bin`).
    Gen(GenArgs),
    /// Runs an experiment sweep from a TOML or JSON configuration.
    Bench(BenchArgs),
    /// Re-emits or summarizes a saved report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// CSV file, or a `.bin` replay file.
    #[arg(long)]
    pub input: PathBuf,
    /// Group column of a CSV input.
    #[arg(long)]
    pub group_col: Option<String>,
    /// Keep raw feature values instead of min-max scaling them.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, conflicts_with = "k_fraction")]
    pub k: Option<usize>,
    /// `k = max(1, floor(fraction * n))`; used when `--k` is absent.
    #[arg(long, default_value_t = 0.05)]
    pub k_fraction: f64,
    /// Quota slack: `l_i = floor((1-ε)|S_i|k/n)`, `u_i = ceil((1+ε)|S_i|k/n)`.
    #[arg(long, default_value_t = 0.1)]
    pub bounds_eps: f64,
    /// Explicit lower quotas, comma separated; requires `--upper`.
    #[arg(long, value_delimiter = ',', requires = "upper")]
    pub lower: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', requires = "lower")]
    pub upper: Option<Vec<usize>>,
    /// Picks the first traversal center.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Writes the fair-shift network of the chosen prefix, with its flow.
    #[arg(long)]
    pub flow_dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Ladder resolution in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Coalesce exact duplicates in the initial buffer.
    #[arg(long)]
    pub dedup: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BaselineMode {
    Major,
    Minor,
    Equality,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub mode: BaselineMode,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// TOML or JSON generator settings; defaults apply otherwise.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// 5000 points per blob.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A JSON report, or the CSV rows of one.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Prints the per-cell mean and deviation table instead.
    #[arg(long)]
    pub summary: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output of the single-instance commands.
#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub algorithm: String,
    pub input: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub centers: Vec<usize>,
    pub per_group: Vec<usize>,
    pub group_labels: Vec<String>,
    pub objective: f64,
    pub fair: bool,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<StreamDetails>,
}

#[derive(Debug, Serialize)]
pub struct StreamDetails {
    pub eps: f64,
    pub beta: usize,
    pub peak_stored: usize,
    pub peak_slots: usize,
    pub memory_envelope: usize,
    pub maintains: usize,
    pub final_tau: f64,
    pub fallback_used: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::Stream(a) => stream(a),
        Command::Baseline(a) => {
            let alg = match a.mode {
                BaselineMode::Major => Algorithm::Major,
                BaselineMode::Minor => Algorithm::Minor,
                BaselineMode::Equality => Algorithm::Equality,
            };
            in_memory(&a.instance, alg)
        }
        Command::Oracle(a) => in_memory(&a, Algorithm::Oracle),
        Command::Gen(a) => generate(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| HarnessError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn is_replay(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

fn open_replay(path: &Path) -> Result<ReplayReader<BufReader<File>>> {
    let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    ReplayReader::new(BufReader::new(f)).map_err(|e| HarnessError::io(path, e))
}

fn group_col(a: &InstanceArgs) -> Result<&str> {
    a.group_col
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--group-col is required for CSV input".into()))
}

fn load_dataset(a: &InstanceArgs) -> Result<(Dataset64, Vec<String>)> {
    if is_replay(&a.input) {
        let reader = open_replay(&a.input)?;
        let h = reader.header();
        let mut coords = Vec::new();
        let mut groups = Vec::new();
        for p in reader {
            let p = p.map_err(|e| HarnessError::io(&a.input, e))?;
            coords.extend(p.coords);
            groups.push(p.group);
        }
        let labels = (0..h.m).map(|g| g.to_string()).collect();
        Ok((Dataset64::new(h.dim as usize, coords, groups, h.m as usize)?, labels))
    } else {
        let ing = ingest_csv(&a.input, group_col(a)?, !a.no_normalize)?;
        Ok((ing.dataset, ing.group_labels))
    }
}

fn bounds_for(a: &InstanceArgs, group_sizes: &[usize]) -> Result<FairnessBounds> {
    if !(0.0..1.0).contains(&a.bounds_eps) {
        return Err(HarnessError::Config(format!(
            "bounds eps {} outside [0, 1)",
            a.bounds_eps
        )));
    }
    let n: usize = group_sizes.iter().sum();
    let k = a.k.unwrap_or_else(|| k_from_fraction(n, a.k_fraction));
    let bounds = match (&a.lower, &a.upper) {
        (Some(l), Some(u)) => FairnessBounds::new(l.clone(), u.clone(), k),
        _ => {
            let m = group_sizes.len();
            FairnessBounds::from_ratios(
                group_sizes,
                k,
                &vec![1.0 - a.bounds_eps; m],
                &vec![1.0 + a.bounds_eps; m],
            )?
        }
    };
    if bounds.m() != group_sizes.len() {
        return Err(HarnessError::Config(format!(
            "{} quotas given for {} groups",
            bounds.m(),
            group_sizes.len()
        )));
    }
    Ok(bounds)
}

fn emit_solve(a: &InstanceArgs, out: &SolveOutput, lookup: impl Fn(usize) -> (usize, Vec<f64>)) -> Result<()> {
    let mut w = sink(&a.out)?;
    let wrap = |e: io::Error| HarnessError::io(a.out.clone().unwrap_or_else(|| "<stdout>".into()), e);
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, out).map_err(|e| HarnessError::Parse(e.to_string()))?;
            writeln!(w).map_err(wrap)?;
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            let fail = |e: csv::Error| HarnessError::Parse(e.to_string());
            let dim = out.centers.first().map_or(0, |&c| lookup(c).1.len());
            let mut header = vec!["id".to_string(), "group".to_string()];
            header.extend((0..dim).map(|j| format!("x{j}")));
            csv.write_record(&header).map_err(fail)?;
            for &c in &out.centers {
                let (g, coords) = lookup(c);
                let mut rec = vec![c.to_string(), out.group_labels[g].clone()];
                rec.extend(coords.iter().map(f64::to_string));
                csv.write_record(&rec).map_err(fail)?;
            }
            csv.flush().map_err(wrap)?;
        }
    }
    w.flush().map_err(wrap)
}

fn in_memory(a: &InstanceArgs, alg: Algorithm) -> Result<()> {
    let (ds, labels) = load_dataset(a)?;
    let bounds = bounds_for(a, ds.group_sizes())?;
    let seed = RunSeed::derive(a.seed, 0, ds.n());
    let s = run_algorithm(&ds, &bounds, alg, seed, 0.1)?;
    let out = solve_output(a, alg, &ds, &bounds, labels, &s.centers, s.objective, s.runtime_ms);
    emit_solve(a, &out, |c| (ds.group(c), ds.coords(c).to_vec()))
}

#[allow(clippy::too_many_arguments)]
fn solve_output(
    a: &InstanceArgs,
    alg: Algorithm,
    ds: &Dataset64,
    bounds: &FairnessBounds,
    group_labels: Vec<String>,
    centers: &fairkc::CenterSet,
    objective: f64,
    runtime_ms: f64,
) -> SolveOutput {
    let inst = ProblemInstance::new_unchecked(ds, bounds);
    SolveOutput {
        algorithm: alg.name().into(),
        input: a.input.display().to_string(),
        n: ds.n(),
        m: ds.m(),
        k: bounds.k,
        lower: bounds.l.clone(),
        upper: bounds.u.clone(),
        centers: centers.ids().to_vec(),
        per_group: centers.per_group().to_vec(),
        group_labels,
        objective,
        fair: check_fairness(&inst, centers),
        runtime_ms,
        stream: None,
    }
}

fn solve(a: SolveArgs) -> Result<()> {
    let Some(dump) = &a.flow_dump else {
        return in_memory(&a.instance, Algorithm::Ours);
    };
    let (ds, _) = load_dataset(&a.instance)?;
    let bounds = bounds_for(&a.instance, ds.group_sizes())?;
    let inst = ProblemInstance::new(&ds, &bounds)?;
    let seed = RunSeed::derive(a.instance.seed, 0, ds.n());
    let detail = solve_offline_detailed(inst, seed.start)?;
    let mut w = BufWriter::new(File::create(dump).map_err(|e| HarnessError::io(dump, e))?);
    let wrap = |e: io::Error| HarnessError::io(dump, e);
    writeln!(w, "# h {} threshold {}", detail.h, detail.threshold).map_err(wrap)?;
    if detail.h > 0 {
        let radius = PrefixSearch::new(inst, &detail.trace).radius(detail.h);
        let centers = &detail.trace.sequence()[..detail.h];
        let assignment = detail.trace.assignment_at_prefix(detail.h);
        let candidates = collect_candidates(&ds, &assignment, centers, radius);
        let mut graph = build_shift_graph(&candidates, centers, &bounds)?;
        graph.restrict_to(detail.threshold);
        graph.solve();
        let l = graph.layout;
        writeln!(
            w,
            "# vertices {} source {} sink {} centers {} groups {}",
            l.vertex_count(),
            graph.network.source(),
            graph.network.sink(),
            l.centers,
            l.groups
        )
        .map_err(wrap)?;
        graph.network.dump(&mut w).map_err(wrap)?;
    }
    w.flush().map_err(wrap)?;
    in_memory(&a.instance, Algorithm::Ours)
}

/// Re-reads the input once per call, never holding more than one point.
fn for_each_point(a: &InstanceArgs, mut f: impl FnMut(StreamPoint<f64>) -> Result<()>) -> Result<()> {
    if is_replay(&a.input) {
        for p in open_replay(&a.input)? {
            f(p.map_err(|e| HarnessError::io(&a.input, e))?)?;
        }
    } else {
        let col = group_col(a)?;
        let summary = scan_csv(&a.input, col)?;
        for p in stream_csv(&a.input, col, &summary, !a.no_normalize)? {
            f(p?)?;
        }
    }
    Ok(())
}

fn stream(a: StreamArgs) -> Result<()> {
    let inst = &a.instance;
    // Counting pass: quotas depend on the group sizes.
    let (m, labels) = if is_replay(&inst.input) {
        let m = open_replay(&inst.input)?.header().m as usize;
        (m, (0..m).map(|g| g.to_string()).collect())
    } else {
        let s = scan_csv(&inst.input, group_col(inst)?)?;
        (s.group_sizes.len(), s.group_labels)
    };
    let mut sizes = vec![0usize; m];
    for_each_point(inst, |p| {
        if p.group >= m {
            return Err(fairkc::Error::InvalidGroup { group: p.group, m }.into());
        }
        sizes[p.group] += 1;
        Ok(())
    })?;
    let n: usize = sizes.iter().sum();
    let bounds = bounds_for(inst, &sizes)?;
    let config = StreamConfig {
        eps: a.eps,
        dedup: a.dedup,
        metric: Metric::Euclidean,
    };
    let mut solver = StreamingSolver::<f64>::new(bounds.clone(), config)?;
    let t = Instant::now();
    for_each_point(inst, |p| Ok(solver.push(p)?))?;
    let outcome = solver.finish()?;
    let runtime_ms = t.elapsed().as_secs_f64() * 1e3;

    // Evaluation pass.
    let mut objective = 0.0f64;
    for_each_point(inst, |p| {
        let d = outcome
            .points
            .iter()
            .map(|c| Metric::Euclidean.distance(&c.coords, &p.coords))
            .fold(f64::INFINITY, f64::min);
        objective = objective.max(d);
        Ok(())
    })?;
    let per_group = outcome.centers.per_group().to_vec();
    let fair = outcome.centers.len() == bounds.k
        && per_group
            .iter()
            .enumerate()
            .all(|(g, &c)| bounds.l[g] <= c && c <= bounds.u[g]);
    let stats = &outcome.stats;
    let out = SolveOutput {
        algorithm: Algorithm::Stream.name().into(),
        input: inst.input.display().to_string(),
        n,
        m,
        k: bounds.k,
        lower: bounds.l.clone(),
        upper: bounds.u.clone(),
        centers: outcome.centers.ids().to_vec(),
        per_group,
        group_labels: labels,
        objective,
        fair,
        runtime_ms,
        stream: Some(StreamDetails {
            eps: a.eps,
            beta: ladder_beta(a.eps),
            peak_stored: stats.peak_stored,
            peak_slots: stats.peak_slots,
            memory_envelope: memory_envelope(&bounds, ladder_beta(a.eps)),
            maintains: stats.maintains.len(),
            final_tau: stats.tau_history.last().copied().unwrap_or(0.0),
            fallback_used: stats.fallback_used,
        }),
    };
    emit_solve(inst, &out, |c| {
        outcome
            .points
            .iter()
            .find(|p| p.id == c)
            .map(|p| (p.group, p.coords.clone()))
            .expect("centers carry coordinates")
    })
}

fn generate(a: GenArgs) -> Result<()> {
    let mut spec: SyntheticSpec = match &a.spec {
        Some(p) => load_from(p)?,
        None => SyntheticSpec::default(),
    };
    if let Some(m) = a.m {
        spec.m = m;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.full_scale {
        spec = spec.full_scale();
    }
    let ds = generate_blobs(&spec)?;
    let target = a.out.clone().unwrap_or_else(|| "<stdout>".into());
    let wrap = |e: io::Error| HarnessError::io(&target, e);
    let mut w = sink(&a.out)?;
    if a.out.as_deref().is_some_and(is_replay) {
        let header = ReplayHeader {
            n: ds.n() as u32,
            dim: ds.dim() as u32,
            m: ds.m() as u32,
        };
        let points = (0..ds.n()).map(|i| StreamPoint::new(ds.coords(i).to_vec(), ds.group(i)));
        write_replay(&mut w, header, points).map_err(wrap)?;
    } else {
        let mut csv = csv::Writer::from_writer(&mut w);
        let fail = |e: csv::Error| HarnessError::Parse(e.to_string());
        let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
        header.push("group".into());
        csv.write_record(&header).map_err(fail)?;
        for i in 0..ds.n() {
            let mut rec: Vec<String> = ds.coords(i).iter().map(f64::to_string).collect();
            rec.push(format!("g{}", ds.group(i)));
            csv.write_record(&rec).map_err(fail)?;
        }
        csv.flush().map_err(wrap)?;
    }
    w.flush().map_err(wrap)
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut config = load_config(&a.config)?;
    if let Some(r) = a.runs {
        config.runs = r;
    }
    if a.full_scale {
        config = config.full_scale();
    }
    let report = run_experiment(&config)?;
    emit_report(&report, a.format, sink(&a.out)?)
}

/// Aggregate table: one line per (algorithm, eps).
pub fn write_summary<W: Write>(report: &Report, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "{:<10} {:>6} {:>5} {:>5} {:>12} {:>12}",
        "algorithm", "eps", "runs", "fail", "mean", "std"
    )?;
    let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6}"));
    for g in &report.aggregates {
        writeln!(
            w,
            "{:<10} {:>6} {:>5} {:>5} {:>12} {:>12}",
            g.algorithm.name(),
            g.eps,
            g.runs,
            g.failures,
            show(g.mean),
            show(g.std)
        )?;
    }
    w.flush()
}

fn report(a: ReportArgs) -> Result<()> {
    let f = File::open(&a.input).map_err(|e| HarnessError::io(&a.input, e))?;
    let is_csv = a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let report = if is_csv {
        let rows = parse_rows_csv(BufReader::new(f))?;
        let (runs, dataset) = (
            rows.iter().map(|r| r.run + 1).max().unwrap_or(0),
            a.input.display().to_string(),
        );
        Report {
            schema: crate::report::SCHEMA_VERSION,
            dataset,
            n: 0,
            m: 0,
            group_labels: Vec::new(),
            k: 0,
            k_fraction: 0.0,
            seed: 0,
            runs,
            aggregates: crate::report::aggregate(&rows),
            rows,
        }
    } else {
        parse_report_json(BufReader::new(f))?
    };
    let mut w = sink(&a.out)?;
    if a.summary {
        return write_summary(&report, w).map_err(|e| HarnessError::io("<summary>", e));
    }
    match a.format {
        Format::Csv => write_rows_csv(&report.rows, w),
        Format::Json => emit_report(&report, Format::Json, &mut w),
    }
}
