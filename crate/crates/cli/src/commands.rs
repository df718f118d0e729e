use anyhow::{Context, Result};
use serde::Serialize;

use netreinforce::graph::Network;
use netreinforce::partition::{cut_stats, Partition};

use netreinforce::reinforce::{reinforce_partitioned, FaultKind, ReinforcedNetwork};
use netreinforce::reliability::{failure, naive_replication_failure, union_bound};
use netreinforce::rng::mix;
use netreinforce::simulate::{Adversary, Estimate, FaultScenario, SimOptions, Simulator};
use netreinforce::sweep::{
    self, naive_baseline_rows, original_row, pareto_sweep, partitioned_row, SweepConfig, SweepRow,
};

use crate::input::{choose_partition, load_network, ProgramSpec, Source};
use crate::{Cli, Command, Failure, Format, RegionArgs, SimulateArgs, SweepArgs, ValidateArgs};

pub struct Output {
    pub bytes: Vec<u8>,
    /// Set when a validation check failed; the report is still emitted.
    pub failure: Option<String>,
}

impl Output {
    fn ok(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            failure: None,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Info { input } => info(cli, input),
        Command::Partition { input, regions } => partition(cli, input, regions),
        Command::Reinforce {
            input,
            model,
            regions,
        } => reinforce(cli, input, model.f, model.model, regions),
        Command::Analyze {
            input,
            sizes,
            model,
            regions,
            p,
            target,
        } => analyze(cli, input.as_deref(), sizes.as_deref(), model.f, model.model, regions, *p, *target),
        Command::Sweep(args) => sweep_cmd(cli, args),
        Command::Simulate(args) => simulate(cli, args),
        Command::Validate(args) => validate(cli, args),
    }
}

fn records<T: Serialize>(format: Format, rows: &[T]) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            Ok(w.into_inner().context("flushing csv")?)
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn record<T: Serialize>(format: Format, row: &T) -> Result<Vec<u8>> {
    match format {
        Format::Csv => records(format, std::slice::from_ref(row)),
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(row)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct InfoRow {
    source: String,
    n: usize,
    m: usize,
    arcs: usize,
    connected: bool,
    min_degree: usize,
    max_degree: usize,
    mean_degree: f64,
}

fn info(cli: &Cli, input: &str) -> Result<Output> {
    let (_, g) = load_network(input)?;
    let deg = g.degree_stats();
    let row = InfoRow {
        source: input.to_owned(),
        n: g.node_count(),
        m: g.undirected_edge_count(),
        arcs: g.arc_count(),
        connected: g.is_connected(),
        min_degree: deg.min,
        max_degree: deg.max,
        mean_degree: deg.mean,
    };
    Ok(Output::ok(record(cli.format, &row)?))
}

fn regions_of(source: &Source, g: &Network, args: &RegionArgs) -> Result<Partition> {
    choose_partition(source, g, args.partition.as_deref(), args.method, args.max_region)
}

#[derive(Serialize)]
struct NodeRegion<'a> {
    node: usize,
    label: Option<&'a str>,
    region: usize,
}

fn partition(cli: &Cli, input: &str, args: &RegionArgs) -> Result<Output> {
    let (source, g) = load_network(input)?;
    let part = regions_of(&source, &g, args)?;
    let stats = cut_stats(&g, &part)?;
    eprintln!(
        "regions={} cut_edges={} epsilon={} r_min={} r_max={}",
        stats.regions, stats.cut_edges, stats.epsilon, stats.r_min, stats.r_max
    );
    let bytes = match cli.format {
        Format::Json => {
            let mut out = part.to_json()?.into_bytes();
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let rows: Vec<NodeRegion> = g
                .nodes()
                .map(|v| NodeRegion {
                    node: v.0,
                    label: g.label(v),
                    region: part.region_of(v),
                })
                .collect();
            records(Format::Csv, &rows)?
        }
    };
    Ok(Output::ok(bytes))
}

#[derive(Serialize)]
struct ReinforceRow {
    model: &'static str,
    f: usize,
    ell: usize,
    regions: usize,
    copies: usize,
    arcs: usize,
    base_intra_arcs: usize,
    base_cross_arcs: usize,
    nu: String,
    eta: String,
    eta_value: f64,
}

fn build(source: &Source, g: &Network, f: usize, kind: FaultKind, args: &RegionArgs) -> Result<ReinforcedNetwork> {
    let part = regions_of(source, g, args)?;
    Ok(reinforce_partitioned(g, &part, f, kind)?)
}

fn reinforce(cli: &Cli, input: &str, f: usize, kind: FaultKind, args: &RegionArgs) -> Result<Output> {
    let (source, g) = load_network(input)?;
    let rn = build(&source, &g, f, kind, args)?;
    let bytes = match cli.format {
        Format::Json => {
            let mut out = rn.to_json()?.into_bytes();
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let oh = rn.overheads();
            record(
                Format::Csv,
                &ReinforceRow {
                    model: kind.name(),
                    f,
                    ell: rn.ell(),
                    regions: rn.partition().region_count(),
                    copies: rn.copy_count(),
                    arcs: rn.arc_count(),
                    base_intra_arcs: rn.intra_arc_count(),
                    base_cross_arcs: rn.cross_arc_count(),
                    nu: oh.nu.to_string(),
                    eta: oh.eta.to_string(),
                    eta_value: oh.eta_f64(),
                },
            )?
        }
    };
    Ok(Output::ok(bytes))
}

#[derive(Serialize)]
struct AnalyzeRow {
    sizes: String,
    f: usize,
    model: &'static str,
    p: f64,
    failure_prob: f64,
    union_bound: f64,
    target: f64,
    max_p: f64,
    saturated: bool,
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    cli: &Cli,
    input: Option<&str>,
    sizes: Option<&[usize]>,
    f: usize,
    kind: FaultKind,
    args: &RegionArgs,
    p: f64,
    target: f64,
) -> Result<Output> {
    let sizes: Vec<usize> = match (input, sizes) {
        (_, Some(s)) => s.to_vec(),
        (Some(input), None) => {
            let (source, g) = load_network(input)?;
            regions_of(&source, &g, args)?.sizes()
        }
        (None, None) => return Err(Failure::usage("give a network or --sizes")),
    };
    let query = netreinforce::reliability::ReliabilityQuery::new(sizes, f, kind, p)?;
    let report = netreinforce::reliability::analyze(&query, target)?;
    let row = AnalyzeRow {
        sizes: query
            .region_sizes
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(";"),
        f,
        model: kind.name(),
        p,
        failure_prob: report.failure_prob,
        union_bound: union_bound(kind, &query.region_sizes, f, p),
        target,
        max_p: report.max_p,
        saturated: report.saturated,
    };
    Ok(Output::ok(record(cli.format, &row)?))
}

fn default_grid(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |x| Some(x * 2))
        .take_while(|&x| x < n)
        .collect();
    grid.push(n.max(1));
    grid
}

fn sweep_config(args: &SweepArgs, n: usize) -> SweepConfig {
    SweepConfig {
        partitioner: args.partitioner,
        grid: args.grid.clone().unwrap_or_else(|| default_grid(n)),
        fs: args.f.clone(),
        kind: args.model,
        target: args.target,
    }
}

fn sweep_rows(args: &SweepArgs, g: &Network) -> Result<Vec<SweepRow>> {
    let mut rows = pareto_sweep(g, &sweep_config(args, g.node_count()))?;
    rows.extend(naive_baseline_rows(g.node_count(), &args.naive, args.target)?);
    Ok(rows)
}

fn sweep_cmd(cli: &Cli, args: &SweepArgs) -> Result<Output> {
    let (_, g) = load_network(&args.input)?;
    let rows = sweep_rows(args, &g)?;
    let bytes = match cli.format {
        Format::Csv => {
            let mut out = Vec::new();
            sweep::write_csv(&rows, &mut out)?;
            out
        }
        Format::Json => records(Format::Json, &rows)?,
    };
    Ok(Output::ok(bytes))
}

#[derive(Serialize)]
struct SimulateRow {
    model: &'static str,
    f: usize,
    ell: usize,
    regions: usize,
    rounds: usize,
    adversary: String,
    p: f64,
    trials: usize,
    successes: usize,
    success_rate: f64,
    wilson_low: f64,
    wilson_high: f64,
    analytic_reliability: f64,
    exhaustive_success: Option<f64>,
}

#[derive(Serialize)]
struct ScenarioRow {
    model: &'static str,
    f: usize,
    rounds: usize,
    faulty: usize,
    clean_index_condition: bool,
    success: bool,
    failed_round: Option<usize>,
    all_correct: bool,
}

fn adversary_name(a: Adversary) -> String {
    match a {
        Adversary::CrashSilent => "crash-silent".into(),
        Adversary::CorruptAll => "corrupt-all".into(),
        Adversary::CorruptRandom(s) => format!("corrupt-random:{s}"),
    }
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<Output> {
    let (source, g) = load_network(&args.input)?;
    let mut regions = args.regions.clone();
    if regions.partition.is_none() && regions.max_region.is_none() {
        regions.method = crate::input::Method::Singleton;
    }
    let rn = build(&source, &g, args.model.f, args.model.model, &regions)?;
    let program = ProgramSpec::parse(&args.program, &g)?;
    let rounds = args.rounds.unwrap_or_else(|| program.default_rounds(&g));
    match &program {
        ProgramSpec::Flood(p) => simulate_with(cli, args, &rn, p, rounds),
        ProgramSpec::Paths(p) => simulate_with(cli, args, &rn, p, rounds),
    }
}

fn simulate_with<P: netreinforce::program::RoutingProgram>(
    cli: &Cli,
    args: &SimulateArgs,
    rn: &ReinforcedNetwork,
    program: &P,
    rounds: usize,
) -> Result<Output> {
    let sim = Simulator::new(rn, program, rounds)?;
    let kind = rn.kind();
    if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let mut scenario = FaultScenario::from_json(&text).with_context(|| format!("in {path}"))?;
        if let Some(a) = args.adversary {
            scenario.adversary = a;
        }
        let opts = SimOptions {
            record_trace: args.trace.is_some(),
            stop_on_failure: false,
        };
        let outcome = sim.run(&scenario, opts)?;
        if let Some(trace) = &args.trace {
            let file = std::fs::File::create(trace).with_context(|| format!("creating {}", trace.display()))?;
            outcome.write_trace_jsonl(rn, std::io::BufWriter::new(file))?;
        }
        let row = ScenarioRow {
            model: kind.name(),
            f: rn.f(),
            rounds,
            faulty: scenario.faulty.len(),
            clean_index_condition: netreinforce::simulate::check_lemma_condition(rn, &scenario),
            success: outcome.success,
            failed_round: outcome.failed_round,
            all_correct: outcome.all_correct,
        };
        return Ok(Output::ok(record(cli.format, &row)?));
    }
    let adversary = args.adversary.unwrap_or(Adversary::default_for(kind));
    let est: Estimate = sim.monte_carlo_with(args.p, args.trials, cli.seed, adversary)?;
    let exhaustive = if args.exhaustive {
        Some(sim.exhaustive_profile()?.success_probability(args.p))
    } else {
        None
    };
    let row = SimulateRow {
        model: kind.name(),
        f: rn.f(),
        ell: rn.ell(),
        regions: rn.partition().region_count(),
        rounds,
        adversary: adversary_name(adversary),
        p: args.p,
        trials: est.trials,
        successes: est.successes,
        success_rate: est.success_rate,
        wilson_low: est.wilson_low,
        wilson_high: est.wilson_high,
        analytic_reliability: 1.0 - failure(kind, &rn.partition().sizes(), rn.f(), args.p),
        exhaustive_success: exhaustive,
    };
    Ok(Output::ok(record(cli.format, &row)?))
}

#[derive(Serialize)]
struct ValidateRow {
    design: String,
    max_region: Option<usize>,
    f: usize,
    eta: f64,
    p: f64,
    analytic: f64,
    mc_rate: Option<f64>,
    wilson_low: Option<f64>,
    wilson_high: Option<f64>,
    status: &'static str,
    reason: String,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

/// Recomputes a row from the network alone; `None` for unknown designs.
fn rederive(g: &Network, args: &SweepArgs, row: &SweepRow) -> Result<Option<SweepRow>> {
    Ok(match row.design.as_str() {
        sweep::DESIGN_ORIGINAL => Some(original_row(g, args.model, args.target)?),
        sweep::DESIGN_NAIVE => naive_baseline_rows(g.node_count(), &[row.f + 1], args.target)?
            .into_iter()
            .next(),
        sweep::DESIGN_PARTITIONED => match row.max_region {
            Some(r) => {
                let part = args.partitioner.partition(g, r)?;
                Some(partitioned_row(g, &part, r, row.f, args.model, args.target)?)
            }
            None => None,
        },
        _ => None,
    })
}

/// Failure probability of an unreplicated or disjointly replicated design.
fn want_failure(g: &Network, row: &SweepRow, kind: FaultKind, p: f64) -> f64 {
    if row.design == sweep::DESIGN_NAIVE {
        naive_replication_failure(g.node_count(), row.f + 1, p)
    } else {
        failure(kind, &[g.node_count()], 0, p)
    }
}

fn mismatch(got: &SweepRow, want: &SweepRow) -> Option<String> {
    let checks = [
        ("eta", got.eta, want.eta),
        ("nu", got.nu, want.nu),
        ("epsilon", got.epsilon, want.epsilon),
        ("max_p", got.max_p, want.max_p),
    ];
    for (name, a, b) in checks {
        if !close(a, b) {
            return Some(format!("{name} mismatch: row says {a}, recomputed {b}"));
        }
    }
    if (got.k, got.r_min, got.r_max) != (want.k, want.r_min, want.r_max) {
        return Some("region shape mismatch".into());
    }
    None
}

fn validate(cli: &Cli, args: &ValidateArgs) -> Result<Output> {
    let (_, g) = load_network(&args.sweep.input)?;
    let rows = match &args.rows {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            sweep::read_csv(&text).with_context(|| format!("in {path}"))?
        }
        None => sweep_rows(&args.sweep, &g)?,
    };
    let program = ProgramSpec::parse(&args.program, &g)?;
    let rounds = program.default_rounds(&g);

    let mut report = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let p = args.p.unwrap_or(row.max_p);
        let mut out = ValidateRow {
            design: row.design.clone(),
            max_region: row.max_region,
            f: row.f,
            eta: row.eta,
            p,
            analytic: f64::NAN,
            mc_rate: None,
            wilson_low: None,
            wilson_high: None,
            status: "pass",
            reason: String::new(),
        };
        let Some(want) = rederive(&g, &args.sweep, row)? else {
            out.status = "fail";
            out.reason = format!("cannot re-derive design `{}`", row.design);
            report.push(out);
            continue;
        };
        if let Some(why) = mismatch(row, &want) {
            out.status = "fail";
            out.reason = why;
            report.push(out);
            continue;
        }
        let part = match (row.design.as_str(), row.max_region) {
            (sweep::DESIGN_PARTITIONED, Some(r)) => args.sweep.partitioner.partition(&g, r)?,
            _ => {
                out.analytic = 1.0 - want_failure(&g, &want, args.sweep.model, p);
                out.reason = "analytic only: no replicated build to simulate".into();
                report.push(out);
                continue;
            }
        };
        out.analytic = 1.0 - failure(args.sweep.model, &part.sizes(), row.f, p);
        let rn = reinforce_partitioned(&g, &part, row.f, args.sweep.model)?;
        let seed = mix(cli.seed, i as u64);
        let est = match &program {
            ProgramSpec::Flood(prog) => Simulator::new(&rn, prog, rounds)?.monte_carlo(p, args.trials, seed)?,
            ProgramSpec::Paths(prog) => Simulator::new(&rn, prog, rounds)?.monte_carlo(p, args.trials, seed)?,
        };
        out.mc_rate = Some(est.success_rate);
        out.wilson_low = Some(est.wilson_low);
        out.wilson_high = Some(est.wilson_high);
        let floor = out.analytic - 3.0 * est.half_width();
        if est.success_rate < floor {
            out.status = "fail";
            out.reason = format!("success {} below analytic - 3 half-widths = {floor}", est.success_rate);
        }
        report.push(out);
    }
    let failed = report.iter().filter(|r| r.status == "fail").count();
    Ok(Output {
        bytes: records(cli.format, &report)?,
        failure: (failed > 0).then(|| format!("{failed} of {} rows failed", report.len())),
    })
}
