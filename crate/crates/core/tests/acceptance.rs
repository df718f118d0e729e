//! Acceptance gate. Every criterion runs, prints one PASS/FAIL line, and the
//! process exits non-zero if any criterion failed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use netreinforce::graph::{build_hypercube, build_path, Network, NodeId};
use netreinforce::graphml::parse_graphml;
use netreinforce::partition::{cut_stats, partition_hypercube, Partition};
use netreinforce::program::{Flood, PathForwarding, RandomAutomaton, RoutingProgram};
use netreinforce::reinforce::{reinforce_partitioned, reinforce_strong, FaultKind, ReinforcedNetwork};
use netreinforce::reliability::{failure_om, naive_replication_p};
use netreinforce::rng::{mix, unit};
use netreinforce::simulate::{
    check_lemma_condition, Adversary, FaultScenario, SimOptions, Simulator,
};
use netreinforce::sweep::{pareto_sweep, Partitioner, SweepConfig, SweepRow};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> Network {
    let text = std::fs::read_to_string(data(name)).expect("fixture readable");
    parse_graphml(&text).expect("fixture parses")
}

fn within_rel(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol * target
}

fn find_row(rows: &[SweepRow], nu: f64, eta: f64, eta_tol: f64) -> Option<&SweepRow> {
    rows.iter()
        .find(|r| r.nu == nu && (r.eta - eta).abs() <= eta_tol)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let g = load("five_node.graphml");
    let cfg = SweepConfig {
        partitioner: Partitioner::Auto,
        grid: vec![1, 3, 5],
        fs: vec![0, 1],
        kind: FaultKind::Omission,
        target: 0.01,
    };
    let rows = pareto_sweep(&g, &cfg).expect("sweep");
    let elapsed = start.elapsed().as_secs_f64();
    let points = [
        ("original", 1.0, 1.0, 0.0, 0.00200),
        ("duplication", 2.0, 2.0, 0.0, 0.0210),
        ("{a,b,c}/{d,e}", 2.0, 2.67, 0.01, 0.0277),
    ];
    let mut ok = elapsed < 1.0;
    let mut detail = Vec::new();
    for (name, nu, eta, eta_tol, p) in points {
        match find_row(&rows, nu, eta, eta_tol + 1e-12) {
            Some(row) => {
                let hit = within_rel(row.max_p, p, 0.05);
                ok &= hit;
                detail.push(format!("{name}=({}, {:.4}, {:.5})", row.nu, row.eta, row.max_p));
            }
            None => {
                ok = false;
                detail.push(format!("{name} missing"));
            }
        }
    }
    // the partitioned point must come from the {a,b,c}/{d,e} split
    let labelled = Partition::new(
        5,
        vec![
            ["a", "b", "c"].iter().map(|l| g.node_by_label(l).unwrap()).collect(),
            ["d", "e"].iter().map(|l| g.node_by_label(l).unwrap()).collect(),
        ],
    )
    .unwrap();
    let rn = reinforce_partitioned(&g, &labelled, 1, FaultKind::Omission).unwrap();
    ok &= rn.overheads().eta == Ratio::new(8, 3);
    detail.push(format!("{elapsed:.3}s"));
    verdict(ok, detail.join(" "))
}

fn criterion_2() -> Verdict {
    let eta_strong = |kind| {
        reinforce_strong(&build_path(6).unwrap(), 1, kind)
            .unwrap()
            .overheads()
            .eta
    };
    let g = build_path(6).unwrap();
    let halves = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]).unwrap();
    let eps = cut_stats(&g, &halves).unwrap().epsilon;
    let eta_part = |kind| {
        reinforce_partitioned(&g, &halves, 1, kind)
            .unwrap()
            .overheads()
            .eta
    };
    let got = [
        eta_strong(FaultKind::Byzantine),
        eta_strong(FaultKind::Omission),
        eta_part(FaultKind::Omission),
        eta_part(FaultKind::Byzantine),
    ];
    let want = [
        Ratio::from_integer(9),
        Ratio::from_integer(4),
        Ratio::new(12, 5),
        Ratio::new(21, 5),
    ];
    verdict(
        got == want && eps == Ratio::new(1, 5),
        format!("eta={:?} eps={eps}", got.map(|r| r.to_string())),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, d, h) in [(6, 2, 2), (6, 2, 3), (4, 2, 2), (6, 3, 2)] {
        let g = build_hypercube(q, d, false).unwrap();
        let part = partition_hypercube(q, d, h).unwrap();
        let stats = cut_stats(&g, &part).unwrap();
        let regions_ok = part.region_count() == (q / h).pow(d as u32)
            && part.sizes().iter().all(|&s| s == h.pow(d as u32));
        let eps_ok = stats.epsilon <= Ratio::new(1, h);
        ok &= regions_ok && eps_ok;
        detail.push(format!("({q},{d},{h}):k={} eps={}", part.region_count(), stats.epsilon));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 1.0;
    detail.push(format!("{elapsed:.3}s"));
    verdict(ok, detail.join(" "))
}

/// Deterministic random instance generator for the soundness suite.
struct Case {
    rn: ReinforcedNetwork,
    scenario: FaultScenario,
    program: AnyProgram,
    horizon: usize,
}

enum AnyProgram {
    Flood(Flood),
    Paths(PathForwarding),
    Random(RandomAutomaton),
}

fn random_case(key: u64) -> Case {
    let draw = |i: u64| mix(key, i);
    let n = 1 + (draw(0) % 8) as usize;
    let density = 0.15 + 0.5 * unit(key, 1);
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && unit(key, 100 + (u * 8 + v) as u64) < density)
        .collect();
    let g = Network::new(n, arcs).unwrap();
    let k = 1 + (draw(2) % n as u64) as usize;
    let labels: Vec<usize> = (0..n).map(|v| (draw(200 + v as u64) % k as u64) as usize).collect();
    let part = Partition::from_assignment(&labels).unwrap();
    let f = 1 + (draw(3) % 2) as usize;
    let kind = if draw(4) % 2 == 0 {
        FaultKind::Omission
    } else {
        FaultKind::Byzantine
    };
    let rn = reinforce_partitioned(&g, &part, f, kind).unwrap();
    let horizon = 1 + (draw(5) % 10) as usize;

    let program = match draw(6) % 3 {
        0 => AnyProgram::Flood(Flood {
            source: NodeId((draw(7) % n as u64) as usize),
        }),
        1 => {
            let routes = (0..1 + draw(8) % 3)
                .map(|r| random_walk(&g, mix(key, 300 + r)))
                .collect();
            AnyProgram::Paths(PathForwarding::new(&g, routes).unwrap())
        }
        _ => AnyProgram::Random(RandomAutomaton { salt: draw(9) }),
    };

    let needed = match kind {
        FaultKind::Omission => 1,
        FaultKind::Byzantine => f + 1,
    };
    let ell = rn.ell();
    let mut faulty = Vec::new();
    match draw(10) % 3 {
        // keep `needed` indices clean per region, fault the rest at random
        0 | 1 => {
            for (ri, region) in rn.partition().regions().iter().enumerate() {
                let shift = (mix(key, 400 + ri as u64) % ell as u64) as usize;
                for i in 0..ell {
                    if (i + ell - shift) % ell < needed {
                        continue;
                    }
                    for &v in region {
                        if unit(key, 500 + (v.0 * 8 + i) as u64) < 0.6 {
                            faulty.push(rn.copy(v, i));
                        }
                    }
                }
            }
        }
        _ => {
            let p = 0.4 * unit(key, 11);
            faulty.extend((0..rn.copy_count()).filter(|&c| unit(key, 600 + c as u64) < p).map(
                netreinforce::reinforce::CopyId,
            ));
        }
    }
    let adversary = match draw(12) % 3 {
        0 => Adversary::CrashSilent,
        1 => Adversary::CorruptAll,
        _ => Adversary::CorruptRandom(draw(13)),
    };
    Case {
        rn,
        scenario: FaultScenario::new(faulty, adversary),
        program,
        horizon,
    }
}

fn random_walk(g: &Network, key: u64) -> Vec<NodeId> {
    let n = g.node_count();
    let mut route = vec![NodeId((mix(key, 0) % n as u64) as usize)];
    for step in 1..=(mix(key, 1) % 6) {
        let out = g.out_neighbors(*route.last().unwrap());
        if out.is_empty() {
            break;
        }
        route.push(out[(mix(key, 1 + step) % out.len() as u64) as usize]);
    }
    route
}

fn succeeds<P: RoutingProgram>(case: &Case, program: &P) -> Result<bool, String> {
    let sim = Simulator::new(&case.rn, program, case.horizon).map_err(|e| e.to_string())?;
    sim.run(&case.scenario, SimOptions::default())
        .map(|o| o.success)
        .map_err(|e| e.to_string())
}

fn criterion_4() -> Verdict {
    const REQUIRED: usize = 10_000;
    let mut checked = 0;
    let mut generated = 0u64;
    let mut counterexamples = Vec::new();
    while checked < REQUIRED {
        let key = mix(0x50_0d_ee_d5, generated);
        generated += 1;
        let case = random_case(key);
        if !check_lemma_condition(&case.rn, &case.scenario) {
            continue;
        }
        checked += 1;
        let result = match &case.program {
            AnyProgram::Flood(p) => succeeds(&case, p),
            AnyProgram::Paths(p) => succeeds(&case, p),
            AnyProgram::Random(p) => succeeds(&case, p),
        };
        if result != Ok(true) {
            counterexamples.push((key, result));
        }
    }
    verdict(
        counterexamples.is_empty(),
        format!(
            "{checked} cases meeting the clean-index condition ({generated} generated), {} counterexamples{}",
            counterexamples.len(),
            counterexamples
                .first()
                .map(|(k, r)| format!(", first key {k:#x}: {r:?}"))
                .unwrap_or_default()
        ),
    )
}

fn three_region_build() -> ReinforcedNetwork {
    let g = Network::from_undirected_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4)])
        .unwrap();
    let part = Partition::from_assignment(&[0, 0, 0, 1, 1]).unwrap();
    reinforce_partitioned(&g, &part, 1, FaultKind::Omission).unwrap()
}

fn big_pow(x: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::from_integer(BigInt::from(1)), |acc, _| acc * x)
}

/// `1 - failure_om(sizes, f, p)` in exact arithmetic for rational `p`.
fn exact_om_reliability(sizes: &[usize], f: usize, p: &BigRational) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    sizes.iter().fold(one.clone(), |acc, &l| {
        let hit = &one - big_pow(&(&one - p), l);
        acc * (&one - big_pow(&hit, f + 1))
    })
}

fn exact_profile_success(successes_by_size: &[u64], p: &BigRational) -> BigRational {
    let one = BigRational::from_integer(BigInt::from(1));
    let total = successes_by_size.len() - 1;
    successes_by_size
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            BigRational::from_integer(BigInt::from(s)) * big_pow(p, k) * big_pow(&(&one - p), total - k)
        })
        .fold(BigRational::from_integer(BigInt::from(0)), |a, b| a + b)
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let rn = three_region_build();
    let flood = Flood { source: NodeId(0) };
    let sim = Simulator::new(&rn, &flood, 4).unwrap();
    let profile = sim.exhaustive_profile().unwrap();
    let mut bound_ok = true;
    let mut inside = 0;
    let mut detail = Vec::new();
    for (i, (p, denom)) in [(0.01, 100), (0.05, 20), (0.1, 10)].into_iter().enumerate() {
        let exact = profile.success_probability(p);
        let analytic = 1.0 - failure_om(&[3, 2], 1, p);
        let p_exact = BigRational::new(BigInt::from(1), BigInt::from(denom));
        let exact_q = exact_profile_success(&profile.successes_by_size, &p_exact);
        let analytic_q = exact_om_reliability(&[3, 2], 1, &p_exact);
        bound_ok &= exact_q >= analytic_q;
        // the floating evaluation must agree with the rational one
        bound_ok &= (exact - analytic).abs() < 1e-12;
        let est = sim.monte_carlo(p, 100_000, 0xC0FFEE + i as u64).unwrap();
        inside += est.contains(exact) as usize;
        detail.push(format!(
            "p={p}: exact={exact:.6} analytic={analytic:.6} (equal: {}) mc={:.5}[{:.5},{:.5}]",
            exact_q == analytic_q,
            est.success_rate,
            est.wilson_low,
            est.wilson_high
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    detail.push(format!("{inside}/3 inside, {elapsed:.1}s"));
    verdict(bound_ok && inside >= 2 && elapsed < 60.0, detail.join("; "))
}

fn criterion_6() -> Verdict {
    const TRIALS: usize = 1_000;
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [16usize, 64, 256] {
        let g = build_path(n).unwrap();
        let rn = reinforce_strong(&g, 1, FaultKind::Omission).unwrap();
        let flood = Flood { source: NodeId(0) };
        let sim = Simulator::new(&rn, &flood, n - 1).unwrap();
        let rates: Vec<f64> = [0.1, 1.0, 3.0]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = c / (n as f64).sqrt();
                sim.monte_carlo(p, TRIALS, mix(n as u64, i as u64))
                    .unwrap()
                    .success_rate
            })
            .collect();
        ok &= rates.windows(2).all(|w| w[0] > w[1]);
        detail.push(format!("n={n}: {:.3}/{:.3}/{:.3}", rates[0], rates[1], rates[2]));
    }
    verdict(ok, detail.join(" "))
}

fn criterion_7() -> Verdict {
    let p = |k| naive_replication_p(100, k, 0.01).unwrap().p;
    let (p1, p2, p3) = (p(1), p(2), p(3));
    let (r2, r3) = (p2 / p1, p3 / p1);
    verdict(
        within_rel(r2, 10.0, 0.15) && within_rel(r3, 21.5, 0.15),
        format!("p2/p1={r2:.2} p3/p1={r3:.2}"),
    )
}

fn criterion_8() -> Verdict {
    let g = load("sparse33.graphml");
    let n = g.node_count();
    let cfg = SweepConfig {
        partitioner: Partitioner::Spectral,
        grid: vec![1, 2, 3, 4, 6, 8, 11, 16, 33],
        fs: vec![0, 1],
        kind: FaultKind::Omission,
        target: 0.01,
    };
    let rows = pareto_sweep(&g, &cfg).unwrap();
    let singleton = rows
        .iter()
        .find(|r| r.f == 1 && r.k == n)
        .expect("singleton row");
    let best = rows
        .iter()
        .filter(|r| r.f == 1)
        .map(|r| r.max_p)
        .fold(0.0, f64::max);
    let original = rows.iter().find(|r| r.f == 0).expect("original row").max_p;
    let singleton_ok = best > 0.06 && singleton.max_p >= best;
    let original_ok = within_rel(original, 0.01 / n as f64, 0.10);
    verdict(
        singleton_ok && original_ok && n == 33 && g.is_connected(),
        format!(
            "n={n} best f=1 max_p={best:.5} (singleton {:.5}, need > 0.06); original max_p={original:.6} vs {:.6}",
            singleton.max_p,
            0.01 / n as f64
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 five-node operating points", criterion_1),
        ("2 efficiency constants", criterion_2),
        ("3 hypercube partition bound", criterion_3),
        ("4 soundness suite", criterion_4),
        ("5 oracle consistency", criterion_5),
        ("6 necessity trend", criterion_6),
        ("7 naive replication ratios", criterion_7),
        ("8 33-node singleton claim", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let v = run();
        println!("criterion {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
