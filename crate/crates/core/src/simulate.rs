//! Round-by-round execution of a routing program on a reinforced network.
//!
//! Every copy runs the original program for its projected node. Omission
//! builds use the know-flag protocol: honest copies that still know their
//! state send the program's message or an explicit "nothing" marker on every
//! copy arc, and a copy stays in the know only if each base in-arc delivered
//! at least one copy. Byzantine builds take a strict-majority vote per base
//! in-arc over the wired sender copies.
//!
//! Success is checked after every round against a fault-free reference run:
//! under omission each node needs one copy in the know holding the reference
//! state, under Byzantine faults each node needs `f + 1` non-faulty copies
//! holding it.

use std::borrow::Cow;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};
use crate::program::{Message, NodeContext, RoutingProgram};
use crate::reinforce::{CopyId, FaultKind, ReinforcedNetwork};
use crate::rng;

/// Largest copy count accepted by exhaustive enumeration.
pub const EXHAUSTIVE_MAX_COPIES: usize = 20;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Behaviour of faulty copies.
///
/// Under omission faults only the send pattern matters: `CrashSilent` and
/// `CorruptAll` both drop every send, `CorruptRandom` drops each send with
/// probability one half.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    CrashSilent,
    CorruptAll,
    CorruptRandom(u64),
}

impl Adversary {
    /// Worst-case behaviour for the model.
    pub fn default_for(kind: FaultKind) -> Self {
        match kind {
            FaultKind::Omission => Adversary::CrashSilent,
            FaultKind::Byzantine => Adversary::CorruptAll,
        }
    }
}

impl FromStr for Adversary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crash-silent" | "silent" => Ok(Adversary::CrashSilent),
            "corrupt-all" => Ok(Adversary::CorruptAll),
            "corrupt-random" => Ok(Adversary::CorruptRandom(0)),
            _ => match s.strip_prefix("corrupt-random:") {
                Some(seed) => seed
                    .parse()
                    .map(Adversary::CorruptRandom)
                    .map_err(|_| Error::Argument(format!("bad adversary seed `{seed}`"))),
                None => Err(Error::Argument(format!(
                    "unknown adversary `{s}` (crash-silent, corrupt-all, corrupt-random[:seed])"
                ))),
            },
        }
    }
}

/// A fixed set of faulty copies plus the behaviour they follow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub faulty: Vec<CopyId>,
    pub adversary: Adversary,
    pub seed: u64,
}

impl FaultScenario {
    pub fn new(faulty: impl IntoIterator<Item = CopyId>, adversary: Adversary) -> Self {
        let mut faulty: Vec<CopyId> = faulty.into_iter().collect();
        faulty.sort_unstable();
        faulty.dedup();
        Self {
            faulty,
            adversary,
            seed: 0,
        }
    }

    pub fn fault_free(kind: FaultKind) -> Self {
        Self::new([], Adversary::default_for(kind))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn mask(&self, copies: usize) -> Result<Vec<bool>> {
        let mut mask = vec![false; copies];
        for &c in &self.faulty {
            *mask.get_mut(c.0).ok_or_else(|| {
                Error::Argument(format!("faulty copy {} out of range ({copies} copies)", c.0))
            })? = true;
        }
        Ok(mask)
    }
}

/// Fault-free run of the program on the original network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceTrace<S> {
    /// `states[r][v]`: state of `v` after round `r`; row 0 is the initial state.
    pub states: Vec<Vec<S>>,
    /// `messages[r - 1][a]`: what travelled on base arc `a` in round `r`.
    pub messages: Vec<Vec<Option<Message>>>,
}

impl<S> ReferenceTrace<S> {
    pub fn rounds(&self) -> usize {
        self.messages.len()
    }
}

pub fn run_reference<P: RoutingProgram>(
    g: &Network,
    program: &P,
    rounds: usize,
) -> Result<ReferenceTrace<P::State>> {
    run_reference_seeded(g, program, rounds, 0)
}

/// Like [`run_reference`] with an explicit shared-randomness seed.
pub fn run_reference_seeded<P: RoutingProgram>(
    g: &Network,
    program: &P,
    rounds: usize,
    shared_seed: u64,
) -> Result<ReferenceTrace<P::State>> {
    let slots = in_slots(g);
    let mut states: Vec<P::State> = g
        .nodes()
        .map(|v| program.init(&NodeContext::new(g, v, 0, shared_seed)))
        .collect();
    let mut trace = ReferenceTrace {
        states: vec![states.clone()],
        messages: Vec::with_capacity(rounds),
    };
    for r in 1..=rounds {
        let outboxes = g
            .nodes()
            .map(|v| checked_send(g, program, v, r, shared_seed, &states[v.0]))
            .collect::<Result<Vec<_>>>()?;
        let messages = g
            .arcs()
            .iter()
            .map(|&(u, w)| {
                let j = g.out_neighbors(u).binary_search(&w).expect("arc endpoint");
                outboxes[u.0][j].clone()
            })
            .collect();
        states = g
            .nodes()
            .map(|v| {
                let inbox: Vec<Option<Message>> = g
                    .in_neighbors(v)
                    .iter()
                    .zip(&slots[v.0])
                    .map(|(&w, &j)| outboxes[w.0][j].clone())
                    .collect();
                let ctx = NodeContext::new(g, v, r, shared_seed);
                program.receive(&ctx, &states[v.0], &inbox)
            })
            .collect();
        trace.states.push(states.clone());
        trace.messages.push(messages);
    }
    Ok(trace)
}

/// `slots[v][k]`: position of `v` in the out-list of its `k`-th in-neighbour.
fn in_slots(g: &Network) -> Vec<Vec<usize>> {
    g.nodes()
        .map(|v| {
            g.in_neighbors(v)
                .iter()
                .map(|&w| g.out_neighbors(w).binary_search(&v).expect("arc endpoint"))
                .collect()
        })
        .collect()
}

fn checked_send<P: RoutingProgram>(
    g: &Network,
    program: &P,
    v: NodeId,
    round: usize,
    shared_seed: u64,
    state: &P::State,
) -> Result<Vec<Option<Message>>> {
    let ctx = NodeContext::new(g, v, round, shared_seed);
    let out = program.send(&ctx, state);
    if out.len() != ctx.out_neighbors.len() {
        return Err(Error::Program {
            node: v.0,
            round,
            message: format!(
                "outbox has {} entries for {} out-arcs",
                out.len(),
                ctx.out_neighbors.len()
            ),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub record_trace: bool,
    /// Skip the remaining rounds once the simulation has failed.
    pub stop_on_failure: bool,
}

/// Per-copy flags after one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// Omission builds only.
    pub know: Option<Vec<bool>>,
    pub correct: Vec<bool>,
}

/// One JSON-lines trace record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub round: usize,
    pub node: usize,
    pub copy: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub know: Option<bool>,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutcome {
    pub success: bool,
    /// First round after which the simulation condition was violated.
    pub failed_round: Option<usize>,
    /// Every non-faulty copy held the reference state in every round.
    pub all_correct: bool,
    /// `correct_counts[r - 1][v]`: copies of `v` counted correct after round `r`.
    pub correct_counts: Vec<Vec<usize>>,
    pub trace: Option<Vec<RoundTrace>>,
}

impl SimOutcome {
    pub fn trace_lines(&self, rn: &ReinforcedNetwork) -> Vec<TraceLine> {
        let Some(trace) = &self.trace else {
            return Vec::new();
        };
        trace
            .iter()
            .enumerate()
            .flat_map(|(r, rt)| {
                (0..rt.correct.len()).map(move |c| TraceLine {
                    round: r + 1,
                    node: rn.project(CopyId(c)).0,
                    copy: rn.copy_index(CopyId(c)),
                    know: rt.know.as_ref().map(|k| k[c]),
                    correct: rt.correct[c],
                })
            })
            .collect()
    }

    pub fn write_trace_jsonl(&self, rn: &ReinforcedNetwork, mut out: impl Write) -> Result<()> {
        for line in self.trace_lines(rn) {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")
                .map_err(|e| Error::Argument(format!("trace write failed: {e}")))?;
        }
        Ok(())
    }
}

/// Runs one program on one reinforced build; caches the reference run.
pub struct Simulator<'a, P: RoutingProgram> {
    rn: &'a ReinforcedNetwork,
    program: &'a P,
    rounds: usize,
    shared_seed: u64,
    slots: Vec<Vec<usize>>,
    reference: ReferenceTrace<P::State>,
}

impl<'a, P: RoutingProgram> Simulator<'a, P> {
    pub fn new(rn: &'a ReinforcedNetwork, program: &'a P, rounds: usize) -> Result<Self> {
        Self::with_shared_seed(rn, program, rounds, 0)
    }

    pub fn with_shared_seed(
        rn: &'a ReinforcedNetwork,
        program: &'a P,
        rounds: usize,
        shared_seed: u64,
    ) -> Result<Self> {
        let g = rn.base();
        Ok(Self {
            rn,
            program,
            rounds,
            shared_seed,
            slots: in_slots(g),
            reference: run_reference_seeded(g, program, rounds, shared_seed)?,
        })
    }

    pub fn reference(&self) -> &ReferenceTrace<P::State> {
        &self.reference
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn run(&self, scenario: &FaultScenario, opts: SimOptions) -> Result<SimOutcome> {
        let mask = scenario.mask(self.rn.copy_count())?;
        self.run_mask(&mask, scenario.adversary, opts)
    }

    fn run_mask(&self, faulty: &[bool], adv: Adversary, opts: SimOptions) -> Result<SimOutcome> {
        match self.rn.kind() {
            FaultKind::Omission => self.run_omission(faulty, adv, opts),
            FaultKind::Byzantine => self.run_byzantine(faulty, adv, opts),
        }
    }

    fn ctx(&self, v: NodeId, round: usize) -> NodeContext<'_> {
        NodeContext::new(self.rn.base(), v, round, self.shared_seed)
    }

    fn init_states(&self) -> Vec<P::State> {
        let n = self.rn.base().node_count();
        (0..self.rn.copy_count())
            .map(|c| self.program.init(&self.ctx(NodeId(c % n), 0)))
            .collect()
    }

    fn send(&self, c: usize, round: usize, state: &P::State) -> Result<Vec<Option<Message>>> {
        let v = self.rn.project(CopyId(c));
        checked_send(self.rn.base(), self.program, v, round, self.shared_seed, state)
    }

    fn run_omission(&self, faulty: &[bool], adv: Adversary, opts: SimOptions) -> Result<SimOutcome> {
        let rn = self.rn;
        let g = rn.base();
        let total = rn.copy_count();
        let mut states = self.init_states();
        let mut know = vec![true; total];
        let mut tracker = Tracker::new(opts);

        for r in 1..=self.rounds {
            let outboxes = (0..total)
                .map(|c| know[c].then(|| self.send(c, r, &states[c])).transpose())
                .collect::<Result<Vec<_>>>()?;
            let mut next_states = Vec::with_capacity(total);
            let mut next_know = vec![false; total];
            for c in 0..total {
                let v = rn.project(CopyId(c));
                if !know[c] {
                    next_states.push(states[c].clone());
                    continue;
                }
                let mut inbox = Vec::with_capacity(g.in_neighbors(v).len());
                for (k, (&w, &j)) in g.in_neighbors(v).iter().zip(&self.slots[v.0]).enumerate() {
                    let mut got: Option<&Option<Message>> = None;
                    for s in rn.senders(w, CopyId(c)) {
                        let Some(out) = &outboxes[s.0] else { continue };
                        if faulty[s.0] && !omission_delivers(adv, r, s.0, c, k) {
                            continue;
                        }
                        let m = &out[j];
                        match got {
                            Some(prev) if prev != m => {
                                return Err(Error::Disagreement {
                                    from: w.0,
                                    to: v.0,
                                    round: r,
                                })
                            }
                            _ => got = Some(m),
                        }
                    }
                    match got {
                        Some(m) => inbox.push(m.clone()),
                        None => break,
                    }
                }
                if inbox.len() == g.in_neighbors(v).len() {
                    next_states.push(self.program.receive(&self.ctx(v, r), &states[c], &inbox));
                    next_know[c] = true;
                } else {
                    next_states.push(states[c].clone());
                }
            }
            states = next_states;
            know = next_know;

            let reference = &self.reference.states[r];
            let correct: Vec<bool> = (0..total)
                .map(|c| know[c] && states[c] == reference[c % g.node_count()])
                .collect();
            let done = tracker.record(rn, r, faulty, 1, correct, Some(&know));
            if done {
                break;
            }
        }
        Ok(tracker.finish())
    }

    fn run_byzantine(&self, faulty: &[bool], adv: Adversary, opts: SimOptions) -> Result<SimOutcome> {
        let rn = self.rn;
        let g = rn.base();
        let total = rn.copy_count();
        let mut states = self.init_states();
        let mut tracker = Tracker::new(opts);

        for r in 1..=self.rounds {
            // faulty copies keep an honest shadow state to derive their forgeries from
            let outboxes = (0..total)
                .map(|c| self.send(c, r, &states[c]))
                .collect::<Result<Vec<_>>>()?;
            let mut next_states = Vec::with_capacity(total);
            let mut votes: Vec<Option<Cow<'_, [u8]>>> = Vec::with_capacity(rn.ell());
            for (c, state) in states.iter().enumerate() {
                let v = rn.project(CopyId(c));
                let mut inbox = Vec::with_capacity(g.in_neighbors(v).len());
                for (k, (&w, &j)) in g.in_neighbors(v).iter().zip(&self.slots[v.0]).enumerate() {
                    votes.clear();
                    for s in rn.senders(w, CopyId(c)) {
                        let honest = outboxes[s.0][j].as_deref();
                        votes.push(if faulty[s.0] {
                            byzantine_wire(adv, honest, r, s.0, c, k)
                        } else {
                            honest.map(Cow::Borrowed)
                        });
                    }
                    inbox.push(strict_majority(&votes).map(|m| m.into_owned()));
                }
                next_states.push(self.program.receive(&self.ctx(v, r), state, &inbox));
            }
            states = next_states;

            let reference = &self.reference.states[r];
            let correct: Vec<bool> = (0..total)
                .map(|c| !faulty[c] && states[c] == reference[c % g.node_count()])
                .collect();
            let done = tracker.record(rn, r, faulty, rn.f() + 1, correct, None);
            if done {
                break;
            }
        }
        Ok(tracker.finish())
    }

    /// Success rate over `trials` sampled scenarios under the default adversary.
    pub fn monte_carlo(&self, p: f64, trials: usize, seed: u64) -> Result<Estimate> {
        self.monte_carlo_with(p, trials, seed, Adversary::default_for(self.rn.kind()))
    }

    pub fn monte_carlo_with(
        &self,
        p: f64,
        trials: usize,
        seed: u64,
        adversary: Adversary,
    ) -> Result<Estimate> {
        check_probability(p)?;
        if trials == 0 {
            return Err(Error::Argument("trials must be at least 1".into()));
        }
        let opts = SimOptions {
            record_trace: false,
            stop_on_failure: true,
        };
        let total = self.rn.copy_count();
        let successes = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let mask = fault_mask(total, p, rng::mix(seed, t));
                self.run_mask(&mask, adversary, opts).map(|o| o.success as usize)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        Ok(Estimate::new(successes, trials))
    }

    /// Counts successful fault sets by size under the default adversary.
    pub fn exhaustive_profile(&self) -> Result<ExhaustiveProfile> {
        let total = self.rn.copy_count();
        if total > EXHAUSTIVE_MAX_COPIES {
            return Err(Error::TooLarge(format!(
                "{total} copies exceed the exhaustive limit of {EXHAUSTIVE_MAX_COPIES}"
            )));
        }
        let adversary = Adversary::default_for(self.rn.kind());
        let opts = SimOptions {
            record_trace: false,
            stop_on_failure: true,
        };
        let per_mask = (0..1u32 << total)
            .into_par_iter()
            .map(|bits| {
                let mask: Vec<bool> = (0..total).map(|i| bits >> i & 1 == 1).collect();
                self.run_mask(&mask, adversary, opts)
                    .map(|o| (bits.count_ones() as usize, o.success))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut successes_by_size = vec![0u64; total + 1];
        for (size, ok) in per_mask {
            successes_by_size[size] += ok as u64;
        }
        Ok(ExhaustiveProfile {
            copies: total,
            successes_by_size,
        })
    }
}

fn omission_delivers(adv: Adversary, round: usize, sender: usize, receiver: usize, k: usize) -> bool {
    match adv {
        Adversary::CrashSilent | Adversary::CorruptAll => false,
        Adversary::CorruptRandom(seed) => event_draw(seed, round, sender, receiver, k) & 1 == 0,
    }
}

fn byzantine_wire<'m>(
    adv: Adversary,
    honest: Option<&'m [u8]>,
    round: usize,
    sender: usize,
    receiver: usize,
    k: usize,
) -> Option<Cow<'m, [u8]>> {
    match adv {
        Adversary::CrashSilent => None,
        Adversary::CorruptAll => Some(Cow::Owned(forge(honest))),
        Adversary::CorruptRandom(seed) => match event_draw(seed, round, sender, receiver, k) % 3 {
            0 => honest.map(Cow::Borrowed),
            1 => None,
            _ => Some(Cow::Owned(forge(honest))),
        },
    }
}

/// Colluding forgery: every byte flipped, so it never equals the honest
/// message and is identical across faulty senders with the same honest message.
fn forge(honest: Option<&[u8]>) -> Vec<u8> {
    match honest {
        Some(m) if !m.is_empty() => m.iter().map(|b| !b).collect(),
        _ => vec![0xFF; 4],
    }
}

fn event_draw(seed: u64, round: usize, sender: usize, receiver: usize, k: usize) -> u64 {
    let key = rng::mix(rng::mix(seed, round as u64), sender as u64);
    rng::mix(rng::mix(key, receiver as u64), k as u64)
}

/// The value held by more than half of the votes; ties and pluralities give `None`.
fn strict_majority<'m>(votes: &[Option<Cow<'m, [u8]>>]) -> Option<Cow<'m, [u8]>> {
    for (i, cand) in votes.iter().enumerate() {
        if votes[..i].contains(cand) {
            continue;
        }
        let count = votes[i..].iter().filter(|v| *v == cand).count();
        if 2 * count > votes.len() {
            return cand.clone();
        }
    }
    None
}

struct Tracker {
    opts: SimOptions,
    failed_round: Option<usize>,
    all_correct: bool,
    counts: Vec<Vec<usize>>,
    trace: Vec<RoundTrace>,
}

impl Tracker {
    fn new(opts: SimOptions) -> Self {
        Self {
            opts,
            failed_round: None,
            all_correct: true,
            counts: Vec::new(),
            trace: Vec::new(),
        }
    }

    /// Returns true when the run should stop.
    fn record(
        &mut self,
        rn: &ReinforcedNetwork,
        round: usize,
        faulty: &[bool],
        needed: usize,
        correct: Vec<bool>,
        know: Option<&[bool]>,
    ) -> bool {
        let n = rn.base().node_count();
        let mut counts = vec![0usize; n];
        for (c, &ok) in correct.iter().enumerate() {
            counts[c % n] += ok as usize;
            if !ok && !faulty[c] {
                self.all_correct = false;
            }
        }
        if self.failed_round.is_none() && counts.iter().any(|&k| k < needed) {
            self.failed_round = Some(round);
        }
        self.counts.push(counts);
        if self.opts.record_trace {
            self.trace.push(RoundTrace {
                know: know.map(<[bool]>::to_vec),
                correct,
            });
        }
        self.opts.stop_on_failure && self.failed_round.is_some()
    }

    fn finish(self) -> SimOutcome {
        SimOutcome {
            success: self.failed_round.is_none(),
            failed_round: self.failed_round,
            all_correct: self.all_correct,
            correct_counts: self.counts,
            trace: self.opts.record_trace.then_some(self.trace),
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Argument(format!("p={p} is not a probability")))
    }
}

fn fault_mask(copies: usize, p: f64, seed: u64) -> Vec<bool> {
    (0..copies).map(|c| rng::unit(seed, c as u64) < p).collect()
}

/// Marks each copy faulty independently with probability `p`.
pub fn sample_faults(rn: &ReinforcedNetwork, p: f64, seed: u64) -> Result<FaultScenario> {
    check_probability(p)?;
    let mask = fault_mask(rn.copy_count(), p, seed);
    let mut scenario = FaultScenario::new(
        (0..mask.len()).filter(|&c| mask[c]).map(CopyId),
        Adversary::default_for(rn.kind()),
    );
    scenario.seed = seed;
    Ok(scenario)
}

fn expect_kind(rn: &ReinforcedNetwork, kind: FaultKind) -> Result<()> {
    if rn.kind() == kind {
        Ok(())
    } else {
        Err(Error::ModelMismatch {
            expected: kind.name(),
            actual: rn.kind().name(),
        })
    }
}

pub fn run_om<P: RoutingProgram>(
    rn: &ReinforcedNetwork,
    program: &P,
    scenario: &FaultScenario,
    rounds: usize,
) -> Result<SimOutcome> {
    expect_kind(rn, FaultKind::Omission)?;
    Simulator::new(rn, program, rounds)?.run(scenario, SimOptions::default())
}

pub fn run_byz<P: RoutingProgram>(
    rn: &ReinforcedNetwork,
    program: &P,
    scenario: &FaultScenario,
    rounds: usize,
) -> Result<SimOutcome> {
    expect_kind(rn, FaultKind::Byzantine)?;
    Simulator::new(rn, program, rounds)?.run(scenario, SimOptions::default())
}

/// Sufficient condition for success: every region has a copy index with no
/// faulty copy in it (omission), or at least `f + 1` such indices (Byzantine).
pub fn check_lemma_condition(rn: &ReinforcedNetwork, scenario: &FaultScenario) -> bool {
    let total = rn.copy_count();
    let mut faulty = vec![false; total];
    for c in scenario.faulty.iter().filter(|c| c.0 < total) {
        faulty[c.0] = true;
    }
    let needed = match rn.kind() {
        FaultKind::Omission => 1,
        FaultKind::Byzantine => rn.f() + 1,
    };
    rn.partition().regions().iter().all(|region| {
        let clean = (0..rn.ell())
            .filter(|&i| region.iter().all(|&v| !faulty[rn.copy(v, i).0]))
            .count();
        clean >= needed
    })
}

/// Success rate with a Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Estimate {
    pub fn new(successes: usize, trials: usize) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(successes, trials);
        Self {
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            wilson_low,
            wilson_high,
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.wilson_high - self.wilson_low) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.wilson_low..=self.wilson_high).contains(&x)
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn monte_carlo<P: RoutingProgram>(
    rn: &ReinforcedNetwork,
    program: &P,
    p: f64,
    rounds: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    Simulator::new(rn, program, rounds)?.monte_carlo(p, trials, seed)
}

/// Successful fault sets of a build, grouped by the number of faulty copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveProfile {
    pub copies: usize,
    pub successes_by_size: Vec<u64>,
}

impl ExhaustiveProfile {
    /// Exact success probability when copies fail independently with rate `p`.
    pub fn success_probability(&self, p: f64) -> f64 {
        let n = self.copies as i32;
        self.successes_by_size
            .iter()
            .enumerate()
            .map(|(k, &s)| s as f64 * p.powi(k as i32) * (1.0 - p).powi(n - k as i32))
            .sum()
    }
}

pub fn exhaustive_success<P: RoutingProgram>(
    rn: &ReinforcedNetwork,
    program: &P,
    p: f64,
    rounds: usize,
) -> Result<f64> {
    check_probability(p)?;
    let sim = Simulator::new(rn, program, rounds)?;
    Ok(sim.exhaustive_profile()?.success_probability(p))
}
