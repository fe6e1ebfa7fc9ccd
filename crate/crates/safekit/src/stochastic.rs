//! Synchronized discrete-time stochastic model of the robot treatment cycle,
//! the object detection system and human presence, with exact bounded and
//! unbounded reachability, Monte Carlo cross-validation, and mapping of
//! failure probabilities to safety integrity levels.
//!
//! Per tick, the composed machines advance in a fixed order: the human may
//! enter the danger zone, a present undetected human may be detected, a
//! detection whose latency has elapsed switches the UVC off, the robot phase
//! counter advances. A state in which the UVC is still on, a human is
//! present and the robot is in its row-transition phase is an exposure; a
//! state in which mitigation has been applied is a safe absorbing end of the
//! demand episode. The unbounded reachability value of the exposure label is
//! the probability that the safety function fails on this demand.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::domain::Classification;

/// Label put on absorbing exposure states.
pub const EXPOSURE_LABEL: &str = "exposure";
/// Label put on absorbing safely-mitigated states.
pub const MITIGATED_LABEL: &str = "mitigated";

/// Row-sum tolerance of constructed transition matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Default residual threshold for value iteration.
pub const VALUE_ITERATION_RESIDUAL: f64 = 1e-10;

/// Iteration ceiling for value iteration.
pub const VALUE_ITERATION_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StochasticError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("transition row {row} sums to {sum}, outside 1 ± {ROW_SUM_TOLERANCE}")]
    RowSumBroken { row: usize, sum: f64 },
    #[error("initial distribution sums to {sum}, outside 1 ± {ROW_SUM_TOLERANCE}")]
    InitialDistributionBroken { sum: f64 },
    #[error("negative transition probability {value} in row {row}")]
    NegativeEntry { row: usize, value: f64 },
    #[error("transition in row {row} targets state {target} out of range")]
    TargetOutOfRange { row: usize, target: usize },
    #[error(
        "value iteration did not converge within {iterations} iterations (residual {residual})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("simulation needs at least one run")]
    NoRuns,
}

/// Numeric description of one demand scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Probability per tick that a human enters the danger zone.
    pub p_intrusion: f64,
    /// Probability per tick that the detection system spots a present human
    /// (e.g. the measured classification accuracy).
    pub p_detect: f64,
    /// Probability that an intruding human is trained.
    pub p_trained: f64,
    /// Ticks spent in the row-transition phase of each cycle.
    pub transition_ticks: u32,
    /// Ticks spent treating a row before transitioning.
    pub treatment_ticks: u32,
    /// Ticks from detection to UVC shutdown (the controller's dispatch
    /// latency).
    pub mitigation_latency: u32,
}

impl Scenario {
    /// Documented example configuration. The probabilities are illustrative
    /// defaults, not measured field data; the detection probability matches
    /// the lab-measured classification accuracy.
    pub fn example() -> Self {
        Scenario {
            p_intrusion: 0.02,
            p_detect: 0.94,
            p_trained: 0.5,
            transition_ticks: 3,
            treatment_ticks: 10,
            mitigation_latency: 1,
        }
    }

    pub fn validate(&self) -> Result<(), StochasticError> {
        for (name, p) in [
            ("p_intrusion", self.p_intrusion),
            ("p_detect", self.p_detect),
            ("p_trained", self.p_trained),
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(StochasticError::InvalidScenario(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        if self.transition_ticks < 1 {
            return Err(StochasticError::InvalidScenario(
                "transition_ticks must be at least 1".into(),
            ));
        }
        if self.treatment_ticks < 1 {
            return Err(StochasticError::InvalidScenario(
                "treatment_ticks must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Sparse discrete-time Markov chain with labelled states and a target label
/// set.
#[derive(Debug, Clone)]
pub struct Dtmc {
    rows: Vec<Vec<(usize, f64)>>,
    initial: Vec<(usize, f64)>,
    labels: Vec<BTreeSet<String>>,
    target_labels: BTreeSet<String>,
}

impl Dtmc {
    /// Build and validate a chain: every row stochastic within
    /// [`ROW_SUM_TOLERANCE`], all entries nonnegative, all indices in range.
    pub fn new(
        rows: Vec<Vec<(usize, f64)>>,
        initial: Vec<(usize, f64)>,
        labels: Vec<BTreeSet<String>>,
        target_labels: BTreeSet<String>,
    ) -> Result<Self, StochasticError> {
        let n = rows.len();
        assert_eq!(labels.len(), n, "one label set per state");
        for (i, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(target, p) in row {
                if target >= n {
                    return Err(StochasticError::TargetOutOfRange { row: i, target });
                }
                if p < 0.0 {
                    return Err(StochasticError::NegativeEntry { row: i, value: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(StochasticError::RowSumBroken { row: i, sum });
            }
        }
        let mut initial_sum = 0.0;
        for &(s, p) in &initial {
            if s >= n {
                return Err(StochasticError::TargetOutOfRange { row: s, target: s });
            }
            if p < 0.0 {
                return Err(StochasticError::NegativeEntry { row: s, value: p });
            }
            initial_sum += p;
        }
        if (initial_sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(StochasticError::InitialDistributionBroken { sum: initial_sum });
        }
        Ok(Dtmc {
            rows,
            initial,
            labels,
            target_labels,
        })
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn transition_count(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, s: usize) -> &[(usize, f64)] {
        &self.rows[s]
    }

    pub fn initial_distribution(&self) -> &[(usize, f64)] {
        &self.initial
    }

    pub fn labels(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn is_target(&self, s: usize) -> bool {
        !self.labels[s].is_disjoint(&self.target_labels)
    }

    /// Row sums, for invariant checking.
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, p)| p).sum())
            .collect()
    }
}

/// Composite state of the synchronized machines during a demand episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EpisodeState {
    Running {
        phase: u32,
        human: Option<Classification>,
        detected: Option<u32>,
    },
    Exposed,
    Mitigated,
}

/// Split of a probability draw: outcomes with their probabilities, skipping
/// zero-probability branches so impossible states never enter the chain.
fn branch(p: f64) -> Vec<(bool, f64)> {
    let mut out = Vec::new();
    if p > 0.0 {
        out.push((true, p));
    }
    if p < 1.0 {
        out.push((false, 1.0 - p));
    }
    out
}

/// Distribution over successor states for one synchronized tick.
fn episode_successors(sc: &Scenario, state: EpisodeState) -> Vec<(EpisodeState, f64)> {
    let EpisodeState::Running {
        phase,
        human,
        detected,
    } = state
    else {
        return vec![(state, 1.0)];
    };

    let cycle = sc.treatment_ticks + sc.transition_ticks;
    let next_phase = (phase + 1) % cycle;
    let in_transition = |ph: u32| ph >= sc.treatment_ticks;

    let mut dist: BTreeMap<EpisodeState, f64> = BTreeMap::new();
    let mut push = |s: EpisodeState, p: f64| {
        *dist.entry(s).or_insert(0.0) += p;
    };

    // Intrusion draw, classification draw, detection draw; then the
    // deterministic mitigation countdown, phase advance and episode
    // classification.
    let human_branches: Vec<(Option<Classification>, f64)> = match human {
        Some(c) => vec![(Some(c), 1.0)],
        None => {
            let mut v = Vec::new();
            for (enters, p_enter) in branch(sc.p_intrusion) {
                if !enters {
                    v.push((None, p_enter));
                    continue;
                }
                for (trained, p_class) in branch(sc.p_trained) {
                    let class = if trained {
                        Classification::Trained
                    } else {
                        Classification::Untrained
                    };
                    v.push((Some(class), p_enter * p_class));
                }
            }
            v
        }
    };

    for (human_next, p_human) in human_branches {
        let detect_branches: Vec<(Option<u32>, f64)> = match (human_next, detected) {
            (_, Some(left)) => vec![(Some(left), 1.0)],
            (None, None) => vec![(None, 1.0)],
            (Some(_), None) => branch(sc.p_detect)
                .into_iter()
                .map(|(hit, p)| {
                    if hit {
                        (Some(sc.mitigation_latency), p)
                    } else {
                        (None, p)
                    }
                })
                .collect(),
        };

        for (detect_next, p_detect) in detect_branches {
            let p = p_human * p_detect;
            // Mitigation countdown: latency zero applies in the same tick.
            let (applied, detect_after) = match detect_next {
                Some(0) => (true, None),
                Some(left) => (false, Some(left - 1)),
                None => (false, None),
            };
            let succ = if applied {
                EpisodeState::Mitigated
            } else if human_next.is_some() && in_transition(next_phase) {
                EpisodeState::Exposed
            } else {
                EpisodeState::Running {
                    phase: next_phase,
                    human: human_next,
                    detected: detect_after,
                }
            };
            push(succ, p);
        }
    }

    dist.into_iter().collect()
}

fn episode_label(s: EpisodeState, sc: &Scenario) -> (String, BTreeSet<String>) {
    match s {
        EpisodeState::Exposed => (
            "exposed".to_string(),
            BTreeSet::from([EXPOSURE_LABEL.to_string()]),
        ),
        EpisodeState::Mitigated => (
            "mitigated".to_string(),
            BTreeSet::from([MITIGATED_LABEL.to_string()]),
        ),
        EpisodeState::Running {
            phase,
            human,
            detected,
        } => {
            let phase_name = if phase >= sc.treatment_ticks {
                format!("transition+{}", phase - sc.treatment_ticks)
            } else {
                format!("treatment+{phase}")
            };
            let human_name = match human {
                None => "absent".to_string(),
                Some(Classification::Trained) => "trained".to_string(),
                Some(Classification::Untrained) => "untrained".to_string(),
            };
            let det = match detected {
                None => "undetected".to_string(),
                Some(left) => format!("detected-{left}"),
            };
            let mut labels = BTreeSet::new();
            if human.is_some() {
                labels.insert("human_present".to_string());
            }
            if phase >= sc.treatment_ticks {
                labels.insert("transition".to_string());
            }
            (format!("{phase_name} {human_name} {det}"), labels)
        }
    }
}

/// Synchronized product chain of the robot phase machine, human presence
/// machine and detection machine, restricted to the states reachable from
/// the start of a demand episode. Exposure states carry the target label.
///
/// The episode begins at a uniformly random point of the robot's duty cycle
/// (the demand arrives at an arbitrary moment of operation). This also
/// decorrelates the human's arrival phase from the intrusion rate, which is
/// what makes exposure monotone in `p_intrusion`: a fixed starting phase
/// would concentrate high-rate arrivals at the start of the treatment phase
/// and make aggressive intrusion look spuriously safe.
pub fn build_dtmc(sc: &Scenario) -> Result<Dtmc, StochasticError> {
    sc.validate()?;

    let cycle = sc.treatment_ticks + sc.transition_ticks;
    let mut index: HashMap<EpisodeState, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut initial = Vec::new();
    let mut frontier = VecDeque::new();
    for phase in 0..cycle {
        let root = EpisodeState::Running {
            phase,
            human: None,
            detected: None,
        };
        let idx = order.len();
        order.push(root);
        index.insert(root, idx);
        frontier.push_back(idx);
        initial.push((idx, 1.0 / cycle as f64));
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels: Vec<BTreeSet<String>> = Vec::new();
    let mut done = 0usize;
    while let Some(si) = frontier.pop_front() {
        let state = order[si];
        let succ = episode_successors(sc, state);
        let mut row = Vec::with_capacity(succ.len());
        for (next, p) in succ {
            let ti = match index.get(&next) {
                Some(&ti) => ti,
                None => {
                    let ti = order.len();
                    order.push(next);
                    index.insert(next, ti);
                    frontier.push_back(ti);
                    ti
                }
            };
            row.push((ti, p));
        }
        row.sort_by_key(|&(t, _)| t);
        debug_assert_eq!(rows.len(), si);
        rows.push(row);
        labels.push(episode_label(state, sc).1);
        done += 1;
    }
    debug_assert_eq!(done, order.len());

    Dtmc::new(
        rows,
        initial,
        labels,
        BTreeSet::from([EXPOSURE_LABEL.to_string()]),
    )
}

/// Probability of reaching a target-labelled state within `k` ticks, by `k`
/// backward steps of the bounded-reachability operator with targets made
/// absorbing.
pub fn prob_bounded_reach(m: &Dtmc, k: u32) -> f64 {
    let n = m.state_count();
    let mut x: Vec<f64> = (0..n)
        .map(|s| if m.is_target(s) { 1.0 } else { 0.0 })
        .collect();
    for _ in 0..k {
        let mut next = vec![0.0; n];
        for (s, slot) in next.iter_mut().enumerate() {
            if m.is_target(s) {
                *slot = 1.0;
                continue;
            }
            let mut acc = 0.0;
            for &(t, p) in m.row(s) {
                acc += p * x[t];
            }
            *slot = acc;
        }
        x = next;
    }
    m.initial_distribution()
        .iter()
        .map(|&(s, p)| p * x[s])
        .sum()
}

/// Outcome of an unbounded reachability computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachResult {
    pub probability: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Least fixed point of the unbounded reachability equations, by value
/// iteration from below until the sup-norm residual drops under
/// [`VALUE_ITERATION_RESIDUAL`]. States that cannot reach the target
/// contribute exactly zero.
pub fn prob_reach(m: &Dtmc) -> Result<ReachResult, StochasticError> {
    let n = m.state_count();
    let mut x: Vec<f64> = (0..n)
        .map(|s| if m.is_target(s) { 1.0 } else { 0.0 })
        .collect();
    let mut residual = f64::INFINITY;
    for iteration in 1..=VALUE_ITERATION_BUDGET {
        let mut next = vec![0.0; n];
        residual = 0.0;
        for (s, slot) in next.iter_mut().enumerate() {
            if m.is_target(s) {
                *slot = 1.0;
                continue;
            }
            let mut acc = 0.0;
            for &(t, p) in m.row(s) {
                acc += p * x[t];
            }
            *slot = acc;
            let delta = (acc - x[s]).abs();
            if delta > residual {
                residual = delta;
            }
        }
        x = next;
        if residual < VALUE_ITERATION_RESIDUAL {
            let probability = m
                .initial_distribution()
                .iter()
                .map(|&(s, p)| p * x[s])
                .sum();
            return Ok(ReachResult {
                probability,
                residual,
                iterations: iteration,
            });
        }
    }
    Err(StochasticError::NonConvergence {
        iterations: VALUE_ITERATION_BUDGET,
        residual,
    })
}

/// Unbounded reachability by direct linear solve (Gaussian elimination on
/// the states that can reach the target), offered as an independent route
/// next to value iteration for chains of moderate size.
pub fn prob_reach_direct(m: &Dtmc) -> Result<f64, StochasticError> {
    let n = m.state_count();

    // Backward reachability: states with a path to a target.
    let mut can_reach = vec![false; n];
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        for &(t, p) in m.row(s) {
            if p > 0.0 {
                reverse[t].push(s);
            }
        }
    }
    let mut queue = VecDeque::new();
    for (s, reaches) in can_reach.iter_mut().enumerate() {
        if m.is_target(s) {
            *reaches = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &p in &reverse[s] {
            if !can_reach[p] && !m.is_target(p) {
                can_reach[p] = true;
                queue.push_back(p);
            }
        }
    }

    // Unknowns: non-target states that can reach the target.
    let unknowns: Vec<usize> = (0..n)
        .filter(|&s| can_reach[s] && !m.is_target(s))
        .collect();
    let pos: HashMap<usize, usize> = unknowns.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = unknowns.len();

    // (I - A) x = b, where A restricts the chain to the unknowns and
    // b accumulates one-step mass into targets.
    let mut a = vec![vec![0.0f64; k + 1]; k];
    for (i, &s) in unknowns.iter().enumerate() {
        a[i][i] = 1.0;
        for &(t, p) in m.row(s) {
            if m.is_target(t) {
                a[i][k] += p;
            } else if let Some(&j) = pos.get(&t) {
                a[i][j] -= p;
            }
        }
    }

    // Gaussian elimination with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        let pivot_value = a[col][col];
        if pivot_value.abs() < 1e-300 {
            return Err(StochasticError::NonConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        for row in 0..k {
            if row == col {
                continue;
            }
            let factor = a[row][col] / pivot_value;
            if factor != 0.0 {
                for c in col..=k {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }

    let value_of = |s: usize| -> f64 {
        if m.is_target(s) {
            1.0
        } else if let Some(&i) = pos.get(&s) {
            a[i][k] / a[i][i]
        } else {
            0.0
        }
    };

    Ok(m.initial_distribution()
        .iter()
        .map(|&(s, p)| p * value_of(s))
        .sum())
}

/// Result of a Monte Carlo estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub exposures: u64,
    pub runs: u64,
    pub horizon: u32,
    pub seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Small deterministic generator; identical seeds give identical streams on
/// every platform.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One simulated episode: does exposure occur within `horizon` ticks?
/// Simulates the scenario semantics directly, independent of the chain
/// construction, so the two routes cross-validate each other. The starting
/// phase is drawn uniformly over the duty cycle, as in [`build_dtmc`].
fn simulate_episode(sc: &Scenario, horizon: u32, rng: &mut SplitMix64) -> bool {
    let cycle = sc.treatment_ticks + sc.transition_ticks;
    let mut phase = (rng.next_u64() % cycle as u64) as u32;
    let mut human: Option<Classification> = None;
    let mut detected: Option<u32> = None;

    for _ in 0..horizon {
        if human.is_none() && rng.next_f64() < sc.p_intrusion {
            human = Some(if rng.next_f64() < sc.p_trained {
                Classification::Trained
            } else {
                Classification::Untrained
            });
        }
        if human.is_some() && detected.is_none() && rng.next_f64() < sc.p_detect {
            detected = Some(sc.mitigation_latency);
        }
        let applied = match detected {
            Some(0) => true,
            Some(left) => {
                detected = Some(left - 1);
                false
            }
            None => false,
        };
        phase = (phase + 1) % cycle;
        if applied {
            return false; // mitigated: absorbing safe end
        }
        if human.is_some() && phase >= sc.treatment_ticks {
            return true; // exposure
        }
    }
    false
}

/// Monte Carlo estimate of the probability of exposure within `horizon`
/// ticks, with binomial standard error. Deterministic for a fixed seed and
/// independent of the parallelism degree, because each run derives its own
/// generator from `(seed, run index)`.
pub fn monte_carlo(
    sc: &Scenario,
    runs: u64,
    horizon: u32,
    seed: u64,
) -> Result<McEstimate, StochasticError> {
    monte_carlo_jobs(sc, runs, horizon, seed, 1)
}

/// [`monte_carlo`] with an explicit worker count.
pub fn monte_carlo_jobs(
    sc: &Scenario,
    runs: u64,
    horizon: u32,
    seed: u64,
    jobs: usize,
) -> Result<McEstimate, StochasticError> {
    sc.validate()?;
    if runs == 0 {
        return Err(StochasticError::NoRuns);
    }
    let jobs = jobs.max(1).min(runs as usize);

    let count_range = |range: std::ops::Range<u64>| -> u64 {
        let mut exposures = 0u64;
        for run in range {
            let mut rng = SplitMix64(seed ^ run.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1));
            if simulate_episode(sc, horizon, &mut rng) {
                exposures += 1;
            }
        }
        exposures
    };

    let exposures = if jobs == 1 {
        count_range(0..runs)
    } else {
        let chunk = runs.div_ceil(jobs as u64);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for j in 0..jobs as u64 {
                let lo = j * chunk;
                let hi = ((j + 1) * chunk).min(runs);
                if lo >= hi {
                    break;
                }
                let count_range = &count_range;
                handles.push(scope.spawn(move || count_range(lo..hi)));
            }
            handles.into_iter().map(|h| h.join().unwrap()).sum()
        })
    };

    let estimate = exposures as f64 / runs as f64;
    let stderr = (estimate * (1.0 - estimate) / runs as f64).sqrt();
    Ok(McEstimate {
        estimate,
        stderr,
        exposures,
        runs,
        horizon,
        seed,
    })
}

/// Safety integrity level bands over the probability of failure on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SilLevel {
    BelowSil1,
    Sil1,
    Sil2,
    Sil3,
    Sil4,
}

impl SilLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SilLevel::BelowSil1 => "below SIL1",
            SilLevel::Sil1 => "SIL1",
            SilLevel::Sil2 => "SIL2",
            SilLevel::Sil3 => "SIL3",
            SilLevel::Sil4 => "SIL4",
        }
    }

    /// Numeric rank: higher is safer.
    pub fn rank(&self) -> u8 {
        match self {
            SilLevel::BelowSil1 => 0,
            SilLevel::Sil1 => 1,
            SilLevel::Sil2 => 2,
            SilLevel::Sil3 => 3,
            SilLevel::Sil4 => 4,
        }
    }
}

impl std::fmt::Display for SilLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Map a probability of failure on demand to its integrity band, using the
/// low-demand decade bands: SIL1 covers [1e-2, 1e-1), each further level a
/// ten-fold reduction, and anything below 1e-5 is reported as SIL4.
pub fn pfd_to_sil(pfd: f64) -> Result<SilLevel, StochasticError> {
    if !(0.0..=1.0).contains(&pfd) || pfd.is_nan() {
        return Err(StochasticError::ProbabilityOutOfRange(pfd));
    }
    Ok(if pfd >= 1e-1 {
        SilLevel::BelowSil1
    } else if pfd >= 1e-2 {
        SilLevel::Sil1
    } else if pfd >= 1e-3 {
        SilLevel::Sil2
    } else if pfd >= 1e-4 {
        SilLevel::Sil3
    } else {
        SilLevel::Sil4
    })
}

/// True iff a measured sensor accuracy meets the required threshold.
pub fn sensor_threshold_check(accuracy: f64, threshold: f64) -> bool {
    accuracy >= threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(rows: Vec<Vec<(usize, f64)>>, targets: &[usize]) -> Dtmc {
        let n = rows.len();
        let labels: Vec<BTreeSet<String>> = (0..n)
            .map(|s| {
                if targets.contains(&s) {
                    BTreeSet::from([EXPOSURE_LABEL.to_string()])
                } else {
                    BTreeSet::new()
                }
            })
            .collect();
        Dtmc::new(
            rows,
            vec![(0, 1.0)],
            labels,
            BTreeSet::from([EXPOSURE_LABEL.to_string()]),
        )
        .unwrap()
    }

    #[test]
    fn no_intrusion_means_no_exposure_states() {
        let sc = Scenario {
            p_intrusion: 0.0,
            ..Scenario::example()
        };
        let m = build_dtmc(&sc).unwrap();
        for s in 0..m.state_count() {
            assert!(!m.is_target(s), "exposure state reachable with no humans");
        }
        assert_eq!(prob_reach(&m).unwrap().probability, 0.0);
    }

    #[test]
    fn perfect_instant_mitigation_is_risk_free() {
        let sc = Scenario {
            p_detect: 1.0,
            mitigation_latency: 0,
            ..Scenario::example()
        };
        let m = build_dtmc(&sc).unwrap();
        assert_eq!(prob_reach(&m).unwrap().probability, 0.0);
        assert_eq!(prob_bounded_reach(&m, 500), 0.0);
    }

    #[test]
    fn row_sums_are_stochastic() {
        for sc in [
            Scenario::example(),
            Scenario {
                p_intrusion: 0.5,
                p_detect: 0.25,
                p_trained: 0.75,
                transition_ticks: 2,
                treatment_ticks: 1,
                mitigation_latency: 3,
            },
        ] {
            let m = build_dtmc(&sc).unwrap();
            for (row, sum) in m.row_sums().into_iter().enumerate() {
                assert!(
                    (sum - 1.0).abs() <= ROW_SUM_TOLERANCE,
                    "row {row} sums to {sum}"
                );
            }
        }
    }

    #[test]
    fn bounded_reach_zero_steps() {
        let m = chain(vec![vec![(1, 1.0)], vec![(1, 1.0)]], &[1]);
        assert_eq!(prob_bounded_reach(&m, 0), 0.0);
    }

    #[test]
    fn two_state_coin_flip() {
        let m = chain(vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]], &[1]);
        assert!((prob_bounded_reach(&m, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_state_hand_computation() {
        // start -0.3-> mid -0.4-> target; within two steps the only route is
        // 0.3 * 0.4.
        let m = chain(
            vec![
                vec![(0, 0.7), (1, 0.3)],
                vec![(1, 0.6), (2, 0.4)],
                vec![(2, 1.0)],
            ],
            &[2],
        );
        assert!((prob_bounded_reach(&m, 2) - 0.12).abs() < 1e-9);
        // One more step adds 0.7*0.3*0.4 + 0.3*0.6*0.4.
        let k3 = 0.12 + 0.7 * 0.3 * 0.4 + 0.3 * 0.6 * 0.4;
        assert!((prob_bounded_reach(&m, 3) - k3).abs() < 1e-9);
    }

    #[test]
    fn unreachable_target_gives_zero() {
        let m = chain(vec![vec![(0, 1.0)], vec![(1, 1.0)]], &[1]);
        // state 1 is the target but the chain starts in 0 and loops there;
        // the chain is built with state 1 present but unreachable.
        assert_eq!(prob_reach(&m).unwrap().probability, 0.0);
        assert_eq!(prob_reach_direct(&m).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_two_branch_gadget() {
        let m = chain(
            vec![vec![(1, 0.5), (2, 0.5)], vec![(1, 1.0)], vec![(2, 1.0)]],
            &[1],
        );
        let r = prob_reach(&m).unwrap();
        assert!((r.probability - 0.5).abs() < 1e-9);
        assert!((prob_reach_direct(&m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn geometric_retry_gadget_matches_closed_form() {
        // Per cycle: exposure with q, exit with (1-q)*p_exit, restart
        // otherwise. Closed form: q / (q + (1-q) * p_exit).
        let q: f64 = 0.05;
        let p_exit: f64 = 0.2;
        let m = chain(
            vec![
                vec![
                    (1, q),
                    (2, (1.0 - q) * p_exit),
                    (0, (1.0 - q) * (1.0 - p_exit)),
                ],
                vec![(1, 1.0)],
                vec![(2, 1.0)],
            ],
            &[1],
        );
        let expected = q / (q + (1.0 - q) * p_exit);
        let vi = prob_reach(&m).unwrap();
        assert!(
            (vi.probability - expected).abs() < 1e-9,
            "value iteration {} vs closed form {expected}",
            vi.probability
        );
        let direct = prob_reach_direct(&m).unwrap();
        assert!((direct - expected).abs() < 1e-12);
    }

    #[test]
    fn value_iteration_and_direct_solve_agree_on_example() {
        let m = build_dtmc(&Scenario::example()).unwrap();
        let vi = prob_reach(&m).unwrap().probability;
        let direct = prob_reach_direct(&m).unwrap();
        assert!((vi - direct).abs() < 1e-8, "vi {vi} vs direct {direct}");
    }

    #[test]
    fn bounded_reach_is_monotone_and_converges() {
        let m = build_dtmc(&Scenario::example()).unwrap();
        let unbounded = prob_reach(&m).unwrap().probability;
        let mut prev = 0.0;
        for k in 1..=200 {
            let p = prob_bounded_reach(&m, k);
            assert!(p + 1e-15 >= prev, "not monotone at k={k}");
            assert!(p <= unbounded + 1e-6, "bounded exceeds unbounded at k={k}");
            prev = p;
        }
        let far = prob_bounded_reach(&m, 2000);
        assert!(
            (unbounded - far).abs() < 1e-6,
            "bounded(2000) = {far} still far from unbounded = {unbounded}"
        );
        assert!(unbounded - prev < unbounded - prob_bounded_reach(&m, 50));
    }

    #[test]
    fn detection_improvements_never_hurt() {
        let base = Scenario::example();
        let mut prev = f64::INFINITY;
        for p_detect in [0.2, 0.5, 0.8, 0.94, 1.0] {
            let sc = Scenario {
                p_detect,
                ..base.clone()
            };
            let p = prob_reach(&build_dtmc(&sc).unwrap()).unwrap().probability;
            assert!(p <= prev + 1e-12, "exposure rose when detection improved");
            prev = p;
        }
    }

    #[test]
    fn intrusion_pressure_never_helps() {
        let base = Scenario::example();
        let mut prev = -1.0;
        for p_intrusion in [0.0, 0.01, 0.05, 0.2, 0.8] {
            let sc = Scenario {
                p_intrusion,
                ..base.clone()
            };
            let p = prob_reach(&build_dtmc(&sc).unwrap()).unwrap().probability;
            assert!(p + 1e-12 >= prev, "exposure fell when intrusion rose");
            prev = p;
        }
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let sc = Scenario::example();
        let a = monte_carlo(&sc, 10_000, 50, 42).unwrap();
        let b = monte_carlo(&sc, 10_000, 50, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&sc, 10_000, 50, 43).unwrap();
        assert_ne!(a.exposures, c.exposures);
    }

    #[test]
    fn monte_carlo_is_thread_count_invariant() {
        let sc = Scenario::example();
        let one = monte_carlo_jobs(&sc, 20_000, 50, 7, 1).unwrap();
        let four = monte_carlo_jobs(&sc, 20_000, 50, 7, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn monte_carlo_zero_risk_scenario() {
        let sc = Scenario {
            p_intrusion: 0.0,
            ..Scenario::example()
        };
        let est = monte_carlo(&sc, 1000, 100, 1).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn monte_carlo_rejects_zero_runs() {
        assert!(matches!(
            monte_carlo(&Scenario::example(), 0, 10, 1),
            Err(StochasticError::NoRuns)
        ));
    }

    #[test]
    fn monte_carlo_matches_exact_bounded_value() {
        let sc = Scenario::example();
        let m = build_dtmc(&sc).unwrap();
        let horizon = 50;
        let exact = prob_bounded_reach(&m, horizon);
        let est = monte_carlo(&sc, 100_000, horizon, 4242).unwrap();
        assert!(
            (est.estimate - exact).abs() <= 3.0 * est.stderr,
            "estimate {} vs exact {exact} (3 sigma = {})",
            est.estimate,
            3.0 * est.stderr
        );
    }

    #[test]
    fn sil_bands() {
        assert_eq!(pfd_to_sil(0.5).unwrap(), SilLevel::BelowSil1);
        assert_eq!(pfd_to_sil(0.05).unwrap(), SilLevel::Sil1);
        assert_eq!(pfd_to_sil(3e-3).unwrap(), SilLevel::Sil2);
        assert_eq!(pfd_to_sil(5e-4).unwrap(), SilLevel::Sil3);
        assert_eq!(pfd_to_sil(5e-5).unwrap(), SilLevel::Sil4);
        assert_eq!(pfd_to_sil(0.0).unwrap(), SilLevel::Sil4);
        assert!(pfd_to_sil(1.5).is_err());
        assert!(pfd_to_sil(-0.1).is_err());
        assert!(pfd_to_sil(f64::NAN).is_err());
    }

    #[test]
    fn sil_is_monotone_in_pfd() {
        let samples = [
            0.0, 1e-6, 5e-6, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 0.5, 1.0,
        ];
        for pair in samples.windows(2) {
            let low = pfd_to_sil(pair[0]).unwrap();
            let high = pfd_to_sil(pair[1]).unwrap();
            assert!(
                low.rank() >= high.rank(),
                "pfd {} ranked below pfd {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn sensor_threshold() {
        assert!(sensor_threshold_check(0.94, 0.70));
        assert!(sensor_threshold_check(0.70, 0.70));
        assert!(!sensor_threshold_check(0.69, 0.70));
    }

    #[test]
    fn dtmc_validation_rejects_bad_rows() {
        let rows = vec![vec![(0, 0.5)]];
        let labels = vec![BTreeSet::new()];
        assert!(matches!(
            Dtmc::new(rows, vec![(0, 1.0)], labels.clone(), BTreeSet::new()),
            Err(StochasticError::RowSumBroken { .. })
        ));
        let rows = vec![vec![(0, 1.5), (0, -0.5)]];
        assert!(matches!(
            Dtmc::new(rows, vec![(0, 1.0)], labels, BTreeSet::new()),
            Err(StochasticError::NegativeEntry { .. })
        ));
    }
}
