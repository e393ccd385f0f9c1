//! Optimization drivers.
//!
//! [`run_async`] runs the steady-state scheme on a pool of worker threads.
//! Each worker samples and evaluates outside the lock, then enters a single
//! exclusive region to fold its result into the shared state, check the
//! termination criteria and take a fresh snapshot. [`run_generational`]
//! runs the `(μ/μ_w, λ)` baseline with a barrier per generation.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpu::{CpuMonitor, CpuSample};
use crate::error::{Error, Result};
use crate::harness::time_to_thresholds;
use crate::objectives::{Objective, ObjectiveSpec};
use crate::seed::mix;
use crate::strategy::{
    finish_generation, sample_candidate, sample_generation, steady_state_accept, AlgorithmParams,
    Snapshot, StrategyState,
};

pub const DEFAULT_EVAL_BUDGET: u64 = 1_000_000;
pub const DEFAULT_FITNESS_TOL: f64 = 1e-10;
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-20;

/// Generations whose sequential evaluation takes less than this are not
/// dispatched to the worker pool.
pub const INLINE_GENERATION_LIMIT: Duration = Duration::from_micros(200);

const INIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Async,
    Generational,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Async => "async",
            Mode::Generational => "generational",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "async" | "proposed" => Ok(Mode::Async),
            "generational" | "gen" | "lm-cma" => Ok(Mode::Generational),
            other => Err(Error::contract(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalReason {
    Optimum,
    Budget,
    Stagnation,
}

impl TerminalReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminalReason::Optimum => "optimum",
            TerminalReason::Budget => "budget",
            TerminalReason::Stagnation => "stagnation",
        }
    }
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TerminalReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimum" => Ok(TerminalReason::Optimum),
            "budget" => Ok(TerminalReason::Budget),
            "stagnation" => Ok(TerminalReason::Stagnation),
            other => Err(Error::contract(format!(
                "unknown terminal reason '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub objective: ObjectiveSpec,
    pub params: AlgorithmParams,
    pub workers: usize,
    pub mode: Mode,
    pub seed: u64,
    pub eval_budget: u64,
    pub fitness_tol: f64,
    pub sigma_floor: f64,
    /// Strictly descending fitness levels whose first-crossing times are reported.
    pub thresholds: Vec<f64>,
    /// CPU-load sampling period; `None` disables the monitor.
    pub cpu_sample_period: Option<Duration>,
}

impl RunConfig {
    /// Defaults for `objective`: standard parameters, one worker, async mode.
    pub fn new(objective: ObjectiveSpec) -> Result<Self> {
        Ok(Self {
            params: crate::strategy::default_params(objective.n)?,
            objective,
            workers: 1,
            mode: Mode::Async,
            seed: 0,
            eval_budget: DEFAULT_EVAL_BUDGET,
            fitness_tol: DEFAULT_FITNESS_TOL,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            thresholds: Vec::new(),
            cpu_sample_period: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        self.params.validate()?;
        if self.params.n != self.objective.n {
            return Err(Error::DimensionMismatch {
                expected: self.objective.n,
                got: self.params.n,
            });
        }
        if self.workers == 0 {
            return Err(Error::contract("at least one worker is required"));
        }
        if self.thresholds.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::contract("thresholds must be strictly descending"));
        }
        Ok(())
    }
}

/// A point of the best-so-far curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time_s: f64,
    pub evals: u64,
    pub best_fitness: f64,
}

/// Instrumentation of the exclusive update region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegionStats {
    pub entries: u64,
    pub max_occupancy: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub terminal_reason: TerminalReason,
    pub evals_used: u64,
    pub wall_time: f64,
    pub best_fitness: f64,
    pub best_x: Option<Vec<f64>>,
    pub final_sigma: f64,
    /// One point per improvement of the best fitness.
    pub trace: Vec<TracePoint>,
    pub threshold_times: Vec<Option<f64>>,
    pub cpu_samples: Vec<CpuSample>,
    /// False when CPU sampling was requested but the platform counter is missing.
    pub cpu_available: bool,
    pub region: RegionStats,
}

/// Observer payload, delivered inside the update region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub evals: u64,
    pub best_fitness: f64,
    pub sigma: f64,
    pub wall_time: f64,
}

/// Called while the update lock is held, so it must return quickly.
pub type Observer<'a> = &'a (dyn Fn(&Progress) + Sync);

/// Termination test, in priority order Optimum, Budget, Stagnation. The σ
/// criterion only applies to the asynchronous mode.
pub fn check_termination(state: &StrategyState, config: &RunConfig) -> Option<TerminalReason> {
    if state.best_fitness <= config.fitness_tol {
        Some(TerminalReason::Optimum)
    } else if state.evals >= config.eval_budget {
        Some(TerminalReason::Budget)
    } else if config.mode == Mode::Async && state.sigma < config.sigma_floor {
        Some(TerminalReason::Stagnation)
    } else {
        None
    }
}

pub fn snapshot(state: &StrategyState) -> Snapshot {
    state.snapshot()
}

fn initial_state(config: &RunConfig) -> Result<StrategyState> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, INIT_STREAM));
    StrategyState::with_random_mean(&config.params, &mut rng)
}

/// Random stream of async worker `index`.
pub fn worker_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, index as u64 + 1))
}

fn finish(
    config: &RunConfig,
    reason: TerminalReason,
    state: &StrategyState,
    trace: Vec<TracePoint>,
    start: Instant,
    monitor: Option<Option<CpuMonitor>>,
    region: RegionStats,
) -> RunResult {
    let wall_time = start.elapsed().as_secs_f64();
    let (cpu_samples, cpu_available) = match monitor {
        None => (Vec::new(), true),
        Some(None) => (Vec::new(), false),
        Some(Some(m)) => (m.stop(), true),
    };
    RunResult {
        terminal_reason: reason,
        evals_used: state.evals,
        wall_time,
        best_fitness: state.best_fitness,
        best_x: state.best_x.clone(),
        final_sigma: state.sigma,
        threshold_times: time_to_thresholds(&trace, &config.thresholds)
            .expect("trace is recorded in time order"),
        trace,
        cpu_samples,
        cpu_available,
        region,
    }
}

/// Instantiates the configured objective and dispatches on `config.mode`.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    let objective = config.objective.instantiate()?;
    match config.mode {
        Mode::Async => run_async_with(&objective, config, None),
        Mode::Generational => run_generational_with(&objective, config, None),
    }
}

pub fn run_async(config: &RunConfig) -> Result<RunResult> {
    if config.mode != Mode::Async {
        return Err(Error::contract("run_async requires async mode"));
    }
    run(config)
}

pub fn run_generational(config: &RunConfig) -> Result<RunResult> {
    if config.mode != Mode::Generational {
        return Err(Error::contract(
            "run_generational requires generational mode",
        ));
    }
    run(config)
}

struct Shared {
    state: StrategyState,
    trace: Vec<TracePoint>,
    reason: Option<TerminalReason>,
    error: Option<Error>,
}

struct Region {
    occupancy: AtomicUsize,
    max_occupancy: AtomicUsize,
    entries: AtomicU64,
}

impl Region {
    fn enter(&self) {
        let now = self.occupancy.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_occupancy.fetch_max(now, Ordering::SeqCst);
        self.entries.fetch_add(1, Ordering::Relaxed);
    }

    fn leave(&self) {
        self.occupancy.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Steady-state run against an arbitrary objective.
pub fn run_async_with<O: Objective + ?Sized>(
    objective: &O,
    config: &RunConfig,
    observer: Option<Observer<'_>>,
) -> Result<RunResult> {
    config.validate()?;
    let params = &config.params;
    let start = Instant::now();
    let monitor = config
        .cpu_sample_period
        .map(|p| CpuMonitor::start(start, p));
    let state = initial_state(config)?;

    let region = Region {
        occupancy: AtomicUsize::new(0),
        max_occupancy: AtomicUsize::new(0),
        entries: AtomicU64::new(0),
    };
    let stats = |r: &Region| RegionStats {
        entries: r.entries.load(Ordering::SeqCst),
        max_occupancy: r.max_occupancy.load(Ordering::SeqCst),
    };

    if state.evals >= config.eval_budget {
        return Ok(finish(
            config,
            TerminalReason::Budget,
            &state,
            Vec::new(),
            start,
            monitor,
            stats(&region),
        ));
    }

    let shared = Mutex::new(Shared {
        state,
        trace: Vec::new(),
        reason: None,
        error: None,
    });
    let stop = AtomicBool::new(false);

    let worker = |index: usize| {
        let mut rng = worker_rng(config.seed, index);
        let mut snap = {
            let guard = shared.lock().expect("update lock poisoned");
            guard.state.snapshot()
        };
        while !stop.load(Ordering::Acquire) {
            let mut candidate = sample_candidate(&snap, &mut rng);
            let evaluated = objective.evaluate(&candidate.x);

            let mut guard = shared.lock().expect("update lock poisoned");
            region.enter();
            if stop.load(Ordering::Acquire) {
                region.leave();
                break;
            }
            let sh = &mut *guard;
            let outcome = evaluated.and_then(|f| {
                candidate.fitness = f;
                steady_state_accept(&mut sh.state, params, candidate)
            });
            if let Err(e) = outcome {
                sh.error.get_or_insert(e);
                stop.store(true, Ordering::Release);
                region.leave();
                break;
            }
            let elapsed = start.elapsed().as_secs_f64();
            let best = sh.state.best_fitness;
            if sh.trace.last().is_none_or(|p| best < p.best_fitness) {
                sh.trace.push(TracePoint {
                    time_s: elapsed,
                    evals: sh.state.evals,
                    best_fitness: best,
                });
            }
            if let Some(obs) = observer {
                obs(&Progress {
                    evals: sh.state.evals,
                    best_fitness: best,
                    sigma: sh.state.sigma,
                    wall_time: elapsed,
                });
            }
            if let Some(reason) = check_termination(&sh.state, config) {
                sh.reason = Some(reason);
                stop.store(true, Ordering::Release);
            } else {
                snap = sh.state.snapshot();
            }
            region.leave();
        }
    };

    thread::scope(|scope| {
        for index in 1..config.workers {
            let worker = &worker;
            thread::Builder::new()
                .name(format!("lmcma-worker-{index}"))
                .spawn_scoped(scope, move || worker(index))
                .expect("spawn worker thread");
        }
        worker(0);
    });

    let shared = shared.into_inner().expect("update lock poisoned");
    if let Some(e) = shared.error {
        return Err(e);
    }
    let reason = shared
        .reason
        .expect("workers stop only on termination or error");
    Ok(finish(
        config,
        reason,
        &shared.state,
        shared.trace,
        start,
        monitor,
        stats(&region),
    ))
}

/// Generational run against an arbitrary objective. Candidates of one
/// generation are evaluated on `config.workers` threads; sampling and the
/// update are sequential, so the fitness trace does not depend on the
/// worker count.
pub fn run_generational_with<O: Objective + ?Sized>(
    objective: &O,
    config: &RunConfig,
    observer: Option<Observer<'_>>,
) -> Result<RunResult> {
    config.validate()?;
    let params = &config.params;
    let start = Instant::now();
    let monitor = config
        .cpu_sample_period
        .map(|p| CpuMonitor::start(start, p));
    let mut state = initial_state(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, 0));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .thread_name(|i| format!("lmcma-gen-{i}"))
        .build()
        .map_err(|e| Error::contract(e.to_string()))?;
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut generations = 0u64;
    let mut parallel = false;

    let reason = loop {
        if let Some(r) = check_termination(&state, config) {
            break r;
        }
        let mut generation = sample_generation(&state, params, &mut rng);
        if parallel {
            pool.install(|| {
                generation.par_iter_mut().try_for_each(|c| {
                    c.fitness = objective.evaluate(&c.x)?;
                    Ok::<(), Error>(())
                })
            })?;
        } else {
            let t = Instant::now();
            for c in &mut generation {
                c.fitness = objective.evaluate(&c.x)?;
            }
            // a generation cheaper than a pool round trip stays on this thread
            parallel = config.workers > 1 && t.elapsed() >= INLINE_GENERATION_LIMIT;
        }
        finish_generation(&mut state, params, generation)?;
        generations += 1;

        let elapsed = start.elapsed().as_secs_f64();
        let best = state.best_fitness;
        if trace.last().is_none_or(|p| best < p.best_fitness) {
            trace.push(TracePoint {
                time_s: elapsed,
                evals: state.evals,
                best_fitness: best,
            });
        }
        if let Some(obs) = observer {
            obs(&Progress {
                evals: state.evals,
                best_fitness: best,
                sigma: state.sigma,
                wall_time: elapsed,
            });
        }
    };
    let region = RegionStats {
        entries: generations,
        max_occupancy: usize::from(generations > 0),
    };
    Ok(finish(
        config, reason, &state, trace, start, monitor, region,
    ))
}
