//! Evolution-strategy state and update rules.
//!
//! Two update schemes share one state type:
//!
//! * the steady-state `(m+1)` scheme, which folds a single evaluated
//!   candidate into a bounded best-solution collection and adapts σ with a
//!   smooth 1/5-th success rule ([`steady_state_accept`]);
//! * the generational `(μ/μ_w, λ)` baseline ([`generational_step`]).
//!
//! Both sample `x = mean + σ·A·z` with the implicit factor from
//! [`crate::cholesky`].

use std::sync::Arc;

use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::cholesky::PairArchive;
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// All strategy constants. Build with [`default_params`] and override fields as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmParams {
    pub n: usize,
    pub m_pairs: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_w: f64,
    pub c1: f64,
    pub c_c: f64,
    pub n_steps: u64,
    pub sigma0: f64,
    pub p_target: f64,
    pub d_sigma: f64,
    pub ss_pool: usize,
    /// Box the initial mean is drawn from, per coordinate.
    pub init_range: (f64, f64),
}

/// Target of the generational population success rule.
pub const PSR_TARGET: f64 = 0.3;
/// Smoothing rate of the population success statistic.
pub const PSR_SMOOTHING: f64 = 0.3;
/// σ damping of the population success rule.
pub const PSR_DAMPING: f64 = 1.0;

/// Lower bound for σ in generational mode, which has no stagnation stop.
/// Keeps `σ·A·z` out of the subnormal range, where arithmetic is very slow.
pub const GENERATIONAL_SIGMA_MIN: f64 = 1.4916681462400413e-154;

/// Log-decreasing recombination weights for `mu` parents, normalized to sum 1.
pub fn recombination_weights(mu: usize) -> Vec<f64> {
    let top = ((mu + 1) as f64).ln();
    let raw: Vec<f64> = (1..=mu).map(|i| top - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

pub fn default_params(n: usize) -> Result<AlgorithmParams> {
    if n < 2 {
        return Err(Error::contract(format!("dimension {n} < 2")));
    }
    let nf = n as f64;
    let lambda = 4 + (3.0 * nf.ln()).floor() as usize;
    let mu = lambda / 2;
    let weights = recombination_weights(mu);
    let mu_w = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let m_pairs = lambda;
    Ok(AlgorithmParams {
        n,
        m_pairs,
        lambda,
        mu,
        weights,
        mu_w,
        c1: 1.0 / (10.0 * (nf + 1.0).ln()),
        c_c: 1.0 / m_pairs as f64,
        n_steps: n as u64,
        sigma0: 0.3,
        p_target: 0.2,
        d_sigma: 1.0 + nf / 20.0,
        ss_pool: m_pairs,
        init_range: (-5.0, 5.0),
    })
}

impl AlgorithmParams {
    /// Replaces `mu` and recomputes the weights and `mu_w`.
    pub fn with_mu(mut self, mu: usize) -> Self {
        self.mu = mu;
        self.weights = recombination_weights(mu);
        self.mu_w = 1.0 / self.weights.iter().map(|w| w * w).sum::<f64>();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Contract(m));
        if self.n < 2 {
            return fail(format!("n = {} < 2", self.n));
        }
        if self.lambda == 0 || self.mu == 0 || self.mu > self.lambda {
            return fail(format!(
                "need 1 <= mu ({}) <= lambda ({})",
                self.mu, self.lambda
            ));
        }
        if self.weights.len() != self.mu || self.weights.iter().any(|w| !(*w > 0.0)) {
            return fail("weights must be mu positive values".into());
        }
        if self.weights.windows(2).any(|w| w[1] > w[0]) {
            return fail("weights must be non-increasing".into());
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return fail(format!("weights sum to {sum}"));
        }
        let mu_w = 1.0 / self.weights.iter().map(|w| w * w).sum::<f64>();
        if (mu_w - self.mu_w).abs() > 1e-12 * mu_w {
            return fail(format!(
                "mu_w {} inconsistent with weights ({mu_w})",
                self.mu_w
            ));
        }
        if !(self.c1 > 0.0 && self.c1 < 1.0) {
            return fail(format!("c1 = {} outside (0, 1)", self.c1));
        }
        if !(self.c_c > 0.0 && self.c_c <= 1.0) {
            return fail(format!("c_c = {} outside (0, 1]", self.c_c));
        }
        if !(self.sigma0 > 0.0) || !(self.d_sigma > 0.0) {
            return fail("sigma0 and d_sigma must be positive".into());
        }
        if self.m_pairs == 0 || self.ss_pool == 0 {
            return fail("m_pairs and ss_pool must be positive".into());
        }
        if !(self.init_range.0 <= self.init_range.1) {
            return fail("empty initialization range".into());
        }
        Ok(())
    }
}

/// A solution with its fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub x: Vec<f64>,
    pub fitness: f64,
}

/// Live optimizer state. Mutated only by the update rules in this module.
#[derive(Debug, Clone)]
pub struct StrategyState {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub p_c: Vec<f64>,
    /// Best solutions seen, ascending by fitness (steady-state scheme only).
    pub best_set: Vec<Scored>,
    pub archive: Arc<PairArchive>,
    pub evals: u64,
    pub best_fitness: f64,
    pub best_x: Option<Vec<f64>>,
    /// Stamp of the most recent pair save.
    pub last_save: u64,
    /// Incremented on every update; identifies snapshots.
    pub version: u64,
    /// Sorted fitness of the previous generation (generational scheme only).
    pub prev_fitness: Option<Vec<f64>>,
    /// Smoothed population success statistic (generational scheme only).
    pub psr: f64,
}

/// Immutable view handed to samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub archive: Arc<PairArchive>,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    /// `NaN` until evaluated.
    pub fitness: f64,
    pub snapshot_version: u64,
}

impl StrategyState {
    pub fn new(params: &AlgorithmParams, mean: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if mean.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                got: mean.len(),
            });
        }
        Ok(Self {
            mean,
            sigma: params.sigma0,
            p_c: vec![0.0; params.n],
            best_set: Vec::with_capacity(params.ss_pool + 1),
            archive: Arc::new(PairArchive::new(params.n, params.m_pairs, params.c1)?),
            evals: 0,
            best_fitness: f64::INFINITY,
            best_x: None,
            last_save: 0,
            version: 0,
            prev_fitness: None,
            psr: 0.0,
        })
    }

    /// State with the mean drawn uniformly from `params.init_range`.
    pub fn with_random_mean<R: Rng + ?Sized>(
        params: &AlgorithmParams,
        rng: &mut R,
    ) -> Result<Self> {
        let (lo, hi) = params.init_range;
        let mean = if lo == hi {
            vec![lo; params.n]
        } else {
            let dist = Uniform::new(lo, hi).map_err(|e| Error::contract(e.to_string()))?;
            (0..params.n).map(|_| rng.sample(dist)).collect()
        };
        Self::new(params, mean)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            mean: self.mean.clone(),
            sigma: self.sigma,
            archive: Arc::clone(&self.archive),
            version: self.version,
        }
    }

    fn record(&mut self, x: &[f64], fitness: f64) {
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_x = Some(x.to_vec());
        }
    }

    fn save_pair(&mut self, n_steps: u64) -> Result<()> {
        let evals = self.evals;
        Arc::make_mut(&mut self.archive).insert_pair(&self.p_c, evals, n_steps)?;
        self.last_save = evals;
        Ok(())
    }
}

/// `x = mean + σ·A·z` for the given standard-normal draw.
pub fn candidate_from(snapshot: &Snapshot, z: Vec<f64>) -> Result<Candidate> {
    let mut x = snapshot.archive.az(&z)?;
    for (xi, mi) in x.iter_mut().zip(&snapshot.mean) {
        *xi = mi + snapshot.sigma * *xi;
    }
    Ok(Candidate {
        z,
        x,
        fitness: f64::NAN,
        snapshot_version: snapshot.version,
    })
}

pub fn sample_candidate<R: Rng + ?Sized>(snapshot: &Snapshot, rng: &mut R) -> Candidate {
    let z: Vec<f64> = (0..snapshot.mean.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    candidate_from(snapshot, z).expect("snapshot archive dimension matches its mean")
}

/// Weighted mean of the first `min(mu, len)` entries, weights renormalized
/// over the prefix actually used.
pub fn recombine_mean(best: &[Scored], weights: &[f64]) -> Result<Vec<f64>> {
    let k = best.len().min(weights.len());
    if k == 0 {
        return Err(Error::contract(
            "recombination needs at least one solution and weight",
        ));
    }
    let total: f64 = weights[..k].iter().sum();
    let mut mean = vec![0.0; best[0].x.len()];
    for (s, w) in best[..k].iter().zip(&weights[..k]) {
        let w = w / total;
        for (m, xi) in mean.iter_mut().zip(&s.x) {
            *m += w * xi;
        }
    }
    Ok(mean)
}

/// `p_c ← (1 − c_c)·p_c + sqrt(c_c·(2 − c_c)·μ_w)·(mean_new − mean_old)/σ`, in place.
pub fn update_evolution_path(
    p_c: &mut [f64],
    mean_new: &[f64],
    mean_old: &[f64],
    sigma: f64,
    c_c: f64,
    mu_w: f64,
) {
    let decay = 1.0 - c_c;
    let gain = (c_c * (2.0 - c_c) * mu_w).sqrt() / sigma;
    for ((p, new), old) in p_c.iter_mut().zip(mean_new).zip(mean_old) {
        *p = decay * *p + gain * (new - old);
        // a stalled mean lets the path decay into subnormals, which make
        // every later product with the saved pair very slow
        if p.abs() < f64::MIN_POSITIVE {
            *p = 0.0;
        }
    }
}

/// Smooth 1/5-th success rule.
pub fn sigma_one_fifth(sigma: f64, accepted: bool, p_target: f64, d_sigma: f64) -> f64 {
    let success = if accepted { 1.0 } else { 0.0 };
    sigma * ((success - p_target) / d_sigma).exp()
}

/// Folds one evaluated candidate into the state. Counts the evaluation,
/// updates the best collection, mean, path, pair archive and σ.
/// Returns whether the candidate entered the best collection.
pub fn steady_state_accept(
    state: &mut StrategyState,
    params: &AlgorithmParams,
    candidate: Candidate,
) -> Result<bool> {
    state.evals += 1;
    state.version += 1;
    let fitness = candidate.fitness;
    let accepted = fitness.is_finite()
        && (state.best_set.len() < params.ss_pool
            || state
                .best_set
                .last()
                .is_some_and(|worst| fitness < worst.fitness));

    if accepted {
        state.record(&candidate.x, fitness);
        if state.best_set.len() >= params.ss_pool {
            state.best_set.pop();
        }
        // after any equal-fitness members, so earlier arrivals keep rank
        let pos = state.best_set.partition_point(|s| s.fitness <= fitness);
        state.best_set.insert(
            pos,
            Scored {
                x: candidate.x,
                fitness,
            },
        );

        let mean_new = recombine_mean(&state.best_set, &params.weights)?;
        update_evolution_path(
            &mut state.p_c,
            &mean_new,
            &state.mean,
            state.sigma,
            params.c_c,
            params.mu_w,
        );
        state.mean = mean_new;
        if state.evals - state.last_save >= params.n_steps
            && state.p_c.iter().all(|p| p.is_finite())
        {
            state.save_pair(params.n_steps)?;
        }
    }
    state.sigma = sigma_one_fifth(state.sigma, accepted, params.p_target, params.d_sigma);
    Ok(accepted)
}

/// Population success statistic of two equally sized generations: rank all
/// values together (1 = best) and return `(Σ ranks(previous) − Σ ranks(current)) / λ²`.
/// It is 1 when the whole current generation beats the previous one, 0 when
/// the two interleave evenly, and −1 in the opposite extreme.
pub fn population_success(previous: &[f64], current: &[f64]) -> f64 {
    let mut mixed: Vec<(f64, bool)> = previous
        .iter()
        .map(|&f| (f, false))
        .chain(current.iter().map(|&f| (f, true)))
        .collect();
    mixed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0;
    let mut i = 0;
    while i < mixed.len() {
        // tied values share their mean rank
        let mut j = i + 1;
        while j < mixed.len() && mixed[j].0 == mixed[i].0 {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &(_, is_current) in &mixed[i..j] {
            diff += if is_current { -rank } else { rank };
        }
        i = j;
    }
    let lambda = current.len().max(previous.len()) as f64;
    diff / (lambda * lambda)
}

/// Draws one generation of `lambda` candidates from a single snapshot.
pub fn sample_generation<R: Rng + ?Sized>(
    state: &StrategyState,
    params: &AlgorithmParams,
    rng: &mut R,
) -> Vec<Candidate> {
    let snap = state.snapshot();
    (0..params.lambda)
        .map(|_| sample_candidate(&snap, rng))
        .collect()
}

/// Applies the generational update to a fully evaluated generation.
pub fn finish_generation(
    state: &mut StrategyState,
    params: &AlgorithmParams,
    mut generation: Vec<Candidate>,
) -> Result<()> {
    if generation.is_empty() {
        return Err(Error::contract("empty generation"));
    }
    state.evals += generation.len() as u64;
    state.version += 1;
    // non-finite fitness ranks last
    let key = |c: &Candidate| {
        if c.fitness.is_nan() {
            f64::INFINITY
        } else {
            c.fitness
        }
    };
    generation.sort_by(|a, b| key(a).total_cmp(&key(b)));
    for c in &generation {
        if c.fitness.is_finite() {
            state.record(&c.x, c.fitness);
        }
    }
    let fitnesses: Vec<f64> = generation.iter().map(key).collect();

    let parents: Vec<Scored> = generation
        .into_iter()
        .take(params.mu)
        .map(|c| Scored {
            x: c.x,
            fitness: c.fitness,
        })
        .collect();
    let mean_new = recombine_mean(&parents, &params.weights)?;
    update_evolution_path(
        &mut state.p_c,
        &mean_new,
        &state.mean,
        state.sigma,
        params.c_c,
        params.mu_w,
    );
    state.mean = mean_new;
    if state.p_c.iter().all(|p| p.is_finite()) {
        state.save_pair(params.n_steps)?;
    }

    if let Some(prev) = &state.prev_fitness {
        let z = population_success(prev, &fitnesses) - PSR_TARGET;
        state.psr = (1.0 - PSR_SMOOTHING) * state.psr + PSR_SMOOTHING * z;
        state.sigma = (state.sigma * (state.psr / PSR_DAMPING).exp()).max(GENERATIONAL_SIGMA_MIN);
    }
    state.prev_fitness = Some(fitnesses);
    Ok(())
}

/// One sequential `(μ/μ_w, λ)` generation.
pub fn generational_step<R: Rng + ?Sized, O: Objective + ?Sized>(
    state: &mut StrategyState,
    params: &AlgorithmParams,
    rng: &mut R,
    objective: &O,
) -> Result<()> {
    let mut generation = sample_generation(state, params, rng);
    for c in &mut generation {
        c.fitness = objective.evaluate(&c.x)?;
    }
    finish_generation(state, params, generation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scored(x: &[f64], f: f64) -> Scored {
        Scored {
            x: x.to_vec(),
            fitness: f,
        }
    }

    fn evaluated(x: &[f64], f: f64) -> Candidate {
        Candidate {
            z: vec![0.0; x.len()],
            x: x.to_vec(),
            fitness: f,
            snapshot_version: 0,
        }
    }

    #[test]
    fn default_sizes() {
        let p = default_params(100).unwrap();
        assert_eq!((p.lambda, p.mu), (17, 8));
        assert_eq!((p.m_pairs, p.ss_pool, p.n_steps), (17, 17, 100));
        assert!((p.d_sigma - 6.0).abs() < 1e-15);
        let p = default_params(2).unwrap();
        assert_eq!((p.lambda, p.mu), (6, 3));
        assert!(default_params(1).is_err());
        for n in [2, 5, 10, 100, 1000] {
            default_params(n).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn two_parent_weights() {
        let w = recombination_weights(2);
        // (ln 3, ln 3 − ln 2) / (2 ln 3 − ln 2)
        assert!((w[0] - 0.7304227103091852).abs() < 1e-12, "{w:?}");
        assert!((w[1] - 0.269577289690815).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_bad_params() {
        let base = default_params(10).unwrap();
        let mut p = base.clone();
        p.c1 = 1.0;
        assert!(p.validate().is_err());
        let mut p = base.clone();
        p.weights.reverse();
        assert!(p.validate().is_err());
        let mut p = base.clone();
        p.sigma0 = 0.0;
        assert!(p.validate().is_err());
        let mut p = base;
        p.mu_w += 0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn recombination_examples() {
        let s = scored(&[1.5, -2.0], 0.0);
        assert_eq!(
            recombine_mean(std::slice::from_ref(&s), &[0.6, 0.4]).unwrap(),
            s.x
        );
        assert_eq!(
            recombine_mean(&[s.clone(), s.clone()], &[0.6, 0.4]).unwrap(),
            s.x
        );
        let pair = [scored(&[0.0, 0.0], 0.0), scored(&[2.0, 0.0], 1.0)];
        assert_eq!(
            recombine_mean(&pair, &[0.75, 0.25]).unwrap(),
            vec![0.5, 0.0]
        );
        assert!(recombine_mean(&[], &[1.0]).is_err());
    }

    #[test]
    fn evolution_path_examples() {
        let mut p = vec![0.0, 0.0];
        update_evolution_path(&mut p, &[1.0, 1.0], &[1.0, 1.0], 1.0, 0.3, 2.0);
        assert_eq!(p, vec![0.0, 0.0]);

        let mut p = vec![5.0, -7.0];
        update_evolution_path(&mut p, &[1.0, 3.0], &[0.0, 1.0], 2.0, 1.0, 4.0);
        assert_eq!(p, vec![1.0, 2.0]);

        let mut p = vec![1.0, 0.0];
        update_evolution_path(&mut p, &[1.0, 1.0], &[0.0, 0.0], 2.0, 0.5, 4.0);
        assert!((p[0] - 1.3660254037844386).abs() < 1e-12);
        assert!((p[1] - 0.8660254037844386).abs() < 1e-12);
    }

    #[test]
    fn one_fifth_rule() {
        assert!((sigma_one_fifth(1.0, true, 0.2, 1.0) - 0.8f64.exp()).abs() < 1e-15);
        assert!((sigma_one_fifth(2.0, false, 0.2, 1.0) - 2.0 * (-0.2f64).exp()).abs() < 1e-15);
        let mut s = 1.0;
        for ok in [true, false, false, false, false] {
            s = sigma_one_fifth(s, ok, 0.2, 1.0);
        }
        assert!((s.ln()).abs() < 1e-12);
    }

    #[test]
    fn sampling_identity_and_affine() {
        let params = default_params(3).unwrap();
        let state = StrategyState::new(&params, vec![0.0; 3]).unwrap();
        let mut snap = state.snapshot();
        snap.sigma = 1.0;
        let c = sample_candidate(&snap, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c.x, c.z);

        snap.sigma = 0.5;
        snap.mean = vec![1.0; 3];
        let c = sample_candidate(&snap, &mut ChaCha8Rng::seed_from_u64(1));
        for (x, z) in c.x.iter().zip(&c.z) {
            assert_eq!(*x, 1.0 + 0.5 * z);
        }
        let again = sample_candidate(&snap, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!((c.z, c.x), (again.z, again.x));
    }

    #[test]
    fn accept_rules() {
        let mut params = default_params(2).unwrap();
        params.ss_pool = 2;
        let mut st = StrategyState::new(&params, vec![0.0, 0.0]).unwrap();
        assert!(steady_state_accept(&mut st, &params, evaluated(&[1.0, 0.0], 1.0)).unwrap());
        assert!(steady_state_accept(&mut st, &params, evaluated(&[3.0, 0.0], 3.0)).unwrap());
        assert!(steady_state_accept(&mut st, &params, evaluated(&[2.0, 0.0], 2.0)).unwrap());
        let fits: Vec<f64> = st.best_set.iter().map(|s| s.fitness).collect();
        assert_eq!(fits, vec![1.0, 2.0]);
        assert_eq!(st.evals, 3);

        let mut params = default_params(2).unwrap();
        params.ss_pool = 3;
        let mut st = StrategyState::new(&params, vec![0.0, 0.0]).unwrap();
        for _ in 0..3 {
            steady_state_accept(&mut st, &params, evaluated(&[1.0, 1.0], 1.0)).unwrap();
        }
        let before = st.best_set.clone();
        let sigma = st.sigma;
        assert!(!steady_state_accept(&mut st, &params, evaluated(&[5.0, 5.0], 2.0)).unwrap());
        // ties with the worst are rejected too
        assert!(!steady_state_accept(&mut st, &params, evaluated(&[5.0, 5.0], 1.0)).unwrap());
        assert_eq!(st.best_set, before);
        assert!(st.sigma < sigma);
        assert_eq!(st.evals, 5);
    }

    #[test]
    fn non_finite_fitness_counts_as_failure() {
        let params = default_params(2).unwrap();
        let mut st = StrategyState::new(&params, vec![0.0, 0.0]).unwrap();
        let sigma = st.sigma;
        assert!(!steady_state_accept(&mut st, &params, evaluated(&[1.0, 0.0], f64::NAN)).unwrap());
        assert!(st.best_set.is_empty());
        assert_eq!(st.evals, 1);
        assert!((st.sigma - sigma_one_fifth(sigma, false, 0.2, params.d_sigma)).abs() < 1e-15);
    }

    #[test]
    fn pairs_saved_on_spacing() {
        let mut params = default_params(2).unwrap();
        params.n_steps = 3;
        let mut st = StrategyState::new(&params, vec![0.0, 0.0]).unwrap();
        for i in 0..10 {
            let f = 10.0 - i as f64;
            steady_state_accept(&mut st, &params, evaluated(&[f, -f], f)).unwrap();
        }
        let stamps: Vec<u64> = st.archive.entries().iter().map(|e| e.t).collect();
        assert_eq!(stamps, vec![3, 6, 9]);
    }

    #[test]
    fn generation_keeps_best_record_when_all_worse() {
        let params = default_params(4).unwrap();
        let mut st = StrategyState::new(&params, vec![3.0; 4]).unwrap();
        st.best_fitness = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        generational_step(&mut st, &params, &mut rng, &crate::objectives::sphere).unwrap();
        assert_eq!(st.best_fitness, 1e-3);
        assert_eq!(st.evals, params.lambda as u64);
        assert_eq!(st.archive.len(), 1);
    }

    #[test]
    fn generation_replay_is_deterministic() {
        let params = default_params(2).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let mut st = StrategyState::with_random_mean(&params, &mut rng).unwrap();
            for _ in 0..2 {
                generational_step(&mut st, &params, &mut rng, &crate::objectives::sphere).unwrap();
            }
            (st.mean, st.sigma, st.p_c, st.best_fitness)
        };
        assert_eq!(run(), run());
    }
}
