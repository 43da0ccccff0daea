//! Offline and stochastic convex optimization through the regret machinery.
//!
//! Feeding u_k = −γ_k ∂f(x_k) into the score-and-choose recursion gives
//! lazy mirror descent; dividing the regret bound by Σγ_k turns it into a
//! value-convergence bound for the adjusted iterates x^min (best so far)
//! and x^γ (step-weighted average):
//!
//! ```text
//! f(x') − f_min ≤ (depth + M²/(2K) Σ γ_k²) / Σ γ_k        (variable step)
//! f(x') − f_min ≤ 2M √(depth/K) (1/√n + 1/(4n))            (variable parameter)
//! ```
//!
//! The second line uses constant steps γ = 1 with η_n = √(K·depth/n)/M and
//! beats the log n factor that any step-size choice leaves in the first.
//! Stochastic variants replicate the run over independent noise streams
//! and report Monte Carlo means with normal-approximation errors.

use crate::environments::{LossOracle, NoisyLossOracle};
use crate::geometry::{BodyKind, Regularizer};
use crate::{Error, Result};

/// A convex program: a loss oracle over a body, and the exact minimum value
/// when the test problem ships with one.
#[derive(Debug, Clone)]
pub struct ConvexProgram {
    oracle: LossOracle,
    known_minimum: Option<f64>,
}

impl ConvexProgram {
    pub fn new(oracle: LossOracle, known_minimum: Option<f64>) -> Self {
        Self {
            oracle,
            known_minimum,
        }
    }

    /// f(x) = ½‖x − target‖₂² with the exact minimum ½·dist(target, C)².
    pub fn quadratic_distance(target: Vec<f64>, body: crate::geometry::ConvexBody) -> Result<Self> {
        let nearest = body.project(&target)?;
        let f_min = 0.5
            * nearest
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        let oracle = LossOracle::quadratic_distance(target, body)?;
        Ok(Self {
            oracle,
            known_minimum: Some(f_min),
        })
    }

    /// f(x) = ⟨c, x⟩ with the exact minimum −max_{x∈C}⟨−c, x⟩.
    pub fn linear(gradient: Vec<f64>, body: crate::geometry::ConvexBody) -> Result<Self> {
        let negated: Vec<f64> = gradient.iter().map(|v| -v).collect();
        let f_min = -body.linear_max_value(&negated)?;
        let oracle = LossOracle::linear(gradient, body)?;
        Ok(Self {
            oracle,
            known_minimum: Some(f_min),
        })
    }

    pub fn oracle(&self) -> &LossOracle {
        &self.oracle
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }
}

/// Best-so-far and step-weighted-average iterates with their running
/// aggregates.
#[derive(Debug, Clone)]
pub struct AdjustedIterates {
    best_point: Vec<f64>,
    best_value: f64,
    best_stage: u64,
    weight_sum: f64,
    weighted_point_sum: Vec<f64>,
    weighted_value_sum: f64,
}

impl AdjustedIterates {
    fn new(dim: usize) -> Self {
        Self {
            best_point: vec![0.0; dim],
            best_value: f64::INFINITY,
            best_stage: 0,
            weight_sum: 0.0,
            weighted_point_sum: vec![0.0; dim],
            weighted_value_sum: 0.0,
        }
    }

    fn record(&mut self, stage: u64, weight: f64, point: &[f64], value: f64) {
        // Strict inequality keeps the earliest minimizing stage.
        if value < self.best_value {
            self.best_value = value;
            self.best_stage = stage;
            self.best_point.copy_from_slice(point);
        }
        self.weight_sum += weight;
        self.weighted_value_sum += weight * value;
        for (total, x) in self.weighted_point_sum.iter_mut().zip(point) {
            *total += weight * x;
        }
    }

    /// x^min: the earliest iterate achieving the smallest f seen.
    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_stage(&self) -> u64 {
        self.best_stage
    }

    /// x^γ = Σ γ_k x_k / Σ γ_k.
    pub fn average_point(&self) -> Vec<f64> {
        self.weighted_point_sum
            .iter()
            .map(|v| v / self.weight_sum)
            .collect()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    /// Σ γ_k f(x_k) / Σ γ_k, the right-hand side of the Jensen comparison.
    pub fn weighted_value_mean(&self) -> f64 {
        self.weighted_value_sum / self.weight_sum
    }
}

/// Full record of a deterministic optimization run.
#[derive(Debug, Clone)]
pub struct OptimRun {
    pub adjusted: AdjustedIterates,
    /// Iterates x_1, …, x_n.
    pub actions: Vec<Vec<f64>>,
    /// f(x_k) per stage.
    pub values: Vec<f64>,
    /// f(x^min_k) per stage.
    pub best_values: Vec<f64>,
    /// f(x^γ_k) per stage.
    pub average_values: Vec<f64>,
    /// Σ_{j≤k} γ_j per stage.
    pub step_sums: Vec<f64>,
    /// Σ_{j≤k} γ_j² per stage.
    pub step_square_sums: Vec<f64>,
    /// The unprojected dual accumulator U_n of lazy methods.
    pub final_scores: Option<Vec<f64>>,
}

fn check_step(gamma: f64, stage: u64) -> Result<f64> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(gamma)
    } else {
        Err(Error::InvalidInput(format!(
            "step size at stage {stage} must be positive"
        )))
    }
}

/// Lazy mirror descent: U_n = U_{n−1} − γ_n ∂f(x_n), x_{n+1} = Q_h(U_n),
/// starting from U_0 = 0 and x_1 = Q_h(0).
pub fn md_lazy(
    program: &ConvexProgram,
    regularizer: &Regularizer,
    steps: impl Fn(u64) -> f64,
    stages: u64,
) -> Result<OptimRun> {
    let dim = regularizer.body().dim();
    let mut scores = vec![0.0; dim];
    let mut x = regularizer.choice(&scores)?;
    let mut run = run_skeleton(dim, stages);
    let mut adjusted = AdjustedIterates::new(dim);
    for k in 1..=stages {
        let gamma = check_step(steps(k), k)?;
        record_stage(program, &mut run, &mut adjusted, k, gamma, &x)?;
        let g = program.oracle.subgradient(&x)?;
        for (score, gi) in scores.iter_mut().zip(&g) {
            *score -= gamma * gi;
        }
        x = regularizer.choice(&scores)?;
    }
    run.adjusted = adjusted;
    run.final_scores = Some(scores);
    Ok(run)
}

/// Lazy projected subgradient: mirror descent with the origin-centered
/// Euclidean regularizer.
pub fn psg_lazy(
    program: &ConvexProgram,
    steps: impl Fn(u64) -> f64,
    stages: u64,
) -> Result<OptimRun> {
    let body = program.oracle.body().clone();
    let dim = body.dim();
    let regularizer = Regularizer::euclidean(body, vec![0.0; dim])?;
    md_lazy(program, &regularizer, steps, stages)
}

/// Smooth extension F used by the greedy variant: gradient, inverse
/// gradient, and Bregman projection are all closed-form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorMap {
    /// F(x) = Σ x_i log x_i on the positive orthant; Bregman projection
    /// onto the simplex is normalization, so one step is the
    /// multiplicative-weights update x_i ∝ x_i e^{−γ g_i}.
    Entropy,
    /// F(x) = ½‖x‖₂²; Bregman projection is Euclidean projection.
    HalfSquaredNorm,
}

/// Greedy mirror descent: a_n = ∇F*(∇F(x_n) − γ_n ∂f(x_n)) followed by the
/// Bregman projection of a_n onto the body.
pub fn md_greedy(
    program: &ConvexProgram,
    mirror: MirrorMap,
    steps: impl Fn(u64) -> f64,
    stages: u64,
) -> Result<OptimRun> {
    let body = program.oracle.body();
    let dim = body.dim();
    if mirror == MirrorMap::Entropy && !matches!(body.kind(), BodyKind::Simplex) {
        return Err(Error::InvalidInput(
            "the entropy mirror map projects onto the simplex only".into(),
        ));
    }
    let mut x = match mirror {
        MirrorMap::Entropy => vec![1.0 / dim as f64; dim],
        MirrorMap::HalfSquaredNorm => body.project(&vec![0.0; dim])?,
    };
    let mut run = run_skeleton(dim, stages);
    let mut adjusted = AdjustedIterates::new(dim);
    for k in 1..=stages {
        let gamma = check_step(steps(k), k)?;
        record_stage(program, &mut run, &mut adjusted, k, gamma, &x)?;
        let g = program.oracle.subgradient(&x)?;
        x = match mirror {
            MirrorMap::Entropy => {
                // Stabilized multiplicative update; exact zeros stay zero.
                let shift = g
                    .iter()
                    .map(|gi| -gamma * gi)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut next: Vec<f64> = x
                    .iter()
                    .zip(&g)
                    .map(|(&xi, &gi)| xi * (-gamma * gi - shift).exp())
                    .collect();
                let total: f64 = next.iter().sum();
                next.iter_mut().for_each(|v| *v /= total);
                next
            }
            MirrorMap::HalfSquaredNorm => {
                let moved: Vec<f64> = x.iter().zip(&g).map(|(&xi, &gi)| xi - gamma * gi).collect();
                body.project(&moved)?
            }
        };
    }
    run.adjusted = adjusted;
    Ok(run)
}

/// Variable-parameter solver: constant steps γ = 1 with
/// η_n = √(K·depth/n)/M, i.e. x_{n+1} = Q_h(η_n U_n).
pub fn variable_parameter_solve(
    program: &ConvexProgram,
    regularizer: &Regularizer,
    stages: u64,
) -> Result<OptimRun> {
    let lipschitz = program.oracle.lipschitz();
    if !lipschitz.is_finite() || lipschitz <= 0.0 {
        return Err(Error::InvalidInput(
            "variable-parameter solve needs a positive Lipschitz bound".into(),
        ));
    }
    let k_const = regularizer.strong_convexity();
    if !k_const.is_finite() || k_const <= 0.0 {
        return Err(Error::InvalidInput(
            "variable-parameter solve needs a strongly convex regularizer".into(),
        ));
    }
    let depth = regularizer.depth();
    let dim = regularizer.body().dim();
    let mut scores = vec![0.0; dim];
    let mut x = regularizer.choice(&scores)?;
    let mut run = run_skeleton(dim, stages);
    let mut adjusted = AdjustedIterates::new(dim);
    for k in 1..=stages {
        record_stage(program, &mut run, &mut adjusted, k, 1.0, &x)?;
        let g = program.oracle.subgradient(&x)?;
        for (score, gi) in scores.iter_mut().zip(&g) {
            *score -= gi;
        }
        let eta = (k_const * depth / k as f64).sqrt() / lipschitz;
        let scaled: Vec<f64> = scores.iter().map(|s| eta * s).collect();
        x = regularizer.choice(&scaled)?;
    }
    run.adjusted = adjusted;
    run.final_scores = Some(scores);
    Ok(run)
}

fn run_skeleton(dim: usize, stages: u64) -> OptimRun {
    let n = stages as usize;
    OptimRun {
        adjusted: AdjustedIterates::new(dim),
        actions: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        best_values: Vec::with_capacity(n),
        average_values: Vec::with_capacity(n),
        step_sums: Vec::with_capacity(n),
        step_square_sums: Vec::with_capacity(n),
        final_scores: None,
    }
}

fn record_stage(
    program: &ConvexProgram,
    run: &mut OptimRun,
    adjusted: &mut AdjustedIterates,
    stage: u64,
    gamma: f64,
    x: &[f64],
) -> Result<()> {
    let value = program.oracle.value(x)?;
    adjusted.record(stage, gamma, x, value);
    run.actions.push(x.to_vec());
    run.values.push(value);
    run.best_values.push(adjusted.best_value());
    run.average_values
        .push(program.oracle.value(&adjusted.average_point())?);
    let prev_sum = run.step_sums.last().copied().unwrap_or(0.0);
    let prev_sq = run.step_square_sums.last().copied().unwrap_or(0.0);
    run.step_sums.push(prev_sum + gamma);
    run.step_square_sums.push(prev_sq + gamma * gamma);
    Ok(())
}

/// Variable-step value bound (depth + M²/(2K) Σγ²)/Σγ from running sums.
pub fn value_bound_varstep_sums(
    depth: f64,
    strong_convexity: f64,
    lipschitz: f64,
    step_sum: f64,
    step_square_sum: f64,
) -> f64 {
    (depth + lipschitz * lipschitz * step_square_sum / (2.0 * strong_convexity)) / step_sum
}

/// Variable-step value bound over an explicit step sequence.
pub fn value_bound_varstep(
    depth: f64,
    strong_convexity: f64,
    lipschitz: f64,
    steps: &[f64],
) -> Result<f64> {
    if strong_convexity <= 0.0 {
        return Err(Error::InvalidInput("K must be positive".into()));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (i, &g) in steps.iter().enumerate() {
        check_step(g, i as u64 + 1)?;
        sum += g;
        sum_sq += g * g;
    }
    if sum <= 0.0 {
        return Err(Error::InvalidInput("steps must have positive total".into()));
    }
    Ok(value_bound_varstep_sums(
        depth,
        strong_convexity,
        lipschitz,
        sum,
        sum_sq,
    ))
}

/// Variable-parameter value bound 2M√(depth/K)(1/√n + 1/(4n)).
pub fn value_bound_vartemp(depth: f64, strong_convexity: f64, lipschitz: f64, stages: f64) -> f64 {
    2.0 * lipschitz
        * (depth / strong_convexity).sqrt()
        * (1.0 / stages.sqrt() + 1.0 / (4.0 * stages))
}

/// Monte Carlo summary of a stochastic run: per-stage means and standard
/// errors of the value gaps of both adjusted iterates, over R replications.
#[derive(Debug, Clone)]
pub struct StochasticRun {
    pub replications: usize,
    pub mean_best_gap: Vec<f64>,
    pub stderr_best_gap: Vec<f64>,
    pub mean_average_gap: Vec<f64>,
    pub stderr_average_gap: Vec<f64>,
}

impl StochasticRun {
    pub fn stages(&self) -> usize {
        self.mean_best_gap.len()
    }
}

/// Thread budget: NOREGRET_THREADS when set, otherwise the machine's
/// available parallelism.
fn thread_cap() -> usize {
    std::env::var("NOREGRET_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Lazy mirror-descent stochastic approximation: each replication runs
/// x̃_{n+1} = Q_h(−Σ_{k≤n} γ_k g̃_k) on an independent noise stream
/// (replication r is seeded with seed + r through SplitMix64), and the
/// value gaps f(x̃') − f_min are averaged in fixed replication order.
pub fn mdsa_lazy(
    program: &ConvexProgram,
    regularizer: &Regularizer,
    noise_scale: f64,
    steps: impl Fn(u64) -> f64 + Sync,
    stages: u64,
    replications: usize,
    seed: u64,
) -> Result<StochasticRun> {
    if replications < 2 {
        return Err(Error::InvalidInput(
            "stochastic runs need at least 2 replications".into(),
        ));
    }
    let f_min = program
        .known_minimum()
        .ok_or_else(|| Error::InvalidInput("stochastic value gaps need a known minimum".into()))?;
    let n = stages as usize;
    type RepGaps = (Vec<f64>, Vec<f64>);
    let run_one = |rep: usize| -> Result<RepGaps> {
        let mut noisy = NoisyLossOracle::new(
            program.oracle().clone(),
            noise_scale,
            seed.wrapping_add(rep as u64),
        )?;
        let dim = regularizer.body().dim();
        let mut scores = vec![0.0; dim];
        let mut x = regularizer.choice(&scores)?;
        let mut adjusted = AdjustedIterates::new(dim);
        let mut best_gap = Vec::with_capacity(n);
        let mut avg_gap = Vec::with_capacity(n);
        for k in 1..=stages {
            let gamma = check_step(steps(k), k)?;
            let value = program.oracle().value(&x)?;
            adjusted.record(k, gamma, &x, value);
            best_gap.push(adjusted.best_value() - f_min);
            avg_gap.push(program.oracle().value(&adjusted.average_point())? - f_min);
            let g = noisy.noisy_subgradient(&x)?;
            for (score, gi) in scores.iter_mut().zip(&g) {
                *score -= gamma * gi;
            }
            x = regularizer.choice(&scores)?;
        }
        Ok((best_gap, avg_gap))
    };

    let workers = thread_cap().min(replications);
    let mut results: Vec<Option<Result<RepGaps>>> = Vec::new();
    results.resize_with(replications, || None);
    let chunk = replications.div_ceil(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (w, slot_chunk) in results.chunks_mut(chunk).enumerate() {
            let run_one = &run_one;
            handles.push(scope.spawn(move || {
                for (offset, slot) in slot_chunk.iter_mut().enumerate() {
                    *slot = Some(run_one(w * chunk + offset));
                }
            }));
        }
        for h in handles {
            h.join().expect("replication worker panicked");
        }
    });

    let mut sum_best = vec![0.0f64; n];
    let mut sq_best = vec![0.0f64; n];
    let mut sum_avg = vec![0.0f64; n];
    let mut sq_avg = vec![0.0f64; n];
    for slot in results {
        let (best, avg) = slot.expect("replication slot filled")?;
        for i in 0..n {
            sum_best[i] += best[i];
            sq_best[i] += best[i] * best[i];
            sum_avg[i] += avg[i];
            sq_avg[i] += avg[i] * avg[i];
        }
    }
    let r = replications as f64;
    let stderr = |sum: f64, sq: f64| {
        let mean = sum / r;
        let var = (sq / r - mean * mean).max(0.0) * r / (r - 1.0);
        (var / r).sqrt()
    };
    Ok(StochasticRun {
        replications,
        mean_best_gap: sum_best.iter().map(|s| s / r).collect(),
        stderr_best_gap: sum_best
            .iter()
            .zip(&sq_best)
            .map(|(&s, &q)| stderr(s, q))
            .collect(),
        mean_average_gap: sum_avg.iter().map(|s| s / r).collect(),
        stderr_average_gap: sum_avg
            .iter()
            .zip(&sq_avg)
            .map(|(&s, &q)| stderr(s, q))
            .collect(),
    })
}

/// Stochastic projected subgradient: the Euclidean special case of
/// [`mdsa_lazy`].
pub fn spsg_lazy(
    program: &ConvexProgram,
    noise_scale: f64,
    steps: impl Fn(u64) -> f64 + Sync,
    stages: u64,
    replications: usize,
    seed: u64,
) -> Result<StochasticRun> {
    let body = program.oracle().body().clone();
    let dim = body.dim();
    let regularizer = Regularizer::euclidean(body, vec![0.0; dim])?;
    mdsa_lazy(
        program,
        &regularizer,
        noise_scale,
        steps,
        stages,
        replications,
        seed,
    )
}
