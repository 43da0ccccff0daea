//! Payoff streams, convex loss oracles, noise wrappers, and mixed-action
//! sampling.
//!
//! Every stream emits payoff vectors with ‖u‖_* ≤ M in the dual of its
//! norm tag, the standing assumption of the bounded regret bounds. All
//! randomness flows through [`SplitMix64`] so runs are
//! reproducible bit-for-bit from a seed.

use crate::geometry::{ConvexBody, Norm};
use crate::linalg::{check_dim, check_finite, dot, norm_l2};
use crate::{Error, Result, SplitMix64};

/// Source of payoff vectors.
#[derive(Debug, Clone)]
enum StreamKind {
    /// Replays a finite list, then errors.
    Fixed { payoffs: Vec<Vec<f64>>, next: usize },
    /// Coordinates uniform on [−M, M], rescaled into the dual ball when the
    /// tag requires it.
    IidUniform,
    /// Adaptive adversary: favors the coordinate where the current mixed
    /// action is smallest, at full strength M.
    AdversarialBestResponse,
}

/// A stream of payoff vectors u_1, u_2, … with ‖u_n‖_* ≤ M.
#[derive(Debug, Clone)]
pub struct PayoffStream {
    dim: usize,
    bound: f64,
    norm: Norm,
    kind: StreamKind,
    rng: SplitMix64,
}

fn check_bound(bound: f64) -> Result<()> {
    if bound.is_finite() && bound > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput("norm bound M must be positive".into()))
    }
}

impl PayoffStream {
    /// Stream replaying `payoffs` in order. Each element must satisfy the
    /// norm bound up to 1e-12.
    pub fn fixed(payoffs: Vec<Vec<f64>>, norm: Norm, bound: f64) -> Result<Self> {
        check_bound(bound)?;
        let dim = payoffs.first().map_or(1, Vec::len);
        for u in &payoffs {
            check_finite(u, "payoff")?;
            check_dim(u, dim)?;
            if norm.dual_eval(u) > bound + 1e-12 {
                return Err(Error::InvalidInput(
                    "fixed payoff exceeds the norm bound".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            bound,
            norm,
            kind: StreamKind::Fixed { payoffs, next: 0 },
            rng: SplitMix64::new(0),
        })
    }

    pub fn iid_uniform(dim: usize, bound: f64, norm: Norm, seed: u64) -> Result<Self> {
        check_bound(bound)?;
        if dim == 0 {
            return Err(Error::InvalidInput("stream dimension must be ≥ 1".into()));
        }
        Ok(Self {
            dim,
            bound,
            norm,
            kind: StreamKind::IidUniform,
            rng: SplitMix64::new(seed),
        })
    }

    pub fn adversarial_best_response(
        dim: usize,
        bound: f64,
        norm: Norm,
        seed: u64,
    ) -> Result<Self> {
        check_bound(bound)?;
        if dim == 0 {
            return Err(Error::InvalidInput("stream dimension must be ≥ 1".into()));
        }
        Ok(Self {
            dim,
            bound,
            norm,
            kind: StreamKind::AdversarialBestResponse,
            rng: SplitMix64::new(seed),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The certified bound M on ‖u‖_*.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// True when the stream must see the current action before emitting.
    pub fn is_adaptive(&self) -> bool {
        matches!(self.kind, StreamKind::AdversarialBestResponse)
    }

    /// Same stream restarted with a fresh seed (for parallel replications).
    pub fn clone_with_seed(&self, seed: u64) -> Self {
        let mut copy = self.clone();
        copy.rng = SplitMix64::new(seed);
        if let StreamKind::Fixed { next, .. } = &mut copy.kind {
            *next = 0;
        }
        copy
    }

    /// Emits u_n. Adaptive kinds require the agent's current action.
    pub fn next_payoff(&mut self, current_action: Option<&[f64]>) -> Result<Vec<f64>> {
        match &mut self.kind {
            StreamKind::Fixed { payoffs, next } => {
                let u = payoffs
                    .get(*next)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput("fixed payoff stream exhausted".into()))?;
                *next += 1;
                Ok(u)
            }
            StreamKind::IidUniform => {
                let mut u: Vec<f64> = (0..self.dim)
                    .map(|_| self.rng.next_symmetric(self.bound))
                    .collect();
                let dual = self.norm.dual_eval(&u);
                if dual > self.bound {
                    let scale = self.bound / dual;
                    u.iter_mut().for_each(|v| *v *= scale);
                }
                Ok(u)
            }
            StreamKind::AdversarialBestResponse => {
                let x = current_action.ok_or_else(|| {
                    Error::InvalidInput("adversarial stream needs the current action".into())
                })?;
                check_dim(x, self.dim)?;
                check_finite(x, "current action")?;
                Ok(best_response_payoff(x, self.bound, self.norm))
            }
        }
    }
}

/// The payoff maximizing ⟨u, e_target − x⟩ over the dual ball, where the
/// target is the coordinate at which x is smallest (lowest index on ties).
/// For the ℓ∞ dual this is +M at the target and −M elsewhere.
fn best_response_payoff(x: &[f64], bound: f64, norm: Norm) -> Vec<f64> {
    let mut target = 0;
    for (i, &v) in x.iter().enumerate() {
        if v < x[target] {
            target = i;
        }
    }
    let gap: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == target { 1.0 - v } else { -v })
        .collect();
    match norm.dual() {
        Norm::Linf => gap
            .iter()
            .map(|&g| if g >= 0.0 { bound } else { -bound })
            .collect(),
        Norm::L2 => {
            let n = norm_l2(&gap);
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                gap.iter().map(|g| bound * g / n).collect()
            }
        }
        Norm::L1 => {
            let mut best = 0;
            for (i, g) in gap.iter().enumerate() {
                if g.abs() > gap[best].abs() {
                    best = i;
                }
            }
            let mut u = vec![0.0; x.len()];
            u[best] = bound * gap[best].signum();
            u
        }
    }
}

/// Functional form of a convex loss.
#[derive(Debug, Clone)]
pub enum LossKind {
    /// f(x) = ½ xᵀAx + bᵀx + c with A symmetric positive semidefinite.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        linear: Vec<f64>,
        constant: f64,
    },
    /// f(x) = ⟨c, x⟩.
    Linear { gradient: Vec<f64> },
    /// f(x) = ‖x − target‖₁.
    AbsDistance { target: Vec<f64> },
}

/// A subdifferentiable convex loss over a body, with a Lipschitz bound M
/// valid for the dual of the body norm.
#[derive(Debug, Clone)]
pub struct LossOracle {
    kind: LossKind,
    body: ConvexBody,
    lipschitz: f64,
}

impl LossOracle {
    pub fn quadratic(
        matrix: Vec<Vec<f64>>,
        linear: Vec<f64>,
        constant: f64,
        body: ConvexBody,
        lipschitz: f64,
    ) -> Result<Self> {
        let d = body.dim();
        check_dim(&linear, d)?;
        check_finite(&linear, "linear term")?;
        if matrix.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.len(),
            });
        }
        for row in &matrix {
            check_dim(row, d)?;
            check_finite(row, "matrix row")?;
        }
        Ok(Self {
            kind: LossKind::Quadratic {
                matrix,
                linear,
                constant,
            },
            body,
            lipschitz,
        })
    }

    /// The test workhorse f(x) = ½‖x − target‖₂², with the exact Lipschitz
    /// constant max_{x∈C} ‖x − target‖₂ (vertex scan for polytopes, closed
    /// form for balls).
    pub fn quadratic_distance(target: Vec<f64>, body: ConvexBody) -> Result<Self> {
        let d = body.dim();
        check_dim(&target, d)?;
        check_finite(&target, "target")?;
        let lipschitz = match body.kind() {
            crate::geometry::BodyKind::L2Ball { center, radius } => {
                let dist = center
                    .iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist + radius
            }
            _ => {
                let vertices = body.vertices().ok_or_else(|| {
                    Error::InvalidInput("cannot bound the gradient on this body".into())
                })?;
                vertices
                    .iter()
                    .map(|v| {
                        v.iter()
                            .zip(&target)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max)
            }
        };
        let matrix = (0..d)
            .map(|i| {
                let mut row = vec![0.0; d];
                row[i] = 1.0;
                row
            })
            .collect();
        let linear: Vec<f64> = target.iter().map(|t| -t).collect();
        let constant = 0.5 * target.iter().map(|t| t * t).sum::<f64>();
        Self::quadratic(matrix, linear, constant, body, lipschitz)
    }

    pub fn linear(gradient: Vec<f64>, body: ConvexBody) -> Result<Self> {
        check_dim(&gradient, body.dim())?;
        check_finite(&gradient, "gradient")?;
        let lipschitz = body.norm().dual_eval(&gradient);
        Ok(Self {
            kind: LossKind::Linear { gradient },
            body,
            lipschitz,
        })
    }

    pub fn abs_distance(target: Vec<f64>, body: ConvexBody) -> Result<Self> {
        check_dim(&target, body.dim())?;
        check_finite(&target, "target")?;
        // Subgradients are sign patterns; the all-ones vector is the worst
        // case in any dual norm.
        let lipschitz = body.norm().dual_eval(&vec![1.0; body.dim()]);
        Ok(Self {
            kind: LossKind::AbsDistance { target },
            body,
            lipschitz,
        })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    /// Lipschitz bound on ‖∂f‖_* over the body.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(match &self.kind {
            LossKind::Quadratic {
                matrix,
                linear,
                constant,
            } => {
                let ax: Vec<f64> = matrix.iter().map(|row| dot(row, x)).collect();
                0.5 * dot(&ax, x) + dot(linear, x) + constant
            }
            LossKind::Linear { gradient } => dot(gradient, x),
            LossKind::AbsDistance { target } => {
                x.iter().zip(target).map(|(a, b)| (a - b).abs()).sum()
            }
        })
    }

    /// A subgradient of f at x. At the kinks of |·| the zero subgradient is
    /// selected, deterministically.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(match &self.kind {
            LossKind::Quadratic { matrix, linear, .. } => matrix
                .iter()
                .zip(linear)
                .map(|(row, b)| dot(row, x) + b)
                .collect(),
            LossKind::Linear { gradient } => gradient.clone(),
            LossKind::AbsDistance { target } => x
                .iter()
                .zip(target)
                .map(|(a, b)| {
                    if a > b {
                        1.0
                    } else if a < b {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_finite(x, "evaluation point")?;
        check_dim(x, self.body.dim())?;
        if self.body.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain("loss queried outside its body".into()))
        }
    }
}

/// Dual-norm bound of a vector whose coordinates lie in [−scale, scale].
fn noise_dual_bound(dim: usize, scale: f64, norm: Norm) -> f64 {
    match norm.dual() {
        Norm::Linf => scale,
        Norm::L2 => scale * (dim as f64).sqrt(),
        Norm::L1 => scale * dim as f64,
    }
}

/// Loss oracle whose subgradients are perturbed by i.i.d. coordinates
/// uniform on [−noise_scale, noise_scale]: zero-mean, bounded noise, so the
/// observed gradients satisfy ‖g̃‖_* ≤ M̃ almost surely.
#[derive(Debug, Clone)]
pub struct NoisyLossOracle {
    inner: LossOracle,
    noise_scale: f64,
    rng: SplitMix64,
}

impl NoisyLossOracle {
    pub fn new(inner: LossOracle, noise_scale: f64, seed: u64) -> Result<Self> {
        if !noise_scale.is_finite() || noise_scale < 0.0 {
            return Err(Error::InvalidInput("noise scale must be ≥ 0".into()));
        }
        Ok(Self {
            inner,
            noise_scale,
            rng: SplitMix64::new(seed),
        })
    }

    pub fn inner(&self) -> &LossOracle {
        &self.inner
    }

    /// Almost-sure bound M̃ on the observed gradient dual norm.
    pub fn noisy_lipschitz(&self) -> f64 {
        self.inner.lipschitz()
            + noise_dual_bound(
                self.inner.body().dim(),
                self.noise_scale,
                self.inner.body().norm(),
            )
    }

    pub fn noisy_subgradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.inner.subgradient(x)?;
        for v in &mut g {
            *v += self.rng.next_symmetric(self.noise_scale);
        }
        Ok(g)
    }

    pub fn clone_with_seed(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.clone(),
            noise_scale: self.noise_scale,
            rng: SplitMix64::new(seed),
        }
    }
}

/// Payoff stream observed through the same bounded-uniform noise. The
/// effective norm bound grows to M̃ = M + the noise dual bound; payoffs are
/// never clipped (clipping would bias the conditional mean).
#[derive(Debug, Clone)]
pub struct NoisyPayoffStream {
    inner: PayoffStream,
    noise_scale: f64,
    rng: SplitMix64,
}

impl NoisyPayoffStream {
    pub fn new(inner: PayoffStream, noise_scale: f64, seed: u64) -> Result<Self> {
        if !noise_scale.is_finite() || noise_scale < 0.0 {
            return Err(Error::InvalidInput("noise scale must be ≥ 0".into()));
        }
        Ok(Self {
            inner,
            noise_scale,
            rng: SplitMix64::new(seed),
        })
    }

    /// Almost-sure bound on the observed payoff dual norm.
    pub fn noisy_bound(&self) -> f64 {
        self.inner.bound() + noise_dual_bound(self.inner.dim(), self.noise_scale, self.inner.norm())
    }

    pub fn next_payoff(&mut self, current_action: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut u = self.inner.next_payoff(current_action)?;
        for v in &mut u {
            *v += self.rng.next_symmetric(self.noise_scale);
        }
        Ok(u)
    }
}

/// Draws a pure action from a mixed action by inverse-CDF sampling with a
/// single SplitMix64 uniform. Returns the 0-based coordinate index.
pub fn sample_action(x: &[f64], rng: &mut SplitMix64) -> Result<usize> {
    check_finite(x, "mixed action")?;
    if x.is_empty() || x.iter().any(|&v| v < -1e-12) || (x.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(
            "mixed action is not a simplex point".into(),
        ));
    }
    let r = rng.next_f64();
    let mut cumulative = 0.0;
    for (i, &v) in x.iter().enumerate() {
        cumulative += v.max(0.0);
        if r < cumulative {
            return Ok(i);
        }
    }
    Ok(x.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_stream_in_order_then_errors() {
        let mut s =
            PayoffStream::fixed(vec![vec![1.0, 0.0], vec![0.0, -1.0]], Norm::L1, 1.0).unwrap();
        assert_eq!(s.next_payoff(None).unwrap(), vec![1.0, 0.0]);
        assert_eq!(s.next_payoff(None).unwrap(), vec![0.0, -1.0]);
        assert!(s.next_payoff(None).is_err());
    }

    #[test]
    fn fixed_stream_validates_bound() {
        assert!(PayoffStream::fixed(vec![vec![2.0, 0.0]], Norm::L1, 1.0).is_err());
    }

    #[test]
    fn adversary_example() {
        let mut s = PayoffStream::adversarial_best_response(2, 1.0, Norm::L1, 0).unwrap();
        let u = s.next_payoff(Some(&[0.5, 0.5])).unwrap();
        assert_eq!(u, vec![1.0, -1.0]);
        assert!(s.next_payoff(None).is_err());
    }

    #[test]
    fn iid_streams_reproduce_and_respect_bound() {
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            let mut a = PayoffStream::iid_uniform(4, 0.8, norm, 123).unwrap();
            let mut b = PayoffStream::iid_uniform(4, 0.8, norm, 123).unwrap();
            for _ in 0..10_000 {
                let u = a.next_payoff(None).unwrap();
                assert_eq!(u, b.next_payoff(None).unwrap());
                assert!(norm.dual_eval(&u) <= 0.8 + 1e-12);
            }
        }
    }

    #[test]
    fn adversarial_payoffs_respect_bound() {
        let mut s = PayoffStream::adversarial_best_response(3, 1.0, Norm::L1, 0).unwrap();
        let mut rng = crate::SplitMix64::new(5);
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..3).map(|_| rng.next_f64()).collect();
            let total: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let u = s.next_payoff(Some(&x)).unwrap();
            assert!(Norm::L1.dual_eval(&u) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn subgradient_forms() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 2.0).unwrap();
        let quad = LossOracle::quadratic_distance(vec![0.0, 0.0], ball.clone()).unwrap();
        assert_eq!(quad.subgradient(&[0.3, -0.4]).unwrap(), vec![0.3, -0.4]);

        let lin = LossOracle::linear(vec![2.0, -1.0], ball.clone()).unwrap();
        assert_eq!(lin.subgradient(&[0.1, 0.1]).unwrap(), vec![2.0, -1.0]);
        assert_eq!(lin.subgradient(&[1.0, 1.0]).unwrap(), vec![2.0, -1.0]);

        let abs = LossOracle::abs_distance(vec![0.5, 0.5], ball).unwrap();
        assert_eq!(abs.subgradient(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(abs.subgradient(&[1.0, 0.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn subgradient_outside_body_errors() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let quad = LossOracle::quadratic_distance(vec![0.0, 0.0], ball).unwrap();
        assert!(quad.subgradient(&[2.0, 2.0]).is_err());
    }

    // Subgradient inequality f(x') ≥ f(x) + ⟨v, x'−x⟩ on random pairs.
    #[test]
    fn subgradient_inequality_spot_check() {
        let ball = ConvexBody::l2_ball(vec![0.2, -0.1], 1.5).unwrap();
        let oracles = [
            LossOracle::quadratic_distance(vec![0.4, 0.4], ball.clone()).unwrap(),
            LossOracle::linear(vec![1.0, -2.0], ball.clone()).unwrap(),
            LossOracle::abs_distance(vec![0.0, 0.0], ball.clone()).unwrap(),
        ];
        let mut rng = crate::SplitMix64::new(9);
        for oracle in &oracles {
            for _ in 0..100 {
                let a: Vec<f64> = (0..2).map(|_| rng.next_symmetric(2.0)).collect();
                let b: Vec<f64> = (0..2).map(|_| rng.next_symmetric(2.0)).collect();
                let x = ball.project(&a).unwrap();
                let x2 = ball.project(&b).unwrap();
                let v = oracle.subgradient(&x).unwrap();
                let lhs = oracle.value(&x2).unwrap();
                let rhs = oracle.value(&x).unwrap() + dot(&v, &x2) - dot(&v, &x);
                assert!(lhs >= rhs - 1e-9);
            }
        }
    }

    #[test]
    fn noise_has_zero_mean() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let oracle = LossOracle::quadratic_distance(vec![0.0, 0.0], ball).unwrap();
        let scale = 0.3;
        let mut noisy = NoisyLossOracle::new(oracle, scale, 77).unwrap();
        let x = [0.1, 0.2];
        let truth = [0.1, 0.2];
        let n = 100_000usize;
        let mut mean = [0.0f64; 2];
        for _ in 0..n {
            let g = noisy.noisy_subgradient(&x).unwrap();
            mean[0] += g[0] - truth[0];
            mean[1] += g[1] - truth[1];
        }
        let sigma = scale / 3.0f64.sqrt();
        let tol = 3.0 * sigma / (n as f64).sqrt();
        assert!((mean[0] / n as f64).abs() < tol);
        assert!((mean[1] / n as f64).abs() < tol);
    }

    #[test]
    fn averaged_noisy_subgradient_is_close_to_truth() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let oracle = LossOracle::quadratic_distance(vec![0.3, 0.0], ball).unwrap();
        let scale = 0.5;
        let x = [0.25, -0.4];
        let truth = oracle.subgradient(&x).unwrap();
        let reps = 10_000usize;
        let mut mean = [0.0f64; 2];
        for r in 0..reps {
            let mut noisy = NoisyLossOracle::new(oracle.clone(), scale, r as u64).unwrap();
            let g = noisy.noisy_subgradient(&x).unwrap();
            mean[0] += g[0];
            mean[1] += g[1];
        }
        let tol = 5.0 * scale / (reps as f64).sqrt();
        for i in 0..2 {
            assert!((mean[i] / reps as f64 - truth[i]).abs() < tol);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_correct_on_vertices() {
        let mut rng = crate::SplitMix64::new(1);
        for _ in 0..100 {
            assert_eq!(sample_action(&[1.0, 0.0, 0.0], &mut rng).unwrap(), 0);
        }
        let mut a = crate::SplitMix64::new(2);
        let mut b = crate::SplitMix64::new(2);
        assert_eq!(
            sample_action(&[0.3, 0.3, 0.4], &mut a).unwrap(),
            sample_action(&[0.3, 0.3, 0.4], &mut b).unwrap()
        );
        assert!(sample_action(&[0.9, 0.3], &mut rng).is_err());
    }

    #[test]
    fn sampling_frequencies_match_weights() {
        let mut rng = crate::SplitMix64::new(31);
        let n = 100_000usize;
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[sample_action(&[0.5, 0.5], &mut rng).unwrap()] += 1;
        }
        let freq = counts[0] as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01);
    }

    #[test]
    fn noisy_stream_bound_accounts_for_noise() {
        let inner = PayoffStream::iid_uniform(4, 1.0, Norm::L1, 3).unwrap();
        let noisy = NoisyPayoffStream::new(inner, 0.25, 4).unwrap();
        assert!((noisy.noisy_bound() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn noisy_stream_payoffs_stay_within_inflated_bound() {
        let inner = PayoffStream::iid_uniform(3, 1.0, Norm::L1, 11).unwrap();
        let mut noisy = NoisyPayoffStream::new(inner, 0.25, 12).unwrap();
        let cap = noisy.noisy_bound();
        for _ in 0..10_000 {
            let u = noisy.next_payoff(None).unwrap();
            assert_eq!(u.len(), 3);
            assert!(Norm::L1.dual_eval(&u) <= cap + 1e-12);
        }
    }
}
