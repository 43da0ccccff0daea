//! Action sets, regularizer functions, choice maps and their conjugates.
//!
//! A regularizer `h` is strictly convex and finite exactly on a compact
//! convex body `C`. Its choice map
//!
//! ```text
//! Q_h(y) = argmax_{x ∈ C} { ⟨y, x⟩ − h(x) }
//! ```
//!
//! turns dual score vectors into actions, and equals the gradient of the
//! convex conjugate `h*`. The entropy regularizer on the simplex yields the
//! logit (softmax) map, the half-squared-norm regularizer yields Euclidean
//! projection, and generic regularizers fall back to projected gradient
//! ascent on the strictly concave objective.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{all_finite, check_dim, check_finite, dot, norm_l1, norm_l2, norm_linf};
use crate::{Error, Result};

/// Primal norm tag. The dual norm pairs are l1↔l∞ and l2↔l2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => norm_l1(v),
            Norm::L2 => norm_l2(v),
            Norm::Linf => norm_linf(v),
        }
    }

    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    /// Evaluates the dual norm ‖v‖_*.
    pub fn dual_eval(self, v: &[f64]) -> f64 {
        self.dual().eval(v)
    }
}

/// Shape of a compact convex action set.
#[derive(Debug, Clone)]
pub enum BodyKind {
    /// Probability simplex Δ_d = { x ≥ 0 : Σ x_i = 1 }.
    Simplex,
    /// Axis-aligned box Π [lower_i, upper_i].
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean ball { x : ‖x − center‖₂ ≤ radius }.
    L2Ball { center: Vec<f64>, radius: f64 },
    /// Convex hull of an explicit vertex list. Supports linear maximization
    /// only; Euclidean projection onto a general polytope is a QP and is
    /// deliberately not implemented.
    VertexPolytope { vertices: Vec<Vec<f64>> },
}

/// A compact convex action set together with the primal norm used in
/// Lipschitz and strong-convexity statements.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    kind: BodyKind,
    norm: Norm,
}

const MEMBERSHIP_TOL: f64 = 1e-10;
const SIMPLEX_COORD_TOL: f64 = 1e-12;

impl ConvexBody {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("simplex dimension must be ≥ 1".into()));
        }
        Ok(Self {
            dim,
            kind: BodyKind::Simplex,
            norm: Norm::L1,
        })
    }

    pub fn bounded_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_finite(&lower, "lower bound")?;
        check_finite(&upper, "upper bound")?;
        check_dim(&upper, lower.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidInput("box dimension must be ≥ 1".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidInput("box has lower > upper".into()));
        }
        Ok(Self {
            dim: lower.len(),
            kind: BodyKind::Box { lower, upper },
            norm: Norm::L2,
        })
    }

    pub fn l2_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_finite(&center, "ball center")?;
        if center.is_empty() {
            return Err(Error::InvalidInput("ball dimension must be ≥ 1".into()));
        }
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidInput("ball radius must be ≥ 0".into()));
        }
        Ok(Self {
            dim: center.len(),
            kind: BodyKind::L2Ball { center, radius },
            norm: Norm::L2,
        })
    }

    pub fn vertex_polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("polytope needs ≥ 1 vertex".into()));
        }
        let dim = vertices[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("polytope dimension must be ≥ 1".into()));
        }
        for v in &vertices {
            check_finite(v, "polytope vertex")?;
            check_dim(v, dim)?;
        }
        Ok(Self {
            dim,
            kind: BodyKind::VertexPolytope { vertices },
            norm: Norm::L2,
        })
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// Membership test with the fixed numerical tolerances of the artifact
    /// (simplex coordinates ≥ −1e-12 and sum within 1e-10 of 1; other kinds
    /// within 1e-10 of their defining inequalities).
    ///
    /// For `VertexPolytope` bodies only vertex coincidence is checked; full
    /// hull membership would require an LP and nothing in the library
    /// depends on it.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || !all_finite(x) {
            return false;
        }
        match &self.kind {
            BodyKind::Simplex => {
                x.iter().all(|&v| v >= -SIMPLEX_COORD_TOL)
                    && (x.iter().sum::<f64>() - 1.0).abs() <= MEMBERSHIP_TOL
            }
            BodyKind::Box { lower, upper } => x
                .iter()
                .zip(lower)
                .zip(upper)
                .all(|((&v, &l), &u)| v >= l - MEMBERSHIP_TOL && v <= u + MEMBERSHIP_TOL),
            BodyKind::L2Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d <= radius + MEMBERSHIP_TOL
            }
            BodyKind::VertexPolytope { vertices } => vertices
                .iter()
                .any(|v| v.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-9)),
        }
    }

    /// Euclidean projection argmin_{x∈C} ‖y − x‖₂.
    ///
    /// Box: coordinatewise clip. Ball: radial rescale. Simplex: sort and
    /// threshold. `VertexPolytope` is rejected.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_finite(y, "projection input")?;
        check_dim(y, self.dim)?;
        match &self.kind {
            BodyKind::Simplex => project_simplex(y),
            BodyKind::Box { lower, upper } => Ok(y
                .iter()
                .zip(lower)
                .zip(upper)
                .map(|((&v, &l), &u)| v.clamp(l, u))
                .collect()),
            BodyKind::L2Ball { center, radius } => {
                let diff: Vec<f64> = y.iter().zip(center).map(|(a, b)| a - b).collect();
                let d = norm_l2(&diff);
                if d <= *radius {
                    Ok(y.to_vec())
                } else {
                    let scale = radius / d;
                    Ok(center
                        .iter()
                        .zip(&diff)
                        .map(|(c, v)| c + scale * v)
                        .collect())
                }
            }
            BodyKind::VertexPolytope { .. } => Err(Error::UnsupportedProjection(
                "vertex polytopes support linear maximization only".into(),
            )),
        }
    }

    /// Returns a point of the set achieving max_{x∈C} ⟨u, x⟩.
    ///
    /// Ties over vertices are broken by lowest vertex index.
    pub fn linear_max(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_finite(u, "linear objective")?;
        check_dim(u, self.dim)?;
        match &self.kind {
            BodyKind::Simplex => {
                let mut best = 0;
                for (i, &v) in u.iter().enumerate() {
                    if v > u[best] {
                        best = i;
                    }
                }
                let mut x = vec![0.0; self.dim];
                x[best] = 1.0;
                Ok(x)
            }
            BodyKind::Box { lower, upper } => Ok(u
                .iter()
                .zip(lower)
                .zip(upper)
                .map(|((&c, &l), &up)| if c > 0.0 { up } else { l })
                .collect()),
            BodyKind::L2Ball { center, radius } => {
                let n = norm_l2(u);
                if n == 0.0 {
                    Ok(center.clone())
                } else {
                    Ok(center
                        .iter()
                        .zip(u)
                        .map(|(c, v)| c + radius * v / n)
                        .collect())
                }
            }
            BodyKind::VertexPolytope { vertices } => {
                let mut best = 0;
                let mut best_val = dot(&vertices[0], u);
                for (i, v) in vertices.iter().enumerate().skip(1) {
                    let val = dot(v, u);
                    if val > best_val {
                        best = i;
                        best_val = val;
                    }
                }
                Ok(vertices[best].clone())
            }
        }
    }

    /// Value of the support function max_{x∈C} ⟨u, x⟩.
    pub fn linear_max_value(&self, u: &[f64]) -> Result<f64> {
        Ok(dot(u, &self.linear_max(u)?))
    }

    /// Explicit vertex list where one is available: canonical basis vectors
    /// for the simplex, the 2^d corners for boxes of dimension ≤ 16, the
    /// stored list for polytopes. Balls have none.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            BodyKind::Simplex => Some(
                (0..self.dim)
                    .map(|i| {
                        let mut e = vec![0.0; self.dim];
                        e[i] = 1.0;
                        e
                    })
                    .collect(),
            ),
            BodyKind::Box { lower, upper } => {
                if self.dim > 16 {
                    return None;
                }
                let mut corners = Vec::with_capacity(1 << self.dim);
                for mask in 0u32..(1 << self.dim) {
                    corners.push(
                        (0..self.dim)
                            .map(|i| {
                                if mask >> i & 1 == 1 {
                                    upper[i]
                                } else {
                                    lower[i]
                                }
                            })
                            .collect(),
                    );
                }
                Some(corners)
            }
            BodyKind::L2Ball { .. } => None,
            BodyKind::VertexPolytope { vertices } => Some(vertices.clone()),
        }
    }

    /// Smallest axis-aligned box containing the body, as (lower, upper).
    fn enclosing_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            BodyKind::Simplex => (vec![0.0; self.dim], vec![1.0; self.dim]),
            BodyKind::Box { lower, upper } => (lower.clone(), upper.clone()),
            BodyKind::L2Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            BodyKind::VertexPolytope { vertices } => {
                let mut lo = vertices[0].clone();
                let mut hi = vertices[0].clone();
                for v in vertices {
                    for i in 0..self.dim {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
        }
    }
}

/// Shift-stable softmax: (e^{y_i} / Σ_j e^{y_j})_i with max(y) subtracted
/// before exponentiating.
pub fn logit_choice(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::InvalidInput("logit input must be nonempty".into()));
    }
    check_finite(y, "logit input")?;
    let max = y.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out: Vec<f64> = y.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Shift-stable log Σ_i e^{y_i}.
pub fn log_sum_exp(y: &[f64]) -> f64 {
    let max = y.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    max + y.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Euclidean projection onto the probability simplex via sort-and-threshold:
/// sort descending, take the largest k with y_(k) − (Σ_{j≤k} y_(j) − 1)/k > 0,
/// and clip at that threshold.
pub fn project_simplex(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::InvalidInput(
            "projection input must be nonempty".into(),
        ));
    }
    check_finite(y, "projection input")?;
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite inputs"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    Ok(y.iter().map(|&v| (v - theta).max(0.0)).collect())
}

/// Evaluator closure of a generic regularizer.
pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Optional gradient closure of a generic regularizer.
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Regularizer shape.
#[derive(Clone)]
pub enum RegularizerKind {
    /// Negative entropy Σ x_i log x_i on the simplex; choice map is logit.
    Entropy,
    /// h(x) = ½‖x − center‖₂² on the body; choice map is Euclidean
    /// projection of `y + center`.
    Euclidean { center: Vec<f64> },
    /// Caller-supplied strictly convex evaluator. The closure must be
    /// defined on a neighborhood of the body (the wrapper enforces the
    /// effective domain); an optional gradient closure avoids the
    /// finite-difference fallback inside the choice-map ascent.
    Generic {
        value: ValueFn,
        gradient: Option<GradientFn>,
    },
}

impl fmt::Debug for RegularizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Entropy => write!(f, "Entropy"),
            Self::Euclidean { center } => write!(f, "Euclidean {{ center: {center:?} }}"),
            Self::Generic { .. } => write!(f, "Generic"),
        }
    }
}

/// A regularizer function `h` on a convex body: strictly convex, continuous,
/// finite exactly on the body, together with its strong-convexity modulus
/// `K` with respect to the body norm and the precomputed range
/// `[h_min, h_max]` whose width (the depth) drives every regret bound.
#[derive(Debug, Clone)]
pub struct Regularizer {
    body: ConvexBody,
    kind: RegularizerKind,
    strong_convexity: f64,
    h_min: f64,
    h_max: f64,
    depth_approximate: bool,
}

const ASCENT_TOL: f64 = 1e-10;
const ASCENT_MAX_ITERS: usize = 100_000;
const RANGE_SAMPLES: usize = 10_000;

impl Regularizer {
    /// Entropy regularizer on Δ_dim: 1-strongly convex w.r.t. ‖·‖₁,
    /// depth log(dim).
    pub fn entropy(dim: usize) -> Result<Self> {
        let body = ConvexBody::simplex(dim)?;
        Ok(Self {
            body,
            kind: RegularizerKind::Entropy,
            strong_convexity: 1.0,
            h_min: -(dim as f64).ln(),
            h_max: 0.0,
            depth_approximate: false,
        })
    }

    /// Euclidean regularizer ½‖x − center‖₂² on the body: 1-strongly convex
    /// w.r.t. ‖·‖₂. The center may lie outside the body.
    pub fn euclidean(body: ConvexBody, center: Vec<f64>) -> Result<Self> {
        check_finite(&center, "regularizer center")?;
        check_dim(&center, body.dim())?;
        if matches!(body.kind(), BodyKind::VertexPolytope { .. }) {
            return Err(Error::UnsupportedProjection(
                "Euclidean regularizer needs a projectable body".into(),
            ));
        }
        let body = body.with_norm(Norm::L2);
        let nearest = body.project(&center)?;
        let h_min = 0.5
            * nearest
                .iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        let h_max = match body.kind() {
            BodyKind::Simplex => {
                let mut best = f64::NEG_INFINITY;
                for i in 0..body.dim() {
                    let mut d2 = 0.0;
                    for (j, &c) in center.iter().enumerate() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        d2 += (e - c) * (e - c);
                    }
                    best = best.max(0.5 * d2);
                }
                best
            }
            BodyKind::Box { lower, upper } => {
                // max of a separable convex function over a box splits
                // coordinatewise.
                0.5 * lower
                    .iter()
                    .zip(upper)
                    .zip(&center)
                    .map(|((&l, &u), &c)| (l - c).powi(2).max((u - c).powi(2)))
                    .sum::<f64>()
            }
            BodyKind::L2Ball { center: bc, radius } => {
                let d = bc
                    .iter()
                    .zip(&center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                0.5 * (d + radius) * (d + radius)
            }
            BodyKind::VertexPolytope { .. } => unreachable!(),
        };
        Ok(Self {
            body,
            kind: RegularizerKind::Euclidean { center },
            strong_convexity: 1.0,
            h_min,
            h_max,
            depth_approximate: false,
        })
    }

    /// Generic regularizer from an evaluator and its strong-convexity
    /// modulus w.r.t. the body norm. The range [h_min, h_max] is computed at
    /// construction: the minimum exactly via the choice map at 0, the
    /// maximum over the vertex list when one exists, otherwise over 10⁴
    /// quasi-random samples projected onto the body (flagged approximate).
    pub fn generic(
        body: ConvexBody,
        strong_convexity: f64,
        value: ValueFn,
        gradient: Option<GradientFn>,
    ) -> Result<Self> {
        if matches!(body.kind(), BodyKind::VertexPolytope { .. }) {
            return Err(Error::UnsupportedProjection(
                "generic choice maps are disallowed on vertex polytopes".into(),
            ));
        }
        if !strong_convexity.is_finite() || strong_convexity < 0.0 {
            return Err(Error::InvalidInput(
                "strong-convexity modulus must be ≥ 0".into(),
            ));
        }
        let mut reg = Self {
            body,
            kind: RegularizerKind::Generic { value, gradient },
            strong_convexity,
            h_min: 0.0,
            h_max: 0.0,
            depth_approximate: false,
        };
        let minimizer = reg.choice(&vec![0.0; reg.body.dim()])?;
        let h_min = reg.raw_value(&minimizer);
        let (h_max, approximate) = match reg.body.vertices() {
            Some(vertices) => {
                let mut best = f64::NEG_INFINITY;
                for v in &vertices {
                    best = best.max(reg.raw_value(v));
                }
                (best, false)
            }
            None => (reg.sampled_max()?, true),
        };
        if !h_min.is_finite() || !h_max.is_finite() || h_max < h_min {
            return Err(Error::InvalidInput(
                "generic regularizer evaluated to an unusable range".into(),
            ));
        }
        reg.h_min = h_min;
        reg.h_max = h_max;
        reg.depth_approximate = approximate;
        Ok(reg)
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn kind(&self) -> &RegularizerKind {
        &self.kind
    }

    /// Strong-convexity modulus K w.r.t. the body norm; the choice map is
    /// then 1/K-Lipschitz from the dual norm.
    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// Depth h_max − h_min, the continuous-time regret constant.
    pub fn depth(&self) -> f64 {
        self.h_max - self.h_min
    }

    /// True when h_max was estimated by sampling rather than computed from
    /// a vertex list or a closed form.
    pub fn depth_is_approximate(&self) -> bool {
        self.depth_approximate
    }

    /// h(x). Errors with `OutOfDomain` when x is not in the body.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_finite(x, "regularizer argument")?;
        check_dim(x, self.body.dim())?;
        if !self.body.contains(x) {
            return Err(Error::OutOfDomain(format!(
                "h is finite only on the body ({:?})",
                self.body.kind()
            )));
        }
        Ok(self.raw_value(x))
    }

    fn raw_value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            RegularizerKind::Entropy => x
                .iter()
                .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
                .sum(),
            RegularizerKind::Euclidean { center } => {
                0.5 * x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            }
            RegularizerKind::Generic { value, .. } => value(x),
        }
    }

    /// The choice map Q_h(y) = argmax_{x∈C} { ⟨y,x⟩ − h(x) }.
    pub fn choice(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_finite(y, "dual score")?;
        check_dim(y, self.body.dim())?;
        match &self.kind {
            RegularizerKind::Entropy => logit_choice(y),
            RegularizerKind::Euclidean { center } => {
                let shifted: Vec<f64> = y.iter().zip(center).map(|(a, b)| a + b).collect();
                self.body.project(&shifted)
            }
            RegularizerKind::Generic { value, gradient } => {
                self.ascend(y, value, gradient.as_ref())
            }
        }
    }

    /// Projected gradient ascent on x ↦ ⟨y,x⟩ − h(x) with fixed step
    /// 1/(K + ‖y‖_*), stopping when successive iterates differ by < 1e-10
    /// in ‖·‖₂ or after 10⁵ iterations.
    fn ascend(
        &self,
        y: &[f64],
        value: &ValueFn,
        gradient: Option<&GradientFn>,
    ) -> Result<Vec<f64>> {
        let step = 1.0 / (self.strong_convexity + self.body.norm().dual_eval(y)).max(1e-9);
        let mut x = self.body.project(&vec![0.0; self.body.dim()])?;
        let mut residual = f64::INFINITY;
        for _ in 0..ASCENT_MAX_ITERS {
            let grad_h = match gradient {
                Some(g) => g(&x),
                None => central_difference(value.as_ref(), &x),
            };
            let moved: Vec<f64> = x
                .iter()
                .zip(y)
                .zip(&grad_h)
                .map(|((&xi, &yi), &gi)| xi + step * (yi - gi))
                .collect();
            let next = self.body.project(&moved)?;
            residual = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            x = next;
            if residual < ASCENT_TOL {
                return Ok(x);
            }
        }
        Err(Error::NonConvergence { residual })
    }

    /// h*(y) = sup_x { ⟨y,x⟩ − h(x) }. Entropy uses shift-stable
    /// log-sum-exp; other kinds evaluate the supremum at Q_h(y).
    pub fn conjugate(&self, y: &[f64]) -> Result<f64> {
        check_finite(y, "dual score")?;
        check_dim(y, self.body.dim())?;
        match &self.kind {
            RegularizerKind::Entropy => Ok(log_sum_exp(y)),
            _ => {
                let q = self.choice(y)?;
                Ok(dot(y, &q) - self.raw_value(&q))
            }
        }
    }

    /// Bregman divergence of the conjugate,
    /// D_{h*}(y1, y2) = h*(y1) − h*(y2) − ⟨y1 − y2, Q_h(y2)⟩ ≥ 0,
    /// using ∇h* = Q_h.
    pub fn bregman_conjugate(&self, y1: &[f64], y2: &[f64]) -> Result<f64> {
        check_finite(y1, "dual score")?;
        check_finite(y2, "dual score")?;
        check_dim(y1, self.body.dim())?;
        check_dim(y2, self.body.dim())?;
        let q2 = self.choice(y2)?;
        let inner: f64 = y1
            .iter()
            .zip(y2)
            .zip(&q2)
            .map(|((a, b), q)| (a - b) * q)
            .sum();
        Ok(self.conjugate(y1)? - self.conjugate(y2)? - inner)
    }

    /// Max h(x) over 10⁴ quasi-random points of the body (Kronecker lattice
    /// in the enclosing box, projected onto the body).
    fn sampled_max(&self) -> Result<f64> {
        let d = self.body.dim();
        let (lo, hi) = self.body.enclosing_box();
        let alphas = kronecker_alphas(d);
        let mut point = vec![0.5f64; d];
        let mut best = f64::NEG_INFINITY;
        for _ in 0..RANGE_SAMPLES {
            for i in 0..d {
                point[i] = (point[i] + alphas[i]).fract();
            }
            let cube: Vec<f64> = (0..d).map(|i| lo[i] + point[i] * (hi[i] - lo[i])).collect();
            let x = self.body.project(&cube)?;
            best = best.max(self.raw_value(&x));
        }
        Ok(best)
    }
}

/// Central finite-difference gradient of a scalar function.
fn central_difference(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), x: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let eps = 1e-7 * (1.0 + x[i].abs());
        probe[i] = x[i] + eps;
        let hi = f(&probe);
        probe[i] = x[i] - eps;
        let lo = f(&probe);
        probe[i] = x[i];
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    grad
}

/// Coordinates of the d-dimensional Kronecker (R_d) low-discrepancy
/// sequence: powers of the inverse of the generalized golden ratio.
fn kronecker_alphas(d: usize) -> Vec<f64> {
    // Unique positive root of x^{d+1} = x + 1 via a few Newton steps.
    let mut g = 1.5f64;
    for _ in 0..64 {
        let p = g.powi(d as i32 + 1) - g - 1.0;
        let dp = (d as f64 + 1.0) * g.powi(d as i32) - 1.0;
        g -= p / dp;
    }
    (1..=d).map(|i| (1.0 / g).powi(i as i32).fract()).collect()
}

/// Compares central finite differences of h* against the choice-map
/// coordinates (∇h* = Q_h) and returns the largest relative error,
/// |fd_i − Q_i| / max(1, |Q_i|).
pub fn check_gradient(reg: &Regularizer, y: &[f64], eps: f64) -> Result<f64> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    check_finite(y, "dual score")?;
    check_dim(y, reg.body().dim())?;
    let q = reg.choice(y)?;
    let mut probe = y.to_vec();
    let mut worst = 0.0f64;
    for i in 0..y.len() {
        probe[i] = y[i] + eps;
        let hi = reg.conjugate(&probe)?;
        probe[i] = y[i] - eps;
        let lo = reg.conjugate(&probe)?;
        probe[i] = y[i];
        let fd = (hi - lo) / (2.0 * eps);
        worst = worst.max((fd - q[i]).abs() / q[i].abs().max(1.0));
    }
    Ok(worst)
}

/// A Euclidean ball returned by the smallest-enclosing-ball iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

const MEB_MAX_ITERS: usize = 1_000_000;

/// Smallest enclosing ball of a point set via the Badoiu–Clarkson
/// iteration c ← c + (p_far − c)/(k+1), keeping the best center seen.
///
/// The iteration count is the 10⁶ cap of the 1/ε² schedule (ε = 1e-6);
/// on the point sets that arise here the relative radius optimality gap
/// is well below 1e-4. The returned radius is the exact maximum distance
/// to the returned center.
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point list must be nonempty".into()));
    }
    let dim = points[0].len();
    for p in points {
        check_finite(p, "point")?;
        check_dim(p, dim)?;
    }
    if points.len() == 1 {
        return Ok(Ball {
            center: points[0].clone(),
            radius: 0.0,
        });
    }
    let mut center = points[0].clone();
    let mut best_center = center.clone();
    let mut best_radius = f64::INFINITY;
    for k in 1..=MEB_MAX_ITERS {
        let mut far = 0;
        let mut far_dist2 = 0.0f64;
        for (i, p) in points.iter().enumerate() {
            let d2: f64 = p.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 > far_dist2 {
                far_dist2 = d2;
                far = i;
            }
        }
        let radius = far_dist2.sqrt();
        if radius < best_radius {
            best_radius = radius;
            best_center.copy_from_slice(&center);
        }
        if radius == 0.0 {
            break;
        }
        let scale = 1.0 / (k + 1) as f64;
        for (c, p) in center.iter_mut().zip(&points[far]) {
            *c += scale * (p - *c);
        }
    }
    Ok(Ball {
        center: best_center,
        radius: best_radius,
    })
}

/// Minimal-depth Euclidean regularizer: centered at the smallest enclosing
/// ball of the body, with depth r²/2 — the least possible among 1-strongly
/// convex regularizers w.r.t. ‖·‖₂.
pub fn minimal_depth_regularizer(body: &ConvexBody) -> Result<Regularizer> {
    let ball = match body.kind() {
        BodyKind::L2Ball { center, radius } => Ball {
            center: center.clone(),
            radius: *radius,
        },
        _ => {
            let vertices = body
                .vertices()
                .ok_or_else(|| Error::InvalidInput("body has no vertex list to enclose".into()))?;
            min_enclosing_ball(&vertices)?
        }
    };
    Regularizer::euclidean(body.clone(), ball.center)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn logit_uniform_at_zero() {
        let x = logit_choice(&[0.0, 0.0, 0.0]).unwrap();
        assert_close(&x, &[1.0 / 3.0; 3], 1e-15);
    }

    #[test]
    fn logit_hand_value() {
        // (e^{log 2}, e^0) normalized = (2/3, 1/3).
        let x = logit_choice(&[2.0f64.ln(), 0.0]).unwrap();
        assert_close(&x, &[2.0 / 3.0, 1.0 / 3.0], 1e-15);
    }

    #[test]
    fn logit_shift_invariance() {
        let x = logit_choice(&[1.0, 1.0]).unwrap();
        assert_close(&x, &[0.5, 0.5], 1e-15);
        let a = logit_choice(&[0.3, -0.7, 0.1]).unwrap();
        let b = logit_choice(&[0.3 + 5.0, -0.7 + 5.0, 0.1 + 5.0]).unwrap();
        assert_close(&a, &b, 1e-12);
    }

    #[test]
    fn logit_rejects_non_finite() {
        assert!(logit_choice(&[f64::NAN, 0.0]).is_err());
        assert!(logit_choice(&[f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn simplex_projection_examples() {
        assert_close(&project_simplex(&[0.2, 0.8]).unwrap(), &[0.2, 0.8], 1e-12);
        assert_close(&project_simplex(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-12);
        assert_close(&project_simplex(&[1.0, 1.0]).unwrap(), &[0.5, 0.5], 1e-12);
    }

    // Brute-force oracle: dense grid over Δ_2.
    #[test]
    fn simplex_projection_matches_grid() {
        let y = [2.0, 0.0];
        let p = project_simplex(&y).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        let n = 100_000;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let d2 = (y[0] - t).powi(2) + (y[1] - (1.0 - t)).powi(2);
            if d2 < best.0 {
                best = (d2, t);
            }
        }
        assert!((p[0] - best.1).abs() < 1e-4);
    }

    #[test]
    fn body_projections() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_close(&ball.project(&[3.0, 4.0]).unwrap(), &[0.6, 0.8], 1e-12);

        let cube = ConvexBody::bounded_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_close(&cube.project(&[-1.0, 0.5]).unwrap(), &[0.0, 0.5], 1e-12);

        let simplex = ConvexBody::simplex(2).unwrap();
        assert_close(&simplex.project(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-12);

        let poly = ConvexBody::vertex_polytope(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            poly.project(&[0.5]),
            Err(Error::UnsupportedProjection(_))
        ));
    }

    #[test]
    fn projection_lands_in_body() {
        let bodies = [
            ConvexBody::simplex(4).unwrap(),
            ConvexBody::bounded_box(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 3.0]).unwrap(),
            ConvexBody::l2_ball(vec![1.0, -2.0], 0.7).unwrap(),
        ];
        let mut rng = crate::SplitMix64::new(11);
        for body in &bodies {
            for _ in 0..200 {
                let y: Vec<f64> = (0..body.dim()).map(|_| rng.next_symmetric(5.0)).collect();
                let p = body.project(&y).unwrap();
                assert!(body.contains(&p), "{y:?} -> {p:?}");
            }
        }
    }

    #[test]
    fn linear_max_tie_breaks_low_index() {
        let poly =
            ConvexBody::vertex_polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]])
                .unwrap();
        let arg = poly.linear_max(&[1.0, 1.0]).unwrap();
        assert_close(&arg, &[1.0, 0.0], 0.0);

        let simplex = ConvexBody::simplex(3).unwrap();
        assert_close(
            &simplex.linear_max(&[2.0, 2.0, 1.0]).unwrap(),
            &[1.0, 0.0, 0.0],
            0.0,
        );
    }

    #[test]
    fn choice_map_dispatch() {
        let ent = Regularizer::entropy(3).unwrap();
        assert_close(&ent.choice(&[0.0; 3]).unwrap(), &[1.0 / 3.0; 3], 1e-15);

        let cube = ConvexBody::bounded_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let euc = Regularizer::euclidean(cube, vec![0.0, 0.0]).unwrap();
        assert_close(&euc.choice(&[2.0, 0.5]).unwrap(), &[1.0, 0.5], 1e-12);
    }

    #[test]
    fn generic_choice_matches_euclidean() {
        let simplex = ConvexBody::simplex(2).unwrap();
        let gen = Regularizer::generic(
            simplex.clone(),
            1.0,
            Arc::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            Some(Arc::new(|x: &[f64]| x.to_vec())),
        )
        .unwrap();
        let q = gen.choice(&[1.0, 0.0]).unwrap();
        assert_close(&q, &[1.0, 0.0], 1e-8);

        let euc = Regularizer::euclidean(simplex, vec![0.0, 0.0]).unwrap();
        let q2 = euc.choice(&[1.0, 0.0]).unwrap();
        assert_close(&q, &q2, 1e-8);
    }

    #[test]
    fn generic_finite_difference_fallback() {
        let simplex = ConvexBody::simplex(2).unwrap();
        let gen = Regularizer::generic(
            simplex,
            1.0,
            Arc::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            None,
        )
        .unwrap();
        let q = gen.choice(&[0.4, 0.1]).unwrap();
        // Interior solution: x = proj_simplex(y) here.
        let expect = project_simplex(&[0.4, 0.1]).unwrap();
        assert_close(&q, &expect, 1e-6);
    }

    #[test]
    fn conjugate_values() {
        let ent = Regularizer::entropy(3).unwrap();
        assert!((ent.conjugate(&[0.0; 3]).unwrap() - 3.0f64.ln()).abs() < 1e-14);

        let ent2 = Regularizer::entropy(2).unwrap();
        let got = ent2.conjugate(&[1.0, 0.0]).unwrap();
        assert!((got - (1.0f64.exp() + 1.0).ln()).abs() < 1e-14);

        let simplex = ConvexBody::simplex(2).unwrap();
        let euc = Regularizer::euclidean(simplex, vec![0.0, 0.0]).unwrap();
        assert!((euc.conjugate(&[0.0, 0.0]).unwrap() - (-0.25)).abs() < 1e-12);
    }

    // Grid oracle for the Euclidean conjugate on Δ_2.
    #[test]
    fn conjugate_matches_grid_supremum() {
        let simplex = ConvexBody::simplex(2).unwrap();
        let euc = Regularizer::euclidean(simplex, vec![0.0, 0.0]).unwrap();
        let y = [0.3, -0.4];
        let mut best = f64::NEG_INFINITY;
        let n = 100_000;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let x = [t, 1.0 - t];
            best = best.max(y[0] * x[0] + y[1] * x[1] - 0.5 * (x[0] * x[0] + x[1] * x[1]));
        }
        assert!((euc.conjugate(&y).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn bregman_conjugate_values() {
        let ent = Regularizer::entropy(2).unwrap();
        assert!(
            ent.bregman_conjugate(&[0.7, -0.3], &[0.7, -0.3])
                .unwrap()
                .abs()
                < 1e-14
        );

        let ent1 = Regularizer::entropy(1).unwrap();
        assert!(ent1.bregman_conjugate(&[3.0], &[-1.0]).unwrap().abs() < 1e-14);

        let expect = ((1.0f64.exp() + 1.0) / 2.0).ln() - 0.5;
        let got = ent.bregman_conjugate(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    #[test]
    fn gradient_check_examples() {
        let ent = Regularizer::entropy(3).unwrap();
        assert!(check_gradient(&ent, &[0.3, -0.2, 0.1], 1e-6).unwrap() < 1e-5);

        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let euc = Regularizer::euclidean(ball, vec![0.0, 0.0]).unwrap();
        // Interior score: projection is locally the identity.
        assert!(check_gradient(&euc, &[0.2, -0.3], 1e-6).unwrap() < 1e-5);

        // d = 1: both sides are constant 1; dyadic inputs keep the
        // difference quotient exact.
        let ent1 = Regularizer::entropy(1).unwrap();
        let err = check_gradient(&ent1, &[0.25], 2.0f64.powi(-20)).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn meb_examples() {
        let b = min_enclosing_ball(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_close(&b.center, &[0.5, 0.0], 1e-6);
        assert!((b.radius - 0.5).abs() < 1e-6);

        let tri = min_enclosing_ball(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_close(&tri.center, &[1.0 / 3.0; 3], 1e-4);
        assert!((tri.radius - (2.0f64 / 3.0).sqrt()).abs() < 1e-4);

        let right = min_enclosing_ball(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_close(&right.center, &[1.0, 1.0], 1e-3);
        assert!((right.radius - 2.0f64.sqrt()).abs() < 1e-4);

        assert!(min_enclosing_ball(&[]).is_err());
    }

    #[test]
    fn meb_contains_generators() {
        let pts = vec![
            vec![0.3, -0.7, 1.1],
            vec![-0.2, 0.4, 0.9],
            vec![1.3, 0.1, -0.2],
            vec![0.0, 0.0, 0.0],
        ];
        let b = min_enclosing_ball(&pts).unwrap();
        for p in &pts {
            let d: f64 = p
                .iter()
                .zip(&b.center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum::<f64>()
                .sqrt();
            assert!(d <= b.radius + 1e-9);
        }
    }

    #[test]
    fn minimal_depth_examples() {
        let seg = ConvexBody::simplex(2).unwrap();
        let reg = minimal_depth_regularizer(&seg).unwrap();
        assert!((reg.depth() - 0.25).abs() < 1e-6);

        let cube = ConvexBody::bounded_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let reg = minimal_depth_regularizer(&cube).unwrap();
        assert!((reg.depth() - 0.25).abs() < 1e-6);

        let point = ConvexBody::bounded_box(vec![0.3], vec![0.3]).unwrap();
        let reg = minimal_depth_regularizer(&point).unwrap();
        assert!(reg.depth().abs() < 1e-12);
    }

    #[test]
    fn depth_values() {
        assert!((Regularizer::entropy(2).unwrap().depth() - 2.0f64.ln()).abs() < 1e-14);
        assert_eq!(Regularizer::entropy(1).unwrap().depth(), 0.0);

        let simplex = ConvexBody::simplex(2).unwrap();
        let euc = Regularizer::euclidean(simplex, vec![0.0, 0.0]).unwrap();
        assert!((euc.depth() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn generic_depth_on_ball_is_flagged() {
        let ball = ConvexBody::l2_ball(vec![0.0, 0.0], 1.0).unwrap();
        let gen = Regularizer::generic(
            ball,
            1.0,
            Arc::new(|x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            Some(Arc::new(|x: &[f64]| x.to_vec())),
        )
        .unwrap();
        assert!(gen.depth_is_approximate());
        // True depth is 1/2 (max on the sphere, min at the center).
        assert!((gen.depth() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn entropy_domain_is_enforced() {
        let ent = Regularizer::entropy(2).unwrap();
        assert!(ent.eval(&[0.5, 0.5]).is_ok());
        assert!(matches!(ent.eval(&[0.9, 0.3]), Err(Error::OutOfDomain(_))));
    }
}
