//! Positive nonincreasing parameter sequences η_n and their partial sums.
//!
//! Every schedule observes the convention η_0 = η_1, so that the stage-k
//! comparison terms Σ η_{k-1}·… are well defined from k = 1.

use crate::{Error, Result};

/// A parameter sequence η_n, n ≥ 1 (with η_0 = η_1 by convention).
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// η_n = η.
    Constant { eta: f64 },
    /// η_n = η/√n.
    InvSqrt { eta: f64 },
    /// η_n = η/n (the smooth-fictitious-play rate).
    Harmonic { eta: f64 },
    /// η_n = η·n^{−α} with α ∈ (0, 1).
    Power { eta: f64, alpha: f64 },
    /// η_n = √(K·depth/(M²·n)), the parameter that turns the two-term
    /// regret bound into an anytime √n guarantee.
    Anytime {
        strong_convexity: f64,
        depth: f64,
        payoff_bound: f64,
    },
    /// Doubling-trick reference schedule: η halves at each block boundary
    /// n = 2, 4, 8, …; constant within blocks. Score resets at boundaries
    /// are strategy semantics, signalled through [`Schedule::is_block_start`].
    Doubling { eta: f64 },
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be positive")))
    }
}

impl Schedule {
    pub fn constant(eta: f64) -> Result<Self> {
        positive(eta, "eta")?;
        Ok(Self::Constant { eta })
    }

    pub fn inv_sqrt(eta: f64) -> Result<Self> {
        positive(eta, "eta")?;
        Ok(Self::InvSqrt { eta })
    }

    pub fn harmonic(eta: f64) -> Result<Self> {
        positive(eta, "eta")?;
        Ok(Self::Harmonic { eta })
    }

    pub fn power(eta: f64, alpha: f64) -> Result<Self> {
        positive(eta, "eta")?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
        }
        Ok(Self::Power { eta, alpha })
    }

    pub fn anytime(strong_convexity: f64, depth: f64, payoff_bound: f64) -> Result<Self> {
        positive(strong_convexity, "strong-convexity modulus")?;
        positive(depth, "depth")?;
        positive(payoff_bound, "payoff bound")?;
        Ok(Self::Anytime {
            strong_convexity,
            depth,
            payoff_bound,
        })
    }

    pub fn doubling(eta: f64) -> Result<Self> {
        positive(eta, "eta")?;
        Ok(Self::Doubling { eta })
    }

    /// η_n, with η_0 = η_1.
    pub fn value_at(&self, n: u64) -> f64 {
        let n = n.max(1);
        match self {
            Self::Constant { eta } => *eta,
            Self::InvSqrt { eta } => eta / (n as f64).sqrt(),
            Self::Harmonic { eta } => eta / n as f64,
            Self::Power { eta, alpha } => eta * (n as f64).powf(-alpha),
            Self::Anytime {
                strong_convexity,
                depth,
                payoff_bound,
            } => (strong_convexity * depth / (payoff_bound * payoff_bound * n as f64)).sqrt(),
            Self::Doubling { eta } => eta * 0.5f64.powi(block_index(n) as i32),
        }
    }

    /// Σ_{k=1}^n η_{k-1} by direct left-to-right summation, so that
    /// `partial_sum(n) == partial_sum(n-1) + value_at(n-1)` holds bitwise.
    pub fn partial_sum(&self, n: u64) -> f64 {
        let mut total = 0.0;
        for k in 1..=n {
            total += self.value_at(k - 1);
        }
        total
    }

    /// True when stage n opens a new doubling block (n = 2^m, m ≥ 1);
    /// always false for the other kinds.
    pub fn is_block_start(&self, n: u64) -> bool {
        matches!(self, Self::Doubling { .. }) && n >= 2 && n.is_power_of_two()
    }
}

/// Doubling block of stage n ≥ 1: ⌊log2 n⌋.
fn block_index(n: u64) -> u32 {
    63 - n.leading_zeros()
}

/// The constant parameter minimizing depth/η + M²ηn/(2K) over η > 0 for a
/// known horizon: √(2K·depth/(M²·n)). For K = M = 1 and depth = log d this
/// is the classical √(2 log d / n).
pub fn optimal_constant(
    strong_convexity: f64,
    depth: f64,
    payoff_bound: f64,
    horizon: f64,
) -> Result<f64> {
    positive(strong_convexity, "strong-convexity modulus")?;
    positive(depth, "depth")?;
    positive(payoff_bound, "payoff bound")?;
    positive(horizon, "horizon")?;
    Ok((2.0 * strong_convexity * depth / (payoff_bound * payoff_bound * horizon)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_examples() {
        assert_eq!(Schedule::inv_sqrt(1.0).unwrap().value_at(4), 0.5);
        assert_eq!(Schedule::harmonic(2.0).unwrap().value_at(0), 2.0);
        assert!((Schedule::power(1.0, 0.5).unwrap().value_at(9) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eta_zero_equals_eta_one() {
        let schedules = [
            Schedule::constant(0.7).unwrap(),
            Schedule::inv_sqrt(0.7).unwrap(),
            Schedule::harmonic(0.7).unwrap(),
            Schedule::power(0.7, 0.25).unwrap(),
            Schedule::anytime(1.0, 2.0, 1.0).unwrap(),
            Schedule::doubling(0.7).unwrap(),
        ];
        for s in &schedules {
            assert_eq!(s.value_at(0), s.value_at(1));
        }
    }

    #[test]
    fn partial_sum_is_incremental() {
        let s = Schedule::inv_sqrt(1.3).unwrap();
        for n in 1..200u64 {
            assert_eq!(s.partial_sum(n), s.partial_sum(n - 1) + s.value_at(n - 1));
        }
    }

    #[test]
    fn partial_sum_bounds_from_the_proofs() {
        // Constant: n·η.
        let c = Schedule::constant(0.4).unwrap();
        assert!((c.partial_sum(100) - 40.0).abs() < 1e-12);

        // Inverse square root: ≤ η(1 + 2√n).
        let s = Schedule::inv_sqrt(0.9).unwrap();
        for n in [1u64, 10, 100, 10_000] {
            assert!(s.partial_sum(n) <= 0.9 * (1.0 + 2.0 * (n as f64).sqrt()) + 1e-12);
        }

        // Power: ≤ η(1 + n^{1−α}/(1−α)).
        for alpha in [0.25, 0.5, 0.75] {
            let p = Schedule::power(1.1, alpha).unwrap();
            for n in [1u64, 10, 1000] {
                let cap = 1.1 * (1.0 + (n as f64).powf(1.0 - alpha) / (1.0 - alpha));
                assert!(p.partial_sum(n) <= cap + 1e-12);
            }
        }
    }

    #[test]
    fn monotone_nonincreasing() {
        let schedules = [
            Schedule::constant(1.0).unwrap(),
            Schedule::inv_sqrt(2.0).unwrap(),
            Schedule::harmonic(0.3).unwrap(),
            Schedule::power(1.5, 0.75).unwrap(),
            Schedule::anytime(2.0, 0.8, 1.5).unwrap(),
            Schedule::doubling(1.0).unwrap(),
        ];
        for s in &schedules {
            for n in 1..10_000u64 {
                assert!(s.value_at(n + 1) <= s.value_at(n), "{s:?} increases at {n}");
            }
        }
    }

    #[test]
    fn doubling_blocks() {
        let s = Schedule::doubling(1.0).unwrap();
        assert_eq!(s.value_at(1), 1.0);
        assert_eq!(s.value_at(2), 0.5);
        assert_eq!(s.value_at(3), 0.5);
        assert_eq!(s.value_at(4), 0.25);
        assert_eq!(s.value_at(7), 0.25);
        assert_eq!(s.value_at(8), 0.125);
        assert!(s.is_block_start(2));
        assert!(s.is_block_start(8));
        assert!(!s.is_block_start(1));
        assert!(!s.is_block_start(3));
        assert!(!Schedule::constant(1.0).unwrap().is_block_start(2));
    }

    #[test]
    fn optimal_constant_values() {
        let d = 10.0f64;
        let got = optimal_constant(1.0, d.ln(), 1.0, 100.0).unwrap();
        assert!((got - (2.0 * d.ln() / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(optimal_constant(1.0, 2.0, 1.0, 16.0).unwrap(), 0.5);
        assert!(optimal_constant(1.0, -1.0, 1.0, 4.0).is_err());
    }
}
