//! The score-and-choose strategy family and its named instantiations.
//!
//! A strategy aggregates revealed payoff vectors into a dual score
//! U_n = Σ_{k≤n} u_k and plays x_{n+1} = Q_h(η_n U_n), starting from
//! x_1 = Q_h(0). Specializations:
//!
//! | name  | regularizer | schedule       |
//! |-------|-------------|----------------|
//! | EW    | entropy     | constant η     |
//! | EW′   | entropy     | η/√n           |
//! | SFP   | any         | η/n            |
//! | VSFP  | any         | η·n^{−α}       |
//! | OGD-L | Euclidean   | constant η     |
//! | OMD-L | any         | constant η     |

use crate::environments::PayoffStream;
use crate::geometry::Regularizer;
use crate::linalg::{check_dim, check_finite};
use crate::schedules::Schedule;
use crate::Result;

/// Mutable state of a strategy: cumulative dual score, stage counter, and
/// the action prepared for the next stage.
#[derive(Debug, Clone)]
pub struct Strategy {
    regularizer: Regularizer,
    schedule: Schedule,
    scores: Vec<f64>,
    stage: u64,
    action: Vec<f64>,
}

impl Strategy {
    /// Starts at stage 0 with U = 0 and x_1 = Q_h(0).
    pub fn new(regularizer: Regularizer, schedule: Schedule) -> Result<Self> {
        let dim = regularizer.body().dim();
        let action = regularizer.choice(&vec![0.0; dim])?;
        Ok(Self {
            regularizer,
            schedule,
            scores: vec![0.0; dim],
            stage: 0,
            action,
        })
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.regularizer
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Number of payoffs absorbed so far.
    pub fn stage(&self) -> u64 {
        self.stage
    }

    /// Cumulative payoff sum U_n.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// The action x_{n+1} that the strategy plays next.
    pub fn action(&self) -> &[f64] {
        &self.action
    }

    /// Absorbs the stage-(n+1) payoff: U += u, n += 1,
    /// x_{n+1} = Q_h(η_n·U). On a doubling-schedule block boundary the
    /// score resets to 0 first (the algorithm restarts for the new block).
    pub fn step(&mut self, payoff: &[f64]) -> Result<&[f64]> {
        check_finite(payoff, "payoff vector")?;
        check_dim(payoff, self.scores.len())?;
        let next = self.stage + 1;
        if self.schedule.is_block_start(next) {
            self.scores.iter_mut().for_each(|s| *s = 0.0);
        }
        for (s, u) in self.scores.iter_mut().zip(payoff) {
            *s += u;
        }
        self.stage = next;
        let eta = self.schedule.value_at(self.stage);
        let scaled: Vec<f64> = self.scores.iter().map(|s| eta * s).collect();
        self.action = self.regularizer.choice(&scaled)?;
        Ok(&self.action)
    }
}

/// The named members of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedAlgorithm {
    Ew,
    EwPrime,
    Sfp,
    Vsfp,
    OgdLazy,
    OmdLazy,
}

impl NamedAlgorithm {
    pub const ALL: [NamedAlgorithm; 6] = [
        Self::Ew,
        Self::EwPrime,
        Self::Sfp,
        Self::Vsfp,
        Self::OgdLazy,
        Self::OmdLazy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ew => "EW",
            Self::EwPrime => "EW_PRIME",
            Self::Sfp => "SFP",
            Self::Vsfp => "VSFP",
            Self::OgdLazy => "OGD_L",
            Self::OmdLazy => "OMD_L",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let canon: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '\'')
            .map(|c| c.to_ascii_uppercase())
            .collect();
        match canon.as_str() {
            "EW" => Some(Self::Ew),
            "EWPRIME" | "EW'" | "EWP" => Some(Self::EwPrime),
            "SFP" => Some(Self::Sfp),
            "VSFP" => Some(Self::Vsfp),
            "OGDL" | "OGD" => Some(Self::OgdLazy),
            "OMDL" | "OMD" => Some(Self::OmdLazy),
            _ => None,
        }
    }
}

/// Builds a named strategy from a regularizer and its parameters. The
/// schedule kind is fixed by the name; EW/EW′ require the entropy
/// regularizer and OGD-L the Euclidean one; VSFP needs α ∈ (0, 1).
pub fn make_named(
    name: NamedAlgorithm,
    regularizer: Regularizer,
    eta: f64,
    alpha: Option<f64>,
) -> Result<Strategy> {
    use crate::geometry::RegularizerKind;
    use crate::Error;

    match name {
        NamedAlgorithm::Ew | NamedAlgorithm::EwPrime
            if !matches!(regularizer.kind(), RegularizerKind::Entropy) =>
        {
            return Err(Error::InvalidInput(
                "exponential weights requires the entropy regularizer".into(),
            ));
        }
        NamedAlgorithm::OgdLazy
            if !matches!(regularizer.kind(), RegularizerKind::Euclidean { .. }) =>
        {
            return Err(Error::InvalidInput(
                "lazy online gradient descent requires the Euclidean regularizer".into(),
            ));
        }
        _ => {}
    }
    let schedule = match name {
        NamedAlgorithm::Ew | NamedAlgorithm::OgdLazy | NamedAlgorithm::OmdLazy => {
            Schedule::constant(eta)?
        }
        NamedAlgorithm::EwPrime => Schedule::inv_sqrt(eta)?,
        NamedAlgorithm::Sfp => Schedule::harmonic(eta)?,
        NamedAlgorithm::Vsfp => {
            let alpha =
                alpha.ok_or_else(|| Error::InvalidInput("VSFP needs the exponent alpha".into()))?;
            Schedule::power(eta, alpha)?
        }
    };
    Strategy::new(regularizer, schedule)
}

/// Actions and payoffs of a finished run: actions x_1, …, x_{n+1} and
/// payoffs u_1, …, u_n.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub actions: Vec<Vec<f64>>,
    pub payoffs: Vec<Vec<f64>>,
}

/// Plays the strategy against a payoff stream for `stages` rounds.
/// Adaptive streams see x_n before emitting u_n.
pub fn play_sequence(
    strategy: &mut Strategy,
    stream: &mut PayoffStream,
    stages: u64,
) -> Result<Trajectory> {
    let mut trajectory = Trajectory {
        actions: vec![strategy.action().to_vec()],
        payoffs: Vec::new(),
    };
    for _ in 0..stages {
        let payoff = stream.next_payoff(Some(strategy.action()))?;
        strategy.step(&payoff)?;
        trajectory.actions.push(strategy.action().to_vec());
        trajectory.payoffs.push(payoff);
    }
    Ok(trajectory)
}
