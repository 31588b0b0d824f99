//! Closed-form probability oracles and the Monte Carlo simulators that
//! check them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A gambler who starts with `start_capital`, bets one unit per round, wins
/// each round with `step_win_prob`, and plays against an opponent holding
/// `opponent_capital`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub step_win_prob: f64,
    pub start_capital: u32,
    pub opponent_capital: u32,
}

impl WalkSpec {
    pub fn new(step_win_prob: f64, start_capital: u32, opponent_capital: u32) -> Result<Self> {
        if !(step_win_prob > 0.0 && step_win_prob < 1.0) {
            return Err(Error::invalid("step_win_prob", format!("must lie in (0, 1), got {step_win_prob}")));
        }
        if start_capital == 0 || opponent_capital == 0 {
            return Err(Error::invalid("capital", "start and opponent capital must be positive"));
        }
        Ok(WalkSpec {
            step_win_prob,
            start_capital,
            opponent_capital,
        })
    }
}

/// Probability that the gambler is ever ruined:
/// `(1 - r^N) / (1 - r^(N+i))` with `r = p / (1 - p)`, or `N / (N + i)` at
/// `p = 1/2`.
pub fn ruin_probability(spec: &WalkSpec) -> f64 {
    let p = spec.step_win_prob;
    let i = f64::from(spec.start_capital);
    let n = f64::from(spec.opponent_capital);
    if (p - 0.5).abs() < 1e-12 {
        return n / (n + i);
    }
    let r = p / (1.0 - p);
    if r > 1.0 {
        // Divide through by r^(N+i) so large capitals stay finite.
        let s = 1.0 / r;
        (s.powf(i) - s.powf(n + i)) / (1.0 - s.powf(n + i))
    } else {
        (1.0 - r.powf(n)) / (1.0 - r.powf(n + i))
    }
}

/// Plays `walks` games and returns the fraction that end in ruin.
pub fn simulate_ruin<R: Rng + ?Sized>(spec: &WalkSpec, walks: usize, rng: &mut R) -> f64 {
    let target = i64::from(spec.start_capital) + i64::from(spec.opponent_capital);
    let mut ruined = 0usize;
    for _ in 0..walks {
        let mut capital = i64::from(spec.start_capital);
        while capital > 0 && capital < target {
            if rng.random::<f64>() < spec.step_win_prob {
                capital += 1;
            } else {
                capital -= 1;
            }
        }
        if capital == 0 {
            ruined += 1;
        }
    }
    ruined as f64 / walks as f64
}

/// Exact probability that a majority of `k` (odd) independent voters, each
/// correct with probability `q`, is wrong: `P(Bin(k, 1 - q) >= ceil(k/2))`.
pub fn majority_error_exact(k: usize, q: f64) -> f64 {
    assert!(k % 2 == 1, "majority_error_exact needs odd k, got {k}");
    assert!((0.0..=1.0).contains(&q), "q must be a probability, got {q}");
    let p_wrong = 1.0 - q;
    if p_wrong <= 0.0 {
        return 0.0;
    }
    if p_wrong >= 1.0 {
        return 1.0;
    }
    let threshold = k.div_ceil(2);
    let (lp, lq) = (p_wrong.ln(), q.ln());
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for j in 0..=k {
        if j > 0 {
            ln_choose += ((k - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= threshold {
            total += (ln_choose + j as f64 * lp + (k - j) as f64 * lq).exp();
        }
    }
    total.min(1.0)
}

/// Hoeffding upper bound `exp(-2·k·margin²)` on the majority-vote error of
/// `k` voters each correct with probability `1/2 + margin`.
pub fn hoeffding_majority_bound(k: usize, margin: f64) -> f64 {
    (-2.0 * k as f64 * margin * margin).exp()
}

/// Error of a 3-way majority over independent voters that each err with
/// probability `p`: `3p² - 2p³`.
pub fn boosted_error(p: f64) -> f64 {
    3.0 * p * p - 2.0 * p * p * p
}

/// Monte Carlo counterpart of [`boosted_error`] over `points` draws.
pub fn simulate_boosted_error<R: Rng + ?Sized>(p: f64, points: usize, rng: &mut R) -> f64 {
    let wrong = (0..points)
        .filter(|_| (0..3).filter(|_| rng.random::<f64>() < p).count() >= 2)
        .count();
    wrong as f64 / points as f64
}
