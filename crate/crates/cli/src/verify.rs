//! The `verify` command: closed-form oracles against Monte Carlo.

use crowdpac::analysis::{
    boosted_error, hoeffding_majority_bound, majority_error_exact, ruin_probability, simulate_boosted_error,
    simulate_ruin, WalkSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Grid {
    Small,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

pub const RUIN_TOLERANCE: f64 = 0.01;
pub const BOOST_TOLERANCE: f64 = 0.01;

pub fn ruin_grid(grid: Grid) -> Vec<(f64, u32, u32)> {
    match grid {
        Grid::Small => vec![(0.7, 1, 60), (0.7, 1, 1), (0.5, 1, 1), (0.6, 2, 5)],
        Grid::Full => {
            let mut g = vec![(0.7, 1, 60)];
            for p in [0.3, 0.45, 0.5, 0.55, 0.7, 0.85] {
                for i in [1, 2, 4] {
                    for n in [1, 3, 10] {
                        g.push((p, i, n));
                    }
                }
            }
            g
        }
    }
}

pub fn check_ruin<R: Rng + ?Sized>(p: f64, i: u32, n: u32, walks: usize, rng: &mut R) -> Check {
    let spec = WalkSpec::new(p, i, n).expect("grid points are valid walks");
    let exact = ruin_probability(&spec);
    let sim = simulate_ruin(&spec, walks, rng);
    Check {
        name: format!("ruin(p={p}, i={i}, N={n})"),
        passed: (exact - sim).abs() <= RUIN_TOLERANCE,
        detail: format!("closed form {exact:.6}, {walks} walks {sim:.6}"),
    }
}

pub fn check_hoeffding(max_k: usize) -> Check {
    let mut worst: Option<(usize, f64)> = None;
    let mut cells = 0;
    for k in (1..=max_k).step_by(2) {
        for m in 1..=5 {
            let margin = f64::from(m) / 10.0;
            cells += 1;
            if hoeffding_majority_bound(k, margin) < majority_error_exact(k, 0.5 + margin) {
                worst.get_or_insert((k, margin));
            }
        }
    }
    Check {
        name: format!("hoeffding >= exact majority error (odd k <= {max_k})"),
        passed: worst.is_none(),
        detail: match worst {
            None => format!("{cells} cells dominated"),
            Some((k, m)) => format!("violated at k={k}, margin={m}"),
        },
    }
}

pub fn check_boosting<R: Rng + ?Sized>(p: f64, points: usize, rng: &mut R) -> Check {
    let exact = boosted_error(p);
    let sim = simulate_boosted_error(p, points, rng);
    Check {
        name: format!("3-vote majority error (p={p})"),
        passed: (exact - sim).abs() <= BOOST_TOLERANCE,
        detail: format!("3p^2-2p^3 = {exact:.6}, {points} points {sim:.6}"),
    }
}

pub fn run_verify(grid: Grid, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let walks = 100_000;
    let mut checks: Vec<Check> = ruin_grid(grid)
        .into_iter()
        .map(|(p, i, n)| check_ruin(p, i, n, walks, &mut rng))
        .collect();
    let limit = ruin_probability(&WalkSpec::new(0.7, 1, 60).expect("valid walk"));
    checks.push(Check {
        name: "ruin limit (p=0.7, i=1, N=60)".into(),
        passed: (limit - 3.0 / 7.0).abs() <= 1e-9,
        detail: format!("{limit:.12} vs 3/7"),
    });
    checks.push(check_hoeffding(match grid {
        Grid::Small => 51,
        Grid::Full => 201,
    }));
    for p in [0.1, 0.2, 0.3] {
        checks.push(check_boosting(p, 100_000, &mut rng));
    }
    checks
}
