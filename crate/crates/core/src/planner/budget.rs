use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{Budget, PlanError};

/// Distribution of the per-call expansion budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum BudgetDist {
    /// `max(1, k)` with `k` the number of failures before `r` successes at
    /// success probability `1 - q`.
    NegBinomial { r: u32, q: f64 },
    Fixed(u32),
    Unbounded,
}

impl BudgetDist {
    pub fn validate(&self) -> Result<(), PlanError> {
        match *self {
            BudgetDist::NegBinomial { r, q } if r < 1 || !(0.0..1.0).contains(&q) => Err(
                PlanError::InvalidParams(format!("need r >= 1 and 0 <= q < 1, got r={r} q={q}")),
            ),
            BudgetDist::Fixed(0) => Err(PlanError::InvalidParams("budget must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Budget {
        match *self {
            BudgetDist::NegBinomial { r, q } => Budget::Limited(sample_budget(r, q, rng)),
            BudgetDist::Fixed(n) => Budget::Limited(n.max(1)),
            BudgetDist::Unbounded => Budget::Unbounded,
        }
    }
}

/// Raw negative-binomial draw, without the clamp.
pub(crate) fn sample_nb<R: Rng + ?Sized>(r: u32, q: f64, rng: &mut R) -> u64 {
    if q <= 0.0 {
        return 0;
    }
    let geo = Geometric::new(1.0 - q).expect("q checked to lie in [0, 1)");
    (0..r).map(|_| geo.sample(rng)).sum()
}

/// Expansion budget `max(1, k)`, `k ~ NB(r, q)` with mean `rq / (1 - q)`.
pub fn sample_budget<R: Rng + ?Sized>(r: u32, q: f64, rng: &mut R) -> u32 {
    sample_nb(r, q, rng).clamp(1, u32::MAX as u64) as u32
}

/// `P(k) = C(k + r - 1, k) q^k (1 - q)^r`.
pub fn nb_pmf(k: u64, r: u32, q: f64) -> f64 {
    let r = r as f64;
    let k = k as f64;
    let log_binom = ln_gamma(k + r) - ln_gamma(k + 1.0) - ln_gamma(r);
    (log_binom + k * q.ln() + r * (1.0 - q).ln()).exp()
}

/// Lanczos approximation, accurate to ~1e-14 for positive arguments.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn pmf_at_zero_is_one_minus_q_to_the_r() {
        assert!((nb_pmf(0, 2, 0.9) - 0.01).abs() < 1e-12);
        // C(3, 2) * 0.9^2 * 0.01
        assert!((nb_pmf(2, 2, 0.9) - 3.0 * 0.81 * 0.01).abs() < 1e-12);
        let total: f64 = (0..2000).map(|k| nb_pmf(k, 2, 0.9)).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_draw_frequency_matches_pmf_and_is_clamped() {
        let mut rng = stream(11, &[]);
        let n = 100_000;
        let mut zeros = 0;
        for _ in 0..n {
            if sample_nb(2, 0.9, &mut rng) == 0 {
                zeros += 1;
            }
        }
        let f = zeros as f64 / n as f64;
        assert!((f - 0.01).abs() < 0.002, "{f}");
        assert!((0..1000).all(|_| sample_budget(2, 0.9, &mut rng) >= 1));
    }

    #[test]
    fn q_zero_always_gives_one() {
        let mut rng = stream(12, &[]);
        assert!((0..100).all(|_| sample_budget(3, 0.0, &mut rng) == 1));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BudgetDist::NegBinomial { r: 0, q: 0.5 }.validate().is_err());
        assert!(BudgetDist::NegBinomial { r: 2, q: 1.0 }.validate().is_err());
        assert!(BudgetDist::Fixed(0).validate().is_err());
        assert!(BudgetDist::NegBinomial { r: 2, q: 0.9 }.validate().is_ok());
    }
}
