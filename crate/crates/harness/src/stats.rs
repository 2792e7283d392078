//! Pearson correlation and the participant bootstrap.

use std::collections::BTreeMap;

use btom::rng::stream;
use rand::Rng;

use crate::judgments::{average_values, ParticipantValues};
use crate::table::aligned;
use crate::{HarnessError, Key};

pub const BOOTSTRAP_RESAMPLES: usize = 500;
pub const BOOTSTRAP_LEVEL: f64 = 0.95;

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, HarnessError> {
    if x.len() != y.len() {
        return Err(HarnessError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(HarnessError::TooShort(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // relative cutoff so that values equal up to rounding count as constant
    let eps = 1e-24 * n as f64;
    if sxx <= eps * (1.0 + mx * mx) || syy <= eps * (1.0 + my * my) {
        return Err(HarnessError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation of the averaged participants with the model over the keys
/// the participants answered.
pub fn table_r(human: &BTreeMap<Key, f64>, model: &BTreeMap<Key, f64>) -> Result<f64, HarnessError> {
    let (x, y) = aligned(human, model)?;
    pearson_r(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    /// r of the full cohort.
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, r: f64) -> bool {
        self.low <= r && r <= self.high
    }
}

/// Percentile interval of r over `resamples` resamples of the participants,
/// drawn with replacement.
pub fn bootstrap_ci(
    participants: &[ParticipantValues],
    model: &BTreeMap<Key, f64>,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Interval, HarnessError> {
    let n = participants.len();
    if n < 3 {
        return Err(HarnessError::TooFewParticipants(n));
    }
    let estimate = table_r(&average_values(participants), model)?;
    let mut rng = stream(seed, &[]);
    let mut rs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let pick: Vec<&ParticipantValues> = (0..n).map(|_| &participants[rng.random_range(0..n)]).collect();
        match table_r(&average_values(pick), model) {
            Ok(r) => rs.push(r),
            // a resample of identical participants can be constant
            Err(HarnessError::ZeroVariance) => continue,
            Err(e) => return Err(e),
        }
    }
    if rs.is_empty() {
        return Err(HarnessError::ZeroVariance);
    }
    rs.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(Interval {
        estimate,
        low: quantile(&rs, tail),
        high: quantile(&rs, 1.0 - tail),
    })
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
