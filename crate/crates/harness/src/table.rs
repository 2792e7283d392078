//! Posterior tables: one row per (stimulus, point, goal, source) with a
//! fixed CSV layout shared by model output and averaged human judgments.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use btom::inference::{average, Observer, ObserverConfig, ValueTables};
use btom::presets::{PARTICLES_PER_GOAL, RUNS};
use btom::rng::derive_seed;
use btom::stimulus::Stimulus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{io_err, HarnessError, Key};

/// Source name of averaged human judgments.
pub const HUMAN: &str = "human";

pub const POSTERIOR_HEADER: [&str; 6] = ["stimulus", "point", "goal", "probability", "model", "run"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRow {
    pub stimulus: String,
    pub point: usize,
    pub goal: String,
    pub probability: f64,
    pub model: String,
    /// Empty for run-averaged rows.
    pub run: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InferenceTable {
    pub rows: Vec<PosteriorRow>,
}

impl InferenceTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `series[p]` for every point `p` in `points`.
    pub fn push_series(
        &mut self,
        stimulus: &str,
        goals: &[String],
        series: &[Vec<f64>],
        points: &[usize],
        model: &str,
        run: Option<usize>,
    ) {
        for &p in points {
            for (g, &prob) in goals.iter().zip(&series[p]) {
                self.rows.push(PosteriorRow {
                    stimulus: stimulus.to_string(),
                    point: p,
                    goal: g.clone(),
                    probability: prob,
                    model: model.to_string(),
                    run,
                });
            }
        }
    }

    /// Rows from a key -> probability map.
    pub fn from_values(values: &BTreeMap<Key, f64>, model: &str) -> Self {
        let rows = values
            .iter()
            .map(|((s, p, g), &prob)| PosteriorRow {
                stimulus: s.clone(),
                point: *p,
                goal: g.clone(),
                probability: prob,
                model: model.to_string(),
                run: None,
            })
            .collect();
        InferenceTable { rows }
    }

    pub fn extend(&mut self, other: InferenceTable) {
        self.rows.extend(other.rows);
    }

    pub fn models(&self) -> BTreeSet<String> {
        self.rows.iter().map(|r| r.model.clone()).collect()
    }

    /// Probabilities of one source. Run-averaged rows are used when present,
    /// otherwise the per-run rows are averaged.
    pub fn values(&self, model: &str) -> BTreeMap<Key, f64> {
        let rows: Vec<&PosteriorRow> = self.rows.iter().filter(|r| r.model == model).collect();
        let averaged = rows.iter().any(|r| r.run.is_none());
        let mut sums: BTreeMap<Key, (f64, usize)> = BTreeMap::new();
        for r in rows.into_iter().filter(|r| r.run.is_none() == averaged) {
            let e = sums.entry((r.stimulus.clone(), r.point, r.goal.clone())).or_default();
            e.0 += r.probability;
            e.1 += 1;
        }
        sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    /// Every (stimulus, point, source, run) group must sum to 1 within `tol`.
    pub fn check_normalised(&self, tol: f64) -> Result<(), HarnessError> {
        let mut sums: BTreeMap<(&str, usize, &str, Option<usize>), f64> = BTreeMap::new();
        for r in &self.rows {
            *sums.entry((&r.stimulus, r.point, &r.model, r.run)).or_default() += r.probability;
        }
        for ((stimulus, point, model, _), sum) in sums {
            if (sum - 1.0).abs() > tol {
                return Err(HarnessError::Unnormalised {
                    stimulus: stimulus.to_string(),
                    point,
                    source_name: model.to_string(),
                    sum,
                });
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, HarnessError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(POSTERIOR_HEADER) {
            return Err(HarnessError::Row {
                row: 1,
                message: format!("expected header `{}`", POSTERIOR_HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize() {
            let row: PosteriorRow = rec?;
            if !(0.0..=1.0 + 1e-9).contains(&row.probability) {
                return Err(HarnessError::Row {
                    row: rows.len() + 2,
                    message: format!("probability {} outside [0, 1]", row.probability),
                });
            }
            rows.push(row);
        }
        Ok(InferenceTable { rows })
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(POSTERIOR_HEADER)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_path(path: &Path) -> Result<Self, HarnessError> {
        let f = std::fs::File::open(path).map_err(io_err(path))?;
        Self::read(f)
    }

    pub fn write_path(&self, path: &Path) -> Result<(), HarnessError> {
        let f = std::fs::File::create(path).map_err(io_err(path))?;
        self.write(f)
    }
}

/// Values of `human` paired with the same keys in `model`.
pub fn aligned(human: &BTreeMap<Key, f64>, model: &BTreeMap<Key, f64>) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let mut x = Vec::with_capacity(human.len());
    let mut y = Vec::with_capacity(human.len());
    for (k, &h) in human {
        let m = model.get(k).ok_or_else(|| HarnessError::MissingEntry(k.clone()))?;
        x.push(h);
        y.push(*m);
    }
    Ok((x, y))
}

/// Seeds and sizes of the run-averaged inference protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub seed: u64,
    pub runs: usize,
    pub particles_per_goal: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            seed: 0,
            runs: RUNS,
            particles_per_goal: PARTICLES_PER_GOAL,
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Seed for one stimulus, stable under reordering of the stimulus list.
pub fn stimulus_seed(master: u64, id: &str) -> u64 {
    derive_seed(master, &[fnv1a(id)])
}

/// Observer for `stim` with the protocol's particle and run counts.
pub fn observer(
    stim: &Stimulus,
    cfg: &ObserverConfig,
    protocol: &Protocol,
    tables: Option<Arc<ValueTables>>,
) -> Result<Observer, HarnessError> {
    let cfg = cfg
        .with_particles(protocol.particles_per_goal * stim.task.goals().len())
        .with_runs(protocol.runs);
    let model = stim.model(cfg.params);
    Ok(match tables {
        Some(t) => Observer::with_tables(model, cfg, t)?,
        None => Observer::new(model, cfg)?,
    })
}

/// Per-run posterior series (index 0 is the prior) for one stimulus.
pub fn run_series(
    stim: &Stimulus,
    cfg: &ObserverConfig,
    protocol: &Protocol,
    tables: Option<Arc<ValueTables>>,
) -> Result<Vec<Vec<Vec<f64>>>, HarnessError> {
    let obs = observer(stim, cfg, protocol, tables)?;
    Ok(obs.runs(&stim.observations(), stimulus_seed(protocol.seed, &stim.id))?)
}

/// Run-averaged posterior at the judgment points of every stimulus.
pub fn model_table(stimuli: &[Stimulus], cfg: &ObserverConfig, protocol: &Protocol) -> Result<InferenceTable, HarnessError> {
    model_table_with(stimuli, cfg, protocol, None)
}

/// As [`model_table`], reusing value tables built per stimulus.
pub fn model_table_with(
    stimuli: &[Stimulus],
    cfg: &ObserverConfig,
    protocol: &Protocol,
    tables: Option<&[Arc<ValueTables>]>,
) -> Result<InferenceTable, HarnessError> {
    let parts: Vec<InferenceTable> = stimuli
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let runs = run_series(s, cfg, protocol, tables.map(|t| t[i].clone()))?;
            let mut t = InferenceTable::new();
            t.push_series(&s.id, &s.goal_labels(), &average(&runs), s.judgment_points(), cfg.kind.name(), None);
            Ok(t)
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut out = InferenceTable::new();
    for p in parts {
        out.extend(p);
    }
    Ok(out)
}
