//! Grid-search fitting against averaged human judgments, and the sorted
//! sensitivity sequences built from the full r table.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use btom::agent::AgentParams;
use btom::inference::{ModelKind, ObserverConfig, ValueTables};
use btom::planner::{BudgetDist, Expansion, SearchParams};
use btom::presets::DomainKind;
use btom::stimulus::Stimulus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::table_r;
use crate::table::{model_table_with, InferenceTable, Protocol};
use crate::{io_err, HarnessError, Key};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub goal_noise: Vec<f64>,
    pub r: Vec<u32>,
    pub q: Vec<f64>,
    pub gamma: Vec<f64>,
    pub action_noise: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self::standard()
    }
}

impl ParamGrid {
    /// The published search grid.
    pub fn standard() -> Self {
        ParamGrid {
            goal_noise: vec![0.1, 0.2],
            r: vec![2, 4],
            q: vec![0.9, 0.95],
            gamma: vec![0.02, 0.5],
            action_noise: vec![0.05, 0.1, 0.2],
            alpha: vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }

    /// Every configuration the grid spans for `kind`. Axes a model does not
    /// use are dropped, as is goal noise in domains without goal
    /// corruption. Observation noise is fixed per domain.
    pub fn cells(&self, kind: ModelKind, domain: DomainKind) -> Result<Vec<ObserverConfig>, HarnessError> {
        let uses_goal_noise = domain == DomainKind::Blockwords && kind != ModelKind::GLesioned;
        let uses_search = kind != ModelKind::PLesioned;
        let uses_action_noise = kind != ModelKind::ALesioned;
        let obs = domain.obs_noise();
        let or_zero = |axis: &[f64], used: bool| if used { axis.to_vec() } else { vec![0.0] };
        let mut out = Vec::new();
        if kind == ModelKind::Boltzmann {
            for &a in &self.alpha {
                let params = AgentParams {
                    goal_noise: 0.0,
                    action_noise: 0.0,
                    search: SearchParams::optimal(),
                    obs,
                };
                out.push(ObserverConfig::new(kind, params, a));
            }
        } else {
            let searches: Vec<SearchParams> = if uses_search {
                let mut v = Vec::new();
                for &r in &self.r {
                    for &q in &self.q {
                        for &g in &self.gamma {
                            v.push(SearchParams::bounded(g, r, q));
                        }
                    }
                }
                v
            } else {
                vec![SearchParams::optimal()]
            };
            for eg in or_zero(&self.goal_noise, uses_goal_noise) {
                for &search in &searches {
                    for ea in or_zero(&self.action_noise, uses_action_noise) {
                        let params = AgentParams {
                            goal_noise: eg,
                            action_noise: ea,
                            search,
                            obs,
                        };
                        out.push(ObserverConfig::new(kind, params, 1.0));
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(HarnessError::EmptyGrid(kind.name().to_string()));
        }
        Ok(out)
    }
}

/// Flat, serialisable description of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub model: String,
    pub goal_noise: f64,
    pub action_noise: f64,
    /// Empty for exact planning.
    pub gamma: Option<f64>,
    pub budget_r: Option<u32>,
    pub budget_q: Option<f64>,
    pub alpha: Option<f64>,
    pub r: f64,
}

impl CellRecord {
    pub fn new(cfg: &ObserverConfig, r: f64) -> Self {
        let gamma = match cfg.params.search.expansion {
            Expansion::Boltzmann { gamma } => Some(gamma),
            Expansion::Argmin => None,
        };
        let (budget_r, budget_q) = match cfg.params.search.budget {
            BudgetDist::NegBinomial { r, q } => (Some(r), Some(q)),
            _ => (None, None),
        };
        CellRecord {
            model: cfg.kind.name().to_string(),
            goal_noise: cfg.params.goal_noise,
            action_noise: cfg.params.action_noise,
            gamma,
            budget_r,
            budget_q,
            alpha: (cfg.kind == ModelKind::Boltzmann).then_some(cfg.alpha),
            r,
        }
    }

    pub fn describe(&self) -> String {
        if let Some(a) = self.alpha {
            return format!("alpha={a}");
        }
        let mut s = format!("eps_g={} eps_a={}", self.goal_noise, self.action_noise);
        match (self.gamma, self.budget_r, self.budget_q) {
            (Some(g), Some(r), Some(q)) => s += &format!(" gamma={g} r={r} q={q}"),
            _ => s += " planning=exact",
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct CellFit {
    pub config: ObserverConfig,
    pub r: f64,
    pub values: BTreeMap<Key, f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub kind: ModelKind,
    pub cells: Vec<CellFit>,
    /// Index of the highest-r cell (first on ties).
    pub best: usize,
}

impl FitResult {
    pub fn best(&self) -> &CellFit {
        &self.cells[self.best]
    }

    pub fn r_values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.r).collect()
    }

    pub fn records(&self) -> Vec<CellRecord> {
        self.cells.iter().map(|c| CellRecord::new(&c.config, c.r)).collect()
    }
}

/// Value tables per stimulus, needed only by the Boltzmann observer.
pub fn value_tables(stimuli: &[Stimulus]) -> Result<Vec<Arc<ValueTables>>, HarnessError> {
    stimuli
        .par_iter()
        .map(|s| {
            ValueTables::build(&s.task)
                .map(Arc::new)
                .map_err(|e| HarnessError::Inference(e.into()))
        })
        .collect()
}

/// Evaluates every cell under the run-averaged protocol and correlates it
/// with `human`. Cells share the protocol seed, so results are
/// reproducible and differences between cells are not seed noise.
pub fn grid_search(
    cells: &[ObserverConfig],
    stimuli: &[Stimulus],
    human: &BTreeMap<Key, f64>,
    protocol: &Protocol,
) -> Result<FitResult, HarnessError> {
    let kind = cells
        .first()
        .map(|c| c.kind)
        .ok_or_else(|| HarnessError::EmptyGrid("empty cell list".into()))?;
    let tables = if cells.iter().any(|c| c.kind == ModelKind::Boltzmann) {
        Some(value_tables(stimuli)?)
    } else {
        None
    };
    let fits: Vec<CellFit> = cells
        .par_iter()
        .map(|cfg| {
            let t = model_table_with(stimuli, cfg, protocol, tables.as_deref())?;
            let values = t.values(cfg.kind.name());
            let r = table_r(human, &values)?;
            Ok(CellFit {
                config: *cfg,
                r,
                values,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if f.r > fits[best].r {
            best = i;
        }
    }
    Ok(FitResult { kind, cells: fits, best })
}

/// Ascending r sequence of each model.
pub fn sensitivity_table(fits: &[(ModelKind, Vec<f64>)]) -> Vec<(ModelKind, Vec<f64>)> {
    fits.iter()
        .map(|(k, rs)| {
            let mut v = rs.clone();
            v.sort_by(f64::total_cmp);
            (*k, v)
        })
        .collect()
}

/// Whether the k-th best value of `a` is at least the k-th best of `b`
/// for every k both sequences have. Inputs are ascending.
pub fn ordinally_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().rev().zip(b.iter().rev()).all(|(x, y)| x >= y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub model: String,
    /// 1 for the lowest r.
    pub rank: usize,
    pub r: f64,
}

pub fn write_sensitivity<W: Write>(table: &[(ModelKind, Vec<f64>)], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for (k, rs) in table {
        for (i, &r) in rs.iter().enumerate() {
            w.serialize(SensitivityRow {
                model: k.name().to_string(),
                rank: i + 1,
                r,
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_sensitivity<R: Read>(reader: R) -> Result<Vec<(ModelKind, Vec<f64>)>, HarnessError> {
    let mut out: Vec<(ModelKind, Vec<f64>)> = Vec::new();
    for (i, rec) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let row: SensitivityRow = rec?;
        let kind = ModelKind::parse(&row.model).ok_or_else(|| HarnessError::Row {
            row: i + 2,
            message: format!("unknown model `{}`", row.model),
        })?;
        match out.last_mut() {
            Some((k, v)) if *k == kind => v.push(row.r),
            _ => out.push((kind, vec![row.r])),
        }
    }
    Ok(out)
}

pub fn write_cells<W: Write>(records: &[CellRecord], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_cells<R: Read>(reader: R) -> Result<Vec<CellRecord>, HarnessError> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}

/// Plain-text fit summary.
pub fn report(domain: DomainKind, fit: &FitResult, stimuli: usize, human_points: usize) -> String {
    let best = CellRecord::new(&fit.best().config, fit.best().r);
    let mut rs = fit.r_values();
    rs.sort_by(f64::total_cmp);
    let mut s = String::new();
    s += &format!("domain: {domain}\nmodel: {}\n", fit.kind);
    s += &format!("stimuli: {stimuli}\nhuman values: {human_points}\ncells: {}\n", fit.cells.len());
    s += &format!("best cell: {}\nbest r: {:.4}\n", best.describe(), best.r);
    s += &format!("r range: {:.4} .. {:.4}\n", rs[0], rs[rs.len() - 1]);
    s += "notes: r is computed over every goal's probability at every judgment point \
          (per-goal flattening); a per-point alternative can shift absolute values slightly.\n";
    s
}

pub fn write_report(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// Model table of one fitted cell, labelled with its model kind.
pub fn cell_table(fit: &CellFit) -> InferenceTable {
    InferenceTable::from_values(&fit.values, fit.config.kind.name())
}
