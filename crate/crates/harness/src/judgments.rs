//! Human judgment records, their conversion to goal distributions, scoring
//! and exclusion.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use btom::presets::DomainKind;
use btom::stimulus::Stimulus;
use serde::{Deserialize, Serialize};

use crate::table::{InferenceTable, HUMAN};
use crate::{io_err, HarnessError, Key};

/// Marker for the "I don't know" response.
pub const DONT_KNOW: &str = "DONTKNOW";

/// Participants failing this many comprehension checks are excluded.
pub const MAX_COMPREHENSION_FAILURES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Goals(Vec<String>),
    DontKnow,
}

impl Selection {
    pub fn parse(text: &str) -> Selection {
        let text = text.trim();
        if text == DONT_KNOW {
            return Selection::DontKnow;
        }
        Selection::Goals(
            text.split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        )
    }
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selection::DontKnow => f.write_str(DONT_KNOW),
            Selection::Goals(g) => f.write_str(&g.join("|")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Judgment {
    pub participant: String,
    pub stimulus: String,
    pub point: usize,
    pub selection: Selection,
    /// Comprehension checks this participant failed (repeated on each row).
    pub comprehension_failures: u32,
}

#[derive(Serialize, Deserialize)]
struct Record {
    #[serde(rename = "participant-id")]
    participant: String,
    #[serde(rename = "stimulus-id")]
    stimulus: String,
    #[serde(rename = "judgment-point")]
    point: usize,
    selection: String,
    #[serde(rename = "comprehension-failures", default)]
    comprehension_failures: u32,
}

/// Reads judgments. Columns beyond the schema (demographics and the like)
/// are ignored.
pub fn read_judgments<R: Read>(reader: R) -> Result<Vec<Judgment>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let r: Record = rec?;
        let selection = Selection::parse(&r.selection);
        if selection == Selection::Goals(Vec::new()) {
            return Err(HarnessError::Row {
                row: i + 2,
                message: format!("empty selection (use {DONT_KNOW} for no answer)"),
            });
        }
        out.push(Judgment {
            participant: r.participant,
            stimulus: r.stimulus,
            point: r.point,
            selection,
            comprehension_failures: r.comprehension_failures,
        });
    }
    Ok(out)
}

pub fn write_judgments<W: Write>(judgments: &[Judgment], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    for j in judgments {
        w.serialize(Record {
            participant: j.participant.clone(),
            stimulus: j.stimulus.clone(),
            point: j.point,
            selection: j.selection.to_string(),
            comprehension_failures: j.comprehension_failures,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_judgments_path(path: &Path) -> Result<Vec<Judgment>, HarnessError> {
    read_judgments(std::fs::File::open(path).map_err(io_err(path))?)
}

pub fn write_judgments_path(judgments: &[Judgment], path: &Path) -> Result<(), HarnessError> {
    write_judgments(judgments, std::fs::File::create(path).map_err(io_err(path))?)
}

/// Uniform over the selected goals; "don't know" is uniform over all goals.
pub fn responses_to_distribution(selection: &Selection, goals: &[String]) -> Result<Vec<f64>, String> {
    match selection {
        Selection::DontKnow => Ok(vec![1.0 / goals.len() as f64; goals.len()]),
        Selection::Goals(sel) => {
            if sel.is_empty() {
                return Err("empty selection".into());
            }
            let mut out = vec![0.0; goals.len()];
            for s in sel {
                let i = goals
                    .iter()
                    .position(|g| g == s)
                    .ok_or_else(|| format!("unknown goal `{s}`"))?;
                out[i] = 1.0;
            }
            let n: f64 = out.iter().sum();
            out.iter_mut().for_each(|x| *x /= n);
            Ok(out)
        }
    }
}

/// What the harness needs to know about one stimulus.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusInfo {
    pub domain: DomainKind,
    pub category: String,
    pub goals: Vec<String>,
    pub true_goal: String,
    pub points: Vec<usize>,
}

pub type StimulusIndex = BTreeMap<String, StimulusInfo>;

pub fn index(stimuli: &[Stimulus]) -> StimulusIndex {
    stimuli
        .iter()
        .map(|s| {
            (
                s.id.clone(),
                StimulusInfo {
                    domain: s.domain,
                    category: s.category.clone(),
                    goals: s.goal_labels(),
                    true_goal: s.true_goal.clone(),
                    points: s.judgment_points().to_vec(),
                },
            )
        })
        .collect()
}

/// Goal distribution of one judgment, checked against its stimulus.
pub fn distribution(j: &Judgment, index: &StimulusIndex) -> Result<Vec<f64>, HarnessError> {
    let info = index
        .get(&j.stimulus)
        .ok_or_else(|| HarnessError::UnknownStimulus(j.stimulus.clone()))?;
    if !info.points.contains(&j.point) {
        return Err(HarnessError::UnknownPoint {
            stimulus: j.stimulus.clone(),
            point: j.point,
        });
    }
    if let Selection::Goals(sel) = &j.selection {
        if sel.is_empty() {
            return Err(HarnessError::EmptySelection {
                stimulus: j.stimulus.clone(),
                point: j.point,
            });
        }
        if let Some(g) = sel.iter().find(|g| !info.goals.contains(g)) {
            return Err(HarnessError::UnknownGoal {
                stimulus: j.stimulus.clone(),
                goal: g.clone(),
            });
        }
    }
    Ok(responses_to_distribution(&j.selection, &info.goals).expect("selection checked above"))
}

/// Points earned: the probability given to the true goal, summed.
pub fn score_participant(judgments: &[Judgment], index: &StimulusIndex) -> Result<f64, HarnessError> {
    let mut total = 0.0;
    for j in judgments {
        let d = distribution(j, index)?;
        let info = &index[&j.stimulus];
        let k = info.goals.iter().position(|g| *g == info.true_goal).expect("true goal is a candidate");
        total += d[k];
    }
    Ok(total)
}

pub fn group_by_participant(judgments: &[Judgment]) -> BTreeMap<String, Vec<Judgment>> {
    let mut out: BTreeMap<String, Vec<Judgment>> = BTreeMap::new();
    for j in judgments {
        out.entry(j.participant.clone()).or_default().push(j.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exclusion {
    LowScore(f64),
    Comprehension(u32),
}

/// Why a participant is excluded, if they are: too few points, or two or
/// more failed comprehension checks.
pub fn exclusion(judgments: &[Judgment], index: &StimulusIndex, threshold: f64) -> Result<Option<Exclusion>, HarnessError> {
    let failures = judgments.iter().map(|j| j.comprehension_failures).max().unwrap_or(0);
    if failures >= MAX_COMPREHENSION_FAILURES {
        return Ok(Some(Exclusion::Comprehension(failures)));
    }
    let score = score_participant(judgments, index)?;
    Ok((score < threshold).then_some(Exclusion::LowScore(score)))
}

/// One participant's distributions, keyed by (stimulus, point, goal).
pub type ParticipantValues = BTreeMap<Key, f64>;

#[derive(Debug, Clone, Default)]
pub struct Cohort {
    pub included: BTreeMap<String, ParticipantValues>,
    pub excluded: BTreeMap<String, Exclusion>,
}

/// Validates every judgment, applies exclusion with the domain's score
/// threshold, and converts the rest to distributions. A repeated answer
/// to the same point replaces the earlier one.
pub fn build_cohort(judgments: &[Judgment], index: &StimulusIndex) -> Result<Cohort, HarnessError> {
    let mut cohort = Cohort::default();
    for (pid, js) in group_by_participant(judgments) {
        for j in &js {
            distribution(j, index)?;
        }
        let threshold = js
            .first()
            .map(|j| index[&j.stimulus].domain.score_threshold())
            .unwrap_or(0.0);
        if let Some(why) = exclusion(&js, index, threshold)? {
            cohort.excluded.insert(pid, why);
            continue;
        }
        cohort.included.insert(pid, participant_values(&js, index)?);
    }
    Ok(cohort)
}

/// One participant's judgments as distributions, without exclusion.
pub fn participant_values(judgments: &[Judgment], index: &StimulusIndex) -> Result<ParticipantValues, HarnessError> {
    let mut values = ParticipantValues::new();
    for j in judgments {
        let d = distribution(j, index)?;
        for (g, p) in index[&j.stimulus].goals.iter().zip(d) {
            values.insert((j.stimulus.clone(), j.point, g.clone()), p);
        }
    }
    Ok(values)
}

/// Mean over participants of each (stimulus, point, goal) value, taken
/// over the participants who answered that point.
pub fn average_values<'a, I>(participants: I) -> BTreeMap<Key, f64>
where
    I: IntoIterator<Item = &'a ParticipantValues>,
{
    let mut sums: BTreeMap<Key, (f64, usize)> = BTreeMap::new();
    for v in participants {
        for (k, &p) in v {
            let e = sums.entry(k.clone()).or_default();
            e.0 += p;
            e.1 += 1;
        }
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

impl Cohort {
    pub fn average(&self) -> BTreeMap<Key, f64> {
        average_values(self.included.values())
    }

    pub fn table(&self) -> InferenceTable {
        InferenceTable::from_values(&self.average(), HUMAN)
    }
}
