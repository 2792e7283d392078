use std::collections::BTreeMap;

use btom::presets::DomainKind;
use btom::rng::stream;
use btom_harness::judgments::{average_values, group_by_participant, participant_values, ParticipantValues, StimulusIndex, StimulusInfo};
use btom_harness::stats::{bootstrap_ci, table_r, BOOTSTRAP_LEVEL, BOOTSTRAP_RESAMPLES};
use btom_harness::synth::{synthesize_cohort, ResponseModel};
use btom_harness::{HarnessError, Key};
use rand::Rng;

const GOALS: [&str; 3] = ["red", "yellow", "blue"];

/// Random model table over `stimuli` x 6 points x 3 goals, and the table
/// simulated participants answer from: the model's distribution mixed with
/// an unrelated one in proportion `mix`, so the two correlate imperfectly.
fn random_tables(stimuli: usize, mix: f64, seed: u64) -> (BTreeMap<Key, f64>, BTreeMap<Key, f64>, StimulusIndex) {
    let mut rng = stream(seed, &[]);
    let draw = |rng: &mut btom::rng::SimRng| {
        let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>().powi(3)).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect::<Vec<f64>>()
    };
    let mut model = BTreeMap::new();
    let mut human = BTreeMap::new();
    let mut idx = StimulusIndex::new();
    for s in 0..stimuli {
        let id = format!("s{s}");
        for p in 1..=6 {
            let m = draw(&mut rng);
            let other = draw(&mut rng);
            for (k, g) in GOALS.iter().enumerate() {
                model.insert((id.clone(), p, g.to_string()), m[k]);
                human.insert((id.clone(), p, g.to_string()), (1.0 - mix) * m[k] + mix * other[k]);
            }
        }
        idx.insert(
            id,
            StimulusInfo {
                domain: DomainKind::Dkg,
                category: "test".into(),
                goals: GOALS.iter().map(|g| g.to_string()).collect(),
                true_goal: "red".into(),
                points: (1..=6).collect(),
            },
        );
    }
    (model, human, idx)
}

fn participants(model: &BTreeMap<Key, f64>, idx: &StimulusIndex, n: usize, seed: u64) -> Vec<ParticipantValues> {
    cohort_with(model, idx, n, &ResponseModel::default(), seed)
}

fn cohort_with(
    model: &BTreeMap<Key, f64>,
    idx: &StimulusIndex,
    n: usize,
    response: &ResponseModel,
    seed: u64,
) -> Vec<ParticipantValues> {
    let js = synthesize_cohort(model, n, response, seed);
    group_by_participant(&js)
        .values()
        .map(|j| participant_values(j, idx).unwrap())
        .collect()
}

#[test]
fn identical_participants_give_zero_width_interval() {
    let (model, human, idx) = random_tables(4, 0.3, 1);
    let one = participants(&human, &idx, 1, 2).remove(0);
    let cohort = vec![one.clone(), one.clone(), one.clone(), one];
    let ci = bootstrap_ci(&cohort, &model, BOOTSTRAP_RESAMPLES, BOOTSTRAP_LEVEL, 3).unwrap();
    assert_eq!(ci.low, ci.high);
    assert_eq!(ci.low, ci.estimate);
}

#[test]
fn fewer_than_three_participants_is_an_error() {
    let (model, human, idx) = random_tables(2, 0.3, 1);
    let two = participants(&human, &idx, 2, 2);
    assert!(matches!(
        bootstrap_ci(&two, &model, 100, 0.95, 0),
        Err(HarnessError::TooFewParticipants(2))
    ));
}

#[test]
fn interval_is_ordered_and_seeded() {
    let (model, human, idx) = random_tables(6, 0.3, 4);
    let ps = participants(&human, &idx, 20, 5);
    let a = bootstrap_ci(&ps, &model, 200, 0.95, 9).unwrap();
    let b = bootstrap_ci(&ps, &model, 200, 0.95, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.low <= a.high, "{a:?}");
}

/// The generating r is the correlation of the expected response with the
/// model, estimated from a very large cohort. Averaging 20 noisy
/// participants attenuates r and resampling attenuates it again, so the
/// percentile interval only reaches nominal coverage when that shift is
/// small next to the sampling spread: few judgment points and low response
/// noise, as here.
#[test]
fn interval_covers_generating_r() {
    let response = ResponseModel {
        logit_noise: 0.1,
        ..ResponseModel::default()
    };
    let (model, human, idx) = random_tables(3, 0.5, 21);
    let population = cohort_with(&human, &idx, 20_000, &response, 22);
    let true_r = table_r(&average_values(&population), &model).unwrap();
    let mut covered = 0;
    for trial in 0..100u64 {
        let ps = cohort_with(&human, &idx, 20, &response, 1000 + trial);
        let ci = bootstrap_ci(&ps, &model, BOOTSTRAP_RESAMPLES, BOOTSTRAP_LEVEL, trial).unwrap();
        covered += ci.contains(true_r) as usize;
    }
    assert!(covered >= 90, "covered {covered}/100 (generating r {true_r:.4})");
}
