use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use btom::agent::{simulate, Trajectory};
use btom::domains::blockwords::problem_pddl;
use btom::domains::GridSpec;
use btom::inference::{average, ModelKind, ObserverConfig};
use btom::pddl::{BLOCK_WORDS_DOMAIN, DOORS_KEYS_GEMS_DOMAIN};
use btom::planner::{BudgetDist, Expansion};
use btom::presets::{fitted, DomainKind, PARTICLES_PER_GOAL, RUNS};
use btom::rng::stream;
use btom::stimulus::{shipped_dir, Stimulus};
use btom::task::Task;
use btom_harness::fit::{
    cell_table, grid_search, report, sensitivity_table, write_cells, write_sensitivity, ParamGrid,
};
use btom_harness::judgments::{build_cohort, index, read_judgments_path, write_judgments, ParticipantValues};
use btom_harness::stats::{bootstrap_ci, table_r, BOOTSTRAP_LEVEL, BOOTSTRAP_RESAMPLES};
use btom_harness::synth::{even_points, synthesize_cohort, ResponseModel};
use btom_harness::table::{run_series, InferenceTable, Protocol};
use btom_harness::Key;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "btom", version, about = "Goal inference over boundedly rational agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the agent and write its trajectory as JSON lines.
    Simulate(SimulateArgs),
    /// Run goal inference over stimuli and write a posterior CSV.
    Infer(InferArgs),
    /// Grid-search model parameters against human judgments.
    Fit(FitArgs),
    /// Correlate posterior tables with human judgments.
    Evaluate(EvaluateArgs),
    /// Write per-timestep posterior series for plotting.
    ExportFigures(ExportArgs),
    /// Simulate participants answering from a model's posteriors.
    Synthesize(SynthesizeArgs),
}

/// Parameter overrides, named after the agent parameter fields.
#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    #[arg(long)]
    goal_noise: Option<f64>,
    #[arg(long)]
    action_noise: Option<f64>,
    /// Search temperature.
    #[arg(long)]
    gamma: Option<f64>,
    /// Budget successes.
    #[arg(long)]
    r: Option<u32>,
    /// Budget continuation probability.
    #[arg(long)]
    q: Option<f64>,
    /// Boltzmann inverse temperature.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct StimulusSource {
    /// Stimulus file; repeatable.
    #[arg(long = "stimulus")]
    stimuli: Vec<PathBuf>,
    /// Directory of stimulus files.
    #[arg(long = "stimuli")]
    dir: Option<PathBuf>,
    /// Use the shipped stimuli of this domain when no files are given.
    #[arg(long, value_parser = parse_domain)]
    domain: Option<DomainKind>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Take the layout from this stimulus file.
    #[arg(long, conflicts_with_all = ["map", "towers"])]
    stimulus: Option<PathBuf>,
    /// ASCII grid map (doors, keys and gems).
    #[arg(long)]
    map: Option<PathBuf>,
    /// Gem labels for the map, e.g. `1=red,2=yellow`.
    #[arg(long, requires = "map")]
    gems: Option<String>,
    /// Block towers read top-down, comma separated.
    #[arg(long, requires = "words")]
    towers: Option<String>,
    /// Candidate words, comma separated.
    #[arg(long)]
    words: Option<String>,
    /// Goal label; defaults to the stimulus's true goal or the first goal.
    #[arg(long)]
    goal: Option<String>,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long, value_parser = parse_model, default_value = "full")]
    model: ModelKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    overrides: Overrides,
    /// Output file; stdout if absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    source: StimulusSource,
    /// Replace the stimulus's trajectory with this one (single stimulus only).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Model kind; repeatable.
    #[arg(long = "model", value_parser = parse_model, default_values = ["full"])]
    models: Vec<ModelKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particles per candidate goal.
    #[arg(long, default_value_t = PARTICLES_PER_GOAL)]
    particles: usize,
    #[arg(long, default_value_t = RUNS)]
    runs: usize,
    #[command(flatten)]
    overrides: Overrides,
    /// Report every step instead of the judgment points.
    #[arg(long)]
    every_step: bool,
    /// Write each run's rows as well as the average.
    #[arg(long)]
    per_run: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    source: StimulusSource,
    /// Human judgment CSV.
    #[arg(long)]
    human: PathBuf,
    /// Model kind; repeatable. Defaults to all five.
    #[arg(long = "model", value_parser = parse_model)]
    models: Vec<ModelKind>,
    /// TOML grid with the ParamGrid axes; the published grid if absent.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particles per candidate goal.
    #[arg(long, default_value_t = PARTICLES_PER_GOAL)]
    particles: usize,
    #[arg(long, default_value_t = RUNS)]
    runs: usize,
    /// Output directory for the report, cell tables and sensitivity CSV.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: StimulusSource,
    #[arg(long)]
    human: PathBuf,
    /// Posterior CSV; repeatable.
    #[arg(long = "posteriors", required = true)]
    posteriors: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = BOOTSTRAP_RESAMPLES)]
    resamples: usize,
    /// Also write the breakdown as CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Posterior CSV, ideally from `infer --every-step`; repeatable.
    #[arg(long = "posteriors", required = true)]
    posteriors: Vec<PathBuf>,
    /// Output directory; one `<stimulus>.<model>.csv` per series.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    source: StimulusSource,
    /// Answer from this posterior table instead of running inference.
    #[arg(long)]
    posteriors: Option<PathBuf>,
    #[arg(long, value_parser = parse_model, default_value = "full")]
    model: ModelKind,
    #[arg(long, default_value_t = 20)]
    participants: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particles per candidate goal.
    #[arg(long, default_value_t = PARTICLES_PER_GOAL)]
    particles: usize,
    #[arg(long, default_value_t = RUNS)]
    runs: usize,
    #[arg(long, default_value_t = ResponseModel::default().logit_noise)]
    logit_noise: f64,
    #[arg(long, default_value_t = ResponseModel::default().dont_know)]
    dont_know: f64,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    ModelKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_domain(s: &str) -> Result<DomainKind, String> {
    DomainKind::parse(s).ok_or_else(|| "expected dkg or blockwords".to_string())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        // sources whose text already appears in their parent are dropped
        let mut parts: Vec<String> = Vec::new();
        for cause in e.chain() {
            let s = cause.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
            if !parts.last().is_some_and(|p| p.contains(&s)) {
                parts.push(s);
            }
        }
        eprintln!("error: {}", parts.join(": "));
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::ExportFigures(a) => cmd_export(a),
        Command::Synthesize(a) => cmd_synthesize(a),
    }
}

/// Fitted configuration for `kind` with the overrides applied, lesion
/// re-applied afterwards.
fn configure(domain: DomainKind, kind: ModelKind, o: &Overrides) -> Result<ObserverConfig> {
    let base = fitted(domain, kind);
    let mut params = base.params;
    if let Some(x) = o.goal_noise {
        params.goal_noise = x;
    }
    if let Some(x) = o.action_noise {
        params.action_noise = x;
    }
    if o.gamma.is_some() || o.r.is_some() || o.q.is_some() {
        let (Expansion::Boltzmann { gamma }, BudgetDist::NegBinomial { r, q }) =
            (params.search.expansion, params.search.budget)
        else {
            bail!("model {kind} plans exactly; --gamma, --r and --q do not apply");
        };
        params.search.expansion = Expansion::Boltzmann {
            gamma: o.gamma.unwrap_or(gamma),
        };
        params.search.budget = BudgetDist::NegBinomial {
            r: o.r.unwrap_or(r),
            q: o.q.unwrap_or(q),
        };
    }
    let cfg = ObserverConfig::new(kind, params, o.alpha.unwrap_or(base.alpha)).with_runs(base.runs);
    cfg.validate().with_context(|| format!("model {kind}"))?;
    Ok(cfg)
}

fn load_stimuli(src: &StimulusSource) -> Result<Vec<Stimulus>> {
    let mut out = Vec::new();
    for p in &src.stimuli {
        out.push(Stimulus::load(p)?);
    }
    if let Some(dir) = &src.dir {
        out.extend(Stimulus::load_dir(dir)?);
    }
    if out.is_empty() {
        let Some(domain) = src.domain else {
            bail!("no stimuli given; pass --stimulus, --stimuli or --domain");
        };
        out = Stimulus::load_dir(&shipped_dir(domain))?;
    }
    ensure!(!out.is_empty(), "no stimulus files found");
    if let Some(domain) = src.domain {
        if let Some(s) = out.iter().find(|s| s.domain != domain) {
            bail!("stimulus {} is in domain {}, not {domain}", s.id, s.domain);
        }
    }
    let mut seen = BTreeSet::new();
    for s in &out {
        ensure!(seen.insert(s.id.clone()), "stimulus id {} appears twice", s.id);
    }
    Ok(out)
}

fn single_domain(stimuli: &[Stimulus]) -> Result<DomainKind> {
    let domain = stimuli[0].domain;
    ensure!(
        stimuli.iter().all(|s| s.domain == domain),
        "stimuli mix domains; pass one domain at a time"
    );
    Ok(domain)
}

fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn simulation_layout(a: &SimulateArgs) -> Result<Stimulus> {
    if let Some(p) = &a.stimulus {
        return Ok(Stimulus::load(p)?);
    }
    let (domain, task, grid) = if let Some(map) = &a.map {
        let ascii = fs::read_to_string(map).with_context(|| format!("reading {}", map.display()))?;
        let mut gems = BTreeMap::new();
        for pair in split_list(a.gems.as_deref().unwrap_or("")) {
            let (k, v) = pair.split_once('=').with_context(|| format!("gem label `{pair}` is not digit=label"))?;
            let mut chars = k.trim().chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                bail!("gem key `{k}` is not a single character");
            };
            gems.insert(c, v.trim().to_string());
        }
        let grid = GridSpec::parse(&ascii, &gems)?;
        let task = Task::from_texts(DOORS_KEYS_GEMS_DOMAIN, &grid.to_problem_pddl("sim", None))?;
        (DomainKind::Dkg, task, Some(grid))
    } else if let (Some(towers), Some(words)) = (&a.towers, &a.words) {
        let problem = problem_pddl("sim", &split_list(towers), &split_list(words))?;
        (DomainKind::Blockwords, Task::from_texts(BLOCK_WORDS_DOMAIN, &problem)?, None)
    } else {
        bail!("give --stimulus, --map, or --towers with --words");
    };
    let true_goal = task.goals().first().context("the problem has no candidate goals")?.label.clone();
    Ok(Stimulus {
        id: "sim".into(),
        domain,
        category: String::new(),
        true_goal,
        trajectory: Trajectory::new(task.initial_state().clone()),
        task: Arc::new(task),
        action_texts: Vec::new(),
        grid,
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    ensure!(a.model != ModelKind::Boltzmann, "simulate runs the agent model; choose full or a lesioned kind");
    let layout = simulation_layout(&a)?;
    let cfg = configure(layout.domain, a.model, &a.overrides)?;
    let label = a.goal.as_deref().unwrap_or(&layout.true_goal);
    let goal = layout
        .task
        .goal_by_label(label)
        .with_context(|| format!("unknown goal `{label}`; candidates are {}", layout.goal_labels().join(", ")))?;
    let model = layout.model(cfg.params);
    let mut rng = stream(a.seed, &[]);
    let mut traj = simulate(&model, goal, layout.task.initial_state(), a.horizon, &mut rng);
    traj.judgment_points = even_points(traj.len());
    output(a.out.as_deref(), &traj.to_jsonl(&layout.task))
}

fn protocol(seed: u64, runs: usize, particles: usize) -> Result<Protocol> {
    ensure!(runs >= 1, "--runs must be at least 1");
    ensure!(particles >= 1, "--particles must be at least 1");
    Ok(Protocol {
        seed,
        runs,
        particles_per_goal: particles,
    })
}

fn write_table(table: &InferenceTable, path: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    table.write(&mut buf)?;
    output(path, std::str::from_utf8(&buf).expect("csv output is utf-8"))
}

fn cmd_infer(a: InferArgs) -> Result<()> {
    let mut stimuli = load_stimuli(&a.source)?;
    if let Some(path) = &a.trajectory {
        ensure!(stimuli.len() == 1, "--trajectory needs exactly one stimulus");
        let s = &mut stimuli[0];
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut traj = Trajectory::from_jsonl(&s.task, &text).with_context(|| format!("{}", path.display()))?;
        ensure!(!traj.is_empty(), "{}: trajectory has no steps", path.display());
        if traj.judgment_points.is_empty() {
            traj.judgment_points = even_points(traj.len());
        }
        s.action_texts = traj.actions.iter().map(|&x| s.task.action(x).to_string()).collect();
        s.trajectory = traj;
    }
    let protocol = protocol(a.seed, a.runs, a.particles)?;
    let mut table = InferenceTable::new();
    for &kind in &a.models {
        for s in &stimuli {
            let cfg = configure(s.domain, kind, &a.overrides)?;
            let runs = run_series(s, &cfg, &protocol, None).with_context(|| format!("{} with {kind}", s.id))?;
            let points: Vec<usize> = if a.every_step {
                (1..=s.trajectory.len()).collect()
            } else {
                s.judgment_points().to_vec()
            };
            let goals = s.goal_labels();
            table.push_series(&s.id, &goals, &average(&runs), &points, kind.name(), None);
            if a.per_run {
                for (r, series) in runs.iter().enumerate() {
                    table.push_series(&s.id, &goals, series, &points, kind.name(), Some(r));
                }
            }
        }
    }
    write_table(&table, a.out.as_deref())
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let stimuli = load_stimuli(&a.source)?;
    let domain = single_domain(&stimuli)?;
    let grid: ParamGrid = match &a.grid {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml_grid(&text).with_context(|| format!("{}", p.display()))?
        }
        None => ParamGrid::standard(),
    };
    let judgments = read_judgments_path(&a.human)?;
    let cohort = build_cohort(&judgments, &index(&stimuli))?;
    ensure!(!cohort.included.is_empty(), "every participant was excluded");
    let human = cohort.average();
    let protocol = protocol(a.seed, a.runs, a.particles)?;
    let models = if a.models.is_empty() { ModelKind::ALL.to_vec() } else { a.models };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let mut text = format!(
        "participants: {} kept, {} excluded\n\n",
        cohort.included.len(),
        cohort.excluded.len()
    );
    let mut rs = Vec::new();
    let mut best = InferenceTable::new();
    for kind in models {
        let cells = grid.cells(kind, domain)?;
        let fit = grid_search(&cells, &stimuli, &human, &protocol).with_context(|| format!("fitting {kind}"))?;
        text += &report(domain, &fit, stimuli.len(), human.len());
        text.push('\n');
        let path = a.out.join(format!("cells-{kind}.csv"));
        write_cells(&fit.records(), create(&path)?)?;
        best.extend(cell_table(fit.best()));
        rs.push((kind, fit.r_values()));
    }
    let path = a.out.join("sensitivity.csv");
    write_sensitivity(&sensitivity_table(&rs), create(&path)?)?;
    best.write_path(&a.out.join("best-posteriors.csv"))?;
    let path = a.out.join("report.txt");
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

fn toml_grid(text: &str) -> Result<ParamGrid> {
    // every axis is optional; missing ones fall back to the published grid
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Partial {
        goal_noise: Option<Vec<f64>>,
        r: Option<Vec<u32>>,
        q: Option<Vec<f64>>,
        gamma: Option<Vec<f64>>,
        action_noise: Option<Vec<f64>>,
        alpha: Option<Vec<f64>>,
    }
    let p: Partial = toml::from_str(text)?;
    let d = ParamGrid::standard();
    Ok(ParamGrid {
        goal_noise: p.goal_noise.unwrap_or(d.goal_noise),
        r: p.r.unwrap_or(d.r),
        q: p.q.unwrap_or(d.q),
        gamma: p.gamma.unwrap_or(d.gamma),
        action_noise: p.action_noise.unwrap_or(d.action_noise),
        alpha: p.alpha.unwrap_or(d.alpha),
    })
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn restrict(values: &BTreeMap<Key, f64>, ids: &BTreeSet<String>) -> BTreeMap<Key, f64> {
    values.iter().filter(|(k, _)| ids.contains(&k.0)).map(|(k, v)| (k.clone(), *v)).collect()
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let stimuli = load_stimuli(&a.source)?;
    let idx = index(&stimuli);
    let judgments = read_judgments_path(&a.human)?;
    let cohort = build_cohort(&judgments, &idx)?;
    ensure!(!cohort.included.is_empty(), "every participant was excluded");
    let mut table = InferenceTable::new();
    for p in &a.posteriors {
        table.extend(InferenceTable::read_path(p)?);
    }
    table.check_normalised(1e-6)?;

    let mut subsets: Vec<(String, BTreeSet<String>)> = vec![("all".into(), idx.keys().cloned().collect())];
    let mut by_category: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (id, info) in &idx {
        by_category.entry(info.category.clone()).or_default().insert(id.clone());
    }
    subsets.extend(by_category);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "subset", "participants", "r", "ci_low", "ci_high"])?;
    let mut text = format!(
        "participants: {} kept, {} excluded\n\
         interval: {:.0}% percentile bootstrap, {} resamples of participants drawn with replacement\n",
        cohort.included.len(),
        cohort.excluded.len(),
        BOOTSTRAP_LEVEL * 100.0,
        a.resamples
    );
    text += &format!("{:<12} {:<24} {:>7} {:>17}\n", "model", "subset", "r", "95% interval");
    for model in table.models() {
        let values = table.values(&model);
        for (name, ids) in &subsets {
            let m = restrict(&values, ids);
            let ps: Vec<ParticipantValues> = cohort
                .included
                .values()
                .map(|v| restrict(v, ids))
                .filter(|v| !v.is_empty())
                .collect();
            let r = table_r(&btom_harness::judgments::average_values(&ps), &m)
                .with_context(|| format!("{model} on {name}"))?;
            let ci = bootstrap_ci(&ps, &m, a.resamples, BOOTSTRAP_LEVEL, a.seed)
                .with_context(|| format!("{model} on {name}"))?;
            text += &format!("{model:<12} {name:<24} {r:>7.3} [{:>6.3}, {:>6.3}]\n", ci.low, ci.high);
            w.write_record([
                model.clone(),
                name.clone(),
                ps.len().to_string(),
                r.to_string(),
                ci.low.to_string(),
                ci.high.to_string(),
            ])?;
        }
    }
    if let Some(p) = &a.out {
        fs::write(p, w.into_inner()?).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let mut table = InferenceTable::new();
    for p in &a.posteriors {
        table.extend(InferenceTable::read_path(p)?);
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut written = 0;
    for model in table.models() {
        let mut series: BTreeMap<String, BTreeMap<usize, BTreeMap<String, f64>>> = BTreeMap::new();
        for ((stim, point, goal), p) in table.values(&model) {
            series.entry(stim).or_default().entry(point).or_default().insert(goal, p);
        }
        for (stim, points) in series {
            let goals: Vec<String> = points.values().next().map(|g| g.keys().cloned().collect()).unwrap_or_default();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(std::iter::once("t".to_string()).chain(goals.iter().cloned()))?;
            for (t, probs) in &points {
                let mut rec = vec![t.to_string()];
                for g in &goals {
                    let p = probs.get(g).with_context(|| format!("{stim} t={t}: no value for goal {g}"))?;
                    rec.push(p.to_string());
                }
                w.write_record(rec)?;
            }
            let path = a.out.join(format!("{stim}.{model}.csv"));
            fs::write(&path, w.into_inner()?).with_context(|| format!("writing {}", path.display()))?;
            written += 1;
        }
    }
    eprintln!("wrote {written} series to {}", a.out.display());
    Ok(())
}

fn cmd_synthesize(a: SynthesizeArgs) -> Result<()> {
    ensure!(a.participants >= 1, "--participants must be at least 1");
    ensure!((0.0..=1.0).contains(&a.dont_know), "--dont-know must lie in [0, 1]");
    ensure!(a.logit_noise >= 0.0, "--logit-noise must be >= 0");
    let values = match &a.posteriors {
        Some(p) => {
            let t = InferenceTable::read_path(p)?;
            ensure!(t.models().contains(a.model.name()), "{} has no rows for model {}", p.display(), a.model);
            t.values(a.model.name())
        }
        None => {
            let stimuli = load_stimuli(&a.source)?;
            let protocol = protocol(a.seed, a.runs, a.particles)?;
            let mut t = InferenceTable::new();
            for s in &stimuli {
                let cfg = configure(s.domain, a.model, &a.overrides)?;
                let runs = run_series(s, &cfg, &protocol, None).with_context(|| s.id.clone())?;
                t.push_series(&s.id, &s.goal_labels(), &average(&runs), s.judgment_points(), a.model.name(), None);
            }
            t.values(a.model.name())
        }
    };
    let response = ResponseModel {
        logit_noise: a.logit_noise,
        dont_know: a.dont_know,
        ..ResponseModel::default()
    };
    let js = synthesize_cohort(&values, a.participants, &response, a.seed);
    let mut buf = Vec::new();
    write_judgments(&js, &mut buf)?;
    output(a.out.as_deref(), std::str::from_utf8(&buf).expect("csv output is utf-8"))
}
