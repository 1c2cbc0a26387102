//! Command-line front end for the timing side-channel laboratory.
//!
//! Subcommands mirror the library layers: `sim` runs the serving
//! simulator, `workload` builds labeled trace datasets, `capture`
//! converts between trace JSONL and pcap, `attack` fits and runs the
//! adversary procedures, `defend` applies and evaluates pacing, and
//! `report` aggregates saved metrics.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlab::attacks::{
    boost_fit, boost_infer, extract_secret, fit_ab, fit_multiclass, load_model, pr_sweep,
    save_model, score_ab, suffix_search, Arch, BoostConfig, DifficultyScorer, ExtractionConfig,
    FeatureSpec, GcsConfig, ModelKind, MulticlassConfig, PlantedRephraser,
    greedy_coordinate_search, rollout_difficulty,
};
use tlab::capture::{export_pcap, import_pcap, EndpointFilter, ImportOptions, Trace};
use tlab::defense::{pace, tradeoff_sweep, DefensePolicy};
use tlab::error::{Error, Result};
use tlab::harness::{
    easy_corpus_text, language_dataset, language_presets, line_chart, model_pair,
    random_corpus_text, topic_dataset, topic_presets, write_metrics_csv, write_pr_curve_csv,
    write_tradeoff_csv, Metrics, Pipeline, Series,
};
use tlab::specsim::{
    baseline_generate, span_ns, speculative_generate, ScriptedGapResponder, SpeculativeConfig,
};
use tlab::util::ms_to_ns;
use tlab::wirechan::FrameSpec;

#[derive(Parser)]
#[command(name = "tlab", about = "timing side-channel laboratory for token streaming")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    OpenaiLike,
    ClaudeLike,
}

impl Preset {
    fn frame(self) -> FrameSpec {
        match self {
            Preset::OpenaiLike => FrameSpec::openai_like(),
            Preset::ClaudeLike => FrameSpec::claude_like(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadKind {
    Easy,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Topics,
    Languages,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArchArg {
    Gmm,
    Convnet,
}

#[derive(Args)]
struct Common {
    /// Trial seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Wire framing preset.
    #[arg(long, global = true, value_enum, default_value_t = Preset::OpenaiLike)]
    preset: Preset,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serving simulator.
    Sim {
        #[command(subcommand)]
        cmd: SimCmd,
    },
    /// Labeled dataset generation.
    Workload {
        #[command(subcommand)]
        cmd: WorkloadCmd,
    },
    /// Trace import/export.
    Capture {
        #[command(subcommand)]
        cmd: CaptureCmd,
    },
    /// Adversary procedures.
    Attack {
        #[command(subcommand)]
        cmd: AttackCmd,
    },
    /// Pacing defense.
    Defend {
        #[command(subcommand)]
        cmd: DefendCmd,
    },
    /// Aggregate saved metrics files into one CSV.
    Report {
        /// Directory of metrics JSON files.
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// Generate one response and write the observed trace.
    Run {
        #[arg(long, value_enum, default_value_t = WorkloadKind::Easy)]
        workload: WorkloadKind,
        #[arg(long, default_value_t = 100)]
        tokens: usize,
        /// Plain autoregressive serving instead of speculative.
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum WorkloadCmd {
    /// Write a labeled dataset as out/<class>/<trial>.jsonl.
    Gen {
        #[arg(long, value_enum)]
        kind: DatasetKind,
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 80)]
        tokens: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum CaptureCmd {
    /// Read a pcap and write one JSONL trace per TCP stream.
    ImportPcap {
        #[arg(long)]
        input: PathBuf,
        /// Server endpoint as A.B.C.D:port; packets from it are
        /// server-to-client.
        #[arg(long, default_value = "10.0.0.1:443")]
        server: String,
        /// Keep only the first N packets per stream; drop shorter streams.
        #[arg(long)]
        first_packets: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bundle JSONL traces into one pcap.
    ExportPcap {
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "10.0.0.1:443")]
        server: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AttackCmd {
    /// Fit a classifier on a labeled dataset directory.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ArchArg::Gmm)]
        arch: ArchArg,
        /// Feature window length (delays kept per trace).
        #[arg(long, default_value_t = 50)]
        k: usize,
        /// Add packet sizes as a second feature channel.
        #[arg(long)]
        sizes: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Classify one trace with a saved model.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Two-class threshold sweep with precision/recall output.
    SweepPr {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Identify a class from repeated observations by boosted scores.
    Boost {
        /// Labeled training directory.
        #[arg(long)]
        data: PathBuf,
        /// Directory of repeated observations of one unknown.
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Recover a planted numeric secret digit by digit.
    ExtractSecret {
        #[arg(long)]
        secret: String,
        /// Distinguishing rate of the probe phrasing.
        #[arg(long, default_value_t = 0.972)]
        gap: f64,
        #[arg(long, default_value_t = 25)]
        reps: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Search probe phrasings for a higher distinguishing rate.
    SuffixSearch {
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        #[arg(long, default_value_t = 10)]
        keep: usize,
        #[command(flatten)]
        common: Common,
    },
    /// White-box difficulty scoring and prompt search demo.
    Difficulty {
        #[arg(long, value_enum, default_value_t = WorkloadKind::Random)]
        workload: WorkloadKind,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum DefendCmd {
    /// Pace one trace onto the slot grid.
    Pace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        interval_ms: f64,
        #[arg(long, default_value_t = 1024)]
        pad_bytes: u32,
        /// Pad every stream out to this fixed duration so lengths leak
        /// nothing.
        #[arg(long)]
        horizon_ms: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Overhead (and optionally attack accuracy) across intervals.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40,80")]
        intervals_ms: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        pad_bytes: u32,
        #[arg(long)]
        horizon_ms: Option<f64>,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Attack accuracy against a defended dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        interval_ms: f64,
        #[arg(long, default_value_t = 1024)]
        pad_bytes: u32,
        #[arg(long)]
        horizon_ms: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn pipeline(common: &Common) -> Pipeline {
    let mut p = Pipeline::ideal().with_seed(common.seed);
    p.frame = common.preset.frame();
    p
}

/// Load `dir/<class>/<trace>.jsonl` into labeled per-class trace lists.
fn load_labeled_dir(dir: &Path) -> Result<Vec<(String, Vec<Trace>)>> {
    let mut classes = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().to_string();
        let mut files: Vec<_> = std::fs::read_dir(entry.path())?.collect::<std::io::Result<_>>()?;
        files.sort_by_key(|e| e.file_name());
        let mut traces = Vec::new();
        for f in files {
            if f.path().extension().is_some_and(|e| e == "jsonl") {
                traces.push(Trace::load_jsonl(&f.path())?);
            }
        }
        if !traces.is_empty() {
            classes.push((name, traces));
        }
    }
    if classes.is_empty() {
        return Err(Error::BadTrace(format!("no class directories with traces under {}", dir.display())));
    }
    Ok(classes)
}

fn save_labeled_dir(dir: &Path, classes: &[(String, Vec<Trace>)]) -> Result<()> {
    for (name, traces) in classes {
        let cdir = dir.join(name);
        std::fs::create_dir_all(&cdir)?;
        for (i, t) in traces.iter().enumerate() {
            t.save_jsonl(&cdir.join(format!("{i:04}.jsonl")))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Sim { cmd } => sim(cmd),
        Cmd::Workload { cmd } => workload(cmd),
        Cmd::Capture { cmd } => capture(cmd),
        Cmd::Attack { cmd } => attack(cmd),
        Cmd::Defend { cmd } => defend(cmd),
        Cmd::Report { metrics, out } => report(&metrics, &out),
    }
}

fn sim(cmd: SimCmd) -> Result<()> {
    match cmd {
        SimCmd::Run { workload, tokens, baseline, out, common } => {
            let text = match workload {
                WorkloadKind::Easy => easy_corpus_text(1200),
                WorkloadKind::Random => random_corpus_text(3000, 12, common.seed),
            };
            let mp = model_pair(&text)?;
            let pipe = pipeline(&common);
            let cfg = SpeculativeConfig { seed: common.seed, ..pipe.spec.clone() };
            let events = if baseline {
                baseline_generate(&mp.prompt, &mp.target, &cfg, tokens)?
            } else {
                speculative_generate(&mp.prompt, &mp.draft, &mp.target, &cfg, tokens)?
            };
            let vocab = mp.vocab;
            let trace = tlab::harness::trace_from_events(
                &events,
                &pipe,
                &|t| vocab.byte_len(t),
                "sim",
                "sim-run",
            );
            trace.save_jsonl(&out)?;
            println!(
                "wrote {} packets, span {:.1} ms -> {}",
                trace.records.len(),
                span_ns(&events) as f64 / 1e6,
                out.display()
            );
            Ok(())
        }
    }
}

fn workload(cmd: WorkloadCmd) -> Result<()> {
    match cmd {
        WorkloadCmd::Gen { kind, per_class, tokens, out, common } => {
            let pipe = pipeline(&common);
            let classes = match kind {
                DatasetKind::Topics => {
                    topic_dataset(&topic_presets(), per_class, tokens, common.seed, &pipe)?
                }
                DatasetKind::Languages => {
                    language_dataset(&language_presets(), per_class, tokens, common.seed, &pipe)?
                }
            };
            save_labeled_dir(&out, &classes)?;
            for (name, ts) in &classes {
                println!("{name}: {} traces", ts.len());
            }
            Ok(())
        }
    }
}

fn capture(cmd: CaptureCmd) -> Result<()> {
    match cmd {
        CaptureCmd::ImportPcap { input, server, first_packets, out } => {
            let filter = EndpointFilter::parse(&server)?;
            let traces = import_pcap(&input, filter, &ImportOptions { first_packets })?;
            std::fs::create_dir_all(&out)?;
            for (i, t) in traces.iter().enumerate() {
                t.save_jsonl(&out.join(format!("stream-{i:04}.jsonl")))?;
            }
            println!("imported {} streams -> {}", traces.len(), out.display());
            Ok(())
        }
        CaptureCmd::ExportPcap { inputs, server, out } => {
            let traces: Vec<Trace> =
                inputs.iter().map(|p| Trace::load_jsonl(p)).collect::<Result<_>>()?;
            export_pcap(&traces, &out, EndpointFilter::parse(&server)?)?;
            println!("exported {} traces -> {}", traces.len(), out.display());
            Ok(())
        }
    }
}

fn attack(cmd: AttackCmd) -> Result<()> {
    match cmd {
        AttackCmd::Fit { data, arch, k, sizes, out, common } => {
            let classes = load_labeled_dir(&data)?;
            let cfg = MulticlassConfig {
                arch: match arch {
                    ArchArg::Gmm => Arch::Gmm,
                    ArchArg::Convnet => Arch::Convnet,
                },
                feature: FeatureSpec { k, include_sizes: sizes, ..FeatureSpec::default() },
                seed: common.seed,
                ..Default::default()
            };
            let clf = fit_multiclass(&classes, &cfg)?;
            save_model(&out, &ModelKind::Multiclass(clf))?;
            println!("fitted {} classes -> {}", classes.len(), out.display());
            Ok(())
        }
        AttackCmd::Infer { model, trace } => {
            let ModelKind::Multiclass(clf) = load_model(&model)? else {
                return Err(Error::BadConfig("model is not a multiclass classifier".into()));
            };
            let t = Trace::load_jsonl(&trace)?;
            let scores = clf.log_scores(&t)?;
            let idx = clf.predict(&t)?;
            println!("predicted: {}", clf.classes()[idx]);
            for (name, s) in clf.classes().iter().zip(scores) {
                println!("  {name}: {s:.3}");
            }
            Ok(())
        }
        AttackCmd::SweepPr { data, k, out_csv, out_svg, common: _ } => {
            let classes = load_labeled_dir(&data)?;
            if classes.len() != 2 {
                return Err(Error::BadConfig("sweep-pr needs exactly two classes".into()));
            }
            let cfg = tlab::attacks::AbConfig {
                feature: FeatureSpec::with_k(k),
                ..Default::default()
            };
            // Split: first half trains, second half is swept.
            let half = |ts: &[Trace]| -> (Vec<Trace>, Vec<Trace>) {
                let m = ts.len() / 2;
                (ts[..m].to_vec(), ts[m..].to_vec())
            };
            let (tr_a, te_a) = half(&classes[0].1);
            let (tr_b, te_b) = half(&classes[1].1);
            let pair = fit_ab(&tr_a, &tr_b, &cfg)?;
            let mut scores = Vec::new();
            let mut labels = Vec::new();
            for t in &te_a {
                scores.push(score_ab(t, &pair)?);
                labels.push(false);
            }
            for t in &te_b {
                scores.push(score_ab(t, &pair)?);
                labels.push(true);
            }
            let curve = pr_sweep(&scores, &labels);
            write_pr_curve_csv(&out_csv, &curve)?;
            if let Some(svg) = out_svg {
                line_chart(
                    &svg,
                    &format!("precision-recall (AUC {:.3})", curve.auc),
                    "recall",
                    "precision",
                    &[Series {
                        name: classes[1].0.clone(),
                        points: curve.points.iter().map(|p| (p.recall, p.precision)).collect(),
                    }],
                )?;
            }
            println!("pr-auc {:.4} over {} points", curve.auc, curve.points.len());
            Ok(())
        }
        AttackCmd::Boost { data, obs, k } => {
            let classes = load_labeled_dir(&data)?;
            let cfg = BoostConfig { feature: FeatureSpec::with_k(k), ..Default::default() };
            let ens = boost_fit(&classes, &cfg)?;
            let mut observations = Vec::new();
            let mut files: Vec<_> = std::fs::read_dir(&obs)?.collect::<std::io::Result<_>>()?;
            files.sort_by_key(|e| e.file_name());
            for f in files {
                if f.path().extension().is_some_and(|e| e == "jsonl") {
                    observations.push(Trace::load_jsonl(&f.path())?);
                }
            }
            let (winner, scores) = boost_infer(&ens, &observations)?;
            println!(
                "identified: {} (score {:.2}, {} observations)",
                ens.classes[winner], scores[winner], observations.len()
            );
            Ok(())
        }
        AttackCmd::ExtractSecret { secret, gap, reps, common } => {
            let responder = ScriptedGapResponder::new(&secret, common.seed)
                .with_template("probe", gap);
            let cfg = ExtractionConfig {
                template: "probe".into(),
                positions: secret.len(),
                reps,
                spec: SpeculativeConfig { seed: common.seed, ..Default::default() },
            };
            let out = extract_secret(&responder, &cfg)?;
            println!(
                "recovered: {} ({} queries, ambiguous: {})",
                out.digits,
                out.queries,
                out.any_ambiguous()
            );
            Ok(())
        }
        AttackCmd::SuffixSearch { rounds, keep, common } => {
            let seed_template = "Is the first digit in the number X?";
            let mut reph = PlantedRephraser::new(common.seed, seed_template);
            let probe = reph.clone();
            let out = suffix_search(seed_template, rounds, keep, &mut reph, &mut |t| {
                probe.gap_of(t)
            })?;
            println!(
                "best gap {:.3} after {} rounds ({} rephraser calls)",
                out.best.gap, out.rounds, out.rephraser_calls
            );
            for (i, g) in out.history.iter().enumerate() {
                println!("  round {:2}: {g:.3}", i + 1);
            }
            Ok(())
        }
        AttackCmd::Difficulty { workload, horizon, common } => {
            let text = match workload {
                WorkloadKind::Easy => easy_corpus_text(1200),
                WorkloadKind::Random => random_corpus_text(3000, 12, common.seed),
            };
            let mp = model_pair(&text)?;
            let scorer = DifficultyScorer { draft: &mp.draft, target: &mp.target };
            let base = rollout_difficulty(&scorer, &mp.prompt, horizon);
            let candidates: Vec<_> = mp.vocab.ids().collect();
            let cfg = GcsConfig { sweeps: 2, horizon, maximize: true };
            let out = greedy_coordinate_search(&scorer, &mp.prompt, &candidates, &cfg)?;
            println!("rollout difficulty: start {base:.4}, after search {:.4}", out.score);
            println!("evaluations: {}", out.evaluations);
            Ok(())
        }
    }
}

fn defend(cmd: DefendCmd) -> Result<()> {
    match cmd {
        DefendCmd::Pace { input, interval_ms, pad_bytes, horizon_ms, out } => {
            let t = Trace::load_jsonl(&input)?;
            let mut policy = DefensePolicy::new(ms_to_ns(interval_ms), pad_bytes);
            if let Some(h) = horizon_ms {
                policy = policy.with_horizon(ms_to_ns(h));
            }
            let (paced, rep) = pace(&t, &policy)?;
            paced.save_jsonl(&out)?;
            println!(
                "{} slots ({} real, {} pads), packet overhead {:.1}%, mean added delay {:.2} ms",
                rep.slot_packets,
                rep.real_packets,
                rep.pad_slots,
                rep.packet_overhead * 100.0,
                rep.mean_added_delay_ns / 1e6
            );
            Ok(())
        }
        DefendCmd::Sweep { data, intervals_ms, pad_bytes, horizon_ms, out_csv, out_svg, common } => {
            let classes = load_labeled_dir(&data)?;
            let all: Vec<Trace> =
                classes.iter().flat_map(|(_, ts)| ts.iter().cloned()).collect();
            let intervals: Vec<u64> = intervals_ms.iter().map(|&m| ms_to_ns(m)).collect();
            let mut base = DefensePolicy::new(1, pad_bytes);
            if let Some(h) = horizon_ms {
                base = base.with_horizon(ms_to_ns(h));
            }
            let mut eval = defended_accuracy_fn(&classes, common.seed);
            let points = tradeoff_sweep(&all, &intervals, &base, Some(&mut eval))?;
            write_tradeoff_csv(&out_csv, &points)?;
            if let Some(svg) = out_svg {
                line_chart(
                    &svg,
                    "pacing trade-off",
                    "interval (ms)",
                    "value",
                    &[
                        Series {
                            name: "packet overhead".into(),
                            points: points
                                .iter()
                                .map(|p| (p.interval_ns as f64 / 1e6, p.packet_overhead))
                                .collect(),
                        },
                        Series {
                            name: "attack accuracy".into(),
                            points: points
                                .iter()
                                .filter_map(|p| {
                                    p.attack_accuracy.map(|a| (p.interval_ns as f64 / 1e6, a))
                                })
                                .collect(),
                        },
                    ],
                )?;
            }
            for p in &points {
                println!(
                    "{:6.1} ms: overhead {:6.1}%, accuracy {}",
                    p.interval_ns as f64 / 1e6,
                    p.packet_overhead * 100.0,
                    p.attack_accuracy.map(|a| format!("{:.3}", a)).unwrap_or_default()
                );
            }
            Ok(())
        }
        DefendCmd::Evaluate { data, interval_ms, pad_bytes, horizon_ms, common } => {
            let classes = load_labeled_dir(&data)?;
            let mut policy = DefensePolicy::new(ms_to_ns(interval_ms), pad_bytes);
            if let Some(h) = horizon_ms {
                policy = policy.with_horizon(ms_to_ns(h));
            }
            let mut defended = Vec::new();
            for (name, ts) in &classes {
                let paced: Vec<Trace> =
                    ts.iter().map(|t| pace(t, &policy).map(|(p, _)| p)).collect::<Result<_>>()?;
                defended.push((name.clone(), paced));
            }
            let acc = holdout_accuracy(&defended, common.seed)?;
            let chance = 1.0 / classes.len() as f64;
            println!("attack accuracy on defended traces: {acc:.3} (chance {chance:.3})");
            Ok(())
        }
    }
}

/// Closure for the sweep: pace both classes, refit the attack on half the
/// defended traces, and report held-out accuracy.
fn defended_accuracy_fn<'a>(
    classes: &'a [(String, Vec<Trace>)],
    seed: u64,
) -> impl FnMut(&[Trace]) -> Result<f64> + 'a {
    // The sweep flattens class order; rebuild labels by position.
    let sizes: Vec<usize> = classes.iter().map(|(_, ts)| ts.len()).collect();
    move |paced: &[Trace]| {
        let mut defended = Vec::new();
        let mut off = 0;
        for ((name, _), &n) in classes.iter().zip(&sizes) {
            defended.push((name.clone(), paced[off..off + n].to_vec()));
            off += n;
        }
        holdout_accuracy(&defended, seed)
    }
}

/// Train on the first half of each class, report accuracy on the rest.
fn holdout_accuracy(classes: &[(String, Vec<Trace>)], seed: u64) -> Result<f64> {
    let mut train = Vec::new();
    let mut test: Vec<(Trace, usize)> = Vec::new();
    for (ci, (name, ts)) in classes.iter().enumerate() {
        let m = ts.len() / 2;
        if m == 0 {
            return Err(Error::EmptyClass);
        }
        train.push((name.clone(), ts[..m].to_vec()));
        for t in &ts[m..] {
            test.push((t.clone(), ci));
        }
    }
    let cfg = MulticlassConfig { seed, ..Default::default() };
    let clf = fit_multiclass(&train, &cfg)?;
    let correct = test
        .iter()
        .filter(|(t, ci)| clf.predict(t).map(|p| p == *ci).unwrap_or(false))
        .count();
    Ok(correct as f64 / test.len() as f64)
}

fn report(metrics_dir: &Path, out: &Path) -> Result<()> {
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(metrics_dir)?.collect::<std::io::Result<_>>()?;
    files.sort_by_key(|e| e.file_name());
    for f in files {
        if !f.path().extension().is_some_and(|e| e == "json") {
            continue;
        }
        let stem = f.path().file_stem().unwrap().to_string_lossy().to_string();
        let m = Metrics::load(&f.path())?;
        for (k, v) in &m.values {
            rows.push((format!("{stem}/{k}"), *v));
        }
    }
    if rows.is_empty() {
        return Err(Error::NoMetrics);
    }
    write_metrics_csv(out, &rows)?;
    println!("wrote {} metrics -> {}", rows.len(), out.display());
    Ok(())
}
