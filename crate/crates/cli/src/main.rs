mod manifest;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eca_infodyn_core::classify::{
    combine, compute_te_threshold, ensemble_pass, random_input, single_cell_input, single_cell_pass, structured_input,
    ClassificationThresholds, EnsembleKind, ExperimentConfig, DEFAULT_MASTER_SEED, EXPERIMENT_HISTORY,
};
use eca_infodyn_core::coarse::{build_transition_graph_for, validate_hierarchy, TransitionGraph};
use eca_infodyn_core::info::TeConfig;
use eca_infodyn_core::labels::{reference_classification, wolfram_labels};
use eca_infodyn_core::{representatives, RuleCode, SpacetimeField};

use manifest::{file_digest, ConfigEcho, RunManifest, MANIFEST_FILE};
use output::*;

const THREADS_ENV: &str = "ECA_INFODYN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "eca-infodyn",
    version,
    about = "Transfer-entropy classification of elementary cellular automata"
)]
struct Cli {
    /// Worker threads (falls back to ECA_INFODYN_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one rule and dump its space-time field.
    Evolve(EvolveArgs),
    /// Classify representatives by single-cell and ensemble transfer entropy.
    Classify(ClassifyArgs),
    /// Search supercell coarse-graining transitions and check the hierarchy.
    CoarseGrain(CoarseArgs),
    /// Re-run a classify invocation from its manifest and compare digests.
    Rerun(RerunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InputSpec {
    Single,
    Random,
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EnsembleSpec {
    Random,
    Density,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Packed,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long)]
    rule: RuleCode,
    #[arg(long, value_enum, default_value = "single")]
    input: InputSpec,
    #[arg(long, default_value_t = 250)]
    steps: usize,
    #[arg(long, default_value_t = 101)]
    width: usize,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    /// Black cells for `--input density` (default: half the width).
    #[arg(long)]
    n_black: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Output file; text goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Restrict the ensemble pass to these rules (repeatable). The threshold
    /// always comes from all 88 representatives.
    #[arg(long, conflicts_with = "all")]
    rule: Vec<RuleCode>,
    /// Classify all 88 representatives (the default without --rule).
    #[arg(long)]
    all: bool,
    /// Ensemble of inputs compared against the single-cell input.
    #[arg(long, value_enum, default_value = "random")]
    input: EnsembleSpec,
    #[arg(long, default_value_t = 20)]
    n_inputs: usize,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 101)]
    width: usize,
    #[arg(long, default_value_t = 250)]
    steps: usize,
    #[arg(long, default_value_t = 50)]
    burn_in: usize,
    #[arg(long, default_value_t = EXPERIMENT_HISTORY.0)]
    k: usize,
    #[arg(long, default_value_t = EXPERIMENT_HISTORY.1)]
    l: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CoarseArgs {
    /// Search from these rules only (repeatable).
    #[arg(long, conflicts_with = "all")]
    rule: Vec<RuleCode>,
    /// Search from all 88 representatives (the default without --rule).
    #[arg(long)]
    all: bool,
    /// Largest supercell size; 4 searches 65 534 projections per rule.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
    n_max: u8,
    /// Also list transitions whose target is rule 0.
    #[arg(long)]
    show_zero: bool,
    /// Classification CSV to validate the hierarchy against.
    #[arg(long)]
    classification: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for regenerated outputs (default: next to the manifest).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = resolve_threads(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let threads = pool.current_num_threads();
    pool.install(|| match cli.command {
        Command::Evolve(args) => evolve(args),
        Command::Classify(args) => classify(args, threads),
        Command::CoarseGrain(args) => coarse_grain(args),
        Command::Rerun(args) => rerun(args, threads),
    })
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count")),
        Err(_) => Ok(0),
    }
}

fn evolve(args: EvolveArgs) -> Result<()> {
    let input = match args.input {
        InputSpec::Single => single_cell_input(args.width)?,
        InputSpec::Random => random_input(args.width, args.seed)?,
        InputSpec::Density => structured_input(args.width, args.n_black.unwrap_or(args.width / 2), args.seed)?,
    };
    let field = SpacetimeField::evolve(&input, args.rule, args.steps, 0)?;
    let bytes = match args.format {
        Format::Text => field_text(&field).into_bytes(),
        Format::Packed => field_packed(&field),
    };
    match args.out {
        Some(path) => fs::write(&path, bytes).with_context(|| format!("writing {}", path.display())),
        None if args.format == Format::Text => Ok(std::io::stdout().lock().write_all(&bytes)?),
        None => bail!("packed output needs --out"),
    }
}

/// Canonicalizes rules to representatives, echoing any remapping.
fn canonical(rules: &[RuleCode]) -> Vec<RuleCode> {
    let mut reps: Vec<RuleCode> = rules
        .iter()
        .map(|&r| {
            let rep = r.representative();
            if rep != r {
                eprintln!("rule {r} -> representative {rep}");
            }
            rep
        })
        .collect();
    reps.sort();
    reps.dedup();
    reps
}

fn classify(args: ClassifyArgs, threads: usize) -> Result<()> {
    let ensemble = match args.input {
        EnsembleSpec::Random => EnsembleKind::Random,
        EnsembleSpec::Density => EnsembleKind::StructuredDensity,
    };
    let cfg = ExperimentConfig {
        width: args.width,
        steps: args.steps,
        burn_in: args.burn_in,
        n_inputs: args.n_inputs,
        te: TeConfig::new(args.k, args.l)?,
        master_seed: args.seed,
        ensemble,
    };
    let rules = (!args.all && !args.rule.is_empty()).then(|| canonical(&args.rule));
    let echo = ConfigEcho::new(
        &cfg,
        ensemble.as_str(),
        rules.as_ref().map(|r| r.iter().map(|r| r.code()).collect()),
    );
    let command: Vec<String> = std::env::args().collect();
    let manifest = run_classify(&command.join(" "), echo, &args.out, threads)?;
    eprintln!(
        "wrote {} outputs and {} to {}",
        manifest.outputs.len(),
        MANIFEST_FILE,
        args.out.display()
    );
    Ok(())
}

fn run_classify(command: &str, echo: ConfigEcho, out: &Path, threads: usize) -> Result<RunManifest> {
    let cfg = echo.experiment()?;
    cfg.validate()?;
    let mut manifest = RunManifest::new(command, echo.clone(), threads);
    let labels = wolfram_labels();
    let all = representatives();
    let rules: Vec<RuleCode> = match &echo.rules {
        Some(codes) => canonical(&codes.iter().map(|&c| RuleCode::new(c)).collect::<Vec<_>>()),
        None => all.clone(),
    };

    let singles = single_cell_pass(&all, &cfg)?;
    let threshold = compute_te_threshold(&singles, &labels)?;
    let selected: Vec<_> = singles
        .iter()
        .filter(|s| rules.contains(&s.representative))
        .copied()
        .collect();
    let ensemble = ensemble_pass(&rules, &cfg)?;
    let result = combine(
        &selected,
        &ensemble,
        cfg.ensemble,
        &labels,
        ClassificationThresholds::with_te_threshold(threshold),
    )?;
    manifest.te_threshold_bits = Some(threshold);
    for r in &result.records {
        manifest
            .input_seeds
            .insert(r.representative.code(), r.input_seeds.clone());
    }

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let files = [
        (CLASSIFICATION_FILE, classification_csv(&result)),
        (FIG1A_FILE, single_cell_csv(&selected)),
        (FIG1B_FILE, first_input_csv(&result)),
        (FIG2_FILE, change_csv(&result)),
    ];
    for (name, text) in &files {
        fs::write(out.join(name), text).with_context(|| format!("writing {name}"))?;
        manifest.record_output(out, name)?;
    }
    manifest.write(out)?;

    println!(
        "te threshold: {threshold:.6} bits ({} ensemble, k={}, l={})",
        cfg.ensemble, cfg.te.k, cfg.te.l
    );
    let reference = reference_classification();
    let mut mismatches = 0;
    for r in &result.records {
        let expected = reference.get(r.representative);
        if expected != Some(r.info_class) {
            mismatches += 1;
            println!(
                "mismatch: rule {} computed {} reference {} (te1 {:.6}, max_change {:.4})",
                r.representative,
                r.info_class,
                expected.map_or("-", |c| c.as_str()),
                r.te1.bits(),
                r.max_change
            );
        }
    }
    println!(
        "{} of {} rules match the reference table",
        result.records.len() - mismatches,
        result.records.len()
    );
    let l_shape = result.l_shape_violations();
    if !l_shape.is_empty() {
        println!("l-shape violations: {l_shape:?}");
    }
    Ok(manifest)
}

fn rerun(args: RerunArgs, threads: usize) -> Result<()> {
    let original = RunManifest::read(&args.manifest)?;
    let out = match args.out {
        Some(dir) => dir,
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let command = format!("rerun of: {}", original.command);
    let fresh = run_classify(&command, original.config.clone(), &out, threads)?;
    let mut differing = Vec::new();
    for (name, digest) in &original.outputs {
        let now = file_digest(&out.join(name))?;
        if &now != digest {
            differing.push(name.as_str());
        }
    }
    if !differing.is_empty() {
        bail!("outputs differ from the manifest: {}", differing.join(", "));
    }
    println!("reproduced {} outputs bit-exactly", fresh.outputs.len());
    Ok(())
}

fn coarse_grain(args: CoarseArgs) -> Result<()> {
    let rules = if args.all || args.rule.is_empty() {
        representatives()
    } else {
        canonical(&args.rule)
    };
    let graph = build_transition_graph_for(&rules, args.n_max as usize)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut edges = String::from("rep_a,rep_b,N,projection_bits\n");
    for edge in graph.visible_edges(args.show_zero) {
        edges.push_str(&edge.to_csv_line());
        edges.push('\n');
    }
    fs::write(args.out.join("edges.csv"), edges).context("writing edges.csv")?;

    let report = hierarchy_report(&graph, args.classification.as_deref(), args.n_max)?;
    fs::write(args.out.join("hierarchy.txt"), &report).context("writing hierarchy.txt")?;
    print!("{report}");
    Ok(())
}

fn hierarchy_report(graph: &TransitionGraph, classification: Option<&Path>, n_max: u8) -> Result<String> {
    let self_loops = graph.edges.iter().filter(|e| e.is_self_loop()).count();
    let to_zero = graph.edges.iter().filter(|e| e.targets_zero()).count();
    let mut report = format!(
        "searched supercells up to N={n_max}\n{} edges ({self_loops} self-loops, {to_zero} to rule 0)\n",
        graph.edges.len()
    );
    let Some(path) = classification else {
        report.push_str("hierarchy not checked: no classification given\n");
        return Ok(report);
    };
    let classes = read_classification(path)?;
    let violations = validate_hierarchy(graph, |r| classes.get(&r).copied())?;
    report.push_str(&format!("{} violations\n", violations.len()));
    for v in &violations {
        report.push_str(&format!(
            "violation: {} ({}) -> {} ({}) via {}\n",
            v.edge.from,
            v.from_class,
            v.edge.to,
            v.to_class,
            v.edge.to_csv_line()
        ));
    }
    Ok(report)
}
