use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, LevelFilter};

use devoc::config::Config;
use devoc::features::save_feature_csv;
use devoc::fsutil::write_atomic;
use devoc::pipeline::{self, Corpus, GroupModelSet};
use devoc::raster::pnm;
use devoc::synth::{builtin_templates, generate_corpus, write_corpus};
use devoc::Error;

#[derive(Parser, Debug)]
#[command(name = "devoc", version, about = "Handwritten Devanagari character recognizer")]
struct Cli {
    /// Flat `key = value` configuration file; a missing file means defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed (network init and corpus generation).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Only errors on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes the skeleton, headline and spine overlays and a summary for one glyph.
    Inspect {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generates a labeled synthetic corpus with a manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 2.0)]
        amplitude: f64,
    },
    /// Trains one network per detected structural group.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        models: PathBuf,
        /// Also export the training feature vectors as CSV.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Per-group accuracy on the train and test splits.
    Eval {
        corpus: PathBuf,
        #[arg(long)]
        models: PathBuf,
        /// Report directory, the model directory by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classifies one glyph: `label<TAB>group<TAB>confidence`.
    Predict {
        image: PathBuf,
        #[arg(long)]
        models: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::EmptyImage => 2,
        Error::InsufficientData { .. } | Error::EmptyDataset => 3,
        _ => 1,
    }
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    Ok(cfg)
}

fn inspect(input: &Path, out: &Path, cfg: &Config) -> Result<(), Error> {
    let img = pnm::load_pbm(input)?;
    let glyph = pipeline::prepare(&img, cfg)?;
    fs::create_dir_all(out).map_err(|e| Error::Io { path: out.into(), source: e })?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "glyph".into());
    pnm::save_pbm(&out.join(format!("{stem}.skeleton.pbm")), &glyph.skeleton)?;
    pnm::save_pbm(&out.join(format!("{stem}.shiro.pbm")), &glyph.shirorekha_overlay())?;
    pnm::save_pbm(&out.join(format!("{stem}.spine.pbm")), &glyph.spine_overlay())?;
    let summary = format!("input: {}\n{}", input.display(), glyph.summary());
    write_atomic(&out.join("summary.txt"), summary.as_bytes())?;
    info!("{}: {}", input.display(), glyph.group().slug());
    Ok(())
}

fn synth(out: &Path, per_class: usize, amplitude: f64, cfg: &Config) -> Result<(), Error> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::Config(format!("amplitude must be >= 0, got {amplitude}")));
    }
    let templates = builtin_templates();
    let samples = generate_corpus(&templates, per_class, amplitude, cfg.train.seed);
    write_corpus(out, &samples)?;
    info!("{} samples from {} templates in {}", samples.len(), templates.len(), out.display());
    Ok(())
}

fn train(corpus: &Path, models: &Path, features: Option<&Path>, cfg: &Config, quiet: bool) -> Result<(), Error> {
    let corpus = Corpus::load(corpus)?;
    let outcome = pipeline::train_all(&corpus, cfg)?;
    outcome.models.save(models)?;
    if let Some(path) = features {
        save_feature_csv(path, &outcome.feature_rows)?;
    }
    if !quiet {
        for r in &outcome.reports {
            println!(
                "{:<14} classes {:<2} samples {:<5} routing errors {:<3} epochs {:<4} loss {:.4e} |grad| {:.3e} stop {}",
                r.group.slug(),
                r.labels.len(),
                r.n_samples,
                r.routing_errors,
                r.report.epochs_run,
                r.report.final_loss,
                r.report.final_gradient_norm,
                r.report.stop_reason,
            );
        }
        for g in &outcome.skipped {
            println!("{:<14} skipped: only misrouted samples of one class", g.slug());
        }
    }
    Ok(())
}

fn eval(corpus: &Path, models: &Path, out: Option<&Path>, cfg: &Config) -> Result<(), Error> {
    let set = GroupModelSet::load(models)?;
    let corpus = Corpus::load(corpus)?;
    let (report, records) = pipeline::evaluate(&corpus, &set, cfg)?;
    pipeline::write_report(out.unwrap_or(models), &report, &records)?;
    print!("{}", report.to_text());
    Ok(())
}

fn predict(image: &Path, models: &Path, cfg: &Config) -> Result<(), Error> {
    let set = GroupModelSet::load(models)?;
    let img = pnm::load_pbm(image)?;
    let p = pipeline::recognize(&img, &set, cfg)?;
    println!("{}\t{}\t{:.6}", p.label, p.group.slug(), p.confidence);
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Inspect { input, out } => inspect(input, out, &cfg),
        Command::Synth { out, per_class, amplitude } => synth(out, *per_class, *amplitude, &cfg),
        Command::Train { corpus, models, features } => train(corpus, models, features.as_deref(), &cfg, cli.quiet),
        Command::Eval { corpus, models, out } => eval(corpus, models, out.as_deref(), &cfg),
        Command::Predict { image, models } => predict(image, models, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the I/O-or-format code; help and version are successes
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet { LevelFilter::Error } else { LevelFilter::Warn })
        .parse_default_env()
        .init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::EmptyImage) => {
            eprintln!("error: empty glyph");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
