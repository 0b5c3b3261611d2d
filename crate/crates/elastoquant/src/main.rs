use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use elastoquant::config::RunConfig;
use elastoquant::manifest::CohortManifest;
use elastoquant::runner;
use elastoquant::scene::{self, SceneFile};
use elastoquant::Result;
use elastoquant_core::model::{FrameMeta, Group, Site};
use elastoquant_core::phantom::CohortRecipe;

const EXIT_PARTIAL: u8 = 2;
const EXIT_FATAL: u8 = 3;

#[derive(Parser)]
#[command(name = "elastoquant", version, about = "Quantitative strain elastography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one frame: CSV row, heatmaps and profile strips.
    Analyze {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        bmode: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "")]
        subject: String,
        #[arg(long, default_value = "LeftForefoot", value_parser = parse_site)]
        site: Site,
        #[arg(long, default_value = "NonUlcerated", value_parser = parse_group)]
        group: Group,
        #[arg(long, default_value_t = 0)]
        frame_index: u32,
    },
    /// Analyse every manifest frame and compare groups per site.
    Cohort {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a phantom scene with ground truth.
    Phantom {
        /// Scene file; the default homogeneous scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic labelled cohort with manifest and run config.
    SynthCohort {
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the recipe seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Suggest maximum-compression frames from an image sequence.
    Suggest {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        #[arg(required = true)]
        frames: Vec<PathBuf>,
    },
    /// Print the frame orientation and sign conventions.
    Conventions {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print a default config, scene or recipe file.
    DefaultConfig {
        #[arg(long, value_enum, default_value_t = Kind::Run)]
        kind: Kind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Run,
    Scene,
    Recipe,
}

fn parse_site(s: &str) -> std::result::Result<Site, String> {
    Site::parse(s).ok_or_else(|| format!("unknown site `{s}`"))
}

fn parse_group(s: &str) -> std::result::Result<Group, String> {
    Group::parse(s).ok_or_else(|| format!("unknown group `{s}`"))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map(RunConfig::load).unwrap_or_else(|| Ok(RunConfig::default()))
}

fn output_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output_dir.clone())
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Analyze {
            config,
            frame,
            bmode,
            out,
            subject,
            site,
            group,
            frame_index,
        } => {
            let cfg = load_config(config.as_deref())?;
            let out = output_dir(&cfg, out);
            let meta = FrameMeta {
                subject_id: subject,
                site,
                group,
                frame_index,
            };
            let single = runner::analyze_file(&frame, bmode.as_deref(), meta, &cfg, &out)?;
            match &single.outcome.result {
                Ok(m) => {
                    let show = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "undefined".into());
                    println!(
                        "total_gx={} total_gy={} total_gr={} n_valid_pixels={}",
                        show(m.totals.gx),
                        show(m.totals.gy),
                        show(m.totals.gr),
                        m.n_valid_pixels
                    );
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(EXIT_PARTIAL)
                }
            }
        }
        Command::Cohort { config, manifest, out } => {
            let cfg = load_config(config.as_deref())?;
            let out = output_dir(&cfg, out);
            let manifest = CohortManifest::load(&manifest)?;
            let run = runner::run_cohort(&manifest, &cfg, &out)?;
            for row in run.json.rows.iter().filter(|r| r.significant) {
                let p = row.comparison.as_ref().map(|c| c.p_two_tailed).unwrap_or(f64::NAN);
                println!("* {} {} p={p:.4}", row.site, row.metric.as_str());
            }
            let failed = run.failed();
            println!("{} frames, {failed} failed; results in {}", run.frames.len(), out.display());
            Ok(if failed > 0 { EXIT_PARTIAL } else { 0 })
        }
        Command::Phantom { scene, out } => {
            let scene = match scene {
                Some(p) => SceneFile::load(&p)?,
                None => SceneFile::default(),
            };
            runner::render_phantom(&scene, &out)?;
            println!("phantom written to {}", out.display());
            Ok(0)
        }
        Command::SynthCohort { recipe, out, seed } => {
            let mut recipe = match recipe {
                Some(p) => scene::load_recipe(&p)?,
                None => CohortRecipe::default(),
            };
            if let Some(seed) = seed {
                recipe.seed = seed;
            }
            let n = runner::write_synthetic_cohort(&recipe, &out)?;
            println!("{n} frames written to {}", out.display());
            Ok(0)
        }
        Command::Suggest { config, k, frames } => {
            let cfg = load_config(config.as_deref())?;
            let s = runner::suggest_files(&frames, k, &cfg)?;
            let skipped: Vec<_> = s
                .skipped
                .iter()
                .map(|(i, e)| serde_json::json!({ "index": i, "error": e.to_string() }))
                .collect();
            println!("{}", serde_json::json!({ "indices": s.indices, "skipped": skipped }));
            Ok(if s.skipped.is_empty() { 0 } else { EXIT_PARTIAL })
        }
        Command::Conventions { config } => {
            let c = load_config(config.as_deref())?.conventions();
            println!("rows: increase from probe/standoff (top) toward bone (bottom)");
            println!("columns: increase left to right");
            println!("anterior: image {:?}", c.anterior());
            println!("bone: image {:?}", c.bone());
            println!(
                "reported gradients: {}",
                if c.report_as_stiffness {
                    "stiffness (RS gradient signs negated)"
                } else {
                    "relative strainability"
                }
            );
            Ok(0)
        }
        Command::DefaultConfig { kind } => {
            let text = match kind {
                Kind::Run => RunConfig::default().to_toml(),
                Kind::Scene => SceneFile::default().to_toml(),
                Kind::Recipe => scene::recipe_to_toml(&CohortRecipe::default()),
            };
            print!("{text}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FATAL } else { 0 };
            // Printing help or usage can only fail on a closed stdout.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}
