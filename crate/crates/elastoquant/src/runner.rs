//! Batch drivers behind the CLI subcommands.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use elastoquant_core::model::{ColorScale, ElastogramFrame, FrameMeta, GradientTotals, Metric};
use elastoquant_core::phantom::{cohort_colorbar_roi, render, synth_cohort, CohortRecipe};
use elastoquant_core::pipeline::{analyze_frame, FrameAnalysis};
use elastoquant_core::selection::{suggest_frames, FrameSuggestion};
use elastoquant_core::stats::{cohort_analysis, CohortReport};
use rayon::prelude::*;

use crate::config::{ColorbarConfig, RunConfig};
use crate::error::{io_err, CliError, Result};
use crate::groundtruth::{self, GroundTruthManifest};
use crate::imageio::{load_frame, save_gray, save_rgb};
use crate::manifest::{CohortManifest, ManifestRow};
use crate::plot;
use crate::report::{write_frames_csv, write_profile_csv, CohortJson, FrameMetrics, FrameOutcome};
use crate::scene::{recipe_to_toml, SceneFile};

pub const FRAMES_CSV: &str = "frames.csv";
pub const COHORT_JSON: &str = "cohort.json";
pub const COHORT_CSV: &str = "cohort.csv";
pub const RUN_LOG: &str = "run.log";

/// Timestamped progress log. Timestamps appear only here so every other
/// output stays byte-for-byte reproducible.
pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn create(dir: &Path) -> Result<Self> {
        let path = dir.join(RUN_LOG);
        let file = File::create(&path).map_err(io_err(path))?;
        Ok(RunLog { file: Mutex::new(file) })
    }

    pub fn line(&self, message: impl AsRef<str>) {
        let stamp = chrono::Local::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, false);
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        // A failing log write must not abort the analysis.
        let _ = writeln!(f, "{stamp} {}", message.as_ref());
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn metrics(a: &FrameAnalysis, cfg: &RunConfig) -> FrameMetrics {
    FrameMetrics {
        totals: cfg.conventions().report(a.field.totals()),
        n_valid_pixels: a.n_valid_pixels,
        column_exclusion_count: a.column_exclusion_count,
    }
}

/// Writes the optional per-frame plots and profile CSVs into `dir`.
pub fn write_frame_plots(a: &FrameAnalysis, cfg: &RunConfig, dir: &Path) -> Result<()> {
    if !(cfg.output.heatmaps || cfg.output.strips) {
        return Ok(());
    }
    create_dir(dir)?;
    if cfg.output.heatmaps {
        plot::save_png(&plot::heatmap(&a.rs.values), &dir.join("rs.png"))?;
        plot::save_png(&plot::heatmap(&a.field.gr), &dir.join("gr.png"))?;
    }
    if cfg.output.strips {
        plot::save_png(&plot::row_strip(&a.field.row_mean_gx, 24), &dir.join("row_mean_gx.png"))?;
        plot::save_png(&plot::column_strip(&a.field.col_mean_gy, 24), &dir.join("col_mean_gy.png"))?;
        write_profile_csv(&dir.join("row_mean_gx.csv"), "row", &a.field.row_mean_gx)?;
        write_profile_csv(&dir.join("col_mean_gy.csv"), "column", &a.field.col_mean_gy)?;
    }
    Ok(())
}

/// Result of the single-frame `analyze` command.
pub struct SingleRun {
    pub outcome: FrameOutcome,
    pub analysis: Option<FrameAnalysis>,
}

/// Analyses one image file and writes its CSV row, plots and config echo.
pub fn analyze_file(
    frame_path: &Path,
    bmode_path: Option<&Path>,
    meta: FrameMeta,
    cfg: &RunConfig,
    out: &Path,
) -> Result<SingleRun> {
    create_dir(out)?;
    cfg.write_echo(out)?;
    let log = RunLog::create(out)?;
    log.line(format!("analyze {}", frame_path.display()));
    let params = cfg.analysis_params();
    let result = load_frame(frame_path, bmode_path, Some(meta.clone())).and_then(|frame| {
        analyze_frame(&frame, &params, None).map_err(|source| CliError::Frame {
            path: frame_path.to_path_buf(),
            source,
        })
    });
    let (result, analysis) = match result {
        Ok(a) => {
            write_frame_plots(&a, cfg, out)?;
            (Ok(metrics(&a, cfg)), Some(a))
        }
        Err(e) => {
            log.line(format!("failed: {e}"));
            (Err(e.to_string()), None)
        }
    };
    let outcome = FrameOutcome {
        meta,
        frame_path: frame_path.display().to_string(),
        result,
    };
    write_frames_csv(&out.join(FRAMES_CSV), std::slice::from_ref(&outcome))?;
    log.line("done");
    Ok(SingleRun { outcome, analysis })
}

pub struct CohortRun {
    pub frames: Vec<FrameOutcome>,
    pub report: CohortReport,
    pub json: CohortJson,
}

impl CohortRun {
    pub fn failed(&self) -> usize {
        self.frames.iter().filter(|f| f.result.is_err()).count()
    }
}

fn frame_dir_name(meta: &FrameMeta) -> String {
    let subject: String = meta
        .subject_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{subject}_{}_{}", meta.site, meta.frame_index)
}

fn analyze_row(
    row: &ManifestRow,
    cfg: &RunConfig,
    scale: Option<&ColorScale>,
    out: &Path,
) -> Result<std::result::Result<FrameMetrics, String>> {
    let analysed = load_frame(&row.resolved_frame, row.resolved_bmode.as_deref(), Some(row.meta.clone()))
        .and_then(|frame| {
            analyze_frame(&frame, &cfg.analysis_params(), scale).map_err(|source| CliError::Frame {
                path: PathBuf::from(&row.frame_path),
                source,
            })
        });
    match analysed {
        Ok(a) => {
            write_frame_plots(&a, cfg, &out.join("frames").join(frame_dir_name(&row.meta)))?;
            Ok(Ok(metrics(&a, cfg)))
        }
        Err(e) => Ok(Err(e.to_string())),
    }
}

fn thread_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Analyses every manifest frame in parallel, then compares groups.
///
/// Frames that fail are recorded and skipped. Fails outright only on an
/// empty manifest, when every frame failed, or on output errors.
pub fn run_cohort(manifest: &CohortManifest, cfg: &RunConfig, out: &Path) -> Result<CohortRun> {
    if manifest.rows.is_empty() {
        return Err(CliError::EmptyManifest);
    }
    create_dir(out)?;
    cfg.write_echo(out)?;
    let log = RunLog::create(out)?;
    log.line(format!("cohort run: {} frames", manifest.rows.len()));

    let scale = if cfg.colorbar.cache_scale {
        let first = &manifest.rows[0];
        let frame = load_frame(&first.resolved_frame, None, None)?;
        Some(elastoquant_core::calibration::extract_color_scale(
            &frame,
            &cfg.colorbar.roi(),
            cfg.colorbar.max_match_distance,
        )?)
    } else {
        None
    };

    let results: Vec<_> = thread_pool(cfg.workers).install(|| {
        manifest
            .rows
            .par_iter()
            .map(|row| analyze_row(row, cfg, scale.as_ref(), out))
            .collect()
    });
    let mut frames = Vec::with_capacity(results.len());
    for (row, result) in manifest.rows.iter().zip(results) {
        let result = result?;
        if let Err(e) = &result {
            log.line(format!("frame failed: {e}"));
            log::warn!("frame failed: {e}");
        }
        frames.push(FrameOutcome {
            meta: row.meta.clone(),
            frame_path: row.frame_path.clone(),
            result,
        });
    }
    write_frames_csv(&out.join(FRAMES_CSV), &frames)?;
    let failed = frames.iter().filter(|f| f.result.is_err()).count();
    if failed == frames.len() {
        log.line("all frames failed");
        return Err(CliError::AllFramesFailed(failed));
    }

    let records: Vec<(FrameMeta, GradientTotals)> = frames
        .iter()
        .filter_map(|f| f.result.as_ref().ok().map(|m| (f.meta.clone(), m.totals)))
        .collect();
    let report = cohort_analysis(&records, cfg.stats.welch);
    for site in &report.skipped_sites {
        log.line(format!("site {site} skipped: only one group present"));
        log::warn!("site {site} skipped: only one group present");
    }
    let json = CohortJson::build(&report, cfg.stats.welch, frames.len(), failed);
    json.write(&out.join(COHORT_JSON))?;
    json.write_csv(&out.join(COHORT_CSV))?;
    if cfg.output.charts {
        let charts = out.join("charts");
        create_dir(&charts)?;
        for metric in Metric::ALL {
            plot::save_png(
                &plot::group_chart(&json.rows, metric),
                &charts.join(format!("{}.png", metric.as_str())),
            )?;
        }
    }
    log.line(format!("done: {} ok, {failed} failed", frames.len() - failed));
    Ok(CohortRun { frames, report, json })
}

/// Renders a scene into `out`: frame, optional B-mode, ground truth, the
/// scene echo and a run config whose colour bar matches the scene.
pub fn render_phantom(scene: &SceneFile, out: &Path) -> Result<GroundTruthManifest> {
    create_dir(out)?;
    let (frame, truth) = render(&scene.scene())?;
    save_rgb(frame.pixels(), &out.join("frame.png"))?;
    let bmode = match frame.bmode() {
        Some(b) => {
            save_gray(b, &out.join("bmode.png"))?;
            Some("bmode.png")
        }
        None => None,
    };
    fs::write(out.join("scene.toml"), scene.to_toml()).map_err(io_err(out.join("scene.toml")))?;
    let cfg = RunConfig {
        colorbar: ColorbarConfig::from_roi(&truth.colorbar),
        ..RunConfig::default()
    };
    cfg.write_echo(out)?;
    groundtruth::write(out, &truth, "frame.png", bmode)
}

/// Writes a synthetic cohort as PNG frames plus a manifest, the recipe
/// echo, the drawn slopes and a matching run config.
pub fn write_synthetic_cohort(recipe: &CohortRecipe, out: &Path) -> Result<usize> {
    let frames_dir = out.join("frames");
    create_dir(&frames_dir)?;
    let cohort = synth_cohort(recipe)?;
    cohort
        .par_iter()
        .map(|f| save_rgb(f.frame.pixels(), &frames_dir.join(format!("{}.png", frame_dir_name(&f.meta)))))
        .collect::<Result<Vec<()>>>()?;
    let rows: Vec<_> = cohort
        .iter()
        .map(|f| (f.meta.clone(), format!("frames/{}.png", frame_dir_name(&f.meta))))
        .collect();
    CohortManifest::write(&out.join("manifest.csv"), &rows)?;

    let mut truth = csv::Writer::from_path(out.join("targets.csv"))?;
    truth.write_record(["subject_id", "group", "site", "frame_index", "target_gy"])?;
    for f in &cohort {
        truth.write_record([
            f.meta.subject_id.clone(),
            f.meta.group.to_string(),
            f.meta.site.to_string(),
            f.meta.frame_index.to_string(),
            f.target_gy.to_string(),
        ])?;
    }
    truth.flush().map_err(io_err(out.join("targets.csv")))?;

    fs::write(out.join("recipe.toml"), recipe_to_toml(recipe)).map_err(io_err(out.join("recipe.toml")))?;
    cohort_config(recipe).write_echo(out)?;
    Ok(cohort.len())
}

/// Run config that analyses [`synth_cohort`] frames in the recipe's units.
pub fn cohort_config(recipe: &CohortRecipe) -> RunConfig {
    let mut cfg = RunConfig {
        colorbar: ColorbarConfig::from_roi(&cohort_colorbar_roi(recipe)),
        ..RunConfig::default()
    };
    cfg.gradients.spacing_y = recipe.spacing_y;
    cfg.output.heatmaps = false;
    cfg.output.strips = false;
    cfg
}

/// Loads frames and ranks them for maximum compression.
pub fn suggest_files(paths: &[PathBuf], k: usize, cfg: &RunConfig) -> Result<FrameSuggestion> {
    let frames: Vec<ElastogramFrame> = paths
        .iter()
        .map(|p| load_frame(p, None, None))
        .collect::<Result<_>>()?;
    Ok(suggest_frames(&frames, k, &cfg.segmentation)?)
}
