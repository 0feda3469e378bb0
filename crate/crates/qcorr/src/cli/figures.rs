//! The `figure` subcommand: rebuilds the data files and the companion
//! gnuplot script for each of the seven survey figures.
//!
//! Figures 1, 5 and 6 need the measurement optimizer, so their default
//! sample counts are desk-scale; the manifest says so and --n overrides.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::measures::{MeasureRecord, OptimizerSettings};
use crate::sampling::SampleError;
use crate::survey::{
    self, bin_by_r, BinnedCurve, Ensemble, Family, FamilyPoint, Histogram, RBandConfig,
    SurveyConfig,
};

use super::commands::{family_csv, run_guarded};
use super::config::Config;
use super::manifest::{write_text, Manifest};
use super::plots;
use super::{CliError, FigureArgs};

const FAMILY_OVERLAY_STEPS: usize = 201;
/// Fixed-R inset ensembles are capped here regardless of the main n.
const INSET_ENSEMBLE_CAP: u64 = 2000;
const INSET_BUDGET: u64 = 1_000_000;
const DEFAULT_R_GRID: &str = "1,1.3,1.6,2,2.3,2.6,3,3.3,3.8";

struct FigureCtx {
    number: u8,
    n: u64,
    seed: u64,
    workers: usize,
    bins: usize,
    r_band: f64,
    grid: Vec<f64>,
    pure_analytic: bool,
    dir: PathBuf,
}

pub(crate) fn figure(args: &FigureArgs, cfg: &Config) -> Result<(), CliError> {
    let number = args.number;
    if args.pure_analytic && number != 2 {
        return Err(CliError::Usage("--pure-analytic only applies to figure 2".into()));
    }
    if args.grid.is_some() && number != 2 {
        return Err(CliError::Usage("--grid only applies to figure 2".into()));
    }
    if args.r_band.is_some() && number != 2 {
        return Err(CliError::Usage("--r-band only applies to figure 2".into()));
    }

    let default_n: u64 = match number {
        1 | 5 | 6 => 10_000,
        2..=4 => 1_000_000,
        7 => 100_000,
        _ => unreachable!("clap bounds the figure number"),
    };
    let n = args.n.or(cfg.u64("n")?).unwrap_or(default_n);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let bins = args.bins.or(cfg.usize("bins")?).unwrap_or(100);
    if bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let r_band = args.r_band.or(cfg.f64("r-band")?).unwrap_or(0.02);
    if !r_band.is_finite() || r_band <= 0.0 {
        return Err(CliError::Usage("--r-band must be a positive width".into()));
    }
    let grid_text = args
        .grid
        .clone()
        .or_else(|| cfg.string("grid"))
        .unwrap_or_else(|| DEFAULT_R_GRID.to_string());
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;

    let ctx = FigureCtx {
        number,
        n,
        seed: args.seed.or(cfg.u64("seed")?).unwrap_or(42),
        workers: args.workers.or(cfg.usize("workers")?).unwrap_or(0),
        bins,
        r_band,
        grid: parse_grid(&grid_text)?,
        pure_analytic: args.pure_analytic
            || (number == 2 && cfg.bool("pure-analytic")?.unwrap_or(false)),
        dir,
    };
    match ctx.number {
        1 => fig1(&ctx),
        2 => fig2(&ctx),
        3 => fig3(&ctx),
        4 => fig4(&ctx),
        5 => fig5(&ctx),
        6 => fig6(&ctx),
        7 => fig7(&ctx),
        _ => unreachable!(),
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let mut grid = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let r: f64 = part
            .parse()
            .map_err(|_| CliError::Usage(format!("--grid: `{part}` is not a number")))?;
        if !(1.0..=4.0).contains(&r) {
            return Err(CliError::Usage(format!(
                "--grid: target {r} lies outside the participation-ratio range [1, 4]"
            )));
        }
        grid.push(r);
    }
    Ok(grid)
}

impl FigureCtx {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn survey_cfg(&self, with_discord: bool) -> SurveyConfig {
        SurveyConfig {
            n: self.n,
            seed: self.seed,
            workers: self.workers,
            with_discord,
            optimizer: OptimizerSettings::default(),
        }
    }

    fn base_manifest(&self, with_discord: bool) -> Manifest {
        let mut m = Manifest::new("figure");
        m.push("figure", self.number);
        m.push("seed", self.seed);
        m.push("n", self.n);
        m.push("workers", self.workers);
        m.push("bins", self.bins);
        m.push("with_discord", with_discord);
        if with_discord && self.n <= 100_000 {
            m.note("optimizer-backed figure at a desk-scale default sample count; raise --n for the survey-scale version");
        }
        m
    }

    fn manifest_path(&self) -> PathBuf {
        self.path(&format!("fig{}_manifest.txt", self.number))
    }

    fn finish(&self, mut manifest: Manifest, files: &[&str]) -> Result<(), CliError> {
        for f in files {
            manifest.output(&self.path(f));
        }
        manifest.write_ok(&self.manifest_path())
    }
}

fn family_overlay(family: Family, opt: Option<&OptimizerSettings>) -> Vec<FamilyPoint> {
    let (lo, hi) = family.domain();
    survey::family_curve(family, lo, hi, FAMILY_OVERLAY_STEPS, opt).expect("family domain is valid")
}

fn stat_cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

/// `center,count_all,density_all,count_ppt,density_ppt` over two histograms
/// sharing edges; each density column is normalized over its own population.
fn density_pair_csv(all: &Histogram, ppt: &Histogram) -> String {
    let mut text = String::from("center,count_all,density_all,count_ppt,density_ppt\n");
    let centers = all.centers();
    let da = all.density();
    let dp = ppt.density();
    for k in 0..centers.len() {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            centers[k], all.counts[k], da[k], ppt.counts[k], dp[k]
        );
    }
    text
}

fn density_csv(h: &Histogram) -> String {
    let mut text = String::from("center,count,density\n");
    let centers = h.centers();
    let d = h.density();
    for k in 0..centers.len() {
        let _ = writeln!(text, "{},{},{}", centers[k], h.counts[k], d[k]);
    }
    text
}

fn mean_curve_csv(curve: &BinnedCurve) -> String {
    let mut text = String::from("center,count,mean,se\n");
    let centers = curve.centers();
    for k in 0..centers.len() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            centers[k],
            curve.count[k],
            stat_cell(curve.mean[k]),
            stat_cell(curve.standard_error[k])
        );
    }
    text
}

/// Discord vs geometric discord scatter with Werner and MEMS overlays.
fn fig1(ctx: &FigureCtx) -> Result<(), CliError> {
    let manifest = ctx.base_manifest(true);
    let cfg = ctx.survey_cfg(true);
    let opt = OptimizerSettings::default();
    let ((records, werner, mems), mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        (
            survey::run_survey(&cfg, Ensemble::Mixed),
            family_overlay(Family::Werner, Some(&opt)),
            family_overlay(Family::Mems, Some(&opt)),
        )
    })?;

    let mut text = String::from("index,D,discord\n");
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{}",
            i,
            r.geometric_discord,
            r.discord.expect("discord enabled for this figure")
        );
    }
    write_text(&ctx.path("fig1.csv"), &text)?;
    write_text(&ctx.path("fig1_werner.csv"), &family_csv(&werner))?;
    write_text(&ctx.path("fig1_mems.csv"), &family_csv(&mems))?;
    write_text(&ctx.path("fig1.gp"), plots::FIG1)?;
    manifest.push("samples_measured", records.len());
    ctx.finish(
        manifest,
        &["fig1.csv", "fig1_werner.csv", "fig1_mems.csv", "fig1.gp"],
    )
}

/// Geometric discord density for all and PPT states, fixed-R inset, and the
/// optional analytic pure-state overlay.
fn fig2(ctx: &FigureCtx) -> Result<(), CliError> {
    let inset_n = ctx.n.min(INSET_ENSEMBLE_CAP);
    let mut manifest = ctx.base_manifest(false);
    manifest.push("r_band", ctx.r_band);
    manifest.push(
        "inset_targets",
        ctx.grid
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.push("inset_n", inset_n);
    manifest.note("inset ensembles come from banded rejection sampling around each target R");

    let cfg = ctx.survey_cfg(false);
    let grid = ctx.grid.clone();
    let r_band = ctx.r_band;
    let (result, mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        let records = survey::run_survey(&cfg, Ensemble::Mixed);
        let mut insets: Vec<(f64, Vec<MeasureRecord>)> = Vec::new();
        for (k, &target) in grid.iter().enumerate() {
            let icfg = SurveyConfig { n: inset_n, ..cfg };
            let band = RBandConfig {
                target,
                half_width: r_band,
                budget: INSET_BUDGET,
            };
            insets.push((target, survey::run_fixed_r_survey(&icfg, &band, k as u32)?));
        }
        Ok::<_, SampleError>((records, insets))
    })?;
    let (records, insets) = result.map_err(|e| CliError::Usage(e.to_string()))?;

    let mut h_all = Histogram::uniform(0.0, 0.5, ctx.bins);
    let mut h_ppt = Histogram::uniform(0.0, 0.5, ctx.bins);
    for r in &records {
        h_all.add(r.geometric_discord);
        if r.ppt {
            h_ppt.add(r.geometric_discord);
        }
    }
    write_text(&ctx.path("fig2.csv"), &density_pair_csv(&h_all, &h_ppt))?;

    let mut text = String::from("target_r,center,count,density\n");
    for (target, recs) in &insets {
        let mut h = Histogram::uniform(0.0, 0.5, ctx.bins);
        for r in recs {
            h.add(r.geometric_discord);
        }
        let centers = h.centers();
        let d = h.density();
        for k in 0..centers.len() {
            let _ = writeln!(text, "{},{},{},{}", target, centers[k], h.counts[k], d[k]);
        }
    }
    write_text(&ctx.path("fig2_inset.csv"), &text)?;

    let mut files = vec!["fig2.csv", "fig2_inset.csv"];
    if ctx.pure_analytic {
        let mut text = String::from("D,density\n");
        for k in 0..=500 {
            let d = 0.5 * k as f64 / 500.0;
            let p = 3.0 * (1.0 - 2.0 * d).max(0.0).sqrt();
            let _ = writeln!(text, "{d},{p}");
        }
        write_text(&ctx.path("fig2_pure_analytic.csv"), &text)?;
        files.push("fig2_pure_analytic.csv");
    }
    write_text(
        &ctx.path("fig2.gp"),
        &plots::fig2_script(&ctx.grid, ctx.pure_analytic),
    )?;
    files.push("fig2.gp");
    manifest.push("samples_measured", records.len());
    ctx.finish(manifest, &files)
}

/// Geometric discord vs participation ratio scatter with the Werner
/// envelope and the MEMS curve.
fn fig3(ctx: &FigureCtx) -> Result<(), CliError> {
    let manifest = ctx.base_manifest(false);
    let cfg = ctx.survey_cfg(false);
    let ((records, werner, mems), mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        (
            survey::run_survey(&cfg, Ensemble::Mixed),
            family_overlay(Family::Werner, None),
            family_overlay(Family::Mems, None),
        )
    })?;

    let mut text = String::from("index,R,D\n");
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(text, "{},{},{}", i, r.participation_ratio, r.geometric_discord);
    }
    write_text(&ctx.path("fig3.csv"), &text)?;
    write_text(&ctx.path("fig3_werner.csv"), &family_csv(&werner))?;
    write_text(&ctx.path("fig3_mems.csv"), &family_csv(&mems))?;
    write_text(&ctx.path("fig3.gp"), plots::FIG3)?;
    manifest.push("samples_measured", records.len());
    ctx.finish(
        manifest,
        &["fig3.csv", "fig3_werner.csv", "fig3_mems.csv", "fig3.gp"],
    )
}

/// Binned mean geometric discord vs participation ratio, all vs PPT states.
fn fig4(ctx: &FigureCtx) -> Result<(), CliError> {
    let mut manifest = ctx.base_manifest(false);
    manifest.note("pure states sit at R = 1 with analytic mean D = 0.2");
    let cfg = ctx.survey_cfg(false);
    let (records, mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        survey::run_survey(&cfg, Ensemble::Mixed)
    })?;

    let all = bin_by_r(&records, 1.0, 4.0, ctx.bins, |r| Some(r.geometric_discord));
    let ppt = bin_by_r(&records, 1.0, 4.0, ctx.bins, |r| {
        r.ppt.then_some(r.geometric_discord)
    });
    let mut text = String::from("center,count_all,mean_all,se_all,count_ppt,mean_ppt,se_ppt\n");
    let centers = all.centers();
    for k in 0..centers.len() {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            centers[k],
            all.count[k],
            stat_cell(all.mean[k]),
            stat_cell(all.standard_error[k]),
            ppt.count[k],
            stat_cell(ppt.mean[k]),
            stat_cell(ppt.standard_error[k])
        );
    }
    write_text(&ctx.path("fig4.csv"), &text)?;
    write_text(&ctx.path("fig4.gp"), plots::FIG4)?;
    manifest.push("samples_measured", records.len());
    ctx.finish(manifest, &["fig4.csv", "fig4.gp"])
}

/// Discord density for all and PPT states with a classical-correlations
/// inset.
fn fig5(ctx: &FigureCtx) -> Result<(), CliError> {
    let manifest = ctx.base_manifest(true);
    let cfg = ctx.survey_cfg(true);
    let (records, mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        survey::run_survey(&cfg, Ensemble::Mixed)
    })?;

    let mut h_all = Histogram::uniform(0.0, 1.0, ctx.bins);
    let mut h_ppt = Histogram::uniform(0.0, 1.0, ctx.bins);
    let mut h_cc = Histogram::uniform(0.0, 1.0, ctx.bins);
    for r in &records {
        let d = r.discord.expect("discord enabled for this figure");
        h_all.add(d);
        if r.ppt {
            h_ppt.add(d);
        }
        h_cc.add(r.classical_correlations.expect("cc enabled for this figure"));
    }
    write_text(&ctx.path("fig5.csv"), &density_pair_csv(&h_all, &h_ppt))?;
    write_text(&ctx.path("fig5_cc.csv"), &density_csv(&h_cc))?;
    write_text(&ctx.path("fig5.gp"), plots::FIG5)?;
    manifest.push("samples_measured", records.len());
    ctx.finish(manifest, &["fig5.csv", "fig5_cc.csv", "fig5.gp"])
}

/// Discord vs participation ratio scatter with family overlays and a
/// binned-mean inset.
fn fig6(ctx: &FigureCtx) -> Result<(), CliError> {
    let manifest = ctx.base_manifest(true);
    let cfg = ctx.survey_cfg(true);
    let opt = OptimizerSettings::default();
    let ((records, werner, mems), mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        (
            survey::run_survey(&cfg, Ensemble::Mixed),
            family_overlay(Family::Werner, Some(&opt)),
            family_overlay(Family::Mems, Some(&opt)),
        )
    })?;

    let mut text = String::from("index,R,discord\n");
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{}",
            i,
            r.participation_ratio,
            r.discord.expect("discord enabled for this figure")
        );
    }
    write_text(&ctx.path("fig6.csv"), &text)?;
    let mean = bin_by_r(&records, 1.0, 4.0, ctx.bins, |r| r.discord);
    write_text(&ctx.path("fig6_mean.csv"), &mean_curve_csv(&mean))?;
    write_text(&ctx.path("fig6_werner.csv"), &family_csv(&werner))?;
    write_text(&ctx.path("fig6_mems.csv"), &family_csv(&mems))?;
    write_text(&ctx.path("fig6.gp"), plots::FIG6)?;
    manifest.push("samples_measured", records.len());
    ctx.finish(
        manifest,
        &[
            "fig6.csv",
            "fig6_mean.csv",
            "fig6_werner.csv",
            "fig6_mems.csv",
            "fig6.gp",
        ],
    )
}

/// CHSH maximum vs geometric discord with the bounding family curves. The
/// manifest quantifies how the tabulated upper curve relates to the two
/// closed-form candidates instead of trusting either one.
fn fig7(ctx: &FigureCtx) -> Result<(), CliError> {
    let manifest = ctx.base_manifest(false);
    let cfg = ctx.survey_cfg(false);
    let ((records, werner, mnms), mut manifest) = run_guarded(manifest, &ctx.manifest_path(), || {
        (
            survey::run_survey(&cfg, Ensemble::Mixed),
            family_overlay(Family::Werner, None),
            family_overlay(Family::Mnms, None),
        )
    })?;

    let mut text = String::from("index,D,chsh\n");
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(text, "{},{},{}", i, r.geometric_discord, r.chsh);
    }
    write_text(&ctx.path("fig7.csv"), &text)?;
    write_text(&ctx.path("fig7_werner.csv"), &family_csv(&werner))?;
    write_text(&ctx.path("fig7_mnms.csv"), &family_csv(&mnms))?;
    write_text(&ctx.path("fig7.gp"), plots::FIG7)?;

    let mut dev_minus = 0f64;
    let mut dev_plus = 0f64;
    for p in &mnms {
        let d = p.measures.geometric_discord;
        let b = p.measures.chsh;
        dev_minus = dev_minus.max((b - 2.0 * (1.0 - 2.0 * d).max(0.0).sqrt()).abs());
        dev_plus = dev_plus.max((b - 2.0 * (1.0 + 2.0 * d).sqrt()).abs());
    }
    manifest.note(format!(
        "upper-curve check: the candidate closed form 2*sqrt(1-2*D) misses the tabulated mnms \
         curve by up to {dev_minus:.3}, while 2*sqrt(1+2*D) agrees within {dev_plus:.2e}; the \
         emitted overlay is the tabulated curve itself"
    ));
    manifest.push("samples_measured", records.len());
    ctx.finish(
        manifest,
        &["fig7.csv", "fig7_werner.csv", "fig7_mnms.csv", "fig7.gp"],
    )
}
