//! The `sample`, `eval`, and `families` subcommands, plus CSV plumbing
//! shared with the figure builders.

use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use crate::measures::{self, MeasureRecord, OptimizerSettings};
use crate::qstate::{self, DensityMatrix, STATE_TOL};
use crate::survey::{self, Ensemble, Family, FamilyPoint, SurveyConfig};

use super::config::Config;
use super::manifest::{write_text, Manifest};
use super::{CliError, EvalArgs, FamiliesArgs, SampleArgs};

pub(crate) const SAMPLE_CSV_HEADER: &str = "index,R,D,discord,cc,qmi,concurrence,chsh,ppt,rank";
pub(crate) const FAMILY_CSV_HEADER: &str = "parameter,R,D,discord,cc,concurrence,chsh";

/// Absent optional measures become empty cells, never fake zeros.
pub(crate) fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn record_row(index: u64, r: &MeasureRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        index,
        r.participation_ratio,
        r.geometric_discord,
        opt_cell(r.discord),
        opt_cell(r.classical_correlations),
        r.mutual_information,
        r.concurrence,
        r.chsh,
        r.ppt,
        r.correlation_rank
    )
}

pub(crate) fn family_csv(points: &[FamilyPoint]) -> String {
    let mut text = String::from(FAMILY_CSV_HEADER);
    text.push('\n');
    for p in points {
        let m = &p.measures;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            p.parameter,
            m.participation_ratio,
            m.geometric_discord,
            opt_cell(m.discord),
            opt_cell(m.classical_correlations),
            m.concurrence,
            m.chsh
        );
    }
    text
}

/// `samples.csv` gets its manifest at `samples_manifest.txt`.
pub(crate) fn manifest_sibling(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    out.with_file_name(format!("{stem}_manifest.txt"))
}

/// Run a campaign so that a panic inside it (a broken internal invariant)
/// still leaves an aborted manifest behind before the error surfaces.
pub(crate) fn run_guarded<T>(
    manifest: Manifest,
    manifest_path: &Path,
    f: impl FnOnce() -> T,
) -> Result<(T, Manifest), CliError> {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(value) => Ok((value, manifest)),
        Err(payload) => {
            let reason = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "worker panic".to_string());
            manifest.write_aborted(manifest_path, &reason)?;
            Err(CliError::State(format!("campaign aborted: {reason}")))
        }
    }
}

pub(crate) fn sample(args: &SampleArgs, cfg: &Config) -> Result<(), CliError> {
    let n = args.n.or(cfg.u64("n")?).unwrap_or(100_000);
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let seed = args.seed.or(cfg.u64("seed")?).unwrap_or(42);
    let workers = args.workers.or(cfg.usize("workers")?).unwrap_or(0);
    let with_discord = args.with_discord || cfg.bool("with-discord")?.unwrap_or(false);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("samples.csv"));

    let survey_cfg = SurveyConfig {
        n,
        seed,
        workers,
        with_discord,
        optimizer: OptimizerSettings::default(),
    };
    let mut manifest = Manifest::new("sample");
    manifest.push("seed", seed);
    manifest.push("n", n);
    manifest.push("workers", workers);
    manifest.push("with_discord", with_discord);

    let manifest_path = manifest_sibling(&out);
    let (records, mut manifest) = run_guarded(manifest, &manifest_path, || {
        survey::run_survey(&survey_cfg, Ensemble::Mixed)
    })?;

    let mut text = String::with_capacity(records.len() * 96 + 64);
    text.push_str(SAMPLE_CSV_HEADER);
    text.push('\n');
    for (i, rec) in records.iter().enumerate() {
        text.push_str(&record_row(i as u64, rec));
        text.push('\n');
    }
    write_text(&out, &text)?;
    manifest.push("samples_measured", records.len());
    manifest.output(&out);
    manifest.write_ok(&manifest_path)
}

pub(crate) fn eval(args: &EvalArgs, cfg: &Config) -> Result<(), CliError> {
    let csv = args.csv || cfg.bool("csv")?.unwrap_or(false);
    let text = std::fs::read_to_string(&args.state)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.state.display())))?;
    let matrix = qstate::parse_state_text(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.state.display())))?;
    let rho = DensityMatrix::new(matrix, STATE_TOL).map_err(|e| CliError::State(e.to_string()))?;
    let rec = measures::measure_state(&rho, Some(&OptimizerSettings::default()));

    if csv {
        println!("R,D,discord,cc,qmi,concurrence,chsh,ppt,rank");
        println!(
            "{},{},{},{},{},{},{},{},{}",
            rec.participation_ratio,
            rec.geometric_discord,
            opt_cell(rec.discord),
            opt_cell(rec.classical_correlations),
            rec.mutual_information,
            rec.concurrence,
            rec.chsh,
            rec.ppt,
            rec.correlation_rank
        );
    } else {
        println!("R = {}", rec.participation_ratio);
        println!("D = {}", rec.geometric_discord);
        println!("discord = {}", rec.discord.unwrap_or(f64::NAN));
        println!("cc = {}", rec.classical_correlations.unwrap_or(f64::NAN));
        println!("qmi = {}", rec.mutual_information);
        println!("concurrence = {}", rec.concurrence);
        println!("chsh = {}", rec.chsh);
        println!("ppt = {}", rec.ppt);
        println!("rank = {}", rec.correlation_rank);
    }
    Ok(())
}

pub(crate) fn families(args: &FamiliesArgs, cfg: &Config) -> Result<(), CliError> {
    let family: Family = args
        .family
        .parse()
        .map_err(|e: survey::FamilyParseError| CliError::Usage(e.to_string()))?;
    let (lo, hi) = family.domain();
    let from = args.from.or(cfg.f64("from")?).unwrap_or(lo);
    let to = args.to.or(cfg.f64("to")?).unwrap_or(hi);
    let steps = args.steps.or(cfg.usize("steps")?).unwrap_or(101);
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let with_discord = args.with_discord || cfg.bool("with-discord")?.unwrap_or(false);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", family.name())));

    let optimizer = OptimizerSettings::default();
    let points = survey::family_curve(family, from, to, steps, with_discord.then_some(&optimizer))
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut manifest = Manifest::new("families");
    manifest.push("family", family.name());
    manifest.push("from", from);
    manifest.push("to", to);
    manifest.push("steps", steps);
    manifest.push("with_discord", with_discord);

    write_text(&out, &family_csv(&points))?;
    manifest.output(&out);
    manifest.write_ok(&manifest_sibling(&out))
}
