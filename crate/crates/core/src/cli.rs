//! The `nldid` command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 when
//! the numerical machinery fails (rank deficiency, non-convergence, ...).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::crosssec::table3;
use crate::data::{
    build_estimation_sample, flag_households_with_noneduc_pretreat_child, load_panel_csv, mobility_indicators,
    saturation_shares, summarize_panel, write_panel_csv, EstimationSample, GroupRule, HouseholdPanel, SampleConfig,
    SampleWindows, DEFAULT_FLAG_AGE,
};
use crate::decision_model::{
    effect_gap_grid, enrollment_prob, linear_grid, mc_simulate, policy_effect, DecisionModelSpec, GapSettings, Group,
    McResult, Sign, DEFAULT_LOC1,
};
use crate::did::{
    att_table, bh_rejections, estimate_effects, placebo_run, subgroup_cdf, AttRow, EffectRecord, Grouping,
    PlaceboOptions, DEFAULT_Q,
};
use crate::probit::{fit_probit, FitOptions, ProbitFit};
use crate::synth::{generate_decision_panel, generate_probit_panel, DecisionDgp, DgpSpec, Preset, Truth};
use crate::wealth_index::{expand_indicators, first_factor_index, is_low, load_asset_csv};
use crate::{Error, Result, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nldid", version, about = "Nonlinear difference-in-differences and education-decision model toolkit")]
pub struct RunConfig {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "NLDID_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the household wealth index from an asset CSV.
    Hwi(HwiArgs),
    /// Fit the difference-in-differences probit.
    Estimate(EstimateArgs),
    /// Per-child effects on the treated, delta-method se and BH-adjusted tests.
    Effects(EffectsArgs),
    /// Subgroup effect CDFs and the dominance verdict.
    Cdf(CdfArgs),
    /// Placebo re-estimation on unexposed cohorts.
    Placebo(PlaceboArgs),
    /// Household-level enrollment-share regressions.
    Crosssec(CrosssecArgs),
    /// Closed-form effect gap f(mu, p1) over a grid.
    MmiGrid(MmiGridArgs),
    /// Closed-form policy effects checked by Monte Carlo.
    MmiSim(MmiSimArgs),
    /// Generate a synthetic panel with a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Descriptive tables, saturation shares and mobility indicators.
    Describe(DescribeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    RuralDaughters,
    RuralFemale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupingArg {
    HeadEducation,
    Wealth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Saturation,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Probit,
    Decision,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 13)]
    pub post_min: u32,
    #[arg(long, default_value_t = 18)]
    pub post_max: u32,
    #[arg(long, default_value_t = 19)]
    pub pre_min: u32,
    #[arg(long, default_value_t = 28)]
    pub pre_max: u32,
}

impl WindowArgs {
    fn windows(&self) -> Result<SampleWindows> {
        SampleWindows::new(self.post_min, self.post_max, self.pre_min, self.pre_max)
            .map_err(|e| Error::Config(format!("--post-min/--post-max/--pre-min/--pre-max: {e}")))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub windows: WindowArgs,
    #[arg(long, value_enum, default_value = "rural-daughters")]
    pub group: GroupArg,
    /// Keep only households with a non-educated child older than --flag-age.
    #[arg(long)]
    pub flagged_only: bool,
    #[arg(long, default_value_t = DEFAULT_FLAG_AGE)]
    pub flag_age: u32,
}

impl SampleArgs {
    fn config(&self) -> Result<SampleConfig> {
        Ok(SampleConfig { windows: self.windows.windows()?, group: group_rule(self.group), flagged_only: self.flagged_only })
    }

    fn prepare(&self, panel: HouseholdPanel) -> HouseholdPanel {
        if self.flagged_only {
            flag_households_with_noneduc_pretreat_child(&panel, self.flag_age)
        } else {
            panel
        }
    }
}

fn group_rule(g: GroupArg) -> GroupRule {
    match g {
        GroupArg::RuralDaughters => GroupRule::RuralDaughters,
        GroupArg::RuralFemale => GroupRule::RuralFemale,
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
}

impl FitArgs {
    fn options(&self) -> Result<FitOptions> {
        if self.max_iter == 0 {
            return Err(Error::Config("--max-iter must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive and finite, got {}", self.tol)));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!("--ridge must be non-negative and finite, got {}", self.ridge)));
        }
        Ok(FitOptions { max_iter: self.max_iter, tol: self.tol, ridge: self.ridge })
    }
}

#[derive(Debug, Clone, Args)]
pub struct HwiArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fit JSON.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional coefficient table.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EffectsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Reuse a fit written by `estimate` instead of refitting.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// FDR level for the `significant` column.
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: f64,
    /// ATT table and dominance verdicts as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub fit_args: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CdfArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "head-education")]
    pub grouping: GroupingArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub fit_args: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlaceboArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Ages splitting pseudo-exposed [29, t-1] from pseudo-unexposed [t, --pre-max].
    #[arg(long, value_delimiter = ',', default_value = "35,40,45")]
    pub thresholds: Vec<u32>,
    #[arg(long, default_value_t = 60)]
    pub pre_max: u32,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, value_enum, default_value = "rural-daughters")]
    pub group: GroupArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub fit_args: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CrosssecArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub windows: WindowArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MmiGridArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub p1: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu_start: f64,
    #[arg(long, default_value_t = 3.0)]
    pub mu_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub mu_step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[arg(long, default_value_t = DEFAULT_LOC1)]
    pub loc1: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MmiSimArgs {
    /// Calibrated preset; otherwise the parametric family below.
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[arg(long, default_value_t = 0.9)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = DEFAULT_LOC1)]
    pub loc1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub k: f64,
    /// Monte Carlo draws per group.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Decision-model preset; implies `--model decision`.
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long, value_enum, default_value = "probit")]
    pub model: ModelArg,
    /// True coefficients for the probit model, comma separated in fit column order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub kappa: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20_000)]
    pub households: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cost faced by exposed daughters in the decision model.
    #[arg(long, default_value_t = 0.0)]
    pub post_cost: f64,
    #[command(flatten)]
    pub windows: WindowArgs,
    #[arg(long, default_value_t = 13)]
    pub age_min: u32,
    #[arg(long, default_value_t = 28)]
    pub age_max: u32,
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth sidecar; defaults to the output path with `.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DescribeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub windows: WindowArgs,
}

/// Parse argv (program name first) without running anything.
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(args)
}

fn check_prob(flag: &str, v: f64, open: bool) -> Result<()> {
    let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(())
    } else {
        let range = if open { "(0, 1)" } else { "[0, 1]" };
        Err(Error::Config(format!("--{flag} must lie in {range}, got {v}")))
    }
}

fn check_finite(flag: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("--{flag} must be finite, got {v}")))
    }
}

impl RunConfig {
    /// Flag-level checks done before any file is touched.
    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        match &self.command {
            Command::Hwi(_) | Command::Describe(_) => {}
            Command::Estimate(a) => {
                a.sample.config()?;
                a.fit.options()?;
            }
            Command::Effects(a) => {
                a.sample.config()?;
                a.fit_args.options()?;
                check_prob("q", a.q, true)?;
            }
            Command::Cdf(a) => {
                a.sample.config()?;
                a.fit_args.options()?;
            }
            Command::Placebo(a) => {
                a.fit_args.options()?;
                check_prob("level", a.level, true)?;
                if a.thresholds.is_empty() {
                    return Err(Error::Config("--thresholds needs at least one age".into()));
                }
                for &t in &a.thresholds {
                    crate::did::placebo_windows(t, a.pre_max).map_err(|e| Error::Config(format!("--thresholds {t}: {e}")))?;
                }
            }
            Command::Crosssec(a) => {
                a.windows.windows()?;
            }
            Command::MmiGrid(a) => {
                for (flag, v) in [("mu-start", a.mu_start), ("mu-end", a.mu_end), ("mu-step", a.mu_step), ("k", a.k), ("loc1", a.loc1)] {
                    check_finite(flag, v)?;
                }
                check_prob("p0", a.p0, false)?;
                for &p in &a.p1 {
                    check_prob("p1", p, false)?;
                }
                if !(a.k > 0.0) {
                    return Err(Error::Config(format!("--k must be positive, got {}", a.k)));
                }
                linear_grid(a.mu_start, a.mu_end, a.mu_step).map_err(|e| Error::Config(format!("--mu-start/--mu-end/--mu-step: {e}")))?;
            }
            Command::MmiSim(a) => {
                if a.n == 0 {
                    return Err(Error::Config("--n must be at least 1".into()));
                }
                if a.preset.is_none() {
                    for (flag, v) in [("mu", a.mu), ("loc1", a.loc1), ("k", a.k)] {
                        check_finite(flag, v)?;
                    }
                    check_prob("p0", a.p0, false)?;
                    check_prob("p1", a.p1, false)?;
                    if !(a.k >= 0.0) {
                        return Err(Error::Config(format!("--k must be non-negative, got {}", a.k)));
                    }
                }
            }
            Command::Simulate(a) => {
                if a.households == 0 {
                    return Err(Error::Config("--households must be at least 1".into()));
                }
                a.windows.windows()?;
                if a.age_min > a.age_max {
                    return Err(Error::Config(format!("--age-min {} exceeds --age-max {}", a.age_min, a.age_max)));
                }
                if !(a.post_cost >= 0.0 && a.post_cost.is_finite()) {
                    return Err(Error::Config(format!("--post-cost must be finite and non-negative, got {}", a.post_cost)));
                }
                if let Some(k) = &a.kappa {
                    if a.preset.is_some() || a.model == ModelArg::Decision {
                        return Err(Error::Config("--kappa applies to the probit model only".into()));
                    }
                    if k.len() != EstimationSample::width() {
                        return Err(Error::Config(format!("--kappa needs {} values, got {}", EstimationSample::width(), k.len())));
                    }
                    if k.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Config("--kappa values must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Run with the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&config, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Validate and dispatch inside a pool capped at `--threads`. The human
/// summary is buffered and written to `out` once the command finishes.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("--threads: {e}")))?;
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&config.command, &mut buf));
    out.write_all(&buf)?;
    result
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Hwi(a) => cmd_hwi(a, out),
        Command::Estimate(a) => cmd_estimate(a, out),
        Command::Effects(a) => cmd_effects(a, out),
        Command::Cdf(a) => cmd_cdf(a, out),
        Command::Placebo(a) => cmd_placebo(a, out),
        Command::Crosssec(a) => cmd_crosssec(a, out),
        Command::MmiGrid(a) => cmd_mmi_grid(a, out),
        Command::MmiSim(a) => cmd_mmi_sim(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Describe(a) => cmd_describe(a, out),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    results: T,
}

fn write_json<T: Serialize>(path: &Path, command: &str, results: T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &Envelope { schema_version: SCHEMA_VERSION, command, results })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// CSV report with a trailing `schema_version` column.
struct CsvReport {
    w: csv::Writer<BufWriter<File>>,
    version: String,
}

impl CsvReport {
    fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(create(path)?);
        let mut h: Vec<&str> = header.to_vec();
        h.push("schema_version");
        w.write_record(&h)?;
        Ok(Self { w, version: SCHEMA_VERSION.to_string() })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        let mut rec: Vec<&str> = fields.iter().map(String::as_str).collect();
        rec.push(&self.version);
        self.w.write_record(&rec)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn load_panel(path: &Path, out: &mut dyn Write) -> Result<HouseholdPanel> {
    let load = load_panel_csv(open(path)?)?;
    writeln!(
        out,
        "read {} rows from {}: {} households, {} rejected",
        load.rows_read,
        path.display(),
        load.panel.len(),
        load.rejects.len()
    )?;
    for r in load.rejects.iter().take(5) {
        writeln!(out, "  rejected line {}: {}", r.line, r.reason)?;
    }
    for w in &load.warnings {
        writeln!(out, "  warning: {w}")?;
    }
    if load.panel.is_empty() {
        return Err(Error::Empty(format!("{} has no valid rows", path.display())));
    }
    Ok(load.panel)
}

fn load_fit(path: &Path) -> Result<ProbitFit> {
    let fit = ProbitFit::read_json(open(path)?)?;
    if fit.column_names != EstimationSample::column_names() {
        return Err(Error::Schema(format!("{}: fit columns do not match the estimation design", path.display())));
    }
    Ok(fit)
}

fn cmd_hwi(a: &HwiArgs, out: &mut dyn Write) -> Result<()> {
    let load = load_asset_csv(open(&a.input)?)?;
    let expansion = expand_indicators(&load.records);
    let index = first_factor_index(&expansion.matrix)?;
    writeln!(
        out,
        "wealth index over {} households ({} rejected): eigenvalue {:.6}, explained share {:.4}",
        index.scores.len(),
        load.rejects.len() + expansion.rejects.len(),
        index.eigenvalue,
        index.explained_share
    )?;
    if !index.skipped.is_empty() {
        writeln!(out, "constant indicators skipped: {}", index.skipped.join(", "))?;
    }
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(&a.output, &["household_id", "hwi", "low_hwi"])?;
            for (id, s) in index.household_ids.iter().zip(&index.scores) {
                w.row(&[id.clone(), s.to_string(), u8::from(is_low(*s)).to_string()])?;
            }
            w.finish()
        }
        Format::Json => write_json(&a.output, "hwi", &index),
    }
}

fn fit_from(panel: &HouseholdPanel, sample: &SampleArgs, fit: &FitArgs) -> Result<(EstimationSample, ProbitFit)> {
    let s = build_estimation_sample(panel, &sample.config()?)?;
    let f = fit_probit(&s, &fit.options()?)?;
    Ok((s, f))
}

fn report_fit(fit: &ProbitFit, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "probit on {} rows: loglik {:.6}, {} iterations, converged {}",
        fit.n, fit.loglik, fit.iterations, fit.converged
    )?;
    if fit.separation_warning {
        writeln!(out, "warning: coefficients beyond +/-30 suggest quasi-separation")?;
    }
    writeln!(out, "{:<24} {:>12} {:>12} {:>9}", "term", "estimate", "se", "p")?;
    for c in fit.coefficients() {
        writeln!(out, "{:<24} {:>12.6} {:>12.6} {:>9.4}", c.name, c.estimate, c.se, c.p_value)?;
    }
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<()> {
    let panel = a.sample.prepare(load_panel(&a.input, out)?);
    let (_, fit) = fit_from(&panel, &a.sample, &a.fit)?;
    report_fit(&fit, out)?;
    let mut w = create(&a.output)?;
    fit.write_json(&mut w)?;
    w.write_all(b"\n")?;
    w.flush()?;
    if let Some(path) = &a.coefficients {
        let mut w = CsvReport::create(path, &["term", "estimate", "se", "z", "p_value"])?;
        for c in fit.coefficients() {
            w.row(&[c.name, c.estimate.to_string(), c.se.to_string(), c.z.to_string(), c.p_value.to_string()])?;
        }
        w.finish()?;
    }
    if !fit.converged {
        return Err(Error::NotConverged(format!("score norm {:e} after {} iterations", fit.score_norm, fit.iterations)));
    }
    Ok(())
}

fn effects_for(input: &Path, fit: Option<&PathBuf>, sample: &SampleArgs, fit_args: &FitArgs, out: &mut dyn Write) -> Result<Vec<EffectRecord>> {
    let panel = sample.prepare(load_panel(input, out)?);
    let (s, f) = match fit {
        Some(path) => (build_estimation_sample(&panel, &sample.config()?)?, load_fit(path)?),
        None => fit_from(&panel, sample, fit_args)?,
    };
    let effects = estimate_effects(&f, &s)?;
    if effects.is_empty() {
        return Err(Error::Empty("the sample has no treated rows".into()));
    }
    Ok(effects)
}

#[derive(Serialize)]
struct Verdict {
    grouping: Grouping,
    verdict: crate::did::Dominance,
    text: String,
}

#[derive(Serialize)]
struct EffectsSummary {
    n_treated: usize,
    q: f64,
    bh_rejections: usize,
    att: Vec<AttRow>,
    verdicts: Vec<Verdict>,
}

fn cmd_effects(a: &EffectsArgs, out: &mut dyn Write) -> Result<()> {
    let effects = effects_for(&a.input, a.fit.as_ref(), &a.sample, &a.fit_args, out)?;
    let p_adj: Vec<f64> = effects.iter().map(|e| e.p_adj).collect();
    let rejected = bh_rejections(&p_adj, a.q).len();
    let att = att_table(&effects);
    writeln!(out, "{} treated rows, {} significant at FDR {}", effects.len(), rejected, a.q)?;
    for row in &att {
        let label = serde_json::to_value(row.filter)?.as_str().unwrap_or_default().to_string();
        match row.att {
            Some(v) => writeln!(out, "ATT {label:<18} n={:<8} {v:.6}", row.n)?,
            None => writeln!(out, "ATT {label:<18} n={:<8} -", row.n)?,
        }
    }
    let mut verdicts = Vec::new();
    for grouping in [Grouping::HeadEducation, Grouping::Wealth] {
        match subgroup_cdf(&effects, grouping) {
            Ok(cdf) => {
                writeln!(out, "CDF dominance ({}): {}", serde_json::to_value(grouping)?.as_str().unwrap_or_default(), cdf.verdict_text())?;
                verdicts.push(Verdict { grouping, verdict: cdf.verdict, text: cdf.verdict_text() });
            }
            Err(Error::Empty(msg)) => writeln!(out, "CDF dominance: skipped, {msg}")?,
            Err(e) => return Err(e),
        }
    }
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(
                &a.output,
                &["household_id", "child_id", "tau", "se", "t_stat", "p_raw", "p_adj", "significant", "head_educated", "low_hwi", "degenerate"],
            )?;
            for e in &effects {
                w.row(&[
                    e.household_id.clone(),
                    e.child_id.clone(),
                    e.tau.to_string(),
                    e.se.to_string(),
                    e.t_stat.to_string(),
                    e.p_raw.to_string(),
                    e.p_adj.to_string(),
                    u8::from(e.p_adj <= a.q).to_string(),
                    u8::from(e.head_educated).to_string(),
                    u8::from(e.low_hwi).to_string(),
                    u8::from(e.degenerate).to_string(),
                ])?;
            }
            w.finish()?;
        }
        Format::Json => write_json(&a.output, "effects", &effects)?,
    }
    if let Some(path) = &a.summary {
        write_json(path, "effects", EffectsSummary { n_treated: effects.len(), q: a.q, bh_rejections: rejected, att, verdicts })?;
    }
    Ok(())
}

fn cmd_cdf(a: &CdfArgs, out: &mut dyn Write) -> Result<()> {
    let effects = effects_for(&a.input, a.fit.as_ref(), &a.sample, &a.fit_args, out)?;
    let grouping = match a.grouping {
        GroupingArg::HeadEducation => Grouping::HeadEducation,
        GroupingArg::Wealth => Grouping::Wealth,
    };
    let cdf = subgroup_cdf(&effects, grouping)?;
    writeln!(out, "{} ({} rows) vs {} ({} rows): {}", cdf.first_label, cdf.first.len(), cdf.second_label, cdf.second.len(), cdf.verdict_text())?;
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(&a.output, &["group", "tau", "cdf"])?;
            for (label, pts) in [(&cdf.first_label, &cdf.first), (&cdf.second_label, &cdf.second)] {
                for p in pts {
                    w.row(&[label.clone(), p.tau.to_string(), p.f.to_string()])?;
                }
            }
            w.finish()
        }
        Format::Json => write_json(&a.output, "cdf", &cdf),
    }
}

fn cmd_placebo(a: &PlaceboArgs, out: &mut dyn Write) -> Result<()> {
    let panel = load_panel(&a.input, out)?;
    let options = PlaceboOptions { pre_max: a.pre_max, group: group_rule(a.group), level: a.level, fit: a.fit_args.options()? };
    let columns = placebo_run(&panel, &a.thresholds, &options)?;
    for c in &columns {
        let min_p = c.interactions.iter().map(|t| t.p_adj).fold(1.0, f64::min);
        writeln!(
            out,
            "threshold {}: n={} converged {} min BH-adjusted p {:.4} -> {}",
            c.threshold,
            c.n,
            c.converged,
            min_p,
            if c.any_significant { "significant interaction" } else { "no significant interaction" }
        )?;
    }
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(&a.output, &["threshold", "term", "estimate", "se", "z", "p_raw", "p_adj"])?;
            for c in &columns {
                for t in &c.interactions {
                    w.row(&[
                        c.threshold.to_string(),
                        t.name.clone(),
                        t.estimate.to_string(),
                        t.se.to_string(),
                        t.z.to_string(),
                        t.p_raw.to_string(),
                        t.p_adj.to_string(),
                    ])?;
                }
            }
            w.finish()
        }
        Format::Json => write_json(&a.output, "placebo", &columns),
    }
}

fn spec_label(s: &crate::crosssec::CrossSectionSpec) -> &'static str {
    match (s.fixed_effects, s.covariate_interactions) {
        (true, false) => "fe",
        (false, true) => "interactions",
        (true, true) => "fe+interactions",
        (false, false) => "plain",
    }
}

fn cmd_crosssec(a: &CrosssecArgs, out: &mut dyn Write) -> Result<()> {
    let panel = load_panel(&a.input, out)?;
    let t = table3(&panel, &a.windows.windows()?)?;
    writeln!(out, "{} households with daughters in either window ({} without)", t.n_households, t.dropped_no_daughters)?;
    for c in &t.columns {
        let r = c.get("R").map(|(b, s)| format!("{b:.6} ({s:.6})")).unwrap_or_default();
        writeln!(out, "{:<16} n={} R {} R2 {}", spec_label(&c.spec), c.n, r, opt(c.r2))?;
    }
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(&a.output, &["spec", "term", "estimate", "se", "n", "r2"])?;
            for c in &t.columns {
                for (j, name) in c.names.iter().enumerate() {
                    w.row(&[spec_label(&c.spec).into(), name.clone(), c.coef[j].to_string(), c.se[j].to_string(), c.n.to_string(), opt(c.r2)])?;
                }
            }
            w.finish()
        }
        Format::Json => write_json(&a.output, "crosssec", &t),
    }
}

fn cmd_mmi_grid(a: &MmiGridArgs, out: &mut dyn Write) -> Result<()> {
    let mu = linear_grid(a.mu_start, a.mu_end, a.mu_step)?;
    let settings = GapSettings { k: a.k, p0: a.p0, loc1: a.loc1 };
    let cells = effect_gap_grid(&mu, &a.p1, &settings)?;
    for &p1 in &a.p1 {
        let col: Vec<_> = cells.iter().filter(|c| c.p1 == p1).collect();
        let count = |s: Sign| col.iter().filter(|c| c.sign == s).count();
        writeln!(
            out,
            "p1={p1}: {} negative, {} zero, {} positive over {} mu values",
            count(Sign::Negative),
            count(Sign::Zero),
            count(Sign::Positive),
            col.len()
        )?;
    }
    let Some(path) = &a.output else { return Ok(()) };
    match a.format {
        Format::Csv => {
            let mut w = CsvReport::create(path, &["mu", "p1", "tau0", "tau1", "f", "sign"])?;
            for c in &cells {
                w.row(&[c.mu.to_string(), c.p1.to_string(), c.tau0.to_string(), c.tau1.to_string(), c.f.to_string(), c.sign.as_str().into()])?;
            }
            w.finish()
        }
        Format::Json => write_json(path, "mmi-grid", &cells),
    }
}

fn preset(p: PresetArg) -> Preset {
    match p {
        PresetArg::Saturation => Preset::Saturation,
        PresetArg::Conditional => Preset::Conditional,
    }
}

#[derive(Serialize)]
struct SimRow {
    group: &'static str,
    enrollment_with_cost: f64,
    closed_form_tau: f64,
    monte_carlo: McResult,
    /// (τ̂ − τ) / se
    z: f64,
}

#[derive(Serialize)]
struct SimReport {
    model: DecisionModelSpec,
    seed: u64,
    groups: Vec<SimRow>,
}

fn cmd_mmi_sim(a: &MmiSimArgs, out: &mut dyn Write) -> Result<()> {
    let model = match a.preset {
        Some(p) => preset(p).spec()?,
        None => DecisionModelSpec::parametric(a.p0, a.p1, a.mu, a.loc1, a.k)?,
    };
    let mut groups = Vec::new();
    for (i, (group, label)) in [(Group::NonEducated, "non-educated"), (Group::Educated, "educated")].into_iter().enumerate() {
        let tau = policy_effect(&model, group, model.k)?;
        let mc = mc_simulate(&model, group, model.k, a.n, crate::parallel::derive_seed(a.seed, i as u64))?;
        let z = if mc.se > 0.0 { (mc.tau_hat - tau) / mc.se } else { 0.0 };
        writeln!(out, "{label:<13} tau closed form {tau:.6}, Monte Carlo {:.6} (se {:.6}, z {z:+.2})", mc.tau_hat, mc.se)?;
        groups.push(SimRow { group: label, enrollment_with_cost: enrollment_prob(&model, group, model.k)?, closed_form_tau: tau, monte_carlo: mc, z });
    }
    let report = SimReport { model, seed: a.seed, groups };
    match &a.output {
        Some(path) => write_json(path, "mmi-sim", &report),
        None => Ok(()),
    }
}

fn truth_path(a: &SimulateArgs) -> PathBuf {
    a.truth.clone().unwrap_or_else(|| {
        let mut s = a.output.clone().into_os_string();
        s.push(".truth.json");
        PathBuf::from(s)
    })
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let windows = a.windows.windows()?;
    let (panel, truth) = if a.preset.is_some() || a.model == ModelArg::Decision {
        let p = preset(a.preset.unwrap_or(PresetArg::Saturation));
        let mut dgp = DecisionDgp::preset(p, a.households, a.seed)?;
        dgp.windows = windows;
        dgp.post_cost = a.post_cost;
        dgp.law.age_min = a.age_min;
        dgp.law.age_max = a.age_max;
        let (panel, truth) = generate_decision_panel(&dgp)?;
        writeln!(
            out,
            "decision preset {}: pre-policy enrollment educated {:.4}, non-educated {:.4}; tau educated {:.6}, non-educated {:.6}",
            p.as_str(),
            truth.educated.pre,
            truth.non_educated.pre,
            truth.educated.tau,
            truth.non_educated.tau
        )?;
        (panel, Truth::Decision(truth))
    } else {
        let mut spec = DgpSpec::new(a.households, a.seed);
        if let Some(k) = &a.kappa {
            spec.kappa_true = k.clone();
        }
        spec.windows = windows;
        spec.law.age_min = a.age_min;
        spec.law.age_max = a.age_max;
        let (panel, truth) = generate_probit_panel(&spec)?;
        writeln!(out, "probit panel: {} treated children, true ATT {:.6}", truth.n_treated, truth.true_att)?;
        (panel, Truth::Probit(truth))
    };
    let mut w = create(&a.output)?;
    write_panel_csv(&panel, &mut w)?;
    w.flush()?;
    let path = truth_path(a);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &truth)?;
    w.write_all(b"\n")?;
    w.flush()?;
    writeln!(out, "wrote {} households ({} children) to {}, truth to {}", panel.len(), panel.n_children(), a.output.display(), path.display())?;
    Ok(())
}

#[derive(Serialize)]
struct Description {
    summary: crate::data::PanelSummary,
    pre_window: crate::data::AgeWindow,
    saturation: crate::data::SaturationShares,
    mobility: crate::data::MobilityByGender,
}

fn cmd_describe(a: &DescribeArgs, out: &mut dyn Write) -> Result<()> {
    let panel = load_panel(&a.input, out)?;
    let windows = a.windows.windows()?;
    let d = Description {
        summary: summarize_panel(&panel),
        pre_window: windows.pre,
        saturation: saturation_shares(&panel, windows.pre)?,
        mobility: mobility_indicators(&panel)?,
    };
    writeln!(out, "{} households ({} rural), {} children", d.summary.households, d.summary.rural_households, d.summary.children)?;
    writeln!(
        out,
        "pre-window daughters educated: educated head {} (n={}), non-educated head {} (n={})",
        opt(d.saturation.educated_head.share),
        d.saturation.educated_head.n,
        opt(d.saturation.non_educated_head.share),
        d.saturation.non_educated_head.n
    )?;
    for (label, m) in [("sons", d.mobility.sons), ("daughters", d.mobility.daughters)] {
        if let Some(m) = m {
            writeln!(out, "mobility {label}: ascending {:.4}, descending {:.4}, total {:.4}", m.ascending, m.descending, m.mobility)?;
        }
    }
    match &a.output {
        Some(path) => write_json(path, "describe", &d),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("nldid").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_rejected() {
        let (code, _, err) = run_capture(&["mmi-grid", "--bogus"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("--bogus"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("mmi-grid"));
    }

    #[test]
    fn config_errors_name_the_flag() {
        for (args, flag) in [
            (vec!["mmi-grid", "--p1", "1.5"], "--p1"),
            (vec!["mmi-grid", "--mu-step", "0"], "--mu-step"),
            (vec!["mmi-sim", "--n", "0"], "--n"),
            (vec!["simulate", "--households", "0", "--output", "x.csv"], "--households"),
            (vec!["simulate", "--kappa", "1,2", "--output", "x.csv"], "--kappa"),
            (vec!["placebo", "--input", "x", "--output", "y", "--thresholds", "20"], "--thresholds"),
            (vec!["effects", "--input", "x", "--output", "y", "--q", "0"], "--q"),
            (vec!["estimate", "--input", "x", "--output", "y", "--post-max", "20"], "--post-min"),
            (vec!["--threads", "0", "mmi-grid"], "--threads"),
        ] {
            let (code, _, err) = run_capture(&args);
            assert_eq!(code, EXIT_INVALID, "{args:?}");
            assert!(err.contains(flag), "{args:?}: {err}");
        }
    }

    #[test]
    fn mmi_grid_sign_summary() {
        let (code, out, _) = run_capture(&["mmi-grid", "--p1", "0.9,0.3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("p1=0.9: 61 negative, 0 zero, 0 positive"), "{out}");
        assert!(out.contains("p1=0.3: 0 negative, 0 zero, 61 positive"), "{out}");
    }

    #[test]
    fn missing_input_is_invalid() {
        let (code, _, err) = run_capture(&["describe", "--input", "/nonexistent/panel.csv"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("/nonexistent/panel.csv"));
    }

    #[test]
    fn numerical_errors_exit_two() {
        assert_eq!(exit_code(&Error::RankDeficient { column: "x".into() }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Schema("x".into())), EXIT_INVALID);
    }
}
