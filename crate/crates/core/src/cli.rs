//! The `bellsim` command line.
//!
//! Exit codes: 0 on success, 2 on a usage or configuration error, 3 when an
//! output that was asked for has an undefined correlation (no coincidences),
//! 1 on I/O failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::engine::{
    self, CorrelationEstimate, ExperimentConfig, ModelConfig, Protocol, RunParams, ThreeSettingResult, DEFAULT_PAIRS,
    DEFAULT_SHARDS,
};
use crate::error::Error;
use crate::geometry::{Angle, Aperture};
use crate::inequalities::{
    bell_count, chsh_from_model, chsh_quantum, perturbed_bell_demo, tautology_check, ChshSettings, PerturbedScenario,
    RegionCounts,
};
use crate::io::csv::{curve_to_csv, estimate_fields, fmt_f64};
use crate::io::manifest::{now_unix_ms, RunManifest};
use crate::io::svg::{render_svg, Series};
use crate::models::menu::{MenuWorld, DEFAULT_CHAINS};
use crate::models::program::{all_programs, best_program, match_table, program_overall, ThreeOptions};
use crate::models::quantum::{qm_three_setting_overall, Particle};
use crate::models::{ApertureModel, Pairing};
use crate::oracle::{self, claim_report, QuadratureSpec, Reference};

#[derive(Debug, Parser)]
#[command(name = "bellsim", version, about = "Local hidden-variable models of EPR correlation experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Result file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// figure-eight | rose | circle:<d> | slit:<eps> | programs | menu
    #[arg(long)]
    pub model: Option<String>,
    /// head-to-toe | back-to-back
    #[arg(long)]
    pub pairing: Option<String>,
    #[arg(long)]
    pub pairs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shards: Option<u32>,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Left target at 0°, right target stepped across a range.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// One pair of target settings.
    Fixed {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        left: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        right: Option<f64>,
    },
    /// Each side picks one of three settings at random after the pair is made.
    ThreeSetting {
        #[command(flatten)]
        common: CommonArgs,
        /// Three comma-separated angles.
        #[arg(long)]
        options: Option<String>,
    },
    /// Both targets uniform over the full circle, binned by separation.
    Random360 {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        bin_width: Option<f64>,
    },
    /// CHSH statistic from four post-selected runs.
    Chsh {
        #[command(flatten)]
        common: CommonArgs,
        /// a1,b1,c2,d2 in degrees.
        #[arg(long, allow_hyphen_values = true)]
        settings: Option<String>,
    },
    /// Exact match probabilities of the eight deterministic programs.
    Programs {
        #[arg(long, default_value = "0,22.5,67.5")]
        options: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bell's counting inequality on explicit, random or disturbed sets.
    BellCount {
        /// a,b,c,d,e,f,g[,outside] region sizes.
        #[arg(long)]
        regions: Option<String>,
        /// Run the destructive hat-and-rabbit measurement.
        #[arg(long)]
        hat_rabbit: bool,
        /// Check this many random universes.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Restaurant-menu model: match rates per pair of chains.
    MenuDemo {
        #[arg(long, alias = "pairs", default_value_t = 100_000)]
        days: u64,
        /// disjoint | identical | overlap:<k>
        #[arg(long, default_value = "disjoint")]
        menus: String,
        #[arg(long, default_value_t = 10)]
        rows: usize,
        #[arg(long, default_value_t = 10)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SHARDS)]
        shards: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Oracle, Monte Carlo and reference curves side by side, with a verdict.
    ClaimReport {
        #[command(flatten)]
        common: CommonArgs,
        /// spin-half | photon | linear; defaults from the pairing.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, default_value_t = 5.0)]
        step: f64,
        #[arg(long, default_value_t = QuadratureSpec::default().rho_steps)]
        rho_steps: usize,
        #[arg(long, default_value_t = oracle::DEFAULT_CLAIM_TOLERANCE)]
        tolerance: f64,
    },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Undefined(String),
    Failed(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Undefined(_) => 3,
            CliError::Failed(Error::Io { .. }) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Undefined(m) => write!(f, "undefined correlation: {m}"),
            CliError::Failed(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failed(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (including the program name), runs it and returns the exit
/// code. Normal output goes to `stdout`; diagnostics go to stderr.
pub fn run<I, T>(argv: I, stdout: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                eprint!("{}", e.render());
            }
            return code;
        }
    };
    match execute(cli.command, None, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bellsim: {e}");
            e.exit_code()
        }
    }
}

/// Writes results and remembers every file for the manifest.
struct Sink<'a> {
    output: OutputArgs,
    stdout: &'a mut dyn std::io::Write,
    written: Vec<PathBuf>,
    started: u128,
}

impl<'a> Sink<'a> {
    fn new(output: OutputArgs, stdout: &'a mut dyn std::io::Write) -> Self {
        Self {
            output,
            stdout,
            written: Vec::new(),
            started: now_unix_ms(),
        }
    }

    fn format(&self) -> Format {
        self.output.format.unwrap_or(Format::Csv)
    }

    /// Status text; kept off stdout when stdout carries JSON.
    fn say(&mut self, line: &str) {
        if self.output.out.is_none() && self.format() == Format::Json {
            eprintln!("{line}");
        } else {
            let _ = writeln!(self.stdout, "{line}");
        }
    }

    /// The main result: to `--out` if given, otherwise stdout.
    fn emit(&mut self, csv: impl FnOnce() -> CliResult<String>, json: impl FnOnce() -> CliResult<String>) -> CliResult<()> {
        let body = match self.format() {
            Format::Csv => csv()?,
            Format::Json => json()?,
        };
        match self.output.out.clone() {
            Some(path) => {
                write_text(&path, &body)?;
                self.say(&format!("wrote {}", path.display()));
                self.written.push(path);
            }
            None => {
                let _ = self.stdout.write_all(body.as_bytes());
            }
        }
        Ok(())
    }

    fn plot(&mut self, title: &str, series: impl FnOnce() -> Vec<Series>) -> CliResult<()> {
        if let Some(path) = self.output.svg.clone() {
            let svg = render_svg(title, &series())?;
            write_text(&path, &svg)?;
            self.say(&format!("wrote {}", path.display()));
            self.written.push(path);
        }
        Ok(())
    }

    /// Writes `<first output>.manifest.json` when anything went to disk.
    fn finish(self, command: &str, argv: Vec<String>, config: Option<ExperimentConfig>) -> CliResult<()> {
        let Some(first) = self.written.first() else {
            return Ok(());
        };
        let manifest = RunManifest {
            tool: "bellsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv,
            seed: config.as_ref().map(|c| c.seed),
            shards: config.as_ref().map(|c| c.shards),
            config,
            started_unix_ms: self.started,
            finished_unix_ms: now_unix_ms(),
            outputs: self.written.clone(),
        };
        let path = RunManifest::path_for(first);
        manifest.write(&path)?;
        let _ = writeln!(self.stdout, "wrote {}", path.display());
        Ok(())
    }

    /// Output flags in canonical form, for the manifest.
    fn argv(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(p) = &self.output.out {
            v.extend(["--out".to_string(), p.display().to_string()]);
        }
        if let Some(f) = self.output.format {
            v.extend(["--format".to_string(), format!("{f:?}").to_lowercase()]);
        }
        if let Some(p) = &self.output.svg {
            v.extend(["--svg".to_string(), p.display().to_string()]);
        }
        v
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Failed(Error::io(path, e)))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v).map_err(Error::from)? + "\n")
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("bad number `{x}` in {what}")))
        })
        .collect()
}

fn parse_options(s: &str) -> CliResult<ThreeOptions> {
    let v = parse_list(s, "--options")?;
    let arr: [f64; 3] = v
        .try_into()
        .map_err(|v: Vec<f64>| CliError::Usage(format!("--options needs exactly 3 angles, got {}", v.len())))?;
    Ok(ThreeOptions::new(arr)?)
}

fn parse_model(model: &str, pairing: Pairing) -> CliResult<ModelConfig> {
    match model {
        "programs" => Ok(ModelConfig::Programs),
        "menu" => Ok(ModelConfig::Menu {
            world: MenuWorld::disjoint(&DEFAULT_CHAINS, 10, 10)?,
        }),
        other => Ok(ModelConfig::Aperture(ApertureModel::new(other.parse::<Aperture>()?, pairing))),
    }
}

fn model_flag(model: &ModelConfig) -> Option<String> {
    match model {
        ModelConfig::Aperture(m) => Some(m.aperture.to_string()),
        ModelConfig::Programs => Some("programs".into()),
        // custom worlds only round-trip through the manifest config
        ModelConfig::Menu { .. } => None,
    }
}

/// Merges the config file (or a replayed config) with flags.
/// `protocol` receives the base protocol, if any, and returns the final one.
fn resolve(
    common: &CommonArgs,
    base: Option<ExperimentConfig>,
    protocol: impl FnOnce(Option<&Protocol>) -> CliResult<Protocol>,
) -> CliResult<ExperimentConfig> {
    let base = match (&common.config, base) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Failed(Error::io(path, e)))?;
            // accept a manifest as well as a bare config
            let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
            let cfg = match value.get("config") {
                Some(inner) if value.get("argv").is_some() => inner.clone(),
                _ => value,
            };
            Some(serde_json::from_value::<ExperimentConfig>(cfg).map_err(Error::from)?)
        }
        (None, b) => b,
    };
    let pairing = match &common.pairing {
        Some(p) => Some(p.parse::<Pairing>()?),
        None => None,
    };
    let model = match (&common.model, &base) {
        (Some(m), _) => parse_model(m, pairing.unwrap_or(Pairing::HeadToToe))?,
        (None, Some(b)) => {
            let mut m = b.model.clone();
            if let (ModelConfig::Aperture(a), Some(p)) = (&mut m, pairing) {
                a.pairing = p;
            }
            m
        }
        (None, None) => ModelConfig::Aperture(ApertureModel::new(
            Aperture::FigureEight,
            pairing.unwrap_or(Pairing::HeadToToe),
        )),
    };
    let cfg = ExperimentConfig {
        model,
        protocol: protocol(base.as_ref().map(|b| &b.protocol))?,
        pairs: common.pairs.or(base.as_ref().map(|b| b.pairs)).unwrap_or(DEFAULT_PAIRS),
        seed: common.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        shards: common.shards.or(base.as_ref().map(|b| b.shards)).unwrap_or(DEFAULT_SHARDS),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical flags for the model, pairing and run size of `cfg`.
fn common_argv(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = Vec::new();
    if let Some(m) = model_flag(&cfg.model) {
        v.extend(["--model".into(), m]);
    }
    if let ModelConfig::Aperture(a) = &cfg.model {
        v.extend(["--pairing".into(), a.pairing.to_string()]);
    }
    v.extend([
        "--pairs".into(),
        cfg.pairs.to_string(),
        "--seed".into(),
        cfg.seed.to_string(),
        "--shards".into(),
        cfg.shards.to_string(),
    ]);
    v
}

fn aperture_of(cfg: &ExperimentConfig) -> CliResult<ApertureModel> {
    cfg.model
        .aperture()
        .copied()
        .map_err(|_| CliError::Usage("this command needs an aperture model (figure-eight, rose, circle:<d>, slit:<eps>)".into()))
}

fn undefined_check(what: &str, estimates: impl IntoIterator<Item = (String, CorrelationEstimate)>) -> CliResult<()> {
    let missing: Vec<String> = estimates
        .into_iter()
        .filter(|(_, e)| !e.is_defined())
        .map(|(label, _)| label)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Undefined(format!("{what} at {}", missing.join(", "))))
    }
}

fn execute(command: Command, replay: Option<ExperimentConfig>, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    match command {
        Command::Sweep { common, start, end, step } => {
            let cfg = resolve(&common, replay, |base| {
                let (s0, e0, st0) = match base {
                    Some(&Protocol::Sweep { start, end, step }) => (start, end, step),
                    _ => (0.0, 180.0, 1.0),
                };
                Ok(Protocol::Sweep {
                    start: start.unwrap_or(s0),
                    end: end.unwrap_or(e0),
                    step: step.unwrap_or(st0),
                })
            })?;
            aperture_of(&cfg)?;
            let curve = engine::run_sweep(&cfg)?;
            let mut sink = Sink::new(common.output, stdout);
            sink.emit(
                || Ok(curve_to_csv(&curve)?),
                || to_json(&json!({ "config": &cfg, "points": &curve })),
            )?;
            sink.plot(&format!("{} sweep", model_label(&cfg)), || {
                vec![Series::new("E (Monte Carlo)", curve.iter().map(|p| (p.theta, p.estimate.e.unwrap_or(f64::NAN))).collect())]
            })?;
            let Protocol::Sweep { start, end, step } = cfg.protocol else { unreachable!() };
            let mut argv = vec!["sweep".to_string()];
            argv.extend(common_argv(&cfg));
            argv.extend(["--start".into(), start.to_string(), "--end".into(), end.to_string(), "--step".into(), step.to_string()]);
            argv.extend(sink.argv());
            sink.finish("sweep", argv, Some(cfg))?;
            undefined_check("sweep", curve.iter().map(|p| (format!("θ={}", p.theta), p.estimate)))
        }

        Command::Fixed { common, left, right } => {
            let cfg = resolve(&common, replay, |base| {
                let (l0, r0) = match base {
                    Some(&Protocol::Fixed { left, right }) => (left.degrees(), right.degrees()),
                    _ => (0.0, 0.0),
                };
                Ok(Protocol::Fixed {
                    left: Angle::new(left.unwrap_or(l0))?,
                    right: Angle::new(right.unwrap_or(r0))?,
                })
            })?;
            aperture_of(&cfg)?;
            let est = engine::run_fixed(&cfg)?;
            let Protocol::Fixed { left, right } = cfg.protocol else { unreachable!() };
            let theta = right.minus(left).degrees();
            let point = engine::CurvePoint { theta, estimate: est };
            let mut sink = Sink::new(common.output, stdout);
            sink.emit(|| Ok(curve_to_csv(&[point])?), || to_json(&json!({ "config": &cfg, "estimate": est })))?;
            sink.plot("fixed settings", || vec![Series::new("E", vec![(theta.min(360.0 - theta), est.e.unwrap_or(f64::NAN))])])?;
            let mut argv = vec!["fixed".to_string()];
            argv.extend(common_argv(&cfg));
            argv.extend(["--left".into(), left.degrees().to_string(), "--right".into(), right.degrees().to_string()]);
            argv.extend(sink.argv());
            sink.finish("fixed", argv, Some(cfg))?;
            undefined_check("fixed", [(format!("({left}, {right})"), est)])
        }

        Command::ThreeSetting { common, options } => {
            let cfg = resolve(&common, replay, |base| {
                let opts = match (&options, base) {
                    (Some(s), _) => parse_options(s)?,
                    (None, Some(Protocol::ThreeSetting { options })) => *options,
                    (None, _) => ThreeOptions::new([0.0, 22.5, 67.5])?,
                };
                Ok(Protocol::ThreeSetting { options: opts })
            })?;
            let res = engine::run_three_setting(&cfg)?;
            let mut sink = Sink::new(common.output, stdout);
            report_three_setting(&mut sink, &cfg, &res)?;
            let Protocol::ThreeSetting { options } = cfg.protocol else { unreachable!() };
            let mut argv = vec!["three-setting".to_string()];
            argv.extend(common_argv(&cfg));
            argv.extend(["--options".into(), <[f64; 3]>::from(options).map(|d| d.to_string()).join(",")]);
            argv.extend(sink.argv());
            sink.finish("three-setting", argv, Some(cfg))?;
            undefined_check("three-setting", [("overall".to_string(), res.overall)])
        }

        Command::Random360 { common, bin_width } => {
            let cfg = resolve(&common, replay, |base| {
                let w0 = match base {
                    Some(&Protocol::Random360 { bin_width }) => bin_width,
                    _ => 5.0,
                };
                Ok(Protocol::Random360 { bin_width: bin_width.unwrap_or(w0) })
            })?;
            let model = aperture_of(&cfg)?;
            let binned = engine::run_random_360(&cfg)?;
            let oracle_pass = oracle::quadrature_mean_double_pass(&model, 180, QuadratureSpec::new(3600)?)?;
            let mut sink = Sink::new(common.output, stdout);
            sink.emit(|| Ok(curve_to_csv(&binned.bins)?), || to_json(&json!({ "config": &cfg, "result": &binned, "oracle_double_pass": oracle_pass })))?;
            sink.say(&format!(
                "double-pass fraction {:.6} (quadrature {:.6}); per-side pass {:.6} / {:.6}",
                binned.totals.coincidence_fraction(),
                oracle_pass,
                binned.pass_rate.left(),
                binned.pass_rate.right()
            ));
            sink.plot(&format!("{} random settings", model_label(&cfg)), || {
                vec![Series::new("E (binned)", binned.bins.iter().map(|p| (p.theta, p.estimate.e.unwrap_or(f64::NAN))).collect())]
            })?;
            let mut argv = vec!["random360".to_string()];
            argv.extend(common_argv(&cfg));
            argv.extend(["--bin-width".into(), binned.bin_width.to_string()]);
            argv.extend(sink.argv());
            sink.finish("random360", argv, Some(cfg))?;
            undefined_check("random360", binned.bins.iter().map(|p| (format!("bin {}", p.theta), p.estimate)))
        }

        Command::Chsh { common, settings } => {
            let cfg = resolve(&common, replay, |_| Ok(Protocol::Fixed { left: Angle::ZERO, right: Angle::ZERO }))?;
            let model = aperture_of(&cfg)?;
            let settings = match &settings {
                Some(s) => {
                    let v = parse_list(s, "--settings")?;
                    if v.len() != 4 {
                        return Err(CliError::Usage(format!("--settings needs 4 angles, got {}", v.len())));
                    }
                    ChshSettings::new(v[0], v[1], v[2], v[3])?
                }
                None => ChshSettings::for_pairing(model.pairing),
            };
            let params = RunParams { pairs: cfg.pairs, seed: cfg.seed, shards: cfg.shards };
            let est = chsh_from_model(&model, &settings, params)?;
            let particle = match model.pairing {
                Pairing::HeadToToe => Particle::SpinHalf,
                Pairing::BackToBack => Particle::Photon,
            };
            let qm = chsh_quantum(particle, &settings);
            let mut sink = Sink::new(common.output.clone(), stdout);
            let labels = ["b1,d2", "a1,d2", "b1,c2", "a1,c2"];
            sink.say(&format!(
                "S = {} ± {}  violation (S > 2): {}  [quantum {} at the same settings: {:.6}]",
                fmt_f64(est.s),
                fmt_f64(est.stderr),
                if est.violates_classical_bound() { "yes" } else { "no" },
                particle,
                qm
            ));
            if common.output.out.is_some() || common.output.format.is_some() {
                sink.emit(
                    || {
                        let mut s = String::from("term,left_deg,right_deg,n_pairs,n_coincident,n_same,n_diff,E,rate,stderr\n");
                        for ((label, (l, r)), e) in labels.iter().zip(settings.pairs()).zip(&est.estimates) {
                            let _ = writeln!(s, "\"{label}\",{},{},{}", l.degrees(), r.degrees(), estimate_fields(e));
                        }
                        Ok(s)
                    },
                    || to_json(&json!({ "model": model, "chsh": &est, "violation": est.violates_classical_bound(), "quantum_s": qm })),
                )?;
            }
            let mut argv = vec!["chsh".to_string()];
            argv.extend(common_argv(&cfg));
            argv.extend([
                "--settings".into(),
                [settings.a1, settings.b1, settings.c2, settings.d2].map(|a| a.degrees().to_string()).join(","),
            ]);
            argv.extend(sink.argv());
            sink.finish("chsh", argv, Some(cfg))?;
            undefined_check("chsh", labels.iter().map(|l| l.to_string()).zip(est.estimates))
        }

        Command::Programs { options, output } => {
            let opts = parse_options(&options)?;
            let table = match_table();
            let overall = program_overall(&opts);
            let (best, best_overall) = best_program();
            let qm_spin = qm_three_setting_overall(Particle::SpinHalf, &opts);
            let qm_photon = qm_three_setting_overall(Particle::Photon, &opts);
            let angles = opts.angles();
            let mut sink = Sink::new(output, stdout);
            sink.emit(
                || {
                    let mut s = String::from("left_deg,right_deg,match_probability\n");
                    for (i, row) in table.iter().enumerate() {
                        for (j, p) in row.iter().enumerate() {
                            let _ = writeln!(s, "{},{},{p}", angles[i].degrees(), angles[j].degrees());
                        }
                    }
                    let _ = writeln!(s, "all,all,{overall}");
                    Ok(s)
                },
                || {
                    to_json(&json!({
                        "options": <[f64; 3]>::from(opts),
                        "table": table.map(|r| r.map(|p| p.to_string())),
                        "overall": overall.to_string(),
                        "programs": all_programs().map(|p| json!({
                            "left": p.left(), "right": p.right(), "overall": p.overall().to_string()
                        })),
                        "best_program": { "left": best.left(), "overall": best_overall.to_string() },
                        "qm_overall": { "spin-half": qm_spin, "photon": qm_photon },
                    }))
                },
            )?;
            let mut argv = vec!["programs".to_string(), "--options".into(), options];
            argv.extend(sink.argv());
            sink.finish("programs", argv, None)
        }

        Command::BellCount { regions, hat_rabbit, random, seed, output } => {
            if regions.is_none() && !hat_rabbit && random.is_none() {
                return Err(CliError::Usage("bell-count needs --regions, --hat-rabbit or --random".into()));
            }
            let mut report = serde_json::Map::new();
            let mut lines = vec!["check,lhs,rhs,slack,holds".to_string()];
            if let Some(r) = &regions {
                let v: Vec<u64> = r
                    .split(',')
                    .map(|x| x.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("bad region count `{x}`"))))
                    .collect::<CliResult<_>>()?;
                if !(7..=8).contains(&v.len()) {
                    return Err(CliError::Usage(format!("--regions needs 7 or 8 counts, got {}", v.len())));
                }
                let rc = RegionCounts { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5], g: v[6], outside: v.get(7).copied().unwrap_or(0) };
                let bc = bell_count(&rc);
                lines.push(format!("regions,{},{},{},{}", bc.lhs, bc.rhs, bc.slack, bc.holds));
                report.insert("regions".into(), json!({ "counts": rc, "result": bc }));
            }
            if hat_rabbit {
                let scenario = PerturbedScenario::hats_and_rabbits();
                let out = perturbed_bell_demo(&scenario)?;
                lines.push(format!(
                    "hat-rabbit-naive,{},{},{},{}",
                    out.naive_lhs,
                    out.naive_rhs,
                    out.naive_lhs as i64 - out.naive_rhs as i64,
                    !out.violated
                ));
                for (k, bc) in out.per_snapshot.iter().enumerate() {
                    lines.push(format!("hat-rabbit-snapshot-{k},{},{},{},{}", bc.lhs, bc.rhs, bc.slack, bc.holds));
                }
                report.insert("hat_rabbit".into(), json!(out));
            }
            if let Some(n) = random {
                let check = tautology_check(n, seed);
                lines.push(format!("random-{n}-universes,,,{},{}", check.min_slack, check.violations == 0));
                report.insert("random".into(), json!(check));
            }
            let mut sink = Sink::new(output, stdout);
            sink.emit(|| Ok(lines.join("\n") + "\n"), || to_json(&report))?;
            let mut argv = vec!["bell-count".to_string()];
            if let Some(r) = regions {
                argv.extend(["--regions".into(), r]);
            }
            if hat_rabbit {
                argv.push("--hat-rabbit".into());
            }
            if let Some(n) = random {
                argv.extend(["--random".into(), n.to_string(), "--seed".into(), seed.to_string()]);
            }
            argv.extend(sink.argv());
            sink.finish("bell-count", argv, None)
        }

        Command::MenuDemo { days, menus, rows, cols, seed, shards, output } => {
            let world = match menus.split_once(':') {
                None if menus == "disjoint" => MenuWorld::disjoint(&DEFAULT_CHAINS, rows, cols)?,
                None if menus == "identical" => MenuWorld::identical(&DEFAULT_CHAINS, rows, cols)?,
                Some(("overlap", k)) => {
                    let k = k.parse().map_err(|_| CliError::Usage(format!("bad overlap period `{k}`")))?;
                    MenuWorld::overlapping(&DEFAULT_CHAINS, rows, cols, k)?
                }
                _ => return Err(CliError::Usage(format!("unknown menu layout `{menus}`"))),
            };
            let cfg = ExperimentConfig {
                model: ModelConfig::Menu { world: world.clone() },
                protocol: Protocol::ThreeSetting { options: ThreeOptions::new([0.0, 1.0, 2.0])? },
                pairs: days,
                seed,
                shards,
            };
            let res = engine::run_three_setting(&cfg)?;
            let names: Vec<&str> = world.chain_names().collect();
            let mut same = (0, 0);
            let mut cross = (0, 0);
            for i in 0..3 {
                for j in 0..3 {
                    let c = res.matrix[i][j];
                    let slot = if i == j { &mut same } else { &mut cross };
                    slot.0 += c.n_same;
                    slot.1 += c.n_coincident;
                }
            }
            let rate = |(m, n): (u64, u64)| if n == 0 { f64::NAN } else { m as f64 / n as f64 };
            let mut sink = Sink::new(output, stdout);
            sink.say(&format!("same-chain match rate {}  cross-chain match rate {}", rate(same), rate(cross)));
            sink.emit(
                || {
                    let mut s = String::from("left_chain,right_chain,days,matches,rate\n");
                    for i in 0..3 {
                        for j in 0..3 {
                            let c = res.matrix[i][j];
                            let _ = writeln!(s, "{},{},{},{},{}", names[i], names[j], c.n_coincident, c.n_same, fmt_f64(c.rate));
                        }
                    }
                    Ok(s)
                },
                || to_json(&json!({ "chains": names, "matrix": res.matrix, "same_chain_rate": rate(same), "cross_chain_rate": rate(cross) })),
            )?;
            let mut argv = vec![
                "menu-demo".to_string(),
                "--days".into(),
                days.to_string(),
                "--menus".into(),
                menus,
                "--rows".into(),
                rows.to_string(),
                "--cols".into(),
                cols.to_string(),
                "--seed".into(),
                seed.to_string(),
                "--shards".into(),
                shards.to_string(),
            ];
            argv.extend(sink.argv());
            sink.finish("menu-demo", argv, Some(cfg))
        }

        Command::ClaimReport { common, reference, step, rho_steps, tolerance } => {
            let cfg = resolve(&common, replay, |_| Ok(Protocol::Sweep { start: 0.0, end: 180.0, step }))?;
            let model = aperture_of(&cfg)?;
            let reference = match reference.as_deref() {
                None => Reference::for_pairing(model.pairing),
                Some("linear") => Reference::Linear(model.pairing),
                Some(p) => Reference::Quantum(p.parse()?),
            };
            if !(step > 0.0 && step <= 180.0) {
                return Err(CliError::Usage(format!("--step {step} must be in (0, 180]")));
            }
            let n = (180.0 / step + 1e-9).floor() as usize;
            let thetas: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
            let params = RunParams { pairs: cfg.pairs, seed: cfg.seed, shards: cfg.shards };
            let rep = claim_report(&model, reference, &thetas, params, QuadratureSpec::new(rho_steps)?, tolerance)?;
            let mut sink = Sink::new(common.output, stdout);
            sink.say(&rep.verdict);
            sink.say(&format!(
                "max |E_model - E_reference| = {:.6}; max |E_MC - E_oracle| = {:.6}",
                rep.max_abs_deviation_model_vs_qm, rep.max_abs_deviation_mc_vs_oracle
            ));
            sink.emit(
                || {
                    let mut s = String::from("theta_deg,oracle_E,mc_E,mc_stderr,reference_E\n");
                    for r in &rep.rows {
                        let _ = writeln!(s, "{},{},{},{},{}", r.theta, fmt_f64(r.oracle_e), fmt_f64(r.mc.e), fmt_f64(r.mc.stderr), fmt_f64(Some(r.reference_e)));
                    }
                    Ok(s)
                },
                || to_json(&rep),
            )?;
            sink.plot(&format!("{} vs {}", model_label(&cfg), rep.reference), || {
                let col = |f: &dyn Fn(&oracle::ClaimRow) -> f64| rep.rows.iter().map(|r| (r.theta, f(r))).collect::<Vec<_>>();
                vec![
                    Series::new("quadrature", col(&|r| r.oracle_e.unwrap_or(f64::NAN))),
                    Series::new("Monte Carlo", col(&|r| r.mc.e.unwrap_or(f64::NAN))),
                    Series::new(rep.reference.to_string(), col(&|r| r.reference_e)),
                ]
            })?;
            let mut argv = vec!["claim-report".to_string()];
            argv.extend(common_argv(&cfg));
            let reference_flag = match rep.reference {
                Reference::Quantum(p) => p.to_string(),
                Reference::Linear(_) => "linear".into(),
            };
            argv.extend([
                "--reference".into(),
                reference_flag,
                "--step".into(),
                step.to_string(),
                "--rho-steps".into(),
                rho_steps.to_string(),
                "--tolerance".into(),
                tolerance.to_string(),
            ]);
            argv.extend(sink.argv());
            sink.finish("claim-report", argv, Some(cfg))
        }

        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            let cli = Cli::try_parse_from(std::iter::once("bellsim".to_string()).chain(m.argv.iter().cloned()))
                .map_err(|e| CliError::Usage(format!("manifest argv does not parse: {e}")))?;
            if matches!(cli.command, Command::Replay { .. }) {
                return Err(CliError::Usage("a manifest cannot replay another replay".into()));
            }
            execute(cli.command, m.config, stdout)
        }
    }
}

fn model_label(cfg: &ExperimentConfig) -> String {
    match &cfg.model {
        ModelConfig::Aperture(m) => format!("{} / {}", m.aperture, m.pairing),
        ModelConfig::Programs => "programs".into(),
        ModelConfig::Menu { .. } => "menu".into(),
    }
}

fn report_three_setting(sink: &mut Sink<'_>, cfg: &ExperimentConfig, res: &ThreeSettingResult) -> CliResult<()> {
    let angles = res.options.angles();
    let diag = res.diagonal();
    sink.say(&format!(
        "overall same-outcome probability {} ± {}  (equal settings: {} same of {})",
        fmt_f64(res.overall.rate),
        fmt_f64(res.overall.stderr.map(|s| s / 2.0)),
        diag.n_same,
        diag.n_coincident
    ));
    let exact = match &cfg.model {
        ModelConfig::Programs => {
            let exact = program_overall(&res.options);
            sink.say(&format!("exact enumeration: {exact}"));
            Some(exact.to_string())
        }
        _ => None,
    };
    let qm = json!({
        "spin-half": qm_three_setting_overall(Particle::SpinHalf, &res.options),
        "photon": qm_three_setting_overall(Particle::Photon, &res.options),
    });
    sink.emit(
        || {
            let mut s = String::from("left_deg,right_deg,n_pairs,n_coincident,n_same,n_diff,E,rate,stderr\n");
            for (i, row) in res.matrix.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    let _ = writeln!(s, "{},{},{}", angles[i].degrees(), angles[j].degrees(), estimate_fields(e));
                }
            }
            let _ = writeln!(s, "all,all,{}", estimate_fields(&res.overall));
            Ok(s)
        },
        || to_json(&json!({ "config": cfg, "result": res, "exact_overall": exact, "qm_overall": qm })),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(std::iter::once("bellsim").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn unknown_subcommand_and_flag_exit_2() {
        assert_eq!(run_capture(&["teleport"]).0, 2);
        assert_eq!(run_capture(&["sweep", "--warp", "9"]).0, 2);
    }

    #[test]
    fn bad_model_is_a_config_error() {
        assert_eq!(run_capture(&["fixed", "--model", "hexagon", "--pairs", "10"]).0, 2);
        assert_eq!(run_capture(&["fixed", "--model", "circle:2", "--pairs", "10"]).0, 2);
        assert_eq!(run_capture(&["fixed", "--model", "programs", "--pairs", "10"]).0, 2);
    }

    #[test]
    fn undefined_correlation_exits_3() {
        let (code, _) = run_capture(&["fixed", "--model", "slit:0", "--right", "90", "--pairs", "1000"]);
        assert_eq!(code, 3);
    }

    #[test]
    fn programs_json_reports_exact_third() {
        let (code, out) = run_capture(&["programs", "--options", "0,22.5,67.5", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["overall"], "1/3");
        assert_eq!(v["best_program"]["overall"], "4/9");
        assert_eq!(v["table"][0][0], "0");
        assert_eq!(v["table"][1][2], "1/2");
    }

    #[test]
    fn bell_count_regions() {
        let (code, out) = run_capture(&["bell-count", "--regions", "1,3,0,0,0,2,0"]);
        assert_eq!(code, 0);
        assert!(out.contains("regions,6,1,5,true"), "{out}");
        assert_eq!(run_capture(&["bell-count"]).0, 2);
        assert_eq!(run_capture(&["bell-count", "--regions", "1,2"]).0, 2);
    }

    #[test]
    fn hat_rabbit_reports_violation() {
        let (code, out) = run_capture(&["bell-count", "--hat-rabbit", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["hat_rabbit"]["violated"], true);
    }

    #[test]
    fn negative_angles_parse() {
        let (code, out) = run_capture(&["fixed", "--left", "-30", "--right", "30", "--pairs", "2000"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with(crate::io::csv::CURVE_HEADER));
        assert!(out.contains("\n60,2000,"), "{out}");
    }
}
