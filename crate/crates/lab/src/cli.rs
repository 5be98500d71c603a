//! The `kljn` command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kljn_core::attack::{run_bit_exchange, ExchangeStreams};
use kljn_core::experiment::{export_scatter, log_grid, TABLE_GAMMAS};
use kljn_core::rng::{stream_id, StreamRole};
use kljn_core::{
    empirical_total_distortion, generate_trace, total_distortion, BitSituation, CaseLabel,
    NoiseSource,
};
use serde::Serialize;

use crate::config::{
    RunConfig, DEFAULT_DISTORTION_GAMMA, DEFAULT_PER_DECADE, DEFAULT_SCATTER_POINTS,
    DEFAULT_TEFF_MAX, DEFAULT_TEFF_MIN,
};
use crate::csvio::{fmt_num, parse_field, write_rows, CsvRow, ScatterRow, SweepRow, TableRow};
use crate::error::{LabError, Result};
use crate::manifest::RunManifest;
use crate::{runner, svg};

#[derive(Debug, Parser)]
#[command(name = "kljn", version, about = "KLJN key exchange under generator nonlinearity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total distortion of each case, analytic and from a simulated trace.
    Distortion(CommonArgs),
    /// Eve's correct-guess probability for every case and γ.
    Table1(CommonArgs),
    /// Correct-guess probability across effective temperatures.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Lowest effective temperature of the grid (default 1e15).
        #[arg(long, value_name = "KELVIN")]
        teff_min: Option<f64>,
        /// Highest effective temperature of the grid (default 1e21).
        #[arg(long, value_name = "KELVIN")]
        teff_max: Option<f64>,
        /// Grid points per decade of temperature (default 6).
        #[arg(long, value_name = "N")]
        per_decade: Option<usize>,
    },
    /// Wire voltage/current samples for IU scatter plots.
    Scatter {
        #[command(flatten)]
        common: CommonArgs,
        /// Samples per secure situation.
        #[arg(long, value_name = "N")]
        points: Option<usize>,
    },
    /// A single secure bit exchange.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = ["hl", "lh"])]
        situation: Option<String>,
        /// Repeat index selecting the random streams.
        #[arg(long, value_name = "N")]
        repeat: Option<u64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// High resistance (default 1e5).
    #[arg(long, value_name = "OHMS")]
    pub rh: Option<f64>,
    /// Low resistance (default 1e4).
    #[arg(long, value_name = "OHMS")]
    pub rl: Option<f64>,
    /// Effective noise temperature (default 1e18).
    #[arg(long, value_name = "KELVIN")]
    pub teff: Option<f64>,
    /// Noise bandwidth (default 500).
    #[arg(long, value_name = "HZ")]
    pub bandwidth: Option<f64>,
    #[arg(long, value_parser = ["ideal", "d2", "d3", "d23"])]
    pub case: Option<String>,
    /// Second-order coefficient, 1/V.
    #[arg(long, value_name = "VAL", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Third-order coefficient, 1/V².
    #[arg(long, value_name = "VAL", allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Samples per bit exchange.
    #[arg(long, value_name = "N")]
    pub gamma: Option<usize>,
    /// Bit exchanges per cell (default 1000).
    #[arg(long, value_name = "N")]
    pub repeats: Option<usize>,
    /// Master seed (default 20211104).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write `<out>.svg`.
    #[arg(long)]
    pub svg: bool,
    /// JSON config file (or a previous run's manifest).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Draw all four situations and discard HH/LL.
    #[arg(long)]
    pub protocol_faithful: bool,
}

impl CommonArgs {
    fn flags(&self) -> RunConfig {
        RunConfig {
            rh: self.rh,
            rl: self.rl,
            teff: self.teff,
            bandwidth: self.bandwidth,
            case: self.case.clone(),
            b: self.b,
            c: self.c,
            gamma: self.gamma,
            repeats: self.repeats,
            seed: self.seed,
            protocol_faithful: self.protocol_faithful.then_some(true),
            ..Default::default()
        }
    }

    fn resolve(&self, extra: RunConfig) -> Result<RunConfig> {
        if self.svg && self.out.is_none() {
            return Err(LabError::Config("--svg requires --out".into()));
        }
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut merged = file.overlay(&self.flags()).overlay(&extra);
        merged.seed = Some(merged.seed.unwrap_or(kljn_core::experiment::DEFAULT_SEED));
        Ok(merged)
    }
}

#[derive(Debug, Clone, Copy)]
struct DistortionRow {
    case: CaseLabel,
    b: f64,
    c: f64,
    analytic: f64,
    empirical: f64,
}

impl CsvRow for DistortionRow {
    const HEADER: &'static [&'static str] = &["case", "b", "c", "td_analytic", "td_empirical"];

    fn to_record(&self) -> Vec<String> {
        vec![
            self.case.to_string(),
            fmt_num(self.b),
            fmt_num(self.c),
            fmt_num(self.analytic),
            fmt_num(self.empirical),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self> {
        Ok(Self {
            case: parse_field(r, 0, "case")?,
            b: parse_field(r, 1, "b")?,
            c: parse_field(r, 2, "c")?,
            analytic: parse_field(r, 3, "td_analytic")?,
            empirical: parse_field(r, 4, "td_empirical")?,
        })
    }
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    case: String,
    truth: String,
    mean_power: f64,
    expected_power: f64,
    guess: String,
    correct: bool,
}

/// Where a command's primary output goes.
struct Sink<'a> {
    out: Option<&'a Path>,
}

impl Sink<'_> {
    fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| LabError::io(path, e))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush().map_err(|e| LabError::io(path, e))
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
                lock.flush().map_err(|e| LabError::io("<stdout>", e))
            }
        }
    }

    fn csv<R: CsvRow>(&self, rows: &[R]) -> Result<()> {
        self.write_with(|w| write_rows(w, rows))
    }
}

fn svg_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".svg");
    PathBuf::from(name)
}

fn finish(command: &str, common: &CommonArgs, config: RunConfig, svg_doc: Option<String>) -> Result<()> {
    let Some(out) = common.out.as_deref() else {
        return Ok(());
    };
    let mut outputs = vec![out.to_path_buf()];
    if let (true, Some(doc)) = (common.svg, svg_doc) {
        let path = svg_path(out);
        fs::write(&path, doc).map_err(|e| LabError::io(&path, e))?;
        outputs.push(path);
    }
    let seed = config.seed.unwrap_or_default();
    RunManifest::new(command, config, seed, outputs).write(&RunManifest::path_for(out))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Distortion(common) => {
            let cfg = common.resolve(RunConfig::default())?;
            let gamma = cfg.gamma.unwrap_or(DEFAULT_DISTORTION_GAMMA);
            let mut rows = Vec::new();
            for case in cfg.cases(&CaseLabel::ALL)? {
                let exp = cfg.experiment(case)?;
                let reference =
                    NoiseSource::new(exp.t_eff, exp.pair.r_h(), exp.bandwidth, exp.cell_seed())?;
                let trace = generate_trace(&reference, gamma, 0)?;
                rows.push(DistortionRow {
                    case,
                    b: exp.params.b(),
                    c: exp.params.c(),
                    analytic: total_distortion(&exp.params, &reference),
                    empirical: empirical_total_distortion(&exp.params, &trace),
                });
            }
            Sink { out: common.out.as_deref() }.csv(&rows)?;
            finish("distortion", common, cfg, None)
        }
        Command::Table1(common) => {
            let cfg = common.resolve(RunConfig::default())?;
            let gammas = cfg.gammas(&TABLE_GAMMAS);
            let mut rows = Vec::new();
            for case in cfg.cases(&CaseLabel::NONLINEAR)? {
                let base = cfg.experiment(case)?;
                let cells: Vec<_> = gammas.iter().map(|&g| base.with_gamma(g)).collect();
                let reports = runner::run_many(&cells)?;
                rows.extend(reports.iter().map(TableRow::from));
            }
            Sink { out: common.out.as_deref() }.csv(&rows)?;
            finish("table1", common, cfg, None)
        }
        Command::Sweep {
            common,
            teff_min,
            teff_max,
            per_decade,
        } => {
            let cfg = common.resolve(RunConfig {
                teff_min: *teff_min,
                teff_max: *teff_max,
                per_decade: *per_decade,
                ..Default::default()
            })?;
            let grid = log_grid(
                cfg.teff_min.unwrap_or(DEFAULT_TEFF_MIN),
                cfg.teff_max.unwrap_or(DEFAULT_TEFF_MAX),
                cfg.per_decade.unwrap_or(DEFAULT_PER_DECADE),
            )?;
            let gammas = cfg.gammas(&TABLE_GAMMAS);
            let mut rows = Vec::new();
            for case in cfg.cases(&CaseLabel::NONLINEAR)? {
                let base = cfg.experiment(case)?;
                let points = runner::run_sweep(&base, &grid, &gammas)?;
                rows.extend(points.iter().map(SweepRow::from));
            }
            Sink { out: common.out.as_deref() }.csv(&rows)?;
            let chart = common.svg.then(|| svg::sweep_chart(&rows));
            finish("sweep", common, cfg, chart)
        }
        Command::Scatter { common, points } => {
            let cfg = common.resolve(RunConfig {
                points: *points,
                ..Default::default()
            })?;
            let n = cfg.points.unwrap_or(DEFAULT_SCATTER_POINTS);
            let mut rows = Vec::new();
            for case in cfg.cases(&CaseLabel::ALL)? {
                let exp = cfg.experiment(case)?;
                rows.extend(export_scatter(&exp, n)?.into_iter().map(ScatterRow));
            }
            Sink { out: common.out.as_deref() }.csv(&rows)?;
            let chart = common.svg.then(|| svg::scatter_chart(&rows));
            finish("scatter", common, cfg, chart)
        }
        Command::Simulate {
            common,
            situation,
            repeat,
        } => {
            let cfg = common.resolve(RunConfig {
                situation: situation.clone(),
                repeat: *repeat,
                ..Default::default()
            })?;
            let case = cfg.case()?.unwrap_or(CaseLabel::D2);
            let exp = cfg.experiment(case)?;
            let truth = match cfg.situation.as_deref() {
                None | Some("hl") => BitSituation::HL,
                Some("lh") => BitSituation::LH,
                Some(other) => return Err(LabError::Config(format!("unknown situation {other}"))),
            };
            let r = cfg.repeat.unwrap_or(0);
            let streams = ExchangeStreams {
                alice: stream_id(r, 0, StreamRole::AliceNoise),
                bob: stream_id(r, 0, StreamRole::BobNoise),
                tie: stream_id(r, 0, StreamRole::TieBreak),
            };
            let setup = exp.loop_setup();
            let outcome = run_bit_exchange(&setup, truth, &streams)?;
            let report = SimulateOutput {
                case: case.to_string(),
                truth: outcome.truth.to_string(),
                mean_power: outcome.mean_power,
                expected_power: setup.expected_power(truth),
                guess: outcome.guess.to_string(),
                correct: outcome.correct,
            };
            Sink { out: common.out.as_deref() }.write_with(|w| {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                writeln!(w).map_err(|e| LabError::io("<output>", e))
            })?;
            finish("simulate", common, cfg, None)
        }
    }
}
