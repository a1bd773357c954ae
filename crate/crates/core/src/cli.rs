//! Command-line front end: subcommands, figure presets and output files.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{load_config, ConfigError, ExperimentConfig, Sweep, SweepVariable};
use crate::model::CompressionMode;
use crate::plot;
use crate::sdcp::SdcpAnalysis;
use crate::sim::{mc_step, mc_stp, mc_stp_many, product_estimate, DelayBudget, EstimateWithCi};
use crate::stp::{stp_approx, SirThreshold};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fran-sdcp",
    version,
    about = "SDCP analysis and simulation for clustered fog radio access networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration; omitted fields take reference values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for results.csv, meta.json and plot.svg.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps and simulation.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Figure preset applied on top of the configuration.
    #[arg(long, global = true, value_name = "ID")]
    pub figure: Option<FigureId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Approximate STP with its Monte Carlo estimate.
    Stp,
    /// STEP per mode, analytic and simulated.
    Step,
    /// SDCP per mode, analytic and simulated.
    Sdcp,
    /// Analytic SDCP over the sweep.
    Sweep,
    /// Optimal offloading ratio per sweep value.
    Optimize,
    /// Analytic vs simulated SDCP; fails unless every point lies in its CI.
    Validate,
    /// Runs a figure preset and draws plot.svg.
    Figure,
}

impl Command {
    fn as_str(self) -> &'static str {
        match self {
            Self::Stp => "stp",
            Self::Step => "step",
            Self::Sdcp => "sdcp",
            Self::Sweep => "sweep",
            Self::Optimize => "optimize",
            Self::Validate => "validate",
            Self::Figure => "figure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "3")]
    F3,
    #[value(name = "4")]
    F4,
    #[value(name = "5")]
    F5,
    #[value(name = "6")]
    F6,
    #[value(name = "7")]
    F7,
    #[value(name = "8a")]
    F8a,
    #[value(name = "8b")]
    F8b,
}

impl FigureId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::F3 => "3",
            Self::F4 => "4",
            Self::F5 => "5",
            Self::F6 => "6",
            Self::F7 => "7",
            Self::F8a => "8a",
            Self::F8b => "8b",
        }
    }
}

/// Overrides defining one curve family of a preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub tau_db: Option<f64>,
    pub fn_speed: Option<f64>,
    pub backhaul_capacity: Option<f64>,
    pub beta: Option<f64>,
    pub target_latency: Option<f64>,
}

impl Series {
    fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(v) = self.tau_db {
            parts.push(format!("tau_db={v}"));
        }
        if let Some(v) = self.fn_speed {
            parts.push(format!("fn_speed={v:e}"));
        }
        if let Some(v) = self.backhaul_capacity {
            parts.push(format!("c_bh={v:e}"));
        }
        if let Some(v) = self.beta {
            parts.push(format!("beta={v}"));
        }
        if let Some(v) = self.target_latency {
            parts.push(format!("rho={v}"));
        }
        parts.join(";")
    }

    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), ConfigError> {
        if let Some(v) = self.tau_db {
            cfg.tau = SirThreshold::from_db(v).map_err(|e| ConfigError::Validation(e.to_string()))?;
        }
        if let Some(v) = self.fn_speed {
            cfg.hardware.fn_speed = v;
        }
        if let Some(v) = self.backhaul_capacity {
            cfg.hardware.backhaul_capacity = v;
        }
        if let Some(v) = self.beta {
            cfg.modes = vec![CompressionMode::Hybrid(v)];
        }
        if let Some(v) = self.target_latency {
            cfg.task.target_latency = v;
        }
        Ok(())
    }
}

/// Sweep, modes and curve families of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: FigureId,
    pub title: &'static str,
    pub sweep: Sweep,
    pub modes: Vec<CompressionMode>,
    pub backhaul_capacity: Option<f64>,
    pub series: Vec<Series>,
    /// Computation performed by the `figure` subcommand.
    pub native: Command,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn grid2(c_bh: &[f64], fn_speed: &[f64]) -> Vec<Series> {
    c_bh.iter()
        .flat_map(|&c| {
            fn_speed.iter().map(move |&s| Series {
                backhaul_capacity: Some(c),
                fn_speed: Some(s),
                ..Series::default()
            })
        })
        .collect()
}

fn psi_sweep() -> Sweep {
    Sweep {
        variable: SweepVariable::Psi,
        values: linspace(200.0, 400.0, 9),
    }
}

pub fn preset(id: FigureId) -> Preset {
    let all_modes = vec![
        CompressionMode::Local,
        CompressionMode::Edge,
        CompressionMode::Hybrid(0.6),
    ];
    let rho_sweep = Sweep {
        variable: SweepVariable::Rho,
        values: linspace(1e-3, 8e-3, 20),
    };
    let psi_sweep = psi_sweep();
    let speeds = [2.5e9, 5e9];
    match id {
        FigureId::F3 => Preset {
            id,
            title: "SDCP vs target latency, tau = 0 and 3 dB",
            sweep: rho_sweep,
            modes: all_modes,
            backhaul_capacity: None,
            series: [0.0, 3.0]
                .iter()
                .map(|&t| Series {
                    tau_db: Some(t),
                    ..Series::default()
                })
                .collect(),
            native: Command::Sdcp,
        },
        FigureId::F4 => Preset {
            id,
            title: "SDCP vs target latency for two fog-node speeds",
            sweep: rho_sweep,
            modes: all_modes,
            backhaul_capacity: None,
            series: speeds
                .iter()
                .map(|&s| Series {
                    fn_speed: Some(s),
                    ..Series::default()
                })
                .collect(),
            native: Command::Sdcp,
        },
        FigureId::F5 => Preset {
            id,
            title: "Hybrid SDCP vs fog-node / UE speed ratio",
            sweep: Sweep {
                variable: SweepVariable::FnSpeed,
                values: linspace(1e9, 1e10, 10),
            },
            modes: vec![CompressionMode::Hybrid(0.6)],
            backhaul_capacity: None,
            series: [4e-3, 5e-3]
                .iter()
                .flat_map(|&rho| {
                    [0.4, 0.6, 0.8].into_iter().map(move |b| Series {
                        beta: Some(b),
                        target_latency: Some(rho),
                        ..Series::default()
                    })
                })
                .collect(),
            native: Command::Sweep,
        },
        FigureId::F6 => Preset {
            id,
            title: "Hybrid SDCP vs offloading ratio",
            sweep: Sweep {
                variable: SweepVariable::Beta,
                values: linspace(0.0, 1.0, 41),
            },
            modes: vec![CompressionMode::Hybrid(0.6)],
            backhaul_capacity: None,
            series: grid2(&[10e6, 20e6], &speeds),
            native: Command::Sweep,
        },
        FigureId::F7 => Preset {
            id,
            title: "Optimal offloading ratio vs task generation rate",
            sweep: psi_sweep,
            modes: vec![CompressionMode::Hybrid(0.6)],
            backhaul_capacity: None,
            series: grid2(&[10e6, 20e6], &speeds),
            native: Command::Optimize,
        },
        FigureId::F8a | FigureId::F8b => Preset {
            id,
            title: if id == FigureId::F8a {
                "SDCP vs task generation rate, 10 Mbit/s backhaul"
            } else {
                "SDCP vs task generation rate, 20 Mbit/s backhaul"
            },
            sweep: psi_sweep,
            modes: vec![CompressionMode::Local, CompressionMode::Edge],
            backhaul_capacity: Some(if id == FigureId::F8a { 10e6 } else { 20e6 }),
            series: speeds
                .iter()
                .map(|&s| Series {
                    fn_speed: Some(s),
                    ..Series::default()
                })
                .collect(),
            native: Command::Optimize,
        },
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_var: &'static str,
    pub value: f64,
    pub mode: String,
    pub analytic: f64,
    pub mc: Option<EstimateWithCi>,
    pub component: String,
}

impl Row {
    /// Analytic value inside the simulated 99% interval; true without MC.
    pub fn agrees(&self) -> bool {
        self.mc.is_none_or(|m| m.contains(self.analytic))
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(crate::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => e.fmt(f),
            Self::Numerical(e) => write!(f, "numerical error: {e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        Self::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(_) | Self::Io(_) => EXIT_NUMERICAL,
        }
    }
}

fn with_value(base: &ExperimentConfig, var: SweepVariable, v: f64) -> Result<ExperimentConfig, CliError> {
    let mut c = base.clone();
    match var {
        SweepVariable::Rho => c.task.target_latency = v,
        SweepVariable::Beta => {
            for m in &mut c.modes {
                if let CompressionMode::Hybrid(_) = m {
                    *m = CompressionMode::Hybrid(v);
                }
            }
        }
        SweepVariable::Psi => c.task.gen_rate = v,
        SweepVariable::CBh => c.hardware.backhaul_capacity = v,
        SweepVariable::Tau => c.tau = SirThreshold::from_db(v)?,
        SweepVariable::FnSpeed => c.hardware.fn_speed = v,
    }
    c.task.validate()?;
    c.hardware.validate()?;
    Ok(c)
}

fn component(base: &str, label: &str) -> String {
    if label.is_empty() {
        base.to_string()
    } else {
        format!("{base}[{label}]")
    }
}

fn mode_name(mode: CompressionMode, var: SweepVariable) -> String {
    match mode {
        CompressionMode::Hybrid(_) if var == SweepVariable::Beta => "hybrid".into(),
        m => m.to_string(),
    }
}

fn analysis_for(cfg: &ExperimentConfig) -> Result<SdcpAnalysis, CliError> {
    Ok(SdcpAnalysis::new(cfg.network, cfg.tau, cfg.analysis_options())?)
}

fn rows_stp(cfg: &ExperimentConfig, label: &str) -> Result<Vec<Row>, CliError> {
    let var = cfg.sweep.variable;
    let configs = cfg
        .sweep
        .values
        .iter()
        .map(|&v| with_value(cfg, var, v))
        .collect::<Result<Vec<_>, _>>()?;
    let mc_cfg = cfg.mc_config();
    let estimates = if var == SweepVariable::Tau {
        let taus: Vec<SirThreshold> = configs.iter().map(|c| c.tau).collect();
        mc_stp_many(&cfg.network, &taus, &mc_cfg)?
    } else {
        vec![mc_stp(&cfg.network, cfg.tau, &mc_cfg)?; configs.len()]
    };
    configs
        .iter()
        .zip(&cfg.sweep.values)
        .zip(estimates)
        .map(|((c, &v), e)| {
            Ok(Row {
                sweep_var: var.as_str(),
                value: v,
                mode: "any".into(),
                analytic: stp_approx(c.tau, &c.network)?,
                mc: Some(e),
                component: component("stp", label),
            })
        })
        .collect()
}

/// Analytic STEP or SDCP per (mode, value), optionally with simulation.
fn rows_mode_sweep(cfg: &ExperimentConfig, label: &str, sdcp: bool, with_mc: bool) -> Result<Vec<Row>, CliError> {
    let var = cfg.sweep.variable;
    let values = &cfg.sweep.values;
    let configs = values
        .iter()
        .map(|&v| with_value(cfg, var, v))
        .collect::<Result<Vec<_>, _>>()?;
    // Network and threshold only change along a tau sweep.
    let shared = if var == SweepVariable::Tau {
        None
    } else {
        Some(analysis_for(cfg)?)
    };
    let analyses = configs
        .iter()
        .map(|c| match shared {
            Some(a) => Ok(a),
            None => analysis_for(c),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mc_cfg = cfg.mc_config();
    let stp_estimates = if with_mc && sdcp {
        Some(if var == SweepVariable::Tau {
            let taus: Vec<SirThreshold> = configs.iter().map(|c| c.tau).collect();
            mc_stp_many(&cfg.network, &taus, &mc_cfg)?
        } else {
            vec![mc_stp(&cfg.network, cfg.tau, &mc_cfg)?; configs.len()]
        })
    } else {
        None
    };

    let n_modes = cfg.modes.len();
    let mut rows = Vec::with_capacity(n_modes * values.len());
    for mi in 0..n_modes {
        let analytic = configs
            .par_iter()
            .zip(&analyses)
            .map(|(c, a)| {
                let b = a.evaluate(c.modes[mi], &c.task, &c.hardware)?;
                Ok(if sdcp { b.sdcp } else { b.step })
            })
            .collect::<crate::Result<Vec<f64>>>()?;

        let mc: Vec<Option<EstimateWithCi>> = if !with_mc {
            vec![None; values.len()]
        } else {
            let step_est = if var == SweepVariable::Rho {
                let c = &configs[0];
                let a = &analyses[0];
                let mode = c.modes[mi];
                let rates = a.service_rates(&c.task, &c.hardware)?;
                let delays = DelayBudget::new(mode, &c.task, &c.hardware, a.uplink_rate(), cfg.flags.uplink_numerator);
                mc_step(mode, &rates, &delays, values, &mc_cfg)?
            } else {
                configs
                    .iter()
                    .zip(&analyses)
                    .map(|(c, a)| {
                        let mode = c.modes[mi];
                        let rates = a.service_rates(&c.task, &c.hardware)?;
                        let delays =
                            DelayBudget::new(mode, &c.task, &c.hardware, a.uplink_rate(), cfg.flags.uplink_numerator);
                        Ok(mc_step(mode, &rates, &delays, &[c.task.target_latency], &mc_cfg)?[0])
                    })
                    .collect::<Result<Vec<_>, CliError>>()?
            };
            match &stp_estimates {
                Some(stp) => stp
                    .iter()
                    .zip(&step_est)
                    .map(|(s, t)| Some(product_estimate(s, t)))
                    .collect(),
                None => step_est.into_iter().map(Some).collect(),
            }
        };

        for (i, &v) in values.iter().enumerate() {
            rows.push(Row {
                sweep_var: var.as_str(),
                value: v,
                mode: mode_name(configs[i].modes[mi], var),
                analytic: analytic[i],
                mc: mc[i],
                component: component(if sdcp { "sdcp" } else { "step" }, label),
            });
        }
    }
    Ok(rows)
}

fn rows_optimize(cfg: &ExperimentConfig, label: &str, compare: &[CompressionMode]) -> Result<Vec<Row>, CliError> {
    let var = cfg.sweep.variable;
    let configs = cfg
        .sweep
        .values
        .iter()
        .map(|&v| with_value(cfg, var, v))
        .collect::<Result<Vec<_>, _>>()?;
    let shared = if var == SweepVariable::Tau {
        None
    } else {
        Some(analysis_for(cfg)?)
    };
    let per_value = configs
        .par_iter()
        .zip(&cfg.sweep.values)
        .map(|(c, &v)| -> Result<Vec<Row>, CliError> {
            let a = match shared {
                Some(a) => a,
                None => analysis_for(c)?,
            };
            let best = a.optimize_beta(&c.task, &c.hardware, &c.beta_search)?;
            let mut out = vec![Row {
                sweep_var: var.as_str(),
                value: v,
                mode: "hybrid_opt".into(),
                analytic: best.beta,
                mc: None,
                component: component("beta_star", label),
            }];
            for &m in compare {
                out.push(Row {
                    sweep_var: var.as_str(),
                    value: v,
                    mode: m.to_string(),
                    analytic: a.sdcp(m, &c.task, &c.hardware)?,
                    mc: None,
                    component: component("sdcp", label),
                });
            }
            out.push(Row {
                sweep_var: var.as_str(),
                value: v,
                mode: "hybrid_opt".into(),
                analytic: best.sdcp,
                mc: None,
                component: component("sdcp", label),
            });
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    // Group by component and mode so each curve is contiguous.
    let mut rows: Vec<Row> = per_value.into_iter().flatten().collect();
    let order = |r: &Row| (r.component.starts_with("sdcp"), r.mode.clone());
    rows.sort_by_key(order);
    Ok(rows)
}

/// Rows for one subcommand on one (already series-adjusted) configuration.
pub fn compute(command: Command, cfg: &ExperimentConfig, label: &str) -> Result<Vec<Row>, CliError> {
    match command {
        Command::Stp => rows_stp(cfg, label),
        Command::Step => rows_mode_sweep(cfg, label, false, true),
        Command::Sdcp | Command::Validate => rows_mode_sweep(cfg, label, true, true),
        Command::Sweep => rows_mode_sweep(cfg, label, true, false),
        Command::Optimize => rows_optimize(cfg, label, &[CompressionMode::Local, CompressionMode::Edge]),
        Command::Figure => unreachable!("figure resolves to its preset's computation"),
    }
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, rows: &[Row]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "sweep_var,value,mode,analytic,mc_point,mc_ci99,component")?;
    for r in rows {
        let (p, h) = match r.mc {
            Some(m) => (sig17(m.point), sig17(m.half_width_99)),
            None => (String::new(), String::new()),
        };
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.sweep_var,
            sig17(r.value),
            r.mode,
            sig17(r.analytic),
            p,
            h,
            r.component
        )?;
    }
    f.flush()
}

fn write_plot(path: &Path, title: &str, var: SweepVariable, rows: &[Row]) -> std::io::Result<()> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<&Row>> = HashMap::new();
    for r in rows {
        let key = (r.component.clone(), r.mode.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let series: Vec<plot::Series> = order
        .iter()
        .map(|key| plot::Series {
            label: format!("{} {}", key.1, key.0),
            points: groups[key]
                .iter()
                .map(|r| plot::Point {
                    x: r.value,
                    y: r.analytic,
                    marker: r.mc.map(|m| (m.point, m.half_width_99)),
                })
                .collect(),
        })
        .collect();
    let x_label = format!("{} ({})", var.as_str(), var.unit());
    let svg = plot::render(title, &x_label, "probability / offloading ratio", (0.0, 1.0), &series);
    fs::write(path, svg)
}

/// Runs one invocation end to end; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::Validation("--threads must be at least 1".into()).into());
        }
        // A pool already built by an earlier call in this process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut base = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        base.mc.seed = seed;
    }

    let preset = cli.figure.map(preset);
    let command = match (cli.command, &preset) {
        (Command::Figure, Some(p)) => p.native,
        (Command::Figure, None) => {
            return Err(ConfigError::Validation("the figure subcommand needs --figure".into()).into());
        }
        (c, _) => c,
    };
    let series: Vec<Series> = match &preset {
        Some(p) => {
            base.sweep = p.sweep.clone();
            // Optimising over beta leaves no beta axis; use the rate axis.
            if command == Command::Optimize && base.sweep.variable == SweepVariable::Beta {
                base.sweep = psi_sweep();
            }
            base.modes = p.modes.clone();
            if let Some(c) = p.backhaul_capacity {
                base.hardware.backhaul_capacity = c;
            }
            p.series.clone()
        }
        None => vec![Series::default()],
    };

    if command == Command::Optimize && base.sweep.variable == SweepVariable::Beta {
        return Err(ConfigError::Validation("optimize cannot sweep beta".into()).into());
    }

    let mut rows = Vec::new();
    for s in &series {
        let mut cfg = base.clone();
        s.apply(&mut cfg)?;
        cfg.hardware
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        rows.extend(compute(command, &cfg, &s.label())?);
    }

    fs::create_dir_all(&cli.out)?;
    write_csv(&cli.out.join("results.csv"), &rows)?;

    let failures: Vec<&Row> = rows.iter().filter(|r| !r.agrees()).collect();
    let validating = cli.command == Command::Validate;
    let meta = json!({
        "tool": "fran-sdcp",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.as_str(),
        "computation": command.as_str(),
        "figure": cli.figure.map(FigureId::as_str),
        "seed": base.mc.seed,
        "threads": cli.threads,
        "flags": {
            "cycle_convention": base.flags.cycle_convention.as_str(),
            "formula_mode": base.flags.formula_mode.as_str(),
            "coupling_mode": base.flags.coupling_mode.as_str(),
            "uplink_numerator": base.flags.uplink_numerator.as_str(),
            "thinned_arrivals": base.flags.thinned_arrivals,
        },
        "mc": base.mc_config(),
        "series": series.iter().map(Series::label).collect::<Vec<_>>(),
        "config": &base,
        "rows": rows.len(),
        "validation": if validating {
            json!({"passed": failures.is_empty(), "failures": failures.len()})
        } else {
            serde_json::Value::Null
        },
    });
    fs::write(
        cli.out.join("meta.json"),
        serde_json::to_string_pretty(&meta).expect("meta is serialisable") + "\n",
    )?;

    if cli.command == Command::Figure {
        let p = preset.as_ref().expect("checked above");
        write_plot(&cli.out.join("plot.svg"), p.title, base.sweep.variable, &rows)?;
    }

    if validating {
        for r in &failures {
            let m = r.mc.expect("only simulated rows can fail");
            eprintln!(
                "disagreement: {}={} {} {}: analytic {} vs simulated {} +- {}",
                r.sweep_var, r.value, r.mode, r.component, r.analytic, m.point, m.half_width_99
            );
        }
        eprintln!(
            "validation: {} of {} rows agree",
            rows.len() - failures.len(),
            rows.len()
        );
        if !failures.is_empty() {
            return Ok(EXIT_VALIDATION);
        }
    }
    Ok(EXIT_OK)
}
