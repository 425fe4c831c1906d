//! `raster`: command-line front end for the raster-core library.
//!
//! Exit status: 0 success, 2 a constraint check failed, 1 usage or input error.

// `!(x > 0.0)` is the NaN-rejecting form of a range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use raster_core::budget::{BudgetReport, EfficiencyChain, DEFAULT_POWER_PER_TRAP_W};
use raster_core::compiler::{self, CompileOptions, ShuttleConstraints};
use raster_core::formats;
use raster_core::model::{self, Deflector, ModelReport};
use raster_core::oracle::{self, Grid, DEFAULT_ALPHA_SWEEP};
use raster_core::render::{self, RenderOptions};
use raster_core::shuttle::{self, AtomConfig, BenchConfig, Bounds, DeviceCapability, DeviceModel, PlanOptions};
use raster_core::DeviceSpec;

#[derive(Parser, Debug)]
#[command(name = "raster", version, about = "2D AOD/VIPA raster simulator and schedule compiler")]
struct Cli {
    /// Device JSON; the bundled Brimrose TED-150 configuration when omitted.
    #[arg(long, global = true)]
    device: Option<PathBuf>,
    /// Output file; stdout when omitted (required for `render`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print closed-form device figures.
    Model {
        #[arg(long, default_value_t = 1.0)]
        t_scan_us: f64,
        /// Chirp rate for the acoustic lens, Hz/s; defaults to the usable band over t_scan.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// CSV of dynamic resolution versus scan time, closed form and oracle.
    Resolve {
        /// Comma-separated scan times, µs.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 1.0, 3.0, 10.0])]
        t_scan_us: Vec<f64>,
        /// Access time for the closed-form columns only, ns.
        #[arg(long)]
        access_time_ns: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        /// Skip the oracle columns.
        #[arg(long)]
        no_oracle: bool,
    },
    /// CSV of oracle spot widths against the chirp-spread formula.
    Oracle {
        /// Comma-separated chirp rates, Hz/s.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compile a pattern into a drive schedule (JSON).
    Compile {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        t_scan_us: f64,
        /// Dead time between sweeps, ns; one single-AOD access time by default.
        #[arg(long)]
        retrace_ns: Option<f64>,
    },
    /// Check a schedule against the device limits; exit 2 if any fails.
    Validate {
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
    },
    /// Plan parallel atom transport between two configurations.
    Plan {
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// crossed_aod, aod_vipa or daod_vipa.
        #[arg(long, default_value = "daod_vipa")]
        model: String,
        /// Warn when two atoms come closer than this, µm.
        #[arg(long)]
        proximity_warning_um: Option<f64>,
        #[command(flatten)]
        constraints: ConstraintArgs,
    },
    /// CSV of crossed-AOD over DAOD-VIPA transport time on random instances.
    PlanBench {
        /// Comma-separated atom counts.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Side of the square region atoms are drawn from, µm.
        #[arg(long, default_value_t = 20.0)]
        box_um: f64,
        #[command(flatten)]
        constraints: ConstraintArgs,
    },
    /// Per-stage and cumulative transmission of an efficiency chain.
    Budget {
        #[arg(long)]
        chain: PathBuf,
        /// Power entering the chain, W; overrides the chain file.
        #[arg(long)]
        input_power_w: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_POWER_PER_TRAP_W * 1e3)]
        power_per_trap_mw: f64,
    },
    /// Expected focal-plane image of a pattern (16-bit PGM).
    Render {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, default_value_t = render::DEFAULT_SPOT_WX * 1e6)]
        spot_wx_um: f64,
        #[arg(long, default_value_t = render::DEFAULT_SPOT_WY * 1e6)]
        spot_wy_um: f64,
        #[arg(long, default_value_t = 30.0)]
        pitch_x_um: f64,
        #[arg(long, default_value_t = 30.0)]
        pitch_y_um: f64,
        #[arg(long, default_value_t = 2.0)]
        pixel_um: f64,
        /// Add the edge-row resolution note to the image header.
        #[arg(long)]
        annotate_edge_rows: bool,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    /// Aperture samples (power of two).
    #[arg(long, default_value_t = 8192)]
    samples: usize,
}

#[derive(Args, Debug, Clone, Copy)]
struct ConstraintArgs {
    #[arg(long, default_value_t = ShuttleConstraints::DEFAULT_F_TRAP)]
    f_trap_hz: f64,
    #[arg(long, default_value_t = ShuttleConstraints::DEFAULT_HEATING_MARGIN)]
    heating_margin: f64,
    #[arg(long, default_value_t = ShuttleConstraints::DEFAULT_STEP_MAX * 1e9)]
    step_nm: f64,
    /// Fast-axis switching time, ns; the VIPA's 1/FWHM by default.
    #[arg(long)]
    t_fast_ns: Option<f64>,
}

impl ConstraintArgs {
    fn build(&self, device: &DeviceSpec) -> Result<ShuttleConstraints> {
        let mut c = ShuttleConstraints::for_device(device);
        c.f_trap = self.f_trap_hz;
        c.heating_margin = self.heating_margin;
        c.step_max = self.step_nm * 1e-9;
        if let Some(t) = self.t_fast_ns {
            c.t_fast = t * 1e-9;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_device(path: Option<&Path>) -> Result<DeviceSpec> {
    match path {
        Some(p) => Ok(DeviceSpec::load(p)?),
        None => Ok(DeviceSpec::brimrose_ted150()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `out` through a temporary file in the same directory, or to stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let device = load_device(cli.device.as_deref())?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Model { t_scan_us, alpha } => {
            if !(t_scan_us > 0.0) {
                bail!("--t-scan-us must be > 0");
            }
            let report = ModelReport::new(&device, t_scan_us * 1e-6, alpha);
            match out {
                Some(_) => {
                    let mut json = serde_json::to_string_pretty(&report)?;
                    json.push('\n');
                    emit(out, json.as_bytes())?;
                    println!("{report}");
                }
                None => println!("{report}"),
            }
        }
        Command::Resolve {
            t_scan_us,
            access_time_ns,
            grid,
            no_oracle,
        } => {
            if t_scan_us.is_empty() || t_scan_us.iter().any(|&t| !(t > 0.0)) {
                bail!("--t-scan-us needs positive scan times");
            }
            let aod = device.aod();
            let t_a = match access_time_ns {
                Some(ns) if ns > 0.0 => ns * 1e-9,
                Some(ns) => bail!("--access-time-ns must be > 0, got {ns}"),
                None => model::access_time(&device.beam, aod, Deflector::Aod),
            };
            let n = model::static_resolution(t_a, aod.usable_bandwidth, Deflector::Aod);
            let grid = Grid::for_beam(&device.beam).with_samples(grid.samples);
            let alphas: Vec<f64> = t_scan_us.iter().map(|t| aod.usable_bandwidth / (t * 1e-6)).collect();
            let oracle_rows = if no_oracle {
                None
            } else {
                Some(oracle::sweep(&device, &alphas, &grid)?)
            };
            let rows = t_scan_us.iter().enumerate().map(|(i, &t)| {
                let t_scan = t * 1e-6;
                let mut row = vec![
                    fmt_f64(t_scan),
                    fmt_f64(model::dynamic_resolution_aod(n, t_a, t_scan)),
                    fmt_f64(model::dynamic_resolution_daod(n, t_a, t_scan)),
                ];
                if let Some(o) = &oracle_rows {
                    row.push(fmt_f64(o[2 * i].n_dyn_oracle));
                    row.push(fmt_f64(o[2 * i + 1].n_dyn_oracle));
                }
                row
            });
            let mut header = vec!["t_scan_s", "n_dyn_aod_closed_form", "n_dyn_daod_closed_form"];
            if oracle_rows.is_some() {
                header.extend(["n_dyn_aod_oracle", "n_dyn_daod_oracle"]);
            }
            emit(out, formats::csv(&header, rows).as_bytes())?;
        }
        Command::Oracle { alpha, grid } => {
            let alphas = if alpha.is_empty() { DEFAULT_ALPHA_SWEEP.to_vec() } else { alpha };
            let grid = Grid::for_beam(&device.beam).with_samples(grid.samples);
            let rows = oracle::sweep(&device, &alphas, &grid)?;
            for r in rows.iter().filter(|r| r.multi_lobe) {
                log::warn!("alpha {} {}: far field has several lobes", r.alpha_hz_per_s, r.device.label());
            }
            let csv = formats::csv(
                &[
                    "alpha_hz_per_s",
                    "t_scan_s",
                    "width_oracle_rad",
                    "width_eq_s1_rad",
                    "n_dyn_oracle",
                    "n_dyn_closed_form",
                    "device",
                ],
                rows.iter().map(|r| {
                    vec![
                        fmt_f64(r.alpha_hz_per_s),
                        fmt_f64(r.t_scan_s),
                        fmt_f64(r.width_oracle_rad),
                        fmt_f64(r.width_eq_s1_rad),
                        fmt_f64(r.n_dyn_oracle),
                        fmt_f64(r.n_dyn_closed_form),
                        r.device.label().to_string(),
                    ]
                }),
            );
            emit(out, csv.as_bytes())?;
        }
        Command::Compile {
            pattern,
            t_scan_us,
            retrace_ns,
        } => {
            let p = formats::parse_pattern(&pattern.display().to_string(), &read(&pattern)?)?;
            let options = CompileOptions {
                retrace: retrace_ns.map(|ns| ns * 1e-9),
            };
            let schedule = compiler::compile(&p, &device, t_scan_us * 1e-6, options)?;
            emit(out, formats::schedule_to_json(&schedule).as_bytes())?;
            let timing = compiler::timing_report(&schedule);
            eprintln!(
                "compiled {}x{}: refresh {:.4} MHz, duty {:.3}, dwell {:.2} ns",
                p.n_cols(),
                p.n_rows(),
                timing.refresh_rate_hz * 1e-6,
                timing.duty,
                timing.column_dwell_s * 1e9
            );
        }
        Command::Validate { schedule, constraints } => {
            let s = formats::parse_schedule_json(&schedule.display().to_string(), &read(&schedule)?)?;
            let report = compiler::validate(&s, &device, &constraints.build(&device)?);
            println!("{report}");
            if out.is_some() {
                let mut json = serde_json::to_string_pretty(&report)?;
                json.push('\n');
                emit(out, json.as_bytes())?;
            }
            if !report.all_pass() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Plan {
            initial,
            target,
            model,
            proximity_warning_um,
            constraints,
        } => {
            let model: DeviceModel = model.parse()?;
            let a = AtomConfig::from_json_str(&initial.display().to_string(), &read(&initial)?)?;
            let b = AtomConfig::from_json_str(&target.display().to_string(), &read(&target)?)?;
            let cap = DeviceCapability::from_device(&device, model);
            let schedule = shuttle::plan_moves(
                &a,
                &b,
                &cap,
                &constraints.build(&device)?,
                PlanOptions { proximity_warning_um },
            )?;
            for w in &schedule.warnings {
                log::warn!("{w}");
            }
            let mut json = serde_json::to_string_pretty(&schedule)?;
            json.push('\n');
            emit(out, json.as_bytes())?;
            eprintln!("{}", schedule.summary());
        }
        Command::PlanBench {
            n,
            trials,
            box_um,
            constraints,
        } => {
            if n.is_empty() || n.contains(&0) || trials == 0 {
                bail!("--n needs positive atom counts and --trials must be > 0");
            }
            if !(box_um > 0.0) {
                bail!("--box-um must be > 0");
            }
            let config = BenchConfig {
                atom_counts: n,
                trials,
                seed: cli.seed,
                bounds: Bounds::square(box_um),
            };
            let rows = shuttle::plan_bench(&device, &constraints.build(&device)?, &config)?;
            let csv = formats::csv(
                &[
                    "n_atoms",
                    "trials",
                    "mean_speedup",
                    "std_speedup",
                    "min_speedup",
                    "max_speedup",
                    "mean_crossed_aod_time_s",
                    "mean_daod_vipa_time_s",
                ],
                rows.iter().map(|r| {
                    vec![
                        r.n_atoms.to_string(),
                        r.trials.to_string(),
                        fmt_f64(r.mean_speedup),
                        fmt_f64(r.std_speedup),
                        fmt_f64(r.min_speedup),
                        fmt_f64(r.max_speedup),
                        fmt_f64(r.mean_crossed_time_s),
                        fmt_f64(r.mean_daod_time_s),
                    ]
                }),
            );
            emit(out, csv.as_bytes())?;
            if rows.len() >= 2 {
                eprintln!("log-log speedup exponent: {:.3}", shuttle::speedup_exponent(&rows));
            }
        }
        Command::Budget {
            chain,
            input_power_w,
            power_per_trap_mw,
        } => {
            let mut c = EfficiencyChain::load(&chain)?;
            if let Some(p) = input_power_w {
                c = c.with_input_power(p, "user supplied");
                c.validate()?;
            }
            let report = BudgetReport::new(&c, power_per_trap_mw * 1e-3)?;
            print!("{report}");
            if out.is_some() {
                let mut json = serde_json::to_string_pretty(&report)?;
                json.push('\n');
                emit(out, json.as_bytes())?;
            }
        }
        Command::Render {
            pattern,
            spot_wx_um,
            spot_wy_um,
            pitch_x_um,
            pitch_y_um,
            pixel_um,
            annotate_edge_rows,
        } => {
            let Some(out) = out else {
                bail!("render writes a binary image; pass --out <file.pgm>");
            };
            let p = formats::parse_pattern(&pattern.display().to_string(), &read(&pattern)?)?;
            let options = RenderOptions {
                spot_wx: spot_wx_um * 1e-6,
                spot_wy: spot_wy_um * 1e-6,
                pitch_x: pitch_x_um * 1e-6,
                pitch_y: pitch_y_um * 1e-6,
                pixel: pixel_um * 1e-6,
                annotate_edge_rows,
            };
            let image = render::render(&p, &device, &options)?;
            emit(Some(out), &image.to_pgm())?;
            eprintln!("rendered {}x{} px", image.width, image.height);
        }
    }
    Ok(ExitCode::SUCCESS)
}
