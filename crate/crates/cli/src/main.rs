//! Command-line front end for the swarm surveillance simulator.
//!
//! Four subcommands cover the workflows the library supports:
//!
//! * `run` — one simulation, written out as per-metric CSV files;
//! * `sweep` — a transmission-radius sweep aggregated into `sweep.csv`;
//! * `compare` — matched-seed decentralized vs centralized pairs with a
//!   per-pair table, a ratio summary, and a cell-visit difference histogram;
//! * `gen-maps` — materializes the built-in floor plans as map files.
//!
//! Every file is written atomically (temp file + rename), so readers never
//! observe a half-written CSV. The output directory defaults to the
//! `PHEROCOM_OUT` environment variable, then `./out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pherocom_core::config::{Mode, SimConfig};
use pherocom_core::engine::{self, RunResult, SweepPoint};
use pherocom_core::maps;
use pherocom_core::metrics::{self, DiffHistogram};

#[derive(Parser)]
#[command(
    name = "pherocom",
    version,
    about = "Multi-robot surveillance simulator coordinated by virtual pheromone maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every config-driven subcommand.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Path to a key=value config file.
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's base seed (applied after any --override).
    #[arg(long)]
    seed: Option<u64>,
    /// Override one config key, e.g. --override beta=0.001 (repeatable,
    /// applied in order).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (default: $PHEROCOM_OUT, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write taskpoints/comm/cellsteps/heatmap CSVs.
    Run {
        #[command(flatten)]
        common: ConfigArgs,
        /// Also write comm_log.csv with one row per broadcast.
        #[arg(long)]
        comm_log: bool,
    },
    /// Run a transmission-radius sweep and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: ConfigArgs,
        /// Radius grid: an inclusive integer range "0..20" or one value "13".
        #[arg(long)]
        rt: String,
        /// Replicas per radius, seeded cfg.seed, cfg.seed+1, ...
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Run replicas on a thread pool (bit-identical to sequential).
        #[arg(long)]
        parallel: bool,
    },
    /// Run matched-seed decentralized vs centralized pairs; write
    /// compare.csv, compare_summary.csv and diff_histogram.csv.
    Compare {
        #[command(flatten)]
        common: ConfigArgs,
        /// Matched pairs, seeded cfg.seed, cfg.seed+1, ...
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Write the built-in floor plans as .map files.
    GenMaps {
        /// Output directory (default: $PHEROCOM_OUT, else ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { common, comm_log } => cmd_run(common, comm_log),
        Command::Sweep {
            common,
            rt,
            seeds,
            parallel,
        } => cmd_sweep(common, &rt, seeds, parallel),
        Command::Compare { common, seeds } => cmd_compare(common, seeds),
        Command::GenMaps { out } => cmd_gen_maps(out),
    }
}

/// Reads the config file, then applies overrides in order, then --seed.
fn load_config(args: &ConfigArgs) -> Result<SimConfig> {
    let mut cfg = SimConfig::from_file(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    for spec in &args.overrides {
        cfg.apply_override(spec)
            .with_context(|| format!("applying --override {spec}"))?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("PHEROCOM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes `dir/name` so it is either fully present or absent: the content
/// lands in a dot-prefixed temp file first and is renamed into place.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let path = dir.join(name);
    std::fs::write(&tmp, contents)
        .with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, &path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn cmd_run(common: ConfigArgs, comm_log: bool) -> Result<()> {
    let mut cfg = load_config(&common)?;
    if comm_log {
        cfg.comm_log = true;
    }
    let result = engine::run(&cfg)?;
    let dir = out_dir(common.out);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))?;
    write_run_outputs(&dir, &result)?;
    println!(
        "taskpoints={} transmissions={} heard={} bytes={} out={}",
        result.taskpoints,
        result.comm.transmissions,
        result.comm.transmissions_heard,
        result.comm.total_bytes(),
        dir.display()
    );
    Ok(())
}

fn write_run_outputs(dir: &Path, result: &RunResult) -> Result<()> {
    write_atomic(
        dir,
        "taskpoints.csv",
        &metrics::taskpoints_csv(&result.taskpoint_events),
    )?;
    write_atomic(dir, "comm.csv", &metrics::comm_csv(&result.comm))?;
    write_atomic(dir, "cellsteps.csv", &result.cellsteps.to_csv())?;
    for snap in &result.heatmaps {
        let owner = match snap.robot {
            Some(id) => id.to_string(),
            None => String::from("shared"),
        };
        let name = format!("heatmap_{owner}_{}.csv", snap.step);
        write_atomic(dir, &name, &snap.map.to_csv())?;
    }
    if let Some(events) = &result.comm_log {
        write_atomic(dir, "comm_log.csv", &engine::comm_log_csv(events))?;
    }
    Ok(())
}

/// "a..b" is the inclusive integer grid a, a+1, ..., b; a bare number is a
/// single (possibly fractional) radius.
fn parse_radius_grid(spec: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u32 = lo
            .trim()
            .parse()
            .with_context(|| format!("bad radius range start in {spec:?}"))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .with_context(|| format!("bad radius range end in {spec:?}"))?;
        if hi < lo {
            bail!("radius range {spec:?} is empty");
        }
        Ok((lo..=hi).map(f64::from).collect())
    } else {
        let r: f64 = spec
            .trim()
            .parse()
            .with_context(|| format!("bad radius {spec:?}"))?;
        if !r.is_finite() || r < 0.0 {
            bail!("radius must be finite and non-negative, got {spec:?}");
        }
        Ok(vec![r])
    }
}

fn cmd_sweep(common: ConfigArgs, rt: &str, seeds: u64, parallel: bool) -> Result<()> {
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let cfg = load_config(&common)?;
    let env = engine::load_environment(&cfg.environment)?;
    let radii = parse_radius_grid(rt)?;
    let seed_list: Vec<u64> = (0..seeds).map(|i| cfg.seed + i).collect();
    let points = engine::batch(&cfg, &env, &radii, &seed_list, parallel)?;
    let dir = out_dir(common.out);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))?;
    write_atomic(&dir, "sweep.csv", &sweep_csv(&points, seed_list.len()))?;
    println!(
        "swept {} radii x {} seeds, out={}",
        radii.len(),
        seed_list.len(),
        dir.display()
    );
    Ok(())
}

/// Aggregates per-replica sweep points (already grouped by radius) into one
/// row per radius: mean/sd of task-points, mean transmission attempts, mean
/// total bytes moved.
fn sweep_csv(points: &[SweepPoint], per_radius: usize) -> String {
    let mut out = String::from("r_t,mean_tp,sd_tp,mean_tx,mean_bytes\n");
    for chunk in points.chunks(per_radius) {
        let n = chunk.len() as f64;
        let mean_tp = chunk.iter().map(|p| p.taskpoints as f64).sum::<f64>() / n;
        let sd_tp = if chunk.len() > 1 {
            (chunk
                .iter()
                .map(|p| (p.taskpoints as f64 - mean_tp).powi(2))
                .sum::<f64>()
                / (n - 1.0))
                .sqrt()
        } else {
            0.0
        };
        let mean_tx = chunk.iter().map(|p| p.transmissions as f64).sum::<f64>() / n;
        let mean_bytes = chunk.iter().map(|p| p.total_bytes as f64).sum::<f64>() / n;
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            chunk[0].r_t, mean_tp, sd_tp, mean_tx, mean_bytes
        ));
    }
    out
}

fn cmd_compare(common: ConfigArgs, seeds: u64) -> Result<()> {
    if seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    let base = load_config(&common)?;
    let env = engine::load_environment(&base.environment)?;
    let bins = metrics::default_bins();

    let mut rows = String::from(
        "seed,dec_tp,cen_tp,dec_tx,dec_tx_heard,cen_tx,\
         dec_bytes_disseminated,cen_bytes_disseminated\n",
    );
    let mut pooled: Option<DiffHistogram> = None;
    let (mut dec_tp, mut cen_tp) = (0u64, 0u64);
    let (mut dec_tx, mut dec_heard, mut cen_tx) = (0u64, 0u64, 0u64);
    let (mut dec_bytes, mut cen_bytes) = (0u64, 0u64);

    for i in 0..seeds {
        let seed = base.seed + i;
        let mut dec_cfg = base.clone();
        dec_cfg.seed = seed;
        dec_cfg.mode = Mode::Decentralized;
        dec_cfg.comm_log = false;
        let mut cen_cfg = dec_cfg.clone();
        cen_cfg.mode = Mode::Centralized;

        let dec = engine::run_on(&dec_cfg, &env)?;
        let cen = engine::run_on(&cen_cfg, &env)?;

        let hist = metrics::diff_histogram(&dec.cellsteps, &cen.cellsteps, &bins)?;
        pooled = Some(match pooled {
            None => hist,
            Some(p) => p.merge(&hist)?,
        });

        rows.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            seed,
            dec.taskpoints,
            cen.taskpoints,
            dec.comm.transmissions,
            dec.comm.transmissions_heard,
            cen.comm.transmissions,
            dec.comm.bytes_disseminated,
            cen.comm.bytes_disseminated
        ));
        dec_tp += dec.taskpoints;
        cen_tp += cen.taskpoints;
        dec_tx += dec.comm.transmissions;
        dec_heard += dec.comm.transmissions_heard;
        cen_tx += cen.comm.transmissions;
        dec_bytes += dec.comm.bytes_disseminated;
        cen_bytes += cen.comm.bytes_disseminated;
    }

    let n = seeds as f64;
    let ratio = |num: u64, den: u64| num as f64 / den as f64;
    let summary = format!(
        "pairs,mean_dec_tp,mean_cen_tp,tp_ratio,tx_ratio,tx_attempt_ratio,byte_ratio\n\
         {},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        seeds,
        dec_tp as f64 / n,
        cen_tp as f64 / n,
        ratio(dec_tp, cen_tp),
        ratio(dec_heard, cen_tx),
        ratio(dec_tx, cen_tx),
        ratio(dec_bytes, cen_bytes)
    );

    let dir = out_dir(common.out);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))?;
    write_atomic(&dir, "compare.csv", &rows)?;
    write_atomic(&dir, "compare_summary.csv", &summary)?;
    let pooled = pooled.expect("seeds >= 1 always yields a histogram");
    write_atomic(&dir, "diff_histogram.csv", &pooled.to_csv())?;
    println!(
        "compared {} matched pairs, tx_ratio={:.4} byte_ratio={:.4} out={}",
        seeds,
        ratio(dec_heard, cen_tx),
        ratio(dec_bytes, cen_bytes),
        dir.display()
    );
    Ok(())
}

fn cmd_gen_maps(out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(out);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))?;
    for name in maps::BUILTIN_NAMES {
        let text = maps::builtin_text(name).expect("every listed name is built in");
        write_atomic(&dir, &format!("{name}.map"), &text)?;
    }
    println!(
        "wrote {} maps to {}",
        maps::BUILTIN_NAMES.len(),
        dir.display()
    );
    Ok(())
}
