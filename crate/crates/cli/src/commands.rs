//! Implementations of the five subcommands. Functions return `CliError` so
//! `main` can map solver/verification failures and environment problems onto
//! distinct exit codes.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use tlou_core::best_response::{brute_force_best, user_best_capacity, CandidateSet};
use tlou_core::consumption_data::{discretize, group_by_hour, ingest_power_csv};
use tlou_core::instance_gen::{InstanceGen, Rng};
use tlou_core::price_setter;
use tlou_core::scalar::Real;
use tlou_core::{DiscreteDistribution64, Menu64};

use crate::config::RunConfig;
use crate::io;

/// Failures that should exit with code 1 (solver or verification trouble)
/// versus code 2 (usage, configuration or I/O trouble).
#[derive(Debug)]
pub enum CliError {
    Run(anyhow::Error),
    Environment(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            CliError::Environment(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Run(e) | CliError::Environment(e) => format!("{e:#}"),
        }
    }
}

fn env_err(e: anyhow::Error) -> CliError {
    CliError::Environment(e)
}

fn run_err(e: anyhow::Error) -> CliError {
    CliError::Run(e)
}

fn ensure_out_dir(out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))
        .map_err(env_err)
}

pub fn distributions_path(out_dir: &Path) -> PathBuf {
    out_dir.join("distributions.json")
}

/// `ingest`: raw meter CSV → hourly energies → per-hour distributions.
pub fn ingest(
    input: &Path,
    scenarios: usize,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out_dir)?;
    let file = std::fs::File::open(input)
        .with_context(|| format!("cannot open input {}", input.display()))
        .map_err(env_err)?;
    let (samples, stats) = ingest_power_csv::<f64>(BufReader::new(file), &cfg.ingest_config())
        .context("ingestion failed")
        .map_err(env_err)?;
    println!(
        "ingested {} rows ({} skipped, {} missing readings, cadence {} min)",
        stats.rows_total, stats.rows_skipped, stats.readings_missing, stats.cadence_minutes
    );
    println!("kept {} hourly samples, dropped {}", stats.hours_kept, stats.hours_dropped);

    let groups = group_by_hour(&samples);
    let mut records = Vec::new();
    for (hour, energies) in groups.iter().enumerate() {
        let hour = hour as u8;
        if !cfg.selects_hour(hour) {
            continue;
        }
        if energies.is_empty() {
            eprintln!("warning: no samples for hour {hour}, omitting it");
            continue;
        }
        let n = scenarios.min(energies.len());
        let dist = discretize(hour, energies, n)
            .with_context(|| format!("discretization failed for hour {hour}"))
            .map_err(env_err)?;
        println!(
            "hour {hour:2}: {} samples -> {} scenarios, mean {:.3} kWh",
            energies.len(),
            dist.scenario_count(),
            dist.mean()
        );
        records.push(io::DistributionRecord::from_distribution(&dist, energies.len()));
    }
    let path = distributions_path(out_dir);
    io::write_distributions(&path, &records).map_err(env_err)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_distributions(path: &Path, cfg: &RunConfig) -> Result<Vec<DiscreteDistribution64>, CliError> {
    let records = io::read_distributions(path).map_err(env_err)?;
    let mut dists = Vec::new();
    for r in &records {
        if cfg.selects_hour(r.hour) {
            dists.push(r.to_distribution().map_err(env_err)?);
        }
    }
    if dists.is_empty() {
        return Err(env_err(anyhow!("no hours selected from {}", path.display())));
    }
    Ok(dists)
}

/// `solve`: one menu per hour plus the per-hour option count and capacity
/// level summaries.
pub fn solve(
    input: &Path,
    hour: Option<u8>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out_dir)?;
    let rules = cfg.contract_rules().map_err(env_err)?;
    let solver_cfg = cfg.solver_config().map_err(env_err)?;
    let dists = load_distributions(input, cfg)?;

    let mut menus: Vec<Menu64> = Vec::new();
    for dist in &dists {
        if let Some(h) = hour {
            if dist.time_frame() != h {
                continue;
            }
        }
        let menu = price_setter::menu(dist, &rules, &solver_cfg)
            .with_context(|| format!("solve failed for hour {}", dist.time_frame()))
            .map_err(run_err)?;
        let path = out_dir.join(format!("menu_{}.json", menu.time_frame));
        io::write_menu(&path, &menu).map_err(env_err)?;
        let capacities: Vec<String> =
            menu.options.iter().map(|o| format!("{:.2}", o.target_capacity)).collect();
        println!(
            "hour {:2}: {} options of {} candidates [{}]",
            menu.time_frame,
            menu.options.len(),
            menu.diagnostics.candidates_total,
            capacities.join(", ")
        );
        menus.push(menu);
    }
    if menus.is_empty() {
        return Err(env_err(anyhow!("requested hour not present in {}", input.display())));
    }

    let count_rows: Vec<Vec<f64>> = menus
        .iter()
        .map(|m| {
            vec![
                m.time_frame as f64,
                m.options.len() as f64,
                if m.diagnostics.zero_option_present { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    io::write_csv(
        &out_dir.join("options_per_hour.csv"),
        io::OPTIONS_PER_HOUR_HEADER,
        &count_rows,
    )
    .map_err(env_err)?;

    let level_rows: Vec<Vec<f64>> = menus
        .iter()
        .flat_map(|m| {
            m.options.iter().map(|o| vec![m.time_frame as f64, o.target_capacity])
        })
        .collect();
    io::write_csv(
        &out_dir.join("capacity_levels.csv"),
        io::CAPACITY_LEVELS_HEADER,
        &level_rows,
    )
    .map_err(env_err)?;

    if menus.iter().all(|m| m.options.iter().all(|o| o.target_capacity == 0.0)) {
        eprintln!("warning: no nonzero-capacity option is feasible under this configuration");
    }
    println!("wrote menus and summaries under {}", out_dir.display());
    Ok(())
}

/// `curves`: dense-grid evaluations of one pricing option — price curves,
/// relative cost per chosen capacity, and the expected cost of booking.
pub fn curves(
    option_path: &Path,
    distributions: &Path,
    capacities: &[f64],
    out_dir: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out_dir)?;
    let option = io::read_pricing_option(option_path).map_err(env_err)?;
    let records = io::read_distributions(distributions).map_err(env_err)?;
    let dist = records
        .iter()
        .find(|r| r.hour == option.time_frame)
        .ok_or_else(|| {
            env_err(anyhow!(
                "no distribution for hour {} in {}",
                option.time_frame,
                distributions.display()
            ))
        })?
        .to_distribution()
        .map_err(env_err)?;

    let setting = &option.setting;
    let max_event = setting
        .lower()
        .breakpoints()
        .iter()
        .chain(setting.higher().breakpoints())
        .chain(dist.loads())
        .copied()
        .fold(option.target_capacity, f64::max);
    let cmax = 1.25 * max_event.max(1.0);

    // Capacity grid: regular steps plus the exact event points so the steps
    // and jumps land crisply in the data.
    let mut grid: Vec<f64> = (0..=400).map(|i| cmax * i as f64 / 400.0).collect();
    grid.extend(
        setting
            .lower()
            .breakpoints()
            .iter()
            .chain(setting.higher().breakpoints())
            .chain(dist.loads())
            .copied(),
    );
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let price_rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&c| vec![c, setting.lower().value_at(c), setting.higher().value_at(c)])
        .collect();
    io::write_csv(&out_dir.join("curves_prices.csv"), io::CURVE_PRICES_HEADER, &price_rows)
        .map_err(env_err)?;

    let mut chosen: Vec<f64> = if capacities.is_empty() {
        vec![0.0, option.target_capacity]
    } else {
        capacities.to_vec()
    };
    chosen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    chosen.dedup();
    let mut relative_rows = Vec::new();
    for &c in &chosen {
        if c < 0.0 {
            return Err(env_err(anyhow!("capacities must be non-negative, got {c}")));
        }
        for i in 1..=400 {
            let x = cmax * i as f64 / 400.0;
            let rc = setting
                .relative_cost(c, x)
                .context("relative cost evaluation failed")
                .map_err(env_err)?;
            relative_rows.push(vec![c, x, rc]);
        }
    }
    io::write_csv(
        &out_dir.join("curves_relative.csv"),
        io::CURVE_RELATIVE_HEADER,
        &relative_rows,
    )
    .map_err(env_err)?;

    let expected_rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&c| vec![c, setting.expected_cost(c, &dist)])
        .collect();
    io::write_csv(
        &out_dir.join("curves_expected.csv"),
        io::CURVE_EXPECTED_HEADER,
        &expected_rows,
    )
    .map_err(env_err)?;
    println!(
        "wrote curves_prices.csv, curves_relative.csv, curves_expected.csv under {}",
        out_dir.display()
    );
    Ok(())
}

/// `sweep-delta`: per hour, count feasible nonzero-capacity candidates along
/// an increasing δ grid and report each hour's δ_max when reached.
pub fn sweep_delta(
    input: &Path,
    hour: Option<u8>,
    delta_max_value: f64,
    delta_steps: usize,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out_dir)?;
    if delta_steps < 2 || !delta_max_value.is_finite() || delta_max_value <= 0.0 {
        return Err(env_err(anyhow!("need a positive delta range and at least two steps")));
    }
    let rules = cfg.contract_rules().map_err(env_err)?;
    let solver_cfg = cfg.solver_config().map_err(env_err)?;
    let dists = load_distributions(input, cfg)?;
    let grid: Vec<f64> = (0..delta_steps)
        .map(|i| delta_max_value * i as f64 / (delta_steps - 1) as f64)
        .collect();

    let mut rows = Vec::new();
    for dist in &dists {
        if let Some(h) = hour {
            if dist.time_frame() != h {
                continue;
            }
        }
        let sweep = price_setter::delta_max(dist, &rules, &solver_cfg, &grid)
            .with_context(|| format!("sweep failed for hour {}", dist.time_frame()))
            .map_err(run_err)?;
        for &(delta, count) in &sweep.rows {
            rows.push(vec![dist.time_frame() as f64, delta, count as f64]);
        }
        match sweep.delta_max {
            Some(d) => println!("hour {:2}: delta_max = {d:.4}", dist.time_frame()),
            None => println!(
                "hour {:2}: delta_max not reached within [0, {delta_max_value}]",
                dist.time_frame()
            ),
        }
    }
    if rows.is_empty() {
        return Err(env_err(anyhow!("requested hour not present in {}", input.display())));
    }
    let path = out_dir.join("delta_sweep.csv");
    io::write_csv(&path, io::DELTA_SWEEP_HEADER, &rows).map_err(env_err)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `verify`: brute-force oracle versus the candidate-set argmin on random
/// instances. Nonzero exit on any disagreement.
pub fn verify(
    seed: u64,
    count: usize,
    resolution: f64,
    corrupt_breakpoints: bool,
) -> Result<(), CliError> {
    let mut rng = Rng::new(seed);
    let gen = InstanceGen::default();
    let mut mismatches = 0usize;
    for trial in 0..count {
        let (setting, dist) = gen.instance::<f64>(&mut rng);
        let brute = brute_force_best(&setting, &dist, resolution);
        let brute_cost = setting.expected_cost(brute, &dist);

        // Optional self-test of the oracle's sensitivity: shift the lower
        // breakpoints slightly left of their true position, the classic
        // wrong-side-of-the-step mistake.
        let (enum_best, enum_cost, candidates) = if corrupt_breakpoints {
            let corrupted: Vec<f64> = setting
                .lower()
                .breakpoints()
                .iter()
                .map(|&b| if b > 0.0 { b - 1e-6 } else { b })
                .collect();
            let candidates = CandidateSet::build(&corrupted, &dist);
            let mut best = (0.0, f64::INFINITY);
            for &c in candidates.capacities() {
                let cost = setting.expected_cost(c, &dist);
                if cost < best.1 - f64::tol() {
                    best = (c, cost);
                }
            }
            (best.0, best.1, candidates)
        } else {
            let candidates = CandidateSet::build(setting.lower().breakpoints(), &dist);
            let (c, cost) = user_best_capacity(&setting, &dist);
            (c, cost, candidates)
        };

        let in_set = candidates.position_of(brute).is_some();
        let cost_gap = (brute_cost - enum_cost).abs();
        if !in_set || cost_gap > 1e-9 {
            mismatches += 1;
            eprintln!("mismatch on instance {trial}:");
            eprintln!("  brute-force argmin {brute} with expected cost {brute_cost}");
            eprintln!("  candidate argmin  {enum_best} with expected cost {enum_cost}");
            eprintln!("  candidate set: {:?}", candidates.capacities());
            eprintln!("  setting: {}", serde_json::to_string(&setting).unwrap_or_default());
            eprintln!("  distribution: {}", serde_json::to_string(&dist).unwrap_or_default());
        }
    }
    println!("verified {count} instances at resolution {resolution}: {mismatches} mismatches");
    if mismatches > 0 {
        return Err(run_err(anyhow!("{mismatches} of {count} instances disagree")));
    }
    Ok(())
}
