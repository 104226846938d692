//! Monte Carlo evaluation of the four RIS schemes.
//!
//! One *drop* draws user positions and every channel, designs the RIS for
//! each scheme, precodes both cells and records the two sum-rates. A sweep
//! repeats `num_drops` drops per sweep value and reduces them in drop order,
//! so results do not depend on the worker-thread count.

mod cli;
mod config;
mod report;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamform::{composite_cell1, composite_cell2, direct_cell2, slnr_beamformer};
use crate::channel::{dbm_to_watts, gen_channel_set, mix_seed, ChannelSet};
use crate::manifold::ReflectionVector;
use crate::metrics::evaluate;
use crate::ris_design::{design_random, minimize_balance, warm_start, EffectiveChannels};
use crate::{Error, Result};

pub use cli::{cli_main, EXIT_CONFIG, EXIT_NUMERICAL};
pub use config::{ScenarioConfig, ScenarioFile, ServingArea};
pub use report::{write_csv, CSV_HEADER};

/// Environment variable capping worker threads (`0` or unset = all cores).
pub const THREADS_ENV: &str = "RISBAL_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Balanced design at the configured λ.
    Proposed,
    /// Balanced design at λ = 0 (cell 1 only).
    ConvRis,
    /// Uniformly random phases.
    RandRis,
    /// Cell 2 without the RIS; cell 1 has no link at all.
    NoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::ConvRis, Scheme::RandRis, Scheme::NoRis];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::ConvRis => "conv_ris",
            Scheme::RandRis => "rand_ris",
            Scheme::NoRis => "no_ris",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Cell1,
    Cell2,
}

impl Cell {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cell::Cell1 => "cell1",
            Cell::Cell2 => "cell2",
        }
    }
}

/// Swept scenario parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// `p_t_dbm`, in dBm.
    TransmitPowerDbm,
    /// `lambda_db`, in dB.
    LambdaDb,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::TransmitPowerDbm => "txpower",
            SweepKind::LambdaDb => "lambda",
        }
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            SweepKind::TransmitPowerDbm => cfg.p_t_dbm = value,
            SweepKind::LambdaDb => cfg.lambda_db = value,
        }
    }
}

/// Sum-rates (bits/s/Hz) of both cells under one scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRates {
    pub r1: f64,
    pub r2: f64,
}

impl CellRates {
    pub fn get(&self, cell: Cell) -> f64 {
        match cell {
            Cell::Cell1 => self.r1,
            Cell::Cell2 => self.r2,
        }
    }
}

/// Outcome of one drop, indexed by [`Scheme`].
#[derive(Clone, Debug, PartialEq)]
pub struct DropResult {
    rates: [CellRates; 4],
}

impl DropResult {
    pub fn get(&self, scheme: Scheme) -> CellRates {
        self.rates[scheme as usize]
    }
}

/// RIS designs chosen in one drop.
#[derive(Clone, Debug, PartialEq)]
pub struct DropDesigns {
    pub proposed: ReflectionVector,
    pub conv_ris: ReflectionVector,
    pub rand_ris: ReflectionVector,
}

const STREAM_CHANNEL: u64 = 0x11;
const STREAM_RANDOM_PHASES: u64 = 0x22;

/// Draws the channel realization of a drop.
pub fn drop_channels(cfg: &ScenarioConfig, drop_seed: u64) -> Result<ChannelSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(drop_seed, STREAM_CHANNEL));
    gen_channel_set(cfg, &mut rng)
}

/// Designs the RIS under every scheme for one channel realization.
pub fn design_all(cfg: &ScenarioConfig, channels: &ChannelSet, drop_seed: u64) -> Result<DropDesigns> {
    let eff = EffectiveChannels::from_channels(channels)?;
    let design = |lambda: f64| -> Result<ReflectionVector> {
        let r = eff.balance(lambda)?;
        Ok(minimize_balance(&r, &cfg.rcg, &warm_start(&r))?.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(drop_seed, STREAM_RANDOM_PHASES));
    Ok(DropDesigns {
        proposed: design(cfg.lambda())?,
        conv_ris: design(0.0)?,
        rand_ris: design_random(eff.ris_elements(), &mut rng),
    })
}

/// Sum-rates of both cells for every scheme, given the designs.
pub fn evaluate_designs(cfg: &ScenarioConfig, channels: &ChannelSet, designs: &DropDesigns) -> Result<DropResult> {
    let power = dbm_to_watts(cfg.p_t_dbm);
    // BS 2 only knows its direct links, whatever the RIS does.
    let direct = direct_cell2(channels)?;
    let f2 = slnr_beamformer(&direct, power, channels.noise_var_2)?;

    let with_ris = |phi: &ReflectionVector| -> Result<CellRates> {
        let rows1 = composite_cell1(phi, channels)?;
        let f1 = slnr_beamformer(&rows1, power, channels.noise_var_1)?;
        let r1 = evaluate(&rows1, &f1, channels.noise_var_1)?.sum_rate;
        let rows2 = composite_cell2(phi, channels)?;
        let r2 = evaluate(&rows2, &f2, channels.noise_var_2)?.sum_rate;
        Ok(CellRates { r1, r2 })
    };
    let no_ris = CellRates {
        r1: 0.0,
        r2: evaluate(&direct, &f2, channels.noise_var_2)?.sum_rate,
    };
    let rates = [
        with_ris(&designs.proposed)?,
        with_ris(&designs.conv_ris)?,
        with_ris(&designs.rand_ris)?,
        no_ris,
    ];
    if rates.iter().any(|r| !r.r1.is_finite() || !r.r2.is_finite()) {
        return Err(Error::Numerical("non-finite sum-rate".into()));
    }
    Ok(DropResult { rates })
}

/// One Monte Carlo drop: channels, designs for all four schemes, rates.
pub fn run_drop(cfg: &ScenarioConfig, drop_seed: u64) -> Result<DropResult> {
    let channels = drop_channels(cfg, drop_seed)?;
    let designs = design_all(cfg, &channels, drop_seed)?;
    evaluate_designs(cfg, &channels, &designs)
}

/// Seed of drop `drop_index` at sweep position `sweep_index`.
pub fn drop_seed(master: u64, sweep_index: u64, drop_index: u64) -> u64 {
    mix_seed(mix_seed(master, sweep_index), drop_index)
}

/// Aggregate of one (scheme, cell, sweep value).
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub cell: Cell,
    pub sweep: SweepKind,
    pub sweep_value: f64,
    pub mean_sum_rate: f64,
    /// Standard error of the mean (sample standard deviation / √n).
    pub std_err: f64,
    pub num_drops: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Reuse the same drops at every sweep value (common random numbers).
    pub crn: bool,
    /// Worker threads; `0` means one per core.
    pub threads: usize,
}

impl SweepOptions {
    /// Options with the thread cap read from `RISBAL_THREADS`.
    pub fn from_env(crn: bool) -> Result<Self> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?,
            _ => 0,
        };
        Ok(Self { crn, threads })
    }
}

/// Mean and standard error, accumulated in slice order.
pub fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `cfg.num_drops` drops at every value and aggregates per scheme and
/// cell. Results are ordered by (sweep value, scheme, cell).
pub fn run_sweep(cfg: &ScenarioConfig, sweep: SweepKind, values: &[f64]) -> Result<Vec<SweepResult>> {
    run_sweep_with(cfg, sweep, values, SweepOptions::from_env(false)?)
}

pub fn run_sweep_with(
    cfg: &ScenarioConfig,
    sweep: SweepKind,
    values: &[f64],
    opts: SweepOptions,
) -> Result<Vec<SweepResult>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep has no values".into()));
    }
    cfg.validate()?;
    let configs: Vec<ScenarioConfig> = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            sweep.apply(&mut c, v);
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;

    let drops = cfg.num_drops;
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..drops).map(move |d| (v, d)))
        .collect();
    let run = || {
        jobs.par_iter()
            .map(|&(v, d)| {
                let sweep_index = if opts.crn { 0 } else { v as u64 };
                run_drop(&configs[v], drop_seed(cfg.seed, sweep_index, d as u64))
            })
            .collect::<Result<Vec<DropResult>>>()
    };
    let outcomes = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
        .install(run)?;

    let mut results = Vec::with_capacity(values.len() * 8);
    for (v, &value) in values.iter().enumerate() {
        let block = &outcomes[v * drops..(v + 1) * drops];
        for scheme in Scheme::ALL {
            for cell in [Cell::Cell1, Cell::Cell2] {
                let samples: Vec<f64> = block.iter().map(|o| o.get(scheme).get(cell)).collect();
                let (mean, se) = mean_and_std_err(&samples);
                results.push(SweepResult {
                    scheme,
                    cell,
                    sweep,
                    sweep_value: value,
                    mean_sum_rate: mean,
                    std_err: se,
                    num_drops: drops,
                });
            }
        }
    }
    results.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.scheme.cmp(&b.scheme))
            .then(a.cell.cmp(&b.cell))
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::from_toml_str("ris_array = [2, 4]\nbs1_array = [2, 2]\nbs2_array = [2, 2]\nusers_per_cell = 2\nnum_drops = 3\n").unwrap();
        cfg.seed = 5;
        cfg
    }

    #[test]
    fn mean_and_se() {
        assert_eq!(mean_and_std_err(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_and_std_err(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // sample sd = sqrt(5/3)
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn no_ris_cell1_is_zero() {
        let out = run_drop(&small(), 1).unwrap();
        assert_eq!(out.get(Scheme::NoRis).r1, 0.0);
        assert!(out.get(Scheme::NoRis).r2 > 0.0);
    }

    #[test]
    fn single_drop_sweep_matches_run_drop() {
        let mut cfg = small();
        cfg.num_drops = 1;
        let res = run_sweep_with(&cfg, SweepKind::LambdaDb, &[10.0], SweepOptions { crn: false, threads: 1 }).unwrap();
        let mut c10 = cfg.clone();
        c10.lambda_db = 10.0;
        let direct = run_drop(&c10, drop_seed(cfg.seed, 0, 0)).unwrap();
        assert_eq!(res.len(), 8);
        for r in &res {
            assert_eq!(r.std_err, 0.0);
            assert_eq!(r.mean_sum_rate, direct.get(r.scheme).get(r.cell));
        }
    }

    #[test]
    fn results_are_sorted() {
        let res = run_sweep_with(&small(), SweepKind::TransmitPowerDbm, &[20.0, 10.0], SweepOptions::default()).unwrap();
        assert_eq!(res[0].sweep_value, 10.0);
        assert_eq!(res[0].scheme, Scheme::Proposed);
        assert_eq!(res[0].cell, Cell::Cell1);
        assert_eq!(res[15].sweep_value, 20.0);
        assert_eq!(res[15].scheme, Scheme::NoRis);
        assert_eq!(res[15].cell, Cell::Cell2);
    }

    #[test]
    fn empty_sweep_is_an_error() {
        assert!(matches!(
            run_sweep_with(&small(), SweepKind::LambdaDb, &[], SweepOptions::default()),
            Err(Error::EmptyInput(_))
        ));
    }
}
