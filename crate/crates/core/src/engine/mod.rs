//! Seeded Monte Carlo runner.
//!
//! Every job splits its pairs over a fixed number of shards. Shard `k` of job
//! `j` draws from its own ChaCha8 stream keyed by `(seed, j, k)`, so results
//! depend only on `(config, seed, shards)` and not on how many threads rayon
//! happens to use. Shard tallies are integer counts merged by addition.

mod estimate;

pub use estimate::{CorrelationEstimate, SidePassRate, Tally};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::models::menu::MenuWorld;
use crate::models::program::{Program, ThreeOptions};
use crate::models::{measure_pair, sample_pair, ApertureModel};

pub const DEFAULT_PAIRS: u64 = 1_000_000;
pub const DEFAULT_SHARDS: u32 = 8;

/// Which local model produces the outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Aperture(ApertureModel),
    /// Uniform mixture of the eight deterministic programs.
    Programs,
    /// Shared numbers read off per-chain menus; option `k` sends a diner to chain `k`.
    Menu { world: MenuWorld },
}

impl ModelConfig {
    pub fn aperture(&self) -> Result<&ApertureModel> {
        match self {
            ModelConfig::Aperture(m) => Ok(m),
            _ => Err(Error::config("this protocol needs an aperture model")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    Fixed { left: Angle, right: Angle },
    /// Left target at 0°, right target stepped from `start` to `end`.
    Sweep { start: f64, end: f64, step: f64 },
    ThreeSetting { options: ThreeOptions },
    /// Both targets uniform on `[0°, 360°)`, binned by their separation.
    Random360 { bin_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub protocol: Protocol,
    pub pairs: u64,
    pub seed: u64,
    pub shards: u32,
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, protocol: Protocol) -> Self {
        Self {
            model,
            protocol,
            pairs: DEFAULT_PAIRS,
            seed: 0,
            shards: DEFAULT_SHARDS,
        }
    }

    pub fn with_pairs(mut self, pairs: u64) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shards(mut self, shards: u32) -> Self {
        self.shards = shards;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs == 0 {
            return Err(Error::config("pair count must be at least 1"));
        }
        if self.shards == 0 {
            return Err(Error::config("shard count must be at least 1"));
        }
        if let ModelConfig::Aperture(m) = &self.model {
            m.aperture.validated()?;
        }
        match &self.protocol {
            Protocol::Fixed { .. } | Protocol::ThreeSetting { .. } => {}
            Protocol::Sweep { .. } => {
                sweep_grid(&self.protocol)?;
            }
            Protocol::Random360 { bin_width } => {
                bin_count(*bin_width)?;
            }
        }
        if let ModelConfig::Menu { world } = &self.model {
            if world.len() != 3 {
                return Err(Error::config(format!(
                    "menu model needs exactly 3 chains, got {}",
                    world.len()
                )));
            }
        }
        Ok(())
    }

    fn run_params(&self) -> RunParams {
        RunParams {
            pairs: self.pairs,
            seed: self.seed,
            shards: self.shards,
        }
    }
}

/// Size and seeding of one job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunParams {
    pub pairs: u64,
    pub seed: u64,
    pub shards: u32,
}

/// The random stream of shard `shard` in job `job`.
pub fn shard_rng(seed: u64, job: u32, shard: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((job as u64) << 32) | shard as u64);
    rng
}

/// Runs `work(rng, n)` on every shard of a job and folds the results with
/// `merge`. The first `pairs % shards` shards take one extra pair.
fn sharded<T, W, M>(params: RunParams, job: u32, identity: impl Fn() -> T + Sync + Send, work: W, merge: M) -> T
where
    T: Send,
    W: Fn(&mut ChaCha8Rng, u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let shards = params.shards.max(1);
    let base = params.pairs / shards as u64;
    let extra = params.pairs % shards as u64;
    (0..shards)
        .into_par_iter()
        .map(|k| {
            let n = base + u64::from((k as u64) < extra);
            let mut rng = shard_rng(params.seed, job, k);
            work(&mut rng, n)
        })
        .reduce(identity, merge)
}

/// Correlation at one pair of target settings. `job` selects the random
/// stream family, so distinct jobs under the same seed are independent.
pub fn run_setting_pair(model: &ApertureModel, left: Angle, right: Angle, params: RunParams, job: u32) -> Tally {
    sharded(
        params,
        job,
        Tally::default,
        |rng, n| {
            let mut t = Tally::default();
            for _ in 0..n {
                let pair = sample_pair(model.pairing, rng);
                let rec = measure_pair(model, &pair, left, right);
                t.record(rec.passed_left(), rec.passed_right(), rec.coincidence());
            }
            t
        },
        Tally::merge,
    )
}

/// Counts double passes at fixed settings and estimates their correlation.
pub fn run_fixed(cfg: &ExperimentConfig) -> Result<CorrelationEstimate> {
    cfg.validate()?;
    let Protocol::Fixed { left, right } = cfg.protocol else {
        return Err(Error::config("run_fixed needs the fixed protocol"));
    };
    let model = cfg.model.aperture()?;
    Ok(run_setting_pair(model, left, right, cfg.run_params(), 0).estimate())
}

/// Single-side pass fractions at `(left, right)` over `pairs` throws.
pub fn pass_rate_side(cfg: &ExperimentConfig, left: Angle, right: Angle, pairs: u64) -> Result<SidePassRate> {
    if pairs == 0 {
        return Err(Error::config("pair count must be at least 1"));
    }
    match &cfg.model {
        ModelConfig::Aperture(model) => {
            let params = RunParams { pairs, ..cfg.run_params() };
            Ok(run_setting_pair(model, left, right, params, 0).into())
        }
        // every particle of these models is recorded
        ModelConfig::Programs | ModelConfig::Menu { .. } => Ok(SidePassRate {
            n_pairs: pairs,
            n_left: pairs,
            n_right: pairs,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub estimate: CorrelationEstimate,
}

fn sweep_grid(protocol: &Protocol) -> Result<Vec<f64>> {
    let Protocol::Sweep { start, end, step } = *protocol else {
        return Err(Error::config("not a sweep protocol"));
    };
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(Error::config("sweep bounds must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::config(format!("sweep step must be positive, got {step}")));
    }
    if end < start {
        return Err(Error::config(format!("sweep end {end} is before start {start}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// One fixed-setting run per grid point: left target at 0°, right at θ.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let model = cfg.model.aperture()?;
    let grid = sweep_grid(&cfg.protocol)?;
    grid.iter()
        .enumerate()
        .map(|(k, &theta)| {
            let right = Angle::new(theta)?;
            let tally = run_setting_pair(model, Angle::ZERO, right, cfg.run_params(), k as u32);
            Ok(CurvePoint {
                theta,
                estimate: tally.estimate(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeSettingResult {
    pub options: ThreeOptions,
    /// Rows indexed by the left option, columns by the right.
    pub matrix: [[CorrelationEstimate; 3]; 3],
    /// All counted pairs pooled; its `rate` is the overall same-outcome probability.
    pub overall: CorrelationEstimate,
}

impl ThreeSettingResult {
    /// Pooled estimate over the three equal-setting cells.
    pub fn diagonal(&self) -> CorrelationEstimate {
        let (mut n, mut s, mut d) = (0, 0, 0);
        for i in 0..3 {
            let c = self.matrix[i][i];
            n += c.n_pairs;
            s += c.n_same;
            d += c.n_diff;
        }
        CorrelationEstimate::from_counts(n, s, d)
    }
}

type Grid3 = [[Tally; 3]; 3];

fn merge_grid(mut a: Grid3, b: Grid3) -> Grid3 {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (ca, cb) in ra.iter_mut().zip(rb) {
            *ca = ca.merge(cb);
        }
    }
    a
}

/// Each pair is created first; only then does each side independently pick
/// one of the three options.
pub fn run_three_setting(cfg: &ExperimentConfig) -> Result<ThreeSettingResult> {
    cfg.validate()?;
    let Protocol::ThreeSetting { options } = cfg.protocol else {
        return Err(Error::config("run_three_setting needs the three-setting protocol"));
    };
    let angles = options.angles();
    let params = cfg.run_params();
    let grid: Grid3 = match &cfg.model {
        ModelConfig::Aperture(model) => sharded(
            params,
            0,
            Grid3::default,
            |rng, n| {
                let mut g = Grid3::default();
                for _ in 0..n {
                    let pair = sample_pair(model.pairing, rng);
                    let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
                    let rec = measure_pair(model, &pair, angles[i], angles[j]);
                    g[i][j].record(rec.passed_left(), rec.passed_right(), rec.coincidence());
                }
                g
            },
            merge_grid,
        ),
        ModelConfig::Programs => sharded(
            params,
            0,
            Grid3::default,
            |rng, n| {
                let mut g = Grid3::default();
                for _ in 0..n {
                    let program = Program::from_index(rng.gen_range(0..8));
                    let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
                    g[i][j].record(true, true, Some(program.matches(i, j)));
                }
                g
            },
            merge_grid,
        ),
        ModelConfig::Menu { world } => sharded(
            params,
            0,
            Grid3::default,
            |rng, n| {
                let mut g = Grid3::default();
                for _ in 0..n {
                    let (row, col) = world.shared_numbers(rng);
                    let (i, j) = (rng.gen_range(0..3), rng.gen_range(0..3));
                    let same = world.menu_at(i).at(row, col) == world.menu_at(j).at(row, col);
                    g[i][j].record(true, true, Some(same));
                }
                g
            },
            merge_grid,
        ),
    };
    let overall = grid.iter().flatten().fold(Tally::default(), |a, &b| a.merge(b));
    Ok(ThreeSettingResult {
        options,
        matrix: grid.map(|row| row.map(|t| t.estimate())),
        overall: overall.estimate(),
    })
}

fn bin_count(bin_width: f64) -> Result<usize> {
    if !(bin_width.is_finite() && bin_width > 0.0 && bin_width <= 180.0) {
        return Err(Error::config(format!("bin width {bin_width} must be in (0, 180]")));
    }
    let k = 180.0 / bin_width;
    if (k - k.round()).abs() > 1e-9 {
        return Err(Error::config(format!("bin width {bin_width} does not divide 180")));
    }
    Ok(k.round() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub bin_width: f64,
    /// One point per bin, `theta` at the bin center.
    pub bins: Vec<CurvePoint>,
    /// Everything pooled; `coincidence_fraction()` is the overall double-pass rate.
    pub totals: CorrelationEstimate,
    pub pass_rate: SidePassRate,
}

/// Both settings uniform on the full circle; records are binned by the
/// unsigned separation of the two target marks, which lies in `[0°, 180°]`.
pub fn run_random_360(cfg: &ExperimentConfig) -> Result<BinnedCurve> {
    cfg.validate()?;
    let Protocol::Random360 { bin_width } = cfg.protocol else {
        return Err(Error::config("run_random_360 needs the random-360 protocol"));
    };
    let model = cfg.model.aperture()?;
    let nbins = bin_count(bin_width)?;
    let bins = sharded(
        cfg.run_params(),
        0,
        || vec![Tally::default(); nbins],
        |rng, n| {
            let mut bins = vec![Tally::default(); nbins];
            for _ in 0..n {
                let pair = sample_pair(model.pairing, rng);
                let left = Angle::wrap(rng.gen::<f64>() * 360.0);
                let right = Angle::wrap(rng.gen::<f64>() * 360.0);
                let rec = measure_pair(model, &pair, left, right);
                let theta = right.separation(left);
                let b = ((theta / bin_width) as usize).min(nbins - 1);
                bins[b].record(rec.passed_left(), rec.passed_right(), rec.coincidence());
            }
            bins
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = x.merge(y);
            }
            a
        },
    );
    let total = bins.iter().fold(Tally::default(), |a, &b| a.merge(b));
    Ok(BinnedCurve {
        bin_width,
        bins: bins
            .iter()
            .enumerate()
            .map(|(k, t)| CurvePoint {
                theta: (k as f64 + 0.5) * bin_width,
                estimate: t.estimate(),
            })
            .collect(),
        totals: total.estimate(),
        pass_rate: total.into(),
    })
}
