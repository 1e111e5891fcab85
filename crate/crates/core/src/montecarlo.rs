//! Monte Carlo estimation of the detector's symbol error rate.
//!
//! Trials are split into fixed-size batches. Batch `i` draws from its own
//! ChaCha stream `(seed, i)`, so the counts do not depend on how batches are
//! scheduled across workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::LinkBudget;
use crate::channel::{apply_channel_into, ChannelParams};
use crate::error::{invalid, Result};
use crate::signal::{modulate_into, Dechirper, LoRaParams, SymbolIndex};

pub const DEFAULT_BATCH_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Stop at the first batch boundary where this many errors have been
    /// counted.
    pub target_errors: Option<u64>,
    pub parallel_workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
            target_errors: None,
            parallel_workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be >= 1"));
        }
        if self.parallel_workers == 0 {
            return Err(invalid("parallel_workers", "must be >= 1"));
        }
        if self.target_errors == Some(0) {
            return Err(invalid("target_errors", "must be >= 1 when set"));
        }
        Ok(())
    }

    fn batch_count(&self) -> u64 {
        self.trials.div_ceil(self.batch_size)
    }

    fn batch_len(&self, index: u64) -> u64 {
        let start = index * self.batch_size;
        self.batch_size.min(self.trials - start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub errors: u64,
    pub trials_run: u64,
    pub ser_hat: f64,
    /// `sqrt(p(1-p)/n)`
    pub stderr: f64,
    /// Wilson score interval at 95%.
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl McResult {
    pub fn from_counts(errors: u64, trials_run: u64) -> Self {
        let n = trials_run as f64;
        let p = errors as f64 / n;
        let stderr = (p * (1.0 - p) / n).sqrt();
        let z = 1.959_963_984_540_054;
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            errors,
            trials_run,
            ser_hat: p,
            stderr,
            ci95_low: if errors == 0 {
                0.0
            } else {
                (centre - half).max(0.0)
            },
            ci95_high: if errors == trials_run {
                1.0
            } else {
                (centre + half).min(1.0)
            },
        }
    }
}

struct Worker {
    params: LoRaParams,
    ch: ChannelParams,
    dechirper: Dechirper,
    tx: Vec<Complex64>,
    rx: Vec<Complex64>,
}

impl Worker {
    fn new(params: &LoRaParams, ch: &ChannelParams) -> Self {
        let m = params.m_size();
        Self {
            params: params.clone(),
            ch: *ch,
            dechirper: Dechirper::new(params),
            tx: vec![Complex64::new(0.0, 0.0); m],
            rx: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    fn run_batch(&mut self, seed: u64, index: u64, len: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let m_size = self.params.m_size();
        let mut errors = 0;
        for _ in 0..len {
            let m = SymbolIndex(rng.random_range(0..m_size));
            modulate_into(&self.params, m, &mut self.tx).expect("buffer sized to M");
            apply_channel_into(&self.ch, &self.tx, &mut rng, &mut self.rx)
                .expect("buffers sized to M");
            let decided = self.dechirper.detect(&self.rx).expect("buffer sized to M");
            if decided != m {
                errors += 1;
            }
        }
        errors
    }
}

/// Simulates modulation, fading, noise, de-chirping and detection.
pub fn simulate_ser(lb: &LinkBudget, mc: &McConfig) -> Result<McResult> {
    mc.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.parallel_workers)
        .build()
        .map_err(|e| invalid("parallel_workers", e.to_string()))?;
    let params = lb.params();
    let ch = lb.channel();
    let batches = mc.batch_count();

    let run = |range: std::ops::Range<u64>| -> Vec<u64> {
        pool.install(|| {
            range
                .into_par_iter()
                .map_init(
                    || Worker::new(params, ch),
                    |w, i| w.run_batch(mc.seed, i, mc.batch_len(i)),
                )
                .collect()
        })
    };

    let Some(target) = mc.target_errors else {
        let errors = run(0..batches).iter().sum();
        return Ok(McResult::from_counts(errors, mc.trials));
    };

    // Waves of batches; the stopping point depends only on batch counts.
    let wave = (4 * mc.parallel_workers) as u64;
    let mut errors = 0;
    let mut trials_run = 0;
    let mut next = 0;
    while next < batches {
        let end = (next + wave).min(batches);
        for (i, e) in (next..end).zip(run(next..end)) {
            errors += e;
            trials_run += mc.batch_len(i);
            if errors >= target {
                return Ok(McResult::from_counts(errors, trials_run));
            }
        }
        next = end;
    }
    Ok(McResult::from_counts(errors, trials_run))
}
