//! Command-line front end. Flags override the values of `--config` or
//! `--figure`; without either, a default sweep is built from flags alone.

use std::path::PathBuf;

use clap::Parser;
use lora_ser::McConfig;
use num_complex::Complex64;

use crate::config::{ChannelPreset, DbRange, Method, SweepConfig, DEFAULT_TRIALS};
use crate::error::SweepError;
use crate::output::write_csv;
use crate::plot::emit_plot;
use crate::run::run_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "lora-sweep",
    version,
    about = "Sweep LoRa error probabilities over Eb/N0"
)]
pub struct Cli {
    /// TOML sweep configuration.
    #[arg(long, conflicts_with = "figure")]
    pub config: Option<PathBuf>,

    /// Start from the settings of reference figure 1-4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub figure: Option<u8>,

    /// Spreading factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sf: Vec<u32>,

    /// Rician K-factors, comma separated (unit mean power).
    #[arg(long = "k-factor", value_delimiter = ',', conflicts_with_all = ["mu_re", "mu_im", "sigma2"])]
    pub k_factor: Vec<f64>,

    /// Real part of the channel mean.
    #[arg(long = "mu-re", allow_hyphen_values = true)]
    pub mu_re: Option<f64>,

    /// Imaginary part of the channel mean.
    #[arg(long = "mu-im", allow_hyphen_values = true)]
    pub mu_im: Option<f64>,

    /// Channel scatter variance.
    #[arg(long)]
    pub sigma2: Option<f64>,

    /// Eb/N0 grid in dB as start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: Option<DbRange>,

    /// Methods, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,

    /// Monte Carlo symbols per grid point.
    #[arg(long)]
    pub trials: Option<u64>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long = "batch-size")]
    pub batch_size: Option<u64>,

    /// Stop a Monte Carlo point early after this many symbol errors.
    #[arg(long = "target-errors")]
    pub target_errors: Option<u64>,

    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Largest SF for which the exact sum is evaluated.
    #[arg(long = "exact-max-sf")]
    pub exact_max_sf: Option<u32>,

    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// SVG plot path.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

fn default_config() -> SweepConfig {
    SweepConfig {
        sf_list: vec![7],
        presets: vec![ChannelPreset::from_k_factor(1.0).expect("valid K")],
        ebn0_db: DbRange {
            start: 0.0,
            stop: 40.0,
            step: 1.0,
        },
        methods: vec![Method::Integral, Method::Upper, Method::Lower],
        mc: McConfig::new(DEFAULT_TRIALS, 1),
        output_path: PathBuf::from("sweep.csv"),
        plot_path: None,
        exact_max_sf: lora_ser::DEFAULT_EXACT_MAX_SF,
    }
}

impl Cli {
    pub fn resolve(&self) -> Result<SweepConfig, SweepError> {
        let mut cfg = match (&self.config, self.figure) {
            (Some(path), _) => SweepConfig::from_file(path)?,
            (None, Some(n)) => SweepConfig::figure(n)?,
            (None, None) => default_config(),
        };
        if !self.sf.is_empty() {
            cfg.sf_list = self.sf.clone();
        }
        if !self.k_factor.is_empty() {
            cfg.presets = self
                .k_factor
                .iter()
                .map(|&k| ChannelPreset::from_k_factor(k))
                .collect::<Result<_, _>>()?;
        }
        if self.mu_re.is_some() || self.mu_im.is_some() || self.sigma2.is_some() {
            let sigma2 = self.sigma2.ok_or_else(|| SweepError::Config {
                field: "sigma2".into(),
                reason: "required together with --mu-re/--mu-im".into(),
            })?;
            let mu = Complex64::new(self.mu_re.unwrap_or(0.0), self.mu_im.unwrap_or(0.0));
            cfg.presets = vec![ChannelPreset::from_moments(mu, sigma2)?];
        }
        if let Some(r) = self.ebn0 {
            cfg.ebn0_db = r;
        }
        if !self.methods.is_empty() {
            cfg.methods = self.methods.clone();
        }
        if let Some(t) = self.trials {
            cfg.mc.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.mc.seed = s;
        }
        if let Some(b) = self.batch_size {
            cfg.mc.batch_size = b;
        }
        if self.target_errors.is_some() {
            cfg.mc.target_errors = self.target_errors;
        }
        if let Some(w) = self.workers {
            cfg.mc.parallel_workers = w;
        }
        if let Some(m) = self.exact_max_sf {
            cfg.exact_max_sf = m;
        }
        if let Some(p) = &self.out {
            cfg.output_path = p.clone();
        }
        if let Some(p) = &self.plot {
            cfg.plot_path = Some(p.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: &Cli) -> Result<(), SweepError> {
    let cfg = cli.resolve()?;
    let curve = run_sweep(&cfg)?;
    write_csv(&curve, &cfg.output_path)?;
    if let Some(p) = &cfg.plot_path {
        emit_plot(&curve, p)?;
    }
    Ok(())
}

/// Runs the sweep and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lora-sweep: {e}");
            e.exit_code()
        }
    }
}
