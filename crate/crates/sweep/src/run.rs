//! Evaluation of every (method, SF, channel, Eb/N0) cell of a sweep.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use lora_ser::{
    ber_from_ser, ser_exact_rician_with_limit, ser_lower, ser_lower_exp, ser_lower_rayleigh,
    ser_numeric_integration, ser_upper, ser_upper_exp, ser_upper_rayleigh, simulate_ser, Error,
    LinkBudget,
};
use rayon::prelude::*;

use crate::config::{ChannelPreset, Method, SweepConfig};
use crate::error::{config_error, SweepError};

/// Why a cell carries no number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    SkippedPrecision,
    SkippedQuadrature,
    SkippedDomain,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::SkippedPrecision => "skipped:precision",
            Status::SkippedQuadrature => "skipped:quadrature",
            Status::SkippedDomain => "skipped:domain",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Status::Ok,
            Status::SkippedPrecision,
            Status::SkippedQuadrature,
            Status::SkippedDomain,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
        .ok_or_else(|| format!("unknown status `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: Method,
    pub sf: u32,
    pub k_factor: f64,
    pub ebn0_db: f64,
    pub ser: Option<f64>,
    pub ber: Option<f64>,
    /// Monte Carlo rows only.
    pub stderr: Option<f64>,
    /// Monte Carlo rows only.
    pub trials: Option<u64>,
    pub status: Status,
}

impl Row {
    fn skipped(
        method: Method,
        sf: u32,
        preset: &ChannelPreset,
        ebn0_db: f64,
        status: Status,
    ) -> Self {
        Row {
            method,
            sf,
            k_factor: preset.k_factor,
            ebn0_db,
            ser: None,
            ber: None,
            stderr: None,
            trials: None,
            status,
        }
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.method
            .name()
            .cmp(other.method.name())
            .then(self.sf.cmp(&other.sf))
            .then(self.k_factor.total_cmp(&other.k_factor))
            .then(self.ebn0_db.total_cmp(&other.ebn0_db))
    }
}

/// Rows of a sweep, kept sorted by (method name, SF, K, Eb/N0).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorCurve {
    pub rows: Vec<Row>,
}

impl ErrorCurve {
    pub fn new(mut rows: Vec<Row>) -> Self {
        rows.sort_by(Row::sort_key_cmp);
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

struct Cell<'a> {
    method: Method,
    sf: u32,
    preset: &'a ChannelPreset,
    ebn0_db: f64,
}

fn evaluate(cell: &Cell<'_>, cfg: &SweepConfig) -> Result<Row, SweepError> {
    let Cell {
        method,
        sf,
        preset,
        ebn0_db,
    } = *cell;
    let lb = LinkBudget::from_ebn0_db(sf, preset.channel, ebn0_db)?;
    let skip = |status| Ok(Row::skipped(method, sf, preset, ebn0_db, status));
    let mut stderr = None;
    let mut trials = None;
    let ser = match method {
        Method::Mc => {
            let r = simulate_ser(&lb, &cfg.mc)?;
            stderr = Some(r.stderr);
            trials = Some(r.trials_run);
            r.ser_hat
        }
        Method::Exact => match ser_exact_rician_with_limit(&lb, cfg.exact_max_sf) {
            Ok(v) => v.value,
            Err(Error::PrecisionLimit { .. }) => return skip(Status::SkippedPrecision),
            Err(e) => return Err(e.into()),
        },
        Method::Integral => match ser_numeric_integration(&lb) {
            Ok(v) => v,
            Err(Error::QuadratureBudget { .. }) => return skip(Status::SkippedQuadrature),
            Err(e) => return Err(e.into()),
        },
        Method::Upper => ser_upper(&lb).value,
        Method::Lower => ser_lower(&lb).value,
        Method::UpperExp | Method::LowerExp => {
            let r = if method == Method::UpperExp {
                ser_upper_exp(&lb)
            } else {
                ser_lower_exp(&lb)
            };
            match r {
                Ok(v) => v.value,
                Err(Error::Domain(_)) => return skip(Status::SkippedDomain),
                Err(e) => return Err(e.into()),
            }
        }
        Method::UpperRayleigh | Method::LowerRayleigh => {
            let s2 = preset.channel.sigma_h2();
            let r = if method == Method::UpperRayleigh {
                ser_upper_rayleigh(lb.params(), s2, lb.es_n0())?
            } else {
                ser_lower_rayleigh(lb.params(), s2, lb.es_n0())?
            };
            r.value
        }
    };
    Ok(Row {
        method,
        sf,
        k_factor: preset.k_factor,
        ebn0_db,
        ser: Some(ser),
        ber: Some(ber_from_ser(lb.params(), ser)?),
        stderr,
        trials,
        status: Status::Ok,
    })
}

/// Evaluates one row per (method, SF, preset, grid point).
///
/// Analytic cells are spread over `cfg.mc.parallel_workers` threads; Monte
/// Carlo cells run one after another, each parallel over its batches.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ErrorCurve, SweepError> {
    cfg.validate()?;
    let grid = cfg.ebn0_db.points();
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for &sf in &cfg.sf_list {
            for preset in &cfg.presets {
                for &ebn0_db in &grid {
                    cells.push(Cell {
                        method,
                        sf,
                        preset,
                        ebn0_db,
                    });
                }
            }
        }
    }
    let (mc_cells, analytic): (Vec<_>, Vec<_>) =
        cells.into_iter().partition(|c| c.method == Method::Mc);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.mc.parallel_workers)
        .build()
        .map_err(|e| config_error("mc.parallel_workers", e.to_string()))?;
    let mut rows = pool.install(|| {
        analytic
            .par_iter()
            .map(|c| evaluate(c, cfg))
            .collect::<Result<Vec<_>, _>>()
    })?;
    for c in &mc_cells {
        rows.push(evaluate(c, cfg)?);
    }
    Ok(ErrorCurve::new(rows))
}
