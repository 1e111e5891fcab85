//! Exact and numerically integrated symbol error probabilities of the FFT
//! detector under flat Rician block fading.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};

use crate::channel::ChannelParams;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::signal::LoRaParams;
use crate::specfun::{log_binomial, NoncentralChi2};

/// Largest spreading factor accepted by [`ser_exact_rician`] by default.
pub const DEFAULT_EXACT_MAX_SF: u32 = 7;

/// A modulation and channel operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    params: LoRaParams,
    ch: ChannelParams,
    es_n0: f64,
}

impl LinkBudget {
    /// Symbol energy and noise density are taken from `params` and `ch`.
    pub fn new(params: LoRaParams, ch: ChannelParams) -> Result<Self> {
        let es_n0 = params.symbol_energy() / ch.n0();
        if !es_n0.is_finite() {
            return Err(invalid("es_n0", format!("{es_n0} must be finite")));
        }
        Ok(Self { params, ch, es_n0 })
    }

    /// Builds the point `E = SF · Eb` with `Eb/N0` given in dB.
    pub fn from_ebn0_db(sf: u32, ch: ChannelParams, ebn0_db: f64) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return Err(invalid("ebn0_db", format!("{ebn0_db} must be finite")));
        }
        let es_n0 = f64::from(sf) * 10f64.powf(ebn0_db / 10.0);
        Self::from_es_n0(sf, ch, es_n0)
    }

    pub fn from_es_n0(sf: u32, ch: ChannelParams, es_n0: f64) -> Result<Self> {
        if !es_n0.is_finite() || es_n0 < 0.0 {
            return Err(invalid("es_n0", format!("{es_n0} must be finite and >= 0")));
        }
        let params = LoRaParams::new(sf, es_n0 * ch.n0())?;
        Ok(Self { params, ch, es_n0 })
    }

    pub fn params(&self) -> &LoRaParams {
        &self.params
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }

    /// Linear `E/N0`.
    pub fn es_n0(&self) -> f64 {
        self.es_n0
    }

    pub fn m_size(&self) -> usize {
        self.params.m_size()
    }

    /// Component variance of the correct-bin metric, `(E²σ² + E·N0)/2`.
    pub fn sigma0_2(&self) -> f64 {
        let e = self.params.symbol_energy();
        0.5 * (e * e * self.ch.sigma_h2() + e * self.ch.n0())
    }

    /// Component variance of the wrong-bin metrics, `E·N0/2`.
    pub fn sigma1_2(&self) -> f64 {
        0.5 * self.params.symbol_energy() * self.ch.n0()
    }

    /// Noncentrality amplitude `E·|μ|`.
    pub fn s(&self) -> f64 {
        self.params.symbol_energy() * self.ch.mu_h().norm()
    }

    pub fn mu1(&self) -> f64 {
        self.params.symbol_energy() * self.ch.mu_h().re
    }

    pub fn mu2(&self) -> f64 {
        self.params.symbol_energy() * self.ch.mu_h().im
    }

    /// Distribution of the correct-bin metric.
    pub fn decision_metric(&self) -> Result<NoncentralChi2> {
        NoncentralChi2::new(self.s(), self.sigma0_2())
    }
}

/// Value of the exact alternating sum with accuracy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSer {
    pub value: f64,
    pub estimated_rel_error: f64,
    /// Set when the estimated relative error exceeds `1e-8`.
    pub cancellation_limited: bool,
    /// Working precision of the accumulation (53 when plain `f64` sufficed).
    pub precision_bits: usize,
}

/// Exact SER of the detector under Rician fading, refusing SF above
/// [`DEFAULT_EXACT_MAX_SF`].
pub fn ser_exact_rician(lb: &LinkBudget) -> Result<ExactSer> {
    ser_exact_rician_with_limit(lb, DEFAULT_EXACT_MAX_SF)
}

/// Same as [`ser_exact_rician`] with a caller-chosen SF limit.
pub fn ser_exact_rician_with_limit(lb: &LinkBudget, max_sf: u32) -> Result<ExactSer> {
    let sf = lb.params.sf();
    if sf > max_sf {
        return Err(Error::PrecisionLimit { sf, max_sf });
    }
    let x = lb.es_n0;
    Ok(alternating_sum(
        lb.m_size() as u64 - 1,
        lb.ch.sigma_h2() * x,
        lb.ch.specular_power() * x,
    ))
}

/// SER of noncoherent orthogonal detection without fading.
pub fn ser_noncoherent(params: &LoRaParams, es_n0: f64) -> Result<f64> {
    if !es_n0.is_finite() || es_n0 < 0.0 {
        return Err(invalid("es_n0", format!("{es_n0} must be finite and >= 0")));
    }
    Ok(alternating_sum(params.m_size() as u64 - 1, 0.0, es_n0).value)
}

/// `Σ_{n=1}^{N} (-1)^{n+1} C(N,n) / d_n · exp(-n·b / d_n)` with
/// `d_n = (n+1) + n·a`.
fn alternating_sum(n_max: u64, a: f64, b: f64) -> ExactSer {
    if n_max == 0 {
        return ExactSer {
            value: 0.0,
            estimated_rel_error: 0.0,
            cancellation_limited: false,
            precision_bits: 53,
        };
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut magnitude = 0.0f64;
    let mut rounding = 0.0f64;
    for n in 1..=n_max {
        let nf = n as f64;
        let d = (nf + 1.0) + nf * a;
        let lb = log_binomial(n_max, n).expect("n <= n_max");
        let ld = d.ln();
        let expo = nf * b / d;
        let t = (lb - ld - expo).exp();
        let t = if n % 2 == 1 { t } else { -t };
        // Neumaier
        let s = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
        magnitude += t.abs();
        rounding += t.abs() * (lb.abs() + ld.abs() + expo + 4.0);
    }
    let value = sum + comp;
    let est_abs = (rounding + value.abs()) * f64::EPSILON;
    if value > 0.0 && est_abs <= 1e-13 * value {
        return finish(value, est_abs, 53);
    }
    alternating_sum_mp(n_max, a, b, magnitude)
}

fn finish(value: f64, est_abs: f64, precision_bits: usize) -> ExactSer {
    let value = value.clamp(0.0, 1.0);
    let estimated_rel_error = if value > 0.0 {
        est_abs / value
    } else {
        f64::INFINITY
    };
    ExactSer {
        value,
        estimated_rel_error,
        cancellation_limited: estimated_rel_error > 1e-8,
        precision_bits,
    }
}

const MAX_PRECISION_BITS: usize = 1 << 17;

/// Multiprecision evaluation, raising the working precision until the
/// rounding bound is far below the result.
fn alternating_sum_mp(n_max: u64, a: f64, b: f64, magnitude: f64) -> ExactSer {
    let log2_mag = magnitude.max(1.0).log2().ceil() as usize;
    let mut p = round_bits(log2_mag + 128);
    let mut cc = Consts::new().expect("constant cache");
    loop {
        let value = mp_sum(n_max, a, b, p, &mut cc);
        // each of ~4 roundings per term contributes 2^-p of |t|
        let est_abs = magnitude * 4.0 * n_max as f64 * (-(p as f64)).exp2();
        let settled = value > 0.0 && est_abs <= 1e-17 * value;
        if settled || p >= MAX_PRECISION_BITS {
            return finish(value, est_abs, p);
        }
        let need = if value > 0.0 {
            (est_abs / (1e-17 * value)).log2().ceil() as usize + 64
        } else {
            p
        };
        p = round_bits(p + need).min(MAX_PRECISION_BITS);
    }
}

fn round_bits(p: usize) -> usize {
    p.div_ceil(64) * 64
}

fn mp_sum(n_max: u64, a: f64, b: f64, p: usize, cc: &mut Consts) -> f64 {
    let rm = RoundingMode::ToEven;
    let big_a = BigFloat::from_f64(a, p);
    let big_b = BigFloat::from_f64(b, p);
    let mut binom = BigFloat::from_u64(1, p);
    let mut sum = BigFloat::from_u64(0, p);
    for n in 1..=n_max {
        binom = binom.mul(&BigFloat::from_u64(n_max - n + 1, p), p, rm).div(
            &BigFloat::from_u64(n, p),
            p,
            rm,
        );
        let big_n = BigFloat::from_u64(n, p);
        let d = BigFloat::from_u64(n + 1, p).add(&big_n.mul(&big_a, p, rm), p, rm);
        let mut expo = big_n.mul(&big_b, p, rm).div(&d, p, rm);
        expo.inv_sign();
        let t = binom.div(&d, p, rm).mul(&expo.exp(p, rm, cc), p, rm);
        sum = if n % 2 == 1 {
            sum.add(&t, p, rm)
        } else {
            sum.sub(&t, p, rm)
        };
    }
    big_to_f64(&sum)
}

fn big_to_f64(x: &BigFloat) -> f64 {
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // value = 0.m · 2^exponent, most significant word last
    let word_scale = (-(Word::BITS as f64)).exp2();
    let mut frac = 0.0f64;
    let mut scale = word_scale;
    for &w in words.iter().rev().take(4) {
        frac += w as f64 * scale;
        scale *= word_scale;
    }
    let mut v = frac;
    let mut e = exponent;
    // apply 2^e in steps to stay within the f64 exponent range
    while e > 0 {
        let step = e.min(1000);
        v *= f64::from(step).exp2();
        e -= step;
    }
    while e < 0 {
        let step = e.max(-1000);
        v *= f64::from(step).exp2();
        e -= step;
    }
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

const INTEGRATION_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-11,
    max_subdivisions: 4000,
};

/// SER from integrating the correct-bin density against the probability
/// that some wrong bin exceeds it.
///
/// The integration variable is the metric scaled by `E·N0`, so the wrong-bin
/// metrics are unit exponentials and the correct one is noncentral
/// chi-square with amplitude `|μ|·sqrt(E/N0)` and component variance
/// `(σ²·E/N0 + 1)/2`.
pub fn ser_numeric_integration(lb: &LinkBudget) -> Result<f64> {
    let x = lb.es_n0;
    let m = lb.m_size() as f64;
    let s = lb.ch.mu_h().norm() * x.sqrt();
    let var = 0.5 * (lb.ch.sigma_h2() * x + 1.0);
    let dist = NoncentralChi2::new(s, var)?;
    let ln_wrong = (m - 1.0).ln();

    let wrong_tail = ln_wrong + 50.0;
    let mut density_tail = (s + 12.0 * var.sqrt()).powi(2);
    while dist.sf(density_tail)? > 1e-17 {
        density_tail *= 2.0;
    }
    let u_hi = wrong_tail.min(density_tail);

    let integrand = |u: f64| {
        let miss = -((m - 1.0) * (-(-u).exp()).ln_1p()).exp_m1();
        dist.pdf_unchecked(u) * miss
    };
    let r = integrate(integrand, 0.0, u_hi, &[ln_wrong, s * s], INTEGRATION_TOL)?;
    Ok(r.clamp(0.0, 1.0))
}

/// BER of orthogonal signaling, `SER · 2^{SF-1} / (2^{SF} - 1)`.
pub fn ber_from_ser(params: &LoRaParams, ser: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&ser) {
        return Err(invalid("ser", format!("{ser} must lie in [0, 1]")));
    }
    let m = params.m_size() as f64;
    Ok(ser * (0.5 * m) / (m - 1.0))
}
