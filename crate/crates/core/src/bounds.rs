//! Two-region union bounds on the symbol error probability.
//!
//! Below the threshold `r* = E·N0·ln(M-1)` the conditional error probability
//! is bounded by one, above it by the union `(M-1)·exp(-r/(E·N0))`. Both
//! pieces integrate against the noncentral chi-square density in closed
//! form through the Marcum `Q1` function.

use crate::analytic::LinkBudget;
use crate::error::{invalid, Error, Result};
use crate::signal::LoRaParams;
use crate::specfun::{marcum_q1, marcum_q1_complement};

/// Arguments of the two Marcum functions appearing in the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcumArgs {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    /// Region split `E·N0·ln(M-1)`.
    pub r_star: f64,
    /// `s / sqrt(1 + σ0²/σ1²)`, the amplitude after rescaling the
    /// second-region integral to a noncentral chi-square density
    pub s_tilde: f64,
    /// `(1 + σ0²/σ1²) · r*`
    pub r_tilde_star: f64,
}

/// A bound clamped to `[0, 1]`, with the unclamped value kept for
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub raw: f64,
}

impl BoundValue {
    fn new(raw: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            raw,
        }
    }
}

fn ln_wrong_bins(m_size: usize) -> f64 {
    ((m_size - 1) as f64).ln()
}

/// Closed forms in `E/N0`, `|μ|²` and `σ²`.
pub fn marcum_args(lb: &LinkBudget) -> MarcumArgs {
    let x = lb.es_n0();
    let ch = lb.channel();
    let mu2 = ch.specular_power();
    let y = ch.sigma_h2() * x;
    let l = ln_wrong_bins(lb.m_size());

    let alpha1 = (2.0 * mu2 * x / (1.0 + y)).sqrt();
    let beta1 = (2.0 * l / (1.0 + y)).sqrt();
    let alpha2 = (2.0 * mu2 * x / ((1.0 + y) * (2.0 + y))).sqrt();
    let beta2 = (2.0 * l * (2.0 + y) / (1.0 + y)).sqrt();

    let e = lb.params().symbol_energy();
    let n0 = ch.n0();
    let r_star = e * n0 * l;
    // 1 + σ0²/σ1² = 2 + σ²·E/N0
    let c = 2.0 + y;
    MarcumArgs {
        alpha1,
        beta1,
        alpha2,
        beta2,
        r_star,
        s_tilde: lb.s() / c.sqrt(),
        r_tilde_star: c * r_star,
    }
}

struct Pieces {
    args: MarcumArgs,
    // 1 - Q1(α1, β1)
    region_one: f64,
    // (M-1)/(2+σ²E/N0) · exp(-|μ|²/(σ² + 2N0/E))
    prefactor: f64,
}

fn pieces(lb: &LinkBudget) -> Pieces {
    let args = marcum_args(lb);
    let x = lb.es_n0();
    let ch = lb.channel();
    let c = 2.0 + ch.sigma_h2() * x;
    let m1 = (lb.m_size() - 1) as f64;
    let region_one = marcum_q1_complement(args.alpha1, args.beta1).expect("nonnegative arguments");
    let prefactor = m1 / c * (-ch.specular_power() * x / c).exp();
    Pieces {
        args,
        region_one,
        prefactor,
    }
}

fn q1(a: f64, b: f64) -> f64 {
    marcum_q1(a, b).expect("nonnegative arguments")
}

fn check_exp_domain(args: &MarcumArgs) -> Result<()> {
    if args.beta2 > args.alpha2 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "exponential Marcum bound needs beta2 > alpha2 (beta2={}, alpha2={})",
            args.beta2, args.alpha2
        )))
    }
}

/// Union upper bound.
pub fn ser_upper(lb: &LinkBudget) -> BoundValue {
    let p = pieces(lb);
    BoundValue::new(p.region_one + p.prefactor * q1(p.args.alpha2, p.args.beta2))
}

/// Union lower bound; every term is half of the upper bound's.
pub fn ser_lower(lb: &LinkBudget) -> BoundValue {
    let p = pieces(lb);
    BoundValue::new(0.5 * p.region_one + 0.5 * p.prefactor * q1(p.args.alpha2, p.args.beta2))
}

/// Upper bound with `Q1(α2, β2) <= exp(-(β2-α2)²/2)`.
pub fn ser_upper_exp(lb: &LinkBudget) -> Result<BoundValue> {
    let p = pieces(lb);
    check_exp_domain(&p.args)?;
    let d = p.args.beta2 - p.args.alpha2;
    Ok(BoundValue::new(
        p.region_one + p.prefactor * (-0.5 * d * d).exp(),
    ))
}

/// Lower bound with `Q1(α2, β2) >= exp(-(β2+α2)²/2)`.
pub fn ser_lower_exp(lb: &LinkBudget) -> Result<BoundValue> {
    let p = pieces(lb);
    check_exp_domain(&p.args)?;
    let d = p.args.beta2 + p.args.alpha2;
    Ok(BoundValue::new(
        0.5 * p.region_one + 0.5 * p.prefactor * (-0.5 * d * d).exp(),
    ))
}

fn rayleigh_upper_raw(params: &LoRaParams, sigma_h2: f64, es_n0: f64) -> Result<f64> {
    if !sigma_h2.is_finite() || sigma_h2 <= 0.0 {
        return Err(invalid(
            "sigma_h2",
            format!("{sigma_h2} must be finite and > 0"),
        ));
    }
    if !es_n0.is_finite() || es_n0 < 0.0 {
        return Err(invalid("es_n0", format!("{es_n0} must be finite and >= 0")));
    }
    let y = sigma_h2 * es_n0;
    let t = -ln_wrong_bins(params.m_size()) / (1.0 + y);
    // 1 + (1/(2+y) - 1)·e^t, arranged to avoid cancellation
    Ok(-t.exp_m1() + t.exp() / (2.0 + y))
}

/// Upper bound for Rayleigh fading (`μ = 0`).
pub fn ser_upper_rayleigh(params: &LoRaParams, sigma_h2: f64, es_n0: f64) -> Result<BoundValue> {
    Ok(BoundValue::new(rayleigh_upper_raw(
        params, sigma_h2, es_n0,
    )?))
}

/// Lower bound for Rayleigh fading, half of the upper one.
pub fn ser_lower_rayleigh(params: &LoRaParams, sigma_h2: f64, es_n0: f64) -> Result<BoundValue> {
    Ok(BoundValue::new(
        0.5 * rayleigh_upper_raw(params, sigma_h2, es_n0)?,
    ))
}
