//! Flat Rician/Rayleigh block fading with additive white Gaussian noise.
//!
//! One complex tap `H ~ CN(mu_h, sigma_h2)` is drawn per symbol and applied to
//! every sample; noise samples are i.i.d. `CN(0, n0)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::signal::BasebandSymbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    mu_h: Complex64,
    sigma_h2: f64,
    n0: f64,
    noise_enabled: bool,
}

impl ChannelParams {
    pub fn new(mu_h: Complex64, sigma_h2: f64, n0: f64) -> Result<Self> {
        if !(mu_h.re.is_finite() && mu_h.im.is_finite()) {
            return Err(invalid("mu_h", "must be finite"));
        }
        if !sigma_h2.is_finite() || sigma_h2 < 0.0 {
            return Err(invalid(
                "sigma_h2",
                format!("{sigma_h2} must be finite and >= 0"),
            ));
        }
        if !n0.is_finite() || n0 <= 0.0 {
            return Err(invalid("n0", format!("{n0} must be finite and > 0")));
        }
        Ok(Self {
            mu_h,
            sigma_h2,
            n0,
            noise_enabled: true,
        })
    }

    /// Rician tap with the unit noise density convention (`n0 = 1`).
    pub fn rician(mu_h: Complex64, sigma_h2: f64) -> Result<Self> {
        Self::new(mu_h, sigma_h2, 1.0)
    }

    /// Zero-mean tap of variance `sigma_h2`.
    pub fn rayleigh(sigma_h2: f64) -> Result<Self> {
        Self::rician(Complex64::new(0.0, 0.0), sigma_h2)
    }

    /// Normalized preset with `E|H|² = 1` and real specular component:
    /// `|mu_h|² = K/(1+K)`, `sigma_h2 = 1/(1+K)`. `K = inf` gives a constant
    /// unit tap.
    pub fn from_k_factor(k: f64) -> Result<Self> {
        if k.is_nan() || k < 0.0 {
            return Err(invalid("k_factor", format!("{k} must be >= 0")));
        }
        if k.is_infinite() {
            return Self::rician(Complex64::new(1.0, 0.0), 0.0);
        }
        let mu = (k / (1.0 + k)).sqrt();
        Self::rician(Complex64::new(mu, 0.0), 1.0 / (1.0 + k))
    }

    /// Rescales the tap so that `sigma_h2 + |mu_h|² = 1`, keeping `K`.
    pub fn normalized(self) -> Result<Self> {
        let p = self.mean_power();
        if p <= 0.0 {
            return Err(Error::Domain(
                "cannot normalize a channel with zero mean power".into(),
            ));
        }
        Ok(Self {
            mu_h: self.mu_h / p.sqrt(),
            sigma_h2: self.sigma_h2 / p,
            ..self
        })
    }

    /// Same channel with the additive noise switched off (diagnostics only;
    /// the analytic routines keep using `n0`).
    pub fn without_noise(self) -> Self {
        Self {
            noise_enabled: false,
            ..self
        }
    }

    pub fn mu_h(&self) -> Complex64 {
        self.mu_h
    }

    pub fn sigma_h2(&self) -> f64 {
        self.sigma_h2
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn noise_enabled(&self) -> bool {
        self.noise_enabled
    }

    /// `|mu_h|²`
    pub fn specular_power(&self) -> f64 {
        self.mu_h.norm_sqr()
    }

    /// `E{|H|²} = sigma_h2 + |mu_h|²`
    pub fn mean_power(&self) -> f64 {
        self.sigma_h2 + self.specular_power()
    }

    /// `|mu_h|² / sigma_h2`, infinite for a deterministic tap.
    pub fn k_factor(&self) -> f64 {
        if self.sigma_h2 == 0.0 {
            f64::INFINITY
        } else {
            self.specular_power() / self.sigma_h2
        }
    }
}

/// Received samples of one symbol together with the realized tap.
#[derive(Debug, Clone, PartialEq)]
pub struct FadedObservation {
    pub samples: Vec<Complex64>,
    pub tap: Complex64,
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let sd = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

/// Draws one block-fading tap.
pub fn sample_tap<R: Rng + ?Sized>(ch: &ChannelParams, rng: &mut R) -> Complex64 {
    if ch.sigma_h2 == 0.0 {
        return ch.mu_h;
    }
    ch.mu_h + complex_gaussian(rng, ch.sigma_h2)
}

/// `samples[k] = H·x[k] + N[k]` with one tap for the whole symbol.
pub fn apply_channel<R: Rng + ?Sized>(
    ch: &ChannelParams,
    x: &BasebandSymbol,
    rng: &mut R,
) -> FadedObservation {
    let mut samples = vec![Complex64::new(0.0, 0.0); x.samples().len()];
    let tap = apply_channel_into(ch, x.samples(), rng, &mut samples)
        .expect("buffer sized from the symbol");
    FadedObservation { samples, tap }
}

/// Allocation-free [`apply_channel`]; returns the realized tap.
pub fn apply_channel_into<R: Rng + ?Sized>(
    ch: &ChannelParams,
    x: &[Complex64],
    rng: &mut R,
    out: &mut [Complex64],
) -> Result<Complex64> {
    if out.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: out.len(),
        });
    }
    let tap = sample_tap(ch, rng);
    if ch.noise_enabled {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = tap * xi + complex_gaussian(rng, ch.n0);
        }
    } else {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = tap * xi;
        }
    }
    Ok(tap)
}
