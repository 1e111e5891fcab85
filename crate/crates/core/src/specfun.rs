//! Special functions behind the analytic error probabilities: log-binomials,
//! the exponentially scaled Bessel `I0`, the Marcum `Q1` function and the
//! 2-degree-of-freedom noncentral chi-square distribution.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

// ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2π)] for n = 0..=15
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_094,
    0.027_677_925_684_998_339_149,
    0.020_790_672_103_765_093_112,
    0.016_644_691_189_821_192_163,
    0.013_876_128_823_070_747_999,
    0.011_896_709_945_891_770_095,
    0.010_411_265_261_972_096_497,
    0.009_255_462_182_712_732_917_7,
    0.008_330_563_433_362_871_256_5,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_865_7,
    0.006_408_994_188_004_207_068_4,
    0.005_951_370_112_758_847_735_6,
    0.005_554_733_551_962_801_371,
];

/// Error of Stirling's approximation to `ln(n!)`, for `n >= 1`.
fn stirlerr(n: u64) -> f64 {
    if n < 16 {
        return STIRLERR_TABLE[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x/np) + np - x`, accurate when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Poisson probability mass `e^{-λ} λ^k / k!` without overflow or large
/// cancellation in the exponent.
pub(crate) fn poisson_pmf(k: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    let x = k as f64;
    (-stirlerr(k) - bd0(x, lambda)).exp() / (2.0 * PI * x).sqrt()
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 20 {
        // exact in f64 up to 20!
        let f: f64 = (2..=n).map(|i| i as f64).product();
        return f.ln();
    }
    let x = n as f64;
    (x + 0.5) * x.ln() - x + LN_SQRT_2PI + stirlerr(n)
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!(
            "log_binomial needs k <= n (n={n}, k={k})"
        )));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

// Above this the asymptotic series reaches full double precision.
const I0_SERIES_LIMIT: f64 = 30.0;

/// `exp(-x) · I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel_i0_scaled needs x >= 0, got {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x < I0_SERIES_LIMIT {
        i0_series(x) * (-x).exp()
    } else {
        i0e_asymptotic(x)
    })
}

/// Power series `Σ (x²/4)^k / (k!)²`; all terms positive.
fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// `e^{-x} I0(x) ~ (2πx)^{-1/2} Σ ((2k-1)!!)² / (k! (8x)^k)`.
fn i0e_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if next >= term || next <= sum * 1e-17 {
            sum += next;
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * PI * x).sqrt()
}

fn check_marcum_args(a: f64, b: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "Marcum Q1 needs a, b >= 0, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// First-order Marcum Q function `Q1(a, b)`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    check_marcum_args(a, b)?;
    Ok(marcum_pair(a, b).0)
}

/// `1 - Q1(a, b)`, computed without cancellation when it is small.
pub fn marcum_q1_complement(a: f64, b: f64) -> Result<f64> {
    check_marcum_args(a, b)?;
    Ok(marcum_pair(a, b).1)
}

const MIX_EPS: f64 = 1e-17;
const MIX_MAX_TERMS: usize = 50_000_000;

/// Returns `(Q1(a,b), 1 - Q1(a,b))`.
///
/// With `λ = a²/2` and `μ = b²/2`,
/// `Q1 = Σ_k Pois(k; λ) · P(Pois(μ) <= k)` and
/// `1 - Q1 = Σ_k Pois(k; λ) · P(Pois(μ) > k)`.
/// Whichever of the two is the smaller side is summed directly (all terms
/// positive, Poisson weights anchored in the log domain near their mode);
/// the other is its complement.
fn marcum_pair(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0);
    }
    if b.is_infinite() {
        return (0.0, 1.0);
    }
    let mu = 0.5 * b * b;
    if a == 0.0 {
        return ((-mu).exp(), -(-mu).exp_m1());
    }
    if a.is_infinite() {
        return (1.0, 0.0);
    }
    let lambda = 0.5 * a * a;
    if b * b >= a * a + 2.0 {
        let q = mixture_with_cdf(lambda, mu).min(1.0);
        (q, 1.0 - q)
    } else {
        let p = mixture_with_sf(lambda, mu).min(1.0);
        (1.0 - p, p)
    }
}

/// `Σ_k Pois(k; λ) · P(Pois(μ) <= k)`, for `μ >= λ + 1`.
fn mixture_with_cdf(lambda: f64, mu: f64) -> f64 {
    let spread = lambda.sqrt();
    let k_lo = (lambda - 10.0 * spread - 10.0).floor().max(0.0) as u64;

    // P(Pois(μ) <= k_lo): pmf decreases going down since k_lo < μ.
    let p_start = poisson_pmf(k_lo, mu);
    let mut cdf = p_start;
    {
        let mut p = p_start;
        let mut j = k_lo;
        while j > 0 && p > 0.0 {
            let r = j as f64 / mu;
            p *= r;
            j -= 1;
            cdf += p;
            if p * r / (1.0 - r) <= MIX_EPS * cdf {
                break;
            }
        }
    }

    let mut w = poisson_pmf(k_lo, lambda);
    let mut p = p_start;
    let mut k = k_lo;
    let mut sum = w * cdf;
    let mut prev = sum;
    for _ in 0..MIX_MAX_TERMS {
        let next = k + 1;
        w *= lambda / next as f64;
        if w == 0.0 && (next as f64) < lambda {
            w = poisson_pmf(next, lambda);
        }
        p *= mu / next as f64;
        if p == 0.0 && (next as f64) < mu {
            p = poisson_pmf(next, mu);
        }
        cdf = (cdf + p).min(1.0);
        k = next;
        let t = w * cdf;
        sum += t;
        if k as f64 >= lambda && t <= MIX_EPS * sum {
            if t == 0.0 {
                break;
            }
            let r = t / prev;
            if r < 1.0 && t * r / (1.0 - r) <= MIX_EPS * sum {
                break;
            }
        }
        prev = t;
    }
    sum
}

/// `Σ_k Pois(k; λ) · P(Pois(μ) > k)`, for `μ < λ + 1`.
fn mixture_with_sf(lambda: f64, mu: f64) -> f64 {
    let spread = lambda.sqrt();
    let k_hi = (lambda + 10.0 * spread + 10.0).ceil() as u64;

    // P(Pois(μ) > k_hi): pmf decreases going up since k_hi > μ.
    let p_top = poisson_pmf(k_hi, mu);
    let mut sf = 0.0;
    {
        let mut p = p_top;
        let mut j = k_hi;
        loop {
            j += 1;
            let r = mu / j as f64;
            p *= r;
            sf += p;
            if p == 0.0 || p * r / (1.0 - r) <= MIX_EPS * sf {
                break;
            }
        }
    }

    let mut w = poisson_pmf(k_hi, lambda);
    let mut p = p_top;
    let mut k = k_hi;
    let mut sum = w * sf;
    let mut prev = sum;
    while k > 0 {
        // P(Pois(μ) > k-1) = P(Pois(μ) > k) + p_k
        sf = (sf + p).min(1.0);
        w *= k as f64 / lambda;
        if w == 0.0 && (k as f64 - 1.0) > lambda {
            w = poisson_pmf(k - 1, lambda);
        }
        p *= k as f64 / mu;
        if p == 0.0 && (k as f64 - 1.0) > mu {
            p = poisson_pmf(k - 1, mu);
        }
        k -= 1;
        let t = w * sf;
        sum += t;
        if (k as f64) <= lambda && t <= MIX_EPS * sum {
            if t == 0.0 {
                break;
            }
            let r = t / prev;
            if r < 1.0 && t * r / (1.0 - r) <= MIX_EPS * sum {
                break;
            }
        }
        prev = t;
    }
    sum
}

/// Squared magnitude of a complex Gaussian with mean amplitude `s` and
/// per-component variance `sigma0_2`: noncentral chi-square, 2 degrees of
/// freedom, noncentrality `s²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChi2 {
    s: f64,
    sigma0_2: f64,
}

impl NoncentralChi2 {
    pub fn new(s: f64, sigma0_2: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(invalid("s", format!("{s} must be finite and >= 0")));
        }
        if !sigma0_2.is_finite() || sigma0_2 <= 0.0 {
            return Err(invalid(
                "sigma0_2",
                format!("{sigma0_2} must be finite and > 0"),
            ));
        }
        Ok(Self { s, sigma0_2 })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn sigma0_2(&self) -> f64 {
        self.sigma0_2
    }

    fn check_r(r: f64) -> Result<()> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!(
                "noncentral chi-square needs r >= 0, got {r}"
            )));
        }
        Ok(())
    }

    /// `F(r) = 1 - Q1(s/σ0, sqrt(r)/σ0)`
    pub fn cdf(&self, r: f64) -> Result<f64> {
        Self::check_r(r)?;
        let sd = self.sigma0_2.sqrt();
        Ok(marcum_pair(self.s / sd, r.sqrt() / sd).1)
    }

    /// `1 - F(r)`
    pub fn sf(&self, r: f64) -> Result<f64> {
        Self::check_r(r)?;
        let sd = self.sigma0_2.sqrt();
        Ok(marcum_pair(self.s / sd, r.sqrt() / sd).0)
    }

    /// `(1/2σ0²) exp(-(s²+r)/2σ0²) I0(s√r/σ0²)`, evaluated as
    /// `(1/2σ0²) exp(-(√r-s)²/2σ0²) · e^{-z} I0(z)` so that large `z` cannot
    /// overflow.
    pub fn pdf(&self, r: f64) -> Result<f64> {
        Self::check_r(r)?;
        Ok(self.pdf_unchecked(r))
    }

    pub(crate) fn pdf_unchecked(&self, r: f64) -> f64 {
        let two_var = 2.0 * self.sigma0_2;
        let root = r.sqrt();
        let z = self.s * root / self.sigma0_2;
        let d = root - self.s;
        let i0e = if z < I0_SERIES_LIMIT {
            i0_series(z) * (-z).exp()
        } else {
            i0e_asymptotic(z)
        };
        (-d * d / two_var).exp() * i0e / two_var
    }
}
