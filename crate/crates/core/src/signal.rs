//! Discrete-time LoRa baseband modulation and FFT-based noncoherent detection.
//!
//! A symbol `m` of spreading factor `SF` is the `M = 2^SF` sample chirp
//!
//! ```text
//! x_m[k] = sqrt(E/M) · (-1)^k · exp(iπk²/M) · exp(i2πmk/M)
//! ```
//!
//! De-chirping multiplies by the conjugate up-chirp `x_0`, which turns the
//! symbol into a single tone at bin `m`; the detector picks the bin with the
//! largest squared DFT magnitude.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Largest supported spreading factor.
pub const MAX_SF: u32 = 16;

/// Spreading factor, symbol energy and the cached per-SF tables.
///
/// Cloning is cheap: the chirp, tone table and FFT plan are shared.
#[derive(Clone)]
pub struct LoRaParams {
    sf: u32,
    symbol_energy: f64,
    // (-1)^k exp(iπk²/M), unit amplitude
    chirp: Arc<[Complex64]>,
    // exp(i2πj/M), j = 0..M
    tones: Arc<[Complex64]>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for LoRaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoRaParams")
            .field("sf", &self.sf)
            .field("m_size", &self.m_size())
            .field("symbol_energy", &self.symbol_energy)
            .finish()
    }
}

impl PartialEq for LoRaParams {
    fn eq(&self, other: &Self) -> bool {
        self.sf == other.sf && self.symbol_energy == other.symbol_energy
    }
}

impl LoRaParams {
    /// `sf` in `1..=16`; `symbol_energy` finite and non-negative.
    pub fn new(sf: u32, symbol_energy: f64) -> Result<Self> {
        if !(1..=MAX_SF).contains(&sf) {
            return Err(invalid("sf", format!("{sf} is outside 1..={MAX_SF}")));
        }
        check_energy(symbol_energy)?;
        let m_size = 1usize << sf;
        let m = m_size as u64;

        // (-1)^k exp(iπk²/M) = exp(iπ·k(k+M)/M); reduce k(k+M) mod 2M in
        // integers so every sample costs one sin_cos of a phase in [0, 2π).
        let chirp: Arc<[Complex64]> = (0..m)
            .map(|k| {
                let j = (k * (k + m)) % (2 * m);
                unit_phasor(PI * j as f64 / m as f64)
            })
            .collect();
        let tones: Arc<[Complex64]> = (0..m)
            .map(|j| unit_phasor(2.0 * PI * j as f64 / m as f64))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m_size);

        Ok(Self {
            sf,
            symbol_energy,
            chirp,
            tones,
            fft,
        })
    }

    /// Same SF (and shared tables) with a different symbol energy.
    pub fn with_energy(&self, symbol_energy: f64) -> Result<Self> {
        check_energy(symbol_energy)?;
        Ok(Self {
            symbol_energy,
            ..self.clone()
        })
    }

    pub fn sf(&self) -> u32 {
        self.sf
    }

    /// Constellation size `M = 2^SF`.
    pub fn m_size(&self) -> usize {
        1usize << self.sf
    }

    pub fn symbol_energy(&self) -> f64 {
        self.symbol_energy
    }

    /// Bits per complex dimension, `SF / M`.
    pub fn spectral_efficiency(&self) -> f64 {
        self.sf as f64 / self.m_size() as f64
    }

    /// Per-sample amplitude `sqrt(E/M)`.
    pub fn amplitude(&self) -> f64 {
        (self.symbol_energy / self.m_size() as f64).sqrt()
    }

    /// Unit-amplitude up-chirp `(-1)^k exp(iπk²/M)`.
    pub fn unit_chirp(&self) -> &[Complex64] {
        &self.chirp
    }
}

fn check_energy(e: f64) -> Result<()> {
    if !e.is_finite() || e < 0.0 {
        return Err(invalid(
            "symbol_energy",
            format!("{e} is not finite and non-negative"),
        ));
    }
    Ok(())
}

fn unit_phasor(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// Index of a constellation point, `m = Σ b_j 2^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolIndex(pub usize);

impl SymbolIndex {
    /// Packs an SF-bit tuple `(b_0, ..., b_{SF-1})`, least significant first.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_SF as usize {
            return Err(invalid(
                "bits",
                format!("tuple length {} is outside 1..={MAX_SF}", bits.len()),
            ));
        }
        let m = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | (usize::from(b) << j));
        Ok(Self(m))
    }

    /// Unpacks into `sf` bits, least significant first.
    pub fn to_bits(self, sf: u32) -> Vec<bool> {
        (0..sf).map(|j| (self.0 >> j) & 1 == 1).collect()
    }

    pub fn value(self) -> usize {
        self.0
    }
}

/// One transmitted LoRa symbol: `M` constant-envelope complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSymbol {
    samples: Vec<Complex64>,
}

impl BasebandSymbol {
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Squared magnitudes of the de-chirped DFT, one per candidate symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMetrics {
    bins: Vec<f64>,
}

impl DecisionMetrics {
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(invalid("bins", "decision metrics must be nonempty"));
        }
        if let Some(b) = bins.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(invalid("bins", format!("entry {b} is not >= 0")));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Generates the baseband samples of symbol `m`.
pub fn modulate(params: &LoRaParams, m: SymbolIndex) -> Result<BasebandSymbol> {
    let mut samples = vec![Complex64::new(0.0, 0.0); params.m_size()];
    modulate_into(params, m, &mut samples)?;
    Ok(BasebandSymbol { samples })
}

/// Allocation-free [`modulate`]; `out` must hold exactly `M` samples.
pub fn modulate_into(params: &LoRaParams, m: SymbolIndex, out: &mut [Complex64]) -> Result<()> {
    let m_size = params.m_size();
    if m.0 >= m_size {
        return Err(Error::SymbolOutOfRange { index: m.0, m_size });
    }
    if out.len() != m_size {
        return Err(Error::LengthMismatch {
            expected: m_size,
            actual: out.len(),
        });
    }
    let amp = params.amplitude();
    let mask = m_size - 1;
    for (k, (o, c)) in out.iter_mut().zip(params.chirp.iter()).enumerate() {
        *o = c * params.tones[(m.0 * k) & mask] * amp;
    }
    Ok(())
}

/// De-chirps `received` with the conjugate up-chirp and returns the squared
/// DFT magnitude of every bin.
pub fn dechirp_dft(params: &LoRaParams, received: &[Complex64]) -> Result<DecisionMetrics> {
    let mut dechirper = Dechirper::new(params);
    let mut bins = vec![0.0; params.m_size()];
    dechirper.process(received, &mut bins)?;
    Ok(DecisionMetrics { bins })
}

/// Index of the largest bin; ties go to the lowest index.
pub fn detect(metrics: &DecisionMetrics) -> SymbolIndex {
    SymbolIndex(argmax(&metrics.bins))
}

fn argmax(bins: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = bins[0];
    for (i, &v) in bins.iter().enumerate().skip(1) {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Reusable de-chirp + FFT workspace for hot loops.
pub struct Dechirper {
    params: LoRaParams,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Dechirper {
    pub fn new(params: &LoRaParams) -> Self {
        let m_size = params.m_size();
        let scratch_len = params.fft.get_inplace_scratch_len();
        Self {
            params: params.clone(),
            buf: vec![Complex64::new(0.0, 0.0); m_size],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// Writes `|DFT{received · conj(x_0)}|²` into `bins`.
    pub fn process(&mut self, received: &[Complex64], bins: &mut [f64]) -> Result<()> {
        self.transform(received)?;
        if bins.len() != self.buf.len() {
            return Err(Error::LengthMismatch {
                expected: self.buf.len(),
                actual: bins.len(),
            });
        }
        for (b, v) in bins.iter_mut().zip(&self.buf) {
            *b = v.norm_sqr();
        }
        Ok(())
    }

    /// De-chirp, transform and pick the argmax without materializing bins.
    pub fn detect(&mut self, received: &[Complex64]) -> Result<SymbolIndex> {
        self.transform(received)?;
        let mut best = 0;
        let mut best_val = self.buf[0].norm_sqr();
        for (i, v) in self.buf.iter().enumerate().skip(1) {
            let p = v.norm_sqr();
            if p > best_val {
                best = i;
                best_val = p;
            }
        }
        Ok(SymbolIndex(best))
    }

    fn transform(&mut self, received: &[Complex64]) -> Result<()> {
        if received.len() != self.buf.len() {
            return Err(Error::LengthMismatch {
                expected: self.buf.len(),
                actual: received.len(),
            });
        }
        let amp = self.params.amplitude();
        for ((v, y), c) in self
            .buf
            .iter_mut()
            .zip(received)
            .zip(self.params.chirp.iter())
        {
            *v = y * c.conj() * amp;
        }
        self.params
            .fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_bins(params: &LoRaParams, received: &[Complex64]) -> Vec<f64> {
        let m = params.m_size();
        let amp = params.amplitude();
        (0..m)
            .map(|bin| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, r) in received.iter().enumerate() {
                    let v = r * (params.unit_chirp()[k] * amp).conj();
                    let idx = (bin * k) % m;
                    let tw = unit_phasor(-2.0 * PI * idx as f64 / m as f64);
                    acc += v * tw;
                }
                acc.norm_sqr()
            })
            .collect()
    }

    #[test]
    fn first_sample_is_real_amplitude() {
        let p = LoRaParams::new(5, 1.0).unwrap();
        let x = modulate(&p, SymbolIndex(0)).unwrap();
        assert_eq!(x.samples()[0], Complex64::new((1.0f64 / 32.0).sqrt(), 0.0));
    }

    #[test]
    fn constant_envelope() {
        let p = LoRaParams::new(7, 4.0).unwrap();
        let x = modulate(&p, SymbolIndex(5)).unwrap();
        let want = (4.0f64 / 128.0).sqrt();
        for z in x.samples() {
            assert!((z.norm() - want).abs() <= 1e-12 * want);
        }
        assert!((x.energy() - 4.0).abs() <= 4.0 * 1e-12);
    }

    #[test]
    fn out_of_range_symbol() {
        let p = LoRaParams::new(3, 1.0).unwrap();
        assert_eq!(
            modulate(&p, SymbolIndex(8)),
            Err(Error::SymbolOutOfRange {
                index: 8,
                m_size: 8
            })
        );
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LoRaParams::new(0, 1.0).is_err());
        assert!(LoRaParams::new(17, 1.0).is_err());
        assert!(LoRaParams::new(7, -1.0).is_err());
        assert!(LoRaParams::new(7, f64::NAN).is_err());
    }

    #[test]
    fn spectral_efficiency_is_sf_over_m() {
        for sf in 1..=12 {
            let p = LoRaParams::new(sf, 1.0).unwrap();
            assert_eq!(p.m_size(), 1 << sf);
            assert_eq!(p.spectral_efficiency(), sf as f64 / (1u64 << sf) as f64);
        }
    }

    #[test]
    fn tone_relation_holds() {
        let p = LoRaParams::new(6, 2.0).unwrap();
        let x0 = modulate(&p, SymbolIndex(0)).unwrap();
        let x9 = modulate(&p, SymbolIndex(9)).unwrap();
        for k in 0..64 {
            let tone = unit_phasor(2.0 * PI * (9 * k) as f64 / 64.0);
            let d = x9.samples()[k] - x0.samples()[k] * tone;
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn zero_input_gives_zero_bins() {
        let p = LoRaParams::new(4, 1.0).unwrap();
        let m = dechirp_dft(&p, &[Complex64::new(0.0, 0.0); 16]).unwrap();
        assert!(m.bins().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn noiseless_symbol_lands_in_one_bin() {
        let e = 3.0;
        let p = LoRaParams::new(6, e).unwrap();
        for m in [0, 1, 17, 63] {
            let x = modulate(&p, SymbolIndex(m)).unwrap();
            let bins = dechirp_dft(&p, x.samples()).unwrap();
            for (i, &b) in bins.bins().iter().enumerate() {
                if i == m {
                    assert!((b - e * e).abs() <= 1e-12 * e * e);
                } else {
                    assert!(b <= 1e-12 * e * e, "bin {i} leaked {b}");
                }
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let p = LoRaParams::new(4, 1.0).unwrap();
        assert_eq!(
            dechirp_dft(&p, &[Complex64::new(0.0, 0.0); 15]),
            Err(Error::LengthMismatch {
                expected: 16,
                actual: 15
            })
        );
    }

    #[test]
    fn detect_unique_and_ties() {
        let m = DecisionMetrics::from_bins(vec![0.0, 0.0, 9.0, 0.0]).unwrap();
        assert_eq!(detect(&m), SymbolIndex(2));
        let m = DecisionMetrics::from_bins(vec![5.0, 5.0, 1.0, 0.0]).unwrap();
        assert_eq!(detect(&m), SymbolIndex(0));
        assert!(DecisionMetrics::from_bins(vec![]).is_err());
        assert!(DecisionMetrics::from_bins(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn noiseless_roundtrip_exhaustive() {
        let p = LoRaParams::new(6, 1.0).unwrap();
        let mut d = Dechirper::new(&p);
        for m in 0..64 {
            let x = modulate(&p, SymbolIndex(m)).unwrap();
            let metrics = dechirp_dft(&p, x.samples()).unwrap();
            assert_eq!(detect(&metrics), SymbolIndex(m));
            assert_eq!(d.detect(x.samples()).unwrap(), SymbolIndex(m));
        }
    }

    #[test]
    fn fft_matches_naive_dft() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for sf in [3, 4, 5] {
            let p = LoRaParams::new(sf, 1.7).unwrap();
            let y: Vec<Complex64> = (0..p.m_size())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fast = dechirp_dft(&p, &y).unwrap();
            let slow = naive_dft_bins(&p, &y);
            let scale = slow.iter().cloned().fold(0.0, f64::max);
            for (a, b) in fast.bins().iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bit_tuple_bijection() {
        for sf in 1..=8u32 {
            let mut seen = vec![false; 1 << sf];
            for m in 0..(1usize << sf) {
                let bits = SymbolIndex(m).to_bits(sf);
                let back = SymbolIndex::from_bits(&bits).unwrap();
                assert_eq!(back, SymbolIndex(m));
                assert!(!seen[back.0]);
                seen[back.0] = true;
            }
        }
    }
}
