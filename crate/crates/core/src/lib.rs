//! Symbol and bit error probabilities of LoRa (chirp spread spectrum)
//! detection over flat Rician and Rayleigh block fading.
//!
//! The crate provides the waveform and FFT detector, a block-fading channel,
//! a reproducible Monte Carlo simulator, the exact alternating-sum SER, its
//! numerical-integration counterpart and closed-form union bounds.

mod quadrature;

pub mod analytic;
pub mod bounds;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod signal;
pub mod specfun;

pub use analytic::{
    ber_from_ser, ser_exact_rician, ser_exact_rician_with_limit, ser_noncoherent,
    ser_numeric_integration, ExactSer, LinkBudget, DEFAULT_EXACT_MAX_SF,
};
pub use bounds::{
    marcum_args, ser_lower, ser_lower_exp, ser_lower_rayleigh, ser_upper, ser_upper_exp,
    ser_upper_rayleigh, BoundValue, MarcumArgs,
};
pub use channel::{apply_channel, sample_tap, ChannelParams, FadedObservation};
pub use error::{Error, Result};
pub use montecarlo::{simulate_ser, McConfig, McResult};
pub use signal::{
    dechirp_dft, detect, modulate, BasebandSymbol, Dechirper, DecisionMetrics, LoRaParams,
    SymbolIndex,
};
pub use specfun::{
    bessel_i0_scaled, log_binomial, marcum_q1, marcum_q1_complement, NoncentralChi2,
};
