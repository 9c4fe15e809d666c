//! Hybrid receive front end: RF codebooks, pilots, ADC model and measurement assembly.

pub mod codebook;
pub mod covariance;
pub mod measurement;
pub mod quantization;

pub use codebook::{draw_quantized_phasebook, RfCodebook};
pub use covariance::{effective_noise_covariance, quantizer_noise_covariance, signal_covariance_q};
pub use measurement::{
    block_noise_covariances, sample_noise_covariance, synthesize_measurements, time_domain_output, MeasurementSet,
    PilotFrame, TimeDomainAdc,
};
pub use quantization::{bussgang_epsilon, uniform_quantizer, QuantizationModel};
