//! Link-level simulator for direct modulation on a 1-bit phase
//! reconfigurable surface with joint space-time coding.
//!
//! Payload bits become per-element on-off phase schedules: a time coding
//! carries QAM symbols on the first switching harmonic while a static space
//! coding steers the beam, and an element-wise XOR realizes both at once.
//! The crate synthesizes the far-field received waveform, runs the receiver
//! chain (Barker sync, per-symbol harmonic demodulation, pilot equalization)
//! and computes patterns, spectra, constellations and BER curves.

pub mod coding;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod link;
pub mod patterns;
pub mod rng;
pub mod rx;
pub mod schedule;
pub mod spectrum;
pub mod synthesis;

pub use coding::{
    joint_code, nearest_symbol_index, qam_demap, qam_map, space_coding, symbols_to_timecode,
    JointSchedule, QamOrder, SpaceCoding, TimeCode,
};
pub use error::{Error, Result};
pub use geometry::{array_response, ArrayGeometry, Direction, SPEED_OF_LIGHT};
pub use harmonics::{
    dft_harmonic, harmonic_coefficient, harmonic_series, slot_for_harmonic, HarmonicCoefficient,
    SlotCode, MAX_FIRST_HARMONIC,
};
pub use link::{
    ber_point, ber_sweep, run_link, snr_at_ber, BerPoint, CodingMode, LinkParams, LinkRun,
};
pub use patterns::{beam_scan, beamforming_gain, power_pattern, PatternCut, ScanPoint};
pub use rx::{
    barker_sync, demod_symbols, equalize, extract_phase, metrics, DemodReport, FrameFormat,
    BARKER13,
};
pub use schedule::{generate as generate_schedule, ScheduleFile};
pub use spectrum::{power_spectrum, Spectrum};
pub use synthesis::{add_awgn, reference_power, synthesize_rx, ChannelConfig, IqWaveform};

/// Complex sample type used throughout.
pub type Complex = num_complex::Complex64;
