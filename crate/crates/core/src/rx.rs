//! Receiver chain: phase extraction, Barker frame sync, per-symbol first
//! harmonic demodulation, pilot equalization and link metrics.

use crate::coding::{qam_demap, rasterize_slot, QamOrder};
use crate::error::{Error, Result};
use crate::harmonics::{slot_for_harmonic, MAX_FIRST_HARMONIC};
use crate::synthesis::IqWaveform;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// The length-13 Barker sequence (ideal aperiodic autocorrelation).
pub const BARKER13: [i8; 13] = [1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1];

/// Peak-to-sidelobe ratio below which frame sync is rejected.
pub const SYNC_THRESHOLD: f64 = 2.0;

/// Frame layout: Barker sync prefix, then payload symbols.
///
/// The sync symbols double as equalizer pilots; `pilot_symbols` optionally
/// marks a payload prefix that the receiver may additionally treat as known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFormat {
    sync: [i8; 13],
    pub payload_symbols: usize,
    pub pilot_symbols: usize,
}

impl FrameFormat {
    pub fn new(payload_symbols: usize, pilot_symbols: usize) -> Result<Self> {
        if payload_symbols == 0 {
            return Err(Error::InvalidParameter(
                "frame needs at least one payload symbol".into(),
            ));
        }
        if pilot_symbols > payload_symbols {
            return Err(Error::InvalidParameter(format!(
                "pilot prefix {pilot_symbols} longer than payload {payload_symbols}"
            )));
        }
        Ok(Self {
            sync: BARKER13,
            payload_symbols,
            pilot_symbols,
        })
    }

    /// Sync-only frame (empty payload), used by schedule files.
    pub fn sync_only() -> Self {
        Self {
            sync: BARKER13,
            payload_symbols: 0,
            pilot_symbols: 0,
        }
    }

    pub fn sync_chips(&self) -> &[i8; 13] {
        &self.sync
    }

    pub fn sync_symbols(&self) -> usize {
        self.sync.len()
    }

    pub fn total_symbols(&self) -> usize {
        self.sync.len() + self.payload_symbols
    }
}

/// Sync chips as maximum-amplitude BPSK symbols.
pub fn sync_symbols() -> Vec<Complex64> {
    BARKER13
        .iter()
        .map(|&c| Complex64::new(f64::from(c), 0.0))
        .collect()
}

/// Per-sample principal-value phase in `(-pi, pi]`; a zero-magnitude sample
/// reports phase 0.
pub fn extract_phase(w: &IqWaveform) -> Vec<f64> {
    w.samples().iter().map(|s| s.arg()).collect()
}

/// Expected phase-deviation pattern of the sync segment at sample resolution.
///
/// Each chip is the 50%-duty switching pattern of its BPSK symbol, so the
/// per-chip average phase is flat and a block template would correlate to
/// zero; the template therefore carries the intra-symbol switching waveform
/// (+/-0.5 around the mean, exactly zero-mean overall).
fn sync_template(samples_per_symbol: usize) -> Vec<f64> {
    let mut template = Vec::with_capacity(BARKER13.len() * samples_per_symbol);
    for &chip in &BARKER13 {
        let target = Complex64::new(f64::from(chip), 0.0) * MAX_FIRST_HARMONIC;
        let slot = slot_for_harmonic(target, 1.0).expect("BPSK amplitude feasible");
        let (start, len) = rasterize_slot(&slot, samples_per_symbol as u32);
        for i in 0..samples_per_symbol as u32 {
            let off = (i + samples_per_symbol as u32 - start) % samples_per_symbol as u32;
            template.push(if off < len { 0.5 } else { -0.5 });
        }
    }
    template
}

/// Locates the frame start by cross-correlating the mean-removed phase with
/// the Barker sync pattern.
///
/// Returns the sample offset of the correlation peak. Fails when the peak is
/// less than [`SYNC_THRESHOLD`] times the largest sidelobe outside one symbol
/// period around it.
pub fn barker_sync(
    w: &IqWaveform,
    fmt: &FrameFormat,
    samples_per_symbol: usize,
) -> Result<usize> {
    let frame_samples = fmt.total_symbols() * samples_per_symbol;
    if w.len() < frame_samples {
        return Err(Error::InsufficientSamples {
            needed: frame_samples,
            got: w.len(),
        });
    }
    let template = sync_template(samples_per_symbol);
    let phases = extract_phase(w);
    let mean = phases.iter().sum::<f64>() / phases.len() as f64;
    let dev: Vec<f64> = phases.iter().map(|p| p - mean).collect();

    let span = w.len() - frame_samples;
    let mut corr = Vec::with_capacity(span + 1);
    for offset in 0..=span {
        let mut acc = 0.0;
        for (j, t) in template.iter().enumerate() {
            acc += dev[offset + j] * t;
        }
        corr.push(acc.abs());
    }
    let (best, &peak) = corr
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("at least one offset");
    let sidelobe = corr
        .iter()
        .enumerate()
        .filter(|(i, _)| i.abs_diff(best) >= samples_per_symbol)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);
    if sidelobe > 0.0 && peak / sidelobe < SYNC_THRESHOLD {
        return Err(Error::SyncFailure {
            ratio: peak / sidelobe,
            threshold: SYNC_THRESHOLD,
        });
    }
    Ok(best)
}

/// Demodulates one first-harmonic symbol per switching period.
///
/// Each window of `L = sample_rate / switch_rate` samples contributes its
/// length-L DFT bin at `+switch_rate`, scaled by `1/L`. A truncated final
/// window is dropped with a warning.
pub fn demod_symbols(
    w: &IqWaveform,
    offset: usize,
    fmt: &FrameFormat,
    switch_rate: f64,
) -> Result<Vec<Complex64>> {
    let ratio = w.sample_rate() / switch_rate;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
        return Err(Error::RateMismatch {
            sample_rate: w.sample_rate(),
            clock_rate: switch_rate,
        });
    }
    let len = ratio.round() as usize;
    let available = w.len().saturating_sub(offset) / len;
    let wanted = fmt.total_symbols();
    if available < wanted {
        log::warn!(
            "waveform holds {available} full symbol windows past offset {offset}, expected {wanted}; truncated tail dropped"
        );
    }
    let count = available.min(wanted);
    let samples = w.samples();
    // DFT kernel for bin +1 of an L-point window
    let rot = Complex64::from_polar(1.0, -TAU / len as f64);
    let mut symbols = Vec::with_capacity(count);
    for s in 0..count {
        let base = offset + s * len;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut kernel = Complex64::new(1.0, 0.0);
        for i in 0..len {
            acc += samples[base + i] * kernel;
            kernel *= rot;
        }
        symbols.push(acc / len as f64);
    }
    Ok(symbols)
}

/// Least-squares scalar channel estimate from pilots, applied to the whole
/// sequence.
///
/// `pilots` are the known transmitted symbols aligned with the start of
/// `raw`. Returns the equalized sequence and the gain estimate.
pub fn equalize(raw: &[Complex64], pilots: &[Complex64]) -> Result<(Vec<Complex64>, Complex64)> {
    if pilots.is_empty() || raw.len() < pilots.len() {
        return Err(Error::LengthMismatch {
            left: raw.len(),
            right: pilots.len(),
            context: "raw symbols vs pilots",
        });
    }
    let energy: f64 = pilots.iter().map(|p| p.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::ZeroPilotEnergy);
    }
    let num: Complex64 = pilots
        .iter()
        .zip(raw)
        .map(|(p, r)| p.conj() * r)
        .sum();
    let gain = num / energy;
    let equalized = raw.iter().map(|r| r / gain).collect();
    Ok((equalized, gain))
}

/// Demodulation outcome of one frame.
#[derive(Debug, Clone)]
pub struct DemodReport {
    /// Equalized payload symbols.
    pub symbols: Vec<Complex64>,
    /// Decided payload bits.
    pub bits: Vec<u8>,
    /// Root-mean-square error vector magnitude in percent.
    pub rms_evm: f64,
    /// Bit error ratio against the transmitted payload.
    pub ber: f64,
    /// Frame start in samples.
    pub sync_offset: usize,
}

/// EVM and BER of equalized payload symbols against the transmitted
/// reference.
pub fn metrics(
    equalized: &[Complex64],
    sent_symbols: &[Complex64],
    sent_bits: &[u8],
    order: QamOrder,
    sync_offset: usize,
) -> Result<DemodReport> {
    if equalized.len() != sent_symbols.len() {
        return Err(Error::LengthMismatch {
            left: equalized.len(),
            right: sent_symbols.len(),
            context: "equalized vs sent symbols",
        });
    }
    if sent_bits.len() != sent_symbols.len() * order.bits_per_symbol() {
        return Err(Error::LengthMismatch {
            left: sent_bits.len(),
            right: sent_symbols.len() * order.bits_per_symbol(),
            context: "sent bits vs sent symbols",
        });
    }
    let err_power: f64 = equalized
        .iter()
        .zip(sent_symbols)
        .map(|(r, s)| (r - s).norm_sqr())
        .sum();
    let sig_power: f64 = sent_symbols.iter().map(|s| s.norm_sqr()).sum();
    let rms_evm = if sig_power > 0.0 {
        100.0 * (err_power / sig_power).sqrt()
    } else {
        0.0
    };
    let bits = qam_demap(equalized, order);
    let errors = bits
        .iter()
        .zip(sent_bits)
        .filter(|(a, b)| a != b)
        .count();
    let ber = if sent_bits.is_empty() {
        0.0
    } else {
        errors as f64 / sent_bits.len() as f64
    };
    Ok(DemodReport {
        symbols: equalized.to_vec(),
        bits,
        rms_evm,
        ber,
        sync_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn barker_autocorrelation_is_ideal() {
        // brute-force aperiodic autocorrelation
        let chips: Vec<f64> = BARKER13.iter().map(|&c| f64::from(c)).collect();
        for lag in 0..13usize {
            let acc: f64 = (0..13 - lag).map(|i| chips[i] * chips[i + lag]).sum();
            if lag == 0 {
                assert_eq!(acc, 13.0);
            } else {
                assert!(acc.abs() <= 1.0, "lag {lag}: {acc}");
            }
        }
    }

    #[test]
    fn phase_of_constant_is_zero() {
        let w = IqWaveform::new(vec![Complex64::new(1.0, 0.0); 8], 1.0, 0.0).unwrap();
        assert!(extract_phase(&w).iter().all(|&p| p == 0.0));
        let z = IqWaveform::new(vec![Complex64::new(0.0, 0.0); 3], 1.0, 0.0).unwrap();
        assert!(extract_phase(&z).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn phase_of_binary_switching_is_two_level() {
        let samples: Vec<Complex64> = (0..16)
            .map(|i| Complex64::from_polar(1.0, if i % 2 == 0 { 0.0 } else { PI }))
            .collect();
        let w = IqWaveform::new(samples, 1.0, 0.0).unwrap();
        for (i, p) in extract_phase(&w).iter().enumerate() {
            let expect = if i % 2 == 0 { 0.0 } else { PI };
            assert_relative_eq!(*p, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn equalize_inverts_scalar_channel() {
        let sent: Vec<Complex64> = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.3, -0.4),
        ];
        let g = Complex64::from_polar(3.0, PI / 7.0);
        let raw: Vec<Complex64> = sent.iter().map(|s| g * s).collect();
        let (eq, ghat) = equalize(&raw, &sent[..2]).unwrap();
        assert!((ghat - g).norm() < 1e-12);
        for (a, b) in eq.iter().zip(&sent) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn equalize_rejects_zero_pilots() {
        let raw = vec![Complex64::new(1.0, 0.0); 4];
        let pilots = vec![Complex64::new(0.0, 0.0); 2];
        assert!(matches!(
            equalize(&raw, &pilots),
            Err(Error::ZeroPilotEnergy)
        ));
    }

    #[test]
    fn metrics_definitional_cases() {
        let sent = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let bits = vec![0, 0, 0, 1];
        let r = metrics(&sent, &sent, &bits, QamOrder::Qam4, 0).unwrap();
        assert_eq!(r.rms_evm, 0.0);
        assert_eq!(r.ber, 0.0);

        // uniform offset of 10% of the rms symbol magnitude
        let rms = (sent.iter().map(|s| s.norm_sqr()).sum::<f64>() / 2.0).sqrt();
        let shifted: Vec<Complex64> = sent
            .iter()
            .map(|s| s + Complex64::new(0.1 * rms, 0.0))
            .collect();
        let r = metrics(&shifted, &sent, &bits, QamOrder::Qam4, 0).unwrap();
        assert_relative_eq!(r.rms_evm, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn metrics_rejects_misaligned_input() {
        let sent = vec![Complex64::new(1.0, 0.0)];
        assert!(metrics(&sent, &sent, &[0, 0, 0], QamOrder::Qam4, 0).is_err());
    }

    #[test]
    fn demod_single_square_wave_window() {
        // one element, duty 0.5, on_start 0 rasterized at 200 samples/period
        let len = 200usize;
        let samples: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(if i < 100 { -1.0 } else { 1.0 }, 0.0))
            .collect();
        let w = IqWaveform::new(samples.clone(), 20e6, 0.0).unwrap();
        let fmt = FrameFormat::sync_only();
        let got = demod_symbols(&w, 0, &FrameFormat { payload_symbols: 1, ..fmt }, 100e3).unwrap();
        assert_eq!(got.len(), 1);

        // in-test DFT oracle over the same samples
        let mut oracle = Complex64::new(0.0, 0.0);
        for (i, s) in samples.iter().enumerate() {
            oracle += s * Complex64::from_polar(1.0, -TAU * i as f64 / len as f64);
        }
        oracle /= len as f64;
        assert!((got[0] - oracle).norm() < 1e-12);
        // close to the continuous first harmonic +j*2/pi
        assert_relative_eq!(got[0].norm(), 2.0 / PI, epsilon = 1e-4);
        assert!((got[0] - Complex64::new(0.0, 2.0 / PI)).norm() < 0.011);
    }

    #[test]
    fn demod_static_window_is_zero() {
        let w = IqWaveform::new(vec![Complex64::new(1.0, 0.0); 400], 20e6, 0.0).unwrap();
        let fmt = FrameFormat {
            payload_symbols: 2,
            ..FrameFormat::sync_only()
        };
        let got = demod_symbols(&w, 0, &fmt, 100e3).unwrap();
        for s in got {
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn demod_is_linear() {
        let samples: Vec<Complex64> = (0..200)
            .map(|i| Complex64::from_polar(1.0, (i as f64 * 0.7).sin()))
            .collect();
        let a = Complex64::new(-1.3, 2.2);
        let scaled: Vec<Complex64> = samples.iter().map(|s| a * s).collect();
        let fmt = FrameFormat {
            payload_symbols: 1,
            ..FrameFormat::sync_only()
        };
        let w1 = IqWaveform::new(samples, 20e6, 0.0).unwrap();
        let w2 = IqWaveform::new(scaled, 20e6, 0.0).unwrap();
        let d1 = demod_symbols(&w1, 0, &fmt, 100e3).unwrap();
        let d2 = demod_symbols(&w2, 0, &fmt, 100e3).unwrap();
        assert!((d2[0] - a * d1[0]).norm() < 1e-12);
    }
}
