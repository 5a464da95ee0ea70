//! Averaged-periodogram power spectrum estimation.

use crate::error::{Error, Result};
use crate::synthesis::IqWaveform;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Two-sided power spectrum on a uniform frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Baseband frequency offsets [Hz], ascending, DC in the middle.
    pub freq_hz: Vec<f64>,
    /// Power per bin, linear units.
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Power in dB relative to the strongest bin (all values <= 0).
    pub fn power_db(&self) -> Vec<f64> {
        let peak = self.power.iter().cloned().fold(f64::MIN, f64::max);
        self.power
            .iter()
            .map(|&p| 10.0 * (p.max(peak * 1e-30) / peak).log10())
            .collect()
    }

    /// Linear power of the bin closest to `freq_hz`.
    pub fn power_at(&self, freq_hz: f64) -> f64 {
        let mut best = 0;
        let mut err = f64::INFINITY;
        for (i, &f) in self.freq_hz.iter().enumerate() {
            let e = (f - freq_hz).abs();
            if e < err {
                err = e;
                best = i;
            }
        }
        self.power[best]
    }
}

/// Welch-style averaged periodogram: Hann window, 50% overlap, `nfft`-point
/// segments, output fftshifted so bin spacing is `sample_rate/nfft` around DC.
pub fn power_spectrum(w: &IqWaveform, nfft: usize) -> Result<Spectrum> {
    if nfft < 2 {
        return Err(Error::InvalidParameter(format!(
            "nfft {nfft} must be at least 2"
        )));
    }
    if w.len() < nfft {
        return Err(Error::InsufficientSamples {
            needed: nfft,
            got: w.len(),
        });
    }
    let window: Vec<f64> = (0..nfft)
        .map(|i| {
            let x = std::f64::consts::TAU * i as f64 / nfft as f64;
            0.5 * (1.0 - x.cos())
        })
        .collect();
    let win_energy: f64 = window.iter().map(|v| v * v).sum();

    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let hop = nfft / 2;
    let samples = w.samples();
    let mut acc = vec![0.0f64; nfft];
    let mut segments = 0usize;
    let mut start = 0usize;
    let mut buf = vec![Complex64::default(); nfft];
    while start + nfft <= samples.len() {
        for i in 0..nfft {
            buf[i] = samples[start + i] * window[i];
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * win_energy);

    // fftshift to put DC in the middle
    let half = nfft / 2;
    let mut power = Vec::with_capacity(nfft);
    let mut freq_hz = Vec::with_capacity(nfft);
    for i in 0..nfft {
        let src = (i + half) % nfft;
        power.push(acc[src] * scale);
        freq_hz.push((i as f64 - half as f64) * w.sample_rate() / nfft as f64);
    }
    Ok(Spectrum { freq_hz, power })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, n: usize) -> IqWaveform {
        let samples = (0..n)
            .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * freq * i as f64 / rate))
            .collect();
        IqWaveform::new(samples, rate, 0.0).unwrap()
    }

    #[test]
    fn tone_peaks_at_its_bin() {
        let rate = 20e6;
        let w = tone(100e3, rate, 1 << 14);
        let spec = power_spectrum(&w, 4096).unwrap();
        let peak_idx = spec
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let bin = rate / 4096.0;
        assert!((spec.freq_hz[peak_idx] - 100e3).abs() <= bin);
        let db = spec.power_db();
        assert!(db.iter().all(|&v| v <= 1e-12));
        assert_eq!(db[peak_idx], 0.0);
    }

    #[test]
    fn rejects_short_input() {
        let w = tone(1e3, 1e6, 100);
        assert!(matches!(
            power_spectrum(&w, 256),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
