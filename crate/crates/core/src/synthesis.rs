//! Far-field received-waveform synthesis and the AWGN channel.
//!
//! Synthesis works at complex baseband: the single-tone carrier is divided
//! out, so the carrier frequency enters only through the wavenumber in the
//! element phases. Each control tick contributes the coherent sum of all
//! element responses with their current 1-bit phase states; because a joint
//! space-time schedule only ever toggles between one pattern and its
//! complement, identical frames are summed once and reused.

use crate::coding::JointSchedule;
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Direction};
use crate::rng::stream_rng;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

/// Uniformly sampled complex baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct IqWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
    t0: f64,
}

impl IqWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if sample_rate <= 0.0 || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sample rate {sample_rate} Hz must be positive"
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "waveform contains non-finite samples".into(),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |s|^2 over all samples.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// AWGN channel settings.
///
/// The noise variance is referenced to the mean received power of the
/// time-only configuration, so SNR comparisons between steered and unsteered
/// runs expose the beamforming gain instead of normalizing it away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub reference_power: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, reference_power: f64, seed: u64) -> Result<Self> {
        if reference_power <= 0.0 || !reference_power.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reference power {reference_power} must be positive"
            )));
        }
        if snr_db.is_nan() {
            return Err(Error::InvalidParameter("SNR must not be NaN".into()));
        }
        Ok(Self {
            snr_db,
            reference_power,
            seed,
        })
    }

    /// Per-sample complex noise variance.
    pub fn noise_variance(&self) -> f64 {
        if self.snr_db.is_infinite() {
            0.0
        } else {
            self.reference_power / 10f64.powf(self.snr_db / 10.0)
        }
    }
}

/// Synthesizes the received baseband waveform at `dir` for a joint schedule.
///
/// The sample rate must be an integer multiple of the control-clock rate so
/// tick boundaries land on samples. Per sample, the value is the row-major
/// coherent sum of element responses with the tick's phase states applied.
pub fn synthesize_rx(
    geom: &ArrayGeometry,
    schedule: &JointSchedule,
    dir: &Direction,
    sample_rate: f64,
) -> Result<IqWaveform> {
    if schedule.rows() != geom.rows() || schedule.cols() != geom.cols() {
        return Err(Error::LengthMismatch {
            left: schedule.elements(),
            right: geom.elements(),
            context: "schedule vs geometry element count",
        });
    }
    let clock_rate = 1.0 / schedule.tick_duration();
    let ratio = sample_rate / clock_rate;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 - 1e-9 {
        return Err(Error::RateMismatch {
            sample_rate,
            clock_rate,
        });
    }
    let samples_per_tick = ratio.round() as usize;

    let gains = geom.element_responses(dir);
    let mut memo: Vec<(Vec<u64>, Complex64)> = Vec::new();
    let mut samples = Vec::with_capacity(schedule.tick_count() * samples_per_tick);
    for tick in 0..schedule.tick_count() {
        let words = schedule.frame_words(tick);
        let value = match memo.iter().find(|(k, _)| k == words) {
            Some((_, v)) => *v,
            None => {
                let v = frame_sum(&gains, words, geom.elements());
                if memo.len() < 64 {
                    memo.push((words.to_vec(), v));
                }
                v
            }
        };
        samples.extend(std::iter::repeat_n(value, samples_per_tick));
    }
    IqWaveform::new(samples, sample_rate, 0.0)
}

/// Row-major coherent sum over one packed frame.
fn frame_sum(gains: &[Complex64], words: &[u64], elements: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, g) in gains.iter().enumerate().take(elements) {
        let bit = ((words[i / 64] >> (i % 64)) & 1) as u8;
        acc += g * crate::geometry::phase_sign(bit);
    }
    acc
}

/// Adds circularly symmetric complex Gaussian noise.
///
/// Per-sample variance is `reference_power / 10^(snr/10)`, split evenly
/// between I and Q; an infinite SNR returns the input unchanged. Output is a
/// pure function of `(input, cfg.seed)`.
pub fn add_awgn(w: &IqWaveform, cfg: &ChannelConfig) -> IqWaveform {
    let var = cfg.noise_variance();
    if var == 0.0 {
        return w.clone();
    }
    let sigma = (var / 2.0).sqrt();
    let mut rng = stream_rng(cfg.seed, &[]);
    let samples = w
        .samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    IqWaveform {
        samples,
        sample_rate: w.sample_rate,
        t0: w.t0,
    }
}

/// Mean received power of the time-only (unsteered) configuration.
///
/// Synthesizes the given time coding with all elements in state 0 at one
/// sample per tick (the waveform is piecewise constant per tick, so that is
/// exact) and returns the mean sample power. Used as the SNR reference.
pub fn reference_power(
    geom: &ArrayGeometry,
    dir: &Direction,
    timecode: &crate::coding::TimeCode,
) -> Result<f64> {
    let space = crate::coding::SpaceCoding::uniform(geom, 0);
    let schedule = crate::coding::joint_code(&space, timecode);
    let rate = 1.0 / schedule.tick_duration();
    let w = synthesize_rx(geom, &schedule, dir, rate)?;
    Ok(w.mean_power())
}
