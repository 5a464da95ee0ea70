//! Harmonic analysis of 1-bit periodic phase switching.
//!
//! A unit driven by the on-off control of one switching period produces a
//! two-level phase waveform `exp(j*pi*g(t))`, `g(t) = 1` inside the ON window
//! and `0` outside. Expanding that waveform in a Fourier series gives
//!
//! ```text
//! H[k] = 1 - 2*duty                                            for k = 0
//! H[k] = -(2/(pi*k)) * sin(pi*k*duty)
//!         * exp(-j*(2*pi*k*on_start/period + pi*k*duty))        for k != 0
//! ```
//!
//! so the duty ratio sets the harmonic amplitude and the ON-window start sets
//! its phase. Inverting the `k = +1` coefficient maps an arbitrary complex
//! symbol (of magnitude at most `2/pi`) onto switching parameters, which is
//! what carries QAM constellations on the first harmonic. The carrier-level
//! coefficient `H[0]` is always real: time coding never shifts the carrier
//! phase, only its amplitude.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Largest first-harmonic magnitude a 1-bit switch can generate (`2/pi`, at
/// 50% duty).
pub const MAX_FIRST_HARMONIC: f64 = 2.0 / PI;

/// On-off switching pattern of one period.
///
/// The ON window is `[on_start, on_start + duty*period)`, taken modulo the
/// period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotCode {
    duty: f64,
    on_start: f64,
    period: f64,
}

impl SlotCode {
    pub fn new(duty: f64, on_start: f64, period: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&duty) {
            return Err(Error::InvalidParameter(format!(
                "duty ratio {duty} outside [0, 1]"
            )));
        }
        if period <= 0.0 || !period.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "switching period {period} s must be positive"
            )));
        }
        if !(0.0..period).contains(&on_start) {
            return Err(Error::InvalidParameter(format!(
                "ON start {on_start} s outside [0, {period})"
            )));
        }
        Ok(Self {
            duty,
            on_start,
            period,
        })
    }

    /// Slot that never switches (element stays in its rest state).
    pub fn rest(period: f64) -> Result<Self> {
        Self::new(0.0, 0.0, period)
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn on_start(&self) -> f64 {
        self.on_start
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn switching_rate(&self) -> f64 {
        1.0 / self.period
    }

    /// Control waveform value at time `t` (periodic continuation).
    pub fn level_at(&self, t: f64) -> u8 {
        let tau = (t - self.on_start).rem_euclid(self.period);
        u8::from(tau < self.duty * self.period)
    }

    /// Closed-form Fourier coefficient of `exp(j*pi*g(t))` at harmonic `k`.
    pub fn harmonic(&self, k: i32) -> Complex64 {
        harmonic_coefficient(self, k)
    }
}

/// Fourier coefficient of the two-level phase waveform at harmonic `k`.
pub fn harmonic_coefficient(slot: &SlotCode, k: i32) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0 - 2.0 * slot.duty, 0.0);
    }
    let kf = f64::from(k);
    let amp = -2.0 / (PI * kf) * (PI * kf * slot.duty).sin();
    let phase = -(TAU * kf * slot.on_start / slot.period + PI * kf * slot.duty);
    amp * Complex64::from_polar(1.0, phase)
}

/// Independent numerical check of [`harmonic_coefficient`].
///
/// Samples the two-level waveform at cell midpoints and integrates the
/// Fourier kernel with the midpoint rule. When the switching instants lie on
/// the sample grid the quadrature error is `O((k/n)^2)`, so agreement to 1e-6
/// is reached by `n = 1e5` for small `k`.
pub fn dft_harmonic(slot: &SlotCode, k: i32, samples_per_period: usize) -> Complex64 {
    assert!(
        samples_per_period >= 1000,
        "oracle needs at least 1000 samples per period"
    );
    let n = samples_per_period;
    let step = -TAU * f64::from(k) / n as f64;
    let rot = Complex64::from_polar(1.0, step);
    // kernel starts at the first cell midpoint
    let mut w = Complex64::from_polar(1.0, step * 0.5);
    let mut acc = Complex64::new(0.0, 0.0);
    let dt = slot.period / n as f64;
    for i in 0..n {
        let t = (i as f64 + 0.5) * dt;
        let level = crate::geometry::phase_sign(slot.level_at(t));
        acc += level * w;
        w *= rot;
    }
    acc / n as f64
}

/// Switching parameters whose `+1` harmonic equals `target`.
///
/// The duty ratio is taken in `[0, 0.5]`, where the amplitude map is
/// monotone; the mirror solution `1 - duty` is rejected for determinism. A
/// zero target returns the rest slot.
pub fn slot_for_harmonic(target: Complex64, period: f64) -> Result<SlotCode> {
    let mag = target.norm();
    if mag < 1e-15 {
        return SlotCode::rest(period);
    }
    let y = mag / MAX_FIRST_HARMONIC;
    if y > 1.0 + 1e-12 {
        return Err(Error::InfeasibleAmplitude {
            requested: mag,
            max: MAX_FIRST_HARMONIC,
        });
    }
    let duty = y.min(1.0).asin() / PI;
    // forward phase is pi - 2*pi*on_start/period - pi*duty (the leading minus
    // sign of the coefficient contributes pi)
    let frac = (PI - PI * duty - target.arg()).rem_euclid(TAU) / TAU;
    let on_start = (frac * period).rem_euclid(period);
    SlotCode::new(duty, on_start, period)
}

/// One harmonic order and its complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCoefficient {
    pub order: i32,
    pub value: Complex64,
}

/// Closed-form coefficients for a contiguous range of harmonic orders.
pub fn harmonic_series(slot: &SlotCode, orders: std::ops::RangeInclusive<i32>) -> Vec<HarmonicCoefficient> {
    orders
        .map(|k| HarmonicCoefficient {
            order: k,
            value: harmonic_coefficient(slot, k),
        })
        .collect()
}
