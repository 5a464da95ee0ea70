//! Bit-to-symbol mapping, time coding, space coding and their XOR combination.
//!
//! The transmit pipeline mirrors the control hardware: a bitstream parser maps
//! payload bits to Gray-coded square-QAM symbols, a time-coding generator
//! turns each symbol into one switching period's on-off parameters, a
//! space-coding table steers the beam, and an element-wise XOR merges the two
//! into the per-tick control bits actually applied to the array.

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Direction};
use crate::harmonics::{slot_for_harmonic, SlotCode, MAX_FIRST_HARMONIC};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Supported square-QAM constellation sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QamOrder {
    Qam4,
    Qam16,
    Qam64,
}

impl QamOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            4 => Ok(Self::Qam4),
            16 => Ok(Self::Qam16),
            64 => Ok(Self::Qam64),
            other => Err(Error::InvalidParameter(format!(
                "unsupported modulation order {other} (expected 4, 16 or 64)"
            ))),
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Self::Qam4 => 4,
            Self::Qam16 => 16,
            Self::Qam64 => 64,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Self::Qam4 => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
        }
    }

    fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Constellation points indexed by the symbol's bit pattern (first half of
    /// the bits selects the I level, second half the Q level, both Gray
    /// coded). Corner symbols have unit magnitude.
    pub fn constellation(&self) -> Vec<Complex64> {
        let b = self.bits_per_axis();
        let levels = 1usize << b;
        let scale = ((levels - 1) as f64) * std::f64::consts::SQRT_2;
        let axis: Vec<f64> = (0..levels)
            .map(|g| {
                let v = gray_to_binary(g as u32) as f64;
                ((levels - 1) as f64 - 2.0 * v) / scale
            })
            .collect();
        let mut points = Vec::with_capacity(levels * levels);
        for i in 0..levels {
            for q in 0..levels {
                points.push(Complex64::new(axis[i], axis[q]));
            }
        }
        points
    }
}

fn gray_to_binary(g: u32) -> u32 {
    let mut v = g;
    let mut shift = 1;
    while (g >> shift) != 0 {
        v ^= g >> shift;
        shift += 1;
    }
    v
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1))
}

fn index_to_bits(index: usize, width: usize, out: &mut Vec<u8>) {
    for i in (0..width).rev() {
        out.push(((index >> i) & 1) as u8);
    }
}

/// Maps a bit sequence to Gray-coded square-QAM symbols with unit peak
/// magnitude.
pub fn qam_map(bits: &[u8], order: QamOrder) -> Result<Vec<Complex64>> {
    let bps = order.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::Framing {
            bits: bits.len(),
            bits_per_symbol: bps,
        });
    }
    let table = order.constellation();
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| table[bits_to_index(chunk)])
        .collect())
}

/// Minimum-distance decision of each symbol back to bits.
///
/// Decisions are always made; arbitrarily corrupted symbols decode to the
/// nearest constellation point.
pub fn qam_demap(symbols: &[Complex64], order: QamOrder) -> Vec<u8> {
    let bps = order.bits_per_symbol();
    let table = order.constellation();
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    for s in symbols {
        let idx = nearest_symbol_index(*s, &table);
        index_to_bits(idx, bps, &mut bits);
    }
    bits
}

/// Index of the nearest constellation point (minimum Euclidean distance).
pub fn nearest_symbol_index(s: Complex64, table: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in table.iter().enumerate() {
        let d = (s - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Per-symbol switching parameters plus the control-clock resolution used to
/// rasterize them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCode {
    slots: Vec<SlotCode>,
    control_clock: u32,
}

impl TimeCode {
    pub fn new(slots: Vec<SlotCode>, control_clock: u32) -> Result<Self> {
        if control_clock < 2 {
            return Err(Error::InvalidParameter(format!(
                "control clock {control_clock} must be at least 2 ticks per period"
            )));
        }
        if let Some(first) = slots.first() {
            if slots.iter().any(|s| s.period() != first.period()) {
                return Err(Error::InvalidParameter(
                    "all slots of a time code must share one switching period".into(),
                ));
            }
        }
        Ok(Self {
            slots,
            control_clock,
        })
    }

    pub fn slots(&self) -> &[SlotCode] {
        &self.slots
    }

    pub fn control_clock(&self) -> u32 {
        self.control_clock
    }

    pub fn period(&self) -> Option<f64> {
        self.slots.first().map(|s| s.period())
    }

    pub fn symbol_count(&self) -> usize {
        self.slots.len()
    }

    /// ON window of slot `i` in control-clock ticks: `(start, length)`.
    pub fn slot_ticks(&self, i: usize) -> (u32, u32) {
        rasterize_slot(&self.slots[i], self.control_clock)
    }

    /// Control waveform bit at a global tick index.
    pub fn level_at_tick(&self, tick: usize) -> u8 {
        let clock = self.control_clock as usize;
        let sym = tick / clock;
        let (start, len) = self.slot_ticks(sym);
        let local = (tick % clock) as u32;
        let off = (local + self.control_clock - start) % self.control_clock;
        u8::from(off < len)
    }

    pub fn tick_count(&self) -> usize {
        self.slots.len() * self.control_clock as usize
    }

    /// Stretches each symbol over `symbol_periods` switching periods for
    /// slower symbol rates; the default transmission uses one period per
    /// symbol.
    pub fn repeat(&self, symbol_periods: u32) -> Result<Self> {
        if symbol_periods == 0 {
            return Err(Error::InvalidParameter(
                "symbol repetition factor must be at least 1".into(),
            ));
        }
        let mut slots = Vec::with_capacity(self.slots.len() * symbol_periods as usize);
        for slot in &self.slots {
            for _ in 0..symbol_periods {
                slots.push(*slot);
            }
        }
        Self::new(slots, self.control_clock)
    }
}

/// Snaps a slot's ON window to the control-clock grid (round to nearest
/// tick).
pub fn rasterize_slot(slot: &SlotCode, control_clock: u32) -> (u32, u32) {
    let clock = f64::from(control_clock);
    let len = (slot.duty() * clock).round() as u32;
    let start = ((slot.on_start() / slot.period() * clock).round() as u32) % control_clock;
    (start, len.min(control_clock))
}

/// Builds the per-symbol time coding for a symbol sequence.
///
/// Each symbol `s` (|s| <= 1) is scaled by the peak first-harmonic amplitude
/// `2/pi`, inverted to switching parameters, and snapped to the control-clock
/// grid. The snapped slot's harmonic error is bounded by the grid resolution.
pub fn symbols_to_timecode(
    symbols: &[Complex64],
    period: f64,
    control_clock: u32,
) -> Result<TimeCode> {
    let mut slots = Vec::with_capacity(symbols.len());
    for s in symbols {
        let exact = slot_for_harmonic(s * MAX_FIRST_HARMONIC, period)?;
        let (start, len) = rasterize_slot(&exact, control_clock);
        let snapped = SlotCode::new(
            f64::from(len) / f64::from(control_clock),
            f64::from(start) / f64::from(control_clock) * period,
            period,
        )?;
        slots.push(snapped);
    }
    TimeCode::new(slots, control_clock)
}

/// Static 1-bit phase pattern steering the beam.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCoding {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
    design_direction: Option<Direction>,
}

impl SpaceCoding {
    /// All elements in the same state; no steering.
    pub fn uniform(geom: &ArrayGeometry, bit: u8) -> Self {
        Self {
            rows: geom.rows(),
            cols: geom.cols(),
            bits: vec![bit & 1; geom.elements()],
            design_direction: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major bit matrix.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bit of element `(m, n)`, 1-based.
    pub fn bit(&self, m: usize, n: usize) -> u8 {
        self.bits[(m - 1) * self.cols + (n - 1)]
    }

    pub fn design_direction(&self) -> Option<&Direction> {
        self.design_direction.as_ref()
    }

    /// Complement pattern (global 180-degree phase, radiation-identical).
    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
            design_direction: self.design_direction,
        }
    }
}

/// Computes the 1-bit space coding that steers the beam toward `dir`.
///
/// The desired element phase combines the steering ramp with the feed-path
/// compensation `-K*r`; quantization maps phases in `[0, pi)` to state 0 and
/// `[pi, 2*pi)` to state 1, with the phase reduced into `[0, 2*pi)` first.
pub fn space_coding(geom: &ArrayGeometry, dir: &Direction) -> SpaceCoding {
    let k = geom.wavenumber();
    let d = geom.spacing_m();
    let st = dir.theta().sin();
    let cp = dir.phi().cos();
    let sp = dir.phi().sin();
    let half_rows = (geom.rows() as f64 + 1.0) / 2.0;
    let half_cols = (geom.cols() as f64 + 1.0) / 2.0;
    let mut bits = Vec::with_capacity(geom.elements());
    for m in 1..=geom.rows() {
        for n in 1..=geom.cols() {
            let r = geom.feed_distance(m, n).expect("index in range");
            let phase = k * d * (m as f64 - half_rows) * st * cp
                + k * d * (n as f64 - half_cols) * st * sp
                - k * r;
            bits.push(u8::from(phase.rem_euclid(TAU) >= PI));
        }
    }
    SpaceCoding {
        rows: geom.rows(),
        cols: geom.cols(),
        bits,
        design_direction: Some(*dir),
    }
}

/// Per-tick control bits for the whole array, packed 64 elements per word in
/// row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSchedule {
    rows: usize,
    cols: usize,
    control_clock: u32,
    tick_duration: f64,
    words_per_frame: usize,
    frames: Vec<u64>,
    ticks: usize,
}

impl JointSchedule {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn control_clock(&self) -> u32 {
        self.control_clock
    }

    /// Duration of one control tick in seconds.
    pub fn tick_duration(&self) -> f64 {
        self.tick_duration
    }

    pub fn switching_period(&self) -> f64 {
        self.tick_duration * f64::from(self.control_clock)
    }

    pub fn tick_count(&self) -> usize {
        self.ticks
    }

    pub fn symbol_count(&self) -> usize {
        self.ticks / self.control_clock as usize
    }

    pub fn words_per_frame(&self) -> usize {
        self.words_per_frame
    }

    /// Packed bit words of one tick's frame.
    pub fn frame_words(&self, tick: usize) -> &[u64] {
        let start = tick * self.words_per_frame;
        &self.frames[start..start + self.words_per_frame]
    }

    /// Control bit of element `(m, n)` (1-based) at a tick.
    pub fn bit(&self, tick: usize, m: usize, n: usize) -> u8 {
        let idx = (m - 1) * self.cols + (n - 1);
        let words = self.frame_words(tick);
        ((words[idx / 64] >> (idx % 64)) & 1) as u8
    }

    /// Builds a schedule directly from per-tick row-major bit frames.
    pub fn from_frames(
        rows: usize,
        cols: usize,
        control_clock: u32,
        tick_duration: f64,
        frame_bits: impl Iterator<Item = Vec<u8>>,
    ) -> Result<Self> {
        let elements = rows * cols;
        let words_per_frame = elements.div_ceil(64);
        let mut frames = Vec::new();
        let mut ticks = 0;
        for bits in frame_bits {
            if bits.len() != elements {
                return Err(Error::LengthMismatch {
                    left: bits.len(),
                    right: elements,
                    context: "schedule frame bit count",
                });
            }
            let mut words = vec![0u64; words_per_frame];
            for (i, &b) in bits.iter().enumerate() {
                if b & 1 == 1 {
                    words[i / 64] |= 1 << (i % 64);
                }
            }
            frames.extend_from_slice(&words);
            ticks += 1;
        }
        Ok(Self {
            rows,
            cols,
            control_clock,
            tick_duration,
            words_per_frame,
            frames,
            ticks,
        })
    }
}

/// Combines space coding and time coding with an element-wise XOR.
///
/// Tick `t` of the result holds `space XOR g(t)` where `g` is the rasterized
/// slot waveform; since `exp(j*pi*(a XOR b)) = exp(j*pi*a) * exp(j*pi*b)` for
/// 1-bit states, the sidebands of the synthesized field depend only on the
/// time coding while the static pattern steers the beam.
pub fn joint_code(space: &SpaceCoding, time: &TimeCode) -> JointSchedule {
    let elements = space.rows * space.cols;
    let words_per_frame = elements.div_ceil(64);
    // base pattern and its complement, precomputed once
    let mut base = vec![0u64; words_per_frame];
    for (i, &b) in space.bits.iter().enumerate() {
        if b == 1 {
            base[i / 64] |= 1 << (i % 64);
        }
    }
    let mut flipped = base.iter().map(|w| !w).collect::<Vec<u64>>();
    if !elements.is_multiple_of(64) {
        let mask = (1u64 << (elements % 64)) - 1;
        *flipped.last_mut().unwrap() &= mask;
    }

    let ticks = time.tick_count();
    let mut frames = Vec::with_capacity(ticks * words_per_frame);
    for t in 0..ticks {
        let g = time.level_at_tick(t);
        frames.extend_from_slice(if g == 1 { &flipped } else { &base });
    }
    let period = time.period().unwrap_or(1.0);
    JointSchedule {
        rows: space.rows,
        cols: space.cols,
        control_clock: time.control_clock(),
        tick_duration: period / f64::from(time.control_clock()),
        words_per_frame,
        frames,
        ticks,
    }
}
