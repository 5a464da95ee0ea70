//! Control-schedule files: serialization of a joint schedule plus recovery of
//! the payload it encodes.
//!
//! The text format has a key/value header naming the array size, switching
//! period, control clock, modulation order and steering direction, a `---`
//! separator, then one line per control tick holding the row-major element
//! bits as `0`/`1` characters. Round trips are bit-exact.

use crate::coding::{joint_code, space_coding, symbols_to_timecode, JointSchedule, QamOrder};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Direction};
use crate::rx::{demod_symbols, equalize, sync_symbols, FrameFormat, BARKER13};
use crate::synthesis::IqWaveform;
use num_complex::Complex64;
use std::io::{BufRead, Write};

/// A joint schedule together with the frame metadata needed to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFile {
    pub order: QamOrder,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub sync_symbols: usize,
    pub payload_bits: usize,
    pub schedule: JointSchedule,
}

/// Builds the schedule file for one frame: Barker sync prefix plus the
/// payload bits, jointly coded with the steering pattern for `dir`.
pub fn generate(
    geom: &ArrayGeometry,
    dir: &Direction,
    order: QamOrder,
    switch_rate: f64,
    control_clock: u32,
    payload_bits: &[u8],
) -> Result<ScheduleFile> {
    let symbols = crate::link::frame_symbols(payload_bits, order)?;
    let timecode = symbols_to_timecode(&symbols, 1.0 / switch_rate, control_clock)?;
    let space = space_coding(geom, dir);
    let schedule = joint_code(&space, &timecode);
    Ok(ScheduleFile {
        order,
        theta_deg: dir.theta().to_degrees(),
        phi_deg: dir.phi().to_degrees(),
        sync_symbols: BARKER13.len(),
        payload_bits: payload_bits.len(),
        schedule,
    })
}

impl ScheduleFile {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.schedule;
        writeln!(w, "# joint space-time control schedule v1")?;
        writeln!(
            w,
            "# mapping: Gray square QAM; per symbol the first half of the bits selects"
        )?;
        writeln!(
            w,
            "#   the I level and the second half the Q level, each Gray-decoded with"
        )?;
        writeln!(
            w,
            "#   code 0 on the most positive level; corner symbols have magnitude 1"
        )?;
        writeln!(w, "rows = {}", s.rows())?;
        writeln!(w, "cols = {}", s.cols())?;
        writeln!(w, "switch_period_s = {:e}", s.switching_period())?;
        writeln!(w, "control_clock = {}", s.control_clock())?;
        writeln!(w, "order = {}", self.order.order())?;
        writeln!(w, "theta_deg = {}", self.theta_deg)?;
        writeln!(w, "phi_deg = {}", self.phi_deg)?;
        writeln!(w, "sync_symbols = {}", self.sync_symbols)?;
        writeln!(w, "payload_bits = {}", self.payload_bits)?;
        writeln!(w, "ticks = {}", s.tick_count())?;
        writeln!(w, "---")?;
        let mut line = String::with_capacity(s.elements());
        for tick in 0..s.tick_count() {
            line.clear();
            for m in 1..=s.rows() {
                for n in 1..=s.cols() {
                    line.push(if s.bit(tick, m, n) == 1 { '1' } else { '0' });
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut header = std::collections::HashMap::new();
        let mut body_start = 0;
        for (idx, line) in &mut lines {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed == "---" {
                body_start = lineno;
                break;
            }
            let (key, value) = trimmed.split_once('=').ok_or(Error::ScheduleParse {
                line: lineno,
                message: format!("expected 'key = value', got '{trimmed}'"),
            })?;
            header.insert(key.trim().to_string(), value.trim().to_string());
        }
        if body_start == 0 {
            return Err(Error::ScheduleParse {
                line: 0,
                message: "missing '---' separator".into(),
            });
        }

        fn field<T: std::str::FromStr>(
            header: &std::collections::HashMap<String, String>,
            key: &str,
        ) -> Result<T> {
            header
                .get(key)
                .ok_or(Error::ScheduleParse {
                    line: 0,
                    message: format!("missing header key '{key}'"),
                })?
                .parse()
                .map_err(|_| Error::ScheduleParse {
                    line: 0,
                    message: format!("header key '{key}' has an invalid value"),
                })
        }

        let rows: usize = field(&header, "rows")?;
        let cols: usize = field(&header, "cols")?;
        let period: f64 = field(&header, "switch_period_s")?;
        let control_clock: u32 = field(&header, "control_clock")?;
        let order = QamOrder::from_order(field(&header, "order")?)
            .map_err(|e| Error::ScheduleParse {
                line: 0,
                message: e.to_string(),
            })?;
        let theta_deg: f64 = field(&header, "theta_deg")?;
        let phi_deg: f64 = field(&header, "phi_deg")?;
        let sync: usize = field(&header, "sync_symbols")?;
        let payload_bits: usize = field(&header, "payload_bits")?;
        let ticks: usize = field(&header, "ticks")?;

        let known = [
            "rows",
            "cols",
            "switch_period_s",
            "control_clock",
            "order",
            "theta_deg",
            "phi_deg",
            "sync_symbols",
            "payload_bits",
            "ticks",
        ];
        if let Some(unknown) = header.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::ScheduleParse {
                line: 0,
                message: format!("unknown header key '{unknown}'"),
            });
        }
        if !payload_bits.is_multiple_of(order.bits_per_symbol()) {
            return Err(Error::ScheduleParse {
                line: 0,
                message: format!(
                    "payload_bits {payload_bits} not divisible by {} bits per symbol",
                    order.bits_per_symbol()
                ),
            });
        }
        let expected_ticks =
            (sync + payload_bits / order.bits_per_symbol()) * control_clock as usize;
        if ticks != expected_ticks {
            return Err(Error::ScheduleParse {
                line: 0,
                message: format!("tick count {ticks} does not match frame length {expected_ticks}"),
            });
        }

        let elements = rows * cols;
        let mut frames = Vec::with_capacity(ticks);
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if trimmed.len() != elements {
                return Err(Error::ScheduleParse {
                    line: lineno,
                    message: format!(
                        "tick row has {} characters, expected {elements}",
                        trimmed.len()
                    ),
                });
            }
            let mut bits = Vec::with_capacity(elements);
            for c in trimmed.chars() {
                match c {
                    '0' => bits.push(0u8),
                    '1' => bits.push(1u8),
                    other => {
                        return Err(Error::ScheduleParse {
                            line: lineno,
                            message: format!("invalid bit character '{other}'"),
                        })
                    }
                }
            }
            frames.push(bits);
            if frames.len() > ticks {
                return Err(Error::ScheduleParse {
                    line: lineno,
                    message: "more tick rows than the header announced".into(),
                });
            }
        }
        if frames.len() != ticks {
            return Err(Error::ScheduleParse {
                line: 0,
                message: format!("expected {ticks} tick rows, found {}", frames.len()),
            });
        }
        let schedule = JointSchedule::from_frames(
            rows,
            cols,
            control_clock,
            period / f64::from(control_clock),
            frames.into_iter(),
        )?;
        Ok(Self {
            order,
            theta_deg,
            phi_deg,
            sync_symbols: sync,
            payload_bits,
            schedule,
        })
    }

    /// Recovers the payload bits encoded in the schedule.
    ///
    /// Every tick frame must equal the first frame or its complement (a joint
    /// schedule only toggles between one pattern and its 180-degree flip); a
    /// frame that is neither pinpoints the corrupted tick and symbol. The
    /// extracted switching waveform is demodulated like a received signal,
    /// with the Barker sync symbols as pilots resolving the global state
    /// ambiguity.
    pub fn recover_payload(&self) -> Result<Vec<u8>> {
        let s = &self.schedule;
        let clock = s.control_clock() as usize;
        let base = s.frame_words(0).to_vec();
        let elements = s.elements();
        let full_words = elements / 64;
        let tail_mask = if elements.is_multiple_of(64) {
            0
        } else {
            (1u64 << (elements % 64)) - 1
        };

        let mut levels = Vec::with_capacity(s.tick_count());
        for tick in 0..s.tick_count() {
            let words = s.frame_words(tick);
            let same = words == base.as_slice();
            let flipped = words.iter().enumerate().all(|(i, &w)| {
                if i < full_words {
                    w == !base[i]
                } else {
                    w == (!base[i] & tail_mask)
                }
            });
            match (same, flipped) {
                (true, _) => levels.push(1.0),
                (false, true) => levels.push(-1.0),
                (false, false) => {
                    return Err(Error::ScheduleInconsistent {
                        tick,
                        symbol: tick / clock,
                    })
                }
            }
        }
        // the first frame's own switching state is unknown, so the extracted
        // waveform may be globally inverted; the pilot equalizer absorbs that
        let samples: Vec<Complex64> = levels
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let rate = 1.0 / s.tick_duration();
        let wave = IqWaveform::new(samples, rate, 0.0)?;

        let payload_symbols = self.payload_bits / self.order.bits_per_symbol();
        let fmt = if payload_symbols == 0 {
            FrameFormat::sync_only()
        } else {
            FrameFormat::new(payload_symbols, 0)?
        };
        let raw = demod_symbols(&wave, 0, &fmt, 1.0 / s.switching_period())?;
        let (eq, _gain) = equalize(&raw, &sync_symbols())?;
        for (i, (got, chip)) in eq.iter().zip(BARKER13).enumerate() {
            if (got - Complex64::new(f64::from(chip), 0.0)).norm() > 0.5 {
                return Err(Error::ScheduleInconsistent {
                    tick: i * clock,
                    symbol: i,
                });
            }
        }
        Ok(crate::coding::qam_demap(
            &eq[self.sync_symbols..],
            self.order,
        ))
    }
}
