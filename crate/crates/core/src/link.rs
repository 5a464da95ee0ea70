//! End-to-end link pipelines: frame construction, transmit synthesis,
//! reception and BER Monte Carlo.

use crate::coding::{
    joint_code, qam_map, space_coding, symbols_to_timecode, QamOrder, SpaceCoding, TimeCode,
};
use crate::error::Result;
use crate::geometry::{ArrayGeometry, Direction};
use crate::rng::stream_rng;
use crate::rx::{
    barker_sync, demod_symbols, equalize, metrics, sync_symbols, DemodReport, FrameFormat,
};
use crate::synthesis::{add_awgn, reference_power, synthesize_rx, ChannelConfig, IqWaveform};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

/// Whether the space coding steers the beam or all elements share one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    /// XOR of steering space coding and time coding.
    Joint,
    /// Time coding only (uniform space coding).
    TimeOnly,
}

impl CodingMode {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Joint => "joint",
            Self::TimeOnly => "time-only",
        }
    }
}

/// Everything needed to run a link besides payload and SNR.
#[derive(Debug, Clone)]
pub struct LinkParams {
    pub geom: ArrayGeometry,
    pub dir: Direction,
    pub switch_rate: f64,
    pub control_clock: u32,
    pub sample_rate: f64,
    pub payload_symbols: usize,
    pub pilot_symbols: usize,
    pub seed: u64,
}

impl LinkParams {
    pub fn period(&self) -> f64 {
        1.0 / self.switch_rate
    }

    pub fn samples_per_symbol(&self) -> usize {
        (self.sample_rate / self.switch_rate).round() as usize
    }

    pub fn frame_format(&self) -> Result<FrameFormat> {
        FrameFormat::new(self.payload_symbols, self.pilot_symbols)
    }
}

/// Sync prefix plus mapped payload.
pub fn frame_symbols(payload_bits: &[u8], order: QamOrder) -> Result<Vec<Complex64>> {
    let mut symbols = sync_symbols();
    symbols.extend(qam_map(payload_bits, order)?);
    Ok(symbols)
}

/// Space coding for a mode: steering pattern or all-zero.
pub fn mode_space_coding(
    geom: &ArrayGeometry,
    dir: &Direction,
    mode: CodingMode,
) -> SpaceCoding {
    match mode {
        CodingMode::Joint => space_coding(geom, dir),
        CodingMode::TimeOnly => SpaceCoding::uniform(geom, 0),
    }
}

/// Synthesizes the clean received waveform of one frame.
pub fn transmit_frame(
    params: &LinkParams,
    order: QamOrder,
    mode: CodingMode,
    payload_bits: &[u8],
) -> Result<(IqWaveform, TimeCode)> {
    let symbols = frame_symbols(payload_bits, order)?;
    let timecode = symbols_to_timecode(&symbols, params.period(), params.control_clock)?;
    let space = mode_space_coding(&params.geom, &params.dir, mode);
    let schedule = joint_code(&space, &timecode);
    let waveform = synthesize_rx(&params.geom, &schedule, &params.dir, params.sample_rate)?;
    Ok((waveform, timecode))
}

/// Demodulates one frame.
///
/// With `known_offset` the sync search is skipped (used by the Monte Carlo
/// where the frame start is known); otherwise the Barker correlator locates
/// it.
pub fn receive_frame(
    params: &LinkParams,
    waveform: &IqWaveform,
    order: QamOrder,
    sent_payload_symbols: &[Complex64],
    sent_payload_bits: &[u8],
    known_offset: Option<usize>,
) -> Result<DemodReport> {
    let fmt = params.frame_format()?;
    let offset = match known_offset {
        Some(o) => o,
        None => barker_sync(waveform, &fmt, params.samples_per_symbol())?,
    };
    let raw = demod_symbols(waveform, offset, &fmt, params.switch_rate)?;
    let mut pilots = sync_symbols();
    pilots.extend_from_slice(&sent_payload_symbols[..fmt.pilot_symbols.min(raw.len())]);
    let (equalized, _gain) = equalize(&raw, &pilots)?;
    let payload = &equalized[fmt.sync_symbols()..];
    metrics(payload, sent_payload_symbols, sent_payload_bits, order, offset)
}

/// One leg (coding mode) of a link run.
#[derive(Debug, Clone)]
pub struct LinkLeg {
    /// Received waveform after the channel.
    pub waveform: IqWaveform,
    /// Mean received power before noise.
    pub clean_power: f64,
    pub report: DemodReport,
}

/// Outcome of a full joint vs time-only comparison run.
#[derive(Debug, Clone)]
pub struct LinkRun {
    pub joint: LinkLeg,
    pub time_only: LinkLeg,
    pub sent_symbols: Vec<Complex64>,
    pub sent_bits: Vec<u8>,
    /// Time-only mean power the SNR is referenced to.
    pub reference_power: f64,
    pub beamforming_gain_db: f64,
}

/// Runs the full chain once with and once without beamforming at one SNR.
///
/// An infinite `snr_db` disables noise. Both legs share the payload and the
/// noise reference; noise realizations are independent per leg but fixed by
/// the seed.
pub fn run_link(
    params: &LinkParams,
    order: QamOrder,
    payload_bits: &[u8],
    snr_db: f64,
) -> Result<LinkRun> {
    let sent_symbols = qam_map(payload_bits, order)?;
    let mut legs = Vec::with_capacity(2);
    let mut reference = None;
    for (i, mode) in [CodingMode::Joint, CodingMode::TimeOnly].into_iter().enumerate() {
        let (clean, timecode) = transmit_frame(params, order, mode, payload_bits)?;
        let reference_power = match reference {
            Some(p) => p,
            None => {
                let p = reference_power(&params.geom, &params.dir, &timecode)?;
                reference = Some(p);
                p
            }
        };
        let channel = ChannelConfig::new(
            snr_db,
            reference_power,
            crate::rng::derive_seed(params.seed, &[0x6c69_6e6b, i as u64]),
        )?;
        let noisy = add_awgn(&clean, &channel);
        let report = receive_frame(params, &noisy, order, &sent_symbols, payload_bits, None)?;
        legs.push(LinkLeg {
            clean_power: clean.mean_power(),
            waveform: noisy,
            report,
        });
    }
    let time_only = legs.pop().expect("two legs");
    let joint = legs.pop().expect("two legs");
    Ok(LinkRun {
        joint,
        time_only,
        sent_symbols,
        sent_bits: payload_bits.to_vec(),
        reference_power: reference.expect("reference computed"),
        beamforming_gain_db: crate::patterns::beamforming_gain(&params.geom, &params.dir),
    })
}

/// One measured BER point.
#[derive(Debug, Clone, Copy)]
pub struct BerPoint {
    pub snr_db: f64,
    pub order: u32,
    pub mode: CodingMode,
    pub errors: usize,
    pub bits: usize,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

/// Monte-Carlo BER at one (order, mode, SNR) point.
///
/// Frames are independent trials with payloads and noise drawn from streams
/// derived from `(seed, order, mode, SNR, frame index)`, so results do not
/// depend on thread scheduling. The frame start is known to the receiver;
/// equalization still runs on the sync pilots per frame.
pub fn ber_point(
    params: &LinkParams,
    order: QamOrder,
    mode: CodingMode,
    snr_db: f64,
    min_bits: usize,
) -> Result<BerPoint> {
    let bits_per_frame = params.payload_symbols * order.bits_per_symbol();
    let frames = min_bits.div_ceil(bits_per_frame).max(1);
    let point_label = [
        0x6265_7270,
        u64::from(order.order()),
        mode as u64,
        snr_db.to_bits(),
    ];
    let point_seed = crate::rng::derive_seed(params.seed, &point_label);

    // SNR reference from a canonical short time coding; the time-only mean
    // power does not depend on the payload
    let ref_code = symbols_to_timecode(&sync_symbols(), params.period(), params.control_clock)?;
    let ref_power = reference_power(&params.geom, &params.dir, &ref_code)?;

    let results: Result<Vec<(usize, usize)>> = (0..frames)
        .into_par_iter()
        .map(|frame| {
            let mut rng = stream_rng(point_seed, &[frame as u64, 0]);
            let payload_bits: Vec<u8> =
                (0..bits_per_frame).map(|_| rng.gen_range(0..2u8)).collect();
            let sent = qam_map(&payload_bits, order)?;
            let (clean, _tc) = transmit_frame(params, order, mode, &payload_bits)?;
            let channel = ChannelConfig::new(
                snr_db,
                ref_power,
                crate::rng::derive_seed(point_seed, &[frame as u64, 1]),
            )?;
            let noisy = add_awgn(&clean, &channel);
            let report = receive_frame(params, &noisy, order, &sent, &payload_bits, Some(0))?;
            let errors = report
                .bits
                .iter()
                .zip(&payload_bits)
                .filter(|(a, b)| a != b)
                .count();
            Ok((errors, payload_bits.len()))
        })
        .collect();
    let mut errors = 0;
    let mut bits = 0;
    for (e, b) in results? {
        errors += e;
        bits += b;
    }
    Ok(BerPoint {
        snr_db,
        order: order.order(),
        mode,
        errors,
        bits,
    })
}

/// Full BER sweep over orders, coding modes and SNR grid.
pub fn ber_sweep(
    params: &LinkParams,
    orders: &[QamOrder],
    snrs_db: &[f64],
    min_bits: usize,
) -> Result<Vec<BerPoint>> {
    let mut out = Vec::new();
    for &order in orders {
        for mode in [CodingMode::Joint, CodingMode::TimeOnly] {
            for &snr in snrs_db {
                out.push(ber_point(params, order, mode, snr, min_bits)?);
            }
        }
    }
    Ok(out)
}

/// Interpolated SNR at which a BER curve crosses `target_ber`.
///
/// Points must be sorted by SNR; interpolation is linear in `log10(BER)`.
/// Returns `None` when the curve does not cross the target.
pub fn snr_at_ber(points: &[(f64, f64)], target_ber: f64) -> Option<f64> {
    let lt = target_ber.log10();
    for w in points.windows(2) {
        let (s0, b0) = w[0];
        let (s1, b1) = w[1];
        if b0 <= 0.0 || b1 <= 0.0 {
            continue;
        }
        let (l0, l1) = (b0.log10(), b1.log10());
        if (l0 - lt) * (l1 - lt) <= 0.0 && l0 != l1 {
            return Some(s0 + (s1 - s0) * (lt - l0) / (l1 - l0));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LinkParams {
        LinkParams {
            geom: ArrayGeometry::new(16, 16, 0.043, 3.6e9, [0.0, 0.0, -0.2]).unwrap(),
            dir: Direction::from_deg(30.0, 0.0).unwrap(),
            switch_rate: 100e3,
            control_clock: 200,
            sample_rate: 20e6,
            payload_symbols: 32,
            pilot_symbols: 0,
            seed: 7,
        }
    }

    fn random_bits(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = stream_rng(seed, &[99]);
        (0..n).map(|_| rng.gen_range(0..2u8)).collect()
    }

    #[test]
    fn noiseless_link_is_error_free_and_tight() {
        let p = params();
        let bits = random_bits(32 * 4, 1);
        let run = run_link(&p, QamOrder::Qam16, &bits, f64::INFINITY).unwrap();
        assert_eq!(run.joint.report.ber, 0.0);
        assert_eq!(run.time_only.report.ber, 0.0);
        assert!(run.joint.report.rms_evm < 1.0, "{}", run.joint.report.rms_evm);
        assert!(run.time_only.report.rms_evm < 1.0);
        // separation: both legs recover the same symbols
        for (a, b) in run
            .joint
            .report
            .symbols
            .iter()
            .zip(&run.time_only.report.symbols)
        {
            assert!((a - b).norm() < 1e-6 * a.norm().max(1.0));
        }
    }

    #[test]
    fn joint_leg_is_cleaner_at_ten_db() {
        let p = params();
        let bits = random_bits(32 * 4, 2);
        let run = run_link(&p, QamOrder::Qam16, &bits, 10.0).unwrap();
        assert!(
            run.joint.report.rms_evm < run.time_only.report.rms_evm,
            "joint {} vs time-only {}",
            run.joint.report.rms_evm,
            run.time_only.report.rms_evm
        );
        let ratio_db = 10.0 * (run.joint.clean_power / run.time_only.clean_power).log10();
        assert!((ratio_db - run.beamforming_gain_db).abs() < 1e-6);
    }

    #[test]
    fn link_runs_are_reproducible() {
        let p = params();
        let bits = random_bits(32 * 4, 3);
        let a = run_link(&p, QamOrder::Qam16, &bits, 10.0).unwrap();
        let b = run_link(&p, QamOrder::Qam16, &bits, 10.0).unwrap();
        assert_eq!(a.joint.waveform.samples(), b.joint.waveform.samples());
        assert_eq!(a.joint.report.bits, b.joint.report.bits);
        assert_eq!(a.time_only.report.bits, b.time_only.report.bits);
    }

    #[test]
    fn ber_point_counts_bits() {
        let p = params();
        let point = ber_point(&p, QamOrder::Qam4, CodingMode::Joint, f64::INFINITY, 1000).unwrap();
        assert!(point.bits >= 1000);
        assert_eq!(point.errors, 0);
    }

    #[test]
    fn snr_interpolation() {
        let pts = vec![(0.0, 1e-2), (2.0, 1e-4)];
        let snr = snr_at_ber(&pts, 1e-3).unwrap();
        assert!((snr - 1.0).abs() < 1e-9);
        assert!(snr_at_ber(&pts, 1e-6).is_none());
    }
}
