//! Subcommand implementations: each runs one reproduction pipeline and writes
//! plot-ready CSV files plus a short text summary.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use ris_stc::{
    beam_scan, beamforming_gain, nearest_symbol_index, power_pattern, power_spectrum, run_link,
    space_coding, QamOrder, ScheduleFile, SpaceCoding,
};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn create(out: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    let path = out.join(name);
    let file =
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Steered and uniform pattern cuts plus a gain summary.
pub fn run_pattern(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let geom = cfg.geometry()?;
    let dir = cfg.direction()?;
    let grid = ris_stc::patterns::default_grid();

    let steered = power_pattern(&geom, &space_coding(&geom, &dir), &grid, cfg.link.phi_deg)?;
    let uniform = power_pattern(&geom, &SpaceCoding::uniform(&geom, 0), &grid, cfg.link.phi_deg)?;
    for (name, cut) in [("pattern_steered.csv", &steered), ("pattern_uniform.csv", &uniform)] {
        let mut w = create(out, name)?;
        writeln!(w, "theta_deg,power_db")?;
        for (t, p) in cut.theta_deg.iter().zip(&cut.power_db) {
            writeln!(w, "{t},{p:.6}")?;
        }
    }

    let gain = beamforming_gain(&geom, &dir);
    let mut s = create(out, "pattern_summary.txt")?;
    writeln!(s, "steer_theta_deg = {}", cfg.link.theta_deg)?;
    writeln!(s, "steer_phi_deg = {}", cfg.link.phi_deg)?;
    writeln!(s, "beamforming_gain_db = {gain:.4}")?;
    writeln!(s, "steered_peak_theta_deg = {}", steered.peak_theta_deg())?;
    println!(
        "pattern: gain {gain:.2} dB at ({}, {}) deg, steered peak at {} deg",
        cfg.link.theta_deg,
        cfg.link.phi_deg,
        steered.peak_theta_deg()
    );
    Ok(())
}

/// Beam-scan table over the configured target angles.
pub fn run_scan(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let geom = cfg.geometry()?;
    let points = beam_scan(&geom, &cfg.scan.targets_deg)?;
    let mut w = create(out, "scan.csv")?;
    writeln!(w, "commanded_theta_deg,peak_theta_deg,gain_db")?;
    for p in &points {
        writeln!(w, "{},{},{:.4}", p.commanded_deg, p.peak_deg, p.gain_db)?;
        println!(
            "scan: command {:+.1} deg -> peak {:+.1} deg, gain {:.2} dB",
            p.commanded_deg, p.peak_deg, p.gain_db
        );
    }
    Ok(())
}

fn leg_outputs(
    out: &Path,
    suffix: &str,
    label: &str,
    leg: &ris_stc::link::LinkLeg,
    order: QamOrder,
    nfft: usize,
) -> Result<()> {
    let w = &leg.waveform;
    let mut f = create(out, &format!("{label}_waveform{suffix}.csv"))?;
    writeln!(f, "t_s,i,q")?;
    for (i, s) in w.samples().iter().enumerate() {
        writeln!(
            f,
            "{:e},{:.9e},{:.9e}",
            w.t0() + i as f64 / w.sample_rate(),
            s.re,
            s.im
        )?;
    }

    let spec = power_spectrum(w, nfft.min(w.len()))?;
    let mut f = create(out, &format!("{label}_spectrum{suffix}.csv"))?;
    writeln!(f, "f_offset_hz,power_db")?;
    for (freq, p) in spec.freq_hz.iter().zip(spec.power_db()) {
        writeln!(f, "{freq},{p:.4}")?;
    }

    let table = order.constellation();
    let mut f = create(out, &format!("{label}_constellation{suffix}.csv"))?;
    writeln!(f, "i,q,decided_symbol_index")?;
    for s in &leg.report.symbols {
        writeln!(
            f,
            "{:.9e},{:.9e},{}",
            s.re,
            s.im,
            nearest_symbol_index(*s, &table)
        )?;
    }
    Ok(())
}

/// Full link with and without beamforming at each configured SNR.
pub fn run_link_cmd(cfg: &ExperimentConfig, out: &Path, no_noise: bool) -> Result<()> {
    let params = cfg.link_params()?;
    let order = cfg.order()?;
    let payload = cfg.payload_bits()?;
    let snrs: Vec<f64> = if no_noise {
        vec![f64::INFINITY]
    } else {
        cfg.link.snr_db.clone()
    };
    let many = snrs.len() > 1;

    for &snr in &snrs {
        let suffix = if many { format!("_snr{snr}") } else { String::new() };
        let run = run_link(&params, order, &payload, snr)?;
        leg_outputs(out, &suffix, "joint", &run.joint, order, cfg.link.spectrum_nfft)?;
        leg_outputs(
            out,
            &suffix,
            "timeonly",
            &run.time_only,
            order,
            cfg.link.spectrum_nfft,
        )?;

        let ratio_db = 10.0 * (run.joint.clean_power / run.time_only.clean_power).log10();
        let mut r = create(out, &format!("link_report{suffix}.txt"))?;
        writeln!(r, "order = {}", order.order())?;
        writeln!(r, "snr_db = {snr}")?;
        writeln!(r, "payload_bits = {}", run.sent_bits.len())?;
        writeln!(r, "reference_power = {:.6e}", run.reference_power)?;
        writeln!(r, "beamforming_gain_db = {:.4}", run.beamforming_gain_db)?;
        writeln!(r, "clean_power_ratio_db = {ratio_db:.4}")?;
        for (label, leg) in [("joint", &run.joint), ("time-only", &run.time_only)] {
            writeln!(
                r,
                "{label}: rms_evm_percent = {:.4}, ber = {:.6e}, sync_offset = {}",
                leg.report.rms_evm, leg.report.ber, leg.report.sync_offset
            )?;
        }
        println!(
            "link @ {snr} dB: joint evm {:.2}% ber {:.1e} | time-only evm {:.2}% ber {:.1e} | power ratio {ratio_db:.2} dB",
            run.joint.report.rms_evm,
            run.joint.report.ber,
            run.time_only.report.rms_evm,
            run.time_only.report.ber,
        );
    }
    Ok(())
}

/// BER-vs-SNR sweep per order and coding mode.
pub fn run_ber(cfg: &ExperimentConfig, out: &Path, no_noise: bool) -> Result<()> {
    let params = cfg.link_params()?;
    let orders: Vec<QamOrder> = cfg
        .ber
        .orders
        .iter()
        .map(|&o| QamOrder::from_order(o))
        .collect::<ris_stc::Result<_>>()?;
    let snrs: Vec<f64> = if no_noise {
        vec![f64::INFINITY]
    } else {
        cfg.ber.snr_db.clone()
    };
    let points = ris_stc::ber_sweep(&params, &orders, &snrs, cfg.ber.min_bits)?;

    let mut w = create(out, "ber.csv")?;
    writeln!(w, "snr_db,order,coding,ber,bits")?;
    for p in &points {
        writeln!(
            w,
            "{},{},{},{:.6e},{}",
            p.snr_db,
            p.order,
            p.mode.label(),
            p.ber(),
            p.bits
        )?;
        println!(
            "ber: snr {:+6.1} dB {:>2}QAM {:>9}: {:.3e} ({} bits)",
            p.snr_db,
            p.order,
            p.mode.label(),
            p.ber(),
            p.bits
        );
    }
    Ok(())
}

/// Writes the joint schedule file for the configured payload.
pub fn run_codegen(
    cfg: &ExperimentConfig,
    out: &Path,
    payload_override: Option<&str>,
) -> Result<PathBuf> {
    let geom = cfg.geometry()?;
    let dir = cfg.direction()?;
    let order = cfg.order()?;
    let payload = match payload_override {
        Some(text) => {
            let mut c = cfg.clone();
            c.link.payload_bits = Some(text.to_string());
            c.payload_bits()?
        }
        None => cfg.payload_bits()?,
    };
    let file = ris_stc::generate_schedule(
        &geom,
        &dir,
        order,
        cfg.modulation.switch_rate_hz,
        cfg.modulation.control_clock,
        &payload,
    )?;
    let path = out.join("schedule.txt");
    file.write_to(BufWriter::new(
        fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))?;

    let mut p = create(out, "payload_bits.txt")?;
    for b in &payload {
        write!(p, "{b}")?;
    }
    writeln!(p)?;
    println!(
        "codegen: {} payload bits -> {} ticks in {}",
        payload.len(),
        file.schedule.tick_count(),
        path.display()
    );
    Ok(path)
}

/// Parses a schedule file, verifies its consistency and prints the payload.
pub fn run_codecheck(schedule_path: &Path) -> Result<Vec<u8>> {
    let file = fs::File::open(schedule_path)
        .with_context(|| format!("opening {}", schedule_path.display()))?;
    let schedule = ScheduleFile::read_from(std::io::BufReader::new(file))?;
    let payload = schedule.recover_payload()?;
    let text: String = payload.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
    println!("{text}");
    Ok(payload)
}
