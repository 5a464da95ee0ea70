//! Experiment configuration: TOML sections with strict key checking.
//!
//! Every key has a default matching the reference numeric setup (16x16 array
//! at 3.6 GHz, 100 kHz switching, 20 MSps, feed 200 mm behind the center,
//! receiver at (30, 0) degrees, 10 dB SNR), so an empty file runs the stock
//! experiment. Unknown keys are rejected rather than ignored.

use anyhow::{bail, Context, Result};
use ris_stc::{ArrayGeometry, Direction, LinkParams, QamOrder};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub carrier_hz: f64,
    pub feed_m: [f64; 3],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 16,
            spacing_m: 0.043,
            carrier_hz: 3.6e9,
            feed_m: [0.0, 0.0, -0.2],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationConfig {
    pub order: u32,
    pub switch_rate_hz: f64,
    pub control_clock: u32,
    pub sample_rate_hz: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self {
            order: 16,
            switch_rate_hz: 100e3,
            control_clock: 200,
            sample_rate_hz: 20e6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub snr_db: Vec<f64>,
    pub payload_symbols: usize,
    pub pilot_symbols: usize,
    pub seed: u64,
    /// Explicit payload as a '0'/'1' string; overrides the seeded payload.
    pub payload_bits: Option<String>,
    pub spectrum_nfft: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            theta_deg: 30.0,
            phi_deg: 0.0,
            snr_db: vec![10.0],
            payload_symbols: 256,
            pilot_symbols: 0,
            seed: 1,
            payload_bits: None,
            spectrum_nfft: 4096,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerConfig {
    pub orders: Vec<u32>,
    pub snr_db: Vec<f64>,
    pub min_bits: usize,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            orders: vec![4, 16, 64],
            snr_db: (-6..=2).map(|i| f64::from(i) * 5.0).collect(),
            min_bits: 100_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub targets_deg: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            targets_deg: (-3..=3).map(|i| f64::from(i) * 15.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub modulation: ModulationConfig,
    pub link: LinkConfig,
    pub ber: BerConfig,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        Ok(ArrayGeometry::new(
            g.rows,
            g.cols,
            g.spacing_m,
            g.carrier_hz,
            g.feed_m,
        )?)
    }

    pub fn direction(&self) -> Result<Direction> {
        Ok(Direction::from_signed_deg(
            self.link.theta_deg,
            self.link.phi_deg,
        )?)
    }

    pub fn order(&self) -> Result<QamOrder> {
        Ok(QamOrder::from_order(self.modulation.order)?)
    }

    /// Payload bits for link/codegen runs: explicit string if given,
    /// otherwise seeded uniform bits filling `payload_symbols`.
    pub fn payload_bits(&self) -> Result<Vec<u8>> {
        let order = self.order()?;
        match &self.link.payload_bits {
            Some(text) => {
                let mut bits = Vec::with_capacity(text.len());
                for c in text.chars() {
                    match c {
                        '0' => bits.push(0),
                        '1' => bits.push(1),
                        ' ' | '_' => {}
                        other => bail!("payload_bits contains invalid character '{other}'"),
                    }
                }
                if !bits.is_empty() && bits.len() % order.bits_per_symbol() != 0 {
                    bail!(
                        "payload_bits length {} is not divisible by {} bits per symbol",
                        bits.len(),
                        order.bits_per_symbol()
                    );
                }
                Ok(bits)
            }
            None => {
                use rand::Rng;
                let n = self.link.payload_symbols * order.bits_per_symbol();
                let mut rng = ris_stc::rng::stream_rng(self.link.seed, &[0x7061796c]);
                Ok((0..n).map(|_| rng.gen_range(0..2u8)).collect())
            }
        }
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        let payload_symbols = match &self.link.payload_bits {
            Some(_) => {
                let bits = self.payload_bits()?;
                (bits.len() / self.order()?.bits_per_symbol()).max(1)
            }
            None => self.link.payload_symbols,
        };
        Ok(LinkParams {
            geom: self.geometry()?,
            dir: self.direction()?,
            switch_rate: self.modulation.switch_rate_hz,
            control_clock: self.modulation.control_clock,
            sample_rate: self.modulation.sample_rate_hz,
            payload_symbols,
            pilot_symbols: self.link.pilot_symbols,
            seed: self.link.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.geometry.rows, 16);
        assert_eq!(cfg.geometry.cols, 16);
        assert_eq!(cfg.geometry.spacing_m, 0.043);
        assert_eq!(cfg.geometry.carrier_hz, 3.6e9);
        assert_eq!(cfg.geometry.feed_m, [0.0, 0.0, -0.2]);
        assert_eq!(cfg.modulation.order, 16);
        assert_eq!(cfg.modulation.switch_rate_hz, 100e3);
        assert_eq!(cfg.modulation.sample_rate_hz, 20e6);
        assert_eq!(cfg.modulation.control_clock, 200);
        assert_eq!(cfg.link.theta_deg, 30.0);
        assert_eq!(cfg.link.phi_deg, 0.0);
        assert_eq!(cfg.link.snr_db, vec![10.0]);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = ExperimentConfig::parse("[geometry]\nrowz = 8\n").unwrap_err();
        assert!(err.to_string().contains("rowz"), "{err}");
        let err = ExperimentConfig::parse("[nonsense]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("nonsense"), "{err}");
    }

    #[test]
    fn explicit_payload_bits_drive_frame_length() {
        let cfg = ExperimentConfig::parse("[link]\npayload_bits = \"0011 0110\"\n").unwrap();
        let bits = cfg.payload_bits().unwrap();
        assert_eq!(bits.len(), 8);
        assert_eq!(cfg.link_params().unwrap().payload_symbols, 2);
    }

    #[test]
    fn ragged_payload_bits_rejected() {
        let cfg = ExperimentConfig::parse("[link]\npayload_bits = \"001\"\n").unwrap();
        assert!(cfg.payload_bits().is_err());
    }
}
