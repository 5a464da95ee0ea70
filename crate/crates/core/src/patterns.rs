//! Transmit power patterns, beamforming gain and beam scanning.
//!
//! Two closely related field sums appear here. The plotted power pattern
//! weights each element by `1/r` exactly as the instantaneous-pattern formula
//! does; the beamforming gain uses the same normalized element responses as
//! waveform synthesis so that the gain equals the squared magnitude of the
//! separation scalar between joint-coded and time-only waveforms. The two
//! differ only by a constant factor, so normalized patterns and gain ratios
//! agree.

use crate::coding::{space_coding, SpaceCoding};
use crate::error::{Error, Result};
use crate::geometry::{array_response, ArrayGeometry, Direction};
use num_complex::Complex64;

/// One pattern cut: signed polar angles on a fixed-azimuth plane and the
/// normalized power at each.
#[derive(Debug, Clone)]
pub struct PatternCut {
    /// Signed polar angle [deg]; negative angles are the opposite azimuth
    /// half-plane.
    pub theta_deg: Vec<f64>,
    /// Power [dB], normalized so the peak is 0 dB.
    pub power_db: Vec<f64>,
    /// Azimuth of the cut [deg].
    pub phi_deg: f64,
}

impl PatternCut {
    /// Angle of the strongest grid point.
    pub fn peak_theta_deg(&self) -> f64 {
        let mut best = 0;
        for (i, v) in self.power_db.iter().enumerate() {
            if *v > self.power_db[best] {
                best = i;
            }
        }
        self.theta_deg[best]
    }
}

/// Default scan grid: the principal cut sampled at 0.1 degrees.
pub fn default_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(1801);
    for i in 0..=1800 {
        grid.push((i as f64 - 900.0) * 0.1);
    }
    grid
}

/// Instantaneous transmit power pattern of a static coding over a theta cut.
///
/// Per direction: `|sum exp(j*K*r)/r * (+/-1) * steering|^2`, normalized to a
/// 0 dB peak.
pub fn power_pattern(
    geom: &ArrayGeometry,
    space: &SpaceCoding,
    theta_deg: &[f64],
    phi_deg: f64,
) -> Result<PatternCut> {
    if theta_deg.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "pattern grid must be strictly increasing".into(),
        ));
    }
    let k = geom.wavenumber();
    let mut power = Vec::with_capacity(theta_deg.len());
    for &t in theta_deg {
        let dir = Direction::from_signed_deg(t, phi_deg)?;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0;
        for m in 1..=geom.rows() {
            for n in 1..=geom.cols() {
                let r = geom.feed_distance(m, n).expect("index in range");
                let w = geom.steering_factor(m, n, &dir).expect("index in range");
                let sign = crate::geometry::phase_sign(space.bits()[idx]);
                acc += Complex64::from_polar(sign / r, k * r) * w;
                idx += 1;
            }
        }
        power.push(acc.norm_sqr());
    }
    let peak = power.iter().cloned().fold(f64::MIN, f64::max);
    let power_db = power
        .iter()
        .map(|&p| 10.0 * (p.max(peak * 1e-30) / peak).log10())
        .collect();
    Ok(PatternCut {
        theta_deg: theta_deg.to_vec(),
        power_db,
        phi_deg,
    })
}

/// Beamforming gain at `dir`: received power with the steering space coding
/// over received power with all elements in one state.
pub fn beamforming_gain(geom: &ArrayGeometry, dir: &Direction) -> f64 {
    let steered = space_coding(geom, dir);
    let p_steered = array_response(geom, dir, steered.bits()).norm_sqr();
    let p_uniform = array_response(geom, dir, &vec![0u8; geom.elements()]).norm_sqr();
    10.0 * (p_steered / p_uniform).log10()
}

/// One row of a beam-scan sweep.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub commanded_deg: f64,
    pub peak_deg: f64,
    pub gain_db: f64,
}

/// Steers to each target, locates the pattern peak on the default grid and
/// reports the beamforming gain at the command angle.
pub fn beam_scan(geom: &ArrayGeometry, targets_deg: &[f64]) -> Result<Vec<ScanPoint>> {
    let grid = default_grid();
    let mut out = Vec::with_capacity(targets_deg.len());
    for &cmd in targets_deg {
        if cmd.abs() > 60.0 {
            return Err(Error::InvalidParameter(format!(
                "scan target {cmd} deg outside +/-60 deg"
            )));
        }
        let dir = Direction::from_signed_deg(cmd, 0.0)?;
        let space = space_coding(geom, &dir);
        let cut = power_pattern(geom, &space, &grid, 0.0)?;
        out.push(ScanPoint {
            commanded_deg: cmd,
            peak_deg: cut.peak_theta_deg(),
            gain_db: beamforming_gain(geom, &dir),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_geometry() -> ArrayGeometry {
        ArrayGeometry::new(16, 16, 0.043, 3.6e9, [0.0, 0.0, -0.2]).unwrap()
    }

    #[test]
    fn complement_coding_gives_identical_pattern() {
        let geom = reference_geometry();
        let dir = Direction::from_deg(30.0, 0.0).unwrap();
        let space = space_coding(&geom, &dir);
        let grid = default_grid();
        let a = power_pattern(&geom, &space, &grid, 0.0).unwrap();
        let b = power_pattern(&geom, &space.complement(), &grid, 0.0).unwrap();
        for (x, y) in a.power_db.iter().zip(&b.power_db) {
            assert_relative_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn steered_pattern_peaks_near_command() {
        let geom = reference_geometry();
        let dir = Direction::from_deg(30.0, 0.0).unwrap();
        let cut = power_pattern(&geom, &space_coding(&geom, &dir), &default_grid(), 0.0).unwrap();
        assert!(
            (cut.peak_theta_deg() - 30.0).abs() <= 1.0,
            "peak at {} deg",
            cut.peak_theta_deg()
        );
        assert!(cut.power_db.iter().all(|&v| v <= 1e-12));
    }

    #[test]
    fn far_feed_uniform_beamwidth_matches_aperture_formula() {
        // feed at effective infinity: uniform illumination, classical first
        // null at asin(lambda / (N d))
        let geom = ArrayGeometry::new(16, 16, 0.043, 3.6e9, [0.0, 0.0, -1.0e6]).unwrap();
        let space = SpaceCoding::uniform(&geom, 0);
        let grid: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.01).collect();
        let cut = power_pattern(&geom, &space, &grid, 0.0).unwrap();
        assert!(cut.peak_theta_deg().abs() < 0.02);
        // first local minimum past the peak
        let mut null_deg = None;
        for i in 1..cut.power_db.len() - 1 {
            if cut.power_db[i] < cut.power_db[i - 1]
                && cut.power_db[i] < cut.power_db[i + 1]
                && cut.power_db[i] < -20.0
            {
                null_deg = Some(cut.theta_deg[i]);
                break;
            }
        }
        let null_deg = null_deg.expect("null found");
        let expect = (geom.wavelength_m() / (16.0 * 0.043)).asin().to_degrees();
        assert!(
            (null_deg - expect).abs() / expect < 0.10,
            "first null {null_deg} deg vs {expect} deg"
        );
    }

    #[test]
    fn gain_reference_cases() {
        let single = ArrayGeometry::new(1, 1, 0.043, 3.6e9, [0.0, 0.0, -0.2]).unwrap();
        let dir = Direction::from_deg(30.0, 0.0).unwrap();
        assert_relative_eq!(beamforming_gain(&single, &dir), 0.0, epsilon = 1e-9);

        let geom = reference_geometry();
        let g = beamforming_gain(&geom, &dir);
        assert!((19.0..=25.0).contains(&g), "gain {g:.2} dB");

        // complement invariance
        let steered = space_coding(&geom, &dir);
        let p1 = array_response(&geom, &dir, steered.bits()).norm_sqr();
        let p2 = array_response(&geom, &dir, steered.complement().bits()).norm_sqr();
        assert_relative_eq!(p1, p2, max_relative = 1e-12);
    }

    #[test]
    fn boresight_cut_is_symmetric() {
        let geom = reference_geometry();
        let dir = Direction::new(0.0, 0.0).unwrap();
        let cut = power_pattern(&geom, &space_coding(&geom, &dir), &default_grid(), 0.0).unwrap();
        let n = cut.theta_deg.len();
        for i in 0..n / 2 {
            assert_relative_eq!(cut.power_db[i], cut.power_db[n - 1 - i], epsilon = 1e-9);
        }
    }

    #[test]
    fn scan_peaks_track_commands() {
        let geom = reference_geometry();
        let points = beam_scan(&geom, &[-30.0, 0.0, 30.0]).unwrap();
        for p in &points {
            assert!(
                (p.peak_deg - p.commanded_deg).abs() <= 0.1 + 1e-9,
                "command {} deg peaked at {} deg",
                p.commanded_deg,
                p.peak_deg
            );
        }
    }

    #[test]
    fn scan_rejects_out_of_range_targets() {
        let geom = reference_geometry();
        assert!(beam_scan(&geom, &[65.0]).is_err());
    }

    #[test]
    fn scan_gain_snapshot() {
        // regression snapshot of the reference-geometry sweep; gains are not monotone
        // in the scan angle because the unsteered baseline has its own
        // sidelobe structure
        let geom = reference_geometry();
        let points = beam_scan(&geom, &[0.0, 15.0, 30.0, 45.0]).unwrap();
        let expect = [17.79, 17.24, 22.22, 19.38];
        for (p, e) in points.iter().zip(expect) {
            assert!(
                (p.gain_db - e).abs() < 0.05,
                "gain at {} deg: {:.2} dB vs snapshot {:.2} dB",
                p.commanded_deg,
                p.gain_db,
                e
            );
        }
    }
}
