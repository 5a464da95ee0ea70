//! Array geometry, feed propagation distances and spatial steering factors.
//!
//! The surface lies in the xy-plane with its elements on a uniform grid of
//! `rows x cols` and spacing `spacing_m`; the feed antenna sits at `feed_m`
//! behind it. Element indices `(m, n)` are 1-based, matching the index
//! arithmetic used throughout the phase formulas: offsets are taken from the
//! array center `(rows+1)/2, (cols+1)/2`, the `m` index pairs with
//! `sin(theta)*cos(phi)` and the `n` index with `sin(theta)*sin(phi)`.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Far-field direction in spherical coordinates.
///
/// `theta` is the polar angle off boresight in `[0, pi/2]`, `phi` the azimuth
/// in `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "polar angle {theta} rad outside [0, pi/2]"
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "azimuth {phi} rad outside [0, 2*pi)"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_deg(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Builds a direction from a signed polar angle on a fixed-azimuth cut.
    ///
    /// Negative angles map to the opposite azimuth half-plane, so a sweep over
    /// `[-90, 90]` degrees at `phi = 0` covers the full principal cut.
    pub fn from_signed_deg(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        if theta_deg >= 0.0 {
            Self::from_deg(theta_deg, phi_deg.rem_euclid(360.0))
        } else {
            Self::from_deg(-theta_deg, (phi_deg + 180.0).rem_euclid(360.0))
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit propagation vector `(sin t cos p, sin t sin p, cos t)`.
    pub fn unit_vector(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }
}

/// Physical description of the surface and its feed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    rows: usize,
    cols: usize,
    spacing_m: f64,
    carrier_hz: f64,
    feed_m: [f64; 3],
}

impl ArrayGeometry {
    pub fn new(
        rows: usize,
        cols: usize,
        spacing_m: f64,
        carrier_hz: f64,
        feed_m: [f64; 3],
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "array must have at least one row and one column".into(),
            ));
        }
        if spacing_m <= 0.0 || !spacing_m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "element spacing {spacing_m} m must be positive"
            )));
        }
        if carrier_hz <= 0.0 || !carrier_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency {carrier_hz} Hz must be positive"
            )));
        }
        if feed_m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("feed position must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            spacing_m,
            carrier_hz,
            feed_m,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn feed_m(&self) -> [f64; 3] {
        self.feed_m
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Free-space wavenumber `2*pi/lambda`.
    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength_m()
    }

    fn check_index(&self, m: usize, n: usize) -> Result<()> {
        if m == 0 || n == 0 || m > self.rows || n > self.cols {
            return Err(Error::IndexOutOfRange {
                m,
                n,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Centered row offset of element `m` in units of the spacing.
    fn row_offset(&self, m: usize) -> f64 {
        m as f64 - (self.rows as f64 + 1.0) / 2.0
    }

    fn col_offset(&self, n: usize) -> f64 {
        n as f64 - (self.cols as f64 + 1.0) / 2.0
    }

    /// Distance from the feed antenna to element `(m, n)` (1-based).
    ///
    /// The element sits at `x = (n - (cols+1)/2) * d`, `y = (m - (rows+1)/2) * d`,
    /// `z = 0`.
    pub fn feed_distance(&self, m: usize, n: usize) -> Result<f64> {
        self.check_index(m, n)?;
        let dx = self.col_offset(n) * self.spacing_m - self.feed_m[0];
        let dy = self.row_offset(m) * self.spacing_m - self.feed_m[1];
        Ok((dx * dx + dy * dy + self.feed_m[2] * self.feed_m[2]).sqrt())
    }

    /// Shortest feed-to-element distance over the whole array.
    pub fn min_feed_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for m in 1..=self.rows {
            for n in 1..=self.cols {
                let r = self.feed_distance(m, n).expect("index in range");
                if r < best {
                    best = r;
                }
            }
        }
        best
    }

    /// Spatial steering factor of element `(m, n)` toward `dir`.
    ///
    /// Unit-modulus phase delay relative to the array center; the row index
    /// pairs with `sin(theta)*cos(phi)` and the column index with
    /// `sin(theta)*sin(phi)`.
    pub fn steering_factor(&self, m: usize, n: usize, dir: &Direction) -> Result<Complex64> {
        self.check_index(m, n)?;
        let k = self.wavenumber();
        let st = dir.theta().sin();
        let phase = -k
            * self.spacing_m
            * st
            * (self.row_offset(m) * dir.phi().cos() + self.col_offset(n) * dir.phi().sin());
        Ok(Complex64::from_polar(1.0, phase))
    }

    /// Complex response of every element toward `dir`, row-major.
    ///
    /// Each entry combines the feed path phase `exp(j*K*r)`, the illumination
    /// taper `r_min/r` from the spreading loss of the feed, and the steering
    /// factor. Multiplying by the per-element phase state (+1/-1) and summing
    /// gives the far-field amplitude used by both waveform synthesis and the
    /// beamforming-gain computation.
    pub fn element_responses(&self, dir: &Direction) -> Vec<Complex64> {
        let k = self.wavenumber();
        let r_min = self.min_feed_distance();
        let mut out = Vec::with_capacity(self.elements());
        for m in 1..=self.rows {
            for n in 1..=self.cols {
                let r = self.feed_distance(m, n).expect("index in range");
                let w = self.steering_factor(m, n, dir).expect("index in range");
                out.push(Complex64::from_polar(r_min / r, k * r) * w);
            }
        }
        out
    }
}

/// Far-field amplitude of the array with the given per-element phase bits.
///
/// `bits` is row-major with `1` meaning a 180-degree phase offset. Summation
/// order is fixed (row-major), so results are bit-reproducible across the
/// pattern and synthesis paths.
pub fn array_response(geom: &ArrayGeometry, dir: &Direction, bits: &[u8]) -> Complex64 {
    let gains = geom.element_responses(dir);
    response_from_gains(&gains, bits)
}

pub(crate) fn response_from_gains(gains: &[Complex64], bits: &[u8]) -> Complex64 {
    debug_assert_eq!(gains.len(), bits.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (g, &b) in gains.iter().zip(bits) {
        acc += g * phase_sign(b);
    }
    acc
}

/// Exact +1/-1 multiplier for a 1-bit phase state.
#[inline]
pub(crate) fn phase_sign(bit: u8) -> f64 {
    1.0 - 2.0 * f64::from(bit & 1)
}
