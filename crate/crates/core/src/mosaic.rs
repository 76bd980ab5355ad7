//! Division-of-focal-plane polarization mosaics: angle extraction, Stokes
//! parameters, degree and angle of linear polarization.
//!
//! Only the linear Stokes components are produced. A four-angle micro-polarizer
//! sensor carries no circular analyzer, so `S3` is not observable.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Real;

/// Polarizer orientation of a mosaic pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Angle {
    A0,
    A45,
    A90,
    A135,
}

impl Angle {
    pub const ALL: [Angle; 4] = [Angle::A0, Angle::A45, Angle::A90, Angle::A135];

    pub fn degrees(self) -> u32 {
        match self {
            Angle::A0 => 0,
            Angle::A45 => 45,
            Angle::A90 => 90,
            Angle::A135 => 135,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.degrees() == deg)
    }
}

/// Assignment of polarizer angles to the four positions of a 2x2 superpixel,
/// in the order top-left, top-right, bottom-left, bottom-right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MosaicLayout([Angle; 4]);

impl Default for MosaicLayout {
    /// Sony IMX250MZR ordering: 90 / 45 over 135 / 0.
    fn default() -> Self {
        Self([Angle::A90, Angle::A45, Angle::A135, Angle::A0])
    }
}

impl MosaicLayout {
    /// Fails unless the four angles are a permutation of {0, 45, 90, 135}.
    pub fn new(positions: [Angle; 4]) -> Result<Self> {
        for a in Angle::ALL {
            if !positions.contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "mosaic layout must use each angle once, {}° missing",
                    a.degrees()
                )));
            }
        }
        Ok(Self(positions))
    }

    pub fn positions(&self) -> [Angle; 4] {
        self.0
    }

    /// `(row, col)` offset of `angle` inside the superpixel.
    pub fn offset(&self, angle: Angle) -> (usize, usize) {
        let i = self.0.iter().position(|&a| a == angle).expect("layout is a permutation");
        (i / 2, i % 2)
    }
}

impl fmt::Display for MosaicLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.0.map(Angle::degrees);
        write!(f, "{},{},{},{}", d[0], d[1], d[2], d[3])
    }
}

impl FromStr for MosaicLayout {
    type Err = Error;

    /// Parses `"90,45,135,0"` (top-left, top-right, bottom-left, bottom-right).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("bad mosaic layout {s:?}, expected e.g. 90,45,135,0"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let mut out = [Angle::A0; 4];
        for (slot, p) in out.iter_mut().zip(parts) {
            *slot = p.parse().ok().and_then(Angle::from_degrees).ok_or_else(bad)?;
        }
        Self::new(out)
    }
}

/// The four quarter-resolution angle planes of a mosaic.
#[derive(Clone, Debug, PartialEq)]
pub struct AnglePlanes<T = f64> {
    pub i0: GrayImage<T>,
    pub i45: GrayImage<T>,
    pub i90: GrayImage<T>,
    pub i135: GrayImage<T>,
}

impl<T: Real> AnglePlanes<T> {
    pub fn get(&self, angle: Angle) -> &GrayImage<T> {
        match angle {
            Angle::A0 => &self.i0,
            Angle::A45 => &self.i45,
            Angle::A90 => &self.i90,
            Angle::A135 => &self.i135,
        }
    }

    fn ensure_consistent(&self) -> Result<()> {
        self.i0.ensure_same_dims(&self.i45)?;
        self.i0.ensure_same_dims(&self.i90)?;
        self.i0.ensure_same_dims(&self.i135)
    }

    /// Interleaves the planes back into a full-resolution mosaic.
    pub fn reassemble(&self, layout: MosaicLayout) -> Result<GrayImage<T>> {
        self.ensure_consistent()?;
        let (rows, cols) = self.i0.dims();
        let mut raw = GrayImage::zeros(rows * 2, cols * 2)?;
        for angle in Angle::ALL {
            let (dr, dc) = layout.offset(angle);
            let plane = self.get(angle);
            for r in 0..rows {
                for c in 0..cols {
                    raw[(2 * r + dr, 2 * c + dc)] = plane[(r, c)];
                }
            }
        }
        Ok(raw)
    }
}

/// Splits a raw mosaic into its angle planes. No interpolation is performed:
/// plane pixel `(r, c)` is the raw pixel at the angle's position inside
/// superpixel `(r, c)`.
pub fn demosaic<T: Real>(raw: &GrayImage<T>, layout: MosaicLayout) -> Result<AnglePlanes<T>> {
    let (rows, cols) = raw.dims();
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::Dimensions(format!("mosaic dimensions must be even, got {rows}x{cols}")));
    }
    let extract = |angle: Angle| {
        let (dr, dc) = layout.offset(angle);
        GrayImage::from_fn(rows / 2, cols / 2, |r, c| raw[(2 * r + dr, 2 * c + dc)])
    };
    Ok(AnglePlanes {
        i0: extract(Angle::A0)?,
        i45: extract(Angle::A45)?,
        i90: extract(Angle::A90)?,
        i135: extract(Angle::A135)?,
    })
}

/// Linear Stokes components.
#[derive(Clone, Debug, PartialEq)]
pub struct Stokes<T = f64> {
    pub s0: GrayImage<T>,
    pub s1: GrayImage<T>,
    pub s2: GrayImage<T>,
}

/// `S0 = I0 + I90`, `S1 = I0 - I90`, `S2 = I45 - I135`.
pub fn stokes<T: Real>(planes: &AnglePlanes<T>) -> Result<Stokes<T>> {
    planes.ensure_consistent()?;
    Ok(Stokes {
        s0: planes.i0.zip_map(&planes.i90, |a, b| a + b)?,
        s1: planes.i0.zip_map(&planes.i90, |a, b| a - b)?,
        s2: planes.i45.zip_map(&planes.i135, |a, b| a - b)?,
    })
}

/// Total intensity below which DOLP is reported as 0.
pub const DOLP_MIN_INTENSITY: f64 = 1e-6;

/// Counts of DOLP pixels that needed special handling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DolpReport {
    /// Pixels with `S0 <= 1e-6`, set to 0.
    pub degenerate: usize,
    /// Pixels whose ratio exceeded 1 and were clamped.
    pub clamped: usize,
}

/// `sqrt(S1^2 + S2^2) / S0`, clamped to `[0, 1]`.
pub fn dolp<T: Real>(s: &Stokes<T>) -> Result<(GrayImage<T>, DolpReport)> {
    s.s0.ensure_same_dims(&s.s1)?;
    s.s0.ensure_same_dims(&s.s2)?;
    let eps = T::lit(DOLP_MIN_INTENSITY);
    let mut report = DolpReport::default();
    let data = s
        .s0
        .data()
        .iter()
        .zip(s.s1.data().iter().zip(s.s2.data()))
        .map(|(&s0, (&s1, &s2))| {
            if !(s0 > eps) {
                report.degenerate += 1;
                return T::zero();
            }
            let d = s1.hypot(s2) / s0;
            if d > T::one() {
                report.clamped += 1;
                T::one()
            } else {
                d
            }
        })
        .collect();
    Ok((GrayImage::new(s.s0.rows(), s.s0.cols(), data)?, report))
}

/// `atan2(S2, S1) / 2`, radians in `(-pi/2, pi/2]`.
pub fn aolp<T: Real>(s: &Stokes<T>) -> Result<GrayImage<T>> {
    let half = T::lit(0.5);
    s.s2.zip_map(&s.s1, |s2, s1| {
        // atan2(+0, -1) = pi but atan2(-0, -1) = -pi; fold onto the closed end
        let a = s2.atan2(s1) * half;
        if a <= -T::FRAC_PI_2() {
            T::FRAC_PI_2()
        } else {
            a
        }
    })
}

/// Every product derived from one mosaic.
#[derive(Clone, Debug)]
pub struct PolarFrame<T = f64> {
    pub angles: AnglePlanes<T>,
    pub stokes: Stokes<T>,
    pub dolp: GrayImage<T>,
    pub aolp: GrayImage<T>,
    pub dolp_report: DolpReport,
}

impl<T: Real> PolarFrame<T> {
    pub fn from_angles(angles: AnglePlanes<T>) -> Result<Self> {
        let stokes = stokes(&angles)?;
        let (dolp, dolp_report) = dolp(&stokes)?;
        let aolp = aolp(&stokes)?;
        Ok(Self { angles, stokes, dolp, aolp, dolp_report })
    }

    pub fn from_mosaic(raw: &GrayImage<T>, layout: MosaicLayout) -> Result<Self> {
        Self::from_angles(demosaic(raw, layout)?)
    }
}
