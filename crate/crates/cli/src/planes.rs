//! Named image planes derived from a polarization mosaic.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use polarfog::{GrayImage64, PolarFrame64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    I0,
    I45,
    I90,
    I135,
    S0,
    S1,
    S2,
    Dolp,
    Aolp,
}

impl Plane {
    pub const ALL: [Plane; 9] = [
        Plane::I0,
        Plane::I45,
        Plane::I90,
        Plane::I135,
        Plane::S0,
        Plane::S1,
        Plane::S2,
        Plane::Dolp,
        Plane::Aolp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Plane::I0 => "i0",
            Plane::I45 => "i45",
            Plane::I90 => "i90",
            Plane::I135 => "i135",
            Plane::S0 => "s0",
            Plane::S1 => "s1",
            Plane::S2 => "s2",
            Plane::Dolp => "dolp",
            Plane::Aolp => "aolp",
        }
    }

    /// Value range mapped linearly onto the full 16-bit code range on disk.
    pub fn stored_range(self) -> (f64, f64) {
        match self {
            Plane::S0 => (0.0, 2.0),
            Plane::S1 | Plane::S2 => (-1.0, 1.0),
            Plane::Aolp => (-FRAC_PI_2, FRAC_PI_2),
            _ => (0.0, 1.0),
        }
    }

    pub fn extract(self, f: &PolarFrame64) -> &GrayImage64 {
        match self {
            Plane::I0 => &f.angles.i0,
            Plane::I45 => &f.angles.i45,
            Plane::I90 => &f.angles.i90,
            Plane::I135 => &f.angles.i135,
            Plane::S0 => &f.stokes.s0,
            Plane::S1 => &f.stokes.s1,
            Plane::S2 => &f.stokes.s2,
            Plane::Dolp => &f.dolp,
            Plane::Aolp => &f.aolp,
        }
    }

    /// The plane mapped through [`Plane::stored_range`] onto `[0, 1]`.
    pub fn stored(self, f: &PolarFrame64) -> GrayImage64 {
        let (lo, hi) = self.stored_range();
        self.extract(f).map(|v| (v - lo) / (hi - lo))
    }

    /// The `[0, 1]` image handed to the dehazer. S0 is divided by its own
    /// maximum; other planes use their stored mapping.
    pub fn for_processing(self, f: &PolarFrame64) -> GrayImage64 {
        if self == Plane::S0 {
            let s0 = &f.stokes.s0;
            let (_, max) = s0.min_max();
            if max > 0.0 {
                return s0.map(|v| v / max);
            }
            return s0.clone();
        }
        self.stored(f)
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Plane {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        Plane::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown plane {s:?}, expected one of i0,i45,i90,i135,s0,s1,s2,dolp,aolp"))
    }
}
