//! Angle arithmetic and the polar target openings.
//!
//! All angles are degrees. They are only converted to radians at the point
//! of a trig call.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An angle in degrees, stored as its representative in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Normalizes `deg` into `[0, 360)`. Rejects NaN and infinities.
    pub fn new(deg: f64) -> Result<Self> {
        if !deg.is_finite() {
            return Err(Error::NonFiniteAngle(deg));
        }
        Ok(Self::wrap(deg))
    }

    /// Normalizes an angle already known to be finite.
    pub(crate) fn wrap(deg: f64) -> Self {
        debug_assert!(deg.is_finite());
        let r = deg.rem_euclid(360.0);
        // rem_euclid of a tiny negative value rounds up to exactly 360
        Angle(if r >= 360.0 { 0.0 } else { r })
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// The orientation of the undirected line through this direction, in `[0, 180)`.
    /// A line at 10° and a line at 190° are the same line.
    pub fn line(self) -> f64 {
        if self.0 >= 180.0 {
            self.0 - 180.0
        } else {
            self.0
        }
    }

    /// `self - other`, normalized.
    pub fn minus(self, other: Angle) -> Angle {
        Angle::wrap(self.0 - other.0)
    }

    pub fn plus(self, deg: f64) -> Angle {
        Angle::wrap(self.0 + deg)
    }

    /// Unsigned angular distance between two directions, in `[0, 180]`.
    pub fn separation(self, other: Angle) -> f64 {
        let d = self.minus(other).0;
        if d > 180.0 {
            360.0 - d
        } else {
            d
        }
    }

    /// Unsigned angular distance between the two lines through these
    /// directions, in `[0, 90]`.
    pub fn line_separation(self, other: Angle) -> f64 {
        let d = self.separation(other);
        if d > 90.0 {
            180.0 - d
        } else {
            d
        }
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(deg: f64) -> Result<Self> {
        Angle::new(deg)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Normalizes a raw degree value into `[0, 360)`.
pub fn normalize_angle(deg: f64) -> Result<Angle> {
    Angle::new(deg)
}

/// How a target's background is divided into outcome colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sectors {
    /// Green half toward the mark, red half away from it.
    Two,
    /// Vertical double cone within ±45° of the mark axis, horizontal otherwise.
    Four,
}

/// Shape of a target opening.
///
/// The clearance at a given misalignment is the length of the chord through
/// the center of the opening along the knife's line, as a fraction of the
/// knife length (which equals the longest chord).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Aperture {
    /// A narrow slit as long as the knife, passing lines within `epsilon`
    /// degrees of its axis.
    Slit { epsilon: f64 },
    /// A round hole whose diameter is the fraction `d` of the knife length.
    Circle { d: f64 },
    /// Polar curve `r = ½(1 + cos 2θ)`; chord fraction `cos²φ`.
    FigureEight,
    /// Four-petal rose `r = |cos 2θ|`; chord fraction `|cos 2φ|`.
    Rose,
}

impl Aperture {
    pub fn slit(epsilon: f64) -> Result<Self> {
        Aperture::Slit { epsilon }.validated()
    }

    pub fn circle(d: f64) -> Result<Self> {
        Aperture::Circle { d }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Aperture::Slit { epsilon } if !(0.0..=90.0).contains(&epsilon) => Err(
                Error::InvalidAperture(format!("slit tolerance {epsilon}° outside [0, 90]")),
            ),
            Aperture::Circle { d } if !(0.0..=1.0).contains(&d) => Err(Error::InvalidAperture(
                format!("circle clearance {d} outside [0, 1]"),
            )),
            ok => Ok(ok),
        }
    }

    /// Chord fraction in `[0, 1]` for a knife line at `misalignment` from the
    /// opening's long axis.
    pub fn clearance(&self, misalignment: Angle) -> f64 {
        match *self {
            Aperture::Slit { epsilon } => {
                if misalignment.line_separation(Angle::ZERO) <= epsilon {
                    1.0
                } else {
                    0.0
                }
            }
            Aperture::Circle { d } => d,
            Aperture::FigureEight => {
                let c = misalignment.radians().cos();
                (c * c).min(1.0)
            }
            Aperture::Rose => (2.0 * misalignment.radians()).cos().abs().min(1.0),
        }
    }

    pub fn sectors(&self) -> Sectors {
        match self {
            Aperture::Rose => Sectors::Four,
            _ => Sectors::Two,
        }
    }
}

impl fmt::Display for Aperture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aperture::Slit { epsilon } => write!(f, "slit:{epsilon}"),
            Aperture::Circle { d } => write!(f, "circle:{d}"),
            Aperture::FigureEight => f.write_str("figure-eight"),
            Aperture::Rose => f.write_str("rose"),
        }
    }
}

impl FromStr for Aperture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let param = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidAperture(format!("bad parameter in `{s}`")))
        };
        match s.split_once(':') {
            None => match s {
                "figure-eight" => Ok(Aperture::FigureEight),
                "rose" => Ok(Aperture::Rose),
                _ => Err(Error::InvalidAperture(format!("unknown shape `{s}`"))),
            },
            Some(("circle", p)) => Aperture::circle(param(p)?),
            Some(("slit", p)) => Aperture::slit(param(p)?),
            Some(_) => Err(Error::InvalidAperture(format!("unknown shape `{s}`"))),
        }
    }
}

impl TryFrom<String> for Aperture {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Aperture> for String {
    fn from(a: Aperture) -> String {
        a.to_string()
    }
}
