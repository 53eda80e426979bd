//! Hidden-variable sources and local outcome rules.
//!
//! The knife model lives here directly; the deterministic program model, the
//! restaurant-menu model and the analytic reference curves have their own
//! submodules.

pub mod menu;
pub mod program;
pub mod quantum;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Angle, Aperture, Sectors};

/// How the two throwers face each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Tips point in opposite lab directions: anti-correlated at equal settings.
    HeadToToe,
    /// Tips point the same way: correlated at equal settings.
    BackToBack,
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::HeadToToe => "head-to-toe",
            Pairing::BackToBack => "back-to-back",
        })
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "head-to-toe" => Ok(Pairing::HeadToToe),
            "back-to-back" => Ok(Pairing::BackToBack),
            _ => Err(Error::config(format!("unknown pairing `{s}`"))),
        }
    }
}

/// Outcome color of a knife that made it through its opening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Green,
    Red,
    /// Four-sector targets: within ±45° of the mark axis.
    V,
    H,
}

/// Hidden variables shared by both knives of one throw, fixed at creation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenPair {
    /// Lab direction of the left knife's tip.
    pub rho: Angle,
    /// Projected knife length as a fraction of full length.
    pub s: f64,
    pub pairing: Pairing,
}

impl HiddenPair {
    pub fn left_tip(&self) -> Angle {
        self.rho
    }

    pub fn right_tip(&self) -> Angle {
        match self.pairing {
            Pairing::HeadToToe => self.rho.plus(180.0),
            Pairing::BackToBack => self.rho,
        }
    }
}

/// Draws a fresh pair: roll uniform on `[0, 360)`, pitch fraction uniform on
/// `[0, 1)`, both shared by the two knives.
pub fn sample_pair<R: Rng + ?Sized>(pairing: Pairing, rng: &mut R) -> HiddenPair {
    let rho = Angle::wrap(rng.gen::<f64>() * 360.0);
    let s = rng.gen::<f64>();
    HiddenPair { rho, s, pairing }
}

/// Knife opening plus how the throwers are paired.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureModel {
    pub aperture: Aperture,
    pub pairing: Pairing,
}

impl ApertureModel {
    pub fn new(aperture: Aperture, pairing: Pairing) -> Self {
        Self { aperture, pairing }
    }
}

/// Color of a tip at `tip` relative to a target whose mark points along `axis`.
/// Boundary directions resolve to `Green` / `V`.
pub fn color_of(sectors: Sectors, axis: Angle, tip: Angle) -> Color {
    let delta = tip.minus(axis);
    match sectors {
        Sectors::Two => {
            let d = delta.degrees();
            if d <= 90.0 || d >= 270.0 {
                Color::Green
            } else {
                Color::Red
            }
        }
        Sectors::Four => {
            let l = delta.line();
            if l <= 45.0 || l >= 135.0 {
                Color::V
            } else {
                Color::H
            }
        }
    }
}

/// One knife against one target. `None` means the knife was blocked.
pub fn attempt(aperture: &Aperture, target_axis: Angle, tip: Angle, s: f64) -> Result<Option<Color>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::PitchOutOfRange(s));
    }
    Ok(throw(aperture, target_axis, tip, s))
}

#[inline]
pub(crate) fn throw(aperture: &Aperture, target_axis: Angle, tip: Angle, s: f64) -> Option<Color> {
    let misalignment = tip.minus(target_axis);
    if s <= aperture.clearance(misalignment) {
        Some(color_of(aperture.sectors(), target_axis, tip))
    } else {
        None
    }
}

/// Outcome of one pair. A side's color is present only if that knife passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceRecord {
    pub left: Option<Color>,
    pub right: Option<Color>,
}

impl CoincidenceRecord {
    pub fn passed_left(&self) -> bool {
        self.left.is_some()
    }

    pub fn passed_right(&self) -> bool {
        self.right.is_some()
    }

    /// `Some(same_color)` for a double pass, `None` if the pair isn't counted.
    pub fn coincidence(&self) -> Option<bool> {
        match (self.left, self.right) {
            (Some(l), Some(r)) => Some(l == r),
            _ => None,
        }
    }
}

/// Throws both knives of `pair` at targets set to `left` and `right`.
pub fn measure_pair(
    model: &ApertureModel,
    pair: &HiddenPair,
    left: Angle,
    right: Angle,
) -> CoincidenceRecord {
    CoincidenceRecord {
        left: throw(&model.aperture, left, pair.left_tip(), pair.s),
        right: throw(&model.aperture, right, pair.right_tip(), pair.s),
    }
}
