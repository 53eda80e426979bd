//! Analytic reference curves: quantum correlation functions, Malus's law
//! and the straight line produced by the round-hole knife model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::program::ThreeOptions;
use super::Pairing;
use crate::error::{Error, Result};
use crate::geometry::Angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Particle {
    SpinHalf,
    Photon,
}

impl fmt::Display for Particle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Particle::SpinHalf => "spin-half",
            Particle::Photon => "photon",
        })
    }
}

impl FromStr for Particle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin-half" => Ok(Particle::SpinHalf),
            "photon" => Ok(Particle::Photon),
            _ => Err(Error::config(format!("unknown particle `{s}`"))),
        }
    }
}

/// Singlet spin correlation `−cos θ`, or the photon polarization correlation
/// `cos 2θ` (same-outcome rate `cos²θ`).
pub fn qm_correlation(particle: Particle, theta: Angle) -> f64 {
    match particle {
        Particle::SpinHalf => -theta.radians().cos(),
        Particle::Photon => (2.0 * theta.radians()).cos(),
    }
}

/// Transmission probability: `cos²θ` for photons, `cos²(θ/2)` for spin-½.
pub fn malus(theta: Angle, particle: Particle) -> f64 {
    let half_angle = match particle {
        Particle::Photon => theta.radians(),
        Particle::SpinHalf => theta.radians() / 2.0,
    };
    let c = half_angle.cos();
    c * c
}

/// Correlation of the round-hole model, exact for `theta ∈ [0°, 180°]`.
pub fn linear_correlation(theta_deg: f64, pairing: Pairing) -> Result<f64> {
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(Error::ThetaOutOfRange(theta_deg));
    }
    let x = 2.0 * theta_deg / 180.0;
    Ok(match pairing {
        Pairing::HeadToToe => x - 1.0,
        Pairing::BackToBack => 1.0 - x,
    })
}

/// The linear curve at an arbitrary setting difference, folded onto `[0, 180]`.
pub fn linear_correlation_at(theta: Angle, pairing: Pairing) -> f64 {
    linear_correlation(theta.separation(Angle::ZERO), pairing).expect("separation is within [0, 180]")
}

/// Same-outcome probability averaged over the nine ordered setting pairs,
/// with both sides choosing uniformly among `options`.
pub fn qm_three_setting_overall(particle: Particle, options: &ThreeOptions) -> f64 {
    let angles = options.angles();
    let mut total = 0.0;
    for left in angles {
        for right in angles {
            total += (1.0 + qm_correlation(particle, right.minus(left))) / 2.0;
        }
    }
    total / 9.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> Angle {
        Angle::new(d).unwrap()
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(qm_correlation(Particle::SpinHalf, deg(0.0)), -1.0);
        assert!(qm_correlation(Particle::SpinHalf, deg(90.0)).abs() < 1e-15);
        assert_eq!(qm_correlation(Particle::Photon, deg(0.0)), 1.0);
        assert!((qm_correlation(Particle::Photon, deg(90.0)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn malus_examples() {
        assert_eq!(malus(deg(0.0), Particle::Photon), 1.0);
        assert!((malus(deg(60.0), Particle::Photon) - 0.25).abs() < 1e-15);
        assert!(malus(deg(180.0), Particle::SpinHalf) < 1e-30);
    }

    #[test]
    fn spin_same_rate_complements_malus() {
        for k in 0..=360 {
            let t = deg(k as f64 * 0.5);
            let same = (1.0 + qm_correlation(Particle::SpinHalf, t)) / 2.0;
            assert!((same - (1.0 - malus(t, Particle::SpinHalf))).abs() < 1e-12);
            let photon_same = (1.0 + qm_correlation(Particle::Photon, t)) / 2.0;
            assert!((photon_same - malus(t, Particle::Photon)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_examples() {
        assert_eq!(linear_correlation(0.0, Pairing::HeadToToe).unwrap(), -1.0);
        assert_eq!(linear_correlation(90.0, Pairing::HeadToToe).unwrap(), 0.0);
        assert_eq!(linear_correlation(180.0, Pairing::HeadToToe).unwrap(), 1.0);
        assert_eq!(linear_correlation(0.0, Pairing::BackToBack).unwrap(), 1.0);
        assert!(linear_correlation(181.0, Pairing::HeadToToe).is_err());
        assert!(linear_correlation(-1.0, Pairing::HeadToToe).is_err());
        assert_eq!(linear_correlation_at(deg(315.0), Pairing::HeadToToe), -0.5);
    }

    #[test]
    fn three_setting_overall_from_closed_form() {
        let o = ThreeOptions::new([0.0, 22.5, 67.5]).unwrap();
        // sin²(θ/2) summed over the six off-diagonal pairs
        let s2 = |d: f64| (d.to_radians() / 2.0).sin().powi(2);
        let want = 2.0 * (s2(22.5) + s2(67.5) + s2(45.0)) / 9.0;
        assert!((qm_three_setting_overall(Particle::SpinHalf, &o) - want).abs() < 1e-12);
        let c2 = |d: f64| d.to_radians().cos().powi(2);
        let want = (3.0 + 2.0 * (c2(22.5) + c2(67.5) + c2(45.0))) / 9.0;
        assert!((qm_three_setting_overall(Particle::Photon, &o) - want).abs() < 1e-12);
    }
}
