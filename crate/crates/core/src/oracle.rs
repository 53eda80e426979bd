//! Deterministic quadrature for the knife model, and the report comparing
//! model curves with the quantum prediction.
//!
//! Because the pitch fraction is uniform on `[0, 1]` and shared by both
//! knives, the probability that both pass at roll `ρ` is simply
//! `min(c_left(ρ), c_right(ρ))`. Only the roll integral is left to do
//! numerically.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{run_setting_pair, CorrelationEstimate, RunParams};
use crate::error::{Error, Result};
use crate::geometry::Angle;
use crate::models::quantum::{linear_correlation_at, qm_correlation, Particle};
use crate::models::{color_of, ApertureModel, HiddenPair, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Number of roll nodes over `[0°, 360°)`.
    pub rho_steps: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rho_steps: 36_000 }
    }
}

impl QuadratureSpec {
    pub const MIN_STEPS: usize = 360;

    pub fn new(rho_steps: usize) -> Result<Self> {
        if rho_steps < Self::MIN_STEPS {
            return Err(Error::config(format!(
                "quadrature needs at least {} roll steps, got {rho_steps}",
                Self::MIN_STEPS
            )));
        }
        Ok(Self { rho_steps })
    }
}

/// Roll-averaged weights for one pair of settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// Mean over roll of `w(ρ)·σ(ρ)`.
    pub signed: f64,
    /// Mean over roll of `w(ρ)`: the double-pass probability.
    pub weight: f64,
}

impl QuadratureResult {
    pub fn correlation(&self) -> Option<f64> {
        (self.weight > 0.0).then(|| self.signed / self.weight)
    }
}

/// Periodic trapezoid rule on the cell-centered roll grid
/// `ρ_k = (k + ½)·360°/n`. Color boundaries at multiples of the step then
/// fall between nodes.
pub fn quadrature(model: &ApertureModel, left: Angle, right: Angle, spec: QuadratureSpec) -> Result<QuadratureResult> {
    let spec = QuadratureSpec::new(spec.rho_steps)?;
    let aperture = model.aperture.validated()?;
    let sectors = aperture.sectors();
    let h = 360.0 / spec.rho_steps as f64;
    let (mut signed, mut weight) = (0.0, 0.0);
    for k in 0..spec.rho_steps {
        let pair = HiddenPair {
            rho: Angle::wrap((k as f64 + 0.5) * h),
            s: 0.0,
            pairing: model.pairing,
        };
        let (tl, tr) = (pair.left_tip(), pair.right_tip());
        let w = aperture.clearance(tl.minus(left)).min(aperture.clearance(tr.minus(right)));
        if w == 0.0 {
            continue;
        }
        let same = color_of(sectors, left, tl) == color_of(sectors, right, tr);
        weight += w;
        signed += if same { w } else { -w };
    }
    let n = spec.rho_steps as f64;
    Ok(QuadratureResult {
        signed: signed / n,
        weight: weight / n,
    })
}

/// Post-selected correlation with the left target at 0° and the right at
/// `theta`. `None` when no roll lets both knives through.
pub fn quadrature_correlation(model: &ApertureModel, theta: Angle, spec: QuadratureSpec) -> Result<Option<f64>> {
    Ok(quadrature(model, Angle::ZERO, theta, spec)?.correlation())
}

/// Double-pass probability averaged over target separations uniform on
/// `[0°, 180°]`, i.e. what random full-circle settings produce.
pub fn quadrature_mean_double_pass(model: &ApertureModel, theta_steps: usize, spec: QuadratureSpec) -> Result<f64> {
    if theta_steps == 0 {
        return Err(Error::config("theta_steps must be positive"));
    }
    let h = 180.0 / theta_steps as f64;
    let mut total = 0.0;
    for k in 0..theta_steps {
        let theta = Angle::wrap((k as f64 + 0.5) * h);
        total += quadrature(model, Angle::ZERO, theta, spec)?.weight;
    }
    Ok(total / theta_steps as f64)
}

/// The curve a model is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "of", rename_all = "kebab-case")]
pub enum Reference {
    Quantum(Particle),
    /// The round-hole straight line for this pairing.
    Linear(Pairing),
}

impl Reference {
    /// The quantum curve a pairing is meant to imitate.
    pub fn for_pairing(pairing: Pairing) -> Self {
        match pairing {
            Pairing::HeadToToe => Reference::Quantum(Particle::SpinHalf),
            Pairing::BackToBack => Reference::Quantum(Particle::Photon),
        }
    }

    pub fn correlation(&self, theta: Angle) -> f64 {
        match *self {
            Reference::Quantum(p) => qm_correlation(p, theta),
            Reference::Linear(p) => linear_correlation_at(theta, p),
        }
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Quantum(Particle::SpinHalf) => f.write_str("-cos θ"),
            Reference::Quantum(Particle::Photon) => f.write_str("cos 2θ"),
            Reference::Linear(p) => write!(f, "linear ({p})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimRow {
    pub theta: f64,
    pub oracle_e: Option<f64>,
    pub mc: CorrelationEstimate,
    pub reference_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub model: ApertureModel,
    pub reference: Reference,
    pub rows: Vec<ClaimRow>,
    /// Largest `|E_oracle − E_reference|` over the grid.
    pub max_abs_deviation_model_vs_qm: f64,
    pub theta_of_max_deviation: f64,
    /// Largest `|E_MC − E_oracle|` over the grid.
    pub max_abs_deviation_mc_vs_oracle: f64,
    pub tolerance: f64,
    /// Whether the model curve stays within `tolerance` of the reference.
    pub claim_holds: bool,
    pub verdict: String,
}

pub const DEFAULT_CLAIM_TOLERANCE: f64 = 0.02;

/// Builds the oracle, Monte Carlo and reference curves over `thetas` and
/// measures how far apart they are. The verdict is reported, never assumed.
pub fn claim_report(
    model: &ApertureModel,
    reference: Reference,
    thetas: &[f64],
    params: RunParams,
    spec: QuadratureSpec,
    tolerance: f64,
) -> Result<ClaimReport> {
    if thetas.is_empty() {
        return Err(Error::config("claim report needs at least one theta"));
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(Error::config(format!("tolerance {tolerance} must be non-negative")));
    }
    if params.pairs == 0 || params.shards == 0 {
        return Err(Error::config("pairs and shards must be at least 1"));
    }
    let rows = thetas
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let angle = Angle::new(theta)?;
            Ok(ClaimRow {
                theta,
                oracle_e: quadrature_correlation(model, angle, spec)?,
                mc: run_setting_pair(model, Angle::ZERO, angle, params, k as u32).estimate(),
                reference_e: reference.correlation(angle),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut dev_ref, mut theta_ref, mut dev_mc) = (0.0f64, thetas[0], 0.0f64);
    for row in &rows {
        if let Some(o) = row.oracle_e {
            let d = (o - row.reference_e).abs();
            if d > dev_ref {
                dev_ref = d;
                theta_ref = row.theta;
            }
            if let Some(m) = row.mc.e {
                dev_mc = dev_mc.max((m - o).abs());
            }
        }
    }
    let undefined = rows.iter().filter(|r| r.oracle_e.is_none()).count();
    let claim_holds = undefined == 0 && dev_ref <= tolerance;
    let mut verdict = if claim_holds {
        format!(
            "HOLDS: {}/{} stays within {tolerance} of {reference} (max deviation {dev_ref:.6} at θ = {theta_ref}°)",
            model.aperture, model.pairing
        )
    } else {
        format!(
            "REFUTED: {}/{} deviates from {reference} by up to {dev_ref:.6} at θ = {theta_ref}° (tolerance {tolerance})",
            model.aperture, model.pairing
        )
    };
    if undefined > 0 {
        verdict.push_str(&format!("; {undefined} grid points have no coincidences"));
    }
    verdict.push_str(&format!("; Monte Carlo vs quadrature max deviation {dev_mc:.6}"));

    Ok(ClaimReport {
        model: *model,
        reference,
        rows,
        max_abs_deviation_model_vs_qm: dev_ref,
        theta_of_max_deviation: theta_ref,
        max_abs_deviation_mc_vs_oracle: dev_mc,
        tolerance,
        claim_holds,
        verdict,
    })
}
