//! Parallel-plate capacitance of the tilted, vertically displaced mirror over
//! an electrode strip, its partial derivatives, and their integrals along the
//! mirror axis.
//!
//! The local gap under the plate at lateral position `y` is `h − yθ − z`,
//! where `z` is the vertical displacement toward the electrode. Integrating
//! `ε / gap` over the strip `a ≤ y ≤ b` gives the capacitance per unit length
//!
//! ```text
//! c(θ, z) = (ε/θ) · ln((h − z − aθ) / (h − z − bθ))
//! ```
//!
//! which has a removable singularity at `θ = 0`. Near it all three functions
//! switch to Taylor series in `u = θ·max(|a|, |b|) / (h − z)`.

use crate::error::{Error, Result};
use crate::geometry::DeviceConfig;
use crate::mechanics::BeamShape;

/// Below this value of `u` the series branch is used.
pub const SERIES_SWITCH: f64 = 1e-4;

/// Default number of Simpson nodes per electrode segment.
pub const DEFAULT_QUAD_POINTS: usize = 65;

/// Local electrostatic state of one electrode strip at one section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapState {
    pub theta: f64,
    pub z: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub epsilon: f64,
}

impl CapState {
    /// Effective gap under the rotation axis, `h − z`.
    fn axis_gap(&self) -> f64 {
        self.h - self.z
    }

    fn check_contact(&self) -> Result<f64> {
        let gap = self.axis_gap();
        let near = gap - self.a * self.theta;
        let far = gap - self.b * self.theta;
        let min = near.min(far);
        if !(min > 0.0) {
            return Err(Error::Contact { x: None, gap: min });
        }
        Ok(gap)
    }

    fn series_parameter(&self, gap: f64) -> f64 {
        self.theta.abs() * self.a.abs().max(self.b.abs()) / gap
    }
}

/// Capacitance per unit length, F/m.
pub fn line_capacitance(s: &CapState) -> Result<f64> {
    let gap = s.check_contact()?;
    let t = s.theta / gap;
    if s.series_parameter(gap) < SERIES_SWITCH {
        // ε/H · Σ_{n=1..5} (bⁿ − aⁿ)/n · tⁿ⁻¹
        let mut sum = 0.0;
        let (mut an, mut bn, mut tn) = (1.0, 1.0, 1.0);
        for n in 1..=5 {
            an *= s.a;
            bn *= s.b;
            sum += (bn - an) / n as f64 * tn;
            tn *= t;
        }
        Ok(s.epsilon / gap * sum)
    } else {
        Ok(s.epsilon / s.theta * ((-s.a * t).ln_1p() - (-s.b * t).ln_1p()))
    }
}

/// `∂c/∂θ`, F/(m·rad).
pub fn dc_dtheta(s: &CapState) -> Result<f64> {
    let gap = s.check_contact()?;
    let t = s.theta / gap;
    if s.series_parameter(gap) < SERIES_SWITCH {
        // ε/H² · Σ_{n=2..6} (n−1)/n · (bⁿ − aⁿ) · tⁿ⁻²
        let mut sum = 0.0;
        let (mut an, mut bn, mut tn) = (s.a, s.b, 1.0);
        for n in 2..=6 {
            an *= s.a;
            bn *= s.b;
            sum += (n - 1) as f64 / n as f64 * (bn - an) * tn;
            tn *= t;
        }
        Ok(s.epsilon / (gap * gap) * sum)
    } else {
        // ln(1 − p) + p/(1 − p) for p = bθ/H and aθ/H; written this way the
        // O(p) parts cancel analytically rather than in the final subtraction.
        let g = |p: f64| (-p).ln_1p() + p / (1.0 - p);
        Ok(s.epsilon / (s.theta * s.theta) * (g(s.b * t) - g(s.a * t)))
    }
}

/// `∂c/∂z`, F/m².
pub fn dc_dz(s: &CapState) -> Result<f64> {
    let gap = s.check_contact()?;
    Ok(s.epsilon * (s.b - s.a) / ((gap - s.b * s.theta) * (gap - s.a * s.theta)))
}

/// Composite Simpson rule with a fixed node count per electrode segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    points_per_segment: usize,
}

impl QuadratureRule {
    /// `points` must be odd and at least 3.
    pub fn new(points: usize) -> Option<Self> {
        (points >= 3 && points % 2 == 1).then_some(Self {
            points_per_segment: points,
        })
    }

    pub fn points_per_segment(&self) -> usize {
        self.points_per_segment
    }

    /// Integrates `f` over `[lo, hi]`. Stops at the first error.
    pub fn integrate<F>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let intervals = self.points_per_segment - 1;
        let h = (hi - lo) / intervals as f64;
        let mut sum = 0.0;
        for i in 0..=intervals {
            let x = if i == intervals { hi } else { lo + h * i as f64 };
            let weight = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += weight * f(x)?;
        }
        Ok(sum * h / 3.0)
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            points_per_segment: DEFAULT_QUAD_POINTS,
        }
    }
}

fn integrate_over_electrodes(
    config: &DeviceConfig,
    theta: f64,
    shape: &BeamShape,
    rule: &QuadratureRule,
    integrand: fn(&CapState) -> Result<f64>,
) -> Result<f64> {
    let offset = shape.mirror_offset();
    let mut total = 0.0;
    for e in &config.electrodes {
        total += rule.integrate(e.x_start, e.x_end, |x| {
            let state = CapState {
                theta,
                z: shape.value_at(x + offset),
                a: e.a,
                b: e.b,
                h: config.gap,
                epsilon: config.material.permittivity,
            };
            integrand(&state).map_err(|err| match err {
                Error::Contact { gap, .. } => Error::Contact { x: Some(x), gap },
                other => other,
            })
        })?;
    }
    Ok(total)
}

/// `∫ ∂c/∂θ dx` over every electrode segment, with `z = u_z(x)` taken from
/// `shape`. Contact errors carry the mirror-local `x` where they occurred.
pub fn integrate_dc_dtheta(
    config: &DeviceConfig,
    theta: f64,
    shape: &BeamShape,
    rule: &QuadratureRule,
) -> Result<f64> {
    integrate_over_electrodes(config, theta, shape, rule, dc_dtheta)
}

/// `∫ ∂c/∂z dx` over every electrode segment.
pub fn integrate_dc_dz(
    config: &DeviceConfig,
    theta: f64,
    shape: &BeamShape,
    rule: &QuadratureRule,
) -> Result<f64> {
    integrate_over_electrodes(config, theta, shape, rule, dc_dz)
}
