//! Self-checks that compare the closed-form routes against independent
//! numerical ones for a given device. Run by `micromirror check`.

use crate::electrostatics::{
    dc_dtheta, dc_dz, integrate_dc_dtheta, integrate_dc_dz, line_capacitance, CapState,
    QuadratureRule,
};
use crate::error::Result;
use crate::geometry::{DeviceConfig, SectionProperties};
use crate::mechanics::{fd_beam_oracle, max_deflection, solve_beam};
use crate::solver::{fixed_point, SolverOptions};

pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const BEAM_TOL: f64 = 1e-3;
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Central difference `(f(x + h) − f(x − h)) / 2h`.
pub fn central_difference<F>(f: F, x: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((f(x + step)? - f(x - step)?) / (2.0 * step))
}

/// Worst relative mismatch between the analytic capacitance derivatives and
/// central differences of [`line_capacitance`], over a grid of tilts and
/// displacements for every electrode of `config`.
pub fn derivative_check(config: &DeviceConfig) -> Result<CheckOutcome> {
    let h = config.gap;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for e in &config.electrodes {
        let theta_edge = h / e.b;
        for tf in [0.0, 0.05, 0.2, 0.4, 0.6, 0.8] {
            let theta = tf * theta_edge;
            let room = h - e.b * theta - 0.1 * h;
            for zf in [0.0, 0.5, 1.0] {
                let s = CapState {
                    theta,
                    z: zf * room,
                    a: e.a,
                    b: e.b,
                    h,
                    epsilon: config.material.permittivity,
                };
                let fd_theta = central_difference(
                    |t| line_capacitance(&CapState { theta: t, ..s }),
                    s.theta,
                    1e-6 * theta_edge,
                )?;
                let fd_z =
                    central_difference(|z| line_capacitance(&CapState { z, ..s }), s.z, 1e-6 * h)?;
                worst = worst
                    .max(relative(dc_dtheta(&s)?, fd_theta))
                    .max(relative(dc_dz(&s)?, fd_z));
                count += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "capacitance derivatives vs finite differences",
        passed: worst < DERIVATIVE_TOL,
        detail: format!("{count} states, worst relative error {worst:.2e} (limit {DERIVATIVE_TOL:.0e})"),
    })
}

/// Closed-form beam against the finite-difference oracle at 401 nodes.
pub fn beam_check(config: &DeviceConfig, props: &SectionProperties) -> Result<CheckOutcome> {
    let w = 1.0;
    let shape = solve_beam(props, &config.material, &config.spring, &config.mirror, w)?;
    let fd = fd_beam_oracle(props, &config.material, &config.spring, &config.mirror, w, 401)?;
    let peak = max_deflection(&shape);
    let worst = fd
        .iter()
        .map(|&(x, u)| (u - shape.value_at(x)).abs())
        .fold(0.0, f64::max)
        / peak;
    Ok(CheckOutcome {
        name: "beam solution vs finite-difference oracle",
        passed: worst < BEAM_TOL,
        detail: format!("worst discrepancy {worst:.2e} of peak deflection (limit {BEAM_TOL:.0e})"),
    })
}

/// Electrode integrals on a converged bent shape against a rule ten times
/// finer.
pub fn quadrature_check(
    config: &DeviceConfig,
    props: &SectionProperties,
    opts: &SolverOptions,
) -> Result<CheckOutcome> {
    let theta = 0.3 * config.theta_geo();
    let point = fixed_point(config, props, theta, opts)?;
    let coarse = opts.rule;
    let fine = QuadratureRule::new((coarse.points_per_segment() - 1) * 10 + 1)
        .expect("refined rule is odd");
    let t = relative(
        integrate_dc_dtheta(config, theta, &point.shape, &coarse)?,
        integrate_dc_dtheta(config, theta, &point.shape, &fine)?,
    );
    let z = relative(
        integrate_dc_dz(config, theta, &point.shape, &coarse)?,
        integrate_dc_dz(config, theta, &point.shape, &fine)?,
    );
    let worst = t.max(z);
    Ok(CheckOutcome {
        name: "electrode quadrature vs 10x refinement",
        passed: worst < QUADRATURE_TOL,
        detail: format!(
            "{} points per segment, worst relative change {worst:.2e} (limit {QUADRATURE_TOL:.0e})",
            coarse.points_per_segment()
        ),
    })
}

/// Runs every check; a check that errors out counts as failed.
pub fn run_all(
    config: &DeviceConfig,
    props: &SectionProperties,
    opts: &SolverOptions,
) -> Vec<CheckOutcome> {
    let failed = |name: &'static str, e: crate::Error| CheckOutcome {
        name,
        passed: false,
        detail: e.to_string(),
    };
    vec![
        derivative_check(config)
            .unwrap_or_else(|e| failed("capacitance derivatives vs finite differences", e)),
        beam_check(config, props)
            .unwrap_or_else(|e| failed("beam solution vs finite-difference oracle", e)),
        quadrature_check(config, props, opts)
            .unwrap_or_else(|e| failed("electrode quadrature vs 10x refinement", e)),
    ]
}

fn relative(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}
