//! Self-consistent tilt/bending equilibrium, tilt sweeps, and pull-in search.
//!
//! For a chosen tilt `θ` the voltage follows from the torque balance
//!
//! ```text
//! (V²/2) ∫ ∂c/∂θ dx = k_θ θ
//! ```
//!
//! evaluated on the current bending shape, and the equivalent uniform load
//! from the vertical force balance
//!
//! ```text
//! w_eq L_m = (V²/2) ∫ ∂c/∂z dx.
//! ```
//!
//! Starting from `w_eq = 0` (the rigid plate) the two are alternated with the
//! beam solve until the load stops changing.

use std::fmt;
use std::str::FromStr;

use crate::electrostatics::{integrate_dc_dtheta, integrate_dc_dz, QuadratureRule};
use crate::error::{Error, Result};
use crate::geometry::{DeviceConfig, SectionProperties};
use crate::mechanics::{max_deflection, solve_beam, BeamShape};

/// Absolute floor of the load convergence test, N/m.
pub const W_FLOOR: f64 = 1e-12;

/// Relative tilt tolerance of the golden-section pull-in refinement.
pub const PULLIN_THETA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Tilt plus self-consistent bending of the mirror strip.
    Bending,
    /// Rigid plate: tilt only, no vertical displacement.
    Rigid,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Bending => "bending",
            Model::Rigid => "rigid",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bending" => Ok(Model::Bending),
            "rigid" => Ok(Model::Rigid),
            other => Err(format!("unknown model `{other}` (expected bending or rigid)")),
        }
    }
}

/// Uniform tilt grid. Unset bounds default to `θ_geo/1000` and `0.98 θ_geo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub points: usize,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            points: 200,
            theta_min: None,
            theta_max: None,
        }
    }
}

impl ThetaGrid {
    pub fn thetas(&self, config: &DeviceConfig) -> Vec<f64> {
        let geo = config.theta_geo();
        let lo = self.theta_min.unwrap_or(geo / 1000.0);
        let hi = self.theta_max.unwrap_or(0.98 * geo);
        match self.points {
            0 => Vec::new(),
            1 => vec![hi],
            n => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub load_rel_tol: f64,
    pub max_iterations: usize,
    /// Under-relaxation factor in `(0, 1]` applied to the load update.
    pub relaxation: f64,
    pub rule: QuadratureRule,
    pub grid: ThetaGrid,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            load_rel_tol: 1e-8,
            max_iterations: 100,
            relaxation: 1.0,
            rule: QuadratureRule::default(),
            grid: ThetaGrid::default(),
        }
    }
}

/// One pass of the fixed-point loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iterate {
    /// Load the beam was solved for in this pass.
    pub w_eq: f64,
    pub voltage: f64,
    /// Relaxed load handed to the next pass.
    pub w_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub theta: f64,
    pub voltage: f64,
    pub w_eq: f64,
    pub shape: BeamShape,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<Iterate>,
}

impl EquilibriumPoint {
    pub fn u_max(&self) -> f64 {
        max_deflection(&self.shape)
    }
}

/// Solves the torque balance for the voltage that holds tilt `theta` with the
/// given bending shape.
pub fn equilibrium_voltage(
    config: &DeviceConfig,
    props: &SectionProperties,
    theta: f64,
    shape: &BeamShape,
    rule: &QuadratureRule,
) -> Result<f64> {
    let torque = integrate_dc_dtheta(config, theta, shape, rule)?;
    if !(torque > 0.0) {
        return Err(Error::NonPositiveTorque(torque));
    }
    Ok((2.0 * props.k_theta * theta / torque).sqrt())
}

/// Equivalent uniform load that carries the same vertical force as the
/// electrostatic pull at `voltage`.
pub fn update_load(
    config: &DeviceConfig,
    theta: f64,
    voltage: f64,
    shape: &BeamShape,
    rule: &QuadratureRule,
) -> Result<f64> {
    let force = integrate_dc_dz(config, theta, shape, rule)?;
    Ok(voltage * voltage / (2.0 * config.mirror.length) * force)
}

fn beam(config: &DeviceConfig, props: &SectionProperties, w_eq: f64) -> Result<BeamShape> {
    solve_beam(props, &config.material, &config.spring, &config.mirror, w_eq)
}

/// Runs the fixed-point loop from `w_eq = 0`.
pub fn fixed_point(
    config: &DeviceConfig,
    props: &SectionProperties,
    theta: f64,
    opts: &SolverOptions,
) -> Result<EquilibriumPoint> {
    fixed_point_from(config, props, theta, opts, 0.0)
}

/// Runs the fixed-point loop from an arbitrary initial load.
///
/// If the load change grows between passes the relaxation factor drops to
/// 0.5 for the rest of the run. A run that exhausts `max_iterations` returns
/// its last iterate with `converged = false`.
pub fn fixed_point_from(
    config: &DeviceConfig,
    props: &SectionProperties,
    theta: f64,
    opts: &SolverOptions,
    w_start: f64,
) -> Result<EquilibriumPoint> {
    let rule = &opts.rule;
    let mut lambda = opts.relaxation;
    let mut w = w_start;
    let mut prev_change = f64::INFINITY;
    let mut history = Vec::new();

    for pass in 1..=opts.max_iterations.max(1) {
        let shape = beam(config, props, w)?;
        let voltage = equilibrium_voltage(config, props, theta, &shape, rule)?;
        let target = update_load(config, theta, voltage, &shape, rule)?;
        let w_next = (1.0 - lambda) * w + lambda * target;
        history.push(Iterate { w_eq: w, voltage, w_next });

        let change = (w_next - w).abs();
        if change <= opts.load_rel_tol * w_next.max(W_FLOOR) {
            let shape = beam(config, props, w_next)?;
            let voltage = equilibrium_voltage(config, props, theta, &shape, rule)?;
            return Ok(EquilibriumPoint {
                theta,
                voltage,
                w_eq: w_next,
                shape,
                iterations: pass,
                converged: true,
                history,
            });
        }
        if pass > 1 && change > prev_change && lambda > 0.5 {
            lambda = 0.5;
        }
        prev_change = change;
        w = w_next;
    }

    let shape = beam(config, props, w)?;
    let voltage = equilibrium_voltage(config, props, theta, &shape, rule)?;
    Ok(EquilibriumPoint {
        theta,
        voltage,
        w_eq: w,
        shape,
        iterations: history.len(),
        converged: false,
        history,
    })
}

/// Single torque-balance evaluation on the flat plate.
pub fn rigid_point(
    config: &DeviceConfig,
    props: &SectionProperties,
    theta: f64,
    rule: &QuadratureRule,
) -> Result<EquilibriumPoint> {
    let shape = BeamShape::flat(props, &config.material, &config.spring, &config.mirror);
    let voltage = equilibrium_voltage(config, props, theta, &shape, rule)?;
    Ok(EquilibriumPoint {
        theta,
        voltage,
        w_eq: 0.0,
        shape,
        iterations: 1,
        converged: true,
        history: Vec::new(),
    })
}

fn solve_point(
    config: &DeviceConfig,
    props: &SectionProperties,
    theta: f64,
    opts: &SolverOptions,
    model: Model,
) -> Result<EquilibriumPoint> {
    match model {
        Model::Bending => fixed_point(config, props, theta, opts),
        Model::Rigid => rigid_point(config, props, theta, &opts.rule),
    }
}

/// Relative residuals `(torque, load)` of the two balance equations at a
/// returned point.
pub fn residuals(
    config: &DeviceConfig,
    props: &SectionProperties,
    point: &EquilibriumPoint,
    rule: &QuadratureRule,
) -> Result<(f64, f64)> {
    let v2 = point.voltage * point.voltage;
    let torque = integrate_dc_dtheta(config, point.theta, &point.shape, rule)?;
    let restoring = props.k_theta * point.theta;
    let torque_res = (0.5 * v2 * torque - restoring).abs() / restoring;
    let force = update_load(config, point.theta, point.voltage, &point.shape, rule)?;
    let load_res = (point.w_eq - force).abs() / point.w_eq.max(force).max(W_FLOOR);
    Ok((torque_res, load_res))
}

/// Why a sweep stopped before the end of its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub theta: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub model: Model,
    pub points: Vec<EquilibriumPoint>,
    pub truncated: Option<Truncation>,
}

/// Solves every grid tilt in order. The first tilt that reaches contact (or
/// loses its driving torque) ends the curve and is recorded in `truncated`.
pub fn sweep(
    config: &DeviceConfig,
    props: &SectionProperties,
    grid: &[f64],
    opts: &SolverOptions,
    model: Model,
) -> Result<Curve> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty".into()));
    }
    let geo = config.theta_geo();
    if let Some(&bad) = grid.iter().find(|&&t| !(t > 0.0 && t < geo)) {
        return Err(Error::InvalidGrid(format!(
            "theta = {bad:e} rad outside (0, {geo:e})"
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("thetas must be strictly increasing".into()));
    }

    let mut points = Vec::with_capacity(grid.len());
    let mut truncated = None;
    for &theta in grid {
        match solve_point(config, props, theta, opts, model) {
            Ok(p) => points.push(p),
            Err(e @ (Error::Contact { .. } | Error::NonPositiveTorque(_))) => {
                truncated = Some(Truncation {
                    theta,
                    reason: e.to_string(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Curve {
        model,
        points,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullInResult {
    pub model: Model,
    pub v_pullin: f64,
    pub theta_pullin: f64,
    pub u_max_pullin: f64,
    /// Tilt bracket handed to the golden-section refinement.
    pub bracket: (f64, f64),
}

/// Locates the maximum of `V(θ)`: a coarse sweep over `opts.grid` brackets it,
/// then golden-section search refines the tilt to [`PULLIN_THETA_TOL`].
pub fn find_pullin(
    config: &DeviceConfig,
    props: &SectionProperties,
    opts: &SolverOptions,
    model: Model,
) -> Result<PullInResult> {
    let grid = opts.grid.thetas(config);
    let curve = sweep(config, props, &grid, opts, model)?;
    let pts = &curve.points;
    let Some(k) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.voltage.total_cmp(&b.1.voltage))
        .map(|(k, _)| k)
    else {
        return Err(Error::NoPullIn {
            model: model.as_str(),
            theta: grid[0],
        });
    };
    if k + 1 == pts.len() {
        return Err(Error::NoPullIn {
            model: model.as_str(),
            theta: pts[k].theta,
        });
    }
    let lo = if k == 0 { 0.5 * pts[0].theta } else { pts[k - 1].theta };
    let hi = pts[k + 1].theta;

    let (theta, best) = golden_section_max(
        |t| solve_point(config, props, t, opts, model),
        |p| p.voltage,
        lo,
        hi,
        PULLIN_THETA_TOL,
    )?;
    Ok(PullInResult {
        model,
        v_pullin: best.voltage,
        theta_pullin: theta,
        u_max_pullin: best.u_max(),
        bracket: (lo, hi),
    })
}

/// Golden-section search for the maximum of `score(eval(x))` on `[lo, hi]`,
/// stopping once the bracket is narrower than `rel_tol` times its midpoint.
/// Returns the best abscissa seen and its evaluation.
pub(crate) fn golden_section_max<T, E, S>(
    mut eval: E,
    score: S,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<(f64, T)>
where
    E: FnMut(f64) -> Result<T>,
    S: Fn(&T) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > rel_tol * 0.5 * (hi + lo).abs() {
        if score(&f1) >= score(&f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    Ok(if score(&f1) >= score(&f2) { (x1, f1) } else { (x2, f2) })
}

/// Finds the bending-model equilibrium on the stable branch that holds
/// `voltage`, by bisection in tilt below pull-in.
pub fn solve_for_voltage(
    config: &DeviceConfig,
    props: &SectionProperties,
    voltage: f64,
    opts: &SolverOptions,
) -> Result<EquilibriumPoint> {
    // only V² enters the balance, so polarity is irrelevant
    let voltage = voltage.abs();
    let pullin = find_pullin(config, props, opts, Model::Bending)?;
    if voltage > pullin.v_pullin {
        return Err(Error::BeyondPullIn {
            voltage,
            pullin: pullin.v_pullin,
        });
    }
    if voltage == 0.0 {
        return Ok(EquilibriumPoint {
            theta: 0.0,
            voltage: 0.0,
            w_eq: 0.0,
            shape: BeamShape::flat(props, &config.material, &config.spring, &config.mirror),
            iterations: 0,
            converged: true,
            history: Vec::new(),
        });
    }

    let (mut lo, mut hi) = (0.0, pullin.theta_pullin);
    let mut best = fixed_point(config, props, hi, opts)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = fixed_point(config, props, mid, opts)?;
        if p.voltage < voltage {
            lo = mid;
        } else {
            hi = mid;
        }
        let done = ((p.voltage - voltage) / voltage).abs() < 1e-12 || hi - lo <= 1e-14 * hi;
        best = p;
        if done {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{section_properties, tests::sample_config, DEFAULT_SERIES_TOL};

    fn setup() -> (DeviceConfig, SectionProperties) {
        let cfg = sample_config();
        let props = section_properties(&cfg, DEFAULT_SERIES_TOL);
        (cfg, props)
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 0.3) * (x - 0.3)), |f| *f, 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx <= 0.0);
    }

    #[test]
    fn voltage_scales_with_sqrt_stiffness() {
        let (cfg, props) = setup();
        let flat = BeamShape::flat(&props, &cfg.material, &cfg.spring, &cfg.mirror);
        let rule = QuadratureRule::default();
        let v1 = equilibrium_voltage(&cfg, &props, 0.02, &flat, &rule).unwrap();
        let stiff = SectionProperties { k_theta: 2.0 * props.k_theta, ..props };
        let v2 = equilibrium_voltage(&cfg, &stiff, 0.02, &flat, &rule).unwrap();
        assert!((v2 / v1 - 2f64.sqrt()).abs() < 1e-14);
        let v0 = equilibrium_voltage(&cfg, &props, 1e-12, &flat, &rule).unwrap();
        assert!(v0 < 1e-4 * v1);
        assert_eq!(equilibrium_voltage(&cfg, &props, 0.0, &flat, &rule).unwrap(), 0.0);
    }

    #[test]
    fn load_update_scaling() {
        let (mut cfg, props) = setup();
        let flat = BeamShape::flat(&props, &cfg.material, &cfg.spring, &cfg.mirror);
        let rule = QuadratureRule::default();
        assert_eq!(update_load(&cfg, 0.02, 0.0, &flat, &rule).unwrap(), 0.0);
        let w1 = update_load(&cfg, 0.02, 10.0, &flat, &rule).unwrap();
        let w4 = update_load(&cfg, 0.02, 40.0, &flat, &rule).unwrap();
        assert!((w4 / w1 - 16.0).abs() < 1e-12);

        // uniform ∂c/∂z over a full-length electrode: w = V²κ/2
        cfg.electrodes[0].x_start = 0.0;
        cfg.electrodes[0].x_end = cfg.mirror.length;
        let e = cfg.electrodes[0];
        let kappa = crate::electrostatics::dc_dz(&crate::CapState {
            theta: 0.02,
            z: 0.0,
            a: e.a,
            b: e.b,
            h: cfg.gap,
            epsilon: cfg.material.permittivity,
        })
        .unwrap();
        let w = update_load(&cfg, 0.02, 10.0, &flat, &rule).unwrap();
        assert!((w / (50.0 * kappa) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn first_iterate_is_rigid() {
        let (cfg, props) = setup();
        let opts = SolverOptions::default();
        let theta = 0.4 * cfg.theta_geo();
        let p = fixed_point(&cfg, &props, theta, &opts).unwrap();
        let rigid = rigid_point(&cfg, &props, theta, &opts.rule).unwrap();
        assert_eq!(p.history[0].w_eq, 0.0);
        assert_eq!(p.history[0].voltage, rigid.voltage);
        assert!(p.converged);
        assert!(p.voltage < rigid.voltage);
    }

    #[test]
    fn residual_shrinks_monotonically() {
        let (cfg, props) = setup();
        let opts = SolverOptions::default();
        for frac in [0.1, 0.3, 0.45] {
            let p = fixed_point(&cfg, &props, frac * cfg.theta_geo(), &opts).unwrap();
            let changes: Vec<f64> = p.history.iter().map(|it| (it.w_next - it.w_eq).abs()).collect();
            for w in changes.windows(2).skip(1) {
                assert!(w[1] < w[0], "{changes:?}");
            }
        }
    }

    #[test]
    fn non_convergence_is_flagged() {
        let (cfg, props) = setup();
        let opts = SolverOptions { max_iterations: 2, ..Default::default() };
        let p = fixed_point(&cfg, &props, 0.4 * cfg.theta_geo(), &opts).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 2);
    }

    #[test]
    fn relaxed_iteration_reaches_same_load() {
        let (cfg, props) = setup();
        let theta = 0.3 * cfg.theta_geo();
        let plain = fixed_point(&cfg, &props, theta, &SolverOptions::default()).unwrap();
        let relaxed = fixed_point(
            &cfg,
            &props,
            theta,
            &SolverOptions { relaxation: 0.5, ..Default::default() },
        )
        .unwrap();
        assert!(relaxed.converged);
        assert!(((relaxed.w_eq - plain.w_eq) / plain.w_eq).abs() < 1e-7);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let (cfg, props) = setup();
        let opts = SolverOptions::default();
        let geo = cfg.theta_geo();
        for grid in [vec![], vec![0.0, 0.1 * geo], vec![0.2 * geo, 0.1 * geo], vec![0.5 * geo, geo]] {
            assert!(matches!(
                sweep(&cfg, &props, &grid, &opts, Model::Rigid),
                Err(Error::InvalidGrid(_))
            ));
        }
    }

    #[test]
    fn rigid_sweep_has_flat_shapes() {
        let (cfg, props) = setup();
        let opts = SolverOptions::default();
        let grid = ThetaGrid { points: 20, ..Default::default() }.thetas(&cfg);
        let curve = sweep(&cfg, &props, &grid, &opts, Model::Rigid).unwrap();
        assert_eq!(curve.points.len(), 20);
        assert!(curve.truncated.is_none());
        for p in &curve.points {
            assert_eq!(p.w_eq, 0.0);
            assert_eq!(p.u_max(), 0.0);
        }
    }

    #[test]
    fn model_parses() {
        assert_eq!("rigid".parse::<Model>().unwrap(), Model::Rigid);
        assert_eq!("bending".parse::<Model>().unwrap(), Model::Bending);
        assert!("elastic".parse::<Model>().is_err());
    }
}
