//! Device description: material, spring and mirror sections, electrode
//! layout, and the section properties derived from them.
//!
//! Coordinates follow one convention throughout the crate. The mirror
//! rotates about its centerline, which runs along `x`. Electrode segments are
//! given in mirror-local `x` (0 at the left end of the mirror strip) and by the
//! lateral distances `a < b` of their near and far edges from the rotation
//! axis. The beam axis used for bending runs from the left spring anchor at
//! `x = 0` to the right anchor at `x = 2 L_s + L_m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Default relative truncation tolerance of the torsion-constant series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

fn vacuum_permittivity() -> f64 {
    VACUUM_PERMITTIVITY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    #[serde(rename = "youngs_modulus_pa")]
    pub youngs_modulus: f64,
    #[serde(rename = "shear_modulus_pa")]
    pub shear_modulus: f64,
    #[serde(rename = "permittivity_f_per_m", default = "vacuum_permittivity")]
    pub permittivity: f64,
}

/// One torsion spring. Both springs of a mirror are identical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringGeometry {
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(rename = "width_m")]
    pub width: f64,
    #[serde(rename = "thickness_m")]
    pub thickness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorGeometry {
    #[serde(rename = "length_m")]
    pub length: f64,
    #[serde(rename = "width_m")]
    pub width: f64,
    #[serde(rename = "thickness_m")]
    pub thickness: f64,
    /// Replaces the solid-rectangle second moment of area, e.g. to account
    /// for release holes.
    #[serde(
        rename = "inertia_override_m4",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub inertia_override: Option<f64>,
}

impl MirrorGeometry {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }
}

/// An electrode strip under one half of the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeSegment {
    #[serde(rename = "x_start_m")]
    pub x_start: f64,
    #[serde(rename = "x_end_m")]
    pub x_end: f64,
    /// Lateral distance of the near edge from the rotation axis.
    #[serde(rename = "a_m")]
    pub a: f64,
    /// Lateral distance of the far edge from the rotation axis.
    #[serde(rename = "b_m")]
    pub b: f64,
}

impl ElectrodeSegment {
    pub fn length(&self) -> f64 {
        self.x_end - self.x_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    /// Free-form notes; carried through but otherwise ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub material: Material,
    pub spring: SpringGeometry,
    pub mirror: MirrorGeometry,
    #[serde(rename = "gap_m")]
    pub gap: f64,
    pub electrodes: Vec<ElectrodeSegment>,
}

impl DeviceConfig {
    /// Tilt at which the far edge of the widest electrode would reach the
    /// electrode plane: `h / max(b)`.
    pub fn theta_geo(&self) -> f64 {
        let b_max = self
            .electrodes
            .iter()
            .map(|e| e.b)
            .fold(0.0_f64, f64::max);
        self.gap / b_max
    }

    /// Length of the spring–mirror–spring beam axis.
    pub fn total_length(&self) -> f64 {
        2.0 * self.spring.length + self.mirror.length
    }

    pub fn validate(self) -> Result<Self, ConfigError> {
        validate_config(self)
    }
}

/// Checks every invariant of the device description and returns it with the
/// electrodes sorted by `x_start`. All violations are collected, not just the
/// first.
pub fn validate_config(mut raw: DeviceConfig) -> Result<DeviceConfig, ConfigError> {
    let mut err = ConfigError::default();

    let mut positive = |path: &str, v: f64| {
        if !(v > 0.0 && v.is_finite()) {
            err.push(path, format!("must be positive and finite, got {v:e}"));
        }
    };
    positive("material.youngs_modulus_pa", raw.material.youngs_modulus);
    positive("material.shear_modulus_pa", raw.material.shear_modulus);
    positive("material.permittivity_f_per_m", raw.material.permittivity);
    positive("spring.length_m", raw.spring.length);
    positive("spring.width_m", raw.spring.width);
    positive("spring.thickness_m", raw.spring.thickness);
    positive("mirror.length_m", raw.mirror.length);
    positive("mirror.width_m", raw.mirror.width);
    positive("mirror.thickness_m", raw.mirror.thickness);
    if let Some(i) = raw.mirror.inertia_override {
        positive("mirror.inertia_override_m4", i);
    }
    positive("gap_m", raw.gap);

    if raw.mirror.width >= raw.mirror.length {
        err.push(
            "mirror.width_m",
            format!(
                "width < length violated ({:e} >= {:e}); sections must rotate rigidly",
                raw.mirror.width, raw.mirror.length
            ),
        );
    }

    if raw.electrodes.is_empty() {
        err.push("electrodes", "at least one electrode segment is required");
    }

    let length = raw.mirror.length;
    let half_width = raw.mirror.half_width();
    for (i, e) in raw.electrodes.iter().enumerate() {
        let p = |field: &str| format!("electrodes[{i}].{field}");
        if !(e.x_start >= 0.0) {
            err.push(p("x_start_m"), format!("0 <= x_start violated ({:e})", e.x_start));
        }
        if !(e.x_start < e.x_end) {
            err.push(
                p("x_end_m"),
                format!("x_start < x_end violated ({:e} >= {:e})", e.x_start, e.x_end),
            );
        }
        if !(e.x_end <= length) {
            err.push(
                p("x_end_m"),
                format!("x_end <= mirror length violated ({:e} > {length:e})", e.x_end),
            );
        }
        if !(e.a >= 0.0) {
            err.push(p("a_m"), format!("0 <= a violated ({:e})", e.a));
        }
        if !(e.a < e.b) {
            err.push(p("b_m"), format!("a < b violated ({:e} >= {:e})", e.a, e.b));
        }
        if !(e.b <= half_width) {
            err.push(
                p("b_m"),
                format!("b <= mirror half-width violated ({:e} > {half_width:e})", e.b),
            );
        }
    }

    let mut order: Vec<usize> = (0..raw.electrodes.len()).collect();
    order.sort_by(|&i, &j| raw.electrodes[i].x_start.total_cmp(&raw.electrodes[j].x_start));
    for pair in order.windows(2) {
        let (prev, next) = (&raw.electrodes[pair[0]], &raw.electrodes[pair[1]]);
        if next.x_start < prev.x_end {
            err.push(
                format!("electrodes[{}]", pair[1]),
                format!(
                    "overlaps electrodes[{}] in x ([{:e}, {:e}] vs [{:e}, {:e}])",
                    pair[0], next.x_start, next.x_end, prev.x_start, prev.x_end
                ),
            );
        }
    }

    if err.is_empty() {
        raw.electrodes = order.iter().map(|&i| raw.electrodes[i]).collect();
        Ok(raw)
    } else {
        Err(err)
    }
}

/// Saint-Venant torsion constant of a solid rectangle.
///
/// Uses the long side `c` and short side `s` so the result is symmetric in
/// its arguments:
///
/// ```text
/// J = c s³/3 · (1 − 192 s/(π⁵ c) · Σ_{i odd} tanh(iπc/(2s)) / i⁵)
/// ```
///
/// The odd-index series is truncated once the next term moves the sum by
/// less than `rel_tol` relatively.
///
/// # Panics
///
/// If either side is not positive or `rel_tol` is outside `(0, 1)`.
pub fn torsion_constant(thickness: f64, width: f64, rel_tol: f64) -> f64 {
    assert!(
        thickness > 0.0 && width > 0.0,
        "torsion_constant: sides must be positive"
    );
    assert!(
        rel_tol > 0.0 && rel_tol < 1.0,
        "torsion_constant: rel_tol must lie in (0, 1)"
    );
    let long = thickness.max(width);
    let short = thickness.min(width);
    let ratio = long / short;

    let mut sum = 0.0;
    let mut i = 1u32;
    loop {
        let fi = f64::from(i);
        let term = (fi * PI * ratio / 2.0).tanh() / fi.powi(5);
        sum += term;
        if term <= rel_tol * sum {
            break;
        }
        i += 2;
    }

    long * short.powi(3) / 3.0 * (1.0 - 192.0 / (PI.powi(5) * ratio) * sum)
}

/// Restoring torque per radian of the two springs acting in parallel:
/// `2 G J / L_s`.
pub fn torsional_stiffness(material: &Material, spring: &SpringGeometry, j_p: f64) -> f64 {
    2.0 * material.shear_modulus * j_p / spring.length
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionProperties {
    /// Torsional stiffness of the spring pair (N·m/rad).
    pub k_theta: f64,
    /// Torsion constant of one spring section (m⁴).
    pub j_p: f64,
    /// Second moment of area of a spring for vertical bending (m⁴).
    pub i_spring: f64,
    /// Second moment of area of the mirror for vertical bending (m⁴).
    pub i_mirror: f64,
}

pub fn section_properties(config: &DeviceConfig, rel_tol: f64) -> SectionProperties {
    let spring = &config.spring;
    let mirror = &config.mirror;
    let j_p = torsion_constant(spring.thickness, spring.width, rel_tol);
    SectionProperties {
        k_theta: torsional_stiffness(&config.material, spring, j_p),
        j_p,
        i_spring: rectangle_inertia(spring.width, spring.thickness),
        i_mirror: mirror
            .inertia_override
            .unwrap_or_else(|| rectangle_inertia(mirror.width, mirror.thickness)),
    }
}

/// `width · height³ / 12`, bending about the axis parallel to `width`.
fn rectangle_inertia(width: f64, height: f64) -> f64 {
    width * height.powi(3) / 12.0
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_config() -> DeviceConfig {
        DeviceConfig {
            description: None,
            material: Material {
                youngs_modulus: 160e9,
                shear_modulus: 65.6e9,
                permittivity: VACUUM_PERMITTIVITY,
            },
            spring: SpringGeometry {
                length: 50e-6,
                width: 2e-6,
                thickness: 15e-6,
            },
            mirror: MirrorGeometry {
                length: 490e-6,
                width: 45e-6,
                thickness: 15e-6,
                inertia_override: None,
            },
            gap: 1.6e-6,
            electrodes: vec![ElectrodeSegment {
                x_start: 0.0,
                x_end: 490e-6,
                a: 0.0,
                b: 20e-6,
            }],
        }
    }

    fn paths(err: &ConfigError) -> Vec<&str> {
        err.issues.iter().map(|i| i.path.as_str()).collect()
    }

    #[test]
    fn accepts_valid_config() {
        let cfg = validate_config(sample_config()).unwrap();
        assert_eq!(cfg.gap, 1.6e-6);
        assert_eq!(cfg.spring.length, 50e-6);
        assert!((cfg.theta_geo() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_electrode() {
        let mut cfg = sample_config();
        cfg.electrodes[0].a = cfg.electrodes[0].b;
        let err = validate_config(cfg).unwrap_err();
        assert_eq!(paths(&err), ["electrodes[0].b_m"]);
        assert!(err.issues[0].message.contains("a < b violated"));
    }

    #[test]
    fn rejects_overlapping_electrodes() {
        let mut cfg = sample_config();
        cfg.electrodes = vec![
            ElectrodeSegment { x_start: 200e-6, x_end: 400e-6, a: 0.0, b: 10e-6 },
            ElectrodeSegment { x_start: 0.0, x_end: 250e-6, a: 0.0, b: 10e-6 },
        ];
        let err = validate_config(cfg).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert!(err.issues[0].message.contains("overlaps electrodes[1]"));
    }

    #[test]
    fn adjoining_electrodes_are_sorted() {
        let mut cfg = sample_config();
        cfg.electrodes = vec![
            ElectrodeSegment { x_start: 245e-6, x_end: 490e-6, a: 0.0, b: 10e-6 },
            ElectrodeSegment { x_start: 0.0, x_end: 245e-6, a: 1e-6, b: 12e-6 },
        ];
        let cfg = validate_config(cfg).unwrap();
        assert_eq!(cfg.electrodes[0].x_start, 0.0);
        assert_eq!(cfg.electrodes[1].x_start, 245e-6);
    }

    #[test]
    fn reports_every_violation() {
        let mut cfg = sample_config();
        cfg.spring.thickness = -1e-6;
        cfg.gap = 0.0;
        cfg.electrodes[0].b = 30e-6;
        cfg.mirror.inertia_override = Some(-1.0);
        let err = validate_config(cfg).unwrap_err();
        let p = paths(&err);
        for expected in [
            "spring.thickness_m",
            "gap_m",
            "electrodes[0].b_m",
            "mirror.inertia_override_m4",
        ] {
            assert!(p.contains(&expected), "missing {expected} in {p:?}");
        }
    }

    #[test]
    fn rejects_wide_mirror_and_empty_electrodes() {
        let mut cfg = sample_config();
        cfg.mirror.width = cfg.mirror.length;
        cfg.electrodes.clear();
        let p = paths(&validate_config(cfg).unwrap_err()).join(",");
        assert!(p.contains("mirror.width_m"));
        assert!(p.contains("electrodes"));
    }

    #[test]
    fn square_section_torsion_constant() {
        let j = torsion_constant(1.0, 1.0, DEFAULT_SERIES_TOL);
        assert!((j - 0.1406).abs() < 1e-4, "{j}");
        // scales with the fourth power of the side
        let j2 = torsion_constant(2e-6, 2e-6, DEFAULT_SERIES_TOL);
        assert!((j2 / 16e-24 / j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_strip_limit() {
        for w in [1e3, 1e5, 1e7] {
            let j = torsion_constant(1.0, w, DEFAULT_SERIES_TOL);
            // J/W = 1/3 − 0.21/3 · (t/W) for a thin strip
            assert!((j / w - 1.0 / 3.0).abs() < 0.25 / w, "{w}: {}", j / w);
        }
    }

    #[test]
    fn torsion_constant_is_symmetric() {
        for (t, w) in [(1.0, 3.0), (15e-6, 2e-6), (0.2, 0.21)] {
            let a = torsion_constant(t, w, DEFAULT_SERIES_TOL);
            let b = torsion_constant(w, t, DEFAULT_SERIES_TOL);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stiffness_scaling() {
        let m = Material { youngs_modulus: 1.0, shear_modulus: 1.0, permittivity: 1.0 };
        let s = SpringGeometry { length: 2.0, width: 1.0, thickness: 1.0 };
        assert_eq!(torsional_stiffness(&m, &s, 3.0), 3.0);
        let long = SpringGeometry { length: 4.0, ..s };
        assert_eq!(torsional_stiffness(&m, &long, 3.0), 1.5);
        let stiff = Material { shear_modulus: 2.0, ..m };
        assert_eq!(torsional_stiffness(&stiff, &s, 3.0), 6.0);
    }

    #[test]
    fn section_properties_rectangles_and_override() {
        let mut cfg = sample_config();
        cfg.spring = SpringGeometry { length: 3.0, width: 2.0, thickness: 1.0 };
        cfg.material.shear_modulus = 5.0;
        let props = section_properties(&cfg, DEFAULT_SERIES_TOL);
        assert!((props.i_spring - 1.0 / 6.0).abs() < 1e-15);

        cfg.spring = SpringGeometry { length: 3.0, width: 1.0, thickness: 1.0 };
        let props = section_properties(&cfg, DEFAULT_SERIES_TOL);
        let expected = 2.0 * 5.0 * torsion_constant(1.0, 1.0, DEFAULT_SERIES_TOL) / 3.0;
        assert!((props.k_theta / expected - 1.0).abs() < 1e-15);
        assert!((props.k_theta / (2.0 * 5.0 * 0.1406 / 3.0) - 1.0).abs() < 1e-3);

        cfg.mirror.inertia_override = Some(5e-22);
        assert_eq!(section_properties(&cfg, DEFAULT_SERIES_TOL).i_mirror, 5e-22);
    }

    #[test]
    fn section_properties_are_deterministic() {
        let cfg = sample_config();
        let a = section_properties(&cfg, DEFAULT_SERIES_TOL);
        let b = section_properties(&cfg, DEFAULT_SERIES_TOL);
        assert_eq!(a.k_theta.to_bits(), b.k_theta.to_bits());
        assert_eq!(a.j_p.to_bits(), b.j_p.to_bits());
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetric_and_bounded(t in 1e-7f64..1e-3, w in 1e-7f64..1e-3) {
                let a = torsion_constant(t, w, DEFAULT_SERIES_TOL);
                let b = torsion_constant(w, t, DEFAULT_SERIES_TOL);
                prop_assert!(((a - b) / a).abs() <= 1e-12);
                let ratio = a / (t * w.powi(3) / 3.0);
                prop_assert!(ratio > 0.0 && ratio < 1.0);
            }
        }
    }
}
