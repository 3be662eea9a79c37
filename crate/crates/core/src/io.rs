//! JSON device descriptions and CSV result files.
//!
//! Config fields carry their SI unit in the name (`gap_m`, `youngs_modulus_pa`,
//! ...); unknown keys are rejected. CSV files have a fixed header, LF line
//! endings, and floats written with 17 significant digits so they read back
//! bit-exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{validate_config, DeviceConfig};
use crate::solver::{Curve, EquilibriumPoint};

/// The bundled desk-scale reference device.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.json");

pub const CURVE_HEADER: [&str; 6] = [
    "theta_rad",
    "voltage_v",
    "w_eq_n_per_m",
    "u_max_m",
    "iterations",
    "converged",
];

pub const SHAPE_HEADER: [&str; 2] = ["x_m", "u_z_m"];

/// Parses and validates a JSON device description.
pub fn parse_config(text: &str) -> Result<DeviceConfig> {
    let raw: DeviceConfig = serde_json::from_str(text)?;
    Ok(validate_config(raw)?)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<DeviceConfig> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_config(&text)
}

pub fn reference_config() -> DeviceConfig {
    parse_config(REFERENCE_CONFIG).expect("bundled reference config is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub theta_rad: f64,
    pub voltage_v: f64,
    pub w_eq_n_per_m: f64,
    pub u_max_m: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&EquilibriumPoint> for CurveRecord {
    fn from(p: &EquilibriumPoint) -> Self {
        Self {
            theta_rad: p.theta,
            voltage_v: p.voltage,
            w_eq_n_per_m: p.w_eq,
            u_max_m: p.u_max(),
            iterations: p.iterations,
            converged: p.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeRecord {
    pub x_m: f64,
    pub u_z_m: f64,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_curve<W: Write>(curve: &Curve, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(CURVE_HEADER)?;
    for p in &curve.points {
        let r = CurveRecord::from(p);
        w.write_record([
            float(r.theta_rad),
            float(r.voltage_v),
            float(r.w_eq_n_per_m),
            float(r.u_max_m),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_shape<W: Write>(samples: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SHAPE_HEADER)?;
    for &(x, u) in samples {
        w.write_record([float(x), float(u)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(curve: &Curve, path: impl AsRef<Path>) -> Result<()> {
    write_curve(curve, File::create(path)?)
}

pub fn write_shape_csv(samples: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    write_shape(samples, File::create(path)?)
}

fn read_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<CurveRecord>> {
    read_records(path.as_ref())
}

pub fn read_shape_csv(path: impl AsRef<Path>) -> Result<Vec<ShapeRecord>> {
    read_records(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::geometry::{section_properties, DEFAULT_SERIES_TOL};
    use crate::solver::{sweep, Model, SolverOptions, ThetaGrid};

    #[test]
    fn reference_config_loads() {
        let cfg = reference_config();
        assert_eq!(cfg.gap, 1.6e-6);
        assert_eq!(cfg.spring.length, 50e-6);
        assert_eq!(cfg.mirror.length, 490e-6);
    }

    #[test]
    fn missing_field_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(REFERENCE_CONFIG).unwrap();
        v.as_object_mut().unwrap().remove("electrodes");
        let err = parse_config(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("electrodes"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(REFERENCE_CONFIG).unwrap();
        v["mirror"]["colour"] = "silver".into();
        let err = parse_config(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn negative_thickness_fails_validation() {
        let mut v: serde_json::Value = serde_json::from_str(REFERENCE_CONFIG).unwrap();
        v["spring"]["thickness_m"] = (-15e-6).into();
        match parse_config(&v.to_string()).unwrap_err() {
            Error::Config(c) => assert_eq!(c.issues[0].path, "spring.thickness_m"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_config("{\n  \"gap_m\": 1.6e-6,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn empty_curve_is_header_only() {
        let curve = Curve { model: Model::Rigid, points: vec![], truncated: None };
        let mut buf = Vec::new();
        write_curve(&curve, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "theta_rad,voltage_v,w_eq_n_per_m,u_max_m,iterations,converged\n"
        );
    }

    #[test]
    fn curve_round_trips_bit_exactly() {
        let cfg = reference_config();
        let props = section_properties(&cfg, DEFAULT_SERIES_TOL);
        let opts = SolverOptions::default();
        let grid = ThetaGrid { points: 7, ..Default::default() }.thetas(&cfg);
        let curve = sweep(&cfg, &props, &grid[..5], &opts, Model::Bending).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_csv(&curve, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let back = read_curve_csv(&path).unwrap();
        assert_eq!(back.len(), curve.points.len());
        for (r, p) in back.iter().zip(&curve.points) {
            assert_eq!(*r, CurveRecord::from(p));
            assert_eq!(r.voltage_v.to_bits(), p.voltage.to_bits());
        }
    }

    #[test]
    fn flat_shape_file_is_zero() {
        let cfg = reference_config();
        let props = section_properties(&cfg, DEFAULT_SERIES_TOL);
        let flat = crate::BeamShape::flat(&props, &cfg.material, &cfg.spring, &cfg.mirror);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shape.csv");
        write_shape_csv(&flat.sample(11), &path).unwrap();
        let back = read_shape_csv(&path).unwrap();
        assert_eq!(back.len(), 11);
        assert!(back.iter().all(|r| r.u_z_m == 0.0));
        assert_eq!(back.last().unwrap().x_m, cfg.total_length());
    }
}
