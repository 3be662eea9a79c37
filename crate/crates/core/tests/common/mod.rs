#![allow(dead_code)]

use micromirror::{
    DeviceConfig, ElectrodeSegment, Material, MirrorGeometry, SpringGeometry,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random but physically plausible device with one full-length electrode.
pub fn random_config(rng: &mut ChaCha8Rng) -> DeviceConfig {
    let mirror_length = rng.random_range(100e-6..800e-6);
    let mirror_width = rng.random_range(10e-6..0.3 * mirror_length);
    let thickness = rng.random_range(1e-6..20e-6);
    let b = rng.random_range(0.3..1.0) * 0.5 * mirror_width;
    DeviceConfig {
        description: None,
        material: Material {
            youngs_modulus: rng.random_range(100e9..200e9),
            shear_modulus: rng.random_range(40e9..80e9),
            permittivity: micromirror::geometry::VACUUM_PERMITTIVITY,
        },
        spring: SpringGeometry {
            length: rng.random_range(10e-6..100e-6),
            width: rng.random_range(1e-6..5e-6),
            thickness,
        },
        mirror: MirrorGeometry {
            length: mirror_length,
            width: mirror_width,
            thickness,
            inertia_override: None,
        },
        gap: rng.random_range(0.5e-6..3e-6),
        electrodes: vec![ElectrodeSegment {
            x_start: 0.0,
            x_end: mirror_length,
            a: rng.random_range(0.0..0.3) * b,
            b,
        }],
    }
    .validate()
    .expect("generated config is valid")
}

pub fn rel(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}
