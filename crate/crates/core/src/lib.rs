//! Static electromechanics of an electrostatically actuated torsional
//! micromirror, including the bending of the mirror strip.
//!
//! The mirror is a plate suspended by two torsion springs and pulled toward
//! electrodes underneath. Besides tilting, the strip bends under the
//! electrostatic load, which lowers the voltage needed for a given tilt and
//! therefore the pull-in voltage. This crate computes:
//!
//! - the tilt–voltage curve with self-consistent bending ([`sweep`]),
//! - the same curve for a rigid plate as a baseline ([`Model::Rigid`]),
//! - the deformed shape of the mirror axis ([`BeamShape`]),
//! - the pull-in voltage, tilt and vertical displacement ([`find_pullin`]).
//!
//! ```
//! use micromirror::{find_pullin, reference_config, section_properties, Model, SolverOptions};
//!
//! let config = reference_config();
//! let props = section_properties(&config, 1e-12);
//! let opts = SolverOptions::default();
//! let rigid = find_pullin(&config, &props, &opts, Model::Rigid).unwrap();
//! let bending = find_pullin(&config, &props, &opts, Model::Bending).unwrap();
//! assert!(bending.v_pullin < rigid.v_pullin);
//! ```

pub mod checks;
pub mod cli;
pub mod electrostatics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mechanics;
pub mod solver;

pub use electrostatics::{
    dc_dtheta, dc_dz, integrate_dc_dtheta, integrate_dc_dz, line_capacitance, CapState,
    QuadratureRule,
};
pub use error::{ConfigError, Error, Issue, Result};
pub use geometry::{
    section_properties, torsion_constant, torsional_stiffness, validate_config, DeviceConfig,
    ElectrodeSegment, Material, MirrorGeometry, SectionProperties, SpringGeometry,
};
pub use io::{load_config, parse_config, reference_config};
pub use mechanics::{eval_shape, fd_beam_oracle, max_deflection, solve_beam, BeamSegment, BeamShape};
pub use solver::{
    equilibrium_voltage, find_pullin, fixed_point, fixed_point_from, residuals, rigid_point,
    solve_for_voltage, sweep, update_load, Curve, EquilibriumPoint, Model, PullInResult,
    SolverOptions, ThetaGrid,
};
