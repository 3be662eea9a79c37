//! Compiles the guide under `book/` so its code listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/device.md")]
pub mod device {}

#[doc = include_str!("../../../book/src/electrostatics.md")]
pub mod electrostatics {}

#[doc = include_str!("../../../book/src/bending.md")]
pub mod bending {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/pullin.md")]
pub mod pullin {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}
