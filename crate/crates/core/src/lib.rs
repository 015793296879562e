//! Numerical laboratory for concentrated planar vortex dynamics: a
//! regularized vortex particle method for the 2D Euler equations, the
//! Helmholtz–Kirchhoff point-vortex system, and the Wasserstein-type
//! diagnostics that compare the two.

pub mod error;
pub mod experiments;
pub mod geom;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod point_vortex;
pub mod rk4;
pub mod sum;
pub mod vpm;

pub use error::{Error, Result};
pub use geom::Vec2;
pub use kernel::{KernelParams, Targets};
pub use point_vortex::PointVortexState;
pub use vpm::{InitialDataSpec, ParticleCloud, ProfileKind, VpmConfig};
