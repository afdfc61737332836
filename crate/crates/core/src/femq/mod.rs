//! Axisymmetric magneto-quasistatic solver.
//!
//! The unknown is the flux function `ψ = r A_φ` on a tensor r–z grid,
//! discretised with node-centred finite volumes. Every turn carries an
//! additional unknown source amplitude so that its net current is imposed
//! exactly.

mod assemble;
mod mesh;
mod solve;

pub use assemble::{Boundary, BoundaryCondition, FieldProblem};
pub use mesh::{build_mesh, skin_depth, Grid, Material, Quarter, Region, ResolutionPolicy, RzBox};
pub use solve::{solve_field, solve_frequencies, FieldSolution};
