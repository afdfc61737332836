use std::sync::Arc;

use num_complex::Complex64;

use super::mesh::{Grid, Region};
use crate::error::{Error, Result};

/// Condition on one side of the rectangular domain, in terms of `A_φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(Complex64),
    /// Zero normal derivative of the flux function.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub r_min: BoundaryCondition,
    pub r_max: BoundaryCondition,
    pub z_min: BoundaryCondition,
    pub z_max: BoundaryCondition,
}

impl Default for Boundary {
    /// `A_φ = 0` on every side; on the axis this is the symmetry condition.
    fn default() -> Self {
        let zero = BoundaryCondition::Dirichlet(Complex64::new(0.0, 0.0));
        Self {
            r_min: zero,
            r_max: zero,
            z_min: zero,
            z_max: zero,
        }
    }
}

/// One harmonic field solve: grid, angular frequency and the peak phasor of
/// the terminal current shared by all turns.
#[derive(Debug, Clone)]
pub struct FieldProblem {
    pub grid: Arc<Grid>,
    pub omega: f64,
    pub current: Complex64,
    pub boundary: Boundary,
}

impl FieldProblem {
    pub fn new(grid: Arc<Grid>, omega: f64, current: Complex64) -> Self {
        Self {
            grid,
            omega,
            current,
            boundary: Boundary::default(),
        }
    }

    /// Size of the linear system: free nodes plus one source unknown per turn.
    pub fn dimension(&self) -> usize {
        fixed_nodes(&self.grid, &self.boundary)
            .iter()
            .filter(|f| f.is_none())
            .count()
            + self.grid.turns
    }
}

/// Prescribed `ψ` per node, `None` for free nodes.
fn fixed_nodes(grid: &Grid, bc: &Boundary) -> Vec<Option<Complex64>> {
    let (nr, nz) = (grid.nr(), grid.nz());
    let mut fixed = vec![None; nr * nz];
    let mut set = |i: usize, j: usize, a: Complex64| {
        let n = grid.node(i, j);
        if fixed[n].is_none() {
            fixed[n] = Some(a * grid.r[i]);
        }
    };
    if grid.r[0] == 0.0 {
        for j in 0..nz {
            set(0, j, Complex64::new(0.0, 0.0));
        }
    }
    if let BoundaryCondition::Dirichlet(a) = bc.r_min {
        for j in 0..nz {
            set(0, j, a);
        }
    }
    if let BoundaryCondition::Dirichlet(a) = bc.r_max {
        for j in 0..nz {
            set(nr - 1, j, a);
        }
    }
    if let BoundaryCondition::Dirichlet(a) = bc.z_min {
        for i in 0..nr {
            set(i, 0, a);
        }
    }
    if let BoundaryCondition::Dirichlet(a) = bc.z_max {
        for i in 0..nr {
            set(i, nz - 1, a);
        }
    }
    fixed
}

/// Frequency-independent pieces of the discrete operator.
pub(crate) struct Assembly {
    /// Node-to-node conductances `(a, b, g)`.
    pub links: Vec<(usize, usize, f64)>,
    /// Lumped `∑ σ ∬ dA / r` per node.
    pub mass: Vec<f64>,
    /// Per turn: `(node, ∬ dA / r)` over the turn's share of each node.
    pub turn_weights: Vec<Vec<(usize, f64)>>,
    /// Per turn: `∑ ∬ dA / r` over the whole turn.
    pub turn_inv_r: Vec<f64>,
    pub turn_sigma: Vec<f64>,
    pub fixed: Vec<Option<Complex64>>,
}

pub(crate) fn assemble(problem: &FieldProblem) -> Result<Assembly> {
    let grid = &*problem.grid;
    grid.check()?;
    if !(problem.omega >= 0.0) || !problem.omega.is_finite() {
        return Err(Error::InvalidArgument(format!("angular frequency must be finite and >= 0, got {}", problem.omega)));
    }
    let (nr, nz) = (grid.nr(), grid.nz());
    let nodes = nr * nz;
    let n_turns = grid.turns;

    let mut links = Vec::with_capacity(4 * nodes);
    let mut mass = vec![0.0; nodes];
    let mut acc: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n_turns];
    let mut turn_sigma = vec![f64::NAN; n_turns];

    for j in 0..nz - 1 {
        let dz = grid.z[j + 1] - grid.z[j];
        for i in 0..nr - 1 {
            let m = grid.material(i, j);
            let (r0, r1) = (grid.r[i], grid.r[i + 1]);
            let (dr, rm) = (r1 - r0, 0.5 * (r0 + r1));
            let nu = m.nu();
            let g_r = nu * 0.5 * dz / (rm * dr);
            links.push((grid.node(i, j), grid.node(i + 1, j), g_r));
            links.push((grid.node(i, j + 1), grid.node(i + 1, j + 1), g_r));
            if r0 > 0.0 {
                links.push((grid.node(i, j), grid.node(i, j + 1), nu * (rm / r0).ln() / dz));
            }
            links.push((grid.node(i + 1, j), grid.node(i + 1, j + 1), nu * (r1 / rm).ln() / dz));

            if m.sigma > 0.0 {
                if r0 == 0.0 {
                    return Err(Error::Geometry("conducting cells must not touch the axis".into()));
                }
                for q in grid.cell_quarters(i, j) {
                    mass[q.node] += m.sigma * q.inv_r;
                    if let Region::Conductor { turn } = m.region {
                        *acc[turn].entry(q.node).or_insert(0.0) += q.inv_r;
                    }
                }
                if let Region::Conductor { turn } = m.region {
                    if turn_sigma[turn].is_nan() {
                        turn_sigma[turn] = m.sigma;
                    } else if turn_sigma[turn] != m.sigma {
                        return Err(Error::Geometry(format!("turn {turn} mixes conductivities")));
                    }
                }
            } else if let Region::Conductor { turn } = m.region {
                return Err(Error::Geometry(format!("turn {turn} has a non-conducting cell")));
            }
        }
    }

    let turn_weights: Vec<Vec<(usize, f64)>> = acc.into_iter().map(|m| m.into_iter().collect()).collect();
    let turn_inv_r: Vec<f64> = turn_weights.iter().map(|w| w.iter().map(|&(_, h)| h).sum()).collect();
    for (k, h) in turn_inv_r.iter().enumerate() {
        if !(*h > 0.0) {
            return Err(Error::Geometry(format!("turn {k} has no conducting cells")));
        }
    }
    Ok(Assembly {
        links,
        mass,
        turn_weights,
        turn_inv_r,
        turn_sigma,
        fixed: fixed_nodes(grid, &problem.boundary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femq::mesh::Material;

    fn air_grid() -> Grid {
        let r: Vec<f64> = (0..=10).map(|i| 0.01 + 0.001 * i as f64).collect();
        let z: Vec<f64> = (0..=5).map(|j| 0.002 * j as f64).collect();
        Grid::uniform_material(r, z, Material::air()).unwrap()
    }

    #[test]
    fn dimension_counts_free_nodes_and_turns() {
        let p = FieldProblem::new(Arc::new(air_grid()), 0.0, Complex64::new(1.0, 0.0));
        // 11 x 6 nodes, boundary ring of 2*11 + 2*4 = 30
        assert_eq!(p.dimension(), 66 - 30);
    }

    #[test]
    fn neumann_sides_free_their_nodes() {
        let mut p = FieldProblem::new(Arc::new(air_grid()), 0.0, Complex64::new(1.0, 0.0));
        p.boundary.z_min = BoundaryCondition::Neumann;
        p.boundary.z_max = BoundaryCondition::Neumann;
        assert_eq!(p.dimension(), 66 - 12);
    }

    #[test]
    fn row_sums_of_conductances_vanish_for_constant_psi() {
        // a uniform ψ carries no flux: every link conductance is finite and positive
        let a = assemble(&FieldProblem::new(Arc::new(air_grid()), 0.0, Complex64::new(0.0, 0.0))).unwrap();
        assert!(a.links.iter().all(|&(_, _, g)| g.is_finite() && g > 0.0));
        assert!(a.mass.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn negative_frequency_is_rejected() {
        let p = FieldProblem::new(Arc::new(air_grid()), -1.0, Complex64::new(1.0, 0.0));
        assert!(matches!(assemble(&p), Err(Error::InvalidArgument(_))));
    }
}
