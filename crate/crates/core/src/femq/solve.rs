use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use super::assemble::{assemble, Assembly, FieldProblem};
use super::mesh::{Grid, Quarter, Region};
use crate::error::{Error, Result};

/// Relative residual the solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 4;

type C = Complex64;

/// Nodal flux function and per-turn source amplitudes of one harmonic solve.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub grid: Arc<Grid>,
    pub omega: f64,
    /// Peak terminal current phasor [A].
    pub current: C,
    /// `ψ = r A_φ` per node [Wb/rad].
    pub psi: Vec<C>,
    /// Per turn: `c` with source density `J_s = c / r` [A/m].
    pub source: Vec<C>,
    /// Per turn: `∬ dA / r` [m].
    pub turn_inv_r: Vec<f64>,
    pub turn_sigma: Vec<f64>,
    pub(crate) turn_weights: Vec<Vec<(usize, f64)>>,
    /// Relative residual after each refinement pass, first entry is the direct solve.
    pub residuals: Vec<f64>,
    pub unknowns: usize,
}

impl FieldSolution {
    pub fn residual(&self) -> f64 {
        *self.residuals.last().expect("at least one residual")
    }

    /// `A_φ` at node `(i, j)` [Wb/m].
    pub fn a_phi(&self, i: usize, j: usize) -> C {
        let r = self.grid.r[i];
        if r > 0.0 {
            self.psi[self.grid.node(i, j)] / r
        } else {
            C::new(0.0, 0.0)
        }
    }

    /// Net current in turn `k` from the discrete quadrature.
    pub fn turn_current(&self, k: usize) -> C {
        let s = C::new(0.0, self.omega * self.turn_sigma[k]);
        self.source[k] * self.turn_inv_r[k] - s * self.weighted_psi(k)
    }

    /// `∑ ∬ ψ / r dA` over turn `k`.
    pub fn weighted_psi(&self, k: usize) -> C {
        self.turn_weights[k].iter().map(|&(n, h)| self.psi[n] * h).sum()
    }

    /// Voltage across turn `k`, `2π c / σ` [V].
    pub fn turn_voltage(&self, k: usize) -> C {
        self.source[k] * (2.0 * std::f64::consts::PI / self.turn_sigma[k])
    }

    pub fn terminal_voltage(&self) -> C {
        (0..self.source.len()).map(|k| self.turn_voltage(k)).sum()
    }

    /// Flux linked by turn `k`, weighted like the current that links it [Wb].
    pub fn turn_flux_linkage(&self, k: usize) -> C {
        self.weighted_psi(k) * (2.0 * std::f64::consts::PI / self.turn_inv_r[k])
    }

    /// Total current density at a quarter of a conducting cell: the imposed
    /// source plus the induced part.
    pub fn quarter_current_density(&self, q: &Quarter) -> Option<C> {
        let m = &self.grid.materials[self.grid.cell_material[q.cell] as usize];
        if m.sigma == 0.0 {
            return None;
        }
        let r = node_radius(&self.grid, q.node);
        let induced = -C::new(0.0, self.omega * m.sigma) * self.psi[q.node];
        let c = match m.region {
            Region::Conductor { turn } => self.source[turn],
            _ => C::new(0.0, 0.0),
        };
        Some((c + induced) / r)
    }
}

pub(crate) fn node_radius(grid: &Grid, node: usize) -> f64 {
    grid.r[node % grid.nr()]
}

struct Factored {
    lu: faer::sparse::linalg::solvers::Lu<usize, C>,
    unknown: Vec<usize>,
    free: Vec<usize>,
}

const NONE: usize = usize::MAX;

fn factor(a: &Assembly, omega: f64) -> Result<Factored> {
    let nodes = a.fixed.len();
    let mut unknown = vec![NONE; nodes];
    let mut free = Vec::new();
    for (n, f) in a.fixed.iter().enumerate() {
        if f.is_none() {
            unknown[n] = free.len();
            free.push(n);
        }
    }
    let mut trip = Vec::with_capacity(4 * a.links.len() + free.len());
    for (u, &n) in free.iter().enumerate() {
        trip.push(Triplet::new(u, u, C::new(0.0, omega * a.mass[n])));
    }
    for &(p, q, g) in &a.links {
        let (up, uq) = (unknown[p], unknown[q]);
        if up != NONE {
            trip.push(Triplet::new(up, up, C::new(g, 0.0)));
        }
        if uq != NONE {
            trip.push(Triplet::new(uq, uq, C::new(g, 0.0)));
        }
        if up != NONE && uq != NONE {
            trip.push(Triplet::new(up, uq, C::new(-g, 0.0)));
            trip.push(Triplet::new(uq, up, C::new(-g, 0.0)));
        }
    }
    let nf = free.len();
    let s = SparseColMat::<usize, C>::try_new_from_triplets(nf, nf, &trip)
        .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
    let lu = s.sp_lu().map_err(|e| Error::Singular(format!("sparse factorisation failed: {e:?}")))?;
    Ok(Factored { lu, unknown, free })
}

/// `S ψ - ∑ c_k h_k` at every node, with prescribed values taken from `psi`.
fn node_residual(a: &Assembly, omega: f64, psi: &[C], c: &[C]) -> Vec<C> {
    let mut r: Vec<C> = psi.iter().zip(&a.mass).map(|(p, m)| p * C::new(0.0, omega * m)).collect();
    for &(p, q, g) in &a.links {
        let d = (psi[p] - psi[q]) * g;
        r[p] += d;
        r[q] -= d;
    }
    for (k, w) in a.turn_weights.iter().enumerate() {
        for &(n, h) in w {
            r[n] -= c[k] * h;
        }
    }
    r
}

fn constraint_residual(a: &Assembly, omega: f64, psi: &[C], c: &[C], current: C) -> Vec<C> {
    (0..c.len())
        .map(|k| {
            let wp: C = a.turn_weights[k].iter().map(|&(n, h)| psi[n] * h).sum();
            current - (c[k] * a.turn_inv_r[k] - C::new(0.0, omega * a.turn_sigma[k]) * wp)
        })
        .collect()
}

/// Solve one harmonic problem with the turn currents imposed exactly.
///
/// The sparse nodal block is factored once; the turn unknowns are eliminated
/// through their dense Schur complement, so the same path covers `ω = 0`.
pub fn solve_field(problem: &FieldProblem) -> Result<FieldSolution> {
    let a = assemble(problem)?;
    let omega = problem.omega;
    let current = problem.current;
    let f = factor(&a, omega)?;
    let nf = f.free.len();
    let nt = a.turn_weights.len();

    // Columns: [prescribed-value load, h_1, ..., h_N] on free nodes.
    let mut fixed_psi = vec![C::new(0.0, 0.0); a.fixed.len()];
    for (n, v) in a.fixed.iter().enumerate() {
        if let Some(v) = v {
            fixed_psi[n] = *v;
        }
    }
    let load = node_residual(&a, omega, &fixed_psi, &vec![C::new(0.0, 0.0); nt]);
    let mut rhs = Mat::<C>::zeros(nf, nt + 1);
    for (u, &n) in f.free.iter().enumerate() {
        rhs[(u, 0)] = -load[n];
    }
    for (k, w) in a.turn_weights.iter().enumerate() {
        for &(n, h) in w {
            if f.unknown[n] != NONE {
                rhs[(f.unknown[n], k + 1)] += C::new(h, 0.0);
            }
        }
    }
    f.lu.solve_in_place(rhs.as_mut());
    let x = rhs;

    // Schur complement on the turn sources.
    let mut t = Mat::<C>::zeros(nt, nt);
    let mut g = Mat::<C>::zeros(nt, 1);
    for k in 0..nt {
        let s = C::new(0.0, omega * a.turn_sigma[k]);
        t[(k, k)] += C::new(a.turn_inv_r[k], 0.0);
        let mut known = C::new(0.0, 0.0);
        for &(n, h) in &a.turn_weights[k] {
            let u = f.unknown[n];
            if u == NONE {
                known += fixed_psi[n] * h;
                continue;
            }
            known += x[(u, 0)] * h;
            for l in 0..nt {
                t[(k, l)] -= s * x[(u, l + 1)] * h;
            }
        }
        g[(k, 0)] = current + s * known;
    }
    let t_lu = t.partial_piv_lu();
    let c_mat = t_lu.solve(&g);
    let mut c: Vec<C> = (0..nt).map(|k| c_mat[(k, 0)]).collect();
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular("turn source system is singular".into()));
    }

    let mut psi = fixed_psi.clone();
    for (u, &n) in f.free.iter().enumerate() {
        let mut v = x[(u, 0)];
        for (l, cl) in c.iter().enumerate() {
            v += x[(u, l + 1)] * cl;
        }
        psi[n] = v;
    }

    let scale = |psi: &[C], c: &[C]| -> f64 {
        // size of the loads the residual is measured against
        let mut s2 = (current.norm_sqr()) * nt as f64;
        let mut load2 = vec![0.0; psi.len()];
        for (k, w) in a.turn_weights.iter().enumerate() {
            for &(n, h) in w {
                load2[n] += (c[k] * h).norm();
            }
        }
        for &n in &f.free {
            s2 += (load2[n] + load[n].norm()).powi(2);
        }
        s2.sqrt()
    };

    let mut residuals = Vec::new();
    for pass in 0..=MAX_REFINEMENTS {
        let rn = node_residual(&a, omega, &psi, &c);
        let rc = constraint_residual(&a, omega, &psi, &c, current);
        let num: f64 = (f.free.iter().map(|&n| rn[n].norm_sqr()).sum::<f64>() + rc.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        let den = scale(&psi, &c);
        let rel = if den > 0.0 { num / den } else { num };
        if !rel.is_finite() {
            return Err(Error::Numerical("non-finite residual in field solve".into()));
        }
        residuals.push(rel);
        if rel <= RESIDUAL_TOL || pass == MAX_REFINEMENTS {
            break;
        }
        // correction for [S -B; -W T0] [dψ; dc] = [-rn; rc]
        let mut dy = Mat::<C>::zeros(nf, 1);
        for (u, &n) in f.free.iter().enumerate() {
            dy[(u, 0)] = -rn[n];
        }
        f.lu.solve_in_place(dy.as_mut());
        let mut gc = Mat::<C>::zeros(nt, 1);
        for k in 0..nt {
            let s = C::new(0.0, omega * a.turn_sigma[k]);
            let wd: C = a.turn_weights[k]
                .iter()
                .filter(|(n, _)| f.unknown[*n] != NONE)
                .map(|&(n, h)| dy[(f.unknown[n], 0)] * h)
                .sum();
            gc[(k, 0)] = rc[k] + s * wd;
        }
        let dc = t_lu.solve(&gc);
        for k in 0..nt {
            c[k] += dc[(k, 0)];
        }
        for (u, &n) in f.free.iter().enumerate() {
            let mut v = dy[(u, 0)];
            for l in 0..nt {
                v += x[(u, l + 1)] * dc[(l, 0)];
            }
            psi[n] += v;
        }
    }

    let final_res = *residuals.last().expect("non-empty");
    if final_res > RESIDUAL_TOL {
        return Err(Error::Solver {
            message: format!("field solve stalled at relative residual {final_res:.3e}"),
            residuals,
        });
    }
    let sol = FieldSolution {
        grid: problem.grid.clone(),
        omega,
        current,
        psi,
        source: c,
        turn_inv_r: a.turn_inv_r,
        turn_sigma: a.turn_sigma,
        turn_weights: a.turn_weights,
        residuals,
        unknowns: nf + nt,
    };
    let tol = 1e-8 * current.norm().max(f64::MIN_POSITIVE);
    for k in 0..nt {
        let dev = (sol.turn_current(k) - current).norm();
        if dev > tol {
            return Err(Error::Solver {
                message: format!("turn {k} carries {:.6e} A instead of the imposed current", sol.turn_current(k).norm()),
                residuals: sol.residuals.clone(),
            });
        }
    }
    Ok(sol)
}

/// Solve at several frequencies on one shared grid.
pub fn solve_frequencies(grid: Arc<Grid>, frequencies: &[f64], current: C) -> Result<Vec<FieldSolution>> {
    let run = |&f: &f64| solve_field(&FieldProblem::new(grid.clone(), 2.0 * std::f64::consts::PI * f, current));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        frequencies.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        frequencies.iter().map(run).collect()
    }
}
