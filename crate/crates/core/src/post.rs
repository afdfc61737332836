//! Terminal quantities and loss decompositions from field solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::femq::{build_mesh, solve_frequencies, FieldSolution, Grid, Region, ResolutionPolicy};
use crate::mec::QModel;
use crate::model::InductorDesign;

type C = Complex64;

/// Cell-averaged current densities of one conducting cell [A/m²].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCurrent {
    pub cell: usize,
    pub turn: Option<usize>,
    /// Share of the terminal current distributed as at DC.
    pub source: C,
    /// Induced part, the remainder of the total.
    pub eddy: C,
    pub total: C,
}

#[derive(Debug, Clone)]
pub struct CurrentDensity {
    pub cells: Vec<CellCurrent>,
    /// Per turn: `∬ J_eddy dA` [A].
    pub eddy_net: Vec<C>,
}

/// Split the conductor current into its DC-shaped part and the induced
/// remainder. The DC-shaped part of turn `k` is `(I / ∬ dA/r) / r`, so the
/// induced part carries no net current in any turn.
pub fn current_density(sol: &FieldSolution) -> CurrentDensity {
    let g = &*sol.grid;
    let mut cells = Vec::new();
    let mut eddy_net = vec![C::new(0.0, 0.0); sol.source.len()];
    for j in 0..g.nz() - 1 {
        for i in 0..g.nr() - 1 {
            let m = g.material(i, j);
            if m.sigma == 0.0 {
                continue;
            }
            let turn = match m.region {
                Region::Conductor { turn } => Some(turn),
                _ => None,
            };
            let dc_amp = turn.map_or(C::new(0.0, 0.0), |k| sol.current / sol.turn_inv_r[k]);
            let (mut src, mut tot, mut area) = (C::new(0.0, 0.0), C::new(0.0, 0.0), 0.0);
            for q in g.cell_quarters(i, j) {
                let r = g.r[q.node % g.nr()];
                let jt = sol.quarter_current_density(&q).expect("conducting cell");
                tot += jt * q.area;
                src += dc_amp / r * q.area;
                area += q.area;
                if let Some(k) = turn {
                    eddy_net[k] += (jt * r - dc_amp) * q.inv_r;
                }
            }
            cells.push(CellCurrent {
                cell: g.cell(i, j),
                turn,
                source: src / area,
                eddy: (tot - src) / area,
                total: tot / area,
            });
        }
    }
    CurrentDensity { cells, eddy_net }
}

/// Time-average ohmic loss of the whole solution [W] (peak phasors).
pub fn total_loss(sol: &FieldSolution) -> f64 {
    loss_map(sol).total
}

/// `2 P / |I|²` [Ω].
pub fn ac_resistance(sol: &FieldSolution) -> Result<f64> {
    let i2 = sol.current.norm_sqr();
    if i2 == 0.0 {
        return Err(Error::InvalidArgument("AC resistance needs a non-zero current".into()));
    }
    Ok(2.0 * total_loss(sol) / i2)
}

/// DC resistance of the discretised winding, `∑ 2π / (σ ∬ dA/r)` [Ω].
pub fn mesh_dc_resistance(sol: &FieldSolution) -> f64 {
    sol.turn_inv_r.iter().zip(&sol.turn_sigma).map(|(h, s)| 2.0 * PI / (s * h)).sum()
}

/// Complex inductance `λ / I` [H], with each turn's linkage weighted by its
/// DC current distribution.
pub fn inductance(sol: &FieldSolution) -> Result<C> {
    if sol.current.norm() == 0.0 {
        return Err(Error::InvalidArgument("inductance needs a non-zero current".into()));
    }
    let lambda: C = (0..sol.source.len()).map(|k| sol.turn_flux_linkage(k)).sum();
    Ok(lambda / sol.current)
}

/// Terminal impedance `V / I` [Ω].
pub fn impedance(sol: &FieldSolution) -> Result<C> {
    if sol.current.norm() == 0.0 {
        return Err(Error::InvalidArgument("impedance needs a non-zero current".into()));
    }
    Ok(sol.terminal_voltage() / sol.current)
}

/// Loss of one conducting cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLoss {
    pub cell: usize,
    pub turn: Option<usize>,
    /// [W]
    pub power: f64,
    /// [W/m³]
    pub density: f64,
    pub near_gap: bool,
}

#[derive(Debug, Clone)]
pub struct LossMap {
    pub cells: Vec<CellLoss>,
    pub per_turn: Vec<f64>,
    /// Loss of the DC-shaped current alone, `½ R_dc |I|²`.
    pub dc: f64,
    /// Loss of the induced current alone; `dc + eddy = total`.
    pub eddy: f64,
    pub near_gap: f64,
    pub remainder: f64,
    pub total: f64,
}

impl LossMap {
    /// Fraction of turn `k`'s loss inside the radially innermost quarter of the turn.
    pub fn inner_quarter_fraction(&self, grid: &Grid, k: usize) -> f64 {
        let b = grid.turn_boxes[k];
        let edge = b.r0 + 0.25 * (b.r1 - b.r0);
        let nr1 = grid.nr() - 1;
        let inner: f64 = self
            .cells
            .iter()
            .filter(|c| c.turn == Some(k) && 0.5 * (grid.r[c.cell % nr1] + grid.r[c.cell % nr1 + 1]) < edge)
            .map(|c| c.power)
            .sum();
        inner / self.per_turn[k]
    }
}

/// Per-cell `½ |J|² / σ` dissipation with the `2π r` volume element, summed
/// by turn and by distance to the gaps. A cell is gap-adjacent when its
/// centre lies within twice the gap length of a gap.
pub fn loss_map(sol: &FieldSolution) -> LossMap {
    let g = &*sol.grid;
    let nt = sol.source.len();
    let mut cells = Vec::new();
    let mut per_turn = vec![0.0; nt];
    let (mut total, mut eddy, mut near, mut rest) = (0.0, 0.0, 0.0, 0.0);
    let band: Vec<(crate::femq::RzBox, f64)> = g.gap_boxes.iter().map(|b| (*b, 2.0 * (b.z1 - b.z0))).collect();
    for j in 0..g.nz() - 1 {
        for i in 0..g.nr() - 1 {
            let m = g.material(i, j);
            if m.sigma == 0.0 {
                continue;
            }
            let turn = match m.region {
                Region::Conductor { turn } => Some(turn),
                _ => None,
            };
            let dc_amp = turn.map_or(C::new(0.0, 0.0), |k| sol.current / sol.turn_inv_r[k]);
            let (mut p, mut pe) = (0.0, 0.0);
            for q in g.cell_quarters(i, j) {
                let r = g.r[q.node % g.nr()];
                let jr = sol.quarter_current_density(&q).expect("conducting cell") * r;
                p += PI * jr.norm_sqr() * q.inv_r / m.sigma;
                pe += PI * (jr - dc_amp).norm_sqr() * q.inv_r / m.sigma;
            }
            let (rm, zm) = (0.5 * (g.r[i] + g.r[i + 1]), 0.5 * (g.z[j] + g.z[j + 1]));
            let near_gap = band.iter().any(|(b, d)| b.distance(rm, zm) <= *d);
            let vol = 2.0 * PI * rm * (g.r[i + 1] - g.r[i]) * (g.z[j + 1] - g.z[j]);
            if let Some(k) = turn {
                per_turn[k] += p;
            }
            total += p;
            eddy += pe;
            if near_gap {
                near += p;
            } else {
                rest += p;
            }
            cells.push(CellLoss {
                cell: g.cell(i, j),
                turn,
                power: p,
                density: p / vol,
                near_gap,
            });
        }
    }
    let dc = 0.5 * mesh_dc_resistance(sol) * sol.current.norm_sqr();
    LossMap {
        cells,
        per_turn,
        dc,
        eddy,
        near_gap: near,
        remainder: rest,
        total,
    }
}

/// `Q(jω) = L0 / L(jω) - 1` tabulated at the given frequencies.
pub fn extract_q(points: &[(f64, C)], l0: f64) -> Result<QModel> {
    let mut pts: Vec<(f64, C)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (f, l) in pts {
        if l.norm() == 0.0 {
            return Err(Error::Numerical(format!("zero inductance at {f} Hz")));
        }
        if f == 0.0 {
            continue;
        }
        freqs.push(f);
        values.push(C::new(l0, 0.0) / l - 1.0);
    }
    QModel::tabulated(freqs, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPoint {
    /// [Hz]
    pub frequency: f64,
    /// [Ω]
    pub resistance: f64,
    /// [H]
    pub inductance: C,
    pub q: C,
    /// [W]
    pub loss_total: f64,
    pub loss_dc_part: f64,
    pub loss_eddy: f64,
    pub loss_near_gap: f64,
    pub loss_remainder: f64,
    pub loss_per_turn: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    /// DC resistance of the discretised winding [Ω].
    pub dc_resistance: f64,
    /// Low-frequency inductance [H].
    pub l0: f64,
    pub points: Vec<FrequencyPoint>,
    pub grid_nodes: usize,
}

impl FrequencyResponse {
    pub fn q_model(&self) -> Result<QModel> {
        let pts: Vec<(f64, C)> = self.points.iter().map(|p| (p.frequency, p.inductance)).collect();
        extract_q(&pts, self.l0)
    }
}

/// Solve a design at `ω = 0` and at each frequency on one grid sized for the
/// highest frequency, with peak current `current`.
pub fn frequency_response(
    design: &InductorDesign,
    frequencies: &[f64],
    current: f64,
    policy: &ResolutionPolicy,
) -> Result<FrequencyResponse> {
    if frequencies.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return Err(Error::InvalidArgument("frequencies must be finite and >= 0".into()));
    }
    let f_max = frequencies.iter().cloned().fold(0.0, f64::max).max(policy.max_frequency);
    let grid = Arc::new(build_mesh(design, &ResolutionPolicy { max_frequency: f_max, ..*policy })?);
    let mut all = vec![0.0];
    all.extend_from_slice(frequencies);
    let sols = solve_frequencies(grid.clone(), &all, C::new(current, 0.0))?;
    let l0 = inductance(&sols[0])?.re;
    let mut points = Vec::with_capacity(frequencies.len());
    for (f, sol) in frequencies.iter().zip(&sols[1..]) {
        let lm = loss_map(sol);
        let l = inductance(sol)?;
        points.push(FrequencyPoint {
            frequency: *f,
            resistance: 2.0 * lm.total / sol.current.norm_sqr(),
            inductance: l,
            q: C::new(l0, 0.0) / l - 1.0,
            loss_total: lm.total,
            loss_dc_part: lm.dc,
            loss_eddy: lm.eddy,
            loss_near_gap: lm.near_gap,
            loss_remainder: lm.remainder,
            loss_per_turn: lm.per_turn,
        });
    }
    Ok(FrequencyResponse {
        dc_resistance: mesh_dc_resistance(&sols[0]),
        l0,
        points,
        grid_nodes: grid.node_count(),
    })
}
