//! Structured r–z grids for the axisymmetric field solver.

use crate::error::{Error, Result};
use crate::model::InductorDesign;
use crate::MU0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Air,
    Core,
    /// Turn `k` (0-based, bottom first) of the winding.
    Conductor { turn: usize },
    /// Conducting material with no imposed net current.
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub region: Region,
    pub mu_r: f64,
    /// [S/m]
    pub sigma: f64,
}

impl Material {
    pub fn air() -> Self {
        Self {
            region: Region::Air,
            mu_r: 1.0,
            sigma: 0.0,
        }
    }

    pub fn nu(&self) -> f64 {
        1.0 / (MU0 * self.mu_r)
    }
}

/// Axis-aligned rectangle in the r–z plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RzBox {
    pub r0: f64,
    pub r1: f64,
    pub z0: f64,
    pub z1: f64,
}

impl RzBox {
    pub fn contains(&self, r: f64, z: f64) -> bool {
        r > self.r0 && r < self.r1 && z > self.z0 && z < self.z1
    }

    /// Euclidean distance from a point to the box (0 inside).
    pub fn distance(&self, r: f64, z: f64) -> f64 {
        let dr = (self.r0 - r).max(0.0).max(r - self.r1);
        let dz = (self.z0 - z).max(0.0).max(z - self.z1);
        dr.hypot(dz)
    }
}

/// Part of a cell owned by one of its corner nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quarter {
    pub cell: usize,
    pub node: usize,
    /// `∬ dA / r` over the quarter [m]
    pub inv_r: f64,
    /// [m²]
    pub area: f64,
}

/// Tensor-product grid with cell-wise constant materials.
///
/// Node `(i, j)` sits at `(r[i], z[j])` and has index `j * nr + i`; cell
/// `(i, j)` spans `[r[i], r[i+1]] × [z[j], z[j+1]]` and has index
/// `j * (nr - 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub materials: Vec<Material>,
    pub cell_material: Vec<u16>,
    pub turns: usize,
    pub turn_boxes: Vec<RzBox>,
    pub gap_boxes: Vec<RzBox>,
}

impl Grid {
    /// A grid with every cell set to material 0.
    pub fn uniform_material(r: Vec<f64>, z: Vec<f64>, material: Material) -> Result<Self> {
        let cells = (r.len().saturating_sub(1)) * (z.len().saturating_sub(1));
        let g = Grid {
            r,
            z,
            materials: vec![material],
            cell_material: vec![0; cells],
            turns: 0,
            turn_boxes: Vec::new(),
            gap_boxes: Vec::new(),
        };
        g.check()?;
        Ok(g)
    }

    pub fn nr(&self) -> usize {
        self.r.len()
    }

    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn node_count(&self) -> usize {
        self.r.len() * self.z.len()
    }

    pub fn cell_count(&self) -> usize {
        (self.r.len() - 1) * (self.z.len() - 1)
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.r.len() + i
    }

    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * (self.r.len() - 1) + i
    }

    pub fn material(&self, i: usize, j: usize) -> &Material {
        &self.materials[self.cell_material[self.cell(i, j)] as usize]
    }

    /// Structural invariants: increasing coordinates, valid material ids, and
    /// every conductor turn index in range.
    pub fn check(&self) -> Result<()> {
        if self.r.len() < 2 || self.z.len() < 2 {
            return Err(Error::Geometry("grid needs at least two lines per direction".into()));
        }
        for (name, v) in [("r", &self.r), ("z", &self.z)] {
            if v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Geometry(format!("{name} coordinates must be finite and strictly increasing")));
            }
        }
        if self.r[0] < 0.0 {
            return Err(Error::Geometry("radial coordinates must be >= 0".into()));
        }
        if self.cell_material.len() != self.cell_count() {
            return Err(Error::Geometry("material map size does not match the grid".into()));
        }
        if self.cell_material.iter().any(|&m| m as usize >= self.materials.len()) {
            return Err(Error::Geometry("material id out of range".into()));
        }
        for m in &self.materials {
            if let Region::Conductor { turn } = m.region {
                if turn >= self.turns {
                    return Err(Error::Geometry(format!("turn index {turn} outside [0, {})", self.turns)));
                }
            }
            if !(m.mu_r > 0.0) || !(m.sigma >= 0.0) {
                return Err(Error::Geometry("materials need mu_r > 0 and sigma >= 0".into()));
            }
        }
        Ok(())
    }

    /// Largest conductor-cell edge length.
    pub fn max_conductor_cell(&self) -> f64 {
        let mut h: f64 = 0.0;
        for j in 0..self.nz() - 1 {
            for i in 0..self.nr() - 1 {
                if self.material(i, j).sigma > 0.0 {
                    h = h.max(self.r[i + 1] - self.r[i]).max(self.z[j + 1] - self.z[j]);
                }
            }
        }
        h
    }

    /// Whether every conductor cell resolves the skin depth at `omega` with
    /// at least `cells_per_skin_depth` cells.
    pub fn resolves_skin_depth(&self, omega: f64, cells_per_skin_depth: f64) -> bool {
        let sigma = self.materials.iter().map(|m| m.sigma).fold(0.0, f64::max);
        if omega == 0.0 || sigma == 0.0 {
            return true;
        }
        let delta = skin_depth(omega, sigma, 1.0);
        self.max_conductor_cell() <= delta / cells_per_skin_depth * (1.0 + 1e-9)
    }

    /// The four node-owned quarters of cell `(i, j)`, with their `∬ dA / r`
    /// and area. Quarters touching the axis get a zero `1/r` weight.
    pub fn cell_quarters(&self, i: usize, j: usize) -> [Quarter; 4] {
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let rm = 0.5 * (r0 + r1);
        let half_dz = 0.5 * (self.z[j + 1] - self.z[j]);
        let w_in = if r0 > 0.0 { (rm / r0).ln() } else { 0.0 };
        let w_out = (r1 / rm).ln();
        let a_in = half_dz * (rm - r0);
        let a_out = half_dz * (r1 - rm);
        let cell = self.cell(i, j);
        let q = |node, inv_r: f64, area| Quarter {
            cell,
            node,
            inv_r: half_dz * inv_r,
            area,
        };
        [
            q(self.node(i, j), w_in, a_in),
            q(self.node(i + 1, j), w_out, a_out),
            q(self.node(i, j + 1), w_in, a_in),
            q(self.node(i + 1, j + 1), w_out, a_out),
        ]
    }

    /// Count of cells whose material is a conductor of the given turn.
    pub fn turn_cell_count(&self, turn: usize) -> usize {
        self.cell_material
            .iter()
            .filter(|&&m| self.materials[m as usize].region == Region::Conductor { turn })
            .count()
    }
}

/// `δ = sqrt(2 / (ω μ σ))`.
pub fn skin_depth(omega: f64, sigma: f64, mu_r: f64) -> f64 {
    (2.0 / (omega * MU0 * mu_r * sigma)).sqrt()
}

/// Mesh density controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionPolicy {
    /// Highest frequency the grid must resolve [Hz]; 0 permits a coarse conductor mesh.
    pub max_frequency: f64,
    pub cells_per_skin_depth: f64,
    /// Uniform subdivision of every base cell; 2 doubles the cell count per region and direction.
    pub refine: u32,
    /// Air padding beyond the core [m]; `None` means one core diameter.
    pub padding: Option<f64>,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            max_frequency: 0.0,
            cells_per_skin_depth: 3.0,
            refine: 1,
            padding: None,
        }
    }
}

impl ResolutionPolicy {
    pub fn for_frequency(max_frequency: f64) -> Self {
        Self {
            max_frequency,
            ..Default::default()
        }
    }

    pub fn refined(self, factor: u32) -> Self {
        Self {
            refine: self.refine * factor,
            ..self
        }
    }
}

// Base spacings [m] away from the winding.
const H_CORE: f64 = 0.5e-3;
const H_WINDOW: f64 = 0.2e-3;
const PAD_GROWTH: f64 = 1.3;

#[derive(Clone, Copy)]
enum Spacing {
    Uniform(f64),
    /// Geometric growth away from `a` (true) or towards `b` (false).
    Grow { h0: f64, from_start: bool },
}

fn lines(breaks: &[f64], spacing: impl Fn(f64, f64) -> Spacing, refine: u32) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        let base: Vec<f64> = match spacing(a, b) {
            Spacing::Uniform(h) => {
                let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
                (1..=n).map(|k| a + len * k as f64 / n as f64).collect()
            }
            Spacing::Grow { h0, from_start } => {
                // smallest n with h0 (ρ^n - 1)/(ρ - 1) >= len, then rescaled to fit
                let rho = PAD_GROWTH;
                let mut n = 1usize;
                while h0 * (rho.powi(n as i32) - 1.0) / (rho - 1.0) < len {
                    n += 1;
                }
                let total = rho.powi(n as i32) - 1.0;
                (1..=n)
                    .map(|k| {
                        if from_start {
                            a + len * (rho.powi(k as i32) - 1.0) / total
                        } else {
                            b - len * (rho.powi((n - k) as i32) - 1.0) / total
                        }
                    })
                    .collect()
            }
        };
        let mut prev = *out.last().expect("non-empty");
        for x in base {
            for s in 1..refine {
                out.push(prev + (x - prev) * f64::from(s) / f64::from(refine));
            }
            out.push(x);
            prev = x;
        }
        *out.last_mut().expect("non-empty") = b;
    }
    out
}

fn sorted_breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let span = v.last().unwrap() - v[0];
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * span);
    v
}

/// Build the r–z grid of a design: centre leg with its gaps, yokes,
/// outer-leg shell, the `N` turns tagged individually, and air padding.
pub fn build_mesh(design: &InductorDesign, policy: &ResolutionPolicy) -> Result<Grid> {
    design.validate().map_err(|e| Error::Geometry(e.to_string()))?;
    if policy.refine == 0 || !(policy.cells_per_skin_depth > 0.0) || !(policy.max_frequency >= 0.0) {
        return Err(Error::InvalidArgument("resolution policy needs refine >= 1, cells per skin depth > 0, frequency >= 0".into()));
    }
    let coil = &design.coil;
    let core = &design.core;
    let rc = core.center_leg_radius;
    let roi = core.outer_leg_inner_radius();
    let ro = core.outer_radius();
    let half_h = 0.5 * core.window_height;
    let ty = core.yoke_thickness;
    let rw0 = coil.inner_radius;
    let rw1 = coil.outer_radius();
    let hw = coil.height();
    let pad = policy.padding.unwrap_or(2.0 * ro);
    if !(pad > 0.0) {
        return Err(Error::Geometry("air padding must be > 0".into()));
    }
    let r_max = ro + pad;
    let z_max = half_h + ty + pad;

    let h_cond = if policy.max_frequency > 0.0 {
        let omega = 2.0 * std::f64::consts::PI * policy.max_frequency;
        skin_depth(omega, coil.conductivity, 1.0) / policy.cells_per_skin_depth
    } else {
        (0.5 * coil.thickness).min(0.1 * coil.radial_depth)
    };
    let h_window = H_WINDOW.max(h_cond);

    let r_breaks = sorted_breaks(vec![0.0, rc, rw0, rw1, roi, ro, r_max]);
    let r = lines(
        &r_breaks,
        |a, b| {
            let m = 0.5 * (a + b);
            if m > rw0 && m < rw1 {
                Spacing::Uniform(h_cond)
            } else if m > rc && m < roi {
                Spacing::Uniform(h_window)
            } else if m > ro {
                Spacing::Grow { h0: H_CORE, from_start: true }
            } else {
                Spacing::Uniform(H_CORE)
            }
        },
        policy.refine,
    );

    let gaps = core.sorted_gaps();
    let mut zb = vec![-z_max, -half_h - ty, -half_h, half_h, half_h + ty, z_max];
    for g in &gaps {
        let (a, b) = g.z_range();
        zb.push(a);
        zb.push(b);
    }
    for k in 0..coil.turns as usize {
        let (a, b) = coil.turn_z_range(k);
        zb.push(a);
        zb.push(b);
    }
    let z_breaks = sorted_breaks(zb);
    let z = lines(
        &z_breaks,
        |a, b| {
            let m = 0.5 * (a + b);
            let mut h = if m.abs() < 0.5 * hw {
                h_cond
            } else if m.abs() < half_h {
                h_window
            } else if m.abs() < half_h + ty {
                H_CORE
            } else {
                return Spacing::Grow {
                    h0: H_CORE,
                    from_start: m > 0.0,
                };
            };
            if let Some(g) = gaps.iter().find(|g| {
                let (lo, hi) = g.z_range();
                m > lo && m < hi
            }) {
                h = h.min(0.25 * g.length);
            }
            Spacing::Uniform(h)
        },
        policy.refine,
    );

    let n = coil.turns as usize;
    let mut materials = vec![
        Material::air(),
        Material {
            region: Region::Core,
            mu_r: core.relative_permeability,
            sigma: 0.0,
        },
    ];
    for k in 0..n {
        materials.push(Material {
            region: Region::Conductor { turn: k },
            mu_r: 1.0,
            sigma: coil.conductivity,
        });
    }
    let turn_boxes: Vec<RzBox> = (0..n)
        .map(|k| {
            let (z0, z1) = coil.turn_z_range(k);
            RzBox { r0: rw0, r1: rw1, z0, z1 }
        })
        .collect();
    let gap_boxes: Vec<RzBox> = gaps
        .iter()
        .map(|g| {
            let (z0, z1) = g.z_range();
            RzBox { r0: 0.0, r1: rc, z0, z1 }
        })
        .collect();

    let pitch = coil.thickness + coil.spacing;
    let z_first = -0.5 * hw;
    let nr = r.len();
    let mut cell_material = Vec::with_capacity((nr - 1) * (z.len() - 1));
    for j in 0..z.len() - 1 {
        let zm = 0.5 * (z[j] + z[j + 1]);
        for i in 0..nr - 1 {
            let rm = 0.5 * (r[i] + r[i + 1]);
            let in_window_z = zm.abs() < half_h;
            let id = if rm < rc && in_window_z {
                if gap_boxes.iter().any(|b| b.contains(rm, zm)) {
                    0
                } else {
                    1
                }
            } else if (zm.abs() >= half_h && zm.abs() < half_h + ty && rm < ro) || (rm > roi && rm < ro && in_window_z) {
                // yokes, then outer leg
                1
            } else if rm > rw0 && rm < rw1 && zm.abs() < 0.5 * hw {
                let k = ((zm - z_first) / pitch).floor() as usize;
                if k < n && turn_boxes[k].contains(rm, zm) {
                    2 + k as u16
                } else {
                    0
                }
            } else {
                0
            };
            cell_material.push(id);
        }
    }

    let grid = Grid {
        r,
        z,
        materials,
        cell_material,
        turns: n,
        turn_boxes,
        gap_boxes,
    };
    grid.check()?;
    for k in 0..n {
        if grid.turn_cell_count(k) == 0 {
            return Err(Error::Geometry(format!("turn {k} received no cells")));
        }
    }
    Ok(grid)
}
