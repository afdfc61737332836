//! Parametric description of a flat-wire helical inductor on a gapped,
//! axisymmetrised ferrite core.
//!
//! All quantities are SI. The window mid-plane is `z = 0`; gap positions are
//! the axial centres of the gaps measured from that plane. The coil stack is
//! centred axially in the window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Annealed copper at 20 °C [S/m].
pub const COPPER_CONDUCTIVITY: f64 = 5.8e7;
/// Default ferrite relative permeability.
pub const DEFAULT_MU_R: f64 = 3000.0;
/// Linear temperature coefficient of copper resistivity [1/K].
pub const COPPER_TEMP_COEFF: f64 = 0.00393;

const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoilSpec {
    /// Inner coil radius `r_w` [m].
    pub inner_radius: f64,
    /// Radial conductor depth `D_w` [m].
    pub radial_depth: f64,
    /// Axial conductor thickness `t_w` [m].
    pub thickness: f64,
    /// Axial turn-to-turn spacing `s` [m].
    pub spacing: f64,
    pub turns: u32,
    /// Conductor conductivity [S/m].
    pub conductivity: f64,
}

impl CoilSpec {
    /// Stack height `N t_w + (N-1) s`.
    pub fn height(&self) -> f64 {
        let n = f64::from(self.turns);
        n * self.thickness + (n - 1.0).max(0.0) * self.spacing
    }

    pub fn outer_radius(&self) -> f64 {
        self.inner_radius + self.radial_depth
    }

    pub fn average_radius(&self) -> f64 {
        self.inner_radius + 0.5 * self.radial_depth
    }

    /// Axial extent `(z_lo, z_hi)` of turn `k` (0-based, bottom first) when
    /// the stack is centred on `z = 0`.
    pub fn turn_z_range(&self, k: usize) -> (f64, f64) {
        let z0 = -0.5 * self.height() + k as f64 * (self.thickness + self.spacing);
        (z0, z0 + self.thickness)
    }

    fn check(&self, out: &mut Vec<Violation>) {
        positive(out, "coil.inner_radius", self.inner_radius);
        positive(out, "coil.radial_depth", self.radial_depth);
        positive(out, "coil.thickness", self.thickness);
        if !(self.spacing >= 0.0) || !self.spacing.is_finite() {
            out.push(Violation::new("coil.spacing", format!("must be >= 0, got {}", self.spacing)));
        }
        if self.turns < 1 {
            out.push(Violation::new("coil.turns", "must be an integer >= 1"));
        }
        positive(out, "coil.conductivity", self.conductivity);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Axial centre of the gap, measured from the window mid-plane [m].
    pub position: f64,
    /// Gap length along the centre leg [m].
    pub length: f64,
}

impl Gap {
    pub fn z_range(&self) -> (f64, f64) {
        (self.position - 0.5 * self.length, self.position + 0.5 * self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub name: String,
    pub center_leg_radius: f64,
    /// Radial window width from centre leg to outer leg [m].
    pub window_width: f64,
    pub window_height: f64,
    /// Datasheet cross-section of the outer legs, mapped onto a cylindrical
    /// shell of equal area [m²].
    pub outer_leg_area: f64,
    /// Axial thickness of the top and bottom yokes [m].
    pub yoke_thickness: f64,
    /// Datasheet effective area `A_e` [m²].
    pub effective_area: f64,
    /// Lengths of the return-path pieces (yokes and outer leg) [m].
    pub return_path_lengths: Vec<f64>,
    pub relative_permeability: f64,
    pub gaps: Vec<Gap>,
}

impl CoreSpec {
    /// Inner radius of the outer-leg shell.
    pub fn outer_leg_inner_radius(&self) -> f64 {
        self.center_leg_radius + self.window_width
    }

    /// Radial thickness of the outer-leg shell with area equal to the datasheet value.
    pub fn outer_leg_thickness(&self) -> f64 {
        let ri = self.outer_leg_inner_radius();
        (ri * ri + self.outer_leg_area / std::f64::consts::PI).sqrt() - ri
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_leg_inner_radius() + self.outer_leg_thickness()
    }

    pub fn total_gap(&self) -> f64 {
        self.gaps.iter().map(|g| g.length).sum()
    }

    /// Gaps sorted bottom to top.
    pub fn sorted_gaps(&self) -> Vec<Gap> {
        let mut g = self.gaps.clone();
        g.sort_by(|a, b| a.position.total_cmp(&b.position));
        g
    }

    /// Lengths of the centre-leg core pieces between gaps, bottom to top
    /// (one more entry than there are gaps).
    pub fn center_leg_segments(&self) -> Vec<f64> {
        let half = 0.5 * self.window_height;
        let mut z = -half;
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        for g in self.sorted_gaps() {
            let (lo, hi) = g.z_range();
            out.push((lo - z).max(0.0));
            z = hi;
        }
        out.push((half - z).max(0.0));
        out
    }

    fn check(&self, out: &mut Vec<Violation>) {
        positive(out, "core.center_leg_radius", self.center_leg_radius);
        positive(out, "core.window_width", self.window_width);
        positive(out, "core.window_height", self.window_height);
        positive(out, "core.outer_leg_area", self.outer_leg_area);
        positive(out, "core.yoke_thickness", self.yoke_thickness);
        positive(out, "core.effective_area", self.effective_area);
        for (i, l) in self.return_path_lengths.iter().enumerate() {
            if !(*l > 0.0) || !l.is_finite() {
                out.push(Violation::new(format!("core.return_path[{i}]"), format!("must be > 0, got {l}")));
            }
        }
        if !(self.relative_permeability > 1.0) || !self.relative_permeability.is_finite() {
            out.push(Violation::new(
                "core.relative_permeability",
                format!("must be > 1, got {}", self.relative_permeability),
            ));
        }
        let half = 0.5 * self.window_height;
        for (i, g) in self.gaps.iter().enumerate() {
            let field = format!("core.gaps[{i}]");
            if !(g.length > 0.0) || !g.length.is_finite() || !g.position.is_finite() {
                out.push(Violation::new(field, format!("gap length must be > 0, got {}", g.length)));
                continue;
            }
            let (lo, hi) = g.z_range();
            if lo < -half - GEOM_TOL * half || hi > half + GEOM_TOL * half {
                out.push(Violation::new(
                    field,
                    format!("gap [{lo:.6e}, {hi:.6e}] m lies outside the window height ±{half:.6e} m"),
                ));
            }
        }
        let sorted = self.sorted_gaps();
        for w in sorted.windows(2) {
            if w[0].z_range().1 > w[1].z_range().0 + GEOM_TOL * self.window_height {
                let i = self.gaps.iter().position(|g| g == &w[1]).unwrap_or(0);
                out.push(Violation::new(
                    format!("core.gaps[{i}]"),
                    format!("overlaps the gap centred at {:.6e} m", w[0].position),
                ));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clearances {
    /// Coil-to-centre-leg radial clearance `D_left` [m].
    pub left: f64,
    /// Coil-to-outer-leg radial clearance `D_right` [m].
    pub right: f64,
}

/// How the fringing flux around each centre-leg gap is modelled in the
/// reluctance network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FringingKind {
    /// Circular-arc paths around the outer edge of the gap, out to radius
    /// `radius_factor * g`.
    Arc,
    /// Arc paths counted on both gap faces (planar two-sided picture).
    ArcTwoSided,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringingModel {
    pub kind: FringingKind,
    /// Outer arc radius as a multiple of the gap length.
    pub radius_factor: f64,
}

impl Default for FringingModel {
    fn default() -> Self {
        Self {
            kind: FringingKind::Arc,
            radius_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductorDesign {
    pub coil: CoilSpec,
    pub core: CoreSpec,
    pub clearances: Clearances,
    /// Series lead resistance `R_L` of the electrical circuit. `None` means
    /// "use the computed DC resistance".
    pub lead_resistance: Option<f64>,
    pub fringing: FringingModel,
}

/// Quantities every module derives from a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedDims {
    /// `h_w = N t_w + (N-1) s`.
    pub coil_height: f64,
    /// `R_av = r_w + D_w / 2`.
    pub average_radius: f64,
    pub coil_outer_radius: f64,
    /// Fraction of the window width taken by the conductor.
    pub radial_fill: f64,
    /// Fraction of the window height taken by the coil stack.
    pub axial_fill: f64,
    /// Fraction of the window area that is copper.
    pub copper_fill: f64,
}

pub fn derived_dims(design: &InductorDesign) -> DerivedDims {
    let c = &design.coil;
    let h = c.height();
    let window_area = design.core.window_width * design.core.window_height;
    DerivedDims {
        coil_height: h,
        average_radius: c.average_radius(),
        coil_outer_radius: c.outer_radius(),
        radial_fill: c.radial_depth / design.core.window_width,
        axial_fill: h / design.core.window_height,
        copper_fill: f64::from(c.turns) * c.thickness * c.radial_depth / window_area,
    }
}

impl InductorDesign {
    pub fn derived(&self) -> DerivedDims {
        derived_dims(self)
    }

    /// Every violated invariant; empty iff the design is valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.coil.check(&mut out);
        self.core.check(&mut out);

        let cl = &self.clearances;
        for (name, v) in [("clearances.left", cl.left), ("clearances.right", cl.right)] {
            if !(v >= 0.0) || !v.is_finite() {
                out.push(Violation::new(name, format!("must be >= 0, got {v}")));
            }
        }
        if let Some(r) = self.lead_resistance {
            if !(r >= 0.0) || !r.is_finite() {
                out.push(Violation::new("winding.lead_resistance", format!("must be >= 0, got {r}")));
            }
        }
        if !(self.fringing.radius_factor > 0.0) || !self.fringing.radius_factor.is_finite() {
            out.push(Violation::new(
                "fringing.radius_factor",
                format!("must be > 0, got {}", self.fringing.radius_factor),
            ));
        }
        if !out.is_empty() {
            // cross-field checks only make sense on individually valid fields
            return out;
        }

        let w = self.core.window_width;
        let sum = cl.left + self.coil.radial_depth + cl.right;
        if (sum - w).abs() > 1e-6 * w {
            out.push(Violation::new(
                "clearances",
                format!("left + radial_depth + right = {sum:.6e} m must equal the window width {w:.6e} m"),
            ));
        }
        let min_rw = self.core.center_leg_radius + cl.left;
        if self.coil.inner_radius < min_rw * (1.0 - 1e-6) {
            out.push(Violation::new(
                "coil.inner_radius",
                format!(
                    "{:.6e} m is inside centre-leg radius + left clearance = {min_rw:.6e} m",
                    self.coil.inner_radius
                ),
            ));
        }
        let outer_limit = self.core.outer_leg_inner_radius() - cl.right;
        if self.coil.outer_radius() > outer_limit * (1.0 + 1e-6) {
            out.push(Violation::new(
                "coil.radial_depth",
                format!(
                    "coil outer radius {:.6e} m exceeds outer-leg radius - right clearance = {outer_limit:.6e} m",
                    self.coil.outer_radius()
                ),
            ));
        }
        let h = self.coil.height();
        if h > self.core.window_height * (1.0 + GEOM_TOL) {
            out.push(Violation::new(
                "coil.turns",
                format!("coil height {h:.6e} m exceeds window height {:.6e} m", self.core.window_height),
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// `R_L`: the configured lead resistance or the planar-model DC resistance.
    pub fn lead_resistance(&self) -> f64 {
        self.lead_resistance
            .unwrap_or_else(|| crate::dcr::planar_closed_form(&self.coil))
    }
}

/// Copper conductivity at `temp_c` using a linear resistivity coefficient
/// referenced to 20 °C.
pub fn copper_conductivity_at(temp_c: f64) -> f64 {
    COPPER_CONDUCTIVITY / (1.0 + COPPER_TEMP_COEFF * (temp_c - 20.0))
}

fn positive(out: &mut Vec<Violation>, field: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        out.push(Violation::new(field, format!("must be > 0, got {v}")));
    }
}
