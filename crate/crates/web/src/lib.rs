//! WebAssembly bindings for the static demo page in `www/`.

use std::sync::Arc;

use flatwire::config::prototype;
use flatwire::dcr::{dcr_closed, LengthModel};
use flatwire::femq::{build_mesh, solve_field, FieldProblem, Region, ResolutionPolicy};
use flatwire::post::{ac_resistance, inductance, loss_map};
use flatwire::ripple::{ac_loss_spectrum, ConverterPoint, ResistanceModel};
use flatwire::sweep::{apply, Closure, SweepParameter};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn js(e: flatwire::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Planar, helical and average-length DC resistance [mΩ] of the prototype
/// coil with the given turns and conductor section.
pub fn dcr_models_native(turns: u32, inner_radius_mm: f64, radial_depth_mm: f64, thickness_mm: f64) -> flatwire::Result<Vec<f64>> {
    let mut coil = prototype().coil;
    coil.turns = turns;
    coil.inner_radius = inner_radius_mm * 1e-3;
    coil.radial_depth = radial_depth_mm * 1e-3;
    coil.thickness = thickness_mm * 1e-3;
    [LengthModel::Planar, LengthModel::Helical, LengthModel::Average]
        .into_iter()
        .map(|m| dcr_closed(&coil, m).map(|r| r.resistance * 1e3))
        .collect()
}

#[wasm_bindgen]
pub fn dcr_models(turns: u32, inner_radius_mm: f64, radial_depth_mm: f64, thickness_mm: f64) -> Result<Vec<f64>, JsError> {
    dcr_models_native(turns, inner_radius_mm, radial_depth_mm, thickness_mm).map_err(js)
}

/// Odd-harmonic spectrum flattened as `[order, peak amplitude A, loss W, past resonance 0|1]`
/// per line. A capacitance of zero disables the resonance flag.
pub fn ripple_spectrum_native(
    output_voltage: f64,
    switching_khz: f64,
    inductance_uh: f64,
    rac_mohm: f64,
    max_order: u32,
    capacitance_pf: f64,
) -> flatwire::Result<Vec<f64>> {
    let mut p = ConverterPoint::new(output_voltage, switching_khz * 1e3, inductance_uh * 1e-6);
    if capacitance_pf > 0.0 {
        p.parasitic_capacitance = Some(capacitance_pf * 1e-12);
    }
    let model = ResistanceModel::SqrtFrequency { at_switching: rac_mohm * 1e-3 };
    let s = ac_loss_spectrum(&p, &model, max_order)?;
    Ok(s.lines
        .iter()
        .flat_map(|l| {
            [
                f64::from(l.harmonic.order),
                l.harmonic.amplitude,
                l.loss,
                f64::from(u8::from(l.harmonic.beyond_resonance)),
            ]
        })
        .collect())
}

#[wasm_bindgen]
pub fn ripple_spectrum(
    output_voltage: f64,
    switching_khz: f64,
    inductance_uh: f64,
    rac_mohm: f64,
    max_order: u32,
    capacitance_pf: f64,
) -> Result<Vec<f64>, JsError> {
    ripple_spectrum_native(output_voltage, switching_khz, inductance_uh, rac_mohm, max_order, capacitance_pf).map_err(js)
}

/// Loss density of one coarse field solve on the tensor grid.
#[wasm_bindgen]
pub struct FieldMap {
    r: Vec<f64>,
    z: Vec<f64>,
    regions: Vec<u8>,
    density: Vec<f64>,
    resistance: f64,
    inductance: f64,
    view: [f64; 4],
}

#[wasm_bindgen]
impl FieldMap {
    /// Radial grid lines [mm].
    pub fn r_mm(&self) -> Vec<f64> {
        self.r.clone()
    }

    /// Axial grid lines [mm].
    pub fn z_mm(&self) -> Vec<f64> {
        self.z.clone()
    }

    /// Per cell, row-major in z: 0 air, 1 core, 2 conductor.
    pub fn regions(&self) -> Vec<u8> {
        self.regions.clone()
    }

    /// Per cell loss density [W/m³] at 1 A peak; zero outside conductors.
    pub fn loss_density(&self) -> Vec<f64> {
        self.density.clone()
    }

    /// [mΩ]
    pub fn ac_resistance_mohm(&self) -> f64 {
        self.resistance * 1e3
    }

    /// [µH]
    pub fn inductance_uh(&self) -> f64 {
        self.inductance * 1e6
    }

    /// Extent of core and winding as `[r0, r1, z0, z1]` [mm].
    pub fn view_mm(&self) -> Vec<f64> {
        self.view.to_vec()
    }
}

/// Field solve of the prototype at `frequency_khz` with the left clearance
/// moved to `left_clearance_mm` (the radial depth absorbs the change). The
/// mesh uses one cell per skin depth so it solves in about a second.
pub fn field_map_native(frequency_khz: f64, left_clearance_mm: f64) -> flatwire::Result<FieldMap> {
    let d = apply(&prototype(), SweepParameter::LeftClearance, left_clearance_mm * 1e-3, Closure::RadialDepth)?;
    let f = frequency_khz * 1e3;
    let mut policy = ResolutionPolicy::for_frequency(f);
    policy.cells_per_skin_depth = 1.0;
    let grid = Arc::new(build_mesh(&d, &policy)?);
    let sol = solve_field(&FieldProblem::new(grid.clone(), 2.0 * std::f64::consts::PI * f, Complex64::new(1.0, 0.0)))?;
    let (nr, nz) = (grid.nr() - 1, grid.nz() - 1);
    let mut regions = vec![0u8; nr * nz];
    let mut view = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for j in 0..nz {
        for i in 0..nr {
            let code = match grid.material(i, j).region {
                Region::Air => 0,
                Region::Core => 1,
                Region::Conductor { .. } | Region::Passive => 2,
            };
            regions[grid.cell(i, j)] = code;
            if code != 0 {
                view = [view[0].min(grid.r[i]), view[1].max(grid.r[i + 1]), view[2].min(grid.z[j]), view[3].max(grid.z[j + 1])];
            }
        }
    }
    let mut density = vec![0.0; nr * nz];
    for c in loss_map(&sol).cells {
        density[c.cell] = c.density;
    }
    Ok(FieldMap {
        r: grid.r.iter().map(|r| r * 1e3).collect(),
        z: grid.z.iter().map(|z| z * 1e3).collect(),
        regions,
        density,
        resistance: ac_resistance(&sol)?,
        inductance: inductance(&sol)?.norm(),
        view: view.map(|v| v * 1e3),
    })
}

#[wasm_bindgen]
pub fn field_map(frequency_khz: f64, left_clearance_mm: f64) -> Result<FieldMap, JsError> {
    field_map_native(frequency_khz, left_clearance_mm).map_err(js)
}
