//! DC resistance of a helical flat-wire coil.
//!
//! The conductor is treated as a stack of radial strips `t_w dr`, each with
//! its own path length `l(r)`; the conductances add:
//!
//! ```text
//! G = ∫_{r_w}^{r_w+D_w} σ t_w dr / l(r)
//! ```
//!
//! Three length models give three closed forms. [`dcr_quadrature`] evaluates
//! the same integral numerically and serves as the independent check.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::CoilSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthModel {
    /// `l(r) = 2πN sqrt(r² + (h_w / 2πN)²)`.
    Helical,
    /// `l(r) = 2πN r`.
    Planar,
    /// `l(r) = 2πN R_av`.
    Average,
}

impl LengthModel {
    pub const ALL: [LengthModel; 3] = [LengthModel::Helical, LengthModel::Planar, LengthModel::Average];

    pub fn name(self) -> &'static str {
        match self {
            LengthModel::Helical => "helical",
            LengthModel::Planar => "planar",
            LengthModel::Average => "average",
        }
    }

    /// Path length of a strip at radius `r`.
    pub fn length_at(self, coil: &CoilSpec, r: f64) -> f64 {
        let n = f64::from(coil.turns);
        match self {
            LengthModel::Helical => {
                let p = pitch_radius(coil);
                2.0 * PI * n * r.hypot(p)
            }
            LengthModel::Planar => 2.0 * PI * n * r,
            LengthModel::Average => 2.0 * PI * n * coil.average_radius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcrModel {
    Closed(LengthModel),
    Quadrature(LengthModel),
}

impl DcrModel {
    pub fn tag(&self) -> String {
        match self {
            DcrModel::Closed(m) => m.name().to_string(),
            DcrModel::Quadrature(m) => format!("quadrature-{}", m.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcrResult {
    /// [Ω]
    pub resistance: f64,
    pub model: DcrModel,
    /// Conductor length at the mean radius [m].
    pub coil_length: f64,
}

/// `h_w / 2πN`: the axial advance per radian of the helix.
fn pitch_radius(coil: &CoilSpec) -> f64 {
    coil.height() / (2.0 * PI * f64::from(coil.turns))
}

fn check_coil(coil: &CoilSpec) -> Result<()> {
    if !(coil.radial_depth > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "radial depth D_w = {} gives a zero-width conductance integral",
            coil.radial_depth
        )));
    }
    if !(coil.inner_radius > 0.0 && coil.thickness > 0.0 && coil.conductivity > 0.0) || coil.turns == 0 {
        return Err(Error::InvalidArgument(
            "coil needs positive inner radius, thickness, conductivity and at least one turn".into(),
        ));
    }
    Ok(())
}

fn result(coil: &CoilSpec, resistance: f64, model: DcrModel, length_model: LengthModel) -> DcrResult {
    DcrResult {
        resistance,
        model,
        coil_length: length_model.length_at(coil, coil.average_radius()),
    }
}

/// Exact helix-length closed form.
pub fn dcr_helical(coil: &CoilSpec) -> Result<DcrResult> {
    check_coil(coil)?;
    let n = f64::from(coil.turns);
    let p = pitch_radius(coil);
    let ri = coil.inner_radius;
    let ro = coil.outer_radius();
    // asinh(ro/p) - asinh(ri/p), written without cancellation for p → 0
    let log_ratio = ((ro + ro.hypot(p)) / (ri + ri.hypot(p))).ln();
    let r = 2.0 * PI * n / (coil.conductivity * coil.thickness * log_ratio);
    Ok(result(coil, r, DcrModel::Closed(LengthModel::Helical), LengthModel::Helical))
}

/// Discrete circular turns: `R = 2πN / (σ t_w ln((r_w + D_w)/r_w))`.
pub fn dcr_planar(coil: &CoilSpec) -> Result<DcrResult> {
    check_coil(coil)?;
    Ok(result(
        coil,
        planar_closed_form(coil),
        DcrModel::Closed(LengthModel::Planar),
        LengthModel::Planar,
    ))
}

pub(crate) fn planar_closed_form(coil: &CoilSpec) -> f64 {
    let n = f64::from(coil.turns);
    2.0 * PI * n / (coil.conductivity * coil.thickness * (coil.radial_depth / coil.inner_radius).ln_1p())
}

/// Average-radius estimate: `R = 2πN R_av / (σ t_w D_w)`.
pub fn dcr_average(coil: &CoilSpec) -> Result<DcrResult> {
    check_coil(coil)?;
    let n = f64::from(coil.turns);
    let r = 2.0 * PI * n * coil.average_radius() / (coil.conductivity * coil.thickness * coil.radial_depth);
    Ok(result(coil, r, DcrModel::Closed(LengthModel::Average), LengthModel::Average))
}

pub fn dcr_closed(coil: &CoilSpec, model: LengthModel) -> Result<DcrResult> {
    match model {
        LengthModel::Helical => dcr_helical(coil),
        LengthModel::Planar => dcr_planar(coil),
        LengthModel::Average => dcr_average(coil),
    }
}

/// Relative tolerance of the adaptive conductance quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-10;

/// Numerical evaluation of the conductance integral for a given length model.
pub fn dcr_quadrature(coil: &CoilSpec, model: LengthModel) -> Result<DcrResult> {
    check_coil(coil)?;
    let sigma_t = coil.conductivity * coil.thickness;
    let g = integrate(
        |r| sigma_t / model.length_at(coil, r),
        coil.inner_radius,
        coil.outer_radius(),
        QUADRATURE_RTOL,
    )?;
    Ok(result(coil, 1.0 / g, DcrModel::Quadrature(model), model))
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod quadrature to relative tolerance `rtol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> Result<f64> {
    let (v, e) = gk15(&f, a, b);
    let mut segments = vec![(a, b, v, e)];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= rtol * total.abs() || err < f64::MIN_POSITIVE {
            return Ok(total);
        }
        let (i, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = segments.swap_remove(i);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        segments.push((a, m, v1, e1));
        segments.push((m, b, v2, e2));
    }
    Err(Error::Numerical("adaptive quadrature did not converge".into()))
}
