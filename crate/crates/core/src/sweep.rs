//! One-parameter design sweeps with field solves per point.

use serde::{Deserialize, Serialize};

use crate::dcr::dcr_planar;
use crate::error::{Error, Result};
use crate::femq::ResolutionPolicy;
use crate::model::{Gap, InductorDesign};
use crate::post::frequency_response;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Clearance between centre leg and winding [m].
    LeftClearance,
    /// Clearance between winding and outer leg [m].
    RightClearance,
    /// Axial conductor thickness [m].
    Thickness,
    /// Axial turn-to-turn spacing [m].
    Spacing,
    /// Number of equal gaps sharing the original total gap length.
    GapCount,
    /// Excitation frequency [Hz].
    Frequency,
}

impl SweepParameter {
    pub fn column(self) -> &'static str {
        match self {
            Self::LeftClearance => "left_clearance_mm",
            Self::RightClearance => "right_clearance_mm",
            Self::Thickness => "thickness_mm",
            Self::Spacing => "spacing_mm",
            Self::GapCount => "gap_count",
            Self::Frequency => "frequency_hz",
        }
    }

    /// Factor from SI to the unit of [`Self::column`].
    pub fn display_scale(self) -> f64 {
        match self {
            Self::GapCount | Self::Frequency => 1.0,
            _ => 1e3,
        }
    }

    /// The closure that keeps the window filled when none is given.
    pub fn default_closure(self) -> Closure {
        match self {
            Self::LeftClearance | Self::RightClearance => Closure::RadialDepth,
            Self::Thickness => Closure::Spacing,
            Self::Spacing => Closure::Thickness,
            Self::GapCount | Self::Frequency => Closure::None,
        }
    }
}

/// Which dimension gives way when the swept one changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// Radial depth absorbs clearance changes; the window width stays filled.
    RadialDepth,
    /// Turn spacing absorbs thickness changes; the coil height is kept.
    Spacing,
    /// Thickness absorbs spacing changes; the coil height is kept.
    Thickness,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub closure: Closure,
    /// Frequency of the AC solve, unless the frequency itself is swept [Hz].
    pub frequency: f64,
    /// [A]
    pub dc_current: f64,
    /// Peak AC current [A].
    pub ac_current: f64,
    pub policy: ResolutionPolicy,
}

impl SweepSpec {
    /// Sweep at 100 kHz with 15 A DC and 5 A peak AC.
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Self {
        Self {
            parameter,
            values,
            closure: parameter.default_closure(),
            frequency: 1e5,
            dc_current: 15.0,
            ac_current: 5.0,
            policy: ResolutionPolicy::default(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one value".into()));
        }
        let inc = self.values.windows(2).all(|w| w[1] > w[0]);
        let dec = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::InvalidArgument("sweep values must be strictly monotone".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sweep values must be finite".into()));
        }
        if !(self.frequency >= 0.0) || !(self.ac_current > 0.0) || !(self.dc_current >= 0.0) {
            return Err(Error::InvalidArgument("sweep needs frequency >= 0, AC current > 0, DC current >= 0".into()));
        }
        Ok(())
    }
}

/// Design at one sweep point, or the reason it is not realisable.
pub fn apply(base: &InductorDesign, parameter: SweepParameter, value: f64, closure: Closure) -> Result<InductorDesign> {
    let mut d = base.clone();
    let n = f64::from(d.coil.turns);
    match parameter {
        SweepParameter::LeftClearance | SweepParameter::RightClearance => {
            let old = if parameter == SweepParameter::LeftClearance {
                d.clearances.left
            } else {
                d.clearances.right
            };
            let delta = value - old;
            if parameter == SweepParameter::LeftClearance {
                d.clearances.left = value;
                d.coil.inner_radius += delta;
            } else {
                d.clearances.right = value;
            }
            match closure {
                Closure::RadialDepth => d.coil.radial_depth -= delta,
                Closure::None => {}
                c => return Err(Error::InvalidArgument(format!("closure {c:?} does not apply to clearance sweeps"))),
            }
        }
        SweepParameter::Thickness => {
            let h = d.coil.height();
            d.coil.thickness = value;
            match closure {
                Closure::Spacing if d.coil.turns > 1 => d.coil.spacing = (h - n * value) / (n - 1.0),
                Closure::Spacing | Closure::None => {}
                c => return Err(Error::InvalidArgument(format!("closure {c:?} does not apply to thickness sweeps"))),
            }
        }
        SweepParameter::Spacing => {
            let h = d.coil.height();
            d.coil.spacing = value;
            match closure {
                Closure::Thickness => d.coil.thickness = (h - (n - 1.0) * value) / n,
                Closure::None => {}
                c => return Err(Error::InvalidArgument(format!("closure {c:?} does not apply to spacing sweeps"))),
            }
        }
        SweepParameter::GapCount => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::InvalidArgument(format!("gap count must be a positive integer, got {value}")));
            }
            let count = value as usize;
            let each = d.core.total_gap() / value;
            let pitch = d.core.window_height / value;
            d.core.gaps = (0..count)
                .map(|k| Gap {
                    position: (k as f64 - 0.5 * (value - 1.0)) * pitch,
                    length: each,
                })
                .collect();
        }
        SweepParameter::Frequency => {}
    }
    d.validate()?;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// [Hz]
    pub frequency: f64,
    /// [Ω]
    pub dc_resistance: f64,
    /// [Ω]
    pub ac_resistance: f64,
    /// `I_dc² R_dc` [W]
    pub dc_loss: f64,
    /// `½ R_ac I_ac²` [W]
    pub ac_loss: f64,
    /// Induced-current part of the AC loss [W]
    pub eddy_loss: f64,
    /// [H]
    pub l0: f64,
    /// [H]
    pub inductance_abs: f64,
}

pub type SweepOutcome = std::result::Result<SweepRow, String>;

fn run_point(base: &InductorDesign, spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let d = apply(base, spec.parameter, value, spec.closure)?;
    let f = if spec.parameter == SweepParameter::Frequency {
        value
    } else {
        spec.frequency
    };
    if !(f >= 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be >= 0, got {f}")));
    }
    let rdc = dcr_planar(&d.coil)?.resistance;
    let fr = frequency_response(&d, &[f], spec.ac_current, &spec.policy)?;
    let p = &fr.points[0];
    Ok(SweepRow {
        value,
        frequency: f,
        dc_resistance: rdc,
        ac_resistance: p.resistance,
        dc_loss: spec.dc_current * spec.dc_current * rdc,
        ac_loss: p.loss_total,
        eddy_loss: p.loss_eddy,
        l0: fr.l0,
        inductance_abs: p.inductance.norm(),
    })
}

/// Evaluate every sweep point. A point that fails becomes an `Err` row; the
/// other rows are unaffected and keep the order of `spec.values`.
pub fn run_sweep(base: &InductorDesign, spec: &SweepSpec) -> Result<Vec<SweepOutcome>> {
    spec.check()?;
    let one = |v: &f64| run_point(base, spec, *v).map_err(|e| e.to_string());
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(spec.values.par_iter().map(one).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(spec.values.iter().map(one).collect())
    }
}
