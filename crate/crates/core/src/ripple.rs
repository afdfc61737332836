//! Ripple current spectrum of a half-bridge inductor at 50 % duty and the
//! resulting AC conduction loss.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Operating point of the converter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterPoint {
    /// Output voltage, equal to the inductor voltage amplitude [V].
    pub output_voltage: f64,
    /// [Hz]
    pub switching_frequency: f64,
    pub duty: f64,
    /// Inductance at the switching frequency [H].
    pub inductance: f64,
    /// Parasitic winding capacitance [F].
    pub parasitic_capacitance: Option<f64>,
}

impl ConverterPoint {
    pub fn new(output_voltage: f64, switching_frequency: f64, inductance: f64) -> Self {
        Self {
            output_voltage,
            switching_frequency,
            duty: 0.5,
            inductance,
            parasitic_capacitance: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("output voltage", self.output_voltage),
            ("switching frequency", self.switching_frequency),
            ("inductance", self.inductance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.duty != 0.5 {
            return Err(Error::InvalidArgument(format!(
                "the harmonic model holds at 50 % duty only, got duty {}",
                self.duty
            )));
        }
        if let Some(c) = self.parasitic_capacitance {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!("parasitic capacitance must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    pub fn ripple_pp(&self) -> f64 {
        ripple_pp(self.output_voltage, self.inductance, self.switching_frequency)
    }

    pub fn resonant_frequency(&self) -> Option<f64> {
        self.parasitic_capacitance.map(|c| resonant_frequency(self.inductance, c))
    }
}

/// `1 / (2π √(L C))` [Hz].
pub fn resonant_frequency(inductance: f64, capacitance: f64) -> f64 {
    1.0 / (2.0 * PI * (inductance * capacitance).sqrt())
}

/// Inductance from a measured peak-to-peak ripple at 50 % duty [H].
pub fn inductance_from_ripple(output_voltage: f64, ripple_pp: f64, switching_frequency: f64) -> f64 {
    output_voltage / (2.0 * ripple_pp * switching_frequency)
}

/// Peak-to-peak ripple current at 50 % duty [A].
pub fn ripple_pp(output_voltage: f64, inductance: f64, switching_frequency: f64) -> f64 {
    output_voltage / (2.0 * inductance * switching_frequency)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub order: u32,
    /// Peak amplitude [A].
    pub amplitude: f64,
    /// Set when the harmonic lies at or above the first resonance.
    pub beyond_resonance: bool,
}

/// Peak amplitude of harmonic `order` of the triangular ripple; zero for even orders.
pub fn harmonic_current(order: u32, point: &ConverterPoint) -> Result<Harmonic> {
    point.check()?;
    if order == 0 {
        return Err(Error::InvalidArgument("harmonic order starts at 1".into()));
    }
    let h = f64::from(order);
    let amplitude = if order.is_multiple_of(2) {
        0.0
    } else {
        2.0 * point.output_voltage / ((PI * h).powi(2) * point.inductance * point.switching_frequency)
    };
    let beyond_resonance = point
        .resonant_frequency()
        .is_some_and(|fr| h * point.switching_frequency >= fr);
    Ok(Harmonic {
        order,
        amplitude,
        beyond_resonance,
    })
}

/// Winding resistance as a function of frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum ResistanceModel {
    /// `R(f) = R(f_s) √(f / f_s)`.
    SqrtFrequency { at_switching: f64 },
    Flat(f64),
    /// Linear interpolation of `(frequency, resistance)` pairs; no extrapolation.
    Tabulated(Vec<(f64, f64)>),
}

impl ResistanceModel {
    pub fn eval(&self, f: f64, switching_frequency: f64) -> Result<f64> {
        match self {
            Self::SqrtFrequency { at_switching } => Ok(at_switching * (f / switching_frequency).sqrt()),
            Self::Flat(r) => Ok(*r),
            Self::Tabulated(t) => {
                let (lo, hi) = match (t.first(), t.last()) {
                    (Some(a), Some(b)) => (a.0, b.0),
                    _ => return Err(Error::InvalidArgument("empty resistance table".into())),
                };
                if f < lo || f > hi {
                    return Err(Error::OutOfRange {
                        quantity: "frequency",
                        at: f,
                        min: lo,
                        max: hi,
                    });
                }
                let k = t.partition_point(|p| p.0 < f);
                if k == 0 {
                    return Ok(t[0].1);
                }
                let (a, b) = (t[k - 1], t[k]);
                Ok(a.1 + (b.1 - a.1) * (f - a.0) / (b.0 - a.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub harmonic: Harmonic,
    /// [Hz]
    pub frequency: f64,
    /// [Ω]
    pub resistance: f64,
    /// `½ R I_h²` [W]
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSpectrum {
    pub lines: Vec<SpectrumLine>,
    /// [W]
    pub total: f64,
}

/// AC conduction loss summed over odd harmonics up to `max_order`.
pub fn ac_loss_spectrum(point: &ConverterPoint, resistance: &ResistanceModel, max_order: u32) -> Result<LossSpectrum> {
    point.check()?;
    if max_order == 0 {
        return Err(Error::InvalidArgument("highest harmonic must be >= 1".into()));
    }
    if let ResistanceModel::Tabulated(t) = resistance {
        if t.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("resistance table frequencies must increase".into()));
        }
    }
    let mut lines = Vec::new();
    for order in (1..=max_order).step_by(2) {
        let harmonic = harmonic_current(order, point)?;
        let frequency = f64::from(order) * point.switching_frequency;
        let r = resistance.eval(frequency, point.switching_frequency)?;
        lines.push(SpectrumLine {
            harmonic,
            frequency,
            resistance: r,
            loss: 0.5 * r * harmonic.amplitude.powi(2),
        });
    }
    let total = lines.iter().map(|l| l.loss).sum();
    Ok(LossSpectrum { lines, total })
}

/// `∑_{odd h ≤ max_order} h^(-3.5)`, the weight of the √f rule.
pub fn sqrt_rule_coefficient(max_order: u32) -> f64 {
    (1..=max_order).step_by(2).map(|h| f64::from(h).powf(-3.5)).sum()
}

/// Closed forms of the √f-rule loss through the 25th harmonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedLoss {
    /// `c · 2 R V² / (π⁴ L² f²)` [W]
    pub from_voltage: f64,
    /// `c · 8 R I_pp² / π⁴` [W]
    pub from_ripple: f64,
}

pub fn ac_loss_simplified(point: &ConverterPoint, resistance_at_switching: f64) -> Result<SimplifiedLoss> {
    point.check()?;
    let c = sqrt_rule_coefficient(25);
    let pi4 = PI.powi(4);
    let (v, l, f) = (point.output_voltage, point.inductance, point.switching_frequency);
    Ok(SimplifiedLoss {
        from_voltage: c * 2.0 * resistance_at_switching * v * v / (pi4 * l * l * f * f),
        from_ripple: c * 8.0 * resistance_at_switching * point.ripple_pp().powi(2) / pi4,
    })
}

/// `c · 8 R I_pp² / π⁴` from a known ripple [W].
pub fn ac_loss_from_ripple(ripple_pp: f64, resistance_at_switching: f64) -> f64 {
    sqrt_rule_coefficient(25) * 8.0 * resistance_at_switching * ripple_pp * ripple_pp / PI.powi(4)
}

/// Ripple current rebuilt from its harmonics at phase `t f_s` (cycles).
pub fn reconstruct(point: &ConverterPoint, max_order: u32, cycles: f64) -> Result<f64> {
    let mut i = 0.0;
    for order in (1..=max_order).step_by(2) {
        let a = harmonic_current(order, point)?.amplitude;
        // all odd cosines in phase: the peak sits at t = 0
        i += a * (2.0 * PI * f64::from(order) * cycles).cos();
    }
    Ok(i)
}
