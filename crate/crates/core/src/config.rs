//! TOML loading and saving of [`InductorDesign`]s.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    Clearances, CoilSpec, CoreSpec, FringingKind, FringingModel, Gap, InductorDesign,
    COPPER_CONDUCTIVITY, DEFAULT_MU_R,
};

/// The annotated prototype configuration, doubling as the schema reference.
pub const PROTOTYPE_TOML: &str = include_str!("../../../configs/prototype.toml");

const SCHEMA_HEADER: &str = "\
# Inductor design schema
#
# [coil]
#   turns          integer >= 1                     (required)
#   inner_radius   length > 0, r_w                  (required)
#   radial_depth   length > 0, D_w                  (required)
#   thickness      length > 0, t_w (axial)          (required)
#   spacing        length >= 0, s (axial)           (required)
#   conductivity   S/m > 0                          (default 5.8e7, copper)
# [core]
#   name                  string                    (default \"\")
#   center_leg_radius     length > 0                (required)
#   window_width          length > 0                (required)
#   window_height         length > 0                (required)
#   outer_leg_area        area > 0                  (required)
#   yoke_thickness        length > 0                (required)
#   effective_area        area > 0, A_e             (required)
#   return_path           [length > 0, ...]         (default [])
#   relative_permeability number > 1                (default 3000)
#   gaps                  [{ position, length }]    (default [], position from window mid-plane)
# [clearances]
#   left   length >= 0, D_left                      (required)
#   right  length >= 0, D_right                     (required)
#   left + radial_depth + right must equal window_width
# [winding]
#   lead_resistance  ohm >= 0                       (default: computed DC resistance)
# [fringing]
#   model          arc | arc-two-sided | none       (default arc)
#   radius_factor  number > 0                       (default 1.0)
#
# Lengths: number in metres, or string \"<value> mm|um|m\".
# Areas:   number in m², or string \"<value> mm2|m2\".
#
# Example:
";

/// Annotated schema text printed by the `schema` subcommand.
pub fn schema() -> String {
    format!("{SCHEMA_HEADER}\n{PROTOTYPE_TOML}")
}

/// The built-in prototype design.
pub fn prototype() -> InductorDesign {
    load_design(PROTOTYPE_TOML).expect("bundled prototype config is valid")
}

/// Parse a config document and validate the resulting design.
pub fn load_design(text: &str) -> Result<InductorDesign> {
    let design = parse_design(text)?;
    design.validate()?;
    Ok(design)
}

/// Parse without validating invariants.
pub fn parse_design(text: &str) -> Result<InductorDesign> {
    let de = toml::Deserializer::parse(text).map_err(|e| parse_error(text, None, &e))?;
    let raw: RawDesign = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = (path != "." && !path.is_empty()).then_some(path);
        parse_error(text, field, e.inner())
    })?;
    Ok(raw.into_design())
}

/// Serialise a design with all values in SI units; reloading yields an equal design.
pub fn to_toml(design: &InductorDesign) -> String {
    let raw = RawDesign::from_design(design);
    toml::to_string(&raw).expect("design serialises to TOML")
}

fn parse_error(text: &str, field: Option<String>, e: &toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        line,
        field,
        message: e.message().to_string(),
    }
}

/// Parse a length such as `"0.58 mm"`, `"9e-3 m"` or `"120 um"` into metres.
pub fn parse_length(s: &str) -> std::result::Result<f64, String> {
    parse_with_units(s, &[("mm", 1e-3), ("um", 1e-6), ("µm", 1e-6), ("m", 1.0)])
}

/// Parse an area such as `"201 mm2"` into m².
pub fn parse_area(s: &str) -> std::result::Result<f64, String> {
    parse_with_units(
        s,
        &[("mm2", 1e-6), ("mm^2", 1e-6), ("mm²", 1e-6), ("m2", 1.0), ("m^2", 1.0), ("m²", 1.0)],
    )
}

fn parse_with_units(s: &str, units: &[(&str, f64)]) -> std::result::Result<f64, String> {
    let t = s.trim();
    for (suffix, scale) in units {
        if let Some(num) = t.strip_suffix(suffix) {
            let num = num.trim_end();
            // "1mm" must not be read as "1m" + "m"
            if num.ends_with(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
                continue;
            }
            return num
                .parse::<f64>()
                .map(|v| v * scale)
                .map_err(|_| format!("invalid number `{num}` in `{s}`"));
        }
    }
    let allowed: Vec<_> = units.iter().map(|(u, _)| *u).collect();
    Err(format!("`{s}` needs a unit suffix ({})", allowed.join(", ")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Length(f64);

#[derive(Clone, Copy, Debug, PartialEq)]
struct Area(f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Float(f64),
    Int(i64),
    Str(String),
}

fn de_quantity<'de, D: Deserializer<'de>>(
    d: D,
    parse: fn(&str) -> std::result::Result<f64, String>,
) -> std::result::Result<f64, D::Error> {
    match NumOrStr::deserialize(d)? {
        NumOrStr::Float(v) => Ok(v),
        NumOrStr::Int(v) => Ok(v as f64),
        NumOrStr::Str(s) => parse(&s).map_err(de::Error::custom),
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        de_quantity(d, parse_length).map(Length)
    }
}

impl<'de> Deserialize<'de> for Area {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        de_quantity(d, parse_area).map(Area)
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl Serialize for Area {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

fn default_sigma() -> f64 {
    COPPER_CONDUCTIVITY
}
fn default_mu_r() -> f64 {
    DEFAULT_MU_R
}
fn default_radius_factor() -> f64 {
    1.0
}
fn default_fringing_kind() -> FringingKind {
    FringingKind::Arc
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    coil: RawCoil,
    core: RawCore,
    clearances: RawClearances,
    #[serde(default, skip_serializing_if = "RawWinding::is_empty")]
    winding: RawWinding,
    #[serde(default)]
    fringing: RawFringing,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoil {
    turns: u32,
    inner_radius: Length,
    radial_depth: Length,
    thickness: Length,
    spacing: Length,
    #[serde(default = "default_sigma")]
    conductivity: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGap {
    position: Length,
    length: Length,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCore {
    #[serde(default)]
    name: String,
    center_leg_radius: Length,
    window_width: Length,
    window_height: Length,
    outer_leg_area: Area,
    yoke_thickness: Length,
    effective_area: Area,
    #[serde(default)]
    return_path: Vec<Length>,
    #[serde(default = "default_mu_r")]
    relative_permeability: f64,
    #[serde(default)]
    gaps: Vec<RawGap>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClearances {
    left: Length,
    right: Length,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWinding {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lead_resistance: Option<f64>,
}

impl RawWinding {
    fn is_empty(&self) -> bool {
        self.lead_resistance.is_none()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFringing {
    #[serde(default = "default_fringing_kind")]
    model: FringingKind,
    #[serde(default = "default_radius_factor")]
    radius_factor: f64,
}

impl Default for RawFringing {
    fn default() -> Self {
        Self {
            model: default_fringing_kind(),
            radius_factor: default_radius_factor(),
        }
    }
}

impl RawDesign {
    fn into_design(self) -> InductorDesign {
        let c = self.coil;
        let k = self.core;
        InductorDesign {
            coil: CoilSpec {
                inner_radius: c.inner_radius.0,
                radial_depth: c.radial_depth.0,
                thickness: c.thickness.0,
                spacing: c.spacing.0,
                turns: c.turns,
                conductivity: c.conductivity,
            },
            core: CoreSpec {
                name: k.name,
                center_leg_radius: k.center_leg_radius.0,
                window_width: k.window_width.0,
                window_height: k.window_height.0,
                outer_leg_area: k.outer_leg_area.0,
                yoke_thickness: k.yoke_thickness.0,
                effective_area: k.effective_area.0,
                return_path_lengths: k.return_path.into_iter().map(|l| l.0).collect(),
                relative_permeability: k.relative_permeability,
                gaps: k
                    .gaps
                    .into_iter()
                    .map(|g| Gap {
                        position: g.position.0,
                        length: g.length.0,
                    })
                    .collect(),
            },
            clearances: Clearances {
                left: self.clearances.left.0,
                right: self.clearances.right.0,
            },
            lead_resistance: self.winding.lead_resistance,
            fringing: FringingModel {
                kind: self.fringing.model,
                radius_factor: self.fringing.radius_factor,
            },
        }
    }

    fn from_design(d: &InductorDesign) -> Self {
        RawDesign {
            coil: RawCoil {
                turns: d.coil.turns,
                inner_radius: Length(d.coil.inner_radius),
                radial_depth: Length(d.coil.radial_depth),
                thickness: Length(d.coil.thickness),
                spacing: Length(d.coil.spacing),
                conductivity: d.coil.conductivity,
            },
            core: RawCore {
                name: d.core.name.clone(),
                center_leg_radius: Length(d.core.center_leg_radius),
                window_width: Length(d.core.window_width),
                window_height: Length(d.core.window_height),
                outer_leg_area: Area(d.core.outer_leg_area),
                yoke_thickness: Length(d.core.yoke_thickness),
                effective_area: Area(d.core.effective_area),
                return_path: d.core.return_path_lengths.iter().copied().map(Length).collect(),
                relative_permeability: d.core.relative_permeability,
                gaps: d
                    .core
                    .gaps
                    .iter()
                    .map(|g| RawGap {
                        position: Length(g.position),
                        length: Length(g.length),
                    })
                    .collect(),
            },
            clearances: RawClearances {
                left: Length(d.clearances.left),
                right: Length(d.clearances.right),
            },
            winding: RawWinding {
                lead_resistance: d.lead_resistance,
            },
            fringing: RawFringing {
                model: d.fringing.kind,
                radius_factor: d.fringing.radius_factor,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prototype_has_the_built_in_dimensions() {
        let d = prototype();
        assert_eq!(d.coil.turns, 41);
        assert!((d.coil.thickness - 0.58e-3).abs() < 1e-15);
        assert!((d.coil.radial_depth - 8.0e-3).abs() < 1e-15);
        assert!((d.coil.spacing - 0.13e-3).abs() < 1e-15);
        assert!((d.coil.inner_radius - 9.0e-3).abs() < 1e-15);
        assert_eq!(d.core.gaps.len(), 5);
        assert!(d.core.gaps.iter().all(|g| (g.length - 1e-3).abs() < 1e-15));
    }

    #[test]
    fn defaults_apply() {
        let d = prototype();
        assert_eq!(d.coil.conductivity, 5.8e7);
        assert_eq!(d.lead_resistance, None);
        let text = PROTOTYPE_TOML.replace("relative_permeability = 3000\n", "");
        assert_eq!(load_design(&text).unwrap().core.relative_permeability, 3000.0);
    }

    #[test]
    fn zero_turns_names_field() {
        let text = PROTOTYPE_TOML.replace("turns = 41", "turns = 0");
        let err = load_design(&text).unwrap_err();
        let v = err.violations();
        assert!(v.iter().any(|v| v.field == "coil.turns"), "{err}");
    }

    #[test]
    fn parse_error_reports_line_and_field() {
        let text = PROTOTYPE_TOML.replace("\"0.58 mm\"", "\"0.58 furlongs\"");
        let line = text.lines().position(|l| l.contains("furlongs")).unwrap() + 1;
        match parse_design(&text).unwrap_err() {
            Error::Parse { line: l, field, .. } => {
                assert_eq!(l, line);
                assert_eq!(field.as_deref(), Some("coil.thickness"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_design("[coil]\nturns = = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn units() {
        assert_eq!(parse_length("1mm").unwrap(), 1e-3);
        assert_eq!(parse_length(" 2.5 m ").unwrap(), 2.5);
        assert!((parse_length("120 um").unwrap() - 1.2e-4).abs() < 1e-18);
        assert!(parse_length("3").is_err());
        assert!((parse_area("201 mm2").unwrap() - 201e-6).abs() < 1e-18);
        assert!(parse_area("201 mm").is_err());
    }

    #[test]
    fn schema_contains_loadable_example() {
        let s = schema();
        assert!(s.contains("[clearances]"));
        assert!(load_design(&s).is_ok());
    }

    #[test]
    fn round_trip_prototype() {
        let d = prototype();
        let back = load_design(&to_toml(&d)).unwrap();
        assert_eq!(d, back);
    }
}
