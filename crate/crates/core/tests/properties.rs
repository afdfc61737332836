use flatwire::config::{load_design, prototype, to_toml};
use flatwire::dcr::{dcr_average, dcr_closed, dcr_helical, dcr_planar, dcr_quadrature, LengthModel};
use flatwire::mec::{build_network, zero_freq_inductance, QModel};
use flatwire::model::CoilSpec;
use flatwire::ripple::{ac_loss_spectrum, harmonic_current, reconstruct, ConverterPoint, ResistanceModel};
use num_complex::Complex64;
use proptest::prelude::*;

fn coil() -> impl Strategy<Value = CoilSpec> {
    (1e-3..30e-3, 0.2e-3..20e-3, 0.05e-3..3e-3, 0.0..1e-3, 1u32..200).prop_map(|(rw, dw, tw, s, n)| CoilSpec {
        inner_radius: rw,
        radial_depth: dw,
        thickness: tw,
        spacing: s,
        turns: n,
        conductivity: 5.8e7,
    })
}

proptest! {
    #[test]
    fn planar_is_the_lowest_estimate(c in coil()) {
        let p = dcr_planar(&c).unwrap().resistance;
        prop_assert!(dcr_helical(&c).unwrap().resistance >= p * (1.0 - 1e-12));
        prop_assert!(dcr_average(&c).unwrap().resistance >= p * (1.0 - 1e-12));
    }

    #[test]
    fn closed_forms_match_quadrature(c in coil()) {
        for m in [LengthModel::Helical, LengthModel::Planar, LengthModel::Average] {
            let a = dcr_closed(&c, m).unwrap().resistance;
            let q = dcr_quadrature(&c, m).unwrap().resistance;
            prop_assert!((a - q).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn resistance_scales_with_turns_and_conductivity(c in coil()) {
        let r = dcr_planar(&c).unwrap().resistance;
        let mut d = c.clone();
        d.turns *= 2;
        d.conductivity *= 2.0;
        prop_assert!((dcr_planar(&d).unwrap().resistance - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn design_survives_a_toml_round_trip(dl in 0.3e-3..3e-3f64, tw in 0.3e-3..0.58e-3f64, mu in 100.0..1e4f64) {
        let mut d = prototype();
        let w = d.core.window_width;
        d.clearances.left = dl;
        d.coil.inner_radius = d.core.center_leg_radius + dl;
        d.coil.radial_depth = w - dl - d.clearances.right;
        d.coil.thickness = tw;
        d.core.relative_permeability = mu;
        let back = load_design(&to_toml(&d)).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn inductance_scales_with_turns_squared(n in 1u32..60) {
        let net = build_network(&prototype());
        let l41 = zero_freq_inductance(&net, 41).unwrap();
        let l = zero_freq_inductance(&net, n).unwrap();
        let ratio = f64::from(n * n) / (41.0 * 41.0);
        prop_assert!((l - l41 * ratio).abs() <= 1e-12 * l41);
    }

    #[test]
    fn first_order_q_scales_reluctance(tau in 1e-9..1e-5f64, f in 1.0..1e6f64) {
        let net = build_network(&prototype()).with_q(QModel::FirstOrder { tau }).unwrap();
        let w = 2.0 * std::f64::consts::PI * f;
        let r0 = net.zero_freq_reluctance().unwrap();
        let rt = net.total_reluctance(w).unwrap();
        let expect = Complex64::new(1.0, w * tau) * r0;
        prop_assert!((rt - expect).norm() <= 1e-9 * expect.norm());
    }

    #[test]
    fn harmonics_fall_as_inverse_square(l in 10e-6..1e-3f64, f in 1e3..1e6f64, h in 0u32..20) {
        let p = ConverterPoint::new(48.0, f, l);
        let order = 2 * h + 1;
        let i1 = harmonic_current(1, &p).unwrap().amplitude;
        let ih = harmonic_current(order, &p).unwrap().amplitude;
        prop_assert!((ih * f64::from(order * order) - i1).abs() <= 1e-12 * i1);
    }
}

#[test]
fn flat_resistance_loss_approaches_triangle_rms() {
    // mean square of a triangle of peak-to-peak I_pp is I_pp² / 12
    let p = ConverterPoint::new(50.0, 1e5, 82.8e-6);
    let r = 0.3;
    let s = ac_loss_spectrum(&p, &ResistanceModel::Flat(r), 25).unwrap();
    let time_domain = r * p.ripple_pp().powi(2) / 12.0;
    assert!((s.total - time_domain).abs() < 0.005 * time_domain);
}

#[test]
fn rebuilt_waveform_swing_matches_truncated_series() {
    // the odd-harmonic cosines peak together at t = 0, so the truncated swing
    // is I_pp · (∑_{odd h ≤ 25} h⁻²) / (π² / 8)
    let p = ConverterPoint::new(50.0, 1e5, 82.8e-6);
    let peak = reconstruct(&p, 25, 0.0).unwrap();
    let trough = reconstruct(&p, 25, 0.5).unwrap();
    let partial: f64 = (1..=25).step_by(2).map(|h| 1.0 / f64::from(h * h)).sum();
    let expect = p.ripple_pp() * partial * 8.0 / (std::f64::consts::PI.powi(2));
    assert!(((peak - trough) - expect).abs() < 1e-12 * expect);
    assert!((peak - trough) < p.ripple_pp());
    assert!((peak - trough) > 0.98 * p.ripple_pp());
}

#[test]
fn infinite_coefficient_tail_is_small() {
    let c25 = flatwire::ripple::sqrt_rule_coefficient(25);
    let c_inf = flatwire::ripple::sqrt_rule_coefficient(200_001);
    // integral bound on the odd tail beyond 25: ∫_{25}^{∞} x^-3.5 dx / 2
    let bound = 27f64.powf(-2.5) / 2.5 / 2.0 + 27f64.powf(-3.5);
    assert!(c_inf - c25 < bound);
    assert!((c_inf - c25) / c25 < 1e-3);
}
