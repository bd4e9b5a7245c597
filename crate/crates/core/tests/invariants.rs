use proptest::prelude::*;
use tunnel_core::analytic::{conservation_check, delay_times, reflection_factor, rho, TunnelingModel};
use tunnel_core::laplace::{coefficient_function, CoefficientKind};
use tunnel_core::packet::{MomentumWindow, PacketSpec};
use tunnel_core::units::BarrierSpec;
use tunnel_core::Complex64;

fn model(k0: f64, d: f64) -> TunnelingModel {
    let p0 = 10.0;
    let barrier = BarrierSpec::from_k0(p0, k0, d).unwrap();
    let k_window = (1.0 / k0).sqrt().min(1.4) * 0.999;
    TunnelingModel::new(
        PacketSpec::new(-20.0, p0, 20.0).unwrap(),
        barrier,
        MomentumWindow::new(p0, k_window.max(1.0)).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conservation(k0 in 0.05f64..0.95, d in 0.1f64..5.0) {
        let gamma = BarrierSpec::from_k0(10.0, k0, d).unwrap().gamma(10.0).unwrap();
        let c = conservation_check(k0, d * gamma).unwrap();
        prop_assert!((c.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unimodular_and_stationary(p in 0.1f64..14.0) {
        let b = BarrierSpec::new(100.0, 1.0).unwrap();
        let r = reflection_factor(p, &b).unwrap();
        prop_assert!((r.value.norm() - 1.0).abs() < 1e-13);
        let s = Complex64::new(0.0, -0.5 * p * p);
        prop_assert!((rho(s, b.v).unwrap() - r.value).norm() < 1e-10);
    }

    #[test]
    fn geometric_sum(k0 in 0.1f64..0.9, d in 0.05f64..2.0) {
        let m = model(k0, d);
        let per_term = 2.0 * d * m.gamma0();
        let l_max = ((-(1e-15f64).ln()) / per_term).ceil() as u32;
        let closed = m.closed_transmitted_factor();
        prop_assert!((m.term_sum_factor(l_max) - closed).norm() <= 1e-12 * closed.norm());
    }

    #[test]
    fn shifts_do_not_depend_on_width(l in 0u32..6, k0 in 0.1f64..0.9) {
        let at = |d: f64| delay_times(l, 10.0, &BarrierSpec::from_k0(10.0, k0, d).unwrap()).unwrap();
        let base = at(0.5);
        for d in [1.0, 1.8] {
            let other = at(d);
            prop_assert_eq!(other.delay.to_bits(), base.delay.to_bits());
            prop_assert_eq!(other.shift.to_bits(), base.shift.to_bits());
            prop_assert_eq!(other.phase_slope.to_bits(), base.phase_slope.to_bits());
        }
    }

    #[test]
    fn coefficient_linearity(l in 0u32..4, s in 0.2f64..20.0) {
        let c = coefficient_function(CoefficientKind::G, l, 4.0).unwrap();
        let numeric = c.forward_transform(s).unwrap();
        let exact = c.symbol(Complex64::new(s, 0.0)).unwrap();
        prop_assert!((numeric - exact).norm() < 1e-6);
    }
}

#[test]
fn fig1_term_centroids_lag_the_free_reference() {
    let m = model(0.5, 0.3);
    for (l, expected) in [(0, 0.2), (1, 0.6), (2, 1.0)] {
        let lag = m.free_reference_centroid(2.2) - m.term_centroid(l, 2.2).unwrap();
        assert!((lag - expected).abs() < 0.05, "l = {l}: {lag}");
    }
}

#[test]
fn closed_factor_is_the_full_geometric_series() {
    let m = model(0.5, 1.0);
    let e = (-10.0f64).exp();
    let expected = 2.0 * e / (1.0 + e * e);
    assert!((m.closed_transmitted_factor().re - expected).abs() < 1e-18);
    assert_eq!(m.truncation().unwrap().l_max, 0);
}
