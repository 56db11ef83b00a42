use airfoil_kit::constants::{AOA_MAX_DEG, AOA_MIN_DEG, RE_MAX, RE_MIN};
use airfoil_kit::naca::*;
use airfoil_kit::Error;
use proptest::prelude::*;

fn five(cl: f64, p: f64, reflex: bool) -> Naca5Params {
    Naca5Params::new(cl, p, reflex, 0.12).unwrap()
}

// Mean-line constants from the classical 5-digit tables (design lift 0.3), quoted to
// the tabulated precision; k1 there carries a factor 6 relative to the cubic used here.
#[test]
fn five_digit_constants_match_tables() {
    for (p, m, k1) in [(0.15, 0.2025, 15.957), (0.20, 0.2900, 6.643), (0.25, 0.3910, 3.230)] {
        let k = FiveDigitCamber::new(&five(0.3, p, false)).unwrap();
        assert!((k.m - m).abs() < 1.5e-3, "p = {p}: m = {}", k.m);
        assert!((6.0 * k.k1 / k1 - 1.0).abs() < 5e-3, "p = {p}: k1 = {}", 6.0 * k.k1);
    }
}

#[test]
fn reflex_line_with_standard_root_matches_standard_line() {
    // With m from p = m(1 - sqrt(m/3)), 3(m - p)^2 = m^3, so K2 vanishes and the two
    // mean lines coincide.
    for p in [0.15, 0.2, 0.3, 0.4] {
        let std = five(0.45, p, false);
        let rfx = five(0.45, p, true);
        assert!(FiveDigitCamber::new(&rfx).unwrap().k2.abs() < 1e-12);
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let (a, b) = (camber_five(x, &std).unwrap(), camber_five(x, &rfx).unwrap());
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }
}

#[test]
fn reflex_value_at_trailing_edge() {
    let params = five(0.3, 0.2, true);
    let k = FiveDigitCamber::new(&params).unwrap();
    let (m, k1, k2) = (k.m, k.k1, k.k2);
    let want = k1 * (-k2 * (1.0 - m).powi(3) + k2 * (1.0 - m).powi(3));
    assert!((camber_five(1.0, &params).unwrap().0 - want).abs() < 1e-15);
}

#[test]
fn four_digit_2412_peak() {
    let params = Naca4Params::from_digits(2.0, 4.0, 12.0).unwrap();
    let (y, slope) = camber_four(0.4, &params).unwrap();
    assert!((y - 0.02).abs() < 1e-16 && slope == 0.0);
    assert_eq!(camber_four(1.0, &params).unwrap().0, 0.0);
    assert!(matches!(camber_four(1.2, &params), Err(Error::Domain(_))));
}

#[test]
fn thickness_0012_reference_values() {
    // Open-edge ordinates against the polynomial written out; 0.06002 at 30% chord is the tabulated value.
    let t = 0.12;
    let yt = |x: f64| 5.0 * t * (0.2969 * x.sqrt() - 0.126 * x - 0.3516 * x * x + 0.2843 * x.powi(3) - 0.1015 * x.powi(4));
    for x in [0.0, 0.01, 0.3, 0.5, 0.9] {
        assert!((half_thickness(x, t, false).unwrap() - yt(x)).abs() < 1e-15);
    }
    assert!((half_thickness(0.3, t, false).unwrap() - 0.06002).abs() < 1e-4);
}

#[test]
fn design_space_bounds() {
    let cases = sample_design_space(3, 2000);
    let mut fives = 0;
    for c in &cases {
        assert!(c.reynolds >= RE_MIN && c.reynolds <= RE_MAX);
        assert!(c.aoa_deg() >= AOA_MIN_DEG - 1e-12 && c.aoa_deg() <= AOA_MAX_DEG + 1e-12);
        match c.airfoil {
            Designation::Four { m, p, xx } => {
                assert!((0.0..=7.0).contains(&m) && (xx >= 5.0 && xx <= 20.0));
                assert!(p == 0.0 || (1.5..=7.0).contains(&p));
            }
            Designation::Five { l, p, xx, .. } => {
                fives += 1;
                assert!((0.0..=4.0).contains(&l) && (3.0..=8.0).contains(&p) && (5.0..=20.0).contains(&xx));
            }
        }
        assert!(c.airfoil.params().is_ok(), "{}", c.name);
    }
    assert!((850..1150).contains(&fives), "{fives} five-digit sections");
}

#[test]
fn sampler_streams_are_independent() {
    let all = sample_design_space(42, 50);
    let cfg = SamplerConfig::default();
    for i in [0u64, 17, 49] {
        assert_eq!(sample_case(42, i, &cfg), all[i as usize]);
    }
    assert_ne!(sample_design_space(43, 5), all[..5].to_vec());
}

proptest! {
    #[test]
    fn symmetric_sections_mirror(t in 0.05f64..=0.2, n in 16usize..300) {
        let params = AirfoilParams::Four(Naca4Params::new(0.0, 0.0, t).unwrap());
        for closed in [false, true] {
            let g = generate_airfoil(&params, n, Spacing::Cosine, closed).unwrap();
            for (u, l) in g.upper.iter().zip(&g.lower) {
                prop_assert_eq!(u.x, l.x);
                prop_assert_eq!(u.y, -l.y);
            }
        }
    }

    #[test]
    fn thickness_is_recovered(m in 0.0f64..=0.07, p in 0.15f64..=0.7, t in 0.05f64..=0.2) {
        // Upper and lower points are offset by +-y_t along the camber normal.
        let params = AirfoilParams::Four(Naca4Params::new(m, p, t).unwrap());
        let g = generate_airfoil(&params, 64, Spacing::Cosine, true).unwrap();
        let xs = chord_stations(64, Spacing::Cosine);
        for k in 0..64 {
            let half = (g.upper[k] - g.lower[k]).norm() / 2.0;
            prop_assert!((half - half_thickness(xs[k], t, true).unwrap()).abs() < 1e-14);
            let mid = (g.upper[k] + g.lower[k]) * 0.5;
            prop_assert!((mid - g.camber[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn solvers_agree(p in 0.0f64..0.444) {
        let a = solve_max_camber_newton(p).unwrap();
        let b = solve_max_camber_bisection(p).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a >= p && a <= 4.0 / 3.0);
    }

    #[test]
    fn designation_digits_round_trip(case in 0u64..500) {
        let c = sample_case(11, case, &SamplerConfig::default());
        let back = Designation::from_digits(c.airfoil.series(), &c.airfoil.digits()).unwrap();
        prop_assert_eq!(back, c.airfoil);
    }
}

#[test]
fn out_of_domain_positions_rejected() {
    assert!(matches!(solve_max_camber_m(4.0 / 9.0), Err(Error::Domain(_))));
    assert!(matches!(solve_max_camber_m(-0.01), Err(Error::Domain(_))));
    assert_eq!(solve_max_camber_m(0.0).unwrap(), 0.0);
}
