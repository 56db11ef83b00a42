mod common;

use airfoil_kit::constants::{speed_from_reynolds, RE_MAX};
use airfoil_kit::io::DataFormat;
use airfoil_kit::mesh::grading::geometric_sum;
use airfoil_kit::mesh::*;
use airfoil_kit::naca::{generate_airfoil, sample_design_space, Spacing};
use airfoil_kit::Vec2;
use proptest::prelude::*;

use common::{coarse_params, naca4};

proptest! {
    #[test]
    fn cell_count_is_minimal(length in 0.01f64..300.0, frac in 1e-7f64..0.5, ratio in 1.0f64..1.4) {
        let first = length * frac;
        let (n, last) = geometric_cell_count(length, first, ratio).unwrap();
        prop_assert!(geometric_sum(first, ratio, n) >= length * (1.0 - 1e-12));
        prop_assert!(n == 1 || geometric_sum(first, ratio, n - 1) < length * (1.0 - 1e-12));
        prop_assert!((last - first * ratio.powi(n as i32 - 1)).abs() <= 1e-12 * last);
    }

    #[test]
    fn auto_ratio_fills_edge(length in 0.01f64..300.0, n in 2usize..500, frac in 0.0001f64..1.0) {
        let first = length / n as f64 * frac;
        let r = auto_ratio(length, first, n).unwrap();
        prop_assert!(r >= 1.0);
        let mut sum = 0.0;
        let mut size = first;
        for _ in 0..n {
            sum += size;
            size *= r;
        }
        prop_assert!((sum - length).abs() < 1e-9 * length);
    }
}

#[test]
fn distributed_edge_follows_grading() {
    let line = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)];
    let (edge, _) = GradedEdge::closing(2.0, 0.01, 40).unwrap();
    let fwd = distribute_edge(&line, &edge, Direction::Forward).unwrap();
    assert_eq!(fwd.len(), 41);
    assert_eq!((fwd[0], fwd[40]), (line[0], line[1]));
    assert!((fwd[1].x - 0.01).abs() < 1e-12);
    let back = distribute_edge(&line, &edge, Direction::Backward).unwrap();
    assert!((back[40].x - back[39].x - 0.01).abs() < 1e-12);
}

#[test]
fn worst_case_y_plus_is_about_one() {
    // Highest Reynolds number of the design space, local friction close to the nose.
    let y = estimate_y_plus(2e-6, speed_from_reynolds(RE_MAX), 0.05);
    assert!(y > 0.5 && y < 1.5, "{y}");
}

#[test]
fn sampled_designs_mesh_without_inverted_cells() {
    for spec in sample_design_space(77, 40) {
        let g = generate_airfoil(&spec.airfoil.params().unwrap(), 512, Spacing::Cosine, true).unwrap();
        let m = assemble_cgrid(&g, &coarse_params(), spec.aoa).unwrap();
        assert!((0..m.n_cells()).all(|c| m.cell_area(c) > 0.0), "{}", spec.name);
        let l = &m.layout;
        assert_eq!(m.n_cells(), l.n_normal * (l.n_front_upper + l.n_front_lower + 2 * l.n_aft + 2 * l.n_wake));
        let ids: Vec<u8> = m.block_map.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5]);
    }
}

#[test]
fn meshed_area_matches_domain_minus_airfoil() {
    let spec = naca4(0.0, 0.0, 12.0, 50.0, 0.0);
    let g = generate_airfoil(&spec.airfoil.params().unwrap(), 512, Spacing::Cosine, true).unwrap();
    let params = coarse_params();
    let m = assemble_cgrid(&g, &params, 0.0).unwrap();
    let total: f64 = (0..m.n_cells()).map(|c| m.cell_area(c)).sum();
    // Half disc of radius R in front of the leading edge plus the 2R x R rectangle behind it.
    let r = params.domain_extent;
    let outer = 0.5 * std::f64::consts::PI * r * r + 2.0 * r * r;
    let wall: Vec<Vec2> = m.airfoil_loop.iter().map(|&i| m.nodes[i]).collect();
    let airfoil = airfoil_kit::geom::signed_area(&wall);
    // The C is polygonal along its arc, so allow the chordal deficit of the arc cells.
    assert!(((total + airfoil) - outer).abs() / outer < 1e-3, "{total} vs {}", outer - airfoil);
}

#[test]
fn export_files() {
    let spec = naca4(2.0, 4.0, 12.0, 50.0, 4.0);
    let g = generate_airfoil(&spec.airfoil.params().unwrap(), 256, Spacing::Cosine, true).unwrap();
    let m = assemble_cgrid(&g, &coarse_params(), spec.aoa).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_mesh(&m, dir.path(), DataFormat::Text).unwrap();
    let nodes = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    assert_eq!(nodes.lines().count(), m.nodes.len() + 1);
    let cells = std::fs::read_to_string(dir.path().join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), m.n_cells() + 1);
    let dict = block_mesh_dict(&m);
    assert!(dict.contains("blocks") && dict.contains("airfoil") && dict.contains("freestream"));
}
