mod common;

use common::{half_plane_vertices, rng};
use rand::Rng;
use unmark_core::strategies::voronoi_diagram;
use unmark_core::world::{FieldSpec, Vec2};

fn random_sites(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|_| Vec2::new(r.random_range(-52.5..52.5), r.random_range(-34.0..34.0)))
        .collect()
}

#[test]
fn vertices_are_equidistant_with_empty_circles() {
    let field = FieldSpec::default();
    let mut r = rng(5);
    for _ in 0..100 {
        let sites = random_sites(&mut r, 11);
        let d = voronoi_diagram(&sites, &field);
        assert!(!d.vertices.is_empty());
        for v in &d.vertices {
            let dists: Vec<f64> = v.sites.iter().map(|&i| v.point.dist(sites[i])).collect();
            for dd in &dists {
                assert!((dd - v.radius).abs() < 1e-6);
            }
            for s in &sites {
                assert!(v.point.dist(*s) >= v.radius - 1e-6);
            }
            assert!(field.contains(v.point));
        }
    }
}

#[test]
fn vertex_sets_match_half_plane_cells() {
    let field = FieldSpec::default();
    let mut r = rng(6);
    for _ in 0..100 {
        let sites = random_sites(&mut r, 11);
        let got: Vec<Vec2> = voronoi_diagram(&sites, &field).vertices.iter().map(|v| v.point).collect();
        let want = half_plane_vertices(&sites, &field);
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for g in &got {
            assert!(want.iter().any(|w| w.dist(*g) < 1e-6), "extra vertex {g}");
        }
    }
}

#[test]
fn square_corners_give_single_center() {
    let sites = [
        Vec2::new(5.0, 5.0),
        Vec2::new(-5.0, 5.0),
        Vec2::new(-5.0, -5.0),
        Vec2::new(5.0, -5.0),
    ];
    let d = voronoi_diagram(&sites, &FieldSpec::default());
    assert_eq!(d.vertices.len(), 1);
    assert!(d.vertices[0].point.dist(Vec2::ZERO) < 1e-9);
    assert_eq!(half_plane_vertices(&sites, &FieldSpec::default()).len(), 1);
}
