//! Transferred eigenvalue bounds stay below finite-element eigenvalues of
//! the image domains.

use qcbound_core::geometry::{build_star_domain, intersection_volume, ConvexCell, StarDomainSpec};
use qcbound_core::oracle::{mesh_domain, neumann_mu2, DomainSpec, Rect, TriangleMesh};
use qcbound_core::poincare::{convex_cell_constant, pair_constant, SpectralParams};
use qcbound_core::qc_transfer::{
    ball_lower_bound, eigen_transfer, eigen_transfer_lipschitz, whitney_qc_bound, QCMapData, SobolevPoincareBase,
};
use qcbound_core::EigenBound;

fn map_mesh(mesh: &TriangleMesh, a: [[f64; 2]; 2]) -> TriangleMesh {
    let nodes = mesh.nodes().iter().map(|x| [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]).collect();
    TriangleMesh::new(nodes, mesh.elements().to_vec()).unwrap()
}

fn matrix(a: [[f64; 2]; 2]) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.to_vec()).collect()
}

fn params() -> SpectralParams {
    SpectralParams::new(2.0, 2).unwrap()
}

fn assert_below(bound: &EigenBound, image: &TriangleMesh) {
    let mu = neumann_mu2(image).unwrap().mu2;
    assert!(bound.mu_lower < mu, "bound {} vs oracle {mu}", bound.mu_lower);
}

#[test]
fn stretched_squares() {
    let cell = ConvexCell::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let base = convex_cell_constant(&cell, params()).unwrap().to_eigen_bound();
    let source = mesh_domain(&DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.05).unwrap();
    for a in [[[1.5, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 0.7]], [[1.0, 0.6], [0.0, 1.0]]] {
        let map = QCMapData::linear(&matrix(a), 1.0, None).unwrap();
        let out = eigen_transfer_lipschitz(&map, &base, 2.0).unwrap();
        assert_below(&out, &map_mesh(&source, a));
    }
}

#[test]
fn disk_to_ellipse() {
    let base = ball_lower_bound(2, 2.0).unwrap();
    let disk = mesh_domain(&DomainSpec::Disk { radius: 1.0, center: [0.0, 0.0] }, 0.05).unwrap();
    let a = [[1.5, 0.0], [0.0, 0.8]];
    let map = QCMapData::linear(&matrix(a), std::f64::consts::PI, None).unwrap();
    let out = eigen_transfer_lipschitz(&map, &base, 2.0).unwrap();
    assert_below(&out, &map_mesh(&disk, a));
}

#[test]
fn sheared_star_domain() {
    let star = build_star_domain(StarDomainSpec::new(1.0, 2)).unwrap();
    let (w1, w2) = (&star.omega1, &star.omega2);
    let overlap = intersection_volume(w1, w2).unwrap();
    let b1 = convex_cell_constant(w1, params()).unwrap();
    let b2 = convex_cell_constant(w2, params()).unwrap();
    let pair = pair_constant(w1, w2, overlap, &b1, &b2, 2.0).unwrap();
    let source = mesh_domain(&DomainSpec::Star { delta: 1.0 }, 0.05).unwrap();
    let base_check = neumann_mu2(&source).unwrap().mu2;
    assert!(pair.to_eigen_bound().mu_lower < base_check);
    let a = [[1.0, 0.5], [0.0, 1.0]];
    let map = QCMapData::linear(&matrix(a), star.exact_union_volume(), None).unwrap();
    let out = eigen_transfer_lipschitz(&map, &pair.to_eigen_bound(), 2.0).unwrap();
    assert_below(&out, &map_mesh(&source, a));
}

#[test]
fn two_rectangle_union_under_stretch() {
    let q1 = ConvexCell::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let q2 = ConvexCell::aabb(&[0.5, 0.25], &[1.8, 0.75]).unwrap();
    let overlap = intersection_volume(&q1, &q2).unwrap();
    let b1 = convex_cell_constant(&q1, params()).unwrap();
    let b2 = convex_cell_constant(&q2, params()).unwrap();
    let pair = pair_constant(&q1, &q2, overlap, &b1, &b2, 2.0).unwrap();
    let map = QCMapData::linear(&[vec![2.0, 0.0], vec![0.0, 1.0]], pair.volume.unwrap(), None).unwrap();
    let out = whitney_qc_bound(&pair, &map, 2.0).unwrap();
    let image = mesh_domain(
        &DomainSpec::RectangleUnion {
            rectangles: vec![Rect { lo: [0.0, 0.0], hi: [2.0, 1.0] }, Rect { lo: [1.0, 0.25], hi: [3.6, 0.75] }],
        },
        0.05,
    )
    .unwrap();
    assert_below(&out, &image);
}

#[test]
fn sobolev_route_on_the_square() {
    let cell = ConvexCell::aabb(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let base = SobolevPoincareBase::convex(&cell, 4.0);
    let source = mesh_domain(&DomainSpec::Rectangle { lo: [0.0, 0.0], hi: [1.0, 1.0] }, 0.05).unwrap();
    let id = QCMapData::identity(2, 1.0).unwrap();
    assert_below(&eigen_transfer(&id, &base, 2.0).unwrap(), &source);
    let a = [[1.4, 0.0], [0.0, 1.0]];
    let map = QCMapData::linear(&matrix(a), 1.0, None).unwrap();
    assert_below(&eigen_transfer(&map, &base, 2.0).unwrap(), &map_mesh(&source, a));
}
