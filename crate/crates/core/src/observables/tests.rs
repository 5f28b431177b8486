use super::*;
use crate::green::green_boundary;
use crate::scattering::{find_bound_states, q_matrix, ScanOptions, SpectralPoint};

fn reference() -> Junction {
    Junction::two_contact(1.0, 1.0, 1, 20).unwrap()
}

fn short() -> Junction {
    Junction::two_contact(1.0, 0.8, 1, 2).unwrap()
}

fn zt(mu1: f64, mu2: f64) -> [ReservoirState; 2] {
    [ReservoirState::zero_temperature(mu1), ReservoirState::zero_temperature(mu2)]
}

#[test]
fn equilibrium_density_limits() {
    let full = equilibrium_density(&ReservoirState::zero_temperature(4.0)).unwrap();
    assert!((full - 1.0).abs() < 1e-9);
    let half = equilibrium_density(&ReservoirState::zero_temperature(2.0)).unwrap();
    assert!((half - 0.5).abs() < 1e-9);
    // particle-hole symmetry keeps half filling at any temperature
    let warm = equilibrium_density(&ReservoirState { beta: 3.0, mu: 2.0 }).unwrap();
    assert!((warm - 0.5).abs() < 1e-9);
    assert_eq!(equilibrium_density(&ReservoirState::zero_temperature(0.0)).unwrap(), 0.0);
}

#[test]
fn kernels_match_dense_assembly() {
    let j = reference();
    let e = 0.3;
    let k = kernels(&j, e).unwrap();
    let q = q_matrix(&j, SpectralPoint::Boundary(e, Side::Plus)).unwrap();
    let qm = q_matrix(&j, SpectralPoint::Boundary(e, Side::Minus)).unwrap();
    let p = |a: Site, b: Site| shell_density(e, a.to(b)).unwrap();
    let (s1, s2) = (j.contacts(Reservoir::One), j.contacts(Reservoir::Two));
    for a in 0..2 {
        for b in 0..2 {
            let mut tr = Complex64::new(0.0, 0.0);
            let mut rf = Complex64::new(0.0, 0.0);
            for u in 0..2 {
                for w in 0..2 {
                    tr += q.q[(2 + a, u)] * p(s1[u], s1[w]) * qm.q[(w, 2 + b)];
                    rf += q.q[(2 + a, 2 + u)] * p(s2[u], s2[w]) * qm.q[(2 + w, 2 + b)];
                }
            }
            assert!((k.m_tr[(a, b)] - tr).norm() < 1e-10);
            assert!((k.m_ref[(a, b)] - rf).norm() < 1e-10);
        }
    }
    for m in [&k.m_tr, &k.m_ref] {
        assert!((m - m.adjoint()).camax() < 1e-12);
        let eig = nalgebra::SymmetricEigen::new(m.clone()).eigenvalues;
        assert!(eig.iter().all(|&l| l > 1e-10), "{eig}");
    }
}

#[test]
fn decoupled_junction_is_equilibrium() {
    let j = Junction::two_contact(0.0, 0.0, 1, 20).unwrap();
    let k = kernels(&j, 0.7).unwrap();
    assert_eq!(k.m_tr.camax(), 0.0);
    assert_eq!(k.m_ref.camax(), 0.0);
    let x = Site::new(3, -2);
    assert_eq!(delta_transmitted(&j, 0.7, x).unwrap(), 0.0);
    assert_eq!(delta_reflected(&j, 0.7, x).unwrap(), shell_density(0.7, Disp::ZERO).unwrap());
    assert_eq!(total_current(&j, &zt(1.4, 0.3)).unwrap(), 0.0);
    let (d1, d2) = density_ac(&j, &zt(1.4, 0.3), x).unwrap();
    assert_eq!(d1, 0.0);
    let eq = equilibrium_density(&ReservoirState::zero_temperature(0.3)).unwrap();
    assert!((d2 - eq).abs() < 1e-9);
}

#[test]
fn single_active_contact_reduces_to_closed_form() {
    let j = Junction::two_contact(0.0, 1.0, 1, 20).unwrap();
    let e = 0.3;
    let k = kernels(&j, e).unwrap();
    assert_eq!(k.m_tr[(0, 0)], Complex64::new(0.0, 0.0));
    assert_eq!(k.m_tr[(0, 1)], Complex64::new(0.0, 0.0));
    assert!(k.m_tr[(1, 1)].re > 0.0);
    let g0 = green_boundary(e, Side::Plus, Disp::ZERO).unwrap();
    let q21 = -1.0 / (g0 * g0 - 1.0);
    let p00 = shell_density(e, Disp::ZERO).unwrap();
    for x in [Site::new(5, 3), Site::new(20, 1), Site::new(-4, -9)] {
        let g = green_boundary(e, Side::Minus, Site::new(20, 0).to(x)).unwrap();
        let closed = q21.norm_sqr() * p00 * g.norm_sqr();
        let d = delta_transmitted(&j, e, x).unwrap();
        assert!((d - closed).abs() < 1e-10 * closed.max(1e-3), "{d} vs {closed}");
    }
}

#[test]
fn single_contact_reduction_matches_pair_alone() {
    let both = Junction::two_contact(0.0, 1.0, 1, 20).unwrap();
    let alone = Junction::new(vec![Site::new(1, 0)], vec![Site::new(20, 0)], DMatrix::from_element(1, 1, 1.0)).unwrap();
    let req = FieldRequest::window(&Window::new(17, 21, -1, 2).unwrap());
    let a = spectral_fields(&both, 0.9, &req).unwrap();
    let b = spectral_fields(&alone, 0.9, &req).unwrap();
    for ((_, x), (_, y)) in a.transmitted.values.iter().zip(&b.transmitted.values) {
        assert!((x - y).abs() < 1e-12);
    }
    for ((_, x), (_, y)) in a.reflected.values.iter().zip(&b.reflected.values) {
        assert!((x - y).abs() < 1e-12);
    }
    for ((_, x), (_, y)) in a.current_reflected.values.iter().zip(&b.current_reflected.values) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn bond_current_arguments() {
    let j = short();
    let x = Site::new(4, 4);
    assert_eq!(bond_current_spectral(&j, 0.5, x, x, Channel::Transmitted).unwrap(), 0.0);
    assert!(bond_current_spectral(&j, 0.5, x, Site::new(6, 4), Channel::Transmitted).is_err());
    assert!(bond_current_spectral(&j, 4.5, x, Site::new(5, 4), Channel::Transmitted).is_err());
    let y = Site::new(5, 4);
    for ch in [Channel::Transmitted, Channel::Reflected] {
        let a = bond_current_spectral(&j, 0.5, x, y, ch).unwrap();
        let b = bond_current_spectral(&j, 0.5, y, x, ch).unwrap();
        assert_eq!(a, -b);
    }
}

#[test]
fn two_point_route_reproduces_channel_formulas() {
    let j = reference();
    for e in [0.3, 1.4, 2.7] {
        let x = Site::new(3, 2);
        let y = Site::new(3, 3);
        let slice = EnergySlice::new(&j, e, &[x, y]).unwrap();
        let tp = TwoPoint::new(&j, e, &[(Reservoir::Two, x), (Reservoir::Two, y)]).unwrap();
        let (rx, ry) = ((Reservoir::Two, x), (Reservoir::Two, y));
        let r1 = tp.element(Reservoir::One, rx, rx);
        let r2 = tp.element(Reservoir::Two, rx, rx);
        assert!((r1.re - slice.delta_transmitted(x)).abs() < 1e-10 && r1.im.abs() < 1e-12);
        assert!((r2.re - slice.delta_reflected(x)).abs() < 1e-10 && r2.im.abs() < 1e-12);
        assert!((-tp.element(Reservoir::One, rx, ry).im - slice.bond_transmitted(x, y)).abs() < 1e-10);
        assert!((-tp.element(Reservoir::Two, rx, ry).im - slice.bond_reflected(x, y)).abs() < 1e-10);
    }
}

#[test]
fn spectral_currents_conserve_and_cross_contours() {
    let j = short();
    let e = 0.8;
    let w = Window::new(-4, 6, -4, 4).unwrap();
    let f = spectral_fields(&j, e, &FieldRequest::window(&w)).unwrap();
    let s2 = j.contacts(Reservoir::Two);
    for ch in [Channel::Transmitted, Channel::Reflected] {
        let field = f.current(ch).unwrap();
        for x in w.interior_sites().into_iter().filter(|x| !s2.contains(x)) {
            assert!(field.divergence(x).abs() < 1e-10 * field.max_abs(), "{ch} at {x}");
        }
    }
    let je = spectral_total_current(&j, e).unwrap();
    assert!(je > 0.0);
    for r in [Window::new(-1, 3, -1, 1).unwrap(), Window::new(-3, 5, -3, 3).unwrap()] {
        let tr = f.current_transmitted.flux(&r.outward_bonds()).unwrap();
        let rf = f.current_reflected.flux(&r.outward_bonds()).unwrap();
        assert!((tr - je).abs() < 1e-10, "{tr} vs {je}");
        assert!((rf + je).abs() < 1e-10, "{rf} vs {je}");
    }
}

#[test]
fn landauer_routes_agree() {
    let j = short();
    let st = zt(1.1, 0.4);
    let a = total_current(&j, &st).unwrap();
    let b = junction_bond_current(&j, &st, 1e-10).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    let swapped = total_current(&j, &[st[1], st[0]]).unwrap();
    assert!((a + swapped).abs() < 1e-12);
    assert_eq!(total_current(&j, &zt(0.7, 0.7)).unwrap(), 0.0);
}

#[test]
fn finite_temperature_current() {
    let j = Junction::single_contact(1.0);
    let cold = total_current(&j, &zt(1.2, 0.6)).unwrap();
    let warm = [ReservoirState { beta: 200.0, mu: 1.2 }, ReservoirState { beta: 200.0, mu: 0.6 }];
    let hot = total_current(&j, &warm).unwrap();
    assert!((hot - cold).abs() < 1e-3, "{hot} vs {cold}");
    let same = [ReservoirState { beta: 5.0, mu: 1.0 }; 2];
    assert_eq!(total_current(&j, &same).unwrap(), 0.0);
}

#[test]
fn junction_bond_currents_sum_to_total() {
    let j = short();
    let st = zt(1.1, 0.4);
    let s1 = j.contacts(Reservoir::One).to_vec();
    let s2 = j.contacts(Reservoir::Two).to_vec();
    let mut sum = 0.0;
    for k in 0..2 {
        sum += bond_current(&j, &st, (Reservoir::One, s1[k]), (Reservoir::Two, s2[k]), 1e-10).unwrap();
    }
    let total = total_current(&j, &st).unwrap();
    assert!((sum - total).abs() < 1e-8);
    let back = bond_current(&j, &st, (Reservoir::Two, s2[0]), (Reservoir::One, s1[0]), 1e-10).unwrap();
    let fwd = bond_current(&j, &st, (Reservoir::One, s1[0]), (Reservoir::Two, s2[0]), 1e-10).unwrap();
    assert!((back + fwd).abs() < 1e-12);
    assert!(bond_current(&j, &st, (Reservoir::One, s1[0]), (Reservoir::Two, s2[1]), 1e-10).is_err());
}

#[test]
fn point_density_vanishes_without_coupling_and_decays() {
    let j = Junction::two_contact(0.0, 0.0, 1, 2).unwrap();
    assert_eq!(density_point(&j, &zt(1.4, 0.3), &[], Site::new(0, 0)).unwrap(), 0.0);
    let j = Junction::single_contact(1.0);
    let scan = find_bound_states(&j, ScanOptions::default()).unwrap();
    let st = zt(1.4, 0.3);
    let near = density_point(&j, &st, &scan.states, Site::new(0, 0)).unwrap();
    let far = density_point(&j, &st, &scan.states, Site::new(6, 0)).unwrap();
    assert!(near > 0.0 && far >= 0.0 && far < 1e-2 * near, "{near} {far}");
}

#[test]
fn fields_window_bookkeeping() {
    let w = Window::new(0, 1, 0, 1).unwrap();
    assert_eq!(w.sites().len(), 4);
    assert_eq!(w.bonds().len(), 4);
    assert!(w.interior_sites().is_empty());
    assert_eq!(w.outward_bonds().len(), 8);
    let big = Window::around_contacts();
    assert_eq!(big.len(), 1600);
    assert_eq!(big.bonds().len(), 2 * 40 * 39);
    assert!(big.contains(Site::new(0, 0)) && big.contains(Site::new(20, 0)));
    assert!(Window::new(1, 0, 0, 0).is_err());
}
