mod common;

use fronthaul::beamspace::{
    build_basis, candidate_basis, channel_energy_capture, dft_basis, svd_beams, to_beamspace, BeamspaceBasis,
    BeamspaceError, BeamspaceKind,
};
use fronthaul::channel::{clustered_channel, steering_vector, ChannelRealization};
use fronthaul::linalg::ComplexMatrix;
use fronthaul::rng::{complex_gaussian, stream, Purpose};
use fronthaul::signal::{random_symbols, transmit, Modulation, ResourceGrid};
use num_complex::Complex64;

#[test]
fn dft_is_unitary() {
    let f = dft_basis(64);
    assert!(f.orthonormality_error() < 1e-12);
    let z = f[(3, 5)];
    let expected = Complex64::from_polar(1.0 / 8.0, -2.0 * std::f64::consts::PI * 15.0 / 64.0);
    assert!((z - expected).norm() < 1e-15);
}

#[test]
fn rank_one_channel_leads_svd_beams() {
    let h = common::random_matrix(6, 1, 2);
    let v = common::random_matrix(1, 3, 3);
    let ch = ChannelRealization::new(vec![h.matmul(&v).unwrap()]).unwrap();
    let u = svd_beams(&ch).unwrap();
    assert!(u.orthonormality_error() < 1e-10);
    let first = u.column(0);
    let overlap: Complex64 = first.iter().zip(h.column(0)).map(|(a, b)| a.conj() * b).sum();
    assert!((overlap.norm() / h.frobenius_norm() - 1.0).abs() < 1e-10);
}

#[test]
fn aligned_steering_vector_ranks_its_dft_beam_first() {
    let m = 32;
    let k = 5;
    // DFT column k is exp(-2 pi i j k / m): a steering vector with phase step -2 pi k / m
    let az = (-2.0 * k as f64 / m as f64).asin();
    let a = steering_vector(m, az);
    let ch = ChannelRealization::new(vec![ComplexMatrix::from_columns(&[a])]).unwrap();
    let x = random_symbols(12, 1, Modulation::Qpsk, 1);
    let y = transmit(&x, &ch, 12, f64::INFINITY, 0).unwrap().grid;
    let basis = build_basis(BeamspaceKind::Dft, &ch, &y, 4).unwrap();
    assert_eq!(basis.source_index[0], k);
    assert!(basis.power_per_beam.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn too_many_beams_rejected() {
    let ch = clustered_channel(8, 2, 2, 5.0, 1, 0).unwrap();
    let y = ResourceGrid::zeros(12, 8);
    assert!(matches!(
        build_basis(BeamspaceKind::Svd, &ch, &y, 9),
        Err(BeamspaceError::TooManyBeams { n_beam: 9, m: 8 })
    ));
}

fn received(ch: &ChannelRealization, seed: u64) -> ResourceGrid {
    let x = random_symbols(ch.n_rb() * 12, ch.n_layers(), Modulation::Qam256, seed);
    transmit(&x, ch, 12, 20.0, seed).unwrap().grid
}

#[test]
fn transform_energy() {
    let ch = clustered_channel(16, 2, 3, 10.0, 2, 4).unwrap();
    let y = received(&ch, 1);
    let full = build_basis(BeamspaceKind::Dft, &ch, &y, 16).unwrap();
    let yb = to_beamspace(&y, &full).unwrap();
    for sc in 0..y.n_sc() {
        let a: f64 = y.subcarrier(sc).iter().map(|z| z.norm_sqr()).sum();
        let b: f64 = yb.subcarrier(sc).iter().map(|z| z.norm_sqr()).sum();
        assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }
    let part = build_basis(BeamspaceKind::Svd, &ch, &y, 5).unwrap();
    let yp = to_beamspace(&y, &part).unwrap();
    for sc in 0..y.n_sc() {
        let a: f64 = y.subcarrier(sc).iter().map(|z| z.norm_sqr()).sum();
        let b: f64 = yp.subcarrier(sc).iter().map(|z| z.norm_sqr()).sum();
        assert!(b <= a * (1.0 + 1e-12));
    }
}

#[test]
fn identity_columns_select_antennas() {
    let y = common::random_grid(12, 4, 3);
    let basis = BeamspaceBasis {
        kind: BeamspaceKind::Antenna,
        matrix: ComplexMatrix::identity(4).select_columns(&[2, 0]),
        power_per_beam: vec![1.0, 1.0],
        source_index: vec![2, 0],
    };
    let yb = to_beamspace(&y, &basis).unwrap();
    for sc in 0..12 {
        assert_eq!(yb.get(sc, 0), y.get(sc, 2));
        assert_eq!(yb.get(sc, 1), y.get(sc, 0));
    }
}

#[test]
fn svd_captures_at_least_dft_energy_for_every_k() {
    for seed in 0..10 {
        let ch = clustered_channel(64, 4, 3, 10.0, 16, seed).unwrap();
        let dft = candidate_basis(BeamspaceKind::Dft, &ch).unwrap();
        let svd = candidate_basis(BeamspaceKind::Svd, &ch).unwrap();
        for k in 1..=64 {
            let d = channel_energy_capture(&dft, &ch, k).unwrap();
            let s = channel_energy_capture(&svd, &ch, k).unwrap();
            assert!(s >= d - 1e-12, "seed {seed} k {k}: {s} < {d}");
        }
    }
}

#[test]
fn beamspace_noise_stays_white() {
    let m = 8;
    let ch = clustered_channel(m, 2, 2, 5.0, 1, 9).unwrap();
    let y = received(&ch, 2);
    let basis = build_basis(BeamspaceKind::Svd, &ch, &y, 4).unwrap();
    let n = 10_000;
    let mut rng = stream(3, Purpose::MonteCarlo, 0);
    let noise = ResourceGrid::new(n, m, (0..n * m).map(|_| complex_gaussian(&mut rng)).collect()).unwrap();
    let nb = to_beamspace(&noise, &basis).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let c: Complex64 = (0..n).map(|sc| nb.get(sc, a) * nb.get(sc, b).conj()).sum::<Complex64>() / n as f64;
            let expected = if a == b { 1.0 } else { 0.0 };
            assert!((c - expected).norm() < 0.05, "({a},{b}) {c}");
        }
    }
}
