mod common;

use fronthaul::channel::{randsvd_channel, ChannelRealization};
use fronthaul::linalg::ComplexMatrix;
use fronthaul::signal::{evm_percent, qam_demodulate, qam_modulate, random_symbols, transmit, Modulation, SignalError};
use num_complex::Complex64;

#[test]
fn qpsk_gray_corner() {
    let s = qam_modulate(&[0, 0], Modulation::Qpsk).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s[0] - Complex64::new(r, r)).norm() < 1e-15);
}

#[test]
fn qam256_energy_and_corner() {
    let bits: Vec<u8> = (0..256u32).flat_map(|v| (0..8).rev().map(move |k| ((v >> k) & 1) as u8)).collect();
    let syms = qam_modulate(&bits, Modulation::Qam256).unwrap();
    let mean = syms.iter().map(|s| s.norm_sqr()).sum::<f64>() / 256.0;
    assert!((mean - 1.0).abs() < 1e-12);
    let peak = syms.iter().map(|s| s.norm()).fold(0.0, f64::max);
    assert!((peak - 15.0 * 2f64.sqrt() / 170f64.sqrt()).abs() < 1e-12);
    assert_eq!(qam_demodulate(&syms, Modulation::Qam256), bits);
}

#[test]
fn modulate_rejects_partial_symbol() {
    assert!(matches!(
        qam_modulate(&[0, 1, 1], Modulation::Qam16),
        Err(SignalError::BitCount { bits: 3, per_symbol: 4 })
    ));
}

#[test]
fn noiseless_transmit_is_exact_product() {
    let ch = randsvd_channel(8, 2, 10.0, 2, 1).unwrap();
    let x = random_symbols(24, 2, Modulation::Qam16, 3);
    let rx = transmit(&x, &ch, 12, f64::INFINITY, 4).unwrap();
    assert_eq!(rx.sigma2, 0.0);
    for sc in 0..24 {
        let y = ch.rb(sc / 12).mul_vec(x.subcarrier(sc)).unwrap();
        for (a, b) in y.iter().zip(rx.grid.subcarrier(sc)) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}

#[test]
fn snr_sets_noise_variance() {
    let ch = randsvd_channel(16, 4, 10.0, 4, 2).unwrap();
    let x = random_symbols(48, 4, Modulation::Qam256, 3);
    let clean = transmit(&x, &ch, 12, f64::INFINITY, 0).unwrap().grid;
    let rx = transmit(&x, &ch, 12, 20.0, 0).unwrap();
    let power = clean.energy() / (48.0 * 16.0);
    assert!((rx.sigma2 - power / 100.0).abs() < 1e-12 * power);
}

#[test]
fn empirical_noise_variance_and_whiteness() {
    // H = I so every subcarrier sees the same unit-power signal
    let n = 4;
    let ch = ChannelRealization::new(vec![ComplexMatrix::identity(n)]).unwrap();
    let n_sc = 10_000;
    let ones = fronthaul::signal::ResourceGrid::new(n_sc, n, vec![Complex64::new(1.0, 0.0); n_sc * n]).unwrap();
    let ch = ChannelRealization::new(vec![ch.rb(0).clone(); n_sc]).unwrap();
    let rx = transmit(&ones, &ch, 1, 10.0, 7).unwrap();
    let noise: Vec<Vec<Complex64>> = (0..n)
        .map(|a| (0..n_sc).map(|sc| rx.grid.get(sc, a) - ones.get(sc, a)).collect())
        .collect();
    for a in 0..n {
        let var = noise[a].iter().map(|z| z.norm_sqr()).sum::<f64>() / n_sc as f64;
        assert!((var / rx.sigma2 - 1.0).abs() < 0.03, "antenna {a}: {var} vs {}", rx.sigma2);
        for b in a + 1..n {
            let c: Complex64 = noise[a].iter().zip(&noise[b]).map(|(x, y)| x * y.conj()).sum();
            assert!(c.norm() / (n_sc as f64 * rx.sigma2) < 0.05);
        }
    }
    // neighbouring subcarriers on one antenna
    let lag: Complex64 = noise[0].windows(2).map(|w| w[0] * w[1].conj()).sum();
    assert!(lag.norm() / (n_sc as f64 * rx.sigma2) < 0.05);
}

#[test]
fn transmit_checks_dimensions() {
    let ch = randsvd_channel(8, 2, 10.0, 2, 1).unwrap();
    let x = random_symbols(24, 3, Modulation::Qpsk, 3);
    assert!(matches!(transmit(&x, &ch, 12, 20.0, 0), Err(SignalError::DimensionMismatch(_))));
    let x = random_symbols(20, 2, Modulation::Qpsk, 3);
    assert!(transmit(&x, &ch, 12, 20.0, 0).is_err());
}

#[test]
fn evm_cases() {
    let x = random_symbols(12, 2, Modulation::Qam64, 1);
    assert_eq!(evm_percent(&x, &x).unwrap(), 0.0);
    assert!((evm_percent(&x.scale(1.01), &x).unwrap() - 1.0).abs() < 1e-10);
    let y = common::random_grid(12, 2, 5);
    let a = evm_percent(&y, &x).unwrap();
    assert!((evm_percent(&y.scale(-3.5), &x.scale(-3.5)).unwrap() - a).abs() < 1e-10);
    assert!(matches!(
        evm_percent(&x, &x.scale(0.0)),
        Err(SignalError::ZeroReference)
    ));
}
