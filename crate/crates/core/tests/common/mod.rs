#![allow(dead_code)]

pub mod lloyd_oracle;

use fronthaul::codec::{codebook, mantissa_scale, MantissaProfile};
use fronthaul::linalg::ComplexMatrix;
use fronthaul::rng::{complex_gaussian, stream, Purpose};
use fronthaul::signal::ResourceGrid;
use num_complex::Complex64;
use rand::Rng;

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = stream(seed, Purpose::MonteCarlo, 0);
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng))
}

pub fn random_grid(n_sc: usize, n_streams: usize, seed: u64) -> ResourceGrid {
    let mut rng = stream(seed, Purpose::MonteCarlo, 1);
    let data = (0..n_sc * n_streams).map(|_| complex_gaussian(&mut rng)).collect();
    ResourceGrid::new(n_sc, n_streams, data).unwrap()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn to_nalgebra(a: &ComplexMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Grid on which the codec is exact: every component is a scaled level of
/// its beam's codebook and each block peak lies in `(2^(e-1), 2^e]`.
pub fn fixed_point_grid(n12: usize, n_rb: usize, profile: &MantissaProfile, seed: u64) -> ResourceGrid {
    let gamma = mantissa_scale(n12);
    let mut rng = stream(seed, Purpose::MonteCarlo, 2);
    let n_beam = profile.n_beam();
    let mut grid = ResourceGrid::zeros(n12 * n_rb, n_beam);
    for (beam, &b) in profile.bits().iter().enumerate() {
        let cb = codebook(u32::from(b));
        let peaks: Vec<usize> = (0..cb.levels.len())
            .filter(|&i| (0.5..=1.0).contains(&(cb.levels[i].abs() * gamma)) && cb.levels[i].abs() * gamma > 0.5)
            .collect();
        let inner: Vec<usize> = (0..cb.levels.len()).filter(|&i| cb.levels[i].abs() * gamma <= 1.0).collect();
        for rb in 0..n_rb {
            if peaks.is_empty() || rng.random_bool(0.2) {
                continue; // all-zero block
            }
            let e: i32 = rng.random_range(-7..=7);
            let s = 2f64.powi(e) * gamma;
            let peak = peaks[rng.random_range(0..peaks.len())];
            let peak_abs = cb.levels[peak].abs();
            let at = rng.random_range(0..2 * n12);
            for k in 0..n12 {
                let mut part = [0.0; 2];
                for (p, v) in part.iter_mut().enumerate() {
                    let idx = if 2 * k + p == at {
                        peak
                    } else {
                        loop {
                            let i = inner[rng.random_range(0..inner.len())];
                            if cb.levels[i].abs() <= peak_abs {
                                break i;
                            }
                        }
                    };
                    *v = cb.levels[idx] * s;
                }
                grid.set(rb * n12 + k, beam, Complex64::new(part[0], part[1]));
            }
        }
    }
    grid
}
