//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use lmcma::cholesky::PairArchive;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense factor rebuilt from the archive's saved paths alone, using a dense
/// solve for each `v` and the textbook closed form for `b`.
pub fn dense_factor(archive: &PairArchive) -> DMatrix<f64> {
    let n = archive.dim();
    let c1 = archive.c1();
    let a = (1.0 - c1).sqrt();
    let mut m = DMatrix::<f64>::identity(n, n);
    for e in archive.entries() {
        let p = DVector::from_column_slice(&e.p);
        let v = m.clone().lu().solve(&p).expect("factor stays invertible");
        let w = v.norm_squared();
        let b = if w > 0.0 {
            a / w * ((1.0 + c1 / (1.0 - c1) * w).sqrt() - 1.0)
        } else {
            0.0
        };
        m = m * a + (&p * v.transpose()) * b;
    }
    m
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Archive with random paths and stamps, usually overflowing capacity so
/// that evictions and suffix rebuilds are exercised.
pub fn random_archive(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PairArchive {
    let c1 = rng.random_range(0.01..0.5);
    let mut archive = PairArchive::new(n, m, c1).unwrap();
    let n_steps = rng.random_range(1..6u64);
    let inserts = rng.random_range(0..=2 * m + 2);
    let mut t = 0u64;
    for _ in 0..inserts {
        t += rng.random_range(1..8u64);
        let scale = rng.random_range(0.1..3.0);
        let p: Vec<f64> = normal_vec(rng, n).into_iter().map(|x| x * scale).collect();
        archive.insert_pair(&p, t, n_steps).unwrap();
    }
    archive
}

pub fn rel_err(got: &[f64], want: &DVector<f64>) -> f64 {
    let diff: f64 = got
        .iter()
        .zip(want.iter())
        .map(|(g, w)| (g - w).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / want.norm().max(1e-300)
}

pub struct OracleReport {
    pub worst_forward: f64,
    pub worst_inverse: f64,
    pub worst_round_trip: f64,
    pub min_det: f64,
}

/// Compares `az`, `ainvz` and their composition with the dense oracle over
/// `count` random archives (n ≤ 16, m ≤ 6).
pub fn oracle_sweep(seed: u64, count: usize) -> OracleReport {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport {
        worst_forward: 0.0,
        worst_inverse: 0.0,
        worst_round_trip: 0.0,
        min_det: f64::INFINITY,
    };
    for _ in 0..count {
        let n = rng.random_range(2..=16);
        let m = rng.random_range(1..=6);
        let archive = random_archive(&mut rng, n, m);
        let dense = dense_factor(&archive);
        let inverse = dense.clone().try_inverse().expect("invertible");
        report.min_det = report.min_det.min(dense.determinant());
        for _ in 0..5 {
            let z = normal_vec(&mut rng, n);
            let zv = DVector::from_column_slice(&z);
            report.worst_forward = report
                .worst_forward
                .max(rel_err(&archive.az(&z).unwrap(), &(&dense * &zv)));
            report.worst_inverse = report.worst_inverse.max(rel_err(
                &archive.ainvz(&z, None).unwrap(),
                &(&inverse * &zv),
            ));
            let back = archive.ainvz(&archive.az(&z).unwrap(), None).unwrap();
            let rt = back
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            report.worst_round_trip = report.worst_round_trip.max(rt);
        }
    }
    report
}
