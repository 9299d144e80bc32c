#![allow(dead_code)]

use std::sync::Arc;

use geoprod::homogeneous::{build_chain_metric, ChainMetric, SubalgebraChain};
use geoprod::liealgebra::{catalog_so, trace_form, AlgebraVector, LieAlgebraBasis};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn metric(n: usize, ks: &[usize], lambdas: &[f64]) -> Arc<ChainMetric> {
    let g = catalog_so(n).unwrap();
    let q = trace_form(&g).unwrap();
    let chain = SubalgebraChain::so_blocks(&g, ks).unwrap();
    Arc::new(build_chain_metric(&chain, &q, lambdas).unwrap())
}

/// Chain metrics covering every catalog shape used in the tests.
pub fn catalog_metrics() -> Vec<Arc<ChainMetric>> {
    vec![
        metric(3, &[0, 2], &[1.0, 2.0]),
        metric(3, &[0, 2], &[1.0, -1.0]),
        metric(4, &[2, 3], &[1.0, 2.0]),
        metric(4, &[2, 3], &[1.0, -1.0]),
        metric(4, &[0, 2, 3], &[0.5, 2.0, 3.0]),
        metric(4, &[0, 2, 3], &[1.0, 2.0, 0.5]),
        metric(5, &[2, 4], &[3.0, 0.7]),
    ]
}

pub fn unit_m_vector<R: Rng>(cm: &ChainMetric, rng: &mut R) -> AlgebraVector {
    loop {
        let c: Vec<f64> = (0..cm.split().dim_m()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return cm.split().m_vector(&c.iter().map(|x| x / n).collect::<Vec<_>>()).unwrap();
        }
    }
}

pub fn random_vector<R: Rng>(g: &Arc<LieAlgebraBasis>, rng: &mut R) -> AlgebraVector {
    AlgebraVector::random(g, rng)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Truncated exponential series, an oracle for small norms.
pub fn exp_series(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..terms {
        term = &term * a / k as f64;
        sum += &term;
    }
    sum
}
