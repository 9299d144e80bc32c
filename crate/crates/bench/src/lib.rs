//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use geoprod::homogeneous::{build_chain_metric, ChainMetric, SubalgebraChain};
use geoprod::liealgebra::{catalog_so, trace_form, AlgebraVector};

/// Chain metric on `SO(n)` with lower-right blocks `ks` (0 is the trivial level).
pub fn chain_metric(n: usize, ks: &[usize], lambdas: &[f64]) -> Arc<ChainMetric> {
    let g = catalog_so(n).expect("catalog group");
    let q = trace_form(&g).expect("trace form");
    let chain = SubalgebraChain::so_blocks(&g, ks).expect("valid chain");
    Arc::new(build_chain_metric(&chain, &q, lambdas).expect("valid metric"))
}

/// `SO(4)/{e}` with a three-step chain.
pub fn so4_three_step() -> Arc<ChainMetric> {
    chain_metric(4, &[0, 2, 3], &[0.5, 2.0, 3.0])
}

/// Fixed unit velocity with every m-coordinate nonzero.
pub fn spread_velocity(cm: &ChainMetric) -> AlgebraVector {
    let d = cm.split().dim_m();
    let c: Vec<f64> = (0..d).map(|i| 1.0 + 0.25 * i as f64).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    cm.split().m_vector(&c.iter().map(|x| x / norm).collect::<Vec<_>>()).expect("m vector")
}
