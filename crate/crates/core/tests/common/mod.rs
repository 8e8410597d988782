//! Shared generators for the randomized suites.

use dagfdr::dag::{build_dag, Dag};
use dagfdr::sim::stream_rng;
use dagfdr::types::PValues;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng_for(label: u64, case: u64) -> ChaCha8Rng {
    stream_rng(0xACCE97 ^ label, case, 0)
}

/// A random DAG: edges always point from a lower to a higher index, so the
/// result is acyclic by construction. Density scales down with size to keep
/// the exact-rational oracle affordable.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, max_m: usize) -> Dag {
    let m = rng.random_range(1..=max_m);
    let density = if m <= 40 {
        rng.random_range(0.02..0.35)
    } else {
        let target_parents = rng.random_range(0.5..3.0);
        (target_parents / m as f64).min(0.2)
    };
    let mut edges = Vec::new();
    for child in 1..m {
        for parent in 0..child {
            if rng.random::<f64>() < density {
                edges.push((parent, child));
            }
        }
    }
    build_dag(m, &edges).expect("forward edges cannot form a cycle")
}

/// A p-value vector with a mix of uniform noise, strong signals, boundary
/// values, and exact ties.
pub fn random_pvalues<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PValues {
    let mut values: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let roll = rng.random::<f64>();
        let value = if roll < 0.25 {
            // strong signal
            rng.random::<f64>().powi(4) * 0.1
        } else if roll < 0.30 && i > 0 {
            // exact tie with an earlier entry
            values[rng.random_range(0..i)]
        } else if roll < 0.33 {
            if rng.random::<bool>() {
                0.0
            } else {
                1.0
            }
        } else {
            rng.random::<f64>()
        };
        values.push(value);
    }
    PValues::new(values).expect("generated values are in range")
}
