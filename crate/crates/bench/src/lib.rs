//! Shared inputs for the criterion benchmarks.

use vinepd::field::ScalarField;
use vinepd::synth;

/// Square lattice field at the given edge length, fixed seed per size.
pub fn bench_field(edge: usize) -> ScalarField {
    synth::lattice_field(edge, edge, 255, 0xB5EED ^ edge as u64)
}

/// Random square cost matrix entries in [0, 2).
pub fn bench_costs(n: usize) -> Vec<Vec<f64>> {
    let mut rng = synth::SplitMix64::new(0xC057 ^ n as u64);
    (0..n)
        .map(|_| (0..n).map(|_| rng.next_f64() * 2.0).collect())
        .collect()
}
