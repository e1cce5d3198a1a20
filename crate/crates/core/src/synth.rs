//! Deterministic synthetic fields and images for tests and benchmarks.
//!
//! Everything here is a pure function of its seed, so fixtures frozen in the
//! test suites stay bit-identical across runs and platforms.

use crate::field::{RasterImage, ScalarField, ValueRange};

/// SplitMix64; tiny, seedable, and stable across platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Random field with values drawn from the lattice k/denominator, k in
/// 0..=denominator. Coarse lattices force plateaus, which is exactly what
/// the persistence edge cases need.
pub fn lattice_field(width: usize, height: usize, denominator: u32, seed: u64) -> ScalarField {
    let mut rng = SplitMix64::new(seed);
    let values: Vec<f64> = (0..width * height)
        .map(|_| rng.next_below(denominator as u64 + 1) as f64 / denominator as f64)
        .collect();
    ScalarField::new(width, height, values, ValueRange::UNIT).expect("lattice values are in [0,1]")
}

/// Random field with all-distinct values (a shuffled permutation of
/// k/(n-1)), so no plateaus exist.
pub fn distinct_field(width: usize, height: usize, seed: u64) -> ScalarField {
    let n = width * height;
    let mut values: Vec<f64> = (0..n)
        .map(|k| k as f64 / (n.max(2) - 1) as f64)
        .collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..n).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
    ScalarField::new(width, height, values, ValueRange::UNIT).expect("permutation is in [0,1]")
}

/// Random 8-bit image, grayscale or RGB.
pub fn random_image(width: usize, height: usize, channels: usize, seed: u64) -> RasterImage {
    let mut rng = SplitMix64::new(seed);
    let samples: Vec<u8> = (0..width * height * channels)
        .map(|_| rng.next_below(256) as u8)
        .collect();
    RasterImage::new(width, height, channels, samples).expect("shape is valid by construction")
}

/// Spike positions of [`blob_spike_field`], ringing the blob's skirt.
pub const BLOB_SPIKE_POSITIONS: [(usize, usize); 10] = [
    (31, 22), (25, 22), (20, 26), (18, 32), (23, 36),
    (27, 41), (32, 36), (36, 41), (41, 37), (45, 32),
];

/// 64x64 benchmark fixture: a two-lobed bright blob on a flat background
/// plus ten isolated single-pixel spikes riding the blob's skirt.
///
/// The lobes (peak 1.0 and a lower shoulder) are wide enough to survive
/// three levels of box-filter downsampling, so both trace clean chains
/// across a 3-level pyramid. The spikes are strict single-pixel maxima at
/// full resolution, but each sits where its 2x2 block mean falls below the
/// uphill skirt block, so they leave no regional maximum one level down.
pub fn blob_spike_field() -> ScalarField {
    const SIZE: usize = 64;
    const BACKGROUND: f64 = 0.1;
    const MAIN: (f64, f64) = (28.0, 31.0);
    const SHOULDER: (f64, f64) = (36.0, 31.0);
    const SIGMA_SQ2: f64 = 32.0; // 2 * sigma^2 with sigma = 4 px
    const SHOULDER_GAIN: f64 = 0.85;
    const SPIKE: f64 = 0.45;

    let lobe = |r: f64, c: f64, center: (f64, f64), gain: f64| -> f64 {
        let d2 = (r - center.0).powi(2) + (c - center.1).powi(2);
        gain * (-d2 / SIGMA_SQ2).exp()
    };
    let mut values = Vec::with_capacity(SIZE * SIZE);
    for row in 0..SIZE {
        for col in 0..SIZE {
            let (r, c) = (row as f64, col as f64);
            let g = lobe(r, c, MAIN, 1.0).max(lobe(r, c, SHOULDER, SHOULDER_GAIN));
            values.push(BACKGROUND + (1.0 - BACKGROUND) * g);
        }
    }
    for &(row, col) in &BLOB_SPIKE_POSITIONS {
        values[row * SIZE + col] = SPIKE;
    }
    ScalarField::new(SIZE, SIZE, values, ValueRange::UNIT).expect("fixture stays in [0,1]")
}

/// Renders a unit-range field as an 8-bit grayscale image.
pub fn field_to_gray_image(field: &ScalarField) -> RasterImage {
    let samples: Vec<u8> = field
        .values()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    RasterImage::new(field.width(), field.height(), 1, samples)
        .expect("image shape mirrors the field")
}
