//! Raster ingestion, filtration scalar fields, and multi-resolution pyramids.
//!
//! A [`ScalarField`] is the domain of persistence computation: a dense
//! row-major grid of finite filtration values together with a declared
//! value range. The two filtration functions shipped here (channel-mean
//! intensity and normalized Laplacian magnitude) both emit fields on the
//! unit interval so that matching thresholds are comparable across images.

use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Errors raised while decoding images or constructing fields.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cannot read image {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot decode image {path}: {message}")]
    Undecodable { path: String, message: String },
    #[error("unsupported bit depth in {path} (only 8-bit samples are supported)")]
    UnsupportedBitDepth { path: String },
    #[error("unsupported channel layout in {path}: alpha channels are rejected")]
    AlphaChannel { path: String },
    #[error("unsupported channel count {channels} (expected 1 or 3)")]
    BadChannelCount { channels: u32 },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("sample buffer holds {got} values, expected {expected}")]
    BadBufferLength { got: usize, expected: usize },
    #[error("field value at index {index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("field value {value} at index {index} lies outside the declared range [{lo}, {hi}]")]
    ValueOutOfRange {
        value: f64,
        index: usize,
        lo: f64,
        hi: f64,
    },
}

/// Closed interval declared to contain every value of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    /// The unit interval, shared by every filtration output.
    pub const UNIT: ValueRange = ValueRange { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Decoded 8-bit raster image, grayscale or RGB, row-major samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<u8>,
    ) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::InvalidDimensions { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(FieldError::BadChannelCount {
                channels: channels as u32,
            });
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(FieldError::BadBufferLength {
                got: samples.len(),
                expected,
            });
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    /// Channel values of the pixel at (row, col).
    fn pixel(&self, row: usize, col: usize) -> &[u8] {
        let start = (row * self.width + col) * self.channels;
        &self.samples[start..start + self.channels]
    }
}

/// Dense 2D grid of filtration values in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
    value_range: ValueRange,
}

impl ScalarField {
    pub fn new(
        width: usize,
        height: usize,
        values: Vec<f64>,
        value_range: ValueRange,
    ) -> Result<Self, FieldError> {
        if width == 0 || height == 0 {
            return Err(FieldError::InvalidDimensions { width, height });
        }
        if values.len() != width * height {
            return Err(FieldError::BadBufferLength {
                got: values.len(),
                expected: width * height,
            });
        }
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(FieldError::NonFiniteValue { index });
            }
            if !value_range.contains(v) {
                return Err(FieldError::ValueOutOfRange {
                    value: v,
                    index,
                    lo: value_range.lo,
                    hi: value_range.hi,
                });
            }
        }
        Ok(ScalarField {
            width,
            height,
            values,
            value_range,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_range(&self) -> ValueRange {
        self.value_range
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Which filtration function produced a field or diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiltrationKind {
    Intensity,
    Gradient,
}

impl FiltrationKind {
    pub const ALL: [FiltrationKind; 2] = [FiltrationKind::Intensity, FiltrationKind::Gradient];

    pub fn as_str(&self) -> &'static str {
        match self {
            FiltrationKind::Intensity => "intensity",
            FiltrationKind::Gradient => "gradient",
        }
    }

    pub fn parse(s: &str) -> Option<FiltrationKind> {
        match s {
            "intensity" => Some(FiltrationKind::Intensity),
            "gradient" => Some(FiltrationKind::Gradient),
            _ => None,
        }
    }
}

impl fmt::Display for FiltrationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered stack of fields, finest first, each level half the previous.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePyramid {
    levels: Vec<ScalarField>,
    filtration: FiltrationKind,
}

impl ScalePyramid {
    pub fn levels(&self) -> &[ScalarField] {
        &self.levels
    }

    pub fn filtration(&self) -> FiltrationKind {
        self.filtration
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Decodes an 8-bit grayscale or RGB image (PNG or binary PGM).
///
/// Higher bit depths and alpha channels are rejected rather than converted,
/// so the filtration values always derive from the original samples.
pub fn load_image(path: &Path) -> Result<RasterImage, FieldError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| FieldError::Unreadable {
        path: display.clone(),
        source,
    })?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| FieldError::Undecodable {
        path: display.clone(),
        message: e.to_string(),
    })?;
    use image::DynamicImage::*;
    match decoded {
        ImageLuma8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            RasterImage::new(w, h, 1, img.into_raw())
        }
        ImageRgb8(img) => {
            let (w, h) = (img.width() as usize, img.height() as usize);
            RasterImage::new(w, h, 3, img.into_raw())
        }
        ImageLumaA8(_) | ImageRgba8(_) | ImageRgba16(_) | ImageLumaA16(_) | ImageRgba32F(_) => {
            Err(FieldError::AlphaChannel { path: display })
        }
        _ => Err(FieldError::UnsupportedBitDepth { path: display }),
    }
}

/// Per-pixel channel mean scaled to [0, 1].
pub fn intensity_field(img: &RasterImage) -> ScalarField {
    let denom = (img.channels() * 255) as f64;
    let values: Vec<f64> = img
        .samples()
        .chunks_exact(img.channels())
        .map(|px| px.iter().map(|&s| s as f64).sum::<f64>() / denom)
        .collect();
    ScalarField::new(img.width(), img.height(), values, ValueRange::UNIT)
        .expect("intensity values always lie in [0, 1]")
}

/// Raw per-pixel Laplacian magnitude, channel-averaged, before normalization.
///
/// Uses the 4-neighbor stencil (neighbors minus four times the center) with
/// clamp-to-edge padding, so a constant image responds with exact zeros.
fn laplacian_magnitude(img: &RasterImage) -> Vec<f64> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = vec![0.0f64; w * h];
    for row in 0..h {
        for col in 0..w {
            let up = row.saturating_sub(1);
            let down = (row + 1).min(h - 1);
            let left = col.saturating_sub(1);
            let right = (col + 1).min(w - 1);
            let mut acc = 0.0f64;
            for c in 0..ch {
                let center = img.pixel(row, col)[c] as f64;
                let response = img.pixel(up, col)[c] as f64
                    + img.pixel(down, col)[c] as f64
                    + img.pixel(row, left)[c] as f64
                    + img.pixel(row, right)[c] as f64
                    - 4.0 * center;
                acc += response.abs();
            }
            out[row * w + col] = acc / ch as f64;
        }
    }
    out
}

/// Laplacian gradient-magnitude filtration, max-normalized to [0, 1].
///
/// An all-zero response (constant image) is left as zeros instead of
/// dividing by zero.
pub fn gradient_field(img: &RasterImage) -> ScalarField {
    let mut values = laplacian_magnitude(img);
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in values.iter_mut() {
            *v /= max;
        }
    }
    ScalarField::new(img.width(), img.height(), values, ValueRange::UNIT)
        .expect("normalized responses always lie in [0, 1]")
}

/// Halves a field by averaging 2x2 blocks, clipping blocks at odd borders.
///
/// Output dimensions are ceil(w/2) x ceil(h/2) and the declared value range
/// carries over (a block mean cannot leave the range of its inputs).
pub fn downsample(field: &ScalarField) -> ScalarField {
    let (w, h) = (field.width(), field.height());
    let ow = w.div_ceil(2);
    let oh = h.div_ceil(2);
    let mut values = Vec::with_capacity(ow * oh);
    for br in 0..oh {
        for bc in 0..ow {
            let r0 = br * 2;
            let c0 = bc * 2;
            let r1 = (r0 + 2).min(h);
            let c1 = (c0 + 2).min(w);
            let mut sum = 0.0f64;
            for r in r0..r1 {
                for c in c0..c1 {
                    sum += field.get(r, c);
                }
            }
            values.push(sum / ((r1 - r0) * (c1 - c0)) as f64);
        }
    }
    ScalarField::new(ow, oh, values, field.value_range())
        .expect("block means stay inside the source range")
}

/// Builds an `n_levels` pyramid by repeated downsampling, finest first.
///
/// The base field must already be normalized to the unit range; every level
/// of a pyramid shares it.
pub fn build_pyramid(field: &ScalarField, n_levels: usize, tag: FiltrationKind) -> ScalePyramid {
    assert!(n_levels >= 1, "a pyramid needs at least one level");
    assert_eq!(
        field.value_range(),
        ValueRange::UNIT,
        "pyramid levels share the unit value range; normalize the base field first"
    );
    let mut levels = Vec::with_capacity(n_levels);
    levels.push(field.clone());
    for _ in 1..n_levels {
        let next = downsample(levels.last().unwrap());
        levels.push(next);
    }
    ScalePyramid {
        levels,
        filtration: tag,
    }
}
