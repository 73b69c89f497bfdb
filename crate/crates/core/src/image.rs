//! Recovery of erased pixels by blockwise trigonometric interpolation.
//!
//! Every row is cut into blocks of `B` pixels. Inside a block the known pixels
//! become nodes `t = 2πj/B` of one period and the missing ones are read off the
//! GN1 or GN2 interpolant. Rows and columns are processed separately, averaged,
//! clamped to 8 bits and cleaned up by the CRT extremum correction.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generic::{gn1_reconstruct, gn2_basis, GenericGrid};
use crate::pgm::{self, Raster};
use crate::spectral::SpectralSupport;

pub const DEFAULT_BLOCK: usize = 8;
pub const DEFAULT_CRT_ITERS: usize = 8;

/// Grayscale image, row-major. Values are reals while processing and 8-bit on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("image dimensions must be positive".into()));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch { expected: width * height, got: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (y, x)))
            .map(|(y, x)| f(y, x))
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn transpose(&self) -> Self {
        let data = (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| (y, x)))
            .map(|(y, x)| self.get(y, x))
            .collect();
        Self { width: self.height, height: self.width, data }
    }

    /// Every pixel passed through [`clamp_intensity`].
    pub fn clamped(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| clamp_intensity(v)).collect(),
        }
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn from_raster(r: &Raster) -> Result<Self> {
        Self::new(r.width, r.height, r.pixels.iter().map(|&p| p as f64).collect())
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.data.iter().map(|&v| clamp_intensity(v) as u8).collect(),
        }
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        Self::from_raster(&pgm::read(path)?)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        pgm::write(path, &self.to_raster())
    }
}

/// `true` marks a missing pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DamageMask {
    width: usize,
    height: usize,
    missing: Vec<bool>,
}

impl DamageMask {
    pub fn new(width: usize, height: usize, missing: Vec<bool>) -> Result<Self> {
        if missing.len() != width * height {
            return Err(Error::LengthMismatch { expected: width * height, got: missing.len() });
        }
        Ok(Self { width, height, missing })
    }

    pub fn none(width: usize, height: usize) -> Self {
        Self { width, height, missing: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn is_missing(&self, y: usize, x: usize) -> bool {
        self.missing[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn fits(&self, img: &GrayImage) -> bool {
        self.width == img.width && self.height == img.height
    }

    pub fn transpose(&self) -> Self {
        let missing = (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| (y, x)))
            .map(|(y, x)| self.is_missing(y, x))
            .collect();
        Self { width: self.height, height: self.width, missing }
    }

    /// 0 = known, 255 = missing; anything else is rejected.
    pub fn from_raster(r: &Raster) -> Result<Self> {
        let missing = r
            .pixels
            .iter()
            .map(|&p| match p {
                0 => Ok(false),
                255 => Ok(true),
                v => Err(Error::Parse(format!("mask value {v} is neither 0 nor 255"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(r.width, r.height, missing)
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.missing.iter().map(|&m| if m { 255 } else { 0 }).collect(),
        }
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        Self::from_raster(&pgm::read(path)?)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        pgm::write(path, &self.to_raster())
    }
}

/// Erase `round(fraction · L₁L₂)` pixels drawn without replacement; erased pixels read 0.
pub fn degrade(img: &GrayImage, fraction: f64, seed: u64) -> Result<(GrayImage, DamageMask)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!("damage fraction {fraction} outside [0, 1)")));
    }
    let n = img.len();
    let count = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = DamageMask::none(img.width, img.height);
    let mut out = img.clone();
    for i in index::sample(&mut rng, n, count) {
        mask.missing[i] = true;
        out.data[i] = 0.0;
    }
    Ok((out, mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Gn1,
    Gn2,
}

/// Where GN2 gets its derivative samples from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DerivativeSource {
    /// Central difference of the nearest known neighbours inside the block, one-sided at its edges.
    #[default]
    Estimate,
    /// Central differences of an undamaged image of the same shape.
    Reference(GrayImage),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub block_size: usize,
    pub formula: Formula,
    pub crt_max_iters: usize,
    pub derivative: DerivativeSource,
    /// Median of the known neighbours at erased pixels instead of the plain 3×3 median.
    pub mask_aware_median: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK,
            formula: Formula::Gn1,
            crt_max_iters: DEFAULT_CRT_ITERS,
            derivative: DerivativeSource::Estimate,
            mask_aware_median: false,
        }
    }
}

impl RecoveryConfig {
    fn validate(&self, img: &GrayImage, mask: &DamageMask) -> Result<()> {
        if self.block_size < 2 {
            return Err(Error::InvalidConfig(format!("block size {} < 2", self.block_size)));
        }
        if !mask.fits(img) {
            return Err(Error::InvalidConfig("mask and image shapes differ".into()));
        }
        if let DerivativeSource::Reference(r) = &self.derivative {
            if !r.same_shape(img) {
                return Err(Error::InvalidConfig("derivative reference shape differs".into()));
            }
        }
        Ok(())
    }
}

/// Interpolated image (not clamped) and the number of blocks that fell back to nearest fill.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    pub image: GrayImage,
    pub fallback_blocks: usize,
}

/// Blocks of `b` pixels; a short tail is merged into the last full block.
fn block_ranges(len: usize, b: usize) -> Vec<Range<usize>> {
    let nb = (len / b).max(1);
    (0..nb)
        .map(|i| i * b..if i + 1 == nb { len } else { (i + 1) * b })
        .collect()
}

fn estimate_slope(line: &[f64], known: &[bool], block: &Range<usize>, j: usize) -> f64 {
    let left = (block.start..j).rev().find(|&l| known[l]);
    let right = (j + 1..block.end).find(|&r| known[r]);
    match (left, right) {
        (Some(l), Some(r)) => (line[r] - line[l]) / (r - l) as f64,
        (Some(l), None) => (line[j] - line[l]) / (j - l) as f64,
        (None, Some(r)) => (line[r] - line[j]) / (r - j) as f64,
        (None, None) => 0.0,
    }
}

fn reference_slope(line: &[f64], j: usize) -> f64 {
    let n = line.len();
    if n < 2 {
        0.0
    } else if j == 0 {
        line[1] - line[0]
    } else if j == n - 1 {
        line[n - 1] - line[n - 2]
    } else {
        (line[j + 1] - line[j - 1]) / 2.0
    }
}

fn nearest_known(known: &[bool], j: usize) -> Option<usize> {
    (0..known.len())
        .filter(|&k| known[k])
        .min_by_key(|&k| k.abs_diff(j))
}

fn interpolate_line(
    line: &[f64],
    known: &[bool],
    formula: Formula,
    b: usize,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, usize)> {
    let mut out = line.to_vec();
    let mut fallbacks = 0;
    for block in block_ranges(line.len(), b) {
        let miss: Vec<usize> = block.clone().filter(|&j| !known[j]).collect();
        if miss.is_empty() {
            continue;
        }
        let pos: Vec<usize> = block.clone().filter(|&j| known[j]).collect();
        if pos.len() < 2 {
            fallbacks += 1;
            for &j in &miss {
                out[j] = nearest_known(known, j).map_or(0.0, |k| line[k]);
            }
            continue;
        }
        let m = pos.len();
        let dt = TAU / block.len() as f64;
        let node = |j: usize| dt * (j - block.start) as f64;
        let grid = GenericGrid::new(pos.iter().map(|&j| node(j)).collect())?;
        let values: Vec<Complex64> = pos.iter().map(|&j| Complex64::new(line[j], 0.0)).collect();
        let poly = match formula {
            Formula::Gn1 => {
                let support = SpectralSupport::with_len(-((m / 2) as i64), m)?;
                gn1_reconstruct(&grid, support, &values)?
            }
            Formula::Gn2 => {
                let derivs: Vec<Complex64> = pos
                    .iter()
                    .map(|&j| {
                        let per_pixel = match reference {
                            Some(r) => reference_slope(r, j),
                            None => estimate_slope(line, known, &block, j),
                        };
                        Complex64::new(per_pixel / dt, 0.0)
                    })
                    .collect();
                gn2_basis(&grid, 1 - m as i64)?.reconstruct(&values, &derivs)?
            }
        };
        for &j in &miss {
            out[j] = poly.eval(node(j)).re;
        }
    }
    Ok((out, fallbacks))
}

fn interpolate_rows_with(
    img: &GrayImage,
    mask: &DamageMask,
    formula: Formula,
    b: usize,
    reference: Option<&GrayImage>,
) -> Result<Interpolated> {
    let w = img.width;
    let rows = (0..img.height)
        .into_par_iter()
        .map(|y| {
            let known: Vec<bool> = mask.missing[y * w..(y + 1) * w].iter().map(|&m| !m).collect();
            interpolate_line(img.row(y), &known, formula, b, reference.map(|r| r.row(y)))
        })
        .collect::<Result<Vec<_>>>()?;
    let fallback_blocks = rows.iter().map(|r| r.1).sum();
    let data = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(Interpolated { image: GrayImage::new(w, img.height, data)?, fallback_blocks })
}

fn reference_of(cfg: &RecoveryConfig) -> Option<&GrayImage> {
    match &cfg.derivative {
        DerivativeSource::Reference(r) => Some(r),
        DerivativeSource::Estimate => None,
    }
}

/// Fill erased pixels row by row. Known pixels are returned unchanged.
pub fn interpolate_rows(img: &GrayImage, mask: &DamageMask, cfg: &RecoveryConfig) -> Result<Interpolated> {
    cfg.validate(img, mask)?;
    interpolate_rows_with(img, mask, cfg.formula, cfg.block_size, reference_of(cfg))
}

/// Column counterpart of [`interpolate_rows`].
pub fn interpolate_cols(img: &GrayImage, mask: &DamageMask, cfg: &RecoveryConfig) -> Result<Interpolated> {
    cfg.validate(img, mask)?;
    let reference = reference_of(cfg).map(GrayImage::transpose);
    let t = interpolate_rows_with(
        &img.transpose(),
        &mask.transpose(),
        cfg.formula,
        cfg.block_size,
        reference.as_ref(),
    )?;
    Ok(Interpolated { image: t.image.transpose(), fallback_blocks: t.fallback_blocks })
}

/// `Z`: saturate at 0 and 255, otherwise round half away from zero.
pub fn clamp_intensity(v: f64) -> f64 {
    if v >= 255.0 {
        255.0
    } else if v <= 0.0 {
        0.0
    } else {
        v.round()
    }
}

pub fn fuse_and_clamp(rows: &GrayImage, cols: &GrayImage) -> Result<GrayImage> {
    if !rows.same_shape(cols) {
        return Err(Error::InvalidConfig("row and column results differ in shape".into()));
    }
    let data = rows
        .data
        .iter()
        .zip(&cols.data)
        .map(|(a, b)| clamp_intensity((a + b) / 2.0))
        .collect();
    GrayImage::new(rows.width, rows.height, data)
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Extremes over the 3×3 window under replicate padding, leaving out every
/// padded copy of the centre itself. Otherwise a border pixel would always
/// count as its own neighbour and could never be corrected.
fn neighbour_range(img: &GrayImage, y: usize, x: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            let yy = clamp_index(y as isize + dy, img.height);
            let xx = clamp_index(x as isize + dx, img.width);
            if (yy, xx) != (y, x) {
                let v = img.get(yy, xx);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (lo, hi)
}

fn crt_pass(img: &GrayImage) -> GrayImage {
    let data = (0..img.height)
        .into_par_iter()
        .flat_map_iter(|y| {
            (0..img.width).map(move |x| {
                let v = img.get(y, x);
                let (lo, hi) = neighbour_range(img, y, x);
                match (v >= hi, v <= lo) {
                    (true, false) => hi,
                    (false, true) => lo,
                    _ => v,
                }
            })
        })
        .collect();
    GrayImage { width: img.width, height: img.height, data }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrtOutcome {
    pub image: GrayImage,
    /// Passes that changed at least one pixel.
    pub iterations: usize,
    /// Whether the returned image is a fixpoint.
    pub converged: bool,
}

/// Replace every local extremum by the extreme value of its neighbours, simultaneously,
/// until nothing changes or `max_iters` passes have run.
pub fn crt_correct(img: &GrayImage, max_iters: usize) -> CrtOutcome {
    let mut cur = img.clone();
    for it in 0..max_iters {
        let next = crt_pass(&cur);
        if next == cur {
            return CrtOutcome { image: cur, iterations: it, converged: true };
        }
        cur = next;
    }
    let converged = crt_pass(&cur) == cur;
    CrtOutcome { image: cur, iterations: max_iters, converged }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// 3×3 median with replicate padding. With a mask only erased pixels are touched,
/// and each takes the median of its known neighbours (the full window if there are none).
pub fn median_filter(img: &GrayImage, mask: Option<&DamageMask>) -> Result<GrayImage> {
    if let Some(m) = mask {
        if !m.fits(img) {
            return Err(Error::InvalidConfig("mask and image shapes differ".into()));
        }
    }
    let data = (0..img.height)
        .into_par_iter()
        .flat_map_iter(|y| {
            (0..img.width).map(move |x| {
                let mut window = Vec::with_capacity(9);
                let mut known = Vec::with_capacity(9);
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let yy = clamp_index(y as isize + dy, img.height);
                        let xx = clamp_index(x as isize + dx, img.width);
                        let v = img.get(yy, xx);
                        window.push(v);
                        if mask.is_some_and(|m| !m.is_missing(yy, xx)) {
                            known.push(v);
                        }
                    }
                }
                match mask {
                    None => median(&mut window),
                    Some(m) if !m.is_missing(y, x) => img.get(y, x),
                    Some(_) if known.is_empty() => median(&mut window),
                    Some(_) => median(&mut known),
                }
            })
        })
        .collect();
    GrayImage::new(img.width, img.height, data)
}

/// Peak signal-to-noise ratio in dB, or a marker for identical images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Identical,
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v:.4}"),
            Psnr::Identical => f.write_str("identical"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Relative Frobenius error.
    pub delta: f64,
    pub psnr: Psnr,
    /// Correlation coefficient.
    pub cc: f64,
}

pub fn metrics(reference: &GrayImage, rec: &GrayImage) -> Result<Metrics> {
    if !reference.same_shape(rec) {
        return Err(Error::InvalidConfig("image shapes differ".into()));
    }
    let n = reference.len() as f64;
    let energy: f64 = reference.data.iter().map(|v| v * v).sum();
    let sse: f64 = reference.data.iter().zip(&rec.data).map(|(a, b)| (a - b) * (a - b)).sum();
    if energy == 0.0 {
        return Err(Error::InvalidConfig("reference image is all zero".into()));
    }
    let delta = (sse / energy).sqrt();
    let psnr = if sse == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Finite(10.0 * (255.0 * 255.0 * n / sse).log10())
    };
    let ma = reference.data.iter().sum::<f64>() / n;
    let mb = rec.data.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in reference.data.iter().zip(&rec.data) {
        let (da, db) = (a - ma, b - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let cc = (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0);
    Ok(Metrics { delta, psnr, cc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gn1Crt,
    Gn2Crt,
    MedCrt,
    CrtMed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gn1Crt, Method::Gn2Crt, Method::MedCrt, Method::CrtMed];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Gn1Crt => "gn1crt",
            Method::Gn2Crt => "gn2crt",
            Method::MedCrt => "medcrt",
            Method::CrtMed => "crtmed",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Gn1Crt => "GN1+CRT",
            Method::Gn2Crt => "GN2+CRT",
            Method::MedCrt => "MED+CRT",
            Method::CrtMed => "CRT+MED",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub method: Method,
    pub metrics: Option<Metrics>,
    pub crt_iters: usize,
    pub crt_converged: bool,
    pub fallback_blocks: usize,
    /// Wall time per stage in seconds.
    pub stages: Vec<(&'static str, f64)>,
    pub seconds: f64,
}

impl RecoveryReport {
    pub const HEADER: [&'static str; 7] = ["method", "delta", "psnr", "cc", "crt_iters", "fallback_blocks", "seconds"];

    pub fn fields(&self) -> [String; 7] {
        let (delta, psnr, cc) = match &self.metrics {
            Some(m) => (format!("{:.6}", m.delta), m.psnr.to_string(), format!("{:.6}", m.cc)),
            None => (String::new(), String::new(), String::new()),
        };
        [
            self.method.name().to_string(),
            delta,
            psnr,
            cc,
            self.crt_iters.to_string(),
            self.fallback_blocks.to_string(),
            format!("{:.3}", self.seconds),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub image: GrayImage,
    /// Output of the stage before the final CRT pass (GN pipelines only).
    pub before_crt: Option<GrayImage>,
    pub report: RecoveryReport,
}

fn timed<T>(stages: &mut Vec<(&'static str, f64)>, name: &'static str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    stages.push((name, start.elapsed().as_secs_f64()));
    out
}

/// Run one of the four pipelines on a damaged image. Metrics are filled in when
/// the undamaged `reference` is given.
pub fn recover(
    img: &GrayImage,
    mask: &DamageMask,
    method: Method,
    cfg: &RecoveryConfig,
    reference: Option<&GrayImage>,
) -> Result<Recovery> {
    cfg.validate(img, mask)?;
    if let Some(r) = reference {
        if !r.same_shape(img) {
            return Err(Error::InvalidConfig("reference shape differs".into()));
        }
    }
    let start = Instant::now();
    let mut stages = Vec::new();
    let mut fallback_blocks = 0;
    let mut before_crt = None;
    let (image, crt) = match method {
        Method::Gn1Crt | Method::Gn2Crt => {
            let cfg = RecoveryConfig {
                formula: if method == Method::Gn1Crt { Formula::Gn1 } else { Formula::Gn2 },
                ..cfg.clone()
            };
            let rows = timed(&mut stages, "rows", || interpolate_rows(img, mask, &cfg))?;
            let cols = timed(&mut stages, "cols", || interpolate_cols(img, mask, &cfg))?;
            fallback_blocks = rows.fallback_blocks + cols.fallback_blocks;
            let fused = timed(&mut stages, "fuse", || fuse_and_clamp(&rows.image, &cols.image))?;
            let crt = timed(&mut stages, "crt", || crt_correct(&fused, cfg.crt_max_iters));
            before_crt = Some(fused);
            (crt.image.clone(), crt)
        }
        Method::MedCrt => {
            let m = cfg.mask_aware_median.then_some(mask);
            let med = timed(&mut stages, "median", || median_filter(img, m))?.clamped();
            let crt = timed(&mut stages, "crt", || crt_correct(&med, cfg.crt_max_iters));
            (crt.image.clone(), crt)
        }
        Method::CrtMed => {
            let crt = timed(&mut stages, "crt", || crt_correct(img, cfg.crt_max_iters));
            let m = cfg.mask_aware_median.then_some(mask);
            let med = timed(&mut stages, "median", || median_filter(&crt.image, m))?.clamped();
            (med, crt)
        }
    };
    let metrics = reference.map(|r| metrics(r, &image)).transpose()?;
    let report = RecoveryReport {
        method,
        metrics,
        crt_iters: crt.iterations,
        crt_converged: crt.converged,
        fallback_blocks,
        stages,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Recovery { image, before_crt, report })
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// Deterministic synthetic scene: smooth ramps and cloud texture, soft discs,
/// sharp rectangles and a patch of fine diagonal stripes.
pub fn test_image(size: usize, seed: u64) -> Result<GrayImage> {
    if size == 0 {
        return Err(Error::InvalidConfig("image size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = size as f64;
    let freq = Normal::new(0.0, 6.0).expect("valid normal");
    let waves: Vec<(f64, f64, f64, f64)> = (0..40)
        .map(|_| {
            let (fx, fy): (f64, f64) = (freq.sample(&mut rng), freq.sample(&mut rng));
            let ph = rng.gen_range(0.0..TAU);
            (fx, fy, ph, 12.0 / (1.0 + fx.hypot(fy) / 3.0))
        })
        .collect();
    let discs: Vec<(f64, f64, f64, f64)> = (0..10)
        .map(|_| {
            (
                rng.gen_range(0.1..0.9),
                rng.gen_range(0.1..0.9),
                rng.gen_range(0.04..0.2),
                rng.gen_range(-70.0..70.0),
            )
        })
        .collect();
    let rects: Vec<(f64, f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.0..0.8),
                rng.gen_range(0.0..0.8),
                rng.gen_range(0.05..0.25),
                rng.gen_range(0.05..0.25),
                rng.gen_range(-50.0..50.0),
            )
        })
        .collect();
    GrayImage::from_fn(size, size, |yi, xi| {
        let (x, y) = (xi as f64 / l, yi as f64 / l);
        let mut v = 90.0 + 60.0 * x + 30.0 * (TAU * (0.8 * y + 0.2 * x)).sin();
        for &(fx, fy, ph, amp) in &waves {
            v += amp * (TAU * (fx * x + fy * y) + ph).sin();
        }
        for &(cx, cy, r, a) in &discs {
            v += a * logistic(((x - cx).hypot(y - cy) - r) * l / 1.2);
        }
        for &(x0, y0, w, h, a) in &rects {
            let inside = logistic(-(x - x0) * l)
                * logistic((x - x0 - w) * l)
                * logistic(-(y - y0) * l)
                * logistic((y - y0 - h) * l);
            v += a * inside;
        }
        let patch = (-((x - 0.25).powi(2) + (y - 0.75).powi(2)) / 0.01).exp();
        v += 25.0 * patch * (TAU * 20.0 * (x + y)).sin();
        clamp_intensity(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(formula: Formula) -> RecoveryConfig {
        RecoveryConfig { formula, ..RecoveryConfig::default() }
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_intensity(300.0), 255.0);
        assert_eq!(clamp_intensity(-4.0), 0.0);
        assert_eq!(clamp_intensity(127.5), 128.0);
        assert_eq!(clamp_intensity(127.49), 127.0);
    }

    #[test]
    fn fuse_means_then_clamps() {
        let a = GrayImage::new(2, 1, vec![100.0, 300.0]).unwrap();
        let b = GrayImage::new(2, 1, vec![200.0, 400.0]).unwrap();
        assert_eq!(fuse_and_clamp(&a, &b).unwrap().data(), &[150.0, 255.0]);
        assert_eq!(fuse_and_clamp(&a, &a).unwrap(), a.clamped());
    }

    #[test]
    fn degrade_counts_and_determinism() {
        let img = GrayImage::from_fn(256, 256, |y, x| ((x + y) % 200 + 20) as f64).unwrap();
        let (d, m) = degrade(&img, 0.435, 9).unwrap();
        assert_eq!(m.count(), 28508);
        let (d2, m2) = degrade(&img, 0.435, 9).unwrap();
        assert_eq!((d, m.clone()), (d2, m2));
        let (same, empty) = degrade(&img, 0.0, 9).unwrap();
        assert_eq!((same, empty.count()), (img.clone(), 0));
        assert!(degrade(&img, 1.5, 0).is_err());
    }

    #[test]
    fn block_ranges_merge_tail() {
        assert_eq!(block_ranges(16, 8), vec![0..8, 8..16]);
        assert_eq!(block_ranges(19, 8), vec![0..8, 8..19]);
        assert_eq!(block_ranges(5, 8), vec![0..5]);
    }

    #[test]
    fn cosine_block_recovered_exactly() {
        // One spatial cosine per 8-pixel period sits inside both bands.
        let img = GrayImage::from_fn(16, 3, |_, x| 120.0 + 40.0 * (TAU * x as f64 / 8.0).cos()).unwrap();
        let mut missing = vec![false; 48];
        missing[3] = true;
        missing[16 + 13] = true;
        let mask = DamageMask::new(16, 3, missing).unwrap();
        let mut damaged = img.clone();
        damaged.set(0, 3, 0.0);
        damaged.set(1, 13, 0.0);
        {
            let c = cfg(Formula::Gn1);
            let out = interpolate_rows(&damaged, &mask, &c).unwrap();
            let cols = interpolate_cols(&damaged.transpose(), &mask.transpose(), &c).unwrap();
            assert_eq!(cols.image, out.image.transpose());
            assert!((out.image.get(0, 3) - img.get(0, 3)).abs() < 1e-9);
            assert!((out.image.get(1, 13) - img.get(1, 13)).abs() < 1e-9);
            assert_eq!(out.fallback_blocks, 0);
        }
    }

    #[test]
    fn gn2_exact_with_true_derivatives() {
        let f = |x: f64| 90.0 + 30.0 * (TAU * x / 8.0).sin() + 10.0 * (TAU * 2.0 * x / 8.0).cos();
        let df = |x: f64| 30.0 * (TAU * x / 8.0).cos() - 20.0 * (TAU * 2.0 * x / 8.0).sin();
        let line: Vec<f64> = (0..8).map(|x| f(x as f64)).collect();
        let known = [true, false, true, true, false, true, false, true];
        let b = 0..8;
        let pos: Vec<usize> = b.clone().filter(|&j| known[j]).collect();
        let grid = GenericGrid::new(pos.iter().map(|&j| TAU * j as f64 / 8.0).collect()).unwrap();
        let vals: Vec<Complex64> = pos.iter().map(|&j| line[j].into()).collect();
        let ders: Vec<Complex64> = pos.iter().map(|&j| df(j as f64).into()).collect();
        let poly = gn2_basis(&grid, 1 - pos.len() as i64).unwrap().reconstruct(&vals, &ders).unwrap();
        for j in [1usize, 4, 6] {
            assert!((poly.eval(TAU * j as f64 / 8.0).re - line[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_and_known_blocks() {
        let img = GrayImage::from_fn(8, 8, |_, _| 77.0).unwrap();
        let mask = DamageMask::new(8, 8, (0..64).map(|i| i % 3 == 1).collect()).unwrap();
        let mut damaged = img.clone();
        for i in 0..64 {
            if i % 3 == 1 {
                damaged.data[i] = 0.0;
            }
        }
        for f in [Formula::Gn1, Formula::Gn2] {
            let r = interpolate_rows(&damaged, &mask, &cfg(f)).unwrap();
            assert!(r.image.data().iter().all(|v| (v - 77.0).abs() < 1e-9));
            let c = interpolate_cols(&damaged, &mask, &cfg(f)).unwrap();
            assert!(c.image.data().iter().all(|v| (v - 77.0).abs() < 1e-9));
        }
        let scene = test_image(32, 1).unwrap();
        let none = DamageMask::none(32, 32);
        for f in [Formula::Gn1, Formula::Gn2] {
            assert_eq!(interpolate_rows(&scene, &none, &cfg(f)).unwrap().image, scene);
            assert_eq!(interpolate_cols(&scene, &none, &cfg(f)).unwrap().image, scene);
        }
    }

    #[test]
    fn sparse_blocks_fall_back() {
        let img = GrayImage::new(8, 1, vec![10.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let mask = DamageMask::new(8, 1, (0..8).map(|i| i != 0).collect()).unwrap();
        let r = interpolate_rows(&img, &mask, &cfg(Formula::Gn1)).unwrap();
        assert_eq!(r.fallback_blocks, 1);
        assert!(r.image.data().iter().all(|&v| v == 10.0));
    }

    #[test]
    fn known_pixels_untouched() {
        let scene = test_image(64, 3).unwrap();
        let (damaged, mask) = degrade(&scene, 0.4, 5).unwrap();
        for f in [Formula::Gn1, Formula::Gn2] {
            let r = interpolate_rows(&damaged, &mask, &cfg(f)).unwrap();
            for (i, &m) in mask.missing().iter().enumerate() {
                if !m {
                    assert_eq!(r.image.data()[i], scene.data()[i]);
                }
            }
        }
    }

    #[test]
    fn crt_examples() {
        let flat = GrayImage::from_fn(5, 5, |_, _| 100.0).unwrap();
        let out = crt_correct(&flat, 8);
        assert_eq!((out.image, out.iterations, out.converged), (flat.clone(), 0, true));
        let mut salt = flat.clone();
        salt.set(2, 2, 255.0);
        let out = crt_correct(&salt, 8);
        assert_eq!(out.image, flat);
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        let mut corner = flat.clone();
        corner.set(0, 0, 0.0);
        assert_eq!(crt_correct(&corner, 8).image, flat);
    }

    #[test]
    fn crt_reports_non_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let img = GrayImage::from_fn(16, 16, |_, _| rng.gen_range(0..256) as f64).unwrap();
        let out = crt_correct(&img, 0);
        assert_eq!((out.iterations, out.converged), (0, false));
        let out = crt_correct(&img, 8);
        assert!(out.converged && out.iterations >= 1);
    }

    #[test]
    fn median_examples() {
        let flat = GrayImage::from_fn(6, 5, |_, _| 42.0).unwrap();
        assert_eq!(median_filter(&flat, None).unwrap(), flat);
        let mut imp = flat.clone();
        imp.set(2, 3, 0.0);
        assert_eq!(median_filter(&imp, None).unwrap(), flat);
        let mask = DamageMask::new(6, 5, (0..30).map(|i| i == 2 * 6 + 3).collect()).unwrap();
        assert_eq!(median_filter(&imp, Some(&mask)).unwrap(), flat);
    }

    #[test]
    fn mask_aware_median_ignores_erased() {
        let img = GrayImage::new(3, 1, vec![10.0, 0.0, 0.0]).unwrap();
        let mask = DamageMask::new(3, 1, vec![false, true, true]).unwrap();
        let out = median_filter(&img, Some(&mask)).unwrap();
        assert_eq!(out.data(), &[10.0, 10.0, 0.0]);
    }

    #[test]
    fn metric_examples() {
        let g = GrayImage::from_fn(16, 16, |y, x| (x * 8 + y) as f64).unwrap();
        let m = metrics(&g, &g).unwrap();
        assert_eq!((m.delta, m.psnr, m.cc), (0.0, Psnr::Identical, 1.0));
        let inv = GrayImage::from_fn(16, 16, |y, x| 255.0 - g.get(y, x)).unwrap();
        assert!((metrics(&g, &inv).unwrap().cc + 1.0).abs() < 1e-12);
        let flat = GrayImage::from_fn(16, 16, |_, _| 5.0).unwrap();
        assert_eq!(metrics(&g, &flat).unwrap_err(), Error::ZeroVariance);
        let mut one = g.clone();
        one.set(0, 0, g.get(0, 0) + 255.0);
        let Psnr::Finite(p) = metrics(&g, &one).unwrap().psnr else { panic!() };
        assert!((p - 10.0 * 256f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("gn3".parse::<Method>().is_err());
    }

    #[test]
    fn undamaged_gn_pipeline_is_identity_before_crt() {
        let scene = test_image(32, 2).unwrap();
        let none = DamageMask::none(32, 32);
        let r = recover(&scene, &none, Method::Gn2Crt, &RecoveryConfig::default(), Some(&scene)).unwrap();
        assert_eq!(r.before_crt.unwrap(), scene);
        assert_eq!(r.report.fallback_blocks, 0);
    }

    #[test]
    fn mask_roundtrip_and_strictness() {
        let m = DamageMask::new(3, 2, vec![true, false, false, true, true, false]).unwrap();
        assert_eq!(DamageMask::from_raster(&m.to_raster()).unwrap(), m);
        let bad = Raster { width: 1, height: 1, pixels: vec![7] };
        assert!(DamageMask::from_raster(&bad).is_err());
    }

    #[test]
    fn test_image_is_deterministic_and_8bit() {
        let a = test_image(64, 5).unwrap();
        assert_eq!(a, test_image(64, 5).unwrap());
        assert!(a.data().iter().all(|&v| (0.0..=255.0).contains(&v) && v.fract() == 0.0));
    }
}
