//! Hypervector algebra.
//!
//! Two representations are used throughout the crate: real-valued
//! [`Hypervector`]s (classifier rows, HRR keys, compressed classifiers) and
//! [`BipolarHypervector`]s with entries in `{-1, +1}` (the random input
//! projection and thermometer codes).
//!
//! Binding comes in two flavours: element-wise multiplication for bipolar
//! vectors and circular convolution for real vectors. Circular convolution is
//! computed in the frequency domain for all but tiny dimensions.

use std::cell::RefCell;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::{Error, Result, SeedSpec};

/// Spectral components at or below this magnitude make a key non-invertible.
pub const SINGULAR_SPECTRUM_EPS: f64 = 1e-12;

/// Below this dimensionality the direct O(D^2) sum is cheaper than the FFT.
const DIRECT_CONVOLUTION_MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypervector(Vec<f64>);

impl Hypervector {
    /// Wraps `values`; rejects empty vectors and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "hypervector must have D >= 1".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hypervector entry {i} is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    /// The convolution identity `[1, 0, ..., 0]`.
    pub fn delta(dim: usize) -> Result<Self> {
        let mut v = vec![0.0; dim];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }
}

impl From<&BipolarHypervector> for Hypervector {
    fn from(b: &BipolarHypervector) -> Self {
        Self(b.0.iter().map(|&v| f64::from(v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipolarHypervector(Vec<i8>);

impl BipolarHypervector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "hypervector must have D >= 1".into(),
            ));
        }
        if let Some(i) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidParameter(format!(
                "bipolar entry {i} is {} (expected -1 or +1)",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_raw(values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|&v| v == 1 || v == -1));
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_kappa(kappa: u32) -> Result<()> {
    if kappa < 1 {
        return Err(Error::InvalidParameter("kappa must be >= 1".into()));
    }
    Ok(())
}

/// Saturating nonlinearity bounding every entry to `[-kappa, kappa]`.
pub fn clip(v: &Hypervector, kappa: u32) -> Result<Hypervector> {
    check_kappa(kappa)?;
    let k = f64::from(kappa);
    Ok(Hypervector(v.0.iter().map(|&x| clip_value(x, k)).collect()))
}

pub(crate) fn clip_value(x: f64, kappa: f64) -> f64 {
    if x <= -kappa {
        -kappa
    } else if x >= kappa {
        kappa
    } else {
        x
    }
}

/// Integer variant used by the hidden layer, where pre-activations are sums of
/// `+-1` terms.
pub fn clip_integer(values: &[i32], kappa: u32) -> Result<Vec<i32>> {
    check_kappa(kappa)?;
    let k = i32::try_from(kappa).unwrap_or(i32::MAX);
    Ok(values.iter().map(|&x| x.clamp(-k, k)).collect())
}

/// Component-wise product of two bipolar hypervectors.
pub fn bind_elementwise(
    x: &BipolarHypervector,
    y: &BipolarHypervector,
) -> Result<BipolarHypervector> {
    check_dim(x.dim(), y.dim())?;
    Ok(BipolarHypervector(
        x.0.iter().zip(&y.0).map(|(a, b)| a * b).collect(),
    ))
}

/// Component-wise sum. No clipping is applied.
pub fn superpose<'a, I>(vs: I) -> Result<Hypervector>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut iter = vs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidParameter("cannot superpose an empty list".into()))?;
    let mut acc = first.0.clone();
    for v in iter {
        check_dim(acc.len(), v.dim())?;
        for (a, b) in acc.iter_mut().zip(&v.0) {
            *a += b;
        }
    }
    Hypervector::new(acc)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(dim: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(dim), p.plan_fft_inverse(dim))
    })
}

/// Unnormalized forward DFT of a real signal.
pub(crate) fn spectrum(x: &[f64]) -> Vec<Complex64> {
    let (forward, _) = plans(x.len());
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    buf
}

/// Inverse of [`spectrum`], including the `1/D` factor; keeps the real part.
pub(crate) fn inverse_spectrum(mut buf: Vec<Complex64>) -> Vec<f64> {
    let dim = buf.len();
    let (_, inverse) = plans(dim);
    inverse.process(&mut buf);
    let scale = 1.0 / dim as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Circular convolution of two spectra already in the frequency domain.
pub(crate) fn convolve_spectra(x: &[Complex64], y: &[Complex64]) -> Vec<f64> {
    inverse_spectrum(x.iter().zip(y).map(|(a, b)| a * b).collect())
}

pub(crate) fn convolve_slices(x: &[f64], y: &[f64]) -> Vec<f64> {
    let dim = x.len();
    if dim <= DIRECT_CONVOLUTION_MAX_DIM {
        let mut z = vec![0.0; dim];
        for (j, zj) in z.iter_mut().enumerate() {
            for (k, yk) in y.iter().enumerate() {
                *zj += yk * x[(j + dim - k) % dim];
            }
        }
        return z;
    }
    convolve_spectra(&spectrum(x), &spectrum(y))
}

/// Circular convolution `z_j = sum_k y_k x_{(j - k) mod D}`.
pub fn circ_convolve(x: &Hypervector, y: &Hypervector) -> Result<Hypervector> {
    check_dim(x.dim(), y.dim())?;
    Hypervector::new(convolve_slices(&x.0, &y.0))
}

/// [`circ_convolve`] forced through the FFT regardless of dimension.
pub fn circ_convolve_spectral(x: &Hypervector, y: &Hypervector) -> Result<Hypervector> {
    check_dim(x.dim(), y.dim())?;
    Hypervector::new(convolve_spectra(&spectrum(&x.0), &spectrum(&y.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InverseMode {
    /// Cyclic index reversal; an approximate inverse for random keys.
    #[default]
    Involution,
    /// Spectral reciprocal; `k (*) inverse(k) = delta` up to rounding.
    /// Ill-conditioned for Gaussian keys with small spectral components.
    Exact,
}

impl InverseMode {
    pub fn code(self) -> u8 {
        match self {
            InverseMode::Exact => 0,
            InverseMode::Involution => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(InverseMode::Exact),
            1 => Some(InverseMode::Involution),
            _ => None,
        }
    }
}

pub fn inverse(k: &Hypervector, mode: InverseMode) -> Result<Hypervector> {
    match mode {
        InverseMode::Involution => {
            let d = k.dim();
            Hypervector::new((0..d).map(|j| k.0[(d - j) % d]).collect())
        }
        InverseMode::Exact => {
            let spec = spectrum(&k.0);
            let mut recip = Vec::with_capacity(spec.len());
            for (frequency, c) in spec.iter().enumerate() {
                if c.norm() <= SINGULAR_SPECTRUM_EPS {
                    return Err(Error::SingularKey { frequency });
                }
                recip.push(c.inv());
            }
            Hypervector::new(inverse_spectrum(recip))
        }
    }
}

pub fn cosine(x: &Hypervector, y: &Hypervector) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    cosine_slices(&x.0, &y.0)
}

pub(crate) fn cosine_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    let nx = dot(x, x).sqrt();
    let ny = dot(y, y).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

fn check_dim_positive(dim: usize) -> Result<()> {
    if dim < 1 {
        return Err(Error::InvalidParameter("dimension D must be >= 1".into()));
    }
    Ok(())
}

/// I.i.d. uniform `{-1, +1}` entries drawn from the stream `seed`.
pub fn random_bipolar(dim: usize, seed: &SeedSpec) -> Result<BipolarHypervector> {
    check_dim_positive(dim)?;
    let mut rng = seed.rng();
    Ok(BipolarHypervector(
        (0..dim)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect(),
    ))
}

/// I.i.d. `N(0, 1/D)` entries drawn from the stream `seed`.
pub fn random_gaussian_key(dim: usize, seed: &SeedSpec) -> Result<Hypervector> {
    check_dim_positive(dim)?;
    let normal = Normal::new(0.0, (1.0 / dim as f64).sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = seed.rng();
    Hypervector::new((0..dim).map(|_| normal.sample(&mut rng)).collect())
}
