//! Hidden layer of the RVFL network.
//!
//! Each feature value in `[0, 1]` becomes a thermometer code (a `+1` prefix
//! followed by `-1`s), is bound to that feature's fixed random bipolar column
//! of the input projection, and the bound vectors are superposed and clipped
//! to `[-kappa, kappa]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::hdc::{self, BipolarHypervector};
use crate::{Error, Result, SeedSpec};

/// Frozen first layer: `K` bipolar columns of length `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProjection {
    dim: usize,
    columns: Vec<BipolarHypervector>,
    seed: SeedSpec,
}

impl InputProjection {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &BipolarHypervector {
        &self.columns[j]
    }

    pub fn seed(&self) -> &SeedSpec {
        &self.seed
    }

    /// Unclipped superposition of the bound feature codes.
    pub fn pre_activation(&self, x: &[f64]) -> Result<Vec<i32>> {
        check_dim(self.features(), x.len())?;
        let mut acc = vec![0i32; self.dim];
        for (column, &value) in self.columns.iter().zip(x) {
            let level = thermometer_level(value, self.dim)?;
            let w = column.as_slice();
            for (a, &wi) in acc[..level].iter_mut().zip(&w[..level]) {
                *a += i32::from(wi);
            }
            for (a, &wi) in acc[level..].iter_mut().zip(&w[level..]) {
                *a -= i32::from(wi);
            }
        }
        Ok(acc)
    }
}

/// Draws `features` independent bipolar columns; column `j` comes from the
/// stream `seed / ("projection-column", j)`.
pub fn init_projection(features: usize, dim: usize, seed: &SeedSpec) -> Result<InputProjection> {
    if features < 1 {
        return Err(Error::InvalidParameter(
            "feature count K must be >= 1".into(),
        ));
    }
    let columns = (0..features)
        .map(|j| hdc::random_bipolar(dim, &seed.with("projection-column", j as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InputProjection {
        dim,
        columns,
        seed: seed.clone(),
    })
}

/// Length of the `+1` prefix: `round(value * D)`, ties rounded up.
pub fn thermometer_level(value: f64, dim: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange { value });
    }
    let level = (value * dim as f64 + 0.5).floor() as usize;
    Ok(level.min(dim))
}

pub fn thermometer_encode(value: f64, dim: usize) -> Result<BipolarHypervector> {
    if dim < 1 {
        return Err(Error::InvalidParameter("dimension D must be >= 1".into()));
    }
    let level = thermometer_level(value, dim)?;
    Ok(BipolarHypervector::from_raw(
        (0..dim).map(|i| if i < level { 1 } else { -1 }).collect(),
    ))
}

/// Thermometer codes of all features of one sample (the `D x K` matrix `F`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    columns: Vec<BipolarHypervector>,
}

impl FeatureMatrix {
    pub fn encode(x: &[f64], dim: usize) -> Result<Self> {
        let columns = x
            .iter()
            .map(|&v| thermometer_encode(v, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[BipolarHypervector] {
        &self.columns
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenActivation {
    values: Vec<i32>,
    kappa: u32,
}

impl HiddenActivation {
    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

pub fn encode_sample(
    x: &[f64],
    projection: &InputProjection,
    kappa: u32,
) -> Result<HiddenActivation> {
    let pre = projection.pre_activation(x)?;
    Ok(HiddenActivation {
        values: hdc::clip_integer(&pre, kappa)?,
        kappa,
    })
}

/// Encodes a row-major `rows x K` block of samples in parallel.
pub fn encode_batch(
    samples: &[f64],
    projection: &InputProjection,
    kappa: u32,
) -> Result<Vec<HiddenActivation>> {
    let k = projection.features();
    if !samples.len().is_multiple_of(k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: samples.len() % k,
        });
    }
    samples
        .par_chunks(k)
        .map(|x| encode_sample(x, projection, kappa))
        .collect()
}
