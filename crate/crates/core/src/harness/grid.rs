//! Exhaustive hyperparameter search with the centralized RLS model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{self, RlsSystem};
use crate::data::{self, Dataset, Fold, SplitMode, SplitSpec};
use crate::rvfl;
use crate::sim::{self, ModelParams};
use crate::{Error, Result, SeedSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub kappas: Vec<u32>,
}

impl Default for GridSpec {
    /// `D` in 50..=1500 step 50, `lambda` in 2^-10..=2^5, `kappa` in {1, 3, 7, 15}.
    fn default() -> Self {
        Self {
            dims: (1..=30).map(|i| 50 * i).collect(),
            lambdas: (-10..=5).map(|e| 2f64.powi(e)).collect(),
            kappas: vec![1, 3, 7, 15],
        }
    }
}

impl GridSpec {
    pub fn single(params: ModelParams) -> Self {
        Self {
            dims: vec![params.dim],
            lambdas: vec![params.lambda],
            kappas: vec![params.kappa],
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len() * self.lambdas.len() * self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidParameter("grid has no candidates".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter(
                "grid dimension must be >= 1".into(),
            ));
        }
        if self.kappas.contains(&0) {
            return Err(Error::InvalidParameter("grid kappa must be >= 1".into()));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidParameter(
                "grid lambda must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Whether `params` lies within the span of each axis.
    pub fn spans(&self, params: &ModelParams) -> bool {
        fn within<T: PartialOrd + Copy>(values: &[T], x: T) -> bool {
            values.iter().any(|&v| v <= x) && values.iter().any(|&v| v >= x)
        }
        within(&self.dims, params.dim)
            && within(&self.lambdas, params.lambda)
            && within(&self.kappas, params.kappa)
    }

    fn sorted_axes(&self) -> (Vec<usize>, Vec<f64>, Vec<u32>) {
        let mut dims = self.dims.clone();
        dims.sort_unstable();
        dims.dedup();
        let mut lambdas = self.lambdas.clone();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        let mut kappas = self.kappas.clone();
        kappas.sort_unstable();
        kappas.dedup();
        (dims, lambdas, kappas)
    }

    /// All triples ordered by `D`, then `lambda`, then `kappa`, ascending.
    pub fn candidates(&self) -> Vec<ModelParams> {
        let (dims, lambdas, kappas) = self.sorted_axes();
        let mut out = Vec::with_capacity(self.len());
        for &dim in &dims {
            for &lambda in &lambdas {
                for &kappa in &kappas {
                    out.push(ModelParams { dim, lambda, kappa });
                }
            }
        }
        out
    }
}

/// Which split scores the candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "selection", rename_all = "kebab-case")]
pub enum Selection {
    /// Stratified holdout: train on one part, score on the other.
    Holdout { test_fraction: f64 },
    /// Stratified k-fold cross-validation, pooled over folds.
    CrossValidated { k: usize },
}

impl Default for Selection {
    fn default() -> Self {
        Selection::Holdout { test_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: ModelParams,
    /// `None` when the ridge system could not be solved.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: ModelParams,
    pub best_accuracy: f64,
    pub evaluated: Vec<GridPoint>,
}

fn selection_folds(ds: &Dataset, selection: Selection, seed: &SeedSpec) -> Result<Vec<Fold>> {
    let mode = match selection {
        Selection::Holdout { test_fraction } => SplitMode::Holdout { test_fraction },
        Selection::CrossValidated { k } => SplitMode::Kfold { k },
    };
    let out = data::split(
        ds,
        &SplitSpec {
            mode,
            stratified: true,
            seed: seed.with("selection-split", 0),
        },
    )?;
    Ok(out.folds)
}

/// Scores every candidate with centralized RLS and returns the most
/// accurate one. Ties go to the smaller `D`, then `lambda`, then `kappa`.
///
/// The Gram matrix is formed once per `(D, kappa)` and reused across
/// `lambda`.
pub fn grid_search(
    ds: &Dataset,
    grid: &GridSpec,
    selection: Selection,
    seed: &SeedSpec,
) -> Result<GridResult> {
    grid.validate()?;
    let folds = selection_folds(ds, selection, seed)?;
    let (dims, lambdas, kappas) = grid.sorted_axes();

    let prepared = folds
        .iter()
        .map(|fold| {
            let train = ds.subset(&fold.train);
            let test = ds.subset(&fold.test);
            let ranges = train.compute_ranges();
            Ok((
                train.apply_ranges(&ranges)?.0,
                test.apply_ranges(&ranges)?.0,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = prepared.iter().map(|(_, t)| t.len()).sum();
    if total == 0 {
        return Err(Error::InvalidDataset(
            "selection split has no test samples".into(),
        ));
    }

    let pairs: Vec<(usize, u32)> = dims
        .iter()
        .flat_map(|&d| kappas.iter().map(move |&k| (d, k)))
        .collect();
    // correct[pair][lambda], None once any fold fails to solve.
    let counts = pairs
        .par_iter()
        .map(|&(dim, kappa)| -> Result<Vec<Option<usize>>> {
            let projection = rvfl::init_projection(
                ds.features(),
                dim,
                &seed.with("selection-projection", dim as u64),
            )?;
            let mut correct = vec![Some(0usize); lambdas.len()];
            for (train, test) in &prepared {
                let h_train = sim::encode_dataset(train, &projection, kappa)?;
                let h_test = sim::encode_dataset(test, &projection, kappa)?;
                let system = RlsSystem::new(&h_train)?;
                for (slot, &lambda) in correct.iter_mut().zip(&lambdas) {
                    let Some(acc) = slot else { continue };
                    match system.solve(lambda) {
                        Ok(w) => *acc += classifier::count_correct(&w, &h_test)?,
                        Err(Error::SingularSystem) => {
                            log::warn!(
                                "grid point D={dim} lambda={lambda} kappa={kappa} is singular"
                            );
                            *slot = None;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(correct)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut evaluated = Vec::with_capacity(grid.len());
    let mut best: Option<(ModelParams, usize)> = None;
    for (di, &dim) in dims.iter().enumerate() {
        for (li, &lambda) in lambdas.iter().enumerate() {
            for (ki, &kappa) in kappas.iter().enumerate() {
                let params = ModelParams { dim, lambda, kappa };
                let correct = counts[di * kappas.len() + ki][li];
                if let Some(c) = correct {
                    if best.is_none_or(|(_, b)| c > b) {
                        best = Some((params, c));
                    }
                }
                evaluated.push(GridPoint {
                    params,
                    accuracy: correct.map(|c| c as f64 / total as f64),
                });
            }
        }
    }
    let (best, correct) = best.ok_or(Error::SingularSystem)?;
    Ok(GridResult {
        best,
        best_accuracy: correct as f64 / total as f64,
        evaluated,
    })
}
