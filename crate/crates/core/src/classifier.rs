//! Output layer training and winner-takes-all prediction.
//!
//! Classifier matrices are stored `L x D` (one row per class) for both
//! training routes, so prediction is `scores = W h` and compression works on
//! rows directly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::rvfl::HiddenActivation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Rls,
    Centroid,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Rls => "rls",
            ClassifierKind::Centroid => "centroid",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rls" => Ok(ClassifierKind::Rls),
            "centroid" | "centroids" => Ok(ClassifierKind::Centroid),
            other => Err(Error::InvalidParameter(format!(
                "unknown classifier '{other}'"
            ))),
        }
    }
}

/// Hidden activations of `M` samples (`M x D`) with 0-based class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    rows: DMatrix<f64>,
    labels: Vec<usize>,
    classes: usize,
}

impl ActivationMatrix {
    pub fn new(rows: DMatrix<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        check_dim(rows.nrows(), labels.len())?;
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        Ok(Self {
            rows,
            labels,
            classes,
        })
    }

    pub fn from_activations(
        activations: &[HiddenActivation],
        labels: Vec<usize>,
        classes: usize,
    ) -> Result<Self> {
        let dim = activations
            .first()
            .map(|h| h.values().len())
            .ok_or_else(|| Error::InvalidParameter("no activations".into()))?;
        for h in activations {
            check_dim(dim, h.values().len())?;
        }
        let rows = DMatrix::from_fn(activations.len(), dim, |i, j| {
            f64::from(activations[i].values()[j])
        });
        Self::new(rows, labels, classes)
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            rows: self.rows.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}

/// `M x L` one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotLabels(DMatrix<f64>);

impl OneHotLabels {
    pub fn new(labels: &[usize], classes: usize) -> Self {
        let mut y = DMatrix::zeros(labels.len(), classes);
        for (i, &l) in labels.iter().enumerate() {
            y[(i, l)] = 1.0;
        }
        Self(y)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Unnormalized per-class activation sums and sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidStats {
    pub sums: DMatrix<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierMatrix {
    weights: DMatrix<f64>,
    kind: ClassifierKind,
    centroid: Option<CentroidStats>,
}

impl ClassifierMatrix {
    /// Wraps an `L x D` weight matrix. Entries must be finite.
    pub fn from_weights(weights: DMatrix<f64>, kind: ClassifierKind) -> Result<Self> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "classifier must be non-empty".into(),
            ));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "classifier has non-finite entries".into(),
            ));
        }
        Ok(Self {
            weights,
            kind,
            centroid: None,
        })
    }

    /// Normalizes each class sum to unit L2 norm; zero sums stay zero rows.
    pub fn from_centroid_stats(stats: CentroidStats) -> Result<Self> {
        check_dim(stats.sums.nrows(), stats.counts.len())?;
        let mut weights = stats.sums.clone();
        for (i, mut row) in weights.row_iter_mut().enumerate() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            } else {
                log::warn!("class {i} has a zero-norm activation sum; centroid set to zero");
            }
        }
        let mut m = Self::from_weights(weights, ClassifierKind::Centroid)?;
        m.centroid = Some(stats);
        Ok(m)
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn centroid_stats(&self) -> Option<&CentroidStats> {
        self.centroid.as_ref()
    }

    pub fn classes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.weights.row(i).iter().copied().collect()
    }

    /// Classes whose row is identically zero.
    pub fn empty_classes(&self) -> Vec<usize> {
        (0..self.classes())
            .filter(|&i| self.weights.row(i).iter().all(|&v| v == 0.0))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_weights(&self.weights * factor, self.kind)
    }

    /// Output-layer activations `W h`.
    pub fn scores(&self, h: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), h.len())?;
        Ok((&self.weights * DVector::from_column_slice(h))
            .iter()
            .copied()
            .collect())
    }
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.into_iter().enumerate() {
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Ridge solution `((H^T H + lambda I)^{-1} H^T Y)^T`.
///
/// When there are fewer samples than hidden units the equivalent dual form
/// `H^T (H H^T + lambda I)^{-1} Y` is factored instead (requires `lambda > 0`).
pub fn train_rls(h: &ActivationMatrix, lambda: f64) -> Result<ClassifierMatrix> {
    let y = OneHotLabels::new(h.labels(), h.classes());
    train_rls_with_targets(h.rows(), &y, lambda)
}

pub fn train_rls_with_targets(
    h: &DMatrix<f64>,
    y: &OneHotLabels,
    lambda: f64,
) -> Result<ClassifierMatrix> {
    RlsSystem::with_targets(h, y)?.solve(lambda)
}

/// Ridge normal equations with the Gram matrix formed once, so several
/// `lambda` values can be solved cheaply.
#[derive(Debug, Clone)]
pub struct RlsSystem {
    h: DMatrix<f64>,
    y: DMatrix<f64>,
    /// `H H^T` (dual) when `M < D`, otherwise `H^T H`.
    gram: DMatrix<f64>,
    /// `H^T Y` for the primal form.
    rhs: Option<DMatrix<f64>>,
}

impl RlsSystem {
    pub fn new(h: &ActivationMatrix) -> Result<Self> {
        Self::with_targets(h.rows(), &OneHotLabels::new(h.labels(), h.classes()))
    }

    pub fn with_targets(h: &DMatrix<f64>, y: &OneHotLabels) -> Result<Self> {
        let y = y.matrix();
        check_dim(h.nrows(), y.nrows())?;
        if h.nrows() == 0 {
            return Err(Error::InvalidParameter("no training samples".into()));
        }
        let (m, d) = h.shape();
        let (gram, rhs) = if m < d {
            (h * h.transpose(), None)
        } else {
            (h.tr_mul(h), Some(h.tr_mul(y)))
        };
        Ok(Self {
            h: h.clone(),
            y: y.clone(),
            gram,
            rhs,
        })
    }

    pub fn solve(&self, lambda: f64) -> Result<ClassifierMatrix> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        let solution = match &self.rhs {
            Some(rhs) => {
                let chol = self
                    .regularized(lambda)
                    .cholesky()
                    .ok_or(Error::SingularSystem)?;
                chol.solve(rhs)
            }
            None if lambda > 0.0 => {
                let chol = self
                    .regularized(lambda)
                    .cholesky()
                    .ok_or(Error::SingularSystem)?;
                self.h.tr_mul(&chol.solve(&self.y))
            }
            None => {
                // Fewer samples than units and no ridge: H^T H is singular.
                let gram = self.h.tr_mul(&self.h);
                let chol = gram.cholesky().ok_or(Error::SingularSystem)?;
                chol.solve(&self.h.tr_mul(&self.y))
            }
        };
        if solution.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        ClassifierMatrix::from_weights(solution.transpose(), ClassifierKind::Rls)
    }

    fn regularized(&self, lambda: f64) -> DMatrix<f64> {
        let mut g = self.gram.clone();
        for i in 0..g.nrows() {
            g[(i, i)] += lambda;
        }
        g
    }
}

/// Per-class sums and counts of the activations.
pub fn centroid_stats(h: &ActivationMatrix) -> CentroidStats {
    let mut sums = DMatrix::zeros(h.classes(), h.dim());
    let mut counts = vec![0u64; h.classes()];
    for (row, &label) in h.rows().row_iter().zip(h.labels()) {
        let mut target = sums.row_mut(label);
        target += row;
        counts[label] += 1;
    }
    CentroidStats { sums, counts }
}

/// Class centroids normalized to unit length. Empty classes get zero rows.
pub fn train_centroids(h: &ActivationMatrix) -> Result<ClassifierMatrix> {
    if h.is_empty() {
        return Err(Error::InvalidParameter("no training samples".into()));
    }
    ClassifierMatrix::from_centroid_stats(centroid_stats(h))
}

pub fn predict(w: &ClassifierMatrix, h: &[f64]) -> Result<usize> {
    Ok(argmax(w.scores(h)?))
}

pub fn predict_activation(w: &ClassifierMatrix, h: &HiddenActivation) -> Result<usize> {
    predict(w, &h.to_f64())
}

/// Predicted class for every row of `test`.
pub fn predict_batch(w: &ClassifierMatrix, test: &ActivationMatrix) -> Result<Vec<usize>> {
    check_dim(w.dim(), test.dim())?;
    let scores = test.rows() * w.weights().transpose();
    Ok(scores
        .row_iter()
        .map(|r| argmax(r.iter().copied()))
        .collect())
}

/// Number of correctly classified rows.
pub fn count_correct(w: &ClassifierMatrix, test: &ActivationMatrix) -> Result<usize> {
    let predicted = predict_batch(w, test)?;
    Ok(predicted
        .iter()
        .zip(test.labels())
        .filter(|(p, l)| p == l)
        .count())
}

pub fn evaluate(w: &ClassifierMatrix, test: &ActivationMatrix) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidParameter("empty test set".into()));
    }
    Ok(count_correct(w, test)? as f64 / test.len() as f64)
}
