//! Summary statistics over result records.

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifierKind;
use crate::harness::record::ResultRecord;
use crate::sim::VersionKind;
use crate::{Error, Result};

pub use crate::sim::mean_std;

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `100 * (distributed - local) / local`.
pub fn improvement_percent(local: f64, distributed: f64) -> Result<f64> {
    if local <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "local accuracy must be positive, got {local}"
        )));
    }
    Ok(100.0 * (distributed - local) / local)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub agents: usize,
    pub local: f64,
    pub distributed: f64,
    pub percent: f64,
}

/// Relative improvement of the distributed version (with or without
/// compression, per `compressed`) over the local one, for every
/// (dataset, classifier, N) present. Every record on either side must have
/// its counterpart.
pub fn relative_improvement(
    records: &[ResultRecord],
    compressed: bool,
) -> Result<Vec<Improvement>> {
    let is_local = |r: &&ResultRecord| r.kind == VersionKind::Local;
    let is_distr =
        |r: &&ResultRecord| r.kind == VersionKind::Distributed && r.compression == compressed;
    let key = |r: &ResultRecord| (r.dataset.clone(), r.classifier, r.agents);

    let locals: Vec<&ResultRecord> = records.iter().filter(is_local).collect();
    let distrs: Vec<&ResultRecord> = records.iter().filter(is_distr).collect();
    if locals.is_empty() && distrs.is_empty() {
        return Err(Error::Pairing("no local or distributed records".into()));
    }
    for l in &locals {
        if !distrs.iter().any(|d| key(d) == key(l)) {
            return Err(Error::Pairing(format!(
                "local record {}/{}/N={} has no distributed counterpart",
                l.dataset, l.classifier, l.agents
            )));
        }
    }
    let mut out = Vec::with_capacity(distrs.len());
    for d in &distrs {
        let l = locals.iter().find(|l| key(l) == key(d)).ok_or_else(|| {
            Error::Pairing(format!(
                "distributed record {}/{}/N={} has no local counterpart",
                d.dataset, d.classifier, d.agents
            ))
        })?;
        out.push(Improvement {
            dataset: d.dataset.clone(),
            classifier: d.classifier,
            agents: d.agents,
            local: l.mean,
            distributed: d.mean,
            percent: improvement_percent(l.mean, d.mean)?,
        });
    }
    out.sort_by(|a, b| {
        (&a.dataset, a.classifier, a.agents).cmp(&(&b.dataset, b.classifier, b.agents))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let xs = [0.3, 1.2, -0.4, 2.2];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        // Means 2 and 7/3; sxy = 3, sxx = 2, syy = 14/3.
        let expected = 3.0 / (2f64.sqrt() * (14.0f64 / 3.0).sqrt());
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation)
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(Error::UndefinedCorrelation)
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn improvement_examples() {
        assert!((improvement_percent(0.74, 0.82).unwrap() - 10.810_810_810_810_81).abs() < 1e-9);
        assert_eq!(improvement_percent(0.7, 0.7).unwrap(), 0.0);
        assert!((improvement_percent(0.62, 0.78).unwrap() - 25.806451612903224).abs() < 1e-9);
    }
}
