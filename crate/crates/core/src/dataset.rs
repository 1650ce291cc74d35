use crate::error::{Error, Result};
use crate::parallel::{map_collect, Execution};
use crate::projection::{project, reconstruct, resample_to_nodes, CoefficientVector, Domain, SampledTrajectory};

/// One reference trajectory: its coefficients and, when it was observed as
/// samples, the samples themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub id: Option<String>,
    pub samples: Option<SampledTrajectory>,
    pub coeffs: CoefficientVector,
}

impl DatasetEntry {
    pub fn from_coeffs(id: Option<String>, coeffs: CoefficientVector) -> Self {
        DatasetEntry { id, samples: None, coeffs }
    }

    /// Values at canonical nodes in `[-1, 1]`: interpolated samples when
    /// present, otherwise the truncated series.
    pub fn values_at(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        match &self.samples {
            Some(s) => resample_to_nodes(s, nodes),
            None => Ok(nodes.iter().map(|&t| reconstruct(self.coeffs.as_slice(), t)).collect()),
        }
    }
}

/// The database of reference trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    entries: Vec<DatasetEntry>,
    domain: Domain,
}

impl TrajectoryDataset {
    pub fn new(entries: Vec<DatasetEntry>, domain: Domain) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(TrajectoryDataset { entries, domain })
    }

    pub fn from_coefficients(coeffs: Vec<CoefficientVector>, domain: Domain) -> Result<Self> {
        Self::new(coeffs.into_iter().map(|c| DatasetEntry::from_coeffs(None, c)).collect(), domain)
    }

    /// Projects every sampled trajectory onto `n` coefficients.
    pub fn from_samples(
        samples: Vec<SampledTrajectory>,
        n: usize,
        quad_points: usize,
        exec: Execution,
    ) -> Result<Self> {
        let domain = match samples.first() {
            Some(s) => s.domain(),
            None => return Err(Error::EmptyDataset),
        };
        if let Some(s) = samples.iter().find(|s| s.domain() != domain) {
            return Err(Error::DomainMismatch { expected: domain.to_string(), got: s.domain().to_string() });
        }
        let coeffs = map_collect(exec, &samples, |s| project(s, n, quad_points));
        let entries = samples
            .into_iter()
            .zip(coeffs)
            .map(|(s, c)| Ok(DatasetEntry { id: s.id().map(str::to_owned), coeffs: c?, samples: Some(s) }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries, domain)
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &CoefficientVector> {
        self.entries.iter().map(|e| &e.coeffs)
    }

    /// Shortest coefficient vector length in the dataset.
    pub fn min_coeff_len(&self) -> usize {
        self.entries.iter().map(|e| e.coeffs.len()).min().unwrap_or(0)
    }

    /// Union of two datasets over the same domain.
    pub fn union(&self, other: &TrajectoryDataset) -> Result<TrajectoryDataset> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch { expected: self.domain.to_string(), got: other.domain.to_string() });
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self::new(entries, self.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty() {
        assert!(matches!(TrajectoryDataset::new(vec![], Domain::CANONICAL), Err(Error::EmptyDataset)));
        assert!(matches!(
            TrajectoryDataset::from_samples(vec![], 3, 256, Execution::Sequential),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn projects_samples_and_keeps_them() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let domain = Domain::new(0.0, 1.0).unwrap();
        let traj = SampledTrajectory::new(Some("a".into()), domain, t.clone(), vec![2.0; 101]).unwrap();
        let ds = TrajectoryDataset::from_samples(vec![traj], 3, 256, Execution::Parallel).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.entries()[0].id.as_deref(), Some("a"));
        let c = ds.entries()[0].coeffs.as_slice();
        assert!((c[0] - 2.0).abs() < 1e-14 && c[1].abs() < 1e-14);
        assert_eq!(ds.entries()[0].values_at(&[0.3]).unwrap(), vec![2.0]);
    }

    #[test]
    fn values_from_coefficients() {
        let e = DatasetEntry::from_coeffs(None, CoefficientVector::new(vec![1.0, 0.0, 0.0]).unwrap());
        assert_eq!(e.values_at(&[-0.4, 0.9]).unwrap(), vec![1.0, 1.0]);
    }
}
