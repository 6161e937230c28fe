use crate::error::{Error, Result};
use crate::C64;

/// Assignment of every site to one spatial mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModePartition {
    labels: Vec<usize>,
    modes: usize,
}

impl ModePartition {
    /// Labels must cover `0..R` with every mode nonempty.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let modes = labels.iter().max().map_or(0, |m| m + 1);
        for m in 0..modes {
            if !labels.contains(&m) {
                return Err(Error::InvalidParameter(format!("mode {m} has no sites")));
            }
        }
        if labels.is_empty() {
            return Err(Error::InvalidParameter("empty partition".into()));
        }
        Ok(Self { labels, modes })
    }

    /// Mode 0 holds the odd physical sites (indices 0, 2, ...), mode 1 the
    /// even ones.
    pub fn odd_even(sites: usize) -> Result<Self> {
        Self::from_labels((0..sites).map(|k| k % 2).collect())
    }

    /// Groups sites with equal coefficients, in order of first appearance.
    pub fn from_coefficients(coeffs: &[C64]) -> Result<Self> {
        let mut reps: Vec<C64> = Vec::new();
        let labels = coeffs
            .iter()
            .map(|c| match reps.iter().position(|r| (r - c).norm() < 1e-9) {
                Some(p) => p,
                None => {
                    reps.push(*c);
                    reps.len() - 1
                }
            })
            .collect();
        Self::from_labels(labels)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sites(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, site: usize) -> usize {
        self.labels[site]
    }

    pub fn zone(&self, mode: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&j| self.labels[j] == mode).collect()
    }
}
