use alloc::format;
use alloc::vec::Vec;

use super::{Site, Window};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectEntry {
    pub site: Site,
    pub component: usize,
    pub value: f64,
}

/// Real diagonal multiplication operator with finite support.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagonalDefect {
    entries: Vec<DefectEntry>,
}

impl DiagonalDefect {
    pub fn new(mut entries: Vec<DefectEntry>) -> Result<Self> {
        entries.sort_by_key(|e| (e.site, e.component));
        for w in entries.windows(2) {
            if (w[0].site, w[0].component) == (w[1].site, w[1].component) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate defect entry at {:?}/{}",
                    w[0].site, w[0].component
                )));
            }
        }
        if let Some(e) = entries.iter().find(|e| !e.value.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite defect value at {:?}", e.site)));
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[DefectEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖V‖_{ℓ∞→ℓ¹} = Σ |V_n^i|` for a diagonal operator.
    pub fn norm_l1(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).sum()
    }

    pub fn max_component(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.component).max()
    }

    /// `out += V x` on the stored cell of `window`. On periodic windows this is
    /// `S V R`: entries outside the cell are not wrapped.
    pub fn apply_add(&self, window: &Window, d: usize, x: &[f64], out: &mut [f64]) {
        for e in &self.entries {
            if let Some(i) = window.cell_index(e.site).filter(|_| e.component < d) {
                out[i * d + e.component] += e.value * x[i * d + e.component];
            }
        }
    }

    /// Diagonal of V on the stored cell.
    pub fn diagonal(&self, window: &Window, d: usize) -> Vec<f64> {
        let mut diag = alloc::vec![0.0; window.num_sites() * d];
        let ones = alloc::vec![1.0; diag.len()];
        self.apply_add(window, d, &ones, &mut diag);
        diag
    }
}
