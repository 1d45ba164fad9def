use serde::{Deserialize, Serialize};

use super::Combination;
use crate::error::{Error, Result};

/// Seed method for a DIMS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimsInit {
    /// Per-slot average of the DIMS component of the Loess decomposition.
    StlBased,
    /// Every slot starts at the neutral element.
    Neutral,
}

/// Definition of one discrete-interval moving seasonality: a block of
/// `length` steps that recurs at irregular `occurrences`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimsSpec {
    pub id: String,
    pub mode: Combination,
    pub length: usize,
    /// 0-based start positions, strictly increasing.
    pub occurrences: Vec<usize>,
    pub init: DimsInit,
}

impl DimsSpec {
    pub fn new(
        id: impl Into<String>,
        mode: Combination,
        length: usize,
        occurrences: Vec<usize>,
    ) -> Self {
        Self {
            id: id.into(),
            mode,
            length,
            occurrences,
            init: DimsInit::StlBased,
        }
    }

    pub fn with_init(mut self, init: DimsInit) -> Self {
        self.init = init;
        self
    }

    fn error(&self, reason: String) -> Error {
        Error::Dims {
            id: self.id.clone(),
            reason,
        }
    }

    pub(crate) fn validate(&self, series_len: usize) -> Result<()> {
        if self.length == 0 {
            return Err(self.error("block length must be positive".into()));
        }
        for (k, &start) in self.occurrences.iter().enumerate() {
            if start + self.length > series_len {
                return Err(self.error(format!(
                    "occurrence {k} at {start} (length {}) exceeds series length {series_len}",
                    self.length
                )));
            }
            if k > 0 {
                let prev = self.occurrences[k - 1];
                if start <= prev {
                    return Err(self.error(format!(
                        "occurrence {k} at {start} not after previous start {prev}"
                    )));
                }
                if prev + self.length > start {
                    return Err(self.error(format!(
                        "occurrence {k} at {start} overlaps block [{prev}, {})",
                        prev + self.length
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Where a time step sits relative to a DIMS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimsPosition {
    /// Index into the occurrence list.
    pub occurrence: usize,
    /// Offset inside the block, `0..length`.
    pub slot: usize,
    /// Steps back to the same slot of the previous occurrence; `None` for
    /// the first occurrence.
    pub lag: Option<usize>,
}

/// Per-step membership and lag table for one DIMS over a series.
#[derive(Debug, Clone, PartialEq)]
pub struct DimsRecurrence {
    positions: Vec<Option<DimsPosition>>,
}

impl DimsRecurrence {
    fn build(spec: &DimsSpec, series_len: usize) -> Self {
        let mut positions = vec![None; series_len];
        for (k, &start) in spec.occurrences.iter().enumerate() {
            let lag = k.checked_sub(1).map(|p| start - spec.occurrences[p]);
            for slot in 0..spec.length {
                positions[start + slot] = Some(DimsPosition {
                    occurrence: k,
                    slot,
                    lag,
                });
            }
        }
        Self { positions }
    }

    pub fn at(&self, t: usize) -> Option<DimsPosition> {
        self.positions.get(t).copied().flatten()
    }

    pub fn is_active(&self, t: usize) -> bool {
        self.at(t).is_some()
    }

    pub fn lag(&self, t: usize) -> Option<usize> {
        self.at(t).and_then(|p| p.lag)
    }

    /// True when no step is covered by any occurrence.
    pub fn is_empty(&self) -> bool {
        self.positions.iter().all(Option::is_none)
    }

    pub fn active_count(&self) -> usize {
        self.positions.iter().filter(|p| p.is_some()).count()
    }
}

/// A registered DIMS: its definition plus the eagerly computed recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Dims {
    spec: DimsSpec,
    recurrence: DimsRecurrence,
}

impl Dims {
    pub(crate) fn new(spec: DimsSpec, series_len: usize) -> Result<Self> {
        spec.validate(series_len)?;
        let recurrence = DimsRecurrence::build(&spec, series_len);
        Ok(Self { spec, recurrence })
    }

    pub fn spec(&self) -> &DimsSpec {
        &self.spec
    }

    pub fn recurrence(&self) -> &DimsRecurrence {
        &self.recurrence
    }

    pub(crate) fn into_spec(self) -> DimsSpec {
        self.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mult(occ: Vec<usize>, len: usize) -> DimsSpec {
        DimsSpec::new("Easter", Combination::Multiplicative, len, occ)
    }

    #[test]
    fn empty_occurrences_accepted() {
        let d = Dims::new(mult(vec![], 24), 1000).unwrap();
        assert!(d.recurrence().is_empty());
    }

    #[test]
    fn lag_equals_start_difference() {
        let d = Dims::new(mult(vec![100, 460], 24), 1000).unwrap();
        let rec = d.recurrence();
        for t in 100..124 {
            assert_eq!(rec.lag(t), None);
            assert!(rec.is_active(t));
        }
        for t in 460..484 {
            assert_eq!(rec.lag(t), Some(360));
            assert_eq!(rec.at(t).unwrap().slot, t - 460);
        }
        assert!(!rec.is_active(124));
        assert!(!rec.is_active(459));
        assert_eq!(rec.active_count(), 48);
    }

    #[test]
    fn overlapping_blocks_rejected() {
        let err = Dims::new(mult(vec![100, 110], 24), 1000).unwrap_err();
        match err {
            Error::Dims { id, reason } => {
                assert_eq!(id, "Easter");
                assert!(reason.contains("110"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_bounds_and_unsorted_rejected() {
        assert!(Dims::new(mult(vec![990], 24), 1000).is_err());
        assert!(Dims::new(mult(vec![500, 100], 24), 1000).is_err());
        assert!(Dims::new(mult(vec![5], 0), 1000).is_err());
        // block ending exactly at the series end is fine
        assert!(Dims::new(mult(vec![976], 24), 1000).is_ok());
    }

    proptest! {
        #[test]
        fn lags_constant_within_block(
            gaps in prop::collection::vec(0usize..200, 2..8),
            len in 1usize..30,
        ) {
            let mut occ = Vec::new();
            let mut pos = 0;
            for g in gaps {
                pos += g;
                occ.push(pos);
                pos += len;
            }
            let n = pos + 5;
            let d = Dims::new(mult(occ.clone(), len), n).unwrap();
            let rec = d.recurrence();
            for k in 1..occ.len() {
                for slot in 0..len {
                    prop_assert_eq!(rec.lag(occ[k] + slot), Some(occ[k] - occ[k - 1]));
                }
            }
            prop_assert_eq!(rec.active_count(), occ.len() * len);
        }
    }
}
