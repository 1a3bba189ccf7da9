use alloc::format;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::encoding::BitVector;
use crate::error::{Error, Result};

/// An evaluated design.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: BitVector,
    pub fom: f64,
}

/// Insertion-ordered samples with unique bit strings.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    samples: Vec<Sample>,
    index: HashMap<BitVector, usize>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample. Duplicate bit strings and non-finite FOMs are rejected.
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if !sample.fom.is_finite() {
            return Err(Error::Data(format!("non-finite FOM {} for {}", sample.fom, sample.x)));
        }
        if let Some(first) = self.samples.first() {
            if first.x.len() != sample.x.len() {
                return Err(Error::Dimension {
                    expected: first.x.len(),
                    found: sample.x.len(),
                });
            }
        }
        if self.index.contains_key(&sample.x) {
            return Err(Error::Data(format!("duplicate design {}", sample.x)));
        }
        self.index.insert(sample.x.clone(), self.samples.len());
        self.samples.push(sample);
        Ok(())
    }

    pub fn contains(&self, x: &BitVector) -> bool {
        self.index.contains_key(x)
    }

    pub fn get(&self, x: &BitVector) -> Option<&Sample> {
        self.index.get(x).map(|&i| &self.samples[i])
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Lowest FOM in the dataset.
    pub fn best(&self) -> Option<&Sample> {
        self.samples.iter().min_by(|a, b| a.fom.total_cmp(&b.fom))
    }
}

impl TryFrom<Vec<Sample>> for Dataset {
    type Error = Error;

    fn try_from(samples: Vec<Sample>) -> Result<Self> {
        let mut d = Dataset::new();
        for s in samples {
            d.push(s)?;
        }
        Ok(d)
    }
}
