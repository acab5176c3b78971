use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::min_width;

/// Sorted distinct strings; a value's code is its rank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dictionary {
    values: Vec<String>,
}

pub fn build_dictionary<'a, I>(values: I) -> Dictionary
where
    I: IntoIterator<Item = &'a str>,
{
    let mut v: Vec<String> = values.into_iter().map(str::to_owned).collect();
    v.sort_unstable();
    v.dedup();
    Dictionary { values: v }
}

impl Dictionary {
    pub fn from_sorted(values: Vec<String>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("dictionary entries not strictly ascending".into()));
        }
        Ok(Dictionary { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    /// Bit width needed for the codes; 2 for an empty dictionary.
    pub fn width(&self) -> u32 {
        min_width(self.values.len().saturating_sub(1) as u64)
    }

    pub fn code(&self, value: &str) -> Option<u64> {
        self.values.binary_search_by(|v| v.as_str().cmp(value)).ok().map(|i| i as u64)
    }

    pub fn decode(&self, code: u64) -> Result<&str> {
        self.values
            .get(code as usize)
            .map(String::as_str)
            .ok_or_else(|| Error::Invalid(format!("code {code} outside dictionary of {}", self.values.len())))
    }

    /// First code whose value is `>= value`.
    pub fn lower_bound(&self, value: &str) -> u64 {
        self.values.partition_point(|v| v.as_str() < value) as u64
    }

    /// First code whose value is `> value`.
    pub fn upper_bound(&self, value: &str) -> u64 {
        self.values.partition_point(|v| v.as_str() <= value) as u64
    }

    pub fn encode_column<'a, I>(&self, values: I) -> Result<Vec<u64>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        values
            .into_iter()
            .map(|v| self.code(v).ok_or_else(|| Error::Invalid(format!("{v:?} not in dictionary"))))
            .collect()
    }

    pub fn decode_column(&self, codes: &[u64]) -> Result<Vec<String>> {
        codes.iter().map(|&c| self.decode(c).map(str::to_owned)).collect()
    }

    pub fn heap_bytes(&self) -> u64 {
        self.values.iter().map(|v| v.len() as u64).sum()
    }
}
