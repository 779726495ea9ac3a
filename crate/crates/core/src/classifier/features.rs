use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub hash_buckets: usize,
    pub lowercase: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { ngram_min: 2, ngram_max: 4, hash_buckets: 1 << 18, lowercase: true }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(format!("invalid n-gram range {}..={}", self.ngram_min, self.ngram_max));
        }
        if !self.hash_buckets.is_power_of_two() {
            return Err(format!("hash_buckets must be a power of two, got {}", self.hash_buckets));
        }
        Ok(())
    }

    fn fold(&self, text: &str) -> String {
        if self.lowercase {
            text.to_lowercase()
        } else {
            text.to_string()
        }
    }
}

/// Sparse vector as `(bucket, value)` pairs sorted by bucket.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i as usize] * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Buckets of every character n-gram occurrence in `text` (already folded).
fn ngram_buckets(chars: &[char], config: &FeatureConfig, out: &mut Vec<u32>) {
    let mask = (config.hash_buckets - 1) as u64;
    let mut buf = String::new();
    for n in config.ngram_min..=config.ngram_max {
        for window in chars.windows(n) {
            buf.clear();
            buf.extend(window);
            out.push((fnv1a(buf.as_bytes()) & mask) as u32);
        }
    }
}

fn bucket_counts(text: &str, config: &FeatureConfig) -> BTreeMap<u32, f64> {
    let chars: Vec<char> = config.fold(text).chars().collect();
    let mut buckets = Vec::new();
    ngram_buckets(&chars, config, &mut buckets);
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for bucket in buckets {
        *counts.entry(bucket).or_default() += 1.0;
    }
    counts
}

/// Hashed character n-gram counts, L2-normalized.
pub fn featurize(text: &str, config: &FeatureConfig) -> SparseVector {
    let counts = bucket_counts(text, config);
    let norm = counts.values().map(|c| c * c).sum::<f64>().sqrt();
    SparseVector {
        entries: counts.into_iter().map(|(i, c)| (i, c / norm)).collect(),
    }
}

/// Norm of the raw count vector; feature values are counts divided by it.
pub(crate) fn count_norm(text: &str, config: &FeatureConfig) -> f64 {
    bucket_counts(text, config).values().map(|c| c * c).sum::<f64>().sqrt()
}

/// Buckets of the n-grams lying entirely inside one token.
pub(crate) fn token_buckets(token: &str, config: &FeatureConfig) -> Vec<u32> {
    let chars: Vec<char> = config.fold(token).chars().collect();
    let mut out = Vec::new();
    ngram_buckets(&chars, config, &mut out);
    out
}

pub(crate) fn fold_token(token: &str, config: &FeatureConfig) -> String {
    config.fold(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_chars_give_one_bucket() {
        let v = featurize("ab", &FeatureConfig::default());
        assert_eq!(v.entries.len(), 1);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_text_is_zero() {
        assert!(featurize("", &FeatureConfig::default()).is_empty());
        assert!(featurize("a", &FeatureConfig::default()).is_empty());
    }

    #[test]
    fn hashing_is_deterministic_and_case_folded() {
        let config = FeatureConfig::default();
        assert_eq!(featurize("Heejra aur", &config), featurize("Heejra aur", &config));
        assert_eq!(featurize("HEEJRA", &config), featurize("heejra", &config));
        let cased = FeatureConfig { lowercase: false, ..Default::default() };
        assert_ne!(featurize("HEEJRA", &cased), featurize("heejra", &cased));
    }

    #[test]
    fn counts_are_normalized() {
        // "aaa": 2-gram "aa" twice, 3-gram "aaa" once -> counts (2, 1), norm sqrt(5)
        let v = featurize("aaa", &FeatureConfig::default());
        let mut values: Vec<f64> = v.entries.iter().map(|e| e.1).collect();
        values.sort_by(f64::total_cmp);
        assert!((values[0] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((values[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((count_norm("aaa", &FeatureConfig::default()) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(FeatureConfig::default().validate().is_ok());
        assert!(FeatureConfig { hash_buckets: 1000, ..Default::default() }.validate().is_err());
        assert!(FeatureConfig { ngram_min: 5, ..Default::default() }.validate().is_err());
    }
}
