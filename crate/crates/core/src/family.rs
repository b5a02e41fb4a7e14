//! Layered families of flats: the input to flag counting.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat::Flat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub dim: usize,
    pub flats: Vec<Flat>,
}

/// Ordered levels of pairwise distinct flats with strictly increasing dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayeredFamily {
    ambient_dim: usize,
    levels: Vec<Level>,
}

impl LayeredFamily {
    pub fn new(ambient_dim: usize, levels: Vec<Level>) -> Result<Self> {
        for (i, level) in levels.iter().enumerate() {
            if i > 0 && levels[i - 1].dim >= level.dim {
                return Err(Error::InvalidFamily(format!(
                    "level dimensions must strictly increase ({} then {})",
                    levels[i - 1].dim,
                    level.dim
                )));
            }
            if level.dim > ambient_dim {
                return Err(Error::InvalidFamily(format!("level dim {} exceeds ambient {ambient_dim}", level.dim)));
            }
            let mut seen = HashSet::with_capacity(level.flats.len());
            for f in &level.flats {
                if f.ambient_dim() != ambient_dim {
                    return Err(Error::DimensionMismatch(f.ambient_dim(), ambient_dim));
                }
                if f.dim() != level.dim {
                    return Err(Error::InvalidFamily(format!("{}-flat in level of dim {}", f.dim(), level.dim)));
                }
                if !seen.insert(f) {
                    return Err(Error::InvalidFamily(format!("duplicate flat in level {i}: {f:?}")));
                }
            }
        }
        Ok(LayeredFamily { ambient_dim, levels })
    }

    /// Builds levels from `(dim, flats)` pairs, dropping duplicate flats.
    pub fn from_sets(ambient_dim: usize, sets: Vec<(usize, Vec<Flat>)>) -> Result<Self> {
        let levels = sets
            .into_iter()
            .map(|(dim, flats)| {
                let mut seen = HashSet::new();
                let flats = flats.into_iter().filter(|f| seen.insert(f.clone())).collect();
                Level { dim, flats }
            })
            .collect();
        Self::new(ambient_dim, levels)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Level {
        &self.levels[i]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.flats.len()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dim).collect()
    }

    /// Same family with level `i` replaced by the given subset of its flats.
    pub fn with_level(&self, i: usize, flats: Vec<Flat>) -> Result<Self> {
        if i >= self.levels.len() {
            return Err(Error::InvalidIndex(i));
        }
        let mut levels = self.levels.clone();
        levels[i].flats = flats;
        Self::new(self.ambient_dim, levels)
    }

    /// Consecutive sub-range of levels.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.levels.len() || range.start > range.end {
            return Err(Error::InvalidIndex(range.end));
        }
        Self::new(self.ambient_dim, self.levels[range].to_vec())
    }

    /// Applies a per-flat map that may change the ambient dimension.
    pub fn map_flats<F>(&self, ambient_dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&Flat) -> Result<Flat>,
    {
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let flats = l.flats.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
                let dim = flats.first().map_or(l.dim, Flat::dim);
                Ok(Level { dim, flats })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, levels)
    }

    /// All flats in level order; the offsets of each level follow from `sizes()`.
    pub fn all_flats(&self) -> Vec<Flat> {
        self.levels.iter().flat_map(|l| l.flats.iter().cloned()).collect()
    }

    /// Rebuilds a family with the same level sizes from a flattened list of flats.
    pub fn from_flattened(&self, ambient_dim: usize, flats: Vec<Flat>) -> Result<Self> {
        let mut iter = flats.into_iter();
        let levels = self
            .levels
            .iter()
            .map(|l| {
                let chunk: Vec<Flat> = iter.by_ref().take(l.flats.len()).collect();
                let dim = chunk.first().map_or(l.dim, Flat::dim);
                Level { dim, flats: chunk }
            })
            .collect();
        Self::new(ambient_dim, levels)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawFamily = serde_json::from_str(text)?;
        Self::new(raw.ambient_dim, raw.levels)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct RawFamily {
    ambient_dim: usize,
    levels: Vec<Level>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ints;

    fn chain() -> LayeredFamily {
        let p = Flat::point(&ints(&[0, 0, 0]));
        let l = Flat::from_points(&[ints(&[0, 0, 0]), ints(&[1, 0, 0])], 3).unwrap();
        let s = l.join(&Flat::point(&ints(&[0, 1, 0]))).unwrap();
        LayeredFamily::from_sets(3, vec![(0, vec![p]), (1, vec![l]), (2, vec![s])]).unwrap()
    }

    #[test]
    fn validates_invariants() {
        let p = Flat::point(&ints(&[0, 0, 0]));
        let l = Flat::from_points(&[ints(&[0, 0, 0]), ints(&[1, 0, 0])], 3).unwrap();
        assert!(LayeredFamily::new(3, vec![Level { dim: 1, flats: vec![p.clone()] }]).is_err());
        assert!(LayeredFamily::new(
            3,
            vec![Level { dim: 1, flats: vec![l.clone()] }, Level { dim: 0, flats: vec![p.clone()] }]
        )
        .is_err());
        assert!(LayeredFamily::new(3, vec![Level { dim: 0, flats: vec![p.clone(), p.clone()] }]).is_err());
        assert!(LayeredFamily::new(2, vec![Level { dim: 0, flats: vec![p] }]).is_err());
        let deduped = LayeredFamily::from_sets(3, vec![(1, vec![l.clone(), l])]).unwrap();
        assert_eq!(deduped.sizes(), vec![1]);
    }

    #[test]
    fn json_roundtrip() {
        let fam = chain();
        let text = fam.to_json_string().unwrap();
        assert!(text.contains("\"levels\""));
        let back = LayeredFamily::from_json_str(&text).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn flatten_roundtrip() {
        let fam = chain();
        let again = fam.from_flattened(3, fam.all_flats()).unwrap();
        assert_eq!(again, fam);
    }
}
