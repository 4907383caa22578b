//! Edge words of periodic orbits and their canonical forms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombError {
    #[error("empty word")]
    Empty,
    #[error("edge labels must be positive")]
    ZeroLabel,
    #[error("repeated consecutive letter at position {0}")]
    Repeat(usize),
    #[error("cannot parse word {0:?}")]
    Parse(String),
}

/// A combinatorial type stored in canonical form.
///
/// Without the cyclic flag the class is `{w, reverse(w)}`; with it, all
/// rotations of both are identified as well.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "CombTypeRepr", into = "CombTypeRepr")]
pub struct CombType {
    word: Vec<usize>,
    cyclic: bool,
}

#[derive(Serialize, Deserialize)]
struct CombTypeRepr {
    word: Vec<usize>,
    cyclic: bool,
}

impl TryFrom<CombTypeRepr> for CombType {
    type Error = CombError;
    fn try_from(r: CombTypeRepr) -> Result<Self, CombError> {
        CombType::new(r.word, r.cyclic)
    }
}

impl From<CombType> for CombTypeRepr {
    fn from(c: CombType) -> Self {
        CombTypeRepr { word: c.word, cyclic: c.cyclic }
    }
}

pub fn validate_word(word: &[usize], cyclic: bool) -> Result<(), CombError> {
    if word.is_empty() {
        return Err(CombError::Empty);
    }
    if word.contains(&0) {
        return Err(CombError::ZeroLabel);
    }
    for i in 1..word.len() {
        if word[i] == word[i - 1] {
            return Err(CombError::Repeat(i));
        }
    }
    if cyclic && word.len() > 1 && word[0] == word[word.len() - 1] {
        return Err(CombError::Repeat(0));
    }
    Ok(())
}

/// Lexicographic minimum over the equivalence class of `word`.
pub fn canonical_word(word: &[usize], cyclic: bool) -> Vec<usize> {
    let rev: Vec<usize> = word.iter().rev().copied().collect();
    if !cyclic {
        return if rev.as_slice() < word { rev } else { word.to_vec() };
    }
    let n = word.len();
    let mut best: Option<Vec<usize>> = None;
    for w in [word, rev.as_slice()] {
        for s in 0..n {
            let cand: Vec<usize> = w[s..].iter().chain(&w[..s]).copied().collect();
            if best.as_ref().is_none_or(|b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

impl CombType {
    pub fn new(word: Vec<usize>, cyclic: bool) -> Result<Self, CombError> {
        validate_word(&word, cyclic)?;
        Ok(Self { word: canonical_word(&word, cyclic), cyclic })
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Same class under the other equivalence convention.
    pub fn with_cyclic(&self, cyclic: bool) -> CombType {
        CombType::new(self.word.clone(), cyclic).unwrap_or_else(|_| self.clone())
    }

    /// Apply a relabelling of edges and re-canonicalize.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> CombType {
        let w: Vec<usize> = self.word.iter().map(|&c| map(c)).collect();
        CombType { word: canonical_word(&w, self.cyclic), cyclic: self.cyclic }
    }

    /// Exchange the two legs `1 ↔ 2` of a triangle.
    pub fn swap_legs(&self) -> CombType {
        self.relabel(swap_legs)
    }
}

pub fn swap_legs(c: usize) -> usize {
    match c {
        1 => 2,
        2 => 1,
        x => x,
    }
}

impl fmt::Display for CombType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.word.iter().any(|&c| c > 9) { "," } else { "" };
        let s: Vec<String> = self.word.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", s.join(sep))
    }
}

/// Parse `"3132"` (single-digit labels) or `"3,1,3,2"`.
pub fn parse_word(s: &str) -> Result<Vec<usize>, CombError> {
    let s = s.trim();
    let bad = || CombError::Parse(s.to_string());
    if s.contains(',') {
        s.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| bad())).collect()
    } else {
        s.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect()
    }
}

impl FromStr for CombType {
    type Err = CombError;
    fn from_str(s: &str) -> Result<Self, CombError> {
        CombType::new(parse_word(s)?, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spec_words() {
        assert_eq!(CombType::new(vec![3, 1, 3, 2], false).unwrap().word(), &[2, 3, 1, 3]);
        assert_eq!(CombType::new(vec![3, 1], false).unwrap().word(), &[1, 3]);
        let p = CombType::new(vec![3, 2, 1, 3, 1, 2, 3], false).unwrap();
        assert_eq!(p.word(), &[3, 2, 1, 3, 1, 2, 3]);
    }

    #[test]
    fn cyclic_identifies_rotations() {
        let a = CombType::new(vec![1, 2, 3, 1, 2, 3], true).unwrap();
        let b = CombType::new(vec![3, 1, 2, 3, 1, 2], true).unwrap();
        let c = CombType::new(vec![2, 1, 3, 2, 1, 3], true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(CombType::new(vec![1, 2, 3, 1, 2, 3], false).unwrap(), CombType::new(vec![3, 1, 2, 3, 1, 2], false).unwrap());
    }

    #[test]
    fn rejects_bad_words() {
        assert_eq!(CombType::new(vec![], false), Err(CombError::Empty));
        assert_eq!(CombType::new(vec![1, 1], false), Err(CombError::Repeat(1)));
        assert_eq!(CombType::new(vec![3, 1, 3], true), Err(CombError::Repeat(0)));
        assert!(CombType::new(vec![3, 1, 3], false).is_ok());
    }

    #[test]
    fn json_form() {
        let c: CombType = "3132".parse().unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"word":[2,3,1,3],"cyclic":false}"#);
        let back: CombType = serde_json::from_str(r#"{"word":[3,1,3,2],"cyclic":false}"#).unwrap();
        assert_eq!(back, c);
    }

    fn word_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..=4, 1..12).prop_map(|mut w| {
            w.dedup();
            w
        })
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent_and_reversal_invariant(w in word_strategy(), cyclic in any::<bool>()) {
            prop_assume!(!cyclic || w.len() < 2 || w[0] != w[w.len() - 1]);
            let c = CombType::new(w.clone(), cyclic).unwrap();
            let again = CombType::new(c.word().to_vec(), cyclic).unwrap();
            prop_assert_eq!(&c, &again);
            let rev: Vec<usize> = w.iter().rev().copied().collect();
            prop_assert_eq!(&c, &CombType::new(rev, cyclic).unwrap());
            if cyclic {
                let rot: Vec<usize> = w[1..].iter().chain(&w[..1]).copied().collect();
                prop_assert_eq!(&c, &CombType::new(rot, cyclic).unwrap());
            }
        }
    }
}
