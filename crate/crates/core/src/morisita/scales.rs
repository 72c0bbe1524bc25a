use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing inverse quadrat edge lengths (cells per axis), at least two of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ScaleSet(Vec<u32>);

impl ScaleSet {
    pub fn new(inverse_edges: Vec<u32>) -> Result<Self> {
        if inverse_edges.len() < 2 {
            return Err(Error::InvalidScales(format!(
                "need at least 2 scales, got {}",
                inverse_edges.len()
            )));
        }
        if inverse_edges[0] == 0 {
            return Err(Error::InvalidScales("scales must be >= 1".into()));
        }
        if inverse_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScales(format!(
                "scales must be strictly increasing: {inverse_edges:?}"
            )));
        }
        Ok(ScaleSet(inverse_edges))
    }

    /// Every integer in `lo..=hi`.
    pub fn range(lo: u32, hi: u32) -> Result<Self> {
        Self::new((lo..=hi).collect())
    }

    /// `lo, 2 lo, 4 lo, ...` up to `hi`, closed with `hi` itself when the
    /// progression would otherwise hold a single value.
    pub fn doubling(lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 {
            return Err(Error::InvalidScales("scales must be >= 1".into()));
        }
        let mut v: Vec<u32> = std::iter::successors(Some(lo), |&k| k.checked_mul(2))
            .take_while(|&k| k <= hi)
            .collect();
        if v.len() < 2 && hi > lo {
            v.push(hi);
        }
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> u32 {
        self.0[0]
    }

    pub fn max(&self) -> u32 {
        self.0[self.0.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl TryFrom<Vec<u32>> for ScaleSet {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        ScaleSet::new(v)
    }
}

impl From<ScaleSet> for Vec<u32> {
    fn from(s: ScaleSet) -> Self {
        s.0
    }
}

/// Accepts `lo..hi` (inclusive) or a comma separated list such as `1,2,4,8`.
impl FromStr for ScaleSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::InvalidScales(format!("cannot parse {part:?} in {s:?}"));
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|_| bad(lo))?;
            let hi: u32 = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad(hi))?;
            return ScaleSet::range(lo, hi);
        }
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| bad(p)))
            .collect::<Result<Vec<_>>>()?;
        ScaleSet::new(v)
    }
}

impl fmt::Display for ScaleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let contiguous = self.0.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous && self.0.len() > 2 {
            write!(f, "{}..{}", self.min(), self.max())
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_and_lists() {
        let r: ScaleSet = "5..20".parse().unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!((r.min(), r.max()), (5, 20));
        let l: ScaleSet = "1, 2,4,8".parse().unwrap();
        assert_eq!(l.as_slice(), &[1, 2, 4, 8]);
        assert_eq!(l.to_string(), "1,2,4,8");
        assert_eq!(r.to_string(), "5..20");
    }

    #[test]
    fn rejects_bad_sets() {
        assert!("4,2".parse::<ScaleSet>().is_err());
        assert!("0,2".parse::<ScaleSet>().is_err());
        assert!("3".parse::<ScaleSet>().is_err());
        assert!("2,2,3".parse::<ScaleSet>().is_err());
        assert!("a..b".parse::<ScaleSet>().is_err());
        assert!(ScaleSet::new(vec![]).is_err());
    }

    #[test]
    fn doubling_progressions() {
        assert_eq!(
            ScaleSet::doubling(1, 64).unwrap().as_slice(),
            &[1, 2, 4, 8, 16, 32, 64]
        );
        assert_eq!(
            ScaleSet::doubling(4, 100).unwrap().as_slice(),
            &[4, 8, 16, 32, 64]
        );
        assert_eq!(ScaleSet::doubling(40, 60).unwrap().as_slice(), &[40, 60]);
    }

    #[test]
    fn serde_validates() {
        let s: ScaleSet = serde_json::from_str("[1,2,3]").unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,2,3]");
        assert!(serde_json::from_str::<ScaleSet>("[3,2]").is_err());
    }
}
