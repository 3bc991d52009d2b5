use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ordered partition of the symbol indices `0..L` into decoding groups.
///
/// Indices are zero-based in the API; the textual form (`"1,2|3,4"`) is
/// one-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingScheme {
    groups: Vec<Vec<usize>>,
}

impl GroupingScheme {
    /// Validates that `groups` partitions `0..num_symbols`.
    pub fn new(groups: Vec<Vec<usize>>, num_symbols: usize) -> Result<Self> {
        let mut seen = vec![false; num_symbols];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::Grouping("empty group".into()));
            }
            for &i in g {
                if i >= num_symbols {
                    return Err(Error::Grouping(format!(
                        "index {} out of range 1..={num_symbols}",
                        i + 1
                    )));
                }
                if seen[i] {
                    return Err(Error::Grouping(format!("index {} appears twice", i + 1)));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::Grouping(format!(
                "index {} is not covered",
                missing + 1
            )));
        }
        Ok(Self { groups })
    }

    /// `count` consecutive groups of `size` indices each.
    pub fn consecutive(count: usize, size: usize) -> Self {
        Self {
            groups: (0..count)
                .map(|p| (p * size..(p + 1) * size).collect())
                .collect(),
        }
    }

    pub fn single(num_symbols: usize) -> Self {
        Self::consecutive(1, num_symbols)
    }

    pub fn singletons(num_symbols: usize) -> Self {
        Self::consecutive(num_symbols, 1)
    }

    /// Singleton groups in the given order.
    pub fn singletons_in_order(order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&i| vec![i]).collect(), order.len())
    }

    /// Parses `"1,2|3,4|..."` (one-based) and validates against `num_symbols`.
    pub fn parse(text: &str, num_symbols: usize) -> Result<Self> {
        let raw: RawGroups = text.parse()?;
        Self::new(raw.0, num_symbols)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn num_symbols(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// All indices outside group `p`, in ascending group order.
    pub fn complement(&self, p: usize) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != p)
            .flat_map(|(_, g)| g.iter().copied())
            .collect()
    }

    /// Indices of groups after `p` in decoding order.
    pub fn later(&self, p: usize) -> Vec<usize> {
        self.groups[p + 1..].iter().flatten().copied().collect()
    }
}

impl fmt::Display for GroupingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

/// One-based group lists parsed from text, not yet validated as a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGroups(pub Vec<Vec<usize>>);

impl FromStr for RawGroups {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut groups = Vec::new();
        for part in s.split('|') {
            let mut g = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                let one_based: usize = tok
                    .parse()
                    .map_err(|_| Error::Grouping(format!("bad index {tok:?}")))?;
                if one_based == 0 {
                    return Err(Error::Grouping("indices are one-based".into()));
                }
                g.push(one_based - 1);
            }
            groups.push(g);
        }
        Ok(Self(groups))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let g = GroupingScheme::parse("1,2|3,4|5,6|7,8", 8).unwrap();
        assert_eq!(g, GroupingScheme::consecutive(4, 2));
        assert_eq!(g.to_string(), "1,2|3,4|5,6|7,8");
        assert_eq!(g.complement(1), vec![0, 1, 4, 5, 6, 7]);
        assert_eq!(g.later(1), vec![4, 5, 6, 7]);
    }

    #[test]
    fn rejects_non_partitions() {
        assert!(GroupingScheme::parse("1,2|2,3", 3).is_err());
        assert!(GroupingScheme::parse("1,2", 3).is_err());
        assert!(GroupingScheme::parse("1,4", 3).is_err());
        assert!(GroupingScheme::parse("0,1", 2).is_err());
        assert!(GroupingScheme::parse("1,x", 2).is_err());
    }
}
