use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Point, ProjSpace};
use crate::error::{Error, Result};
use crate::gf::Field;

/// A set of points of one space, held as a strictly increasing rank list.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    space: ProjSpace,
    ranks: Vec<u64>,
}

impl PointSet {
    pub fn new(space: ProjSpace, mut ranks: Vec<u64>) -> Result<Self> {
        ranks.sort_unstable();
        ranks.dedup();
        if let Some(&last) = ranks.last() {
            if last >= space.num_points() {
                return Err(Error::Precondition(format!(
                    "rank {last} is out of range for {space:?}"
                )));
            }
        }
        Ok(PointSet { space, ranks })
    }

    pub fn empty(space: ProjSpace) -> Self {
        PointSet {
            space,
            ranks: Vec::new(),
        }
    }

    pub fn from_points<'a>(space: ProjSpace, pts: impl IntoIterator<Item = &'a Point>) -> Self {
        let ranks = pts.into_iter().map(|p| space.rank(p)).collect();
        PointSet::new(space, ranks).expect("ranks of canonical points are in range")
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn contains_rank(&self, r: u64) -> bool {
        self.ranks.binary_search(&r).is_ok()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.contains_rank(self.space.rank(p))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.ranks.iter().map(|&r| self.space.unrank(r))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut ranks = self.ranks.clone();
        ranks.extend_from_slice(&other.ranks);
        PointSet::new(self.space.clone(), ranks).expect("same space")
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let ranks = self
            .ranks
            .iter()
            .copied()
            .filter(|&r| other.contains_rank(r))
            .collect();
        PointSet {
            space: self.space.clone(),
            ranks,
        }
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let ranks = self
            .ranks
            .iter()
            .copied()
            .filter(|&r| !other.contains_rank(r))
            .collect();
        PointSet {
            space: self.space.clone(),
            ranks,
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(&Point) -> bool) -> PointSet {
        let ranks = self
            .ranks
            .iter()
            .copied()
            .filter(|&r| keep(&self.space.unrank(r)))
            .collect();
        PointSet {
            space: self.space.clone(),
            ranks,
        }
    }

    /// FNV-1a over the space dimension, field descriptor and ranks.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.space.dim() as u64);
        for b in self.space.field().descriptor().bytes() {
            eat(b as u64);
        }
        for &r in &self.ranks {
            eat(r);
        }
        h
    }
}

/// Writes the text format: a `p k m+1` header, then one point per line.
pub fn write_point_set(set: &PointSet, mut w: impl Write) -> Result<()> {
    let f = set.space().field();
    writeln!(w, "{} {} {}", f.p(), f.k(), set.space().len())?;
    for p in set.points() {
        let line: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads the text format. The field is GF(p^k) with its default modulus.
/// Non-canonical or unsorted input is repaired and reported in the returned
/// warnings.
pub fn read_point_set(r: impl BufRead) -> Result<(PointSet, Vec<String>)> {
    let mut lines = r
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty point-set file".into()))?;
    let header = parse_numbers(&header?, 1)?;
    let [p, k, len] = header[..] else {
        return Err(Error::Parse("header must be `p k m+1`".into()));
    };
    if len < 2 {
        return Err(Error::Parse("ambient space must have dimension >= 1".into()));
    }
    let space = ProjSpace::new(Arc::new(Field::new(p, k, None)?), len as usize - 1);
    let mut warnings = Vec::new();
    let mut ranks = Vec::new();
    for (lineno, line) in lines {
        let coords = parse_numbers(&line?, lineno + 1)?;
        let canonical = space.is_canonical(&coords);
        let pt = space
            .point(coords)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if !canonical {
            warnings.push(format!("line {}: point re-normalized to {pt}", lineno + 1));
        }
        ranks.push(space.rank(&pt));
    }
    if ranks.windows(2).any(|w| w[0] >= w[1]) {
        warnings.push("points were not strictly increasing; re-sorted and deduplicated".into());
    }
    Ok((PointSet::new(space, ranks)?, warnings))
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<u32>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|e| Error::Parse(format!("line {lineno}: {t:?}: {e}")))
        })
        .collect()
}
