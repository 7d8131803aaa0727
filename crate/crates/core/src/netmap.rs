//! Relay denoising maps `Z_M × Z_M → Z_M` and the exclusive law.
//!
//! A map satisfies the exclusive law exactly when its table is a Latin
//! square: every row and every column is a permutation of `Z_M`.

use std::fmt;
use std::path::Path;

use crate::constellation::is_power_of_two_order;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    Row,
    Column,
}

/// First place a table breaks the exclusive law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub line: Line,
    pub index: usize,
    pub value: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Line::Row => write!(
                f,
                "row {} (s_A = {}) repeats value {}",
                self.index, self.index, self.value
            ),
            Line::Column => write!(
                f,
                "column {} (s_B = {}) repeats value {}",
                self.index, self.index, self.value
            ),
        }
    }
}

/// Explicit `M × M` table, row index `s_A`, column index `s_B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkMap {
    order: usize,
    table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub ncs: usize,
    pub members: Vec<(usize, usize)>,
}

impl NetworkMap {
    /// Bitwise XOR of the two labels.
    pub fn xor(order: usize) -> Result<Self> {
        if !is_power_of_two_order(order) {
            return Err(Error::InvalidOrder(order));
        }
        let table = (0..order)
            .flat_map(|a| (0..order).map(move |b| a ^ b))
            .collect();
        Ok(NetworkMap { order, table })
    }

    /// Wraps a raw table without checking the exclusive law. Entries must
    /// still lie in `Z_M`.
    pub fn from_rows_unchecked(rows: Vec<Vec<usize>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::MapParse("empty table".into()));
        }
        let mut table = Vec::with_capacity(order * order);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != order {
                return Err(Error::MapParse(format!(
                    "row {i} has {} entries, expected {order}",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= order) {
                return Err(Error::MapParse(format!(
                    "row {i} has value {v} outside Z_{order}"
                )));
            }
            table.extend(row);
        }
        Ok(NetworkMap { order, table })
    }

    /// Like [`from_rows_unchecked`](Self::from_rows_unchecked), but rejects
    /// tables that break the exclusive law.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let map = Self::from_rows_unchecked(rows)?;
        match map.find_violation() {
            Some(v) => Err(Error::ExclusiveLaw(v)),
            None => Ok(map),
        }
    }

    /// Parses the text format: first line `M`, then `M` lines of `M`
    /// whitespace-separated integers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::MapParse("empty input".into()))?;
        let order: usize = header
            .parse()
            .map_err(|_| Error::MapParse(format!("bad order line '{header}'")))?;
        if !is_power_of_two_order(order) {
            return Err(Error::InvalidOrder(order));
        }
        let mut rows = Vec::with_capacity(order);
        for (i, line) in lines.enumerate() {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::MapParse(format!("row {i}: bad entry '{tok}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.len() != order {
            return Err(Error::MapParse(format!(
                "expected {order} rows, found {}",
                rows.len()
            )));
        }
        Self::from_rows(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.order);
        for a in 0..self.order {
            let row: Vec<String> = (0..self.order)
                .map(|b| self.apply(a, b).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn apply(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn find_violation(&self) -> Option<Violation> {
        let m = self.order;
        let mut seen = vec![false; m];
        for line in [Line::Row, Line::Column] {
            for i in 0..m {
                seen.iter_mut().for_each(|s| *s = false);
                for k in 0..m {
                    let v = match line {
                        Line::Row => self.apply(i, k),
                        Line::Column => self.apply(k, i),
                    };
                    if std::mem::replace(&mut seen[v], true) {
                        return Some(Violation {
                            line,
                            index: i,
                            value: v,
                        });
                    }
                }
            }
        }
        None
    }

    pub fn satisfies_exclusive_law(&self) -> bool {
        self.find_violation().is_none()
    }

    /// Joint symbol pairs grouped by map output, ascending by output, members
    /// in lexicographic order. Outputs that never occur produce no cluster.
    pub fn clusters(&self) -> Vec<Cluster> {
        let mut clusters: Vec<Cluster> = (0..self.order)
            .map(|ncs| Cluster {
                ncs,
                members: Vec::new(),
            })
            .collect();
        for a in 0..self.order {
            for b in 0..self.order {
                clusters[self.apply(a, b)].members.push((a, b));
            }
        }
        clusters.retain(|c| !c.members.is_empty());
        clusters
    }
}
