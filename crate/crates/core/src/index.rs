//! Multi-indices and ordered pivot sets.
//!
//! A left set at bond `b` holds prefixes over sites `0..=b`; a right set at
//! bond `b` holds suffixes over sites `b+1..L`. Member order is the row
//! (or column) order of the slices built from the set.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Borrow<[usize]> for MultiIndex {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Ordered, duplicate-free set of multi-indices sharing one side and span.
#[derive(Clone, Debug)]
pub struct IndexSet {
    side: Side,
    span: Range<usize>,
    members: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl PartialEq for IndexSet {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side && self.span == other.span && self.members == other.members
    }
}

impl IndexSet {
    pub fn new(side: Side, span: Range<usize>, members: Vec<MultiIndex>) -> Result<Self> {
        let width = span.end.saturating_sub(span.start);
        let mut lookup = HashMap::with_capacity(members.len());
        for (k, m) in members.iter().enumerate() {
            if m.len() != width {
                return Err(Error::Span(format!(
                    "member {:?} has length {}, span {:?} needs {}",
                    m.0,
                    m.len(),
                    span,
                    width
                )));
            }
            if lookup.insert(m.clone(), k).is_some() {
                return Err(Error::Invalid(format!("duplicate multi-index {:?}", m.0)));
            }
        }
        Ok(IndexSet { side, span, members, lookup })
    }

    /// The set holding only the empty prefix, left of site 0.
    pub fn trivial_left() -> Self {
        Self::new(Side::Left, 0..0, vec![MultiIndex(Vec::new())]).expect("trivial set")
    }

    /// The set holding only the empty suffix, right of the last site.
    pub fn trivial_right(length: usize) -> Self {
        Self::new(Side::Right, length..length, vec![MultiIndex(Vec::new())]).expect("trivial set")
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn span(&self) -> Range<usize> {
        self.span.clone()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn get(&self, k: usize) -> &[usize] {
        &self.members[k].0
    }

    pub fn position(&self, idx: &[usize]) -> Option<usize> {
        self.lookup.get(idx).copied()
    }

    /// Checks every component against its site's local dimension.
    pub fn check_ranges(&self, local_dims: &[usize]) -> Result<()> {
        if self.span.end > local_dims.len() {
            return Err(Error::Span(format!("span {:?} exceeds length {}", self.span, local_dims.len())));
        }
        for m in &self.members {
            for (site, &s) in self.span.clone().zip(m.0.iter()) {
                if s >= local_dims[site] {
                    return Err(Error::Dimension(format!(
                        "index {} at site {} exceeds local dimension {}",
                        s, site, local_dims[site]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether dropping the newest component of every member lands in `parent`.
    pub fn is_nested_in(&self, parent: &IndexSet) -> bool {
        self.nesting_violation(parent).is_none()
    }

    /// First member whose truncation is missing from `parent`, if any.
    pub fn nesting_violation(&self, parent: &IndexSet) -> Option<&MultiIndex> {
        if self.side != parent.side {
            return self.members.first();
        }
        let spans_ok = match self.side {
            Side::Left => parent.span.start == self.span.start && parent.span.end + 1 == self.span.end,
            Side::Right => parent.span.end == self.span.end && parent.span.start == self.span.start + 1,
        };
        if !spans_ok {
            return self.members.first();
        }
        self.members.iter().find(|m| {
            let t = match self.side {
                Side::Left => &m.0[..m.len() - 1],
                Side::Right => &m.0[1..],
            };
            parent.position(t).is_none()
        })
    }

    /// Splits a member into (position of its truncation in `parent`, newest local index).
    pub fn parent_of(&self, k: usize, parent: &IndexSet) -> Result<(usize, usize)> {
        let m = &self.members[k].0;
        let (t, s) = match self.side {
            Side::Left => (&m[..m.len() - 1], m[m.len() - 1]),
            Side::Right => (&m[1..], m[0]),
        };
        parent
            .position(t)
            .map(|p| (p, s))
            .ok_or_else(|| Error::Nesting(format!("{:?} has no parent in {:?}", m, parent.span)))
    }

    /// Builds a child set from (parent position, local index) pairs.
    pub fn extend_from(parent: &IndexSet, picks: &[(usize, usize)]) -> Result<Self> {
        let (span, members) = match parent.side {
            Side::Left => {
                let span = parent.span.start..parent.span.end + 1;
                let members = picks
                    .iter()
                    .map(|&(p, s)| {
                        let mut v = parent.get(p).to_vec();
                        v.push(s);
                        MultiIndex(v)
                    })
                    .collect();
                (span, members)
            }
            Side::Right => {
                if parent.span.start == 0 {
                    return Err(Error::Span("right set cannot extend past site 0".into()));
                }
                let span = parent.span.start - 1..parent.span.end;
                let members = picks
                    .iter()
                    .map(|&(p, s)| {
                        let mut v = Vec::with_capacity(parent.get(p).len() + 1);
                        v.push(s);
                        v.extend_from_slice(parent.get(p));
                        MultiIndex(v)
                    })
                    .collect();
                (span, members)
            }
        };
        Self::new(parent.side, span, members)
    }
}

/// Joins a left prefix, free local indices and a right suffix into one full index.
pub fn concat(left: &[usize], middle: &[usize], right: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(left.len() + middle.len() + right.len());
    v.extend_from_slice(left);
    v.extend_from_slice(middle);
    v.extend_from_slice(right);
    v
}
