//! Text formats for clade trees: preorder CSV and Newick export.

use super::CladeTree;
use crate::error::{Error, Result};
use crate::numeric::format_g17;

pub const CSV_HEADER: &str = "size,left_size,hold_time";

impl CladeTree {
    /// One preorder record per node: `size,left_size,hold_time`. Leaves have
    /// `left_size = 0`; `hold_time` is empty for leaves and for trees without times.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.node_count());
        out.push_str(CSV_HEADER);
        out.push('\n');
        for v in 0..self.node_count() {
            let hold = match self.hold(v) {
                Some(t) if !self.is_leaf(v) => format_g17(t),
                _ => String::new(),
            };
            out.push_str(&format!("{},{},{}\n", self.size(v), self.left_size(v), hold));
        }
        out
    }

    /// Parses the output of [`CladeTree::to_csv`]. Offsets in errors are byte offsets.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut sizes = Vec::new();
        let mut holds = Vec::new();
        let mut timed: Option<bool> = None;
        let mut offset = 0;
        for (k, line) in text.split_inclusive('\n').enumerate() {
            let start = offset;
            offset += line.len();
            let line = line.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() || (k == 0 && line == CSV_HEADER) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(start, "expected 3 fields"));
            }
            let size: u32 = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::parse(start, "bad size"))?;
            let left: u32 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(start, "bad left_size"))?;
            if (size == 1) != (left == 0) {
                return Err(Error::parse(start, "left_size must be 0 exactly for leaves"));
            }
            let hold = fields[2].trim();
            if size == 1 {
                if !hold.is_empty() {
                    return Err(Error::parse(start, "leaf with a hold time"));
                }
                holds.push(0.0);
            } else {
                let has = !hold.is_empty();
                if *timed.get_or_insert(has) != has {
                    return Err(Error::parse(start, "hold times must be given for all or no nodes"));
                }
                holds.push(if has {
                    hold.parse().map_err(|_| Error::parse(start, "bad hold_time"))?
                } else {
                    0.0
                });
            }
            sizes.push((size, left, start));
        }
        for (k, &(size, left, start)) in sizes.iter().enumerate() {
            if size >= 2 && sizes.get(k + 1).map(|r| r.0) != Some(left) {
                return Err(Error::parse(start, "left_size does not match the next record"));
            }
        }
        let sizes: Vec<u32> = sizes.into_iter().map(|r| r.0).collect();
        // a lone leaf carries no time information; it reads back untimed
        let holds = if timed == Some(true) { Some(holds) } else { None };
        CladeTree::from_parts(sizes, holds).map_err(|e| match e {
            Error::Domain(m) => Error::parse(text.len(), m),
            other => other,
        })
    }

    /// Newick text. Leaves are named by their 1-based interval position. In a timed
    /// tree each internal clade's branch length is its hold time and leaves get length 0.
    pub fn to_newick(&self) -> String {
        enum Tok {
            Open(usize),
            Comma,
            Close(usize),
        }
        let mut out = String::with_capacity(12 * self.node_count());
        let mut leaf = 0;
        let mut stack = vec![Tok::Open(0)];
        let length = |v: usize| self.hold(v).map(|t| format!(":{t}")).unwrap_or_default();
        while let Some(tok) = stack.pop() {
            match tok {
                Tok::Open(v) => match self.children(v) {
                    Some((l, r)) => {
                        out.push('(');
                        stack.push(Tok::Close(v));
                        stack.push(Tok::Open(r));
                        stack.push(Tok::Comma);
                        stack.push(Tok::Open(l));
                    }
                    None => {
                        leaf += 1;
                        out.push_str(&leaf.to_string());
                        out.push_str(&length(v));
                    }
                },
                Tok::Comma => out.push(','),
                Tok::Close(v) => {
                    out.push(')');
                    out.push_str(&length(v));
                }
            }
        }
        out.push(';');
        out
    }
}
