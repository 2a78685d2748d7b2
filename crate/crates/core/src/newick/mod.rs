//! Newick parsing and serialisation.
//!
//! ```text
//! tree    := subtree ';'
//! subtree := leaf | '(' subtree (',' subtree)+ ')' label?
//! label   := name? (':' number)?
//! ```
//!
//! Unquoted names use `[A-Za-z0-9_.-]`; quoted names are `'..'` with `''` for a quote.
//! Bracketed comments are skipped and whitespace outside quotes is ignored. Leaves must
//! carry a name. The parser uses an explicit stack, so nesting depth is only limited by
//! memory.

mod compare;

pub use compare::{compare, split_stats, smaller_side_cdf, SplitBucket, SplitStats};

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PhyloNode {
    pub name: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<usize>,
}

/// A rooted tree in an arena; node 0 is the root and nodes are in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    pub nodes: Vec<PhyloNode>,
}

impl PhyloTree {
    pub fn root(&self) -> &PhyloNode {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// Internal nodes with more than two children.
    pub fn polytomies(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.len() > 2).count()
    }

    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|n| n.children.is_empty() || n.children.len() == 2)
    }

    /// Leaf count below every node.
    pub fn clade_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.nodes.len()];
        for v in (0..self.nodes.len()).rev() {
            let c = &self.nodes[v].children;
            s[v] = if c.is_empty() { 1 } else { c.iter().map(|&k| s[k]).sum() };
        }
        s
    }

    /// Edge count from the root to each leaf, in preorder.
    pub fn leaf_depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.nodes.len()];
        let mut out = Vec::new();
        for v in 0..self.nodes.len() {
            for &c in &self.nodes[v].children {
                d[c] = d[v] + 1;
            }
            if self.nodes[v].children.is_empty() {
                out.push(d[v]);
            }
        }
        out
    }

    /// Draw height of each node: 0 at leaves, one more than the highest child.
    pub fn draw_heights(&self) -> Vec<u32> {
        let mut dh = vec![0u32; self.nodes.len()];
        for v in (0..self.nodes.len()).rev() {
            dh[v] = self.nodes[v].children.iter().map(|&c| dh[c] + 1).max().unwrap_or(0);
        }
        dh
    }

    /// Width profile `W(h)` from the draw heights (see [`crate::stats::width_profile`]).
    pub fn width_profile(&self) -> Vec<u64> {
        let dh = self.draw_heights();
        let top = dh[0] as usize;
        let mut diff = vec![0i64; top + 1];
        for (v, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                diff[dh[c] as usize] += 1;
                diff[dh[v] as usize] -= 1;
            }
        }
        let mut run = 0;
        diff[..top]
            .iter()
            .map(|d| {
                run += d;
                run as u64
            })
            .collect()
    }
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-')
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    /// Skips whitespace and `[..]` comments.
    fn skip(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    match self.s[self.pos..].iter().position(|&b| b == b']') {
                        Some(k) => self.pos += k + 1,
                        None => return Err(Error::parse(start, "unterminated comment")),
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn name(&mut self) -> Result<Option<String>> {
        self.skip()?;
        match self.peek() {
            Some(b'\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut bytes = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(Error::parse(start, "unterminated quoted name")),
                        Some(b'\'') if self.s.get(self.pos + 1) == Some(&b'\'') => {
                            bytes.push(b'\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b) => {
                            bytes.push(b);
                            self.pos += 1;
                        }
                    }
                }
                String::from_utf8(bytes)
                    .map(Some)
                    .map_err(|_| Error::parse(start, "quoted name is not UTF-8"))
            }
            Some(b) if is_name_byte(b) => {
                let start = self.pos;
                while self.peek().is_some_and(is_name_byte) {
                    self.pos += 1;
                }
                Ok(Some(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()))
            }
            _ => Ok(None),
        }
    }

    fn length(&mut self) -> Result<Option<f64>> {
        self.skip()?;
        if self.peek() != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip()?;
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let x: f64 = text
            .parse()
            .map_err(|_| Error::parse(start, format!("malformed number {text:?}")))?;
        if !x.is_finite() {
            return Err(Error::parse(start, "branch length is not finite"));
        }
        if x < 0.0 {
            return Err(Error::parse(start, "negative branch length"));
        }
        Ok(Some(x))
    }
}

/// Parses one Newick statement.
pub fn parse(text: &str) -> Result<PhyloTree> {
    let mut c = Cursor {
        s: text.as_bytes(),
        pos: 0,
    };
    let mut nodes: Vec<PhyloNode> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let new_node = |nodes: &mut Vec<PhyloNode>, open: &[usize]| {
        let id = nodes.len();
        nodes.push(PhyloNode {
            name: None,
            length: None,
            children: Vec::new(),
        });
        if let Some(&p) = open.last() {
            nodes[p].children.push(id);
        }
        id
    };
    let mut expect_subtree = true;
    loop {
        c.skip()?;
        let at = c.pos;
        if expect_subtree {
            if c.peek() == Some(b'(') {
                c.pos += 1;
                let id = new_node(&mut nodes, &open);
                open.push(id);
                continue;
            }
            let name = c.name()?;
            let length = c.length()?;
            if name.is_none() {
                return Err(Error::parse(at, "empty subtree"));
            }
            let id = new_node(&mut nodes, &open);
            nodes[id].name = name;
            nodes[id].length = length;
            expect_subtree = false;
            continue;
        }
        match c.peek() {
            Some(b',') => {
                if open.is_empty() {
                    return Err(Error::parse(at, "',' outside parentheses"));
                }
                c.pos += 1;
                expect_subtree = true;
            }
            Some(b')') => {
                let Some(id) = open.pop() else {
                    return Err(Error::parse(at, "unbalanced parentheses: unexpected ')'"));
                };
                if nodes[id].children.len() < 2 {
                    return Err(Error::parse(at, "an internal node needs at least two children"));
                }
                c.pos += 1;
                nodes[id].name = c.name()?;
                nodes[id].length = c.length()?;
            }
            Some(b';') => {
                if !open.is_empty() {
                    return Err(Error::parse(at, "unbalanced parentheses: missing ')'"));
                }
                c.pos += 1;
                c.skip()?;
                if c.pos != c.s.len() {
                    return Err(Error::parse(c.pos, "trailing input after ';'"));
                }
                return Ok(PhyloTree { nodes });
            }
            None => return Err(Error::parse(at, "missing ';'")),
            Some(b) => {
                return Err(Error::parse(at, format!("unexpected character {:?}", b as char)));
            }
        }
    }
}

fn push_name(out: &mut String, name: &str) {
    if !name.is_empty() && name.bytes().all(is_name_byte) {
        out.push_str(name);
    } else {
        out.push('\'');
        out.push_str(&name.replace('\'', "''"));
        out.push('\'');
    }
}

fn push_label(out: &mut String, node: &PhyloNode) {
    if let Some(n) = &node.name {
        push_name(out, n);
    }
    if let Some(l) = node.length {
        out.push(':');
        out.push_str(&l.to_string());
    }
}

/// Newick text; lengths use the shortest representation that reads back exactly.
pub fn serialize(tree: &PhyloTree) -> String {
    enum Tok {
        Open(usize),
        Comma,
        Close(usize),
    }
    let mut out = String::new();
    let mut stack = vec![Tok::Open(0)];
    while let Some(tok) = stack.pop() {
        match tok {
            Tok::Open(v) => {
                let node = &tree.nodes[v];
                if node.children.is_empty() {
                    push_label(&mut out, node);
                } else {
                    out.push('(');
                    stack.push(Tok::Close(v));
                    for (k, &ch) in node.children.iter().enumerate().rev() {
                        stack.push(Tok::Open(ch));
                        if k > 0 {
                            stack.push(Tok::Comma);
                        }
                    }
                }
            }
            Tok::Comma => out.push(','),
            Tok::Close(v) => {
                out.push(')');
                push_label(&mut out, &tree.nodes[v]);
            }
        }
    }
    out.push(';');
    out
}

/// Rooted isomorphism ignoring child order; names and lengths must match exactly.
pub fn isomorphic(a: &PhyloTree, b: &PhyloTree) -> bool {
    type Key = (Option<String>, Option<u64>, Vec<usize>);
    let mut table: HashMap<Key, usize> = HashMap::new();
    let mut canon = |t: &PhyloTree| -> usize {
        let mut id = vec![0usize; t.nodes.len()];
        for v in (0..t.nodes.len()).rev() {
            let node = &t.nodes[v];
            let mut kids: Vec<usize> = node.children.iter().map(|&c| id[c]).collect();
            kids.sort_unstable();
            let key = (node.name.clone(), node.length.map(f64::to_bits), kids);
            let next = table.len();
            id[v] = *table.entry(key).or_insert(next);
        }
        id[0]
    };
    a.nodes.len() == b.nodes.len() && canon(a) == canon(b)
}
