//! Feynman-type diagrams: vertices `(row, position)`, edges only between different rows.
//!
//! Rows and positions are 0-based in the API and 1-based in the text form.

mod contract;

use std::collections::HashMap;
use std::fmt;

use crate::error::{invalid, Error, Result};

pub use contract::{contract, moment_hermite, product_expectation, product_expectation_gram};

/// Largest total number of vertices accepted by the enumerators.
pub const MAX_ENUMERATION_ARITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub row: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    /// Number of vertices in each row.
    pub order: Vec<usize>,
    /// Edges `(a, b)` with `a` before `b` in row-major order, sorted.
    pub edges: Vec<(Vertex, Vertex)>,
}

impl Diagram {
    pub fn total(&self) -> usize {
        self.order.iter().sum()
    }

    pub fn is_complete(&self) -> bool {
        2 * self.edges.len() == self.total()
    }

    /// Vertices without an edge, in row-major order. Position `p` in this list is the
    /// `p`-th argument of the contracted kernel.
    pub fn free_vertices(&self) -> Vec<Vertex> {
        let mut used = vec![Vec::new(); self.order.len()];
        for (r, &n) in self.order.iter().enumerate() {
            used[r] = vec![false; n];
        }
        for (a, b) in &self.edges {
            used[a.row][a.pos] = true;
            used[b.row][b.pos] = true;
        }
        let mut out = Vec::new();
        for (r, row) in used.iter().enumerate() {
            for (p, &u) in row.iter().enumerate() {
                if !u {
                    out.push(Vertex { row: r, pos: p });
                }
            }
        }
        out
    }

    /// Complete, and the rows split into pairs with every edge inside a pair.
    pub fn is_regular(&self) -> bool {
        if !self.is_complete() {
            return false;
        }
        let k = self.order.len();
        let mut partner: Vec<Option<usize>> = vec![None; k];
        for (a, b) in &self.edges {
            for (x, y) in [(a.row, b.row), (b.row, a.row)] {
                match partner[x] {
                    None => partner[x] = Some(y),
                    Some(p) if p == y => {}
                    Some(_) => return false,
                }
            }
        }
        // partner links are symmetric by construction; rows without edges pair among themselves
        let empty = (0..k).filter(|&r| partner[r].is_none()).count();
        empty % 2 == 0
    }

    pub fn to_line(&self) -> String {
        if self.edges.is_empty() {
            return "-".into();
        }
        self.edges
            .iter()
            .map(|(a, b)| format!("{}.{}-{}.{}", a.row + 1, a.pos + 1, b.row + 1, b.pos + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_line(order: &[usize], line: &str) -> Result<Self> {
        let line = line.trim();
        let mut edges = Vec::new();
        if line != "-" {
            for tok in line.split_whitespace() {
                let (a, b) = tok.split_once('-').ok_or_else(|| invalid(format!("bad edge {tok}")))?;
                let v = |s: &str| -> Result<Vertex> {
                    let (r, p) = s.split_once('.').ok_or_else(|| invalid(format!("bad vertex {s}")))?;
                    let r: usize = r.parse().map_err(|_| invalid(format!("bad vertex {s}")))?;
                    let p: usize = p.parse().map_err(|_| invalid(format!("bad vertex {s}")))?;
                    if r == 0 || p == 0 || r > order.len() || p > order[r - 1] {
                        return Err(invalid(format!("vertex {s} outside the diagram")));
                    }
                    Ok(Vertex { row: r - 1, pos: p - 1 })
                };
                let (mut x, mut y) = (v(a)?, v(b)?);
                if x.row == y.row {
                    return Err(invalid(format!("edge {tok} joins a row to itself")));
                }
                if y < x {
                    std::mem::swap(&mut x, &mut y);
                }
                edges.push((x, y));
            }
        }
        edges.sort();
        let d = Diagram { order: order.to_vec(), edges };
        let mut seen = std::collections::HashSet::new();
        for (a, b) in &d.edges {
            if !seen.insert(*a) || !seen.insert(*b) {
                return Err(invalid("a vertex carries two edges"));
            }
        }
        Ok(d)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

fn check_order(order: &[usize]) -> Result<()> {
    let total: usize = order.iter().sum();
    if total > MAX_ENUMERATION_ARITY {
        return Err(Error::EnumerationTooLarge { arity: total, estimate: count_all(order) as f64 });
    }
    Ok(())
}

fn enumerate_impl(order: &[usize], complete_only: bool) -> Result<Vec<Diagram>> {
    check_order(order)?;
    let verts: Vec<Vertex> = order
        .iter()
        .enumerate()
        .flat_map(|(r, &n)| (0..n).map(move |p| Vertex { row: r, pos: p }))
        .collect();
    let mut matched = vec![false; verts.len()];
    let mut edges = Vec::new();
    let mut out = Vec::new();

    fn rec(
        i: usize,
        verts: &[Vertex],
        matched: &mut [bool],
        edges: &mut Vec<(Vertex, Vertex)>,
        complete_only: bool,
        order: &[usize],
        out: &mut Vec<Diagram>,
    ) {
        if i == verts.len() {
            let mut e = edges.clone();
            e.sort();
            out.push(Diagram { order: order.to_vec(), edges: e });
            return;
        }
        if matched[i] {
            rec(i + 1, verts, matched, edges, complete_only, order, out);
            return;
        }
        if !complete_only {
            rec(i + 1, verts, matched, edges, complete_only, order, out);
        }
        for j in i + 1..verts.len() {
            if matched[j] || verts[j].row == verts[i].row {
                continue;
            }
            matched[j] = true;
            edges.push((verts[i], verts[j]));
            rec(i + 1, verts, matched, edges, complete_only, order, out);
            edges.pop();
            matched[j] = false;
        }
    }

    rec(0, &verts, &mut matched, &mut edges, complete_only, order, &mut out);
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

/// All diagrams of the given row sizes, in lexicographic order of their edge lists.
pub fn enumerate(order: &[usize]) -> Result<Vec<Diagram>> {
    enumerate_impl(order, false)
}

/// Diagrams in which every vertex carries an edge.
pub fn enumerate_complete(order: &[usize]) -> Result<Vec<Diagram>> {
    enumerate_impl(order, true)
}

fn count_rec(state: Vec<usize>, complete: bool, memo: &mut HashMap<(Vec<usize>, bool), u128>) -> u128 {
    let mut state: Vec<usize> = state.into_iter().filter(|&n| n > 0).collect();
    state.sort_unstable();
    if state.is_empty() {
        return 1;
    }
    if let Some(&v) = memo.get(&(state.clone(), complete)) {
        return v;
    }
    // the first vertex of row 0 is either free or joined to some other row
    let mut total = 0u128;
    if !complete {
        let mut s = state.clone();
        s[0] -= 1;
        total += count_rec(s, complete, memo);
    }
    for r in 1..state.len() {
        let mut s = state.clone();
        let mult = s[r] as u128;
        s[0] -= 1;
        s[r] -= 1;
        total += mult * count_rec(s, complete, memo);
    }
    memo.insert((state, complete), total);
    total
}

/// Number of complete diagrams, without enumerating them.
pub fn count_complete(order: &[usize]) -> u128 {
    count_rec(order.to_vec(), true, &mut HashMap::new())
}

/// Number of all diagrams, without enumerating them.
pub fn count_all(order: &[usize]) -> u128 {
    count_rec(order.to_vec(), false, &mut HashMap::new())
}

/// Number of complete diagrams with `n` rows of `m` vertices each.
pub fn complete_count(m: usize, n: usize) -> u128 {
    count_complete(&vec![m; 2 * n])
}

/// Writes diagrams one per line after an `order` header.
pub fn to_text(order: &[usize], diagrams: &[Diagram]) -> String {
    let mut s = format!("order {}\n", order.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
    for d in diagrams {
        s.push_str(&d.to_line());
        s.push('\n');
    }
    s
}

pub fn from_text(text: &str) -> Result<(Vec<usize>, Vec<Diagram>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| invalid("empty diagram file"))?;
    let rest = head.strip_prefix("order").ok_or_else(|| invalid("missing order header"))?;
    let order: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| invalid(format!("bad row size {t}"))))
        .collect::<Result<_>>()?;
    let ds = lines.map(|l| Diagram::parse_line(&order, l)).collect::<Result<_>>()?;
    Ok((order, ds))
}
