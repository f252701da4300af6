//! Resolution combinatorics: the ways an irregular vertex of valence k can
//! resolve into a regular cluster. Connected resolutions are planar trivalent
//! trees on the k cyclically ordered rays; disconnected ones partition the
//! rays into contiguous blocks, each resolved by its own tree (a bare
//! geodesic when a block has exactly two rays).

use super::NetError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Planar binary tree over a contiguous run of fan rays. Leaves carry the
/// ray index (0-based position around the fan).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockTree {
    Leaf(usize),
    Join(Box<BlockTree>, Box<BlockTree>),
}

impl BlockTree {
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            BlockTree::Leaf(i) => vec![*i],
            BlockTree::Join(l, r) => {
                let mut v = l.leaves();
                v.extend(r.leaves());
                v
            }
        }
    }

    fn join_count(&self) -> usize {
        match self {
            BlockTree::Leaf(_) => 0,
            BlockTree::Join(l, r) => 1 + l.join_count() + r.join_count(),
        }
    }
}

/// One cyclically contiguous block of a resolution, with its tree.
///
/// For a block of b >= 3 rays the unrooted trivalent tree is encoded as a
/// rooted binary tree over the first b-1 rays whose root joins to the last
/// ray; a block of exactly 2 rays is a single geodesic with `tree: None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// ray indices in cyclic order (length >= 2, contiguous mod k)
    pub rays: Vec<usize>,
    pub tree: Option<BlockTree>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.rays.len()
    }

    /// Interior vertices contributed by this block: b - 2 for b >= 3, else 0.
    pub fn interior_vertices(&self) -> usize {
        self.size().saturating_sub(2)
    }

    /// Edges contributed: 2b - 3 for b >= 3, 1 for b = 2.
    pub fn edges(&self) -> usize {
        if self.size() == 2 {
            1
        } else {
            2 * self.size() - 3
        }
    }

    /// Internal edges (not limiting to a fan ray): b - 3 for b >= 3, else 0.
    pub fn interior_edges(&self) -> usize {
        self.size().saturating_sub(3)
    }
}

/// A complete resolution choice at one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyDescriptor {
    pub valence: usize,
    pub blocks: Vec<Block>,
}

impl TopologyDescriptor {
    pub fn is_connected(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn interior_vertices(&self) -> usize {
        self.blocks.iter().map(Block::interior_vertices).sum()
    }

    pub fn edges(&self) -> usize {
        self.blocks.iter().map(Block::edges).sum()
    }

    pub fn interior_edges(&self) -> usize {
        self.blocks.iter().map(Block::interior_edges).sum()
    }

    /// Structural invariant: blocks partition 0..k contiguously, each block
    /// has >= 2 rays, and a block tree on b >= 3 leaves has b-2 joins
    /// (counting the implicit root join to the stem leaf).
    pub fn validate(&self) -> Result<(), NetError> {
        let k = self.valence;
        let mut covered = vec![false; k];
        for b in &self.blocks {
            if b.size() < 2 {
                return Err(NetError::Incidence("block with < 2 rays".into()));
            }
            for w in b.rays.windows(2) {
                if (w[0] + 1) % k != w[1] {
                    return Err(NetError::Incidence("block not cyclically contiguous".into()));
                }
            }
            for &r in &b.rays {
                if r >= k || covered[r] {
                    return Err(NetError::Incidence("ray missing or double-covered".into()));
                }
                covered[r] = true;
            }
            match (&b.tree, b.size()) {
                (None, 2) => {}
                (Some(t), s) if s >= 3 => {
                    let mut leaves = t.leaves();
                    leaves.push(*b.rays.last().unwrap());
                    if leaves != b.rays {
                        return Err(NetError::Incidence("tree leaves out of cyclic order".into()));
                    }
                    if t.join_count() + 1 != s - 1 {
                        return Err(NetError::Incidence("wrong join count for block size".into()));
                    }
                }
                _ => return Err(NetError::Incidence("tree/size mismatch".into())),
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(NetError::Incidence("resolution does not cover all rays".into()));
        }
        Ok(())
    }

    /// Compact form like "12|34" (k=4 tree) or "12,34" (two geodesic pairs).
    pub fn display_string(&self) -> String {
        self.blocks
            .iter()
            .map(|b| match &b.tree {
                None => b.rays.iter().map(|r| (r + 1).to_string()).collect::<String>(),
                Some(t) => tree_string(t, *b.rays.last().unwrap()),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn tree_string(t: &BlockTree, stem: usize) -> String {
    fn side(t: &BlockTree) -> String {
        match t {
            BlockTree::Leaf(i) => (i + 1).to_string(),
            BlockTree::Join(l, r) => format!("({}{})", side(l), side(r)),
        }
    }
    match t {
        BlockTree::Join(l, r) => format!("{}|{}{}", side(l), side(r), stem + 1),
        BlockTree::Leaf(i) => format!("{}|{}", i + 1, stem + 1),
    }
}

impl fmt::Display for TopologyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_string())
    }
}

fn bracketings(rays: &[usize]) -> Vec<BlockTree> {
    if rays.len() == 1 {
        return vec![BlockTree::Leaf(rays[0])];
    }
    let mut out = Vec::new();
    for split in 1..rays.len() {
        for l in bracketings(&rays[..split]) {
            for r in bracketings(&rays[split..]) {
                out.push(BlockTree::Join(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn block_trees(rays: &[usize]) -> Vec<Block> {
    if rays.len() == 2 {
        return vec![Block { rays: rays.to_vec(), tree: None }];
    }
    bracketings(&rays[..rays.len() - 1])
        .into_iter()
        .map(|t| Block { rays: rays.to_vec(), tree: Some(t) })
        .collect()
}

/// All resolutions of a valence-k fan. Without `allow_disconnected` this is
/// the set of planar trivalent trees on the k cyclic rays (Catalan(k-2) of
/// them); with it, every decomposition into >= 2 contiguous blocks of size
/// >= 2 is also enumerated, blocks resolved independently.
pub fn enumerate_resolutions(
    valence: usize,
    allow_disconnected: bool,
) -> Result<Vec<TopologyDescriptor>, NetError> {
    if valence < 3 {
        return Err(NetError::UnsupportedValence { vertex: usize::MAX, valence });
    }
    let mut out = Vec::new();
    for b in block_trees(&(0..valence).collect::<Vec<_>>()) {
        out.push(TopologyDescriptor { valence, blocks: vec![b] });
    }
    if allow_disconnected {
        for parts in contiguous_partitions(valence) {
            if parts.len() < 2 {
                continue;
            }
            let mut block_choices: Vec<Vec<Block>> =
                parts.iter().map(|rays| block_trees(rays)).collect();
            let mut stack = vec![Vec::new()];
            for choices in block_choices.drain(..) {
                let mut next = Vec::new();
                for partial in &stack {
                    for c in &choices {
                        let mut p: Vec<Block> = partial.clone();
                        p.push(c.clone());
                        next.push(p);
                    }
                }
                stack = next;
            }
            for blocks in stack {
                out.push(TopologyDescriptor { valence, blocks });
            }
        }
    }
    for d in &out {
        d.validate()?;
    }
    Ok(out)
}

/// All ways to cut the cycle 0..k into >= 1 contiguous blocks of size >= 2,
/// up to rotation of the block list (each partition listed once).
fn contiguous_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    // choose the set of "cut" positions: a cut before ray i separates i-1 and i
    for mask in 0u32..(1 << k) {
        let cuts: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if cuts.len() < 2 {
            continue; // need >= 2 cuts for >= 2 blocks
        }
        // block lengths between consecutive cuts must all be >= 2
        let mut ok = true;
        let mut blocks = Vec::new();
        for (ci, &c) in cuts.iter().enumerate() {
            let next = cuts[(ci + 1) % cuts.len()];
            let len = (next + k - c) % k;
            let len = if len == 0 { k } else { len };
            if len < 2 {
                ok = false;
                break;
            }
            blocks.push((0..len).map(|j| (c + j) % k).collect::<Vec<_>>());
        }
        if !ok {
            continue;
        }
        // canonical key: sort blocks by first element
        let mut key = blocks.clone();
        key.sort();
        if seen.insert(key) {
            out.push(blocks);
        }
    }
    out
}

/// Counts implied by a set of per-vertex resolution choices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionCounts {
    /// curves in the resolved network
    pub curves: usize,
    /// per chosen vertex: (new interior vertices, edges in cluster, internal edges)
    pub per_vertex: Vec<(usize, usize, usize)>,
}

/// Curve and vertex counts for resolving the listed valences with the given
/// choices. `n` is the initial curve count. Tree choices follow the closed
/// formulas (m = n + sum(k_i - 3)); disconnected choices are counted by
/// direct summation over blocks, where each 2-ray block merges two original
/// curves into one.
pub fn predicted_counts(n: usize, choices: &[&TopologyDescriptor]) -> ResolutionCounts {
    let mut m = n as isize;
    let mut per_vertex = Vec::new();
    for d in choices {
        per_vertex.push((d.interior_vertices(), d.edges(), d.interior_edges()));
        if d.is_connected() {
            m += d.valence as isize - 3;
        } else {
            for b in &d.blocks {
                if b.size() == 2 {
                    m -= 1; // two original curves fuse through the geodesic
                } else {
                    m += b.interior_edges() as isize;
                }
            }
        }
    }
    ResolutionCounts { curves: m.max(0) as usize, per_vertex }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan(n: usize) -> usize {
        // brute-force oracle via the recurrence C_0 = 1, C_{n+1} = sum C_i C_{n-i}
        let mut c = vec![1usize];
        for n_ in 0..n {
            let v: usize = (0..=n_).map(|i| c[i] * c[n_ - i]).sum();
            c.push(v);
        }
        c[n]
    }

    #[test]
    fn connected_counts_match_catalan_up_to_k6() {
        for k in 3..=6 {
            let res = enumerate_resolutions(k, false).unwrap();
            assert_eq!(res.len(), catalan(k - 2), "k = {k}");
            for d in &res {
                assert!(d.is_connected());
                assert_eq!(d.interior_vertices(), k - 2);
                assert_eq!(d.edges(), 2 * k - 3);
                assert_eq!(d.interior_edges(), k - 3);
            }
        }
    }

    #[test]
    fn k3_has_single_triod() {
        let res = enumerate_resolutions(3, true).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].interior_vertices(), 1);
        assert_eq!(res[0].edges(), 3);
        assert_eq!(res[0].interior_edges(), 0);
    }

    #[test]
    fn k4_enumeration_with_disconnected() {
        let conn = enumerate_resolutions(4, false).unwrap();
        assert_eq!(conn.len(), 2);
        let strings: Vec<String> = conn.iter().map(|d| d.display_string()).collect();
        assert!(strings.contains(&"(12)|34".into()) || strings.contains(&"12|34".into()),
            "got {strings:?}");
        let all = enumerate_resolutions(4, true).unwrap();
        assert_eq!(all.len(), 4, "2 trees + 2 pairings, got {all:?}");
        let disc: Vec<_> = all.iter().filter(|d| !d.is_connected()).collect();
        assert_eq!(disc.len(), 2);
        for d in disc {
            assert_eq!(d.blocks.len(), 2);
            assert!(d.blocks.iter().all(|b| b.size() == 2));
        }
    }

    #[test]
    fn unsupported_valence_is_an_error() {
        assert!(matches!(
            enumerate_resolutions(2, false),
            Err(NetError::UnsupportedValence { .. })
        ));
    }

    #[test]
    fn counts_match_quoted_formulas() {
        // n=4 curves, one 4-valent vertex, tree choice -> m = 5
        let res = enumerate_resolutions(4, false).unwrap();
        let counts = predicted_counts(4, &[&res[0]]);
        assert_eq!(counts.curves, 5);
        assert_eq!(counts.per_vertex[0], (2, 5, 1));
        // k=5 tree: 3 interior vertices, 7 edges, 2 interior edges
        let res5 = enumerate_resolutions(5, false).unwrap();
        let c5 = predicted_counts(5, &[&res5[0]]);
        assert_eq!(c5.per_vertex[0], (3, 7, 2));
        // k=3: the triod itself
        let res3 = enumerate_resolutions(3, false).unwrap();
        let c3 = predicted_counts(3, &[&res3[0]]);
        assert_eq!(c3.per_vertex[0], (1, 3, 0));
        assert_eq!(c3.curves, 3);
    }

    #[test]
    fn disconnected_pair_counts_by_direct_summation() {
        let all = enumerate_resolutions(4, true).unwrap();
        let disc: Vec<_> = all.iter().filter(|d| !d.is_connected()).collect();
        let counts = predicted_counts(4, &[disc[0]]);
        // two 2-blocks: no new junctions, two geodesics each fusing a curve pair
        assert_eq!(counts.per_vertex[0], (0, 2, 0));
        assert_eq!(counts.curves, 2);
    }
}
