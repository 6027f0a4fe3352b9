//! Shared helpers for integration tests: fixture loading and independent
//! brute-force enumeration oracles (subset checking, no DFS shared with
//! the implementation under test).

use std::collections::BTreeSet;
use std::path::PathBuf;

use settle_core::graph::{ArcId, NodeId, RMultigraph};
use settle_core::io;
use settle_core::{AccountBook, Date, Receivable};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> (AccountBook, Vec<Receivable>, Date) {
    let text = std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"));
    let instance = io::parse_instance_json(&text).unwrap();
    let today = instance.today;
    let (book, recs) = instance.into_parts().unwrap();
    (book, recs, today)
}

/// All node-simple cycles of length <= `max_len` by exhaustive subset
/// checking: a subset qualifies iff every spanned node has in- and
/// out-degree exactly one and a single walk covers every arc.
#[allow(dead_code)]
pub fn oracle_cycles(g: &RMultigraph, max_len: usize) -> BTreeSet<Vec<ArcId>> {
    let arcs: Vec<ArcId> = g.arc_ids().collect();
    let m = arcs.len();
    assert!(m <= 16, "oracle is exponential");
    let mut found = BTreeSet::new();
    'mask: for mask in 1u32..(1 << m) {
        let subset: Vec<ArcId> = (0..m)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| arcs[i])
            .collect();
        if subset.len() > max_len {
            continue;
        }
        let mut next: std::collections::HashMap<NodeId, ArcId> = Default::default();
        let mut indeg: std::collections::HashMap<NodeId, u32> = Default::default();
        for &a in &subset {
            if next.insert(g.tail(a), a).is_some() {
                continue 'mask;
            }
            *indeg.entry(g.head(a)).or_insert(0) += 1;
        }
        if indeg.values().any(|&d| d != 1) || indeg.len() != subset.len() {
            continue;
        }
        let start = *next.keys().min().unwrap();
        let mut seq = Vec::new();
        let mut cur = start;
        for _ in 0..subset.len() {
            let Some(&a) = next.get(&cur) else {
                continue 'mask;
            };
            seq.push(a);
            cur = g.head(a);
        }
        let mut walked = seq.clone();
        walked.sort_unstable();
        let mut expected = subset.clone();
        expected.sort_unstable();
        if cur != start || walked != expected {
            continue;
        }
        found.insert(seq);
    }
    found
}

/// All node-simple source-to-target paths of length <= `max_len` by
/// exhaustive subset checking.
#[allow(dead_code)]
pub fn oracle_paths(
    g: &RMultigraph,
    sources: &[NodeId],
    targets: &[NodeId],
    max_len: usize,
) -> BTreeSet<Vec<ArcId>> {
    let arcs: Vec<ArcId> = g.arc_ids().collect();
    let m = arcs.len();
    assert!(m <= 16);
    let mut found = BTreeSet::new();
    'mask: for mask in 1u32..(1 << m) {
        let subset: Vec<ArcId> = (0..m)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| arcs[i])
            .collect();
        if subset.len() > max_len {
            continue;
        }
        let mut next: std::collections::HashMap<NodeId, ArcId> = Default::default();
        let mut indeg: std::collections::HashMap<NodeId, u32> = Default::default();
        for &a in &subset {
            if next.insert(g.tail(a), a).is_some() {
                continue 'mask;
            }
            let d = indeg.entry(g.head(a)).or_insert(0);
            *d += 1;
            if *d > 1 {
                continue 'mask;
            }
        }
        let starts: Vec<NodeId> = next
            .keys()
            .filter(|u| !indeg.contains_key(u))
            .copied()
            .collect();
        if starts.len() != 1 || !sources.contains(&starts[0]) {
            continue;
        }
        let mut seq = Vec::new();
        let mut cur = starts[0];
        while let Some(&a) = next.get(&cur) {
            seq.push(a);
            cur = g.head(a);
        }
        if seq.len() != subset.len() || cur == starts[0] || !targets.contains(&cur) {
            continue;
        }
        found.insert(seq);
    }
    found
}
