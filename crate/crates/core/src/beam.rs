//! Beam-search heuristic: enumerate cycles, rank them by a
//! frequency-penalized score, repeatedly pick a beam by greedy weighted
//! max-cover, couple admissible pairs, augment each pair with further
//! cycles, and commit the best augmentation.
//!
//! The same engine runs over path sets for the path-refinement solver.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;

use crate::enumerate::{enumerate_cycles_of, Cycle, Path, DEFAULT_ENUM_BUDGET};
use crate::graph::{ArcId, NodeId, RMultigraph};
use crate::money::Money;
use crate::preprocess::preprocess;
use crate::settlement::Settlement;

/// Committed arc union plus the per-node net flow it induces. The net map
/// is derived from the committed set exactly, so re-committing an arc is a
/// no-op and feasibility checks stay incremental.
#[derive(Clone, Debug, Default)]
pub struct BudgetState {
    committed: HashSet<ArcId>,
    net: HashMap<NodeId, Money>,
    total: Money,
}

impl BudgetState {
    pub fn new() -> BudgetState {
        BudgetState::default()
    }

    pub fn contains(&self, a: ArcId) -> bool {
        self.committed.contains(&a)
    }

    pub fn committed_len(&self) -> usize {
        self.committed.len()
    }

    pub fn total(&self) -> Money {
        self.total
    }

    pub fn net_at(&self, u: NodeId) -> Money {
        self.net.get(&u).copied().unwrap_or(0)
    }

    /// Remaining room before `u` hits its cap, given what is committed.
    pub fn cap_headroom(&self, graph: &RMultigraph, u: NodeId) -> crate::money::Cap {
        graph.cap_margin(u).minus(self.net_at(u))
    }

    /// Remaining room before `u` hits its floor.
    pub fn floor_headroom(&self, graph: &RMultigraph, u: NodeId) -> Money {
        self.net_at(u) - graph.floor_margin(u)
    }

    /// Would committing `extra` (union semantics, duplicates allowed) keep
    /// every touched node inside its balance interval?
    pub fn admissible_with(&self, graph: &RMultigraph, extra: &[ArcId]) -> bool {
        let mut delta: HashMap<NodeId, Money> = HashMap::new();
        let mut seen: HashSet<ArcId> = HashSet::new();
        for &a in extra {
            if self.committed.contains(&a) || !seen.insert(a) {
                continue;
            }
            let w = graph.amount(a);
            *delta.entry(graph.tail(a)).or_insert(0) -= w;
            *delta.entry(graph.head(a)).or_insert(0) += w;
        }
        delta
            .iter()
            .all(|(&u, &d)| graph.net_within_bounds(u, self.net_at(u) + d))
    }

    /// Total amount `extra` would add beyond what is already committed.
    pub fn marginal_amount(&self, graph: &RMultigraph, extra: &[ArcId]) -> Money {
        let mut seen: HashSet<ArcId> = HashSet::new();
        extra
            .iter()
            .filter(|&&a| !self.committed.contains(&a) && seen.insert(a))
            .map(|&a| graph.amount(a))
            .sum()
    }

    /// Commits `extra` (union semantics). Idempotent per arc.
    pub fn commit(&mut self, graph: &RMultigraph, extra: &[ArcId]) {
        for &a in extra {
            if !self.committed.insert(a) {
                continue;
            }
            let w = graph.amount(a);
            *self.net.entry(graph.tail(a)).or_insert(0) -= w;
            *self.net.entry(graph.head(a)).or_insert(0) += w;
            self.total += w;
        }
    }

    pub fn settlement(&self, graph: &RMultigraph) -> Settlement {
        Settlement::from_arcs(graph, self.committed.iter().copied())
    }
}

/// Exact rational score of an arc structure: total amount divided by the
/// frequency-weighted amount `sum(w_e / f_e)`. Stored unreduced as the pair
/// `(amount * product(f), sum_e w_e * product(f)/f_e)`; comparisons
/// cross-multiply, so the ordering is exact whatever the magnitudes.
#[derive(Clone, Debug)]
pub struct Score {
    num: BigUint,
    den: BigUint,
}

impl Score {
    /// Compares the score against the rational `p / q`.
    pub fn cmp_ratio(&self, p: u64, q: u64) -> std::cmp::Ordering {
        (&self.num * BigUint::from(q)).cmp(&(&self.den * BigUint::from(p)))
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Score) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Score) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Score) -> std::cmp::Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

/// Frequency of each arc across a collection of arc structures.
pub fn arc_frequencies<'a>(
    structures: impl IntoIterator<Item = &'a [ArcId]>,
) -> HashMap<ArcId, u64> {
    let mut freq: HashMap<ArcId, u64> = HashMap::new();
    for arcs in structures {
        for &a in arcs {
            *freq.entry(a).or_insert(0) += 1;
        }
    }
    freq
}

/// Frequency-penalized score of one cycle. Every arc of the cycle must
/// appear in `freq` with count at least 1.
pub fn cycle_score(graph: &RMultigraph, cycle: &Cycle, freq: &HashMap<ArcId, u64>) -> Score {
    score_arcs(graph, &cycle.arcs, freq)
}

fn score_arcs(graph: &RMultigraph, arcs: &[ArcId], freq: &HashMap<ArcId, u64>) -> Score {
    let mut product = BigUint::from(1u8);
    for a in arcs {
        let f = *freq.get(a).expect("frequency of a member arc");
        assert!(f >= 1);
        product *= BigUint::from(f);
    }
    let amount: u64 = arcs.iter().map(|&a| graph.amount(a) as u64).sum();
    let mut den = BigUint::from(0u8);
    for a in arcs {
        let f = *freq.get(a).unwrap();
        den += BigUint::from(graph.amount(*a) as u64) * (&product / BigUint::from(f));
    }
    Score {
        num: BigUint::from(amount) * product,
        den,
    }
}

pub(crate) trait ArcBag {
    fn bag_arcs(&self) -> &[ArcId];
    fn bag_amount(&self) -> Money;
}

impl ArcBag for Cycle {
    fn bag_arcs(&self) -> &[ArcId] {
        &self.arcs
    }
    fn bag_amount(&self) -> Money {
        self.amount
    }
}

impl ArcBag for Path {
    fn bag_arcs(&self) -> &[ArcId] {
        &self.arcs
    }
    fn bag_amount(&self) -> Money {
        self.amount
    }
}

/// Total score order over items: score desc, amount desc, index asc.
/// `rank[i]` is the position of item `i` in that order.
fn score_ranks<T: ArcBag>(graph: &RMultigraph, items: &[T]) -> Vec<u32> {
    let freq = arc_frequencies(items.iter().map(|c| c.bag_arcs()));
    let scores: Vec<Score> = items
        .iter()
        .map(|c| score_arcs(graph, c.bag_arcs(), &freq))
        .collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .cmp(&scores[a])
            .then(items[b].bag_amount().cmp(&items[a].bag_amount()))
            .then(a.cmp(&b))
    });
    let mut rank = vec![0u32; items.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos as u32;
    }
    rank
}

/// Greedy weighted max-cover selection of at most `k` items: repeatedly
/// take the item covering the largest still-uncovered amount, ties broken
/// by score rank. Returns indices into `items` in selection order.
fn beam_select_generic<T: ArcBag>(
    graph: &RMultigraph,
    items: &[T],
    candidates: &[usize],
    rank: &[u32],
    k: usize,
) -> Vec<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    assert!(k >= 1);
    let mut covered: HashSet<ArcId> = HashSet::new();
    let marginal = |covered: &HashSet<ArcId>, i: usize| -> Money {
        let mut seen = HashSet::new();
        items[i]
            .bag_arcs()
            .iter()
            .filter(|&&a| !covered.contains(&a) && seen.insert(a))
            .map(|&a| graph.amount(a))
            .sum()
    };
    // Lazy greedy: cached marginals only ever shrink. Nothing is covered
    // yet, so the initial marginal is the plain amount (parallel arcs
    // repeat inside a bag at most never: arcs of one cycle are distinct).
    let mut heap: BinaryHeap<(Money, Reverse<u32>, usize)> = candidates
        .iter()
        .map(|&i| (items[i].bag_amount(), Reverse(rank[i]), i))
        .collect();
    let mut picked = Vec::new();
    while picked.len() < k {
        let Some((cached, r, i)) = heap.pop() else {
            break;
        };
        let fresh = marginal(&covered, i);
        if fresh < cached {
            heap.push((fresh, r, i));
            continue;
        }
        picked.push(i);
        for &a in items[i].bag_arcs() {
            covered.insert(a);
        }
    }
    picked
}

/// Public max-cover selection over cycles.
pub fn beam_select(graph: &RMultigraph, cycles: &[Cycle], k: usize) -> Vec<Cycle> {
    let rank = score_ranks(graph, cycles);
    let all: Vec<usize> = (0..cycles.len()).collect();
    beam_select_generic(graph, cycles, &all, &rank, k)
        .into_iter()
        .map(|i| cycles[i].clone())
        .collect()
}

fn spanned_node_set(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = arcs
        .iter()
        .flat_map(|&a| [graph.tail(a), graph.head(a)])
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

fn nodes_overlap(a: &[NodeId], b: &[NodeId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Pairs of `items` (as index pairs, `i <= j`; `i == j` is the degenerate
/// single-item pair) whose arc union on top of `state` keeps the balance
/// constraints. Pairs made of two individually inadmissible items, or of an
/// inadmissible item and a node-disjoint partner, cannot be admissible and
/// are skipped without testing.
fn admissible_pairs_generic<T: ArcBag>(
    graph: &RMultigraph,
    items: &[T],
    candidates: &[usize],
    state: &BudgetState,
) -> Vec<(usize, usize)> {
    let adm: Vec<bool> = candidates
        .iter()
        .map(|&i| state.admissible_with(graph, items[i].bag_arcs()))
        .collect();
    let nodes: Vec<Vec<NodeId>> = candidates
        .iter()
        .map(|&i| spanned_node_set(graph, items[i].bag_arcs()))
        .collect();
    let mut pairs = Vec::new();
    for (x, &ix) in candidates.iter().enumerate() {
        if adm[x] {
            pairs.push((ix, ix));
        }
        for (y, &iy) in candidates.iter().enumerate().skip(x + 1) {
            let worth_testing = (adm[x] && adm[y]) || nodes_overlap(&nodes[x], &nodes[y]);
            if !worth_testing {
                continue;
            }
            let mut union: Vec<ArcId> = items[ix].bag_arcs().to_vec();
            union.extend_from_slice(items[iy].bag_arcs());
            if state.admissible_with(graph, &union) {
                pairs.push((ix, iy));
            }
        }
    }
    pairs
}

/// Admissible cycle pairs against a committed state.
pub fn admissible_pairs(
    graph: &RMultigraph,
    cycles: &[Cycle],
    state: &BudgetState,
) -> Vec<(usize, usize)> {
    let all: Vec<usize> = (0..cycles.len()).collect();
    admissible_pairs_generic(graph, cycles, &all, state)
}

/// The naive quadratic reference filter; used by tests to pin down the
/// pruned enumeration.
pub fn admissible_pairs_naive(
    graph: &RMultigraph,
    cycles: &[Cycle],
    state: &BudgetState,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..cycles.len() {
        for j in i..cycles.len() {
            let mut union: Vec<ArcId> = cycles[i].arcs.clone();
            union.extend_from_slice(&cycles[j].arcs);
            if state.admissible_with(graph, &union) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// One full beam run over `items`, committing into `state`. Returns the
/// indices of items whose arcs were committed.
pub(crate) fn run_beam<T: ArcBag>(
    graph: &RMultigraph,
    items: &[T],
    k: usize,
    state: &mut BudgetState,
) -> Vec<usize> {
    if items.is_empty() {
        return Vec::new();
    }
    let rank = score_ranks(graph, items);
    let mut alive: Vec<bool> = vec![true; items.len()];
    let mut committed_items = Vec::new();
    loop {
        let candidates: Vec<usize> = (0..items.len()).filter(|&i| alive[i]).collect();
        if candidates.is_empty() {
            break;
        }
        let beam = beam_select_generic(graph, items, &candidates, &rank, k);
        let mut pairs = admissible_pairs_generic(graph, items, &beam, state);
        // Canonical pair order: by score rank, then index.
        for p in &mut pairs {
            if rank[p.0] > rank[p.1] {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_by_key(|&(i, j)| (rank[i], rank[j], i, j));

        // Augmentation order over the beam: score rank ascending.
        let mut by_rank = beam.clone();
        by_rank.sort_by_key(|&i| rank[i]);

        let mut best: Option<(Money, Vec<ArcId>, Vec<usize>)> = None;
        for &(i, j) in &pairs {
            // Seed with the whole pair at once: the two sides may only be
            // admissible jointly.
            let mut seed: Vec<ArcId> = items[i].bag_arcs().to_vec();
            if i != j {
                seed.extend_from_slice(items[j].bag_arcs());
            }
            let mut union = PendingUnion::new(state);
            let seeded = union.try_add(graph, &seed);
            debug_assert!(seeded, "admissible pair must seed");
            let mut members = if i == j { vec![i] } else { vec![i, j] };
            for &z in &by_rank {
                if z == i || z == j {
                    continue;
                }
                if union.try_add(graph, items[z].bag_arcs()) {
                    members.push(z);
                }
            }
            let marginal = union.marginal;
            if best.as_ref().is_none_or(|(m, _, _)| marginal > *m) {
                best = Some((marginal, union.into_arcs(), members));
            }
        }
        if let Some((marginal, arcs, members)) = best {
            if marginal > 0 {
                state.commit(graph, &arcs);
                committed_items.extend(members);
            }
        }
        for i in beam {
            alive[i] = false;
        }
        for i in 0..items.len() {
            if alive[i] && items[i].bag_arcs().iter().all(|&a| state.contains(a)) {
                alive[i] = false;
            }
        }
    }
    committed_items.sort_unstable();
    committed_items.dedup();
    committed_items
}

/// A tentative arc union on top of a committed state, grown one structure
/// at a time with feasibility enforced at every step.
struct PendingUnion<'a> {
    state: &'a BudgetState,
    arcs: HashSet<ArcId>,
    delta: HashMap<NodeId, Money>,
    marginal: Money,
}

impl<'a> PendingUnion<'a> {
    fn new(state: &'a BudgetState) -> PendingUnion<'a> {
        PendingUnion {
            state,
            arcs: HashSet::new(),
            delta: HashMap::new(),
            marginal: 0,
        }
    }

    fn try_add(&mut self, graph: &RMultigraph, arcs: &[ArcId]) -> bool {
        let fresh: Vec<ArcId> = {
            let mut seen = HashSet::new();
            arcs.iter()
                .copied()
                .filter(|&a| !self.arcs.contains(&a) && !self.state.contains(a) && seen.insert(a))
                .collect()
        };
        let mut extra: HashMap<NodeId, Money> = HashMap::new();
        for &a in &fresh {
            let w = graph.amount(a);
            *extra.entry(graph.tail(a)).or_insert(0) -= w;
            *extra.entry(graph.head(a)).or_insert(0) += w;
        }
        let ok = extra.iter().all(|(&u, &d)| {
            let net = self.state.net_at(u) + self.delta.get(&u).copied().unwrap_or(0) + d;
            graph.net_within_bounds(u, net)
        });
        if !ok {
            return false;
        }
        for (u, d) in extra {
            *self.delta.entry(u).or_insert(0) += d;
        }
        for &a in &fresh {
            self.arcs.insert(a);
            self.marginal += graph.amount(a);
        }
        true
    }

    fn into_arcs(self) -> Vec<ArcId> {
        let mut v: Vec<ArcId> = self.arcs.into_iter().collect();
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Debug)]
pub struct BeamParams {
    pub k: usize,
    pub max_cycle_len: usize,
    pub cycle_budget: usize,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            k: 1000,
            max_cycle_len: 15,
            cycle_budget: DEFAULT_ENUM_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BeamOutcome {
    pub settlement: Settlement,
    /// Cycles whose arcs were committed, in canonical order.
    pub cycles: Vec<Cycle>,
    /// True when cycle enumeration hit its budget.
    pub truncated: bool,
}

/// Beam-search heuristic on the whole graph: preprocesses, then runs one
/// beam per weakly connected component (cycles never span components, so
/// this is the same search space with deterministic per-component pools).
pub fn settle_beam(graph: &RMultigraph, params: &BeamParams) -> BeamOutcome {
    let kept = preprocess(graph);
    let split = crate::preprocess::split_components_of(graph, &kept);
    let mut arcs: Vec<crate::graph::ArcId> = Vec::new();
    let mut cycles = Vec::new();
    let mut truncated = false;
    for comp in &split.components {
        let out = settle_beam_on(graph, comp, params);
        arcs.extend_from_slice(out.settlement.arc_ids());
        cycles.extend(out.cycles);
        truncated |= out.truncated;
    }
    BeamOutcome {
        settlement: Settlement::from_arcs(graph, arcs),
        cycles,
        truncated,
    }
}

/// Beam-search heuristic restricted to `arcs` (a preprocessed component).
pub fn settle_beam_on(graph: &RMultigraph, arcs: &[ArcId], params: &BeamParams) -> BeamOutcome {
    let (cycles, truncated) =
        enumerate_cycles_of(graph, arcs, params.max_cycle_len, params.cycle_budget);
    let mut state = BudgetState::new();
    let committed = run_beam(graph, &cycles, params.k, &mut state);
    let settlement = state.settlement(graph);
    debug_assert!(crate::settlement::check_feasible(graph, &settlement).is_ok());
    BeamOutcome {
        settlement,
        cycles: committed.into_iter().map(|i| cycles[i].clone()).collect(),
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Cap;
    use crate::settlement::check_feasible;
    use crate::testutil::{fig2_day1, small_graph};

    fn freq_of(pairs: &[(&str, u64)], g: &RMultigraph) -> HashMap<ArcId, u64> {
        pairs
            .iter()
            .map(|(id, f)| (g.arc_id_of(id).unwrap(), *f))
            .collect()
    }

    #[test]
    fn score_is_one_when_all_frequencies_are_one() {
        let g = small_graph(
            &[("u", 0, -100, Cap::Infinite), ("v", 0, -100, Cap::Infinite)],
            &[("a", "u", "v", 10), ("b", "v", "u", 20)],
        );
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        let freq = freq_of(&[("a", 1), ("b", 1)], &g);
        let s = cycle_score(&g, &cycles[0], &freq);
        assert_eq!(s.cmp_ratio(1, 1), std::cmp::Ordering::Equal);
    }

    #[test]
    fn score_hand_evaluated_example() {
        // Amounts (10, 20, 30) with frequencies (1, 2, 3):
        // 60 / (10 + 10 + 10) = 2.
        let g = small_graph(
            &[
                ("u", 0, -100, Cap::Infinite),
                ("v", 0, -100, Cap::Infinite),
                ("w", 0, -100, Cap::Infinite),
            ],
            &[
                ("a", "u", "v", 10),
                ("b", "v", "w", 20),
                ("c", "w", "u", 30),
            ],
        );
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        assert_eq!(cycles.len(), 1);
        let freq = freq_of(&[("a", 1), ("b", 2), ("c", 3)], &g);
        let s = cycle_score(&g, &cycles[0], &freq);
        assert_eq!(s.cmp_ratio(2, 1), std::cmp::Ordering::Equal);

        // Doubling every frequency doubles the score.
        let freq2 = freq_of(&[("a", 2), ("b", 4), ("c", 6)], &g);
        let s2 = cycle_score(&g, &cycles[0], &freq2);
        assert_eq!(s2.cmp_ratio(4, 1), std::cmp::Ordering::Equal);
        assert_eq!(s2.cmp(&s), std::cmp::Ordering::Greater);
    }

    #[test]
    fn beam_select_takes_everything_when_k_is_large() {
        let g = fig2_day1();
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        let picked = beam_select(&g, &cycles, cycles.len() + 5);
        assert_eq!(picked.len(), cycles.len());
    }

    #[test]
    fn beam_select_prefers_heavier_disjoint_cycle() {
        let g = small_graph(
            &[
                ("u", 0, -500, Cap::Infinite),
                ("v", 0, -500, Cap::Infinite),
                ("x", 0, -500, Cap::Infinite),
                ("y", 0, -500, Cap::Infinite),
            ],
            &[
                ("a", "u", "v", 60),
                ("b", "v", "u", 40),
                ("c", "x", "y", 30),
                ("d", "y", "x", 20),
            ],
        );
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        assert_eq!(cycles.len(), 2);
        let picked = beam_select(&g, &cycles, 1);
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].amount, 100);
    }

    #[test]
    fn beam_select_uses_marginal_weight_on_overlap() {
        // Two triangles sharing arc "s": after the first is taken, the
        // second's marginal weight is only its two private arcs.
        let g = small_graph(
            &[
                ("u", 0, -500, Cap::Infinite),
                ("v", 0, -500, Cap::Infinite),
                ("w", 0, -500, Cap::Infinite),
                ("x", 0, -500, Cap::Infinite),
            ],
            &[
                ("s", "u", "v", 50),
                ("a", "v", "w", 30),
                ("b", "w", "u", 30),
                ("c", "v", "x", 10),
                ("d", "x", "u", 10),
            ],
        );
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        assert_eq!(cycles.len(), 2);
        let picked = beam_select(&g, &cycles, 2);
        assert_eq!(picked.len(), 2);
        assert_eq!(picked[0].amount, 110);
        assert_eq!(picked[1].amount, 70);
    }

    #[test]
    fn admissible_pairs_match_naive_filter_on_fig2() {
        let g = fig2_day1();
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        let state = BudgetState::new();
        let mut fast = admissible_pairs(&g, &cycles, &state);
        let mut naive = admissible_pairs_naive(&g, &cycles, &state);
        fast.sort_unstable();
        naive.sort_unstable();
        assert_eq!(fast, naive);
    }

    #[test]
    fn admissible_pairs_match_naive_on_random_instances() {
        let mut rng = crate::rng::Rng::new(0xBEA3);
        for round in 0..40 {
            let (book, recs) = crate::verify::random_instance(&mut rng, 6, 12);
            let g = crate::graph::build_graph(&book, &recs, crate::date::Date(0)).unwrap();
            let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 8, 200);
            if cycles.len() > 12 {
                continue;
            }
            // Random committed prefix to vary the state.
            let mut state = BudgetState::new();
            if !cycles.is_empty() && rng.chance(0.5) {
                let pick = rng.below(cycles.len() as u64) as usize;
                if state.admissible_with(&g, &cycles[pick].arcs) {
                    state.commit(&g, &cycles[pick].arcs);
                }
            }
            let mut fast = admissible_pairs(&g, &cycles, &state);
            let mut naive = admissible_pairs_naive(&g, &cycles, &state);
            fast.sort_unstable();
            naive.sort_unstable();
            assert_eq!(fast, naive, "round {round}");
        }
    }

    #[test]
    fn single_feasible_cycle_graph_settles_it() {
        let g = small_graph(
            &[
                ("u", 50, 0, Cap::Finite(100)),
                ("v", 50, 0, Cap::Finite(100)),
            ],
            &[("a", "u", "v", 10), ("b", "v", "u", 20)],
        );
        let out = settle_beam(&g, &BeamParams::default());
        assert_eq!(out.settlement.total(), 30);
        assert_eq!(out.cycles.len(), 1);
    }

    #[test]
    fn cap_violating_cycle_is_rejected() {
        // Two 2-cycles through u; the second would push u past its cap.
        let g = small_graph(
            &[
                ("u", 0, -500, Cap::Finite(15)),
                ("v", 0, -500, Cap::Infinite),
                ("w", 0, -500, Cap::Infinite),
            ],
            &[
                ("a", "u", "v", 10),
                ("b", "v", "u", 20), // net +10 at u
                ("c", "u", "w", 10),
                ("d", "w", "u", 20), // another +10 at u: 20 > 15
            ],
        );
        let out = settle_beam(
            &g,
            &BeamParams {
                k: 2,
                ..BeamParams::default()
            },
        );
        assert!(check_feasible(&g, &out.settlement).is_ok());
        assert_eq!(out.settlement.total(), 30);
    }

    #[test]
    fn fig2_day1_beam_is_feasible_and_bounded_by_optimum() {
        let g = fig2_day1();
        let out = settle_beam(&g, &BeamParams::default());
        assert!(check_feasible(&g, &out.settlement).is_ok());
        assert!(out.settlement.total() <= 5600);
        assert!(out.settlement.total() > 0);
    }

    #[test]
    fn beam_total_never_exceeds_the_oracle_optimum() {
        let mut rng = crate::rng::Rng::new(0xB0B);
        for _ in 0..40 {
            let (book, recs) = crate::verify::random_instance(&mut rng, 7, 14);
            let g = crate::graph::build_graph(&book, &recs, crate::date::Date(0)).unwrap();
            let beam = settle_beam(&g, &BeamParams::default());
            let oracle = crate::exact::brute_force_optimal(&g).unwrap();
            assert!(beam.settlement.total() <= oracle.total());
        }
    }

    #[test]
    fn committing_twice_changes_nothing() {
        let g = fig2_day1();
        let (cycles, _) = crate::enumerate::enumerate_cycles(&g, 15, 100);
        let mut state = BudgetState::new();
        state.commit(&g, &cycles[0].arcs);
        let total = state.total();
        let nets: Vec<Money> = g.node_ids().map(|u| state.net_at(u)).collect();
        state.commit(&g, &cycles[0].arcs);
        assert_eq!(state.total(), total);
        assert_eq!(
            g.node_ids().map(|u| state.net_at(u)).collect::<Vec<_>>(),
            nets
        );
    }
}
