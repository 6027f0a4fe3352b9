//! Exact solving: branch-and-bound over per-arc include/exclude decisions
//! with a flow-relaxation upper bound and a greedy cycle-cover lower bound,
//! plus an exhaustive oracle for verification.

use crate::beam::BudgetState;
use crate::enumerate::{enumerate_cycles_of, Cycle};
use crate::flow::upper_bound_on;
use crate::graph::{ArcId, RMultigraph};
use crate::money::Money;
use crate::preprocess::preprocess;
use crate::settlement::{check_feasible, Settlement};

/// Search-space visiting strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    Dfs,
    Bfs,
}

#[derive(Clone, Debug)]
pub struct BbOptions {
    pub visit: Visit,
    /// Hard ceiling on visited tree nodes; exceeding it is an error, never
    /// a silently suboptimal answer.
    pub node_budget: u64,
    pub max_cycle_len: usize,
    pub cycle_budget: usize,
}

impl Default for BbOptions {
    fn default() -> Self {
        BbOptions {
            visit: Visit::Dfs,
            node_budget: 10_000_000,
            max_cycle_len: 15,
            cycle_budget: crate::enumerate::DEFAULT_ENUM_BUDGET,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("node budget exhausted after {visited} tree nodes")]
    NodeBudgetExceeded { visited: u64 },
    #[error("brute force refused: {arcs} arcs exceeds the {limit}-arc guard")]
    TooManyArcs { arcs: usize, limit: usize },
}

/// Exact optimum of the settlement problem on the whole graph
/// (preprocessed internally). Deterministic: among equal-total optima the
/// lexicographically smallest arc-id set found wins.
pub fn settle_bb(graph: &RMultigraph, opts: &BbOptions) -> Result<Settlement, SolveError> {
    let arcs = preprocess(graph);
    settle_bb_on(graph, &arcs, opts)
}

/// Branch-and-bound restricted to `arcs` (a preprocessed component).
pub fn settle_bb_on(
    graph: &RMultigraph,
    arcs: &[ArcId],
    opts: &BbOptions,
) -> Result<Settlement, SolveError> {
    let (cycles, _truncated) =
        enumerate_cycles_of(graph, arcs, opts.max_cycle_len, opts.cycle_budget);
    let mut search = Search::new(graph, arcs, &cycles, opts.node_budget);
    match opts.visit {
        Visit::Dfs => search.run_dfs()?,
        Visit::Bfs => search.run_bfs()?,
    }
    Ok(search.best)
}

/// Decision order: non-increasing amount, ties by arc id.
fn decision_order(graph: &RMultigraph, arcs: &[ArcId]) -> Vec<ArcId> {
    let mut order = arcs.to_vec();
    order.sort_unstable_by_key(|&a| (std::cmp::Reverse(graph.amount(a)), a));
    order
}

struct Search<'a> {
    graph: &'a RMultigraph,
    order: Vec<ArcId>,
    /// Total amount of arcs from position i onward.
    suffix: Vec<Money>,
    cycles: &'a [Cycle],
    included: Vec<bool>,
    excluded: Vec<bool>,
    included_sum: Money,
    included_count: usize,
    lb_max: Money,
    best: Settlement,
    visited: u64,
    budget: u64,
}

enum NodeOutcome {
    Prune,
    Resolved,
    Expand,
    Leaf,
}

impl<'a> Search<'a> {
    fn new(graph: &'a RMultigraph, arcs: &[ArcId], cycles: &'a [Cycle], budget: u64) -> Search<'a> {
        let order = decision_order(graph, arcs);
        let mut suffix = vec![0; order.len() + 1];
        for i in (0..order.len()).rev() {
            suffix[i] = suffix[i + 1] + graph.amount(order[i]);
        }
        Search {
            graph,
            order,
            suffix,
            cycles,
            included: vec![false; graph.arc_count()],
            excluded: vec![false; graph.arc_count()],
            included_sum: 0,
            included_count: 0,
            lb_max: 0,
            best: Settlement::empty(),
            visited: 0,
            budget,
        }
    }

    fn offer(&mut self, candidate: Settlement) {
        if candidate.total() > self.best.total()
            || (candidate.total() == self.best.total() && candidate.lex_before(&self.best))
        {
            self.best = candidate;
        }
    }

    fn effective_arcs(&self, depth: usize) -> Vec<ArcId> {
        let mut v = Vec::with_capacity(self.order.len());
        for (i, &a) in self.order.iter().enumerate() {
            if i < depth {
                if self.included[a.idx()] {
                    v.push(a);
                }
            } else {
                v.push(a);
            }
        }
        v.sort_unstable();
        v
    }

    fn included_arcs(&self, depth: usize) -> Vec<ArcId> {
        let mut v: Vec<ArcId> = self.order[..depth]
            .iter()
            .copied()
            .filter(|a| self.included[a.idx()])
            .collect();
        v.sort_unstable();
        v
    }

    fn visit(&mut self, depth: usize) -> Result<NodeOutcome, SolveError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(SolveError::NodeBudgetExceeded {
                visited: self.visited,
            });
        }
        if depth == self.order.len() {
            let included = self.included_arcs(depth);
            let candidate = Settlement::from_arcs(self.graph, included);
            if check_feasible(self.graph, &candidate).is_ok() {
                self.lb_max = self.lb_max.max(candidate.total());
                self.offer(candidate);
            }
            return Ok(NodeOutcome::Leaf);
        }
        // Cheap bound first: everything not yet excluded.
        let trivial_ub = self.included_sum + self.suffix[depth];
        if trivial_ub < self.lb_max {
            return Ok(NodeOutcome::Prune);
        }
        let effective = self.effective_arcs(depth);
        let Some(ub) = upper_bound_on(self.graph, &effective, &self.included) else {
            // Forced arcs admit no relaxed solution: nothing below is feasible.
            return Ok(NodeOutcome::Prune);
        };
        if ub < self.lb_max {
            return Ok(NodeOutcome::Prune);
        }
        let lb = lb_from_cycles(
            self.graph,
            self.cycles,
            &self.included,
            self.included_count,
            &self.excluded,
        );
        let lb_total = lb.total();
        // A nonempty lower-bound settlement lies inside this subtree, so
        // it can never exceed the subtree's relaxation bound.
        debug_assert!(lb.is_empty() || lb_total <= ub);
        if !lb.is_empty() || self.included_count == 0 {
            self.offer(lb);
        }
        self.lb_max = self.lb_max.max(lb_total);
        if lb_total == ub {
            // The subtree is fully resolved: its best value is achieved by
            // the lower-bound settlement just offered.
            return Ok(NodeOutcome::Resolved);
        }
        Ok(NodeOutcome::Expand)
    }

    fn apply(&mut self, depth: usize, include: bool) {
        let a = self.order[depth];
        if include {
            self.included[a.idx()] = true;
            self.included_sum += self.graph.amount(a);
            self.included_count += 1;
        } else {
            self.excluded[a.idx()] = true;
        }
    }

    fn unapply(&mut self, depth: usize, include: bool) {
        let a = self.order[depth];
        if include {
            self.included[a.idx()] = false;
            self.included_sum -= self.graph.amount(a);
            self.included_count -= 1;
        } else {
            self.excluded[a.idx()] = false;
        }
    }

    fn run_dfs(&mut self) -> Result<(), SolveError> {
        enum Task {
            Visit(usize),
            Apply(usize, bool),
            Unapply(usize, bool),
        }
        let mut stack = vec![Task::Visit(0)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Apply(d, inc) => self.apply(d, inc),
                Task::Unapply(d, inc) => self.unapply(d, inc),
                Task::Visit(depth) => match self.visit(depth)? {
                    NodeOutcome::Prune | NodeOutcome::Resolved | NodeOutcome::Leaf => {}
                    NodeOutcome::Expand => {
                        // Include-first order; tasks push in reverse.
                        stack.push(Task::Unapply(depth, false));
                        stack.push(Task::Visit(depth + 1));
                        stack.push(Task::Apply(depth, false));
                        stack.push(Task::Unapply(depth, true));
                        stack.push(Task::Visit(depth + 1));
                        stack.push(Task::Apply(depth, true));
                    }
                },
            }
        }
        Ok(())
    }

    fn run_bfs(&mut self) -> Result<(), SolveError> {
        use std::collections::VecDeque;
        // Each queued node carries its included-bits over order[0..depth].
        let words = self.order.len().div_ceil(64).max(1);
        let mut queue: VecDeque<(usize, Box<[u64]>)> = VecDeque::new();
        queue.push_back((0, vec![0u64; words].into_boxed_slice()));
        while let Some((depth, bits)) = queue.pop_front() {
            self.load_state(depth, &bits);
            let outcome = self.visit(depth);
            self.clear_state(depth);
            match outcome? {
                NodeOutcome::Prune | NodeOutcome::Resolved | NodeOutcome::Leaf => {}
                NodeOutcome::Expand => {
                    let mut with = bits.clone();
                    with[depth / 64] |= 1 << (depth % 64);
                    queue.push_back((depth + 1, with));
                    queue.push_back((depth + 1, bits));
                }
            }
        }
        Ok(())
    }

    fn load_state(&mut self, depth: usize, bits: &[u64]) {
        for i in 0..depth {
            let include = bits[i / 64] & (1 << (i % 64)) != 0;
            self.apply(i, include);
        }
    }

    fn clear_state(&mut self, depth: usize) {
        for i in 0..depth {
            let a = self.order[i];
            if self.included[a.idx()] {
                self.unapply(i, true);
            } else {
                self.unapply(i, false);
            }
        }
    }
}

/// Greedy cycle-based feasible solution containing every arc of
/// `included` and none of `excluded`: a covering phase pulls in cycles
/// through the forced arcs, then remaining cycles join by non-increasing
/// marginal amount. Returns the empty settlement when the cover fails.
pub fn settle_bb_lb(
    graph: &RMultigraph,
    included: &[ArcId],
    excluded: &[ArcId],
    max_cycle_len: usize,
    cycle_budget: usize,
) -> Settlement {
    let mut is_excluded = vec![false; graph.arc_count()];
    for &a in excluded {
        is_excluded[a.idx()] = true;
    }
    let mut is_included = vec![false; graph.arc_count()];
    let mut n_included = 0;
    for &a in included {
        debug_assert!(!is_excluded[a.idx()], "included and excluded overlap");
        if !is_included[a.idx()] {
            is_included[a.idx()] = true;
            n_included += 1;
        }
    }
    let active: Vec<ArcId> = graph.arc_ids().filter(|a| !is_excluded[a.idx()]).collect();
    let (cycles, _) = enumerate_cycles_of(graph, &active, max_cycle_len, cycle_budget);
    lb_from_cycles(graph, &cycles, &is_included, n_included, &is_excluded)
}

fn lb_from_cycles(
    graph: &RMultigraph,
    cycles: &[Cycle],
    is_included: &[bool],
    included_count: usize,
    is_excluded: &[bool],
) -> Settlement {
    let mut alive: Vec<usize> = cycles
        .iter()
        .enumerate()
        .filter(|(_, c)| c.arcs.iter().all(|a| !is_excluded[a.idx()]))
        .map(|(i, _)| i)
        .collect();
    let mut state = BudgetState::new();
    let mut covered = 0usize;

    // Covering phase: pull in cycles through the still-uncovered forced
    // arcs, preferring high coverage-times-marginal-amount.
    while covered < included_count && !alive.is_empty() {
        alive.retain(|&i| state.admissible_with(graph, &cycles[i].arcs));
        let mut best: Option<(Money, usize)> = None;
        for &i in &alive {
            let c = &cycles[i];
            let mut cover_gain = 0 as Money;
            let mut marginal = 0 as Money;
            for &a in &c.arcs {
                if !state.contains(a) {
                    marginal += graph.amount(a);
                    if is_included[a.idx()] {
                        cover_gain += 1;
                    }
                }
            }
            let score = cover_gain * marginal;
            if score > 0 && best.is_none_or(|(s, _)| score > s) {
                best = Some((score, i));
            }
        }
        let Some((_, pick)) = best else { break };
        for &a in &cycles[pick].arcs {
            if !state.contains(a) && is_included[a.idx()] {
                covered += 1;
            }
        }
        state.commit(graph, &cycles[pick].arcs);
        alive.retain(|&i| i != pick);
    }
    if covered < included_count {
        return Settlement::empty();
    }

    // Greedy phase: remaining cycles by non-increasing marginal amount.
    loop {
        alive.retain(|&i| state.admissible_with(graph, &cycles[i].arcs));
        if alive.is_empty() {
            break;
        }
        let mut best: Option<(Money, usize)> = None;
        for &i in &alive {
            let marginal = state.marginal_amount(graph, &cycles[i].arcs);
            if best.is_none_or(|(m, _)| marginal > m) {
                best = Some((marginal, i));
            }
        }
        let (_, pick) = best.expect("alive nonempty");
        state.commit(graph, &cycles[pick].arcs);
        alive.retain(|&i| i != pick);
    }
    state.settlement(graph)
}

/// Exhaustive optimum by enumerating every arc subset; refuses graphs with
/// more than 20 arcs. Same tie-break as the branch-and-bound solver.
pub fn brute_force_optimal(graph: &RMultigraph) -> Result<Settlement, SolveError> {
    const LIMIT: usize = 20;
    let m = graph.arc_count();
    if m > LIMIT {
        return Err(SolveError::TooManyArcs {
            arcs: m,
            limit: LIMIT,
        });
    }
    let arcs = graph.all_arcs();
    let mut best = Settlement::empty();
    for mask in 0u32..(1u32 << m) {
        let subset: Vec<ArcId> = (0..m)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| arcs[i])
            .collect();
        let candidate = Settlement::from_arcs(graph, subset);
        if candidate.total() < best.total() {
            continue;
        }
        if !check_feasible(graph, &candidate).is_ok() {
            continue;
        }
        if candidate.total() > best.total()
            || (candidate.total() == best.total() && candidate.lex_before(&best))
        {
            best = candidate;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Cap;
    use crate::settlement::check_feasible;
    use crate::testutil::{fig2_day1, fig2_day2, settlement_of, small_graph, FIG2_DAY1_OPTIMAL};

    #[test]
    fn fig2_day1_exact_optimum() {
        let g = fig2_day1();
        let expected = settlement_of(&g, &FIG2_DAY1_OPTIMAL);
        for visit in [Visit::Dfs, Visit::Bfs] {
            let opts = BbOptions {
                visit,
                ..BbOptions::default()
            };
            let s = settle_bb(&g, &opts).unwrap();
            assert_eq!(s.total(), 5600);
            assert_eq!(s, expected);
        }
        let bf = brute_force_optimal(&g).unwrap();
        assert_eq!(bf, expected);
    }

    #[test]
    fn fig2_day2_optimum_is_empty() {
        let g = fig2_day2();
        let s = settle_bb(&g, &BbOptions::default()).unwrap();
        assert!(s.is_empty());
        let bf = brute_force_optimal(&g).unwrap();
        assert!(bf.is_empty());
    }

    #[test]
    fn cap_violating_cycle_gives_empty() {
        // The only cycle nets +10 at u against a zero cap margin.
        let g = small_graph(
            &[
                ("u", 0, -100, Cap::Finite(0)),
                ("v", 0, -100, Cap::Finite(0)),
            ],
            &[("a", "u", "v", 10), ("b", "v", "u", 20)],
        );
        let s = settle_bb(&g, &BbOptions::default()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn lower_bound_on_single_cycle_graph_returns_it() {
        let g = small_graph(
            &[("u", 0, -100, Cap::Infinite), ("v", 0, -100, Cap::Infinite)],
            &[("a", "u", "v", 10), ("b", "v", "u", 20)],
        );
        let lb = settle_bb_lb(&g, &[], &[], 15, 1_000_000);
        assert_eq!(lb.total(), 30);
        assert!(check_feasible(&g, &lb).is_ok());
    }

    #[test]
    fn lower_bound_cover_fails_for_uncyclable_arc() {
        // "c" is a pendant arc on no cycle: forcing it makes the cover fail.
        let g = small_graph(
            &[
                ("u", 0, -100, Cap::Infinite),
                ("v", 0, -100, Cap::Infinite),
                ("w", 0, -100, Cap::Infinite),
            ],
            &[("a", "u", "v", 10), ("b", "v", "u", 20), ("c", "u", "w", 5)],
        );
        let c = g.arc_id_of("c").unwrap();
        let lb = settle_bb_lb(&g, &[c], &[], 15, 1_000_000);
        assert!(lb.is_empty());
    }

    #[test]
    fn lower_bound_is_feasible_and_below_optimum_on_fig2() {
        let g = fig2_day1();
        let lb = settle_bb_lb(&g, &[], &[], 15, 1_000_000);
        assert!(check_feasible(&g, &lb).is_ok());
        assert!(lb.total() <= 5600);
        assert!(lb.total() > 0, "day-1 instance has feasible cycles");
    }

    #[test]
    fn lower_bound_respects_exclusions() {
        let g = fig2_day1();
        let excluded: Vec<_> = ["R-DE", "R-EA"]
            .iter()
            .map(|id| g.arc_id_of(id).unwrap())
            .collect();
        let lb = settle_bb_lb(&g, &[], &excluded, 15, 1_000_000);
        for a in lb.arc_ids() {
            assert!(!excluded.contains(a));
        }
        assert!(check_feasible(&g, &lb).is_ok());
    }

    #[test]
    fn brute_force_examples() {
        let empty = small_graph(&[("u", 0, 0, Cap::Infinite)], &[]);
        assert!(brute_force_optimal(&empty).unwrap().is_empty());

        // Two antiparallel equal arcs net to zero: perfect netting.
        let g = small_graph(
            &[("u", 0, 0, Cap::Finite(0)), ("v", 0, 0, Cap::Finite(0))],
            &[("a", "u", "v", 10), ("b", "v", "u", 10)],
        );
        let s = brute_force_optimal(&g).unwrap();
        assert_eq!(s.total(), 20);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn brute_force_guards_large_graphs() {
        let names: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
        let accounts: Vec<(&str, i64, i64, Cap)> = names
            .iter()
            .map(|n| (n.as_str(), 0i64, -100i64, Cap::Infinite))
            .collect();
        let mut arcs = Vec::new();
        let arc_names: Vec<String> = (0..21).map(|i| format!("a{i}")).collect();
        for (i, nm) in arc_names.iter().enumerate() {
            arcs.push((
                nm.as_str(),
                names[i % 8].as_str(),
                names[(i + 1) % 8].as_str(),
                10,
            ));
        }
        let g = small_graph(&accounts, &arcs);
        assert!(matches!(
            brute_force_optimal(&g),
            Err(SolveError::TooManyArcs { .. })
        ));
    }

    #[test]
    fn node_budget_is_an_error_not_a_wrong_answer() {
        let g = fig2_day1();
        let opts = BbOptions {
            node_budget: 1,
            ..BbOptions::default()
        };
        assert!(matches!(
            settle_bb(&g, &opts),
            Err(SolveError::NodeBudgetExceeded { .. })
        ));
    }

    #[test]
    fn random_instances_match_oracle_and_bfs_matches_dfs() {
        let mut rng = crate::rng::Rng::new(0xEAAC7);
        for round in 0..40 {
            let (book, recs) = crate::verify::random_instance(&mut rng, 6, 10);
            let g = crate::graph::build_graph(&book, &recs, crate::date::Date(0)).unwrap();
            let oracle = brute_force_optimal(&g).unwrap();
            let dfs = settle_bb(&g, &BbOptions::default()).unwrap();
            assert_eq!(dfs.total(), oracle.total(), "round {round}");
            assert!(check_feasible(&g, &dfs).is_ok());
            let bfs = settle_bb(
                &g,
                &BbOptions {
                    visit: Visit::Bfs,
                    ..BbOptions::default()
                },
            )
            .unwrap();
            assert_eq!(bfs.total(), dfs.total(), "round {round}");
        }
    }

    #[test]
    fn bound_sandwich_on_random_instances() {
        let mut rng = crate::rng::Rng::new(0x5A4D);
        for round in 0..40 {
            let (book, recs) = crate::verify::random_instance(&mut rng, 6, 10);
            let g = crate::graph::build_graph(&book, &recs, crate::date::Date(0)).unwrap();
            let oracle = brute_force_optimal(&g).unwrap();
            let lb = settle_bb_lb(&g, &[], &[], 15, 1_000_000);
            let ub = crate::flow::settlement_upper_bound(&g, &[], &[])
                .unwrap()
                .expect("unforced relaxation always feasible");
            assert!(lb.total() <= oracle.total(), "round {round}");
            assert!(oracle.total() <= ub, "round {round}");
            if !lb.is_empty() {
                assert!(check_feasible(&g, &lb).is_ok(), "round {round}");
            }
        }
    }
}
