//! Removal-based reference heuristic: start from every arc and alternate
//! between deleting the smallest arc at a balance-violating node and
//! re-extracting the (1,1)-core, until both constraints hold.

use crate::graph::{ArcId, RMultigraph};
use crate::preprocess::d_core_11_of;
use crate::settlement::{node_flows, Settlement};

pub fn rfb(graph: &RMultigraph) -> Settlement {
    let mut active: Vec<ArcId> = graph.all_arcs();
    loop {
        // Drop the globally smallest arc touching a violating node until
        // every spanned node is back inside its balance interval.
        loop {
            let flows = node_flows(graph, active.iter().copied());
            let mut violating = vec![false; graph.node_count()];
            let mut any = false;
            for (u, f) in &flows {
                if !graph.net_within_bounds(*u, f.net()) {
                    violating[u.idx()] = true;
                    any = true;
                }
            }
            if !any {
                break;
            }
            let victim = active
                .iter()
                .copied()
                .filter(|&a| violating[graph.tail(a).idx()] || violating[graph.head(a).idx()])
                .min_by_key(|&a| (graph.amount(a), a))
                .expect("violating node implies incident arcs");
            active.retain(|&a| a != victim);
        }
        let core = d_core_11_of(graph, &active);
        if core.len() == active.len() {
            return Settlement::from_arcs(graph, active);
        }
        active = core;
    }
}
