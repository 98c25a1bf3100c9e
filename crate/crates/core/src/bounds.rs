//! Symmetric-DoF outer bound from odd reduced cycles and the 1/2-DoF test.

use num_rational::Ratio;
use serde::Serialize;

use crate::cycles::{
    enumerate_odd_cycles, optimize_completed_cycle, verify_completed_cycle, CompletedCycle, CycleParams,
    DEFAULT_MAX_CYCLE_COUNT, DEFAULT_MAX_CYCLE_LEN,
};
use crate::graphs::GraphBundle;
use crate::topology::NetworkTopology;

pub type Dof = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub max_cycle_len: usize,
    pub max_cycles: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            max_cycle_len: DEFAULT_MAX_CYCLE_LEN,
            max_cycles: DEFAULT_MAX_CYCLE_COUNT,
        }
    }
}

impl AnalyzeOptions {
    /// No caps on cycle length or count.
    pub fn exhaustive() -> Self {
        AnalyzeOptions {
            max_cycle_len: usize::MAX,
            max_cycles: usize::MAX,
        }
    }
}

/// `(1/2) * (1 - 1/(m + 2 l_sigma))`, reduced.
pub fn theorem1_bound_value(p: &CycleParams) -> Dof {
    let n = p.objective() as u64;
    Ratio::new(n - 1, 2 * n)
}

/// Which of the two 1/2-DoF conditions hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HalfDof {
    pub feasible: bool,
    /// No internal conflicts.
    pub c1_ok: bool,
    /// No odd cycle in the reduced graph.
    pub c2_ok: bool,
}

impl HalfDof {
    pub fn reason(&self) -> &'static str {
        match (self.c1_ok, self.c2_ok) {
            (true, true) => "no internal conflicts and the reduced graph is bipartite",
            (false, true) => "internal conflict present",
            (true, false) => "odd cycle in the reduced graph",
            (false, false) => "internal conflict present and odd cycle in the reduced graph",
        }
    }
}

pub fn half_dof_feasible(bundle: &GraphBundle) -> HalfDof {
    let c1_ok = bundle.internal_conflicts.is_empty();
    let c2_ok = bundle.reduced_bipartite();
    HalfDof {
        feasible: c1_ok && c2_ok,
        c1_ok,
        c2_ok,
    }
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub topology: NetworkTopology,
    pub bundle: GraphBundle,
    pub half_dof: HalfDof,
    pub theorem1_bound: Option<Dof>,
    pub certificate: Option<CompletedCycle>,
    pub possibly_not_tightest: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn half_dof_feasible(&self) -> bool {
        self.half_dof.feasible
    }
}

pub fn analyze(topology: &NetworkTopology, options: &AnalyzeOptions) -> BoundReport {
    let bundle = GraphBundle::build(topology);
    let half_dof = half_dof_feasible(&bundle);
    let mut notes = Vec::new();
    let mut theorem1_bound = None;
    let mut certificate = None;
    let mut possibly_not_tightest = false;

    if !half_dof.c2_ok {
        let odd = enumerate_odd_cycles(&bundle.reduced, options.max_cycle_len, options.max_cycles)
            .expect("a non-bipartite reduced graph has an odd cycle");
        let best = optimize_completed_cycle(&bundle, &odd.cycles)
            .expect("every reduced-graph cycle admits a completion");
        debug_assert!(verify_completed_cycle(&bundle, &best).ok());
        let objective = best.params.objective();
        // Any completed cycle costs at least 3m, so nothing beats 3 * shortest.
        let provably_best = objective == 3 * odd.shortest;
        let longer_could_win = odd.length_capped && objective > 3 * options.max_cycle_len.saturating_add(2);
        possibly_not_tightest = !provably_best && (odd.truncated || longer_could_win);
        let bound = theorem1_bound_value(&best.params);
        notes.push(format!(
            "odd reduced cycle: symmetric DoF per user <= {} (m={}, m2={}, l_sigma={})",
            fmt_dof(bound),
            best.params.m,
            best.params.m2,
            best.params.l_sigma
        ));
        if possibly_not_tightest {
            notes.push("cycle enumeration hit its caps; a smaller bound may exist (try --exhaustive)".into());
        }
        theorem1_bound = Some(bound);
        certificate = Some(best);
    }
    if !half_dof.c1_ok {
        notes.push(
            "internal conflict: symmetric DoF strictly below 1/2 (necessity of C1, external quantification out of scope)"
                .into(),
        );
    }
    if half_dof.feasible {
        notes.push("C1 and C2 hold: symmetric DoF 1/2 per user is achievable".into());
        if bundle.conflict_edges.is_empty() {
            notes.push("no conflict edges: 1/2 is not asserted to be optimal".into());
        } else {
            notes.push("a conflict edge exists, so 1/2 per user is optimal".into());
        }
    }

    BoundReport {
        topology: topology.clone(),
        bundle,
        half_dof,
        theorem1_bound,
        certificate,
        possibly_not_tightest,
        notes,
    }
}

/// `p/q` rendering of an exact DoF value.
pub fn fmt_dof(d: Dof) -> String {
    format!("{}/{}", d.numer(), d.denom())
}
