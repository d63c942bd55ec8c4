//! Problem instances: activities with execution modes, on-site workshops,
//! precedence, site capacity and deadline.
//!
//! Activities are stored zero-based and exclude the two dummy activities.
//! The canonical file format and the PSPLIB importer number real activities
//! from 1, with 0 and `N + 1` reserved for the dummy source and sink.

mod format;
mod psplib;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use format::{parse_instance, serialize_instance};
pub use psplib::{import_psplib_mm, AugmentConfig};

/// One execution mode of an activity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Duration in periods.
    pub duration: u32,
    /// Area demanded in each workshop while the activity runs, indexed by workshop.
    pub space: Vec<u32>,
}

impl ModeSpec {
    pub fn new(duration: u32, space: Vec<u32>) -> Self {
        Self { duration, space }
    }

    /// Whether running in this mode occupies workshop `k`.
    ///
    /// Zero-duration modes never occupy anything.
    #[inline]
    pub fn uses(&self, k: usize) -> bool {
        self.duration > 0 && self.space[k] > 0
    }

    pub fn total_space(&self) -> u64 {
        self.space.iter().map(|&r| u64::from(r)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub modes: Vec<ModeSpec>,
    /// Zero-based indices of real predecessor activities (finish-to-start).
    pub predecessors: Vec<usize>,
}

/// Installation and dismantling lead times, kept as metadata only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadTimes {
    pub install: u32,
    pub dismantle: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workshop {
    /// Cost per reserved area unit.
    pub unit_cost: f64,
    /// Maximum number of installed periods.
    pub max_lifetime: Option<u32>,
    /// Cost per installed day, used by [`CostMode::Duration`].
    pub cost_per_day: Option<f64>,
    pub lead_times: Option<LeadTimes>,
}

impl Workshop {
    pub fn with_unit_cost(unit_cost: f64) -> Self {
        Self { unit_cost, max_lifetime: None, cost_per_day: None, lead_times: None }
    }
}

/// Which cost the solvers minimize.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    /// Sum of unit cost times availability level.
    #[default]
    Level,
    /// Sum of daily cost times billed installation days.
    Duration,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Level => "level",
            CostMode::Duration => "duration",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub activities: Vec<Activity>,
    pub workshops: Vec<Workshop>,
    /// Site area `Q`.
    pub site_capacity: u32,
    /// Project deadline `T_max`.
    pub deadline: u32,
    /// Planning horizon `T`.
    pub horizon: u32,
    pub cost_mode: CostMode,
}

/// A violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDiagnostic {
    pub kind: InstanceIssue,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceIssue {
    Cycle,
    MissingMode,
    BadPredecessor,
    ModeShape,
    SiteCapacity,
    Deadline,
    WorkshopCost,
    Lifetime,
    MissingDailyCost,
    UnschedulableActivity,
}

impl fmt::Display for InstanceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

impl Instance {
    /// Number of real (non-dummy) activities `N`.
    pub fn n_activities(&self) -> usize {
        self.activities.len()
    }

    pub fn n_workshops(&self) -> usize {
        self.workshops.len()
    }

    pub fn total_modes(&self) -> usize {
        self.activities.iter().map(|a| a.modes.len()).sum()
    }

    pub fn mode(&self, activity: usize, mode: usize) -> &ModeSpec {
        &self.activities[activity].modes[mode]
    }

    /// Successor lists derived from the predecessor lists.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.activities.len()];
        for (j, act) in self.activities.iter().enumerate() {
            for &p in &act.predecessors {
                if p < succ.len() {
                    succ[p].push(j);
                }
            }
        }
        succ
    }

    /// Longest-path depth of each activity (activities without predecessors
    /// sit on level 0), or `None` when the precedence graph has a cycle or a
    /// dangling reference.
    pub fn levels(&self) -> Option<Vec<usize>> {
        let n = self.activities.len();
        let succ = self.successors();
        let mut indeg: Vec<usize> = self.activities.iter().map(|a| a.predecessors.len()).collect();
        if self.activities.iter().any(|a| a.predecessors.iter().any(|&p| p >= n)) {
            return None;
        }
        let mut level = vec![0usize; n];
        let mut queue: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
        let mut seen = 0;
        while let Some(j) = queue.pop() {
            seen += 1;
            for &s in &succ[j] {
                level[s] = level[s].max(level[j] + 1);
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push(s);
                }
            }
        }
        (seen == n).then_some(level)
    }

    /// Activities sorted by precedence level, ascending index within a level.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let level = self.levels()?;
        let mut order: Vec<usize> = (0..self.activities.len()).collect();
        order.sort_by_key(|&j| (level[j], j));
        Some(order)
    }

    /// Critical path length when every activity runs in its shortest mode.
    /// This is a lower bound on any feasible makespan.
    pub fn makespan_lower_bound(&self) -> u32 {
        let Some(order) = self.topological_order() else {
            return 0;
        };
        let mut finish = vec![0u32; self.activities.len()];
        for &j in &order {
            let act = &self.activities[j];
            let start = act.predecessors.iter().map(|&p| finish[p]).max().unwrap_or(0);
            let d = act.modes.iter().map(|m| m.duration).min().unwrap_or(0);
            finish[j] = start + d;
        }
        finish.into_iter().max().unwrap_or(0)
    }

    /// For each activity, the shortest possible time from its finish to the
    /// end of the project (sum of minimum durations along the longest tail).
    pub fn min_tail(&self) -> Vec<u32> {
        let n = self.activities.len();
        let succ = self.successors();
        let mut tail = vec![0u32; n];
        if let Some(order) = self.topological_order() {
            for &j in order.iter().rev() {
                tail[j] = succ[j]
                    .iter()
                    .map(|&s| {
                        let d = self.activities[s].modes.iter().map(|m| m.duration).min().unwrap_or(0);
                        d + tail[s]
                    })
                    .max()
                    .unwrap_or(0);
            }
        }
        tail
    }

    /// Largest demand for workshop `k` over every activity and mode.
    pub fn max_demand(&self, k: usize) -> u32 {
        self.activities
            .iter()
            .flat_map(|a| a.modes.iter())
            .filter(|m| m.duration > 0)
            .map(|m| m.space[k])
            .max()
            .unwrap_or(0)
    }

    /// Largest demand for workshop `k` given a fixed mode vector.
    pub fn max_demand_for(&self, k: usize, modes: &[usize]) -> u32 {
        self.activities
            .iter()
            .zip(modes)
            .map(|(a, &m)| a.modes.get(m).filter(|m| m.duration > 0).map_or(0, |m| m.space[k]))
            .max()
            .unwrap_or(0)
    }

    /// Check every instance invariant and return one diagnostic per violation.
    pub fn validate(&self) -> Vec<InstanceDiagnostic> {
        validate_instance(self)
    }
}

/// Check every instance invariant and return one diagnostic per violation.
pub fn validate_instance(inst: &Instance) -> Vec<InstanceDiagnostic> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(InstanceDiagnostic { kind, message });
    let n = inst.activities.len();
    let k = inst.workshops.len();

    if inst.site_capacity == 0 {
        push(InstanceIssue::SiteCapacity, "site capacity Q must be positive".into());
    }
    if inst.deadline == 0 {
        push(InstanceIssue::Deadline, "deadline TMAX must be positive".into());
    }
    if inst.deadline > inst.horizon {
        push(
            InstanceIssue::Deadline,
            format!("deadline {} exceeds horizon {}", inst.deadline, inst.horizon),
        );
    }
    for (w, ws) in inst.workshops.iter().enumerate() {
        if !(ws.unit_cost.is_finite() && ws.unit_cost >= 0.0) {
            push(InstanceIssue::WorkshopCost, format!("workshop {} has invalid cost {}", w + 1, ws.unit_cost));
        }
        if let Some(c) = ws.cost_per_day {
            if !(c.is_finite() && c >= 0.0) {
                push(InstanceIssue::WorkshopCost, format!("workshop {} has invalid daily cost {c}", w + 1));
            }
        } else if inst.cost_mode == CostMode::Duration {
            push(InstanceIssue::MissingDailyCost, format!("workshop {} has no daily cost", w + 1));
        }
        if ws.max_lifetime == Some(0) {
            push(InstanceIssue::Lifetime, format!("workshop {} has zero lifetime", w + 1));
        }
    }
    let mut structure_ok = true;
    for (j, act) in inst.activities.iter().enumerate() {
        if act.modes.is_empty() {
            push(InstanceIssue::MissingMode, format!("activity {} has no modes", j + 1));
        }
        for (m, mode) in act.modes.iter().enumerate() {
            if mode.space.len() != k {
                structure_ok = false;
                push(
                    InstanceIssue::ModeShape,
                    format!("activity {} mode {} lists {} demands for {} workshops", j + 1, m + 1, mode.space.len(), k),
                );
            }
        }
        for &p in &act.predecessors {
            if p >= n || p == j {
                structure_ok = false;
                push(InstanceIssue::BadPredecessor, format!("activity {} has invalid predecessor {}", j + 1, p + 1));
            }
        }
    }
    if structure_ok && inst.levels().is_none() {
        push(InstanceIssue::Cycle, "precedence graph contains a cycle".into());
    }
    if structure_ok {
        for (j, act) in inst.activities.iter().enumerate() {
            let min_total = act.modes.iter().map(ModeSpec::total_space).min();
            if let Some(min_total) = min_total {
                if min_total > u64::from(inst.site_capacity) {
                    push(
                        InstanceIssue::UnschedulableActivity,
                        format!(
                            "unschedulable activity {}: smallest total space {} exceeds site capacity {}",
                            j + 1,
                            min_total,
                            inst.site_capacity
                        ),
                    );
                }
            }
        }
    }
    out
}
