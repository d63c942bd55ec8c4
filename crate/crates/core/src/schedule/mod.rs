//! Solution encoding, decoding and verification.
//!
//! Time is measured in integer periods starting at 0. An activity that
//! starts at `s` in a mode of duration `d` occupies periods `s..s + d`.
//! A workshop with window `(install, dismantle)` is installed during
//! periods `install..dismantle`; an empty window means it is never
//! installed.

mod decode;
pub mod report;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{CostMode, Instance};

pub use decode::{decode_serial, decode_with_release};

/// Flat solution vector: starts, workshop install times, workshop
/// dismantle times, modes and availability levels, in that gene order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub start: Vec<u32>,
    pub install: Vec<u32>,
    pub dismantle: Vec<u32>,
    /// Zero-based mode index per activity.
    pub mode: Vec<usize>,
    pub avail: Vec<u32>,
}

/// Which block of the chromosome a flat gene index falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gene {
    Start(usize),
    Install(usize),
    Dismantle(usize),
    Mode(usize),
    Avail(usize),
}

impl Chromosome {
    /// Assemble a chromosome whose workshop windows follow from the starts.
    pub fn from_schedule(inst: &Instance, start: Vec<u32>, mode: Vec<usize>, avail: Vec<u32>) -> Self {
        let windows = osw_windows(inst, &start, &mode);
        let (install, dismantle) = windows.iter().map(|w| (w.install, w.dismantle)).unzip();
        Self { start, install, dismantle, mode, avail }
    }

    /// `2n + 3K`.
    pub fn len(&self) -> usize {
        2 * self.start.len() + 3 * self.avail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gene(n: usize, k: usize, index: usize) -> Gene {
        match index {
            i if i < n => Gene::Start(i),
            i if i < n + k => Gene::Install(i - n),
            i if i < n + 2 * k => Gene::Dismantle(i - n - k),
            i if i < 2 * n + 2 * k => Gene::Mode(i - n - 2 * k),
            i => Gene::Avail(i - 2 * n - 2 * k),
        }
    }

    /// Genes as a flat integer vector in encoding order.
    pub fn to_genes(&self) -> Vec<u64> {
        let mut g = Vec::with_capacity(self.len());
        g.extend(self.start.iter().map(|&v| u64::from(v)));
        g.extend(self.install.iter().map(|&v| u64::from(v)));
        g.extend(self.dismantle.iter().map(|&v| u64::from(v)));
        g.extend(self.mode.iter().map(|&v| v as u64));
        g.extend(self.avail.iter().map(|&v| u64::from(v)));
        g
    }

    pub fn from_genes(n: usize, k: usize, genes: &[u64]) -> Self {
        assert_eq!(genes.len(), 2 * n + 3 * k, "gene vector length");
        let to32 = |s: &[u64]| s.iter().map(|&v| v as u32).collect::<Vec<_>>();
        Self {
            start: to32(&genes[..n]),
            install: to32(&genes[n..n + k]),
            dismantle: to32(&genes[n + k..n + 2 * k]),
            mode: genes[n + 2 * k..2 * n + 2 * k].iter().map(|&v| v as usize).collect(),
            avail: to32(&genes[2 * n + 2 * k..]),
        }
    }

    pub fn window(&self, k: usize) -> Window {
        Window { install: self.install[k], dismantle: self.dismantle[k] }
    }

    pub fn windows(&self) -> Vec<Window> {
        (0..self.avail.len()).map(|k| self.window(k)).collect()
    }

    pub fn finish(&self, inst: &Instance, activity: usize) -> u32 {
        self.start[activity] + inst.mode(activity, self.mode[activity]).duration
    }

    pub fn makespan(&self, inst: &Instance) -> u32 {
        (0..self.start.len()).map(|a| self.finish(inst, a)).max().unwrap_or(0)
    }

    /// Lengths match the instance and every mode index is valid.
    pub fn is_well_formed(&self, inst: &Instance) -> bool {
        let n = inst.n_activities();
        let k = inst.n_workshops();
        self.start.len() == n
            && self.mode.len() == n
            && self.install.len() == k
            && self.dismantle.len() == k
            && self.avail.len() == k
            && self.mode.iter().zip(&inst.activities).all(|(&m, a)| m < a.modes.len())
    }
}

/// Installation window of one workshop: installed during `install..dismantle`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub install: u32,
    pub dismantle: u32,
}

impl Window {
    pub const EMPTY: Window = Window { install: 0, dismantle: 0 };

    pub fn is_empty(&self) -> bool {
        self.dismantle <= self.install
    }

    /// Number of installed periods.
    pub fn len(&self) -> u32 {
        self.dismantle.saturating_sub(self.install)
    }

    pub fn contains(&self, t: u32) -> bool {
        self.install <= t && t < self.dismantle
    }

    /// One-based calendar day on which the workshop is installed.
    pub fn install_day(&self) -> u32 {
        self.install + 1
    }

    /// Calendar day on which the last activity using the workshop ends.
    pub fn dismantle_day(&self) -> u32 {
        self.dismantle
    }

    /// Days charged under the duration objective: dismantle day minus
    /// install day.
    pub fn billed_days(&self) -> u32 {
        if self.is_empty() {
            0
        } else {
            self.dismantle_day() - self.install_day()
        }
    }
}

/// Workshop windows implied by a schedule: from the earliest start to the
/// latest finish among activities that occupy the workshop in their chosen
/// mode.
pub fn osw_windows(inst: &Instance, start: &[u32], mode: &[usize]) -> Vec<Window> {
    let mut windows = vec![None::<Window>; inst.n_workshops()];
    for (a, act) in inst.activities.iter().enumerate() {
        let Some(m) = act.modes.get(mode[a]) else { continue };
        let s = start[a];
        let f = s + m.duration;
        for (k, w) in windows.iter_mut().enumerate() {
            if m.uses(k) {
                *w = Some(match *w {
                    None => Window { install: s, dismantle: f },
                    Some(w) => Window { install: w.install.min(s), dismantle: w.dismantle.max(f) },
                });
            }
        }
    }
    windows.into_iter().map(|w| w.unwrap_or(Window::EMPTY)).collect()
}

/// `Σ_k C_k · R_k`.
pub fn objective_level(inst: &Instance, avail: &[u32]) -> f64 {
    inst.workshops.iter().zip(avail).map(|(w, &r)| w.unit_cost * f64::from(r)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("workshop {} has no daily cost", .0 + 1)]
pub struct MissingDailyCost(pub usize);

/// `Σ_k cost_per_day_k · billed_days_k`.
pub fn objective_duration(inst: &Instance, windows: &[Window]) -> Result<f64, MissingDailyCost> {
    objective_duration_days(inst, &windows.iter().map(Window::billed_days).collect::<Vec<_>>())
}

/// Duration cost for explicitly given billed days per workshop.
pub fn objective_duration_days(inst: &Instance, days: &[u32]) -> Result<f64, MissingDailyCost> {
    let mut total = 0.0;
    for (k, (w, &d)) in inst.workshops.iter().zip(days).enumerate() {
        let c = w.cost_per_day.ok_or(MissingDailyCost(k))?;
        total += c * f64::from(d);
    }
    Ok(total)
}

/// Cost of a chromosome under the instance's cost mode.
///
/// Duration mode treats a missing daily cost as zero; validated instances
/// always carry one.
pub fn objective(inst: &Instance, sol: &Chromosome) -> f64 {
    match inst.cost_mode {
        CostMode::Level => objective_level(inst, &sol.avail),
        CostMode::Duration => sol
            .windows()
            .iter()
            .zip(&inst.workshops)
            .map(|(w, ws)| ws.cost_per_day.unwrap_or(0.0) * f64::from(w.billed_days()))
            .sum(),
    }
}

/// Per-workshop, per-period occupied area.
pub fn occupancy(inst: &Instance, start: &[u32], mode: &[usize], len: usize) -> Vec<Vec<u32>> {
    let mut occ = vec![vec![0u32; len]; inst.n_workshops()];
    for (a, act) in inst.activities.iter().enumerate() {
        let Some(m) = act.modes.get(mode[a]) else { continue };
        let s = start[a] as usize;
        for (k, row) in occ.iter_mut().enumerate() {
            if m.uses(k) {
                for cell in &mut row[s..s + m.duration as usize] {
                    *cell += m.space[k];
                }
            }
        }
    }
    occ
}

/// Highest occupancy of each workshop over the whole schedule.
pub fn peak_occupancy(inst: &Instance, start: &[u32], mode: &[usize]) -> Vec<u32> {
    let len = (0..start.len())
        .map(|a| (start[a] + inst.mode(a, mode[a]).duration) as usize)
        .max()
        .unwrap_or(0);
    occupancy(inst, start, mode, len)
        .into_iter()
        .map(|row| row.into_iter().max().unwrap_or(0))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintTag {
    Precedence,
    OswCapacity,
    SiteCapacity,
    OswWindow,
    Deadline,
    Mode,
    Lifetime,
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintTag::Precedence => "PRECEDENCE",
            ConstraintTag::OswCapacity => "OSW_CAPACITY",
            ConstraintTag::SiteCapacity => "SITE_CAPACITY",
            ConstraintTag::OswWindow => "OSW_WINDOW",
            ConstraintTag::Deadline => "DEADLINE",
            ConstraintTag::Mode => "MODE",
            ConstraintTag::Lifetime => "LIFETIME",
        })
    }
}

/// One violated constraint. Activity and workshop indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub tag: ConstraintTag,
    pub indices: Vec<usize>,
    pub period: Option<u32>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.tag, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedSchedule {
    /// `occupancy[k][t]`.
    pub occupancy: Vec<Vec<u32>>,
    pub makespan: u32,
    pub windows: Vec<Window>,
    pub violations: Vec<Diagnostic>,
}

impl DecodedSchedule {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, tag: ConstraintTag) -> bool {
        self.violations.iter().any(|d| d.tag == tag)
    }

    /// Highest number of workshops installed in any one period.
    pub fn max_installed(&self) -> usize {
        let len = self.occupancy.first().map_or(0, Vec::len) as u32;
        (0..len).map(|t| self.windows.iter().filter(|w| w.contains(t)).count()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("chromosome shape does not match the instance: {0}")]
pub struct ShapeError(pub String);

/// Verify a chromosome against every model constraint.
///
/// Capacity is checked per period: a workshop's occupancy at `t` sums only
/// activities running at `t`. Windows must equal the ones implied by the
/// starts, which also guarantees every occupying activity runs while its
/// workshop is installed.
pub fn check_feasible(inst: &Instance, sol: &Chromosome) -> Result<DecodedSchedule, ShapeError> {
    let n = inst.n_activities();
    let k = inst.n_workshops();
    if sol.start.len() != n || sol.mode.len() != n {
        return Err(ShapeError(format!("expected {n} starts and modes")));
    }
    if sol.install.len() != k || sol.dismantle.len() != k || sol.avail.len() != k {
        return Err(ShapeError(format!("expected {k} workshop genes per block")));
    }
    let mut v = Vec::new();
    let mut valid_mode = vec![true; n];
    for (a, act) in inst.activities.iter().enumerate() {
        if sol.mode[a] >= act.modes.len() {
            valid_mode[a] = false;
            v.push(Diagnostic {
                tag: ConstraintTag::Mode,
                indices: vec![a],
                period: None,
                message: format!("activity {} uses mode {} of {}", a + 1, sol.mode[a] + 1, act.modes.len()),
            });
        }
    }
    let dur = |a: usize| if valid_mode[a] { inst.mode(a, sol.mode[a]).duration } else { 0 };
    let finish = |a: usize| sol.start[a] + dur(a);

    for (a, act) in inst.activities.iter().enumerate() {
        for &p in &act.predecessors {
            if sol.start[a] < finish(p) {
                v.push(Diagnostic {
                    tag: ConstraintTag::Precedence,
                    indices: vec![p, a],
                    period: Some(sol.start[a]),
                    message: format!("activity {} starts at {} before predecessor {} finishes at {}", a + 1, sol.start[a], p + 1, finish(p)),
                });
            }
        }
    }

    let makespan = (0..n).map(finish).max().unwrap_or(0);
    if makespan > inst.deadline {
        v.push(Diagnostic {
            tag: ConstraintTag::Deadline,
            indices: vec![],
            period: Some(makespan),
            message: format!("makespan {makespan} exceeds deadline {}", inst.deadline),
        });
    }
    for a in 0..n {
        if sol.start[a] > inst.horizon {
            v.push(Diagnostic {
                tag: ConstraintTag::Deadline,
                indices: vec![a],
                period: Some(sol.start[a]),
                message: format!("activity {} starts after the horizon {}", a + 1, inst.horizon),
            });
        }
    }

    let windows = sol.windows();
    let len = windows
        .iter()
        .map(|w| w.dismantle)
        .chain(std::iter::once(makespan))
        .chain(std::iter::once(inst.horizon))
        .max()
        .unwrap_or(0) as usize;
    let modes_for_occ: Vec<usize> = (0..n).map(|a| if valid_mode[a] { sol.mode[a] } else { usize::MAX }).collect();
    let occ = occupancy(inst, &sol.start, &modes_for_occ, len);

    for (w, row) in occ.iter().enumerate() {
        if let Some(t) = row.iter().position(|&o| o > sol.avail[w]) {
            v.push(Diagnostic {
                tag: ConstraintTag::OswCapacity,
                indices: vec![w],
                period: Some(t as u32),
                message: format!("workshop {} holds {} > availability {} at period {t}", w + 1, row[t], sol.avail[w]),
            });
        }
    }

    let mut t = 0;
    while t < len {
        let load: u64 = windows
            .iter()
            .zip(&sol.avail)
            .filter(|(win, _)| win.contains(t as u32))
            .map(|(_, &r)| u64::from(r))
            .sum();
        if load > u64::from(inst.site_capacity) {
            let installed: Vec<usize> = (0..k).filter(|&w| windows[w].contains(t as u32)).collect();
            v.push(Diagnostic {
                tag: ConstraintTag::SiteCapacity,
                indices: installed,
                period: Some(t as u32),
                message: format!("installed area {load} exceeds site capacity {} at period {t}", inst.site_capacity),
            });
            // one diagnostic per run of violating periods
            while t < len {
                let load: u64 = windows.iter().zip(&sol.avail).filter(|(win, _)| win.contains(t as u32)).map(|(_, &r)| u64::from(r)).sum();
                if load <= u64::from(inst.site_capacity) {
                    break;
                }
                t += 1;
            }
        }
        t += 1;
    }

    let implied = osw_windows(inst, &sol.start, &modes_for_occ);
    for w in 0..k {
        if windows[w] != implied[w] && !(windows[w].is_empty() && implied[w].is_empty()) {
            v.push(Diagnostic {
                tag: ConstraintTag::OswWindow,
                indices: vec![w],
                period: None,
                message: format!(
                    "workshop {} window {}..{} differs from the activity span {}..{}",
                    w + 1,
                    windows[w].install,
                    windows[w].dismantle,
                    implied[w].install,
                    implied[w].dismantle
                ),
            });
        }
        for a in 0..n {
            if !valid_mode[a] || !inst.mode(a, sol.mode[a]).uses(w) {
                continue;
            }
            if sol.start[a] < windows[w].install || finish(a) > windows[w].dismantle {
                v.push(Diagnostic {
                    tag: ConstraintTag::OswWindow,
                    indices: vec![w, a],
                    period: Some(sol.start[a]),
                    message: format!("activity {} runs while workshop {} is not installed", a + 1, w + 1),
                });
            }
        }
        if let Some(life) = inst.workshops[w].max_lifetime {
            if windows[w].len() > life {
                v.push(Diagnostic {
                    tag: ConstraintTag::Lifetime,
                    indices: vec![w],
                    period: None,
                    message: format!("workshop {} is installed for {} periods, lifetime {life}", w + 1, windows[w].len()),
                });
            }
        }
    }

    Ok(DecodedSchedule { occupancy: occ, makespan, windows, violations: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, ModeSpec, Workshop};

    fn two_workshops() -> Instance {
        Instance {
            activities: vec![
                Activity { modes: vec![ModeSpec::new(3, vec![2, 0])], predecessors: vec![] },
                Activity { modes: vec![ModeSpec::new(2, vec![1, 0])], predecessors: vec![0] },
            ],
            workshops: vec![Workshop::with_unit_cost(10.0), Workshop::with_unit_cost(20.0)],
            site_capacity: 10,
            deadline: 10,
            horizon: 10,
            cost_mode: CostMode::Level,
        }
    }

    #[test]
    fn level_objective_is_weighted_sum() {
        let inst = two_workshops();
        assert_eq!(objective_level(&inst, &[0, 0]), 0.0);
        assert_eq!(objective_level(&inst, &[3, 1]), 50.0);
    }

    #[test]
    fn window_of_single_user_spans_its_run() {
        let inst = Instance {
            activities: vec![Activity { modes: vec![ModeSpec::new(3, vec![1, 0])], predecessors: vec![] }],
            ..two_workshops()
        };
        let w = osw_windows(&inst, &[4], &[0]);
        assert_eq!(w[0], Window { install: 4, dismantle: 7 });
        assert!(w[1].is_empty());
    }

    #[test]
    fn gene_blocks_follow_encoding_order() {
        assert_eq!(Chromosome::gene(2, 1, 0), Gene::Start(0));
        assert_eq!(Chromosome::gene(2, 1, 2), Gene::Install(0));
        assert_eq!(Chromosome::gene(2, 1, 3), Gene::Dismantle(0));
        assert_eq!(Chromosome::gene(2, 1, 5), Gene::Mode(1));
        assert_eq!(Chromosome::gene(2, 1, 6), Gene::Avail(0));
    }

    #[test]
    fn precedence_violation_is_diagnosed() {
        let inst = two_workshops();
        let sol = Chromosome::from_schedule(&inst, vec![0, 2], vec![0, 0], vec![2, 0]);
        let d = check_feasible(&inst, &sol).unwrap();
        assert!(d.has(ConstraintTag::Precedence));
        let ok = Chromosome::from_schedule(&inst, vec![0, 3], vec![0, 0], vec![2, 0]);
        assert!(check_feasible(&inst, &ok).unwrap().is_feasible());
    }

    #[test]
    fn stale_window_is_diagnosed() {
        let inst = two_workshops();
        let mut sol = Chromosome::from_schedule(&inst, vec![0, 3], vec![0, 0], vec![2, 0]);
        sol.dismantle[0] = 4;
        let d = check_feasible(&inst, &sol).unwrap();
        assert!(d.has(ConstraintTag::OswWindow));
    }

    #[test]
    fn billed_days_use_day_labels() {
        let w = Window { install: 0, dismantle: 26 };
        assert_eq!((w.install_day(), w.dismantle_day(), w.billed_days()), (1, 26, 25));
        assert_eq!(Window::EMPTY.billed_days(), 0);
    }
}
