//! Human-readable and CSV renderings of a schedule.
//!
//! Day labels are one-based: an activity starting at period `s` with
//! duration `d` runs from day `s + 1` through day `s + d`.

use std::fmt::Write;

use super::{check_feasible, Chromosome};
use crate::instance::Instance;

/// Activity table followed by a workshop table.
pub fn text_report(inst: &Instance, sol: &Chromosome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>5} {:>6} {:>6} {:>9}", "activity", "mode", "start", "finish", "duration");
    for a in 0..inst.n_activities() {
        let d = inst.mode(a, sol.mode[a]).duration;
        let (s, f) = day_span(sol.start[a], d);
        let _ = writeln!(out, "{:<10} {:>5} {:>6} {:>6} {:>9}", format!("A{}", a + 1), sol.mode[a] + 1, s, f, d);
    }
    out.push('\n');
    let _ = writeln!(out, "{:<10} {:>7} {:>9} {:>5} {:>6}", "workshop", "install", "dismantle", "days", "level");
    for (k, w) in sol.windows().iter().enumerate() {
        if w.is_empty() {
            let _ = writeln!(out, "{:<10} {:>7} {:>9} {:>5} {:>6}", format!("W{}", k + 1), "-", "-", 0, sol.avail[k]);
        } else {
            let _ = writeln!(
                out,
                "{:<10} {:>7} {:>9} {:>5} {:>6}",
                format!("W{}", k + 1),
                w.install_day(),
                w.dismantle_day(),
                w.billed_days(),
                sol.avail[k]
            );
        }
    }
    out
}

fn day_span(start: u32, duration: u32) -> (u32, u32) {
    if duration == 0 {
        (start, start)
    } else {
        (start + 1, start + duration)
    }
}

/// `period,W1,…,WK,installed_area` with one row per period up to the
/// latest dismantle time.
pub fn occupancy_csv(inst: &Instance, sol: &Chromosome) -> String {
    let decoded = match check_feasible(inst, sol) {
        Ok(d) => d,
        Err(e) => return format!("# {e}\n"),
    };
    let mut out = String::from("period");
    for k in 0..inst.n_workshops() {
        let _ = write!(out, ",W{}", k + 1);
    }
    out.push_str(",installed_area\n");
    let len = decoded.windows.iter().map(|w| w.dismantle).max().unwrap_or(0).max(decoded.makespan);
    for t in 0..len {
        let _ = write!(out, "{t}");
        for row in &decoded.occupancy {
            let _ = write!(out, ",{}", row.get(t as usize).copied().unwrap_or(0));
        }
        let area: u64 = decoded
            .windows
            .iter()
            .zip(&sol.avail)
            .filter(|(w, _)| w.contains(t))
            .map(|(_, &r)| u64::from(r))
            .sum();
        let _ = writeln!(out, ",{area}");
    }
    out
}
