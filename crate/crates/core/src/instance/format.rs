//! Canonical line-oriented instance format.
//!
//! ```text
//! MOSWACP v1
//! N 2
//! K 1
//! Q 4
//! TMAX 6
//! T 8
//! costmode = level
//! OSW 1 : cost = 10 ; lifetime = -
//! ACT 1 : pred = - ; modes = (2; 1)(1; 3)
//! ACT 2 : pred = 1 ; modes = (3; 2)
//! ```
//!
//! Activities and workshops are numbered from 1. `#` starts a comment.
//! Workshop lines may carry the optional fields `per_day = <num>` (daily
//! cost for the duration objective) and `lead = <install>/<dismantle>`.

use std::fmt::Write as _;

use super::{Activity, CostMode, Instance, LeadTimes, ModeSpec, Workshop};
use crate::error::InstanceError;

const HEADER: &str = "MOSWACP v1";

#[derive(Default)]
struct Partial {
    n: Option<usize>,
    k: Option<usize>,
    q: Option<u32>,
    tmax: Option<u32>,
    t: Option<u32>,
    cost_mode: Option<CostMode>,
    acts: Vec<(usize, usize, Activity)>,
    osws: Vec<(usize, usize, Workshop)>,
}

/// Parse a canonical-format document.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut seen_header = false;
    let mut p = Partial::default();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(InstanceError::syntax(lineno, format!("expected header `{HEADER}`")));
            }
            seen_header = true;
            continue;
        }
        parse_line(line, lineno, &mut p)?;
    }
    if !seen_header {
        return Err(InstanceError::syntax(1, "missing header"));
    }
    assemble(p)
}

fn parse_line(line: &str, lineno: usize, p: &mut Partial) -> Result<(), InstanceError> {
    if let Some(rest) = line.strip_prefix("ACT ") {
        let (idx, body) = split_indexed(rest, lineno)?;
        p.acts.push((lineno, idx, parse_activity(body, lineno)?));
        return Ok(());
    }
    if let Some(rest) = line.strip_prefix("OSW ") {
        let (idx, body) = split_indexed(rest, lineno)?;
        p.osws.push((lineno, idx, parse_workshop(body, lineno)?));
        return Ok(());
    }
    if let Some(rest) = line.strip_prefix("costmode") {
        let value = rest.trim_start().strip_prefix('=').map(str::trim);
        let mode = match value {
            Some("level") => CostMode::Level,
            Some("duration") => CostMode::Duration,
            _ => return Err(InstanceError::syntax(lineno, "costmode must be `level` or `duration`")),
        };
        return set_once(&mut p.cost_mode, mode, "costmode", lineno);
    }
    let mut parts = line.split_whitespace();
    let key = parts.next().unwrap_or("");
    let value = parts.next().ok_or_else(|| InstanceError::syntax(lineno, format!("missing value for `{key}`")))?;
    if parts.next().is_some() {
        return Err(InstanceError::syntax(lineno, format!("trailing tokens after `{key}`")));
    }
    match key {
        "N" => set_once(&mut p.n, int(value, lineno)?, key, lineno),
        "K" => set_once(&mut p.k, int(value, lineno)?, key, lineno),
        "Q" => set_once(&mut p.q, int(value, lineno)?, key, lineno),
        "TMAX" => set_once(&mut p.tmax, int(value, lineno)?, key, lineno),
        "T" => set_once(&mut p.t, int(value, lineno)?, key, lineno),
        _ => Err(InstanceError::syntax(lineno, format!("unknown directive `{key}`"))),
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, key: &str, lineno: usize) -> Result<(), InstanceError> {
    if slot.is_some() {
        return Err(InstanceError::syntax(lineno, format!("duplicate `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn int<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T, InstanceError> {
    s.trim().parse().map_err(|_| InstanceError::syntax(lineno, format!("expected a non-negative integer, found `{}`", s.trim())))
}

fn num(s: &str, lineno: usize) -> Result<f64, InstanceError> {
    let v: f64 = s.trim().parse().map_err(|_| InstanceError::syntax(lineno, format!("expected a number, found `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(InstanceError::syntax(lineno, "numbers must be finite"));
    }
    Ok(v)
}

fn split_indexed(rest: &str, lineno: usize) -> Result<(usize, &str), InstanceError> {
    let (idx, body) = rest.split_once(':').ok_or_else(|| InstanceError::syntax(lineno, "expected `:` after index"))?;
    Ok((int(idx, lineno)?, body))
}

/// Split `a = x ; b = y` into key/value pairs.
fn fields(body: &str, lineno: usize) -> Result<Vec<(&str, &str)>, InstanceError> {
    body.split(';')
        .map(|f| {
            let (k, v) = f.split_once('=').ok_or_else(|| InstanceError::syntax(lineno, format!("expected `key = value`, found `{}`", f.trim())))?;
            Ok((k.trim(), v.trim()))
        })
        .collect()
}

fn parse_activity(body: &str, lineno: usize) -> Result<Activity, InstanceError> {
    // modes contain `;` inside parentheses, so split on the first ` ; modes`
    let (pred_part, modes_part) = body
        .split_once("modes")
        .ok_or_else(|| InstanceError::syntax(lineno, "activity line needs `modes = ...`"))?;
    let pred_part = pred_part.trim().trim_end_matches(';').trim();
    let (key, value) = pred_part.split_once('=').ok_or_else(|| InstanceError::syntax(lineno, "activity line needs `pred = ...`"))?;
    if key.trim() != "pred" {
        return Err(InstanceError::syntax(lineno, format!("unexpected field `{}`", key.trim())));
    }
    let mut predecessors = Vec::new();
    let value = value.trim();
    if value != "-" && !value.is_empty() {
        for tok in value.split(',') {
            let p: usize = int(tok, lineno)?;
            // 0 is the dummy source and carries no constraint
            if p > 0 {
                predecessors.push(p - 1);
            }
        }
    }
    predecessors.sort_unstable();
    predecessors.dedup();

    let modes_str = modes_part
        .trim_start()
        .strip_prefix('=')
        .ok_or_else(|| InstanceError::syntax(lineno, "expected `=` after `modes`"))?
        .trim();
    let mut modes = Vec::new();
    let mut rest = modes_str;
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| InstanceError::syntax(lineno, "modes must be written as `(d; r_1,...,r_K)`"))?;
        let (duration, space) = inner.0.split_once(';').ok_or_else(|| InstanceError::syntax(lineno, "mode needs `;` between duration and demands"))?;
        let space = space.trim();
        let space = if space.is_empty() {
            Vec::new()
        } else {
            space.split(',').map(|s| int(s, lineno)).collect::<Result<Vec<u32>, _>>()?
        };
        modes.push(ModeSpec { duration: int(duration, lineno)?, space });
        rest = inner.1.trim_start();
    }
    Ok(Activity { modes, predecessors })
}

fn parse_workshop(body: &str, lineno: usize) -> Result<Workshop, InstanceError> {
    let mut cost = None;
    let mut lifetime = None;
    let mut per_day = None;
    let mut lead = None;
    for (key, value) in fields(body, lineno)? {
        match key {
            "cost" => cost = Some(num(value, lineno)?),
            "lifetime" => {
                lifetime = Some(if value == "-" { None } else { Some(int(value, lineno)?) });
            }
            "per_day" => per_day = Some(num(value, lineno)?),
            "lead" => {
                let (a, b) = value.split_once('/').ok_or_else(|| InstanceError::syntax(lineno, "lead must be `<install>/<dismantle>`"))?;
                lead = Some(LeadTimes { install: int(a, lineno)?, dismantle: int(b, lineno)? });
            }
            other => return Err(InstanceError::syntax(lineno, format!("unknown workshop field `{other}`"))),
        }
    }
    Ok(Workshop {
        unit_cost: cost.ok_or_else(|| InstanceError::syntax(lineno, "workshop line needs `cost`"))?,
        max_lifetime: lifetime.ok_or_else(|| InstanceError::syntax(lineno, "workshop line needs `lifetime`"))?,
        cost_per_day: per_day,
        lead_times: lead,
    })
}

fn assemble(p: Partial) -> Result<Instance, InstanceError> {
    let missing = |what: &str| InstanceError::syntax(0, format!("missing `{what}` directive"));
    let n = p.n.ok_or_else(|| missing("N"))?;
    let k = p.k.ok_or_else(|| missing("K"))?;

    let mut activities: Vec<Option<Activity>> = vec![None; n];
    for (lineno, idx, act) in p.acts {
        if idx == 0 || idx > n {
            return Err(InstanceError::syntax(lineno, format!("activity index {idx} outside 1..={n}")));
        }
        if act.predecessors.iter().any(|&q| q >= n) {
            return Err(InstanceError::syntax(lineno, format!("predecessor outside 1..={n}")));
        }
        if activities[idx - 1].replace(act).is_some() {
            return Err(InstanceError::syntax(lineno, format!("duplicate activity {idx}")));
        }
    }
    let mut workshops: Vec<Option<Workshop>> = vec![None; k];
    for (lineno, idx, ws) in p.osws {
        if idx == 0 || idx > k {
            return Err(InstanceError::syntax(lineno, format!("workshop index {idx} outside 1..={k}")));
        }
        if workshops[idx - 1].replace(ws).is_some() {
            return Err(InstanceError::syntax(lineno, format!("duplicate workshop {idx}")));
        }
    }
    let activities = activities
        .into_iter()
        .enumerate()
        .map(|(j, a)| a.ok_or_else(|| InstanceError::syntax(0, format!("activity {} is not defined", j + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    let workshops = workshops
        .into_iter()
        .enumerate()
        .map(|(w, a)| a.ok_or_else(|| InstanceError::syntax(0, format!("workshop {} is not defined", w + 1))))
        .collect::<Result<Vec<_>, _>>()?;

    let inst = Instance {
        activities,
        workshops,
        site_capacity: p.q.ok_or_else(|| missing("Q"))?,
        deadline: p.tmax.ok_or_else(|| missing("TMAX"))?,
        horizon: p.t.ok_or_else(|| missing("T"))?,
        cost_mode: p.cost_mode.unwrap_or_default(),
    };
    let diags = inst.validate();
    if diags.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Semantic(diags))
    }
}

/// Render an instance in the canonical format. The output is ASCII.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "N {}", inst.activities.len());
    let _ = writeln!(out, "K {}", inst.workshops.len());
    let _ = writeln!(out, "Q {}", inst.site_capacity);
    let _ = writeln!(out, "TMAX {}", inst.deadline);
    let _ = writeln!(out, "T {}", inst.horizon);
    let _ = writeln!(out, "costmode = {}", inst.cost_mode);
    for (w, ws) in inst.workshops.iter().enumerate() {
        let _ = write!(out, "OSW {} : cost = {} ; lifetime = ", w + 1, ws.unit_cost);
        match ws.max_lifetime {
            Some(l) => {
                let _ = write!(out, "{l}");
            }
            None => out.push('-'),
        }
        if let Some(c) = ws.cost_per_day {
            let _ = write!(out, " ; per_day = {c}");
        }
        if let Some(l) = ws.lead_times {
            let _ = write!(out, " ; lead = {}/{}", l.install, l.dismantle);
        }
        out.push('\n');
    }
    for (j, act) in inst.activities.iter().enumerate() {
        let _ = write!(out, "ACT {} : pred = ", j + 1);
        if act.predecessors.is_empty() {
            out.push('-');
        } else {
            let preds: Vec<String> = act.predecessors.iter().map(|p| (p + 1).to_string()).collect();
            out.push_str(&preds.join(","));
        }
        out.push_str(" ; modes = ");
        for m in &act.modes {
            let space: Vec<String> = m.space.iter().map(u32::to_string).collect();
            let _ = write!(out, "({}; {})", m.duration, space.join(","));
        }
        out.push('\n');
    }
    out
}
