//! LP-format export of the linearized model, a reader for the same
//! dialect, and an enumeration solver for tiny exported models.
//!
//! Variables, with `i` the activity number in file convention (0 and
//! `N + 1` are the dummy source and sink), `j` the one-based mode, `k` the
//! one-based workshop and `t` the period `0..=T`:
//!
//! | name          | meaning                                          |
//! |---------------|--------------------------------------------------|
//! | `x_i_t`       | activity `i` starts at `t`                       |
//! | `z_i_j`       | activity `i` runs in mode `j`                    |
//! | `y_k_t`       | workshop `k` is installed during `t`             |
//! | `yp_i_j_k_t`  | activity `i` in mode `j` occupies `k` during `t` |
//! | `R_k`         | availability level of workshop `k`               |
//! | `Rp_k_t`      | installed level of workshop `k` during `t`       |
//! | `u_k_t`       | workshop `k` has been used at or before `t`      |
//! | `v_k_t`       | workshop `k` is used at or after `t`             |
//!
//! `u` and `v` only appear in the time-indexed variant, which links
//! occupancy to the periods an activity actually runs and derives the
//! installation periods from the first and last use. The literal variant
//! keeps the aggregated occupancy and coverage rows as written in the
//! original model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Semantics {
    Literal,
    #[default]
    TimeIndexed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpExportConfig {
    pub alpha: f64,
    /// Big-M for the installed-level rows; `None` uses the site capacity.
    pub big_m: Option<f64>,
    pub semantics: Semantics,
}

impl Default for MilpExportConfig {
    fn default() -> Self {
        Self { alpha: 0.75, big_m: None, semantics: Semantics::TimeIndexed }
    }
}

impl MilpExportConfig {
    /// `alpha` must lie in `[0.5, 1)` so that an occupancy indicator can be
    /// 1 when both of its conditions hold.
    pub fn is_valid(&self) -> bool {
        self.alpha >= 0.5 && self.alpha < 1.0 && self.big_m.is_none_or(|m| m >= 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRow>,
    /// `(lower, upper)` per variable with explicit bounds.
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
}

impl LpModel {
    /// Every variable mentioned anywhere, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut v: BTreeSet<String> = self.objective.iter().map(|(n, _)| n.clone()).collect();
        for r in &self.rows {
            v.extend(r.terms.iter().map(|(n, _)| n.clone()));
        }
        v.extend(self.bounds.keys().cloned());
        v.extend(self.binaries.iter().cloned());
        v
    }

    pub fn to_lp_string(&self) -> String {
        let mut out = String::from("\\ MOSWACP linearized model\nMinimize\n obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(out, " {}:", r.name);
            write_terms(&mut out, &r.terms);
            let _ = writeln!(out, " {} {}", r.sense.symbol(), num(r.rhs));
        }
        out.push_str("Bounds\n");
        for (v, (lo, hi)) in &self.bounds {
            let _ = writeln!(out, " {} <= {v} <= {}", num(*lo), num(*hi));
        }
        out.push_str("Binaries\n");
        for chunk in self.binaries.iter().collect::<Vec<_>>().chunks(8) {
            out.push(' ');
            out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: &[(String, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 x_0_0");
        return;
    }
    for (i, (v, c)) in terms.iter().enumerate() {
        if *c < 0.0 {
            out.push_str(" -");
        } else if i > 0 {
            out.push_str(" +");
        }
        let mag = c.abs();
        if mag == 1.0 {
            let _ = write!(out, " {v}");
        } else {
            let _ = write!(out, " {} {v}", num(mag));
        }
    }
}

struct Builder {
    model: LpModel,
}

impl Builder {
    fn row(&mut self, name: String, terms: Vec<(String, f64)>, sense: Sense, rhs: f64) {
        self.model.rows.push(LpRow { name, terms, sense, rhs });
    }
}

/// Per-activity data in file numbering, dummies included.
struct Network {
    n: usize,
    /// `durations[i][j]`, `space[i][j][k]`
    durations: Vec<Vec<u32>>,
    space: Vec<Vec<Vec<u32>>>,
    preds: Vec<Vec<usize>>,
}

fn network(inst: &Instance) -> Network {
    let n = inst.n_activities();
    let k = inst.n_workshops();
    let mut durations = vec![vec![0]];
    let mut space = vec![vec![vec![0; k]]];
    let mut preds = vec![vec![]];
    for act in &inst.activities {
        durations.push(act.modes.iter().map(|m| m.duration).collect());
        space.push(act.modes.iter().map(|m| m.space.clone()).collect());
        preds.push(if act.predecessors.is_empty() { vec![0] } else { act.predecessors.iter().map(|&p| p + 1).collect() });
    }
    durations.push(vec![0]);
    space.push(vec![vec![0; k]]);
    preds.push((1..=n).collect());
    Network { n, durations, space, preds }
}

/// Write the linearized model in LP format.
pub fn export_lp(inst: &Instance, cfg: &MilpExportConfig) -> String {
    build_model(inst, cfg).to_lp_string()
}

/// The linearized model as rows, before formatting.
pub fn build_model(inst: &Instance, cfg: &MilpExportConfig) -> LpModel {
    let net = network(inst);
    let t_max = inst.horizon;
    let kk = inst.n_workshops();
    let big_m = cfg.big_m.unwrap_or(f64::from(inst.site_capacity));
    let all = 0..=net.n + 1;
    let periods = 0..=t_max;
    let mut b = Builder { model: LpModel::default() };

    b.model.objective = (1..=kk).map(|k| (format!("R_{k}"), inst.workshops[k - 1].unit_cost)).collect();

    // precedence
    for i in all.clone() {
        for &j in &net.preds[i] {
            let mut terms: Vec<(String, f64)> = periods.clone().filter(|&t| t > 0).map(|t| (format!("x_{i}_{t}"), f64::from(t))).collect();
            terms.extend(periods.clone().filter(|&t| t > 0).map(|t| (format!("x_{j}_{t}"), -f64::from(t))));
            terms.extend(net.durations[j].iter().enumerate().filter(|(_, &d)| d > 0).map(|(u, &d)| (format!("z_{j}_{}", u + 1), -f64::from(d))));
            b.row(format!("prec_{i}_{j}"), terms, Sense::Ge, 0.0);
        }
    }

    // deadline
    b.row(
        "deadline".into(),
        periods.clone().filter(|&t| t > 0).map(|t| (format!("x_{}_{t}", net.n + 1), f64::from(t))).collect(),
        Sense::Le,
        f64::from(inst.deadline),
    );

    // one mode, one start
    for i in all.clone() {
        b.row(format!("mode_{i}"), (1..=net.durations[i].len()).map(|j| (format!("z_{i}_{j}"), 1.0)).collect(), Sense::Eq, 1.0);
        b.row(format!("start_{i}"), periods.clone().map(|t| (format!("x_{i}_{t}"), 1.0)).collect(), Sense::Eq, 1.0);
    }
    b.row("source".into(), vec![("x_0_0".into(), 1.0)], Sense::Eq, 1.0);

    match cfg.semantics {
        Semantics::Literal => literal_rows(&mut b, inst, &net, cfg.alpha),
        Semantics::TimeIndexed => time_indexed_rows(&mut b, inst, &net),
    }

    // site capacity through installed levels
    for t in periods.clone() {
        b.row(format!("site_{t}"), (1..=kk).map(|k| (format!("Rp_{k}_{t}"), 1.0)).collect(), Sense::Le, f64::from(inst.site_capacity));
        for k in 1..=kk {
            let rp = format!("Rp_{k}_{t}");
            let y = format!("y_{k}_{t}");
            let r = format!("R_{k}");
            b.row(format!("rpr_{k}_{t}"), vec![(rp.clone(), 1.0), (r.clone(), -1.0)], Sense::Le, 0.0);
            b.row(format!("rpy_{k}_{t}"), vec![(rp.clone(), 1.0), (y.clone(), -big_m)], Sense::Le, 0.0);
            b.row(format!("rpl_{k}_{t}"), vec![(rp, 1.0), (r, -1.0), (y, -big_m)], Sense::Ge, -big_m);
        }
    }

    for k in 1..=kk {
        b.model.bounds.insert(format!("R_{k}"), (0.0, big_m));
        for t in periods.clone() {
            b.model.bounds.insert(format!("Rp_{k}_{t}"), (0.0, big_m));
        }
    }

    // binaries
    let bin = &mut b.model.binaries;
    for i in all.clone() {
        for t in periods.clone() {
            bin.insert(format!("x_{i}_{t}"));
        }
        for j in 1..=net.durations[i].len() {
            bin.insert(format!("z_{i}_{j}"));
        }
    }
    for k in 1..=kk {
        for t in periods.clone() {
            bin.insert(format!("y_{k}_{t}"));
        }
    }
    let names: Vec<String> = b.model.rows.iter().flat_map(|r| r.terms.iter().map(|(n, _)| n.clone())).collect();
    for v in names {
        if v.starts_with("yp_") || v.starts_with("u_") || v.starts_with("v_") {
            b.model.binaries.insert(v);
        }
    }
    b.model
}

fn literal_rows(b: &mut Builder, inst: &Instance, net: &Network, alpha: f64) {
    let kk = inst.n_workshops();
    let t_max = inst.horizon;
    // occupancy aggregated over every activity and mode
    for k in 1..=kk {
        for t in 0..=t_max {
            let mut terms = Vec::new();
            for i in 1..=net.n {
                for (j, sp) in net.space[i].iter().enumerate() {
                    let r = sp[k - 1];
                    if r > 0 {
                        terms.push((format!("yp_{i}_{}_{k}_{t}", j + 1), f64::from(r)));
                    }
                }
            }
            terms.push((format!("R_{k}"), -1.0));
            b.row(format!("occ_{k}_{t}"), terms, Sense::Le, 0.0);
        }
    }
    for i in 1..=net.n {
        for j in 1..=net.durations[i].len() {
            for k in 1..=kk {
                for t in 0..=t_max {
                    let yp = format!("yp_{i}_{j}_{k}_{t}");
                    let z = format!("z_{i}_{j}");
                    let y = format!("y_{k}_{t}");
                    b.row(format!("lnk_{i}_{j}_{k}_{t}"), vec![(yp.clone(), 1.0), (z.clone(), -1.0), (y.clone(), -1.0)], Sense::Ge, -1.0);
                    b.row(format!("cap_{i}_{j}_{k}_{t}"), vec![(yp, 1.0), (z, -alpha), (y, -alpha)], Sense::Le, 0.0);
                }
            }
        }
    }
    // coverage as written: t x_it + sum_j d_ij z_ij - 1 <= sum_l y_kl
    for i in 1..=net.n {
        for k in 1..=kk {
            for t in 0..=t_max {
                let mut terms = Vec::new();
                if t > 0 {
                    terms.push((format!("x_{i}_{t}"), f64::from(t)));
                }
                terms.extend(net.durations[i].iter().enumerate().filter(|(_, &d)| d > 0).map(|(j, &d)| (format!("z_{i}_{}", j + 1), f64::from(d))));
                terms.extend((0..=t_max).map(|l| (format!("y_{k}_{l}"), -1.0)));
                b.row(format!("cov_{i}_{k}_{t}"), terms, Sense::Le, 1.0);
            }
        }
    }
}

fn time_indexed_rows(b: &mut Builder, inst: &Instance, net: &Network) {
    let kk = inst.n_workshops();
    let t_max = inst.horizon;
    let mut occ: HashMap<(usize, u32), Vec<(String, f64)>> = HashMap::new();
    let mut users: HashMap<(usize, u32), Vec<String>> = HashMap::new();
    for i in 1..=net.n {
        for (j0, &d) in net.durations[i].iter().enumerate() {
            let j = j0 + 1;
            if d == 0 {
                continue;
            }
            for k in 1..=kk {
                let r = net.space[i][j0][k - 1];
                if r == 0 {
                    continue;
                }
                for t in 0..=t_max {
                    let yp = format!("yp_{i}_{j}_{k}_{t}");
                    let mut terms = vec![(yp.clone(), 1.0), (format!("z_{i}_{j}"), -1.0)];
                    let lo = t.saturating_sub(d - 1);
                    terms.extend((lo..=t).map(|tau| (format!("x_{i}_{tau}"), -1.0)));
                    b.row(format!("run_{i}_{j}_{k}_{t}"), terms, Sense::Ge, -1.0);
                    occ.entry((k, t)).or_default().push((yp.clone(), f64::from(r)));
                    users.entry((k, t)).or_default().push(yp);
                }
            }
        }
    }
    for k in 1..=kk {
        for t in 0..=t_max {
            let mut terms = occ.remove(&(k, t)).unwrap_or_default();
            if terms.is_empty() {
                continue;
            }
            terms.push((format!("R_{k}"), -1.0));
            b.row(format!("occ_{k}_{t}"), terms, Sense::Le, 0.0);
        }
    }
    for k in 1..=kk {
        let used = (0..=t_max).any(|t| users.contains_key(&(k, t)));
        if !used {
            continue;
        }
        for t in 0..=t_max {
            let u = format!("u_{k}_{t}");
            let v = format!("v_{k}_{t}");
            if t > 0 {
                b.row(format!("um_{k}_{t}"), vec![(u.clone(), 1.0), (format!("u_{k}_{}", t - 1), -1.0)], Sense::Ge, 0.0);
            }
            if t < t_max {
                b.row(format!("vm_{k}_{t}"), vec![(v.clone(), 1.0), (format!("v_{k}_{}", t + 1), -1.0)], Sense::Ge, 0.0);
            }
            for yp in users.get(&(k, t)).into_iter().flatten() {
                let tail = &yp[3..];
                b.row(format!("uy_{tail}"), vec![(u.clone(), 1.0), (yp.clone(), -1.0)], Sense::Ge, 0.0);
                b.row(format!("vy_{tail}"), vec![(v.clone(), 1.0), (yp.clone(), -1.0)], Sense::Ge, 0.0);
            }
            b.row(format!("inst_{k}_{t}"), vec![(format!("y_{k}_{t}"), 1.0), (u, -1.0), (v, -1.0)], Sense::Ge, -1.0);
        }
    }
    for k in 1..=kk {
        if let Some(life) = inst.workshops[k - 1].max_lifetime {
            b.row(format!("life_{k}"), (0..=t_max).map(|t| (format!("y_{k}_{t}"), 1.0)).collect(), Sense::Le, f64::from(life));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("LP parse error: {0}")]
pub struct LpParseError(pub String);

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
}

fn parse_linear(tokens: &[String]) -> Result<Vec<(String, f64)>, LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in tokens {
        match tok.as_str() {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t => {
                if let Ok(v) = t.parse::<f64>() {
                    coef = Some(coef.unwrap_or(1.0) * v);
                } else {
                    terms.push((t.to_string(), sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(LpParseError("dangling coefficient".into()));
    }
    Ok(terms)
}

fn tokenize(s: &str) -> Vec<String> {
    let spaced = s.replace("<=", " <= ").replace(">=", " >= ").replace('+', " + ").replace('-', " - ");
    let out: Vec<String> = spaced.split_whitespace().map(str::to_string).collect();
    // restore negative exponents in numbers such as 1e-5
    let mut merged: Vec<String> = Vec::new();
    let mut i = 0;
    while i < out.len() {
        if i + 2 < out.len() && out[i].ends_with(['e', 'E']) && out[i][..out[i].len() - 1].parse::<f64>().is_ok() && (out[i + 1] == "-" || out[i + 1] == "+") {
            merged.push(format!("{}{}{}", out[i], out[i + 1], out[i + 2]));
            i += 3;
        } else {
            merged.push(out[i].clone());
            i += 1;
        }
    }
    merged
}

/// Read an LP-format document in the dialect written by [`export_lp`].
pub fn parse_lp(text: &str) -> Result<LpModel, LpParseError> {
    let mut model = LpModel::default();
    let mut section = Section::None;
    let mut pending = String::new();
    let flush = |pending: &mut String, section: &Section, model: &mut LpModel| -> Result<(), LpParseError> {
        let body = std::mem::take(pending);
        if body.trim().is_empty() {
            return Ok(());
        }
        let (name, expr) = match body.split_once(':') {
            Some((n, e)) => (n.trim().to_string(), e.to_string()),
            None => (format!("r{}", model.rows.len()), body.clone()),
        };
        if *section == Section::Objective {
            model.objective = parse_linear(&tokenize(&expr))?;
            return Ok(());
        }
        let tokens = tokenize(&expr);
        let pos = tokens
            .iter()
            .position(|t| t == "<=" || t == ">=" || t == "=" || t == "=<" || t == "=>")
            .ok_or_else(|| LpParseError(format!("row `{name}` has no sense")))?;
        let sense = match tokens[pos].as_str() {
            "<=" | "=<" => Sense::Le,
            ">=" | "=>" => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs_tokens = &tokens[pos + 1..];
        let rhs = match rhs_tokens {
            [v] => v.parse::<f64>(),
            [s, v] if s == "-" => v.parse::<f64>().map(|x| -x),
            [s, v] if s == "+" => v.parse::<f64>(),
            _ => return Err(LpParseError(format!("row `{name}` has a malformed right-hand side"))),
        }
        .map_err(|_| LpParseError(format!("row `{name}` has a malformed right-hand side")))?;
        let mut terms = parse_linear(&tokens[..pos])?;
        terms.retain(|(_, c)| *c != 0.0);
        model.rows.push(LpRow { name, terms, sense, rhs });
        Ok(())
    };

    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let header = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::None),
            _ => None,
        };
        if let Some(h) = header {
            flush(&mut pending, &section, &mut model)?;
            section = h;
            continue;
        }
        match section {
            Section::Objective => {
                pending.push(' ');
                pending.push_str(line);
            }
            Section::Constraints => {
                if line.contains(':') && !pending.is_empty() {
                    flush(&mut pending, &section, &mut model)?;
                }
                pending.push(' ');
                pending.push_str(line);
                let has_sense = pending.contains("<=") || pending.contains(">=") || pending.contains('=');
                let tail_is_number = tokenize(&pending).last().is_some_and(|t| t.parse::<f64>().is_ok());
                if has_sense && tail_is_number {
                    flush(&mut pending, &section, &mut model)?;
                }
            }
            Section::Bounds => {
                let toks = tokenize(line);
                let parse = |s: &str| s.parse::<f64>().map_err(|_| LpParseError(format!("bad bound `{line}`")));
                match toks.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
                    [lo, "<=", v, "<=", hi] => {
                        model.bounds.insert(v.to_string(), (parse(lo)?, parse(hi)?));
                    }
                    [v, "<=", hi] => {
                        let lo = model.bounds.get(*v).map_or(0.0, |b| b.0);
                        model.bounds.insert(v.to_string(), (lo, parse(hi)?));
                    }
                    [v, ">=", lo] => {
                        let hi = model.bounds.get(*v).map_or(f64::INFINITY, |b| b.1);
                        model.bounds.insert(v.to_string(), (parse(lo)?, hi));
                    }
                    _ => return Err(LpParseError(format!("unsupported bound `{line}`"))),
                }
            }
            Section::Binaries => model.binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::None => return Err(LpParseError(format!("text outside any section: `{line}`"))),
        }
    }
    flush(&mut pending, &section, &mut model)?;
    Ok(model)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub objective: f64,
    pub values: BTreeMap<String, f64>,
    pub leaves: u64,
}

/// Minimize a small model exactly.
///
/// Equality rows whose coefficients are all 1 with right-hand side 1 are
/// treated as choose-one groups and enumerated depth-first, pruning on rows
/// that mention group variables only. For every complete choice the other
/// variables start at their lower bounds and are raised to the least values
/// the rows force: a violated row that has exactly one variable able to
/// repair it raises that variable. The choice is feasible when the
/// resulting point satisfies every row. This is exact when every such
/// variable enters the objective with a nonnegative coefficient, which
/// holds for the time-indexed export. A choice whose violated rows could
/// be repaired in more than one way makes the call fail instead of
/// counting as infeasible; the literal export's coverage rows do this.
pub fn solve_by_enumeration(model: &LpModel, max_leaves: u64) -> Result<Option<LpSolution>, LpParseError> {
    let vars: Vec<String> = model.variables().into_iter().collect();
    let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let nv = vars.len();
    let rows: Vec<(Vec<(usize, f64)>, Sense, f64)> =
        model.rows.iter().map(|r| (r.terms.iter().map(|(n, c)| (index[n.as_str()], *c)).collect(), r.sense, r.rhs)).collect();

    let is_group = |r: &(Vec<(usize, f64)>, Sense, f64)| r.1 == Sense::Eq && r.2 == 1.0 && r.0.len() > 1 && r.0.iter().all(|&(_, c)| c == 1.0);
    let groups: Vec<Vec<usize>> = rows.iter().filter(|r| is_group(r)).map(|r| r.0.iter().map(|&(v, _)| v).collect()).collect();
    let mut group_of = vec![usize::MAX; nv];
    for (g, members) in groups.iter().enumerate() {
        for &v in members {
            if group_of[v] != usize::MAX {
                return Err(LpParseError("a variable belongs to two choose-one groups".into()));
            }
            group_of[v] = g;
        }
    }
    let mut fixed: HashMap<usize, f64> = HashMap::new();
    for r in &rows {
        if r.1 == Sense::Eq && r.0.len() == 1 {
            let (v, c) = r.0[0];
            fixed.insert(v, r.2 / c);
        }
    }
    // rows checked as soon as their last group is assigned
    let mut early: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (ri, r) in rows.iter().enumerate() {
        if is_group(r) || r.0.is_empty() {
            continue;
        }
        if r.0.iter().all(|&(v, _)| group_of[v] != usize::MAX) {
            let last = r.0.iter().map(|&(v, _)| group_of[v]).max().unwrap_or(0);
            early[last].push(ri);
        }
    }
    let lower: Vec<f64> = vars.iter().map(|v| model.bounds.get(v).map_or(0.0, |b| b.0)).collect();
    let upper: Vec<f64> = vars
        .iter()
        .map(|v| if model.binaries.contains(v) { 1.0 } else { model.bounds.get(v).map_or(f64::INFINITY, |b| b.1) })
        .collect();
    let obj: Vec<(usize, f64)> = model.objective.iter().map(|(n, c)| (index[n.as_str()], *c)).collect();

    struct Ctx<'a> {
        rows: &'a [(Vec<(usize, f64)>, Sense, f64)],
        groups: &'a [Vec<usize>],
        group_of: &'a [usize],
        early: &'a [Vec<usize>],
        fixed: &'a HashMap<usize, f64>,
        lower: &'a [f64],
        upper: &'a [f64],
        binaries: Vec<bool>,
        obj: &'a [(usize, f64)],
        value: Vec<f64>,
        best: Option<(f64, Vec<f64>)>,
        leaves: u64,
        max_leaves: u64,
        overflow: bool,
        undecided: bool,
    }
    const TOL: f64 = 1e-7;
    fn satisfied(row: &(Vec<(usize, f64)>, Sense, f64), value: &[f64]) -> bool {
        let lhs: f64 = row.0.iter().map(|&(v, c)| c * value[v]).sum();
        match row.1 {
            Sense::Le => lhs <= row.2 + TOL,
            Sense::Ge => lhs >= row.2 - TOL,
            Sense::Eq => (lhs - row.2).abs() <= TOL,
        }
    }
    impl Ctx<'_> {
        fn propagate(&mut self) -> bool {
            for v in 0..self.value.len() {
                if self.group_of[v] == usize::MAX {
                    self.value[v] = self.fixed.get(&v).copied().unwrap_or(self.lower[v]);
                }
            }
            loop {
                let mut changed = false;
                for row in self.rows {
                    if satisfied(row, &self.value) {
                        continue;
                    }
                    let cands = self.candidates(row);
                    let lhs: f64 = row.0.iter().map(|&(v, c)| c * self.value[v]).sum();
                    if cands.len() != 1 {
                        continue;
                    }
                    let (v, c) = cands[0];
                    let gap = (row.2 - lhs) / c;
                    let mut target = self.value[v] + gap;
                    if self.binaries[v] {
                        target = target.ceil().min(1.0);
                    }
                    if target > self.value[v] + TOL {
                        self.value[v] = target.min(self.upper[v]);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            let violated: Vec<_> = self.rows.iter().filter(|r| !satisfied(r, &self.value)).collect();
            if violated.iter().any(|r| self.candidates(r).len() > 1) {
                self.undecided = true;
            }
            violated.is_empty()
        }

        /// Free variables whose increase moves a violated row towards
        /// satisfaction.
        fn candidates(&self, row: &(Vec<(usize, f64)>, Sense, f64)) -> Vec<(usize, f64)> {
            let lhs: f64 = row.0.iter().map(|&(v, c)| c * self.value[v]).sum();
            let need_up = match row.1 {
                Sense::Ge => true,
                Sense::Le => false,
                Sense::Eq => lhs < row.2,
            };
            row.0
                .iter()
                .copied()
                .filter(|&(v, c)| {
                    self.group_of[v] == usize::MAX && !self.fixed.contains_key(&v) && ((c > 0.0) == need_up) && self.value[v] < self.upper[v] - TOL
                })
                .collect()
        }

        fn dfs(&mut self, g: usize) {
            if self.overflow {
                return;
            }
            if g == self.groups.len() {
                self.leaves += 1;
                if self.leaves > self.max_leaves {
                    self.overflow = true;
                    return;
                }
                if self.propagate() {
                    let cost: f64 = self.obj.iter().map(|&(v, c)| c * self.value[v]).sum();
                    if self.best.as_ref().is_none_or(|(b, _)| cost < *b - TOL) {
                        self.best = Some((cost, self.value.clone()));
                    }
                }
                return;
            }
            let members = self.groups[g].clone();
            for &chosen in &members {
                if members.iter().any(|&m| self.fixed.get(&m).is_some_and(|&f| (f > 0.5) != (m == chosen))) {
                    continue;
                }
                for &m in &members {
                    self.value[m] = if m == chosen { 1.0 } else { 0.0 };
                }
                if self.early[g].iter().all(|&ri| satisfied(&self.rows[ri], &self.value)) {
                    self.dfs(g + 1);
                }
            }
            for &m in &members {
                self.value[m] = 0.0;
            }
        }
    }

    let mut ctx = Ctx {
        rows: &rows,
        groups: &groups,
        group_of: &group_of,
        early: &early,
        fixed: &fixed,
        lower: &lower,
        upper: &upper,
        binaries: vars.iter().map(|v| model.binaries.contains(v)).collect(),
        obj: &obj,
        value: vec![0.0; nv],
        best: None,
        leaves: 0,
        max_leaves,
        overflow: false,
        undecided: false,
    };
    ctx.dfs(0);
    if ctx.overflow {
        return Err(LpParseError(format!("more than {max_leaves} complete choices")));
    }
    if ctx.undecided {
        return Err(LpParseError("a violated row leaves several variables to raise; enumeration cannot decide this model".into()));
    }
    Ok(ctx.best.map(|(objective, value)| LpSolution {
        objective,
        values: vars.iter().cloned().zip(value).collect(),
        leaves: ctx.leaves,
    }))
}
