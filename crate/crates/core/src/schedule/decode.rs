//! Serial schedule generation.
//!
//! Activities are placed one at a time in precedence-level order. Each one
//! gets the earliest start, not before its release time and its
//! predecessors' finishes, at which every workshop it occupies stays within
//! its availability level, the workshop windows it stretches keep the
//! installed area within the site capacity and within each workshop's
//! lifetime, and the activity still ends by the deadline.

use crate::error::HorizonExhausted;
use crate::instance::Instance;

/// Earliest-start decoding for fixed modes and availability levels.
pub fn decode_serial(inst: &Instance, mode: &[usize], avail: &[u32]) -> Result<Vec<u32>, HorizonExhausted> {
    decode_with_release(inst, mode, avail, &[])
}

/// Like [`decode_serial`], but activity `a` may not start before
/// `release[a]`. An empty `release` slice means no release times.
///
/// Decoding a feasible schedule with its own starts as release times
/// reproduces it exactly.
pub fn decode_with_release(inst: &Instance, mode: &[usize], avail: &[u32], release: &[u32]) -> Result<Vec<u32>, HorizonExhausted> {
    let order = inst.topological_order().expect("precedence graph must be acyclic");
    let mut state = Timeline::new(inst, avail);
    let mut start = vec![0u32; inst.n_activities()];
    for &a in &order {
        let act = &inst.activities[a];
        let ready = act
            .predecessors
            .iter()
            .map(|&p| start[p] + inst.mode(p, mode[p]).duration)
            .max()
            .unwrap_or(0)
            .max(release.get(a).copied().unwrap_or(0));
        start[a] = state.place(inst, a, mode[a], ready).ok_or(HorizonExhausted { activity: a })?;
    }
    Ok(start)
}

struct Timeline<'a> {
    avail: &'a [u32],
    len: usize,
    /// `occ[k * len + t]`
    occ: Vec<u32>,
    windows: Vec<Option<(u32, u32)>>,
    load: Vec<u64>,
    extra: Vec<u64>,
    used: Vec<usize>,
}

impl<'a> Timeline<'a> {
    fn new(inst: &Instance, avail: &'a [u32]) -> Self {
        let len = inst.deadline as usize;
        let k = inst.n_workshops();
        Self {
            avail,
            len,
            occ: vec![0; k * len],
            windows: vec![None; k],
            load: vec![0; len],
            extra: vec![0; len],
            used: Vec::with_capacity(k),
        }
    }

    fn place(&mut self, inst: &Instance, a: usize, mode: usize, ready: u32) -> Option<u32> {
        let m = inst.mode(a, mode);
        let d = m.duration;
        if d == 0 {
            return (ready <= inst.deadline).then_some(ready);
        }
        if d > inst.deadline {
            return None;
        }
        let latest = inst.deadline - d;
        self.used.clear();
        self.used.extend((0..inst.n_workshops()).filter(|&k| m.uses(k)));

        let mut s = ready;
        'search: while s <= latest {
            // workshop occupancy: jump past the last blocking period
            let mut jump = None::<u32>;
            for &k in &self.used {
                let row = &self.occ[k * self.len..(k + 1) * self.len];
                let r = m.space[k];
                if let Some(off) = row[s as usize..(s + d) as usize].iter().position(|&o| o + r > self.avail[k]) {
                    let t = s + off as u32;
                    jump = Some(jump.map_or(t, |j| j.max(t)));
                }
            }
            if let Some(t) = jump {
                s = t + 1;
                continue;
            }

            // windows, lifetimes and site capacity
            let mut fits = true;
            for &k in &self.used {
                let (lo, hi) = match self.windows[k] {
                    None => (s, s + d),
                    Some((sw, fw)) => (sw.min(s), fw.max(s + d)),
                };
                if let Some(life) = inst.workshops[k].max_lifetime {
                    if hi - lo > life {
                        fits = false;
                    }
                }
                for t in lo..hi {
                    let covered = matches!(self.windows[k], Some((sw, fw)) if sw <= t && t < fw);
                    if !covered {
                        self.extra[t as usize] += u64::from(self.avail[k]);
                    }
                }
            }
            let span = self.span(s, d);
            for t in span.clone() {
                if fits && self.load[t] + self.extra[t] > u64::from(inst.site_capacity) {
                    fits = false;
                }
            }
            for t in span {
                self.extra[t] = 0;
            }
            if !fits {
                s += 1;
                continue 'search;
            }

            for &k in &self.used {
                let r = m.space[k];
                for cell in &mut self.occ[k * self.len + s as usize..k * self.len + (s + d) as usize] {
                    *cell += r;
                }
                let (lo, hi) = match self.windows[k] {
                    None => (s, s + d),
                    Some((sw, fw)) => (sw.min(s), fw.max(s + d)),
                };
                for t in lo..hi {
                    let covered = matches!(self.windows[k], Some((sw, fw)) if sw <= t && t < fw);
                    if !covered {
                        self.load[t as usize] += u64::from(self.avail[k]);
                    }
                }
                self.windows[k] = Some((lo, hi));
            }
            return Some(s);
        }
        None
    }

    /// Periods whose installed set may change when placing `s..s + d`.
    fn span(&self, s: u32, d: u32) -> std::ops::Range<usize> {
        let mut lo = s;
        let mut hi = s + d;
        for &k in &self.used {
            if let Some((sw, fw)) = self.windows[k] {
                lo = lo.min(sw);
                hi = hi.max(fw);
            }
        }
        lo as usize..hi as usize
    }
}
