//! Desk-scale datasets: a seeded random instance generator and directory
//! loading.
//!
//! Generated instances are kept only when a random feasible schedule can be
//! decoded for them, so every instance in a suite is solvable.

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::InstanceError;
use crate::instance::{parse_instance, serialize_instance, Activity, CostMode, Instance, ModeSpec, Workshop};
use crate::operators::random_solution;
use crate::schedule::check_feasible;

/// Bumped whenever a recipe or the generator changes the instances it
/// produces for a given seed.
pub const RECIPE_VERSION: &str = "desk-v1";

const MAX_TRIES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeskRecipe {
    pub activities: RangeInclusive<usize>,
    pub max_modes: usize,
    pub workshops: RangeInclusive<usize>,
    pub duration: RangeInclusive<u32>,
    /// Demand of a mode on a workshop it uses.
    pub space: RangeInclusive<u32>,
    /// Chance that a mode uses a given workshop.
    pub use_prob: f64,
    pub cost_choices: Vec<f64>,
    /// Chance of an arc `i -> j` for each pair `i < j`.
    pub arc_prob: f64,
    /// Deadline as a multiple of the critical-path lower bound.
    pub deadline_slack: f64,
    pub horizon: u32,
    /// Fixed site capacity; drawn between the largest single-activity
    /// footprint and the sum of workshop peaks when absent.
    pub site_capacity: Option<u32>,
}

impl DeskRecipe {
    /// At most 6 activities, 2 modes each and a 15-period horizon.
    pub fn tiny() -> Self {
        Self {
            activities: 3..=6,
            max_modes: 2,
            workshops: 1..=2,
            duration: 1..=3,
            space: 1..=3,
            use_prob: 0.6,
            cost_choices: vec![10.0, 20.0, 30.0, 50.0, 100.0],
            arc_prob: 0.3,
            deadline_slack: 1.5,
            horizon: 15,
            site_capacity: None,
        }
    }

    /// Up to 8 activities and 3 workshops; still within the default exact
    /// limits.
    pub fn small() -> Self {
        Self { activities: 6..=8, workshops: 2..=3, max_modes: 2, horizon: 20, deadline_slack: 1.4, ..Self::tiny() }
    }

    /// Tiny instances at a fixed site capacity `q`, with larger footprints
    /// and a tenfold cost spread between workshops so that `q` decides
    /// which modes pay off.
    pub fn capacity_bound(q: u32) -> Self {
        Self { workshops: 2..=3, space: 1..=5, use_prob: 0.5, cost_choices: vec![10.0, 100.0], site_capacity: Some(q), ..Self::tiny() }
    }
}

/// Draw one instance from `recipe`, retrying until it is valid and has a
/// decodable feasible schedule.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, recipe: &DeskRecipe) -> Option<Instance> {
    (0..MAX_TRIES).find_map(|_| {
        let inst = draw(rng, recipe)?;
        let cert = random_solution(&inst, rng, 20)?;
        let ok = inst.validate().is_empty() && check_feasible(&inst, &cert).is_ok_and(|d| d.is_feasible());
        ok.then_some(inst)
    })
}

fn draw<R: Rng + ?Sized>(rng: &mut R, r: &DeskRecipe) -> Option<Instance> {
    let n = rng.gen_range(r.activities.clone());
    let k = rng.gen_range(r.workshops.clone());
    let activities: Vec<Activity> = (0..n)
        .map(|j| {
            let modes = (0..rng.gen_range(1..=r.max_modes.max(1)))
                .map(|_| {
                    let d = rng.gen_range(r.duration.clone());
                    let space = (0..k).map(|_| if rng.gen_bool(r.use_prob) { rng.gen_range(r.space.clone()) } else { 0 }).collect();
                    ModeSpec::new(d, space)
                })
                .collect();
            let predecessors = (0..j).filter(|_| rng.gen_bool(r.arc_prob)).collect();
            Activity { modes, predecessors }
        })
        .collect();
    let workshops = (0..k).map(|_| Workshop::with_unit_cost(*r.cost_choices.choose(rng).unwrap_or(&1.0))).collect();
    let mut inst = Instance { activities, workshops, site_capacity: 1, deadline: r.horizon, horizon: r.horizon, cost_mode: CostMode::Level };
    let lb = inst.makespan_lower_bound();
    if lb == 0 || lb > r.horizon {
        return None;
    }
    inst.deadline = ((f64::from(lb) * r.deadline_slack).ceil() as u32).clamp(lb, r.horizon);
    inst.site_capacity = match r.site_capacity {
        Some(q) => q,
        None => {
            let lo = inst.activities.iter().filter_map(|a| a.modes.iter().map(|m| m.total_space()).min()).max().unwrap_or(1).max(1) as u32;
            let hi = (0..k).map(|w| inst.max_demand(w)).sum::<u32>().max(lo);
            rng.gen_range(lo..=hi)
        }
    };
    Some(inst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedInstance {
    pub name: String,
    pub instance: Instance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<NamedInstance>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Parse { path: PathBuf, source: InstanceError },
    #[error("{}: no instance files", .0.display())]
    Empty(PathBuf),
    #[error("recipe produced no solvable instance")]
    Recipe,
}

/// `count` instances named `<name>-000`, `<name>-001`, ... drawn from one
/// seeded stream.
pub fn desk_suite(name: &str, recipe: &DeskRecipe, count: usize, seed: u64) -> Result<Dataset, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..count)
        .map(|i| {
            random_instance(&mut rng, recipe)
                .map(|instance| NamedInstance { name: format!("{name}-{i:03}"), instance })
                .ok_or(DatasetError::Recipe)
        })
        .collect::<Result<_, _>>()?;
    Ok(Dataset { name: name.into(), instances })
}

impl Dataset {
    /// Every `*.moswacp` file of `dir`, in file-name order.
    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let io = |source| DatasetError::Io { path: dir.to_path_buf(), source };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "moswacp"))
            .collect();
        if paths.is_empty() {
            return Err(DatasetError::Empty(dir.to_path_buf()));
        }
        paths.sort();
        let instances = paths
            .into_iter()
            .map(|path| {
                let text = std::fs::read_to_string(&path).map_err(|source| DatasetError::Io { path: path.clone(), source })?;
                let instance = parse_instance(&text).map_err(|source| DatasetError::Parse { path: path.clone(), source })?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(NamedInstance { name, instance })
            })
            .collect::<Result<_, DatasetError>>()?;
        let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into());
        Ok(Dataset { name, instances })
    }

    /// Write each instance to `<dir>/<name>.moswacp`.
    pub fn save(&self, dir: &Path) -> Result<(), DatasetError> {
        std::fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
        for ni in &self.instances {
            let path = dir.join(format!("{}.moswacp", ni.name));
            std::fs::write(&path, serialize_instance(&ni.instance)).map_err(|source| DatasetError::Io { path, source })?;
        }
        Ok(())
    }
}
