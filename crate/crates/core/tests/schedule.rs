use moswacp::bench::{random_instance, DeskRecipe};
use moswacp::operators::random_solution;
use moswacp::schedule::{
    decode_serial, decode_with_release, objective_level, osw_windows, peak_occupancy, ConstraintTag, Window,
};
use moswacp::{check_feasible, Chromosome, Instance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample(seed: u64) -> Option<(Instance, Chromosome)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_instance(&mut rng, &DeskRecipe::small())?;
    let sol = random_solution(&inst, &mut rng, 1000)?;
    Some((inst, sol))
}

macro_rules! case {
    ($seed:expr) => {
        match sample($seed) {
            Some(c) => c,
            None => return Err(TestCaseError::reject("no random schedule")),
        }
    };
}

#[test]
fn window_day_arithmetic() {
    let w = Window { install: 15, dismantle: 43 };
    assert_eq!((w.install_day(), w.dismantle_day(), w.billed_days(), w.len()), (16, 43, 27, 28));
    assert_eq!(Window::EMPTY.billed_days(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decoded_schedules_are_feasible(seed in any::<u64>()) {
        let (inst, sol) = case!(seed);
        let d = check_feasible(&inst, &sol).unwrap();
        prop_assert!(d.is_feasible(), "{:?}", d.violations);
        prop_assert!(d.makespan <= inst.deadline);
    }

    #[test]
    fn decoding_own_starts_reproduces_them(seed in any::<u64>()) {
        let (inst, sol) = case!(seed);
        let again = decode_with_release(&inst, &sol.mode, &sol.avail, &sol.start).unwrap();
        prop_assert_eq!(again, sol.start);
    }

    #[test]
    fn empty_release_is_plain_serial_decoding(seed in any::<u64>()) {
        let (inst, sol) = case!(seed);
        prop_assert_eq!(
            decode_with_release(&inst, &sol.mode, &sol.avail, &[]).ok(),
            decode_serial(&inst, &sol.mode, &sol.avail).ok()
        );
    }

    #[test]
    fn windows_cover_exactly_the_users(seed in any::<u64>()) {
        let (inst, sol) = case!(seed);
        let windows = osw_windows(&inst, &sol.start, &sol.mode);
        prop_assert_eq!(&windows, &sol.windows());
        for (k, w) in windows.iter().enumerate() {
            let users: Vec<usize> = (0..inst.n_activities()).filter(|&a| inst.mode(a, sol.mode[a]).uses(k)).collect();
            prop_assert_eq!(w.is_empty(), users.is_empty());
            for &a in &users {
                prop_assert!(w.install <= sol.start[a] && sol.finish(&inst, a) <= w.dismantle);
            }
            if !users.is_empty() {
                prop_assert!(users.iter().any(|&a| sol.start[a] == w.install));
                prop_assert!(users.iter().any(|&a| sol.finish(&inst, a) == w.dismantle));
            }
        }
    }

    #[test]
    fn peaks_never_exceed_availability(seed in any::<u64>()) {
        let (inst, sol) = case!(seed);
        let peaks = peak_occupancy(&inst, &sol.start, &sol.mode);
        prop_assert!(peaks.iter().zip(&sol.avail).all(|(p, r)| p <= r));
        prop_assert!(objective_level(&inst, &peaks) <= objective_level(&inst, &sol.avail));
    }

    #[test]
    fn moving_a_successor_before_its_predecessor_is_caught(seed in any::<u64>()) {
        let (inst, mut sol) = case!(seed);
        if let Some(j) = (0..inst.n_activities()).find(|&j| {
            inst.activities[j].predecessors.iter().any(|&p| inst.mode(p, sol.mode[p]).duration > 0)
        }) {
            let p = *inst.activities[j].predecessors.iter().find(|&&p| inst.mode(p, sol.mode[p]).duration > 0).unwrap();
            sol.start[j] = sol.start[p];
            let d = check_feasible(&inst, &sol).unwrap();
            prop_assert!(d.has(ConstraintTag::Precedence));
        }
    }

    #[test]
    fn lowering_availability_below_the_peak_is_caught(seed in any::<u64>()) {
        let (inst, mut sol) = case!(seed);
        let peaks = peak_occupancy(&inst, &sol.start, &sol.mode);
        if let Some(k) = peaks.iter().position(|&p| p > 0) {
            sol.avail[k] = peaks[k] - 1;
            prop_assert!(check_feasible(&inst, &sol).unwrap().has(ConstraintTag::OswCapacity));
        }
    }
}

#[test]
fn wrong_shape_is_an_error_not_a_diagnostic() {
    let (inst, mut sol) = sample(1).unwrap();
    sol.start.pop();
    assert!(check_feasible(&inst, &sol).is_err());
}
