use moswacp::bench::{random_instance, DeskRecipe};
use moswacp::operators::{
    apply_improvements, chromosome_len, crossover, crossover_raw, ir1_switch_mode, ir2_reschedule_float, ir3_regularize_avail, mutate,
    random_solution, repair, score, ImprovementMask, OperatorConfig,
};
use moswacp::schedule::{objective_level, peak_occupancy};
use moswacp::{check_feasible, Chromosome, Instance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64) -> (Instance, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_instance(&mut rng, &DeskRecipe::small()).unwrap();
    (inst, rng)
}

macro_rules! draw {
    ($inst:expr, $rng:expr) => {
        match random_solution(&$inst, &mut $rng, 1000) {
            Some(c) => c,
            None => return Err(TestCaseError::reject("no random schedule")),
        }
    };
}

fn feasible(inst: &Instance, sol: &Chromosome) -> bool {
    check_feasible(inst, sol).is_ok_and(|d| d.is_feasible())
}

#[test]
fn operator_config_from_fractions() {
    let (inst, _) = setup(2);
    let cfg = OperatorConfig::from_fractions(&inst, 0.2, 0.2, ImprovementMask::ALL);
    assert!(cfg.is_valid_for(&inst));
    assert!(cfg.crossover_point >= 1 && cfg.crossover_point < chromosome_len(&inst));
}

#[test]
fn mask_variants() {
    assert_eq!(ImprovementMask::ersa_variant(0), Some(ImprovementMask::NONE));
    assert_eq!(ImprovementMask::ersa_variant(4), Some(ImprovementMask::ALL));
    let v1 = ImprovementMask::ersa_variant(1).unwrap();
    assert!(v1.ir1 && v1.ir2 && !v1.ir3);
    let v3 = ImprovementMask::ersa_variant(3).unwrap();
    assert!(!v3.ir1 && v3.ir2 && v3.ir3);
    assert_eq!(ImprovementMask::ersa_variant(5), None);
}

#[test]
fn crossover_at_the_ends_swaps_whole_parents() {
    let (inst, mut rng) = setup(8);
    let a = random_solution(&inst, &mut rng, 1000).unwrap();
    let b = random_solution(&inst, &mut rng, 1000).unwrap();
    let (c1, c2) = crossover_raw(&a, &b, 0);
    assert_eq!((c1, c2), (b.clone(), a.clone()));
    let (c1, c2) = crossover_raw(&a, &b, a.len());
    assert_eq!((c1, c2), (a, b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn variation_keeps_feasibility(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        let b = draw!(inst, rng);
        let cp = rng.gen_range(0..=a.len());
        let (c1, c2) = crossover(&inst, &a, &b, cp);
        prop_assert!(feasible(&inst, &c1) && feasible(&inst, &c2));
        let r_m = rng.gen_range(1..=a.len());
        prop_assert!(feasible(&inst, &mutate(&inst, &a, r_m, &mut rng)));
    }

    #[test]
    fn repair_is_identity_on_feasible_input(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        prop_assert_eq!(repair(&inst, &a).unwrap(), a.clone());
        let m = mutate(&inst, &a, 3, &mut rng);
        prop_assert_eq!(repair(&inst, &m).unwrap(), m);
    }

    #[test]
    fn repair_fixes_corrupted_chromosomes(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        let mut genes = a.to_genes();
        for g in genes.iter_mut() {
            if rng.gen_bool(0.5) {
                *g = rng.gen_range(0..=u64::from(inst.horizon));
            }
        }
        let bad = Chromosome::from_genes(inst.n_activities(), inst.n_workshops(), &genes);
        if let Ok(fixed) = repair(&inst, &bad) {
            prop_assert!(feasible(&inst, &fixed));
        }
    }

    #[test]
    fn improvement_rules_never_hurt(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        let before = score(&inst, &a);
        for out in [ir1_switch_mode(&inst, &a), ir2_reschedule_float(&inst, &a), ir3_regularize_avail(&inst, &a), apply_improvements(&inst, &a, ImprovementMask::ALL)] {
            prop_assert!(feasible(&inst, &out));
            let s = score(&inst, &out);
            prop_assert!(s.objective <= before.objective + 1e-9);
            prop_assert!(objective_level(&inst, &out.avail) <= objective_level(&inst, &a.avail) + 1e-9);
        }
    }

    #[test]
    fn ir3_sets_availability_to_peaks(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        let out = ir3_regularize_avail(&inst, &a);
        prop_assert_eq!(&out.start, &a.start);
        prop_assert_eq!(out.avail, peak_occupancy(&inst, &a.start, &a.mode));
    }

    #[test]
    fn empty_mask_is_identity(seed in any::<u64>()) {
        let (inst, mut rng) = setup(seed);
        let a = draw!(inst, rng);
        prop_assert_eq!(apply_improvements(&inst, &a, ImprovementMask::NONE), a);
    }
}
