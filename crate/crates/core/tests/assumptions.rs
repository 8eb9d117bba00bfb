mod common;

use std::sync::Arc;

use hammerstein::kernel::{Kernel, Regime};
use hammerstein::problem::*;
use hammerstein::space::{DiscreteMeasureSpace, TimeGrid};
use hammerstein::Error;
use nalgebra::DMatrix;

fn with_weight(weight: WeightField) -> ProblemInstance {
    ProblemInstance::new(
        common::two_state_kernel(),
        TimeGrid::new(5.0, 200).unwrap(),
        Nonlinearity::power(0.5).unwrap(),
        weight,
        SourceSpec::Constant(0.25),
        5.0,
    )
    .unwrap()
}

#[test]
fn desk_instances_pass_every_entry() {
    for p in [common::desk_stochastic(5.0, 200), common::desk_substochastic(2.0, 200)] {
        let r = check_assumptions(&p, &SamplingPlan::default());
        assert!(r.pass(), "failing: {:?}", r.failing_names());
        assert!(r.entries.iter().all(|e| e.pass));
    }
}

#[test]
fn vanishing_ratio_is_named() {
    let r = check_assumptions(&common::desk_stochastic_with(5.0, 200, 0.0, SourceSpec::Constant(0.25)), &SamplingPlan::default());
    assert_eq!(r.failing_names(), vec![ENVELOPE_RATIO_LIMIT]);
}

#[test]
fn unnormalized_p2_is_named() {
    let p1 = Envelope::exponential(0.25, 0.5).unwrap();
    let p2 = Envelope::exponential(1.0, 0.5).unwrap(); // ∫ = 2
    let r = check_assumptions(&with_weight(WeightField::mixture(p1, p2, vec![0.5]).unwrap()), &SamplingPlan::default());
    assert!(r.failing_names().contains(&P2_NORMALIZED), "{:?}", r.failing_names());
    let e = r.entry(P2_NORMALIZED).unwrap();
    assert!((e.worst_violation - 1.0).abs() < 1e-9);
}

#[test]
fn positive_off_diagonal_is_rejected_as_kernel_sign() {
    let space = Arc::new(DiscreteMeasureSpace::finite(&[0.5, 0.5]).unwrap());
    let err = Kernel::matrix_semigroup(space, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -1.0, 1.0])).unwrap_err();
    assert!(matches!(err, Error::InvalidGenerator { row: 0, col: 1, .. }));
    let r = AssumptionReport::generator_rejected(Regime::Stochastic, &err);
    assert!(!r.pass());
    assert_eq!(r.failing_names(), vec![KERNEL_NONNEGATIVE]);
}

#[test]
fn seeds_change_samples_not_verdicts() {
    let p = common::desk_stochastic(5.0, 200);
    let a = check_assumptions(&p, &SamplingPlan::with_seed(1));
    let b = check_assumptions(&p, &SamplingPlan::with_seed(2));
    assert_eq!(a.pass(), b.pass());
    let again = check_assumptions(&p, &SamplingPlan::with_seed(1));
    assert_eq!(format!("{a:?}"), format!("{again:?}"));
}

#[test]
fn zero_source_fails_only_rate_entries() {
    let p = common::desk_stochastic_with(5.0, 50, 0.5, SourceSpec::Constant(0.0));
    let r = check_assumptions(&p, &SamplingPlan::default());
    assert!(!r.pass());
    assert!(r.existence_pass());
    assert!(r.failing_names().contains(&SOURCE_POSITIVE_FLOOR));
}

#[test]
fn understated_decay_rate_breaks_the_sandwich() {
    let k = common::one_state_damped(0.5).with_declared_rates(0.0, 0.0).unwrap();
    let report = k.verify_bounds(&[0], &[1.0], 1e-10);
    assert!(!report.pass);
    assert!((report.worst_lower_violation - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
}
