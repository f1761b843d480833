use nalgebra::DVector;
use proptest::prelude::*;

use tensorica::datagen::{MixingModel, SourceDistribution};
use tensorica::diagnostics::closest_component;
use tensorica::solver::{sgd_step, SolverState, UnitVector};

fn finite_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, d..=d)
}

proptest! {
    #[test]
    fn projection_is_scale_invariant(
        xs in finite_vec(6),
        scale in 0.01f64..100.0,
    ) {
        let x = DVector::from_vec(xs);
        prop_assume!(x.norm() > 1e-6);
        let base = UnitVector::project(&x).unwrap();
        let scaled = UnitVector::project(&(scale * &x)).unwrap();
        let diff = (base.as_vector() - scaled.as_vector()).norm();
        prop_assert!(diff < 1e-12, "scaling by {scale} moved the projection by {diff}");
    }

    #[test]
    fn closest_component_is_sign_invariant(
        seed in 0u64..1000,
        xs in finite_vec(5),
    ) {
        let x = DVector::from_vec(xs);
        prop_assume!(x.norm() > 1e-6);
        let u = UnitVector::project(&x).unwrap();
        let neg = UnitVector::project(&(-x)).unwrap();
        let model = MixingModel::haar(5, seed, SourceDistribution::gaussian_bernoulli()).unwrap();
        let a = closest_component(&u, &model);
        let b = closest_component(&neg, &model);
        prop_assert_eq!(a.index, b.index);
        prop_assert!((a.tan_abs - b.tan_abs).abs() < 1e-12);
    }

    #[test]
    fn step_stays_on_sphere_for_arbitrary_data(
        us in finite_vec(4),
        xs in finite_vec(4),
        eta in 0.0f64..0.5,
    ) {
        let u = DVector::from_vec(us);
        prop_assume!(u.norm() > 1e-6);
        let x = DVector::from_vec(xs);
        let mut state = SolverState::new(UnitVector::project(&u).unwrap(), 1.0);
        // degenerate update (x exactly cancelling u) is an error, not a panic
        if sgd_step(&mut state, &x, eta).is_ok() {
            prop_assert!((state.u.as_vector().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stepsize_schedules_are_positive_and_piecewise_constant(
        t_total in 10_000usize..1_000_000,
        d in 2usize..64,
    ) {
        use tensorica::schedule::{build_schedule, ScheduleParams};
        let params = ScheduleParams { t_total, d, mu4: 6.0, b: 12.0f64.sqrt() };
        for kind in ["two-phase-practical", "constant-warm"] {
            if let Ok(s) = build_schedule(kind, &params) {
                let mut seen = std::collections::BTreeSet::new();
                for t in [1, t_total / 3, t_total / 2, t_total / 2 + 1, t_total] {
                    let eta = s.stepsize_at(t);
                    prop_assert!(eta > 0.0, "{kind}: eta = {eta} at t = {t}");
                    seen.insert((s.phase_of(t), eta.to_bits()));
                }
                // one (phase, stepsize) pair per phase
                prop_assert!(seen.len() <= 2, "{kind}: {seen:?}");
            }
        }
    }
}
