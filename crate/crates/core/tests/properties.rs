mod props;

use proptest::prelude::*;

use props::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn polynomial_ring_laws(abc in (poly(), poly(), poly())) {
        ring_laws(abc)?;
    }

    #[test]
    fn substitution_matches_evaluation(case in substitution_case()) {
        substitution_semantics(case)?;
    }

    #[test]
    fn detected_adders_are_linear(case in circuit()) {
        adder_relation(case)?;
    }

    #[test]
    fn weights_are_conserved(case in (circuit(), any::<bool>())) {
        weight_conservation(case)?;
    }

    #[test]
    fn rewriting_steps_preserve_value(case in random_circuit()) {
        step_invariance(case)?;
    }
}
