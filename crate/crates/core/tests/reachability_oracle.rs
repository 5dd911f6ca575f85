mod props {
    pub mod reach;
}

use props::reach::{check, covers_true_reachability, grounding_is_exhaustive, is_the_relaxed_fixpoint, problem};

#[test]
fn relaxed_reachability_covers_true_reachability() {
    check(2_000, problem(), covers_true_reachability).unwrap();
}

#[test]
fn relaxed_reachability_is_the_relaxed_fixpoint() {
    check(2_000, problem(), is_the_relaxed_fixpoint).unwrap();
}

#[test]
fn grounding_enumerates_injective_typed_bindings() {
    check(2_000, problem(), grounding_is_exhaustive).unwrap();
}
