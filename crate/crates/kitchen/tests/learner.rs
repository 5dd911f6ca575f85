mod props {
    pub mod learner;
}

use props::learner::*;

#[test]
fn generalization_is_a_fixpoint_on_every_subset() {
    suite().unwrap();
}

#[test]
fn learning_is_deterministic_on_subsets() {
    check(48, masks(), learning_is_deterministic).unwrap();
}

#[test]
fn learned_schemas_explain_their_demonstrations() {
    check(48, masks(), schemas_explain_their_demonstrations).unwrap();
}

#[test]
fn generalization_never_grows_the_model_on_subsets() {
    check(48, masks(), generalization_never_grows_the_model).unwrap();
}
