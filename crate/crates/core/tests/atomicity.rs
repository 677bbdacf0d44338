mod common;

#[test]
fn injected_failures_leave_the_tree_untouched() {
    assert_eq!(common::fault_injection(10).unwrap(), 10);
}

#[test]
fn every_step_is_covered() {
    let n = common::fault_steps();
    assert_eq!(common::fault_injection(n).unwrap(), n);
}
