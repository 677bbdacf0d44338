mod common;

#[test]
fn planted_positions_are_marked_and_removal_is_equivalent() {
    let fixtures = common::far_fixtures();
    assert!(fixtures.len() >= 10);
    for fx in &fixtures {
        assert!(!fx.planted.is_empty(), "{} plants nothing", fx.name);
        assert!(fx.queries.len() >= 3, "{} has too few queries", fx.name);
        common::far_check(fx).unwrap();
    }
}
