use gic_oracle::suites::*;

#[test]
fn monotonicity_holds_in_random_trials() {
    let s = monotonicity_trials(11, 300);
    println!("{s:?}");
    assert_eq!(s.failures, 0);
    assert!(s.checked * 2 > s.trials);
}

#[test]
fn parallel_ray_points_lie_on_the_sic() {
    let s = parallel_ray_trials(5, 100);
    println!("{s:?}");
    assert_eq!(s.exact_failures, 0);
    assert_eq!(s.float_failures, 0);
    assert!(s.points > 0);
}

#[test]
fn dominance_test_matches_enumeration() {
    let s = dominance_trials(7, 400).unwrap();
    println!("{s:?}");
    assert_eq!(s.disagreements, 0);
}

#[test]
fn full_activation_grows_faster() {
    let rows = growth_demo(3, 6, 4, 5).unwrap();
    println!("{rows:?}");
    assert!(rows[4].full > rows[4].partial);
}

#[test]
fn cuts_on_tiny_programs_are_valid() {
    let s = validity_suite(1, 3).unwrap();
    println!("{s:?}");
    assert_eq!(s.invalid, 0);
    assert!(s.cuts > 0);
}

#[test]
fn closure_bounds() {
    let s = closure_suite(1, 4).unwrap();
    println!("{s:?}");
    assert_eq!(s.sandwich_failures, 0);
    assert_eq!(s.full_failures, 0);
}
