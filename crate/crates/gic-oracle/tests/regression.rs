use gic_oracle::regression::{tilt_regression, setup};
use gic_oracle::{q, qf};

#[test]
fn fixture_optimum_and_cone() {
    let s = setup().unwrap();
    let x = s.sf.to_original(&s.cone.apex);
    assert!((x[0] - 0.25).abs() < 1e-12 && (x[1] - 0.25).abs() < 1e-12 && (x[2] - 0.5).abs() < 1e-12);
}

#[test]
fn regression_legs() {
    let r = tilt_regression().unwrap();
    println!("{r:#?}");
    assert_eq!(r.apex, vec![qf(1, 4), qf(1, 4), qf(1, 2)]);
    assert!(r.broken_leg());
    assert!(r.enforced_leg());
    assert!(r.compliant_leg());
    assert!(r.broken_points.contains(&vec![q(0), q(0), q(0)]));
    assert!(r.broken_points.contains(&vec![q(0), qf(3, 4), q(0)]));
}
