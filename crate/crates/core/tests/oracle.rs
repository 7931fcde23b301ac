//! Sanity checks for the test-side feasibility oracle itself.

mod common;

use common::{oracle, q, satisfies, Row};

fn row(a: &[i64], b: i64, strict: bool) -> Row {
    Row { a: a.to_vec(), b, strict }
}

#[test]
fn opposite_strict_rows_are_infeasible() {
    assert!(oracle(1, &[row(&[1], 0, true), row(&[-1], 0, true)]).is_none());
}

#[test]
fn opposite_weak_rows_meet_at_zero() {
    assert_eq!(oracle(1, &[row(&[1], 0, false), row(&[-1], 0, false)]), Some(vec![q(0)]));
}

#[test]
fn unbounded_region_still_yields_a_point() {
    let rows = [row(&[1, -1], -3, true)];
    let x = oracle(2, &rows).unwrap();
    assert!(satisfies(&rows, &x));
}

#[test]
fn constant_rows() {
    assert!(oracle(1, &[row(&[0], 0, true)]).is_none());
    assert!(oracle(1, &[row(&[0], 0, false)]).is_some());
    assert!(oracle(2, &[row(&[0, 0], -1, false)]).is_none());
}

#[test]
fn triangle() {
    // x > 0, y > 0, x + y < 1.
    let rows = [row(&[1, 0], 0, true), row(&[0, 1], 0, true), row(&[-1, -1], 1, true)];
    assert!(satisfies(&rows, &oracle(2, &rows).unwrap()));
    // x ≥ 0, y ≥ 0, x + y ≤ 0 with one strict: empty.
    let rows = [row(&[1, 0], 0, true), row(&[0, 1], 0, false), row(&[-1, -1], 0, false)];
    assert!(oracle(2, &rows).is_none());
}
