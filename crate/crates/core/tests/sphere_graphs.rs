mod common;

#[test]
fn patch_and_rotation_independence() {
    let st = common::patch_and_rotation(&["cyclic:2", "cyclic:3", "product:cyclic:2,cyclic:2"], &["s3_2tet", "rp3", "s2xs1", "t3_6tet"], 11);
    assert!(st.failures.is_empty(), "{:?}", st.failures);
    assert!(st.graphs > 100 && st.nonzero > 50, "{st:?}");
}
