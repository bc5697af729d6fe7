use lars::{datasets, standardize};
use sha2::{Digest, Sha256};

#[test]
fn bundled_diabetes_file_is_pinned() {
    let digest = hex::encode(Sha256::digest(datasets::DIABETES_CSV.as_bytes()));
    assert_eq!(
        digest,
        "f8e35a9ceb4fc00cb4831270adb822e83e5d410ea1fc34e7f20b0e134d7302d9"
    );
}

#[test]
fn diabetes_shape_and_summary() {
    let (x, y, names) = datasets::diabetes();
    assert_eq!(x.dim(), (442, 10));
    assert_eq!(
        names,
        ["AGE", "SEX", "BMI", "BP", "S1", "S2", "S3", "S4", "S5", "S6"]
    );
    assert!((y.mean().unwrap() - 152.133).abs() < 1e-3);
    assert_eq!(
        (
            y.iter().cloned().fold(f64::INFINITY, f64::min),
            y.iter().cloned().fold(0.0, f64::max)
        ),
        (25.0, 346.0)
    );
    let d = standardize(x.view(), y.view(), &names).unwrap();
    for j in 0..10 {
        let c = d.column(j);
        assert!(c.sum().abs() < 1e-10 && (c.dot(&c) - 1.0).abs() < 1e-12);
    }
    assert!(d.response().sum().abs() < 1e-9);
}
