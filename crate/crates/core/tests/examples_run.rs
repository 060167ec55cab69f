//! Every runnable example must execute cleanly.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
        }
    };
}

example!(pn_incentive);
example!(pn_divergence);
example!(major_incentive);
example!(loss_curve);
example!(zero_loss);
example!(certify);
example!(assembler);

#[test]
fn pn_incentive_runs() {
    assert!(pn_incentive::run().unwrap().contains("gain = -31.000000"));
}

#[test]
fn pn_divergence_runs() {
    assert!(pn_divergence::run().unwrap().contains("Divergent"));
}

#[test]
fn major_incentive_runs() {
    assert!(major_incentive::run().unwrap().contains("Bounded"));
}

#[test]
fn loss_curve_runs() {
    let csv = loss_curve::run().unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn zero_loss_runs() {
    assert_eq!(zero_loss::run().unwrap().lines().count(), 3);
}

#[test]
fn certify_runs() {
    let text = certify::run().unwrap();
    assert!(text.contains("all followers: pass = true"));
    assert!(text.contains("without gain:  pass = false"));
}

#[test]
fn assembler_runs() {
    assert!(assembler::run().unwrap().starts_with("minor response"));
}
