use ddz::harness::{gen_instance, GenConfig, Target};
use ddz::io::{instance_to_string, matrix_to_string, parse_instance, parse_matrix, IoError};
use ddz_core::{Complex64, ComplexMatrix, DualMatrix};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3..1e3f64, Just(0.0), Just(-0.0)]
}

fn dual_matrix() -> impl Strategy<Value = DualMatrix> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(entry(), 4 * r * c).prop_map(move |v| {
            let part = |off: usize| ComplexMatrix::from_fn(r, c, |i, j| {
                let k = off + 2 * (i * c + j);
                Complex64::new(v[k], v[k + 1])
            });
            DualMatrix { std: part(0), inf: part(2 * r * c) }
        })
    })
}

fn bits(m: &ComplexMatrix) -> Vec<(u64, u64)> {
    m.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

proptest! {
    #[test]
    fn matrix_round_trip_is_bit_identical(x in dual_matrix()) {
        let back = parse_matrix(&matrix_to_string(&x)).unwrap();
        prop_assert_eq!(bits(&back.std), bits(&x.std));
        prop_assert_eq!(bits(&back.inf), bits(&x.inf));
    }
}

#[test]
fn every_generated_instance_round_trips() {
    for t in Target::all() {
        let cfg = GenConfig::new(t, 5, 4);
        for trial in 0..4 {
            let inst = gen_instance(&cfg, trial).unwrap();
            let text = instance_to_string(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst, "{t} trial {trial}");
        }
    }
}

#[test]
fn missing_inf_defaults_to_zero() {
    let x = parse_matrix(r#"{"rows":1,"cols":2,"std":[[[1,0],[0,2]]]}"#).unwrap();
    assert!(x.inf.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    assert_eq!(x.std[(0, 1)], Complex64::new(0.0, 2.0));
}

#[test]
fn malformed_documents_are_schema_errors() {
    let bad = [
        r#"{"rows":2,"cols":1,"std":[[[1,0]]]}"#,
        r#"{"rows":1,"cols":2,"std":[[[1,0]]]}"#,
        r#"{"rows":1,"cols":1,"std":[[[1,0]]],"extra":1}"#,
        r#"{"rows":1,"cols":1,"std":[[[1]]]}"#,
        r#"not json"#,
    ];
    for text in bad {
        assert!(matches!(parse_matrix(text), Err(IoError::Schema(_))), "{text}");
    }
    let missing = r#"{"theorem":"CLINE","blocks":{"A":{"rows":1,"cols":1,"std":[[[1,0]]]}}}"#;
    assert!(matches!(parse_instance(missing), Err(IoError::Schema(_))));
    assert!(matches!(parse_instance(r#"{"neither":1}"#), Err(IoError::Schema(_))));
}
