use num_rational::BigRational;
use predual::generate::{density, rank_one, spectral};
use predual::io::CertificateDoc;
use predual::{approx_split, verify_certificate, FunctionSpec, InstanceDocument, Mode, Tolerances, WorkCap};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn generated_documents_round_trip() {
    let docs = [
        spectral(5, &q(1, 16), 3).unwrap(),
        density(4, 3).unwrap(),
        rank_one(&FunctionSpec::parse("samples:1,-1/2,3").unwrap(), &FunctionSpec::parse("const:-1").unwrap(), 8, 0)
            .unwrap(),
        rank_one(&FunctionSpec::parse("sine").unwrap(), &FunctionSpec::parse("const:1").unwrap(), 8, 0).unwrap(),
    ];
    for doc in docs {
        let text = doc.to_json().unwrap();
        let back = InstanceDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
    }
}

#[test]
fn canonical_form_preserves_the_functional() {
    let doc = spectral(4, &q(1, 8), 9).unwrap();
    let canon = doc.canonical().unwrap();
    assert_eq!(canon.functional::<BigRational>().unwrap(), doc.functional::<BigRational>().unwrap());
}

#[test]
fn certificates_round_trip_in_both_modes() {
    let doc = spectral(6, &q(1, 4), 1).unwrap();
    let phi = doc.functional::<BigRational>().unwrap();
    let tol = Tolerances::exact();
    let cert = approx_split(&phi, &tol, WorkCap::default()).unwrap();
    let solvable = cert.defect == q(0, 1);
    let text = serde_json::to_string(&CertificateDoc::new(&cert, solvable, None)).unwrap();
    let back: CertificateDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(back.mode, Mode::Exact);
    let rebuilt = back.to_certificate(&phi).unwrap();
    assert_eq!(rebuilt.psi, cert.psi);
    assert_eq!(verify_certificate(&phi, &rebuilt, &tol).max_violation, 0.0);

    let doc = density(5, 2).unwrap();
    let phi = doc.functional::<f64>().unwrap();
    let tol = Tolerances::float();
    let cert = approx_split(&phi, &tol, WorkCap::default()).unwrap();
    let text = serde_json::to_string(&CertificateDoc::new(&cert, false, None)).unwrap();
    let back: CertificateDoc = serde_json::from_str(&text).unwrap();
    let rebuilt = back.to_certificate(&phi).unwrap();
    assert!(verify_certificate(&phi, &rebuilt, &tol).max_violation <= 1e-9);
}

#[test]
fn invalid_documents_are_rejected() {
    let good = spectral(2, &q(1, 2), 0).unwrap().to_json().unwrap();
    assert!(InstanceDocument::from_json("{").is_err());
    assert!(InstanceDocument::from_json(&good.replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
    assert!(InstanceDocument::from_json(&good.replacen('{', "{\"extra\": 1,", 1)).is_err());
    let zero = r#"{"schema_version": 1, "algebra": {"blocks": [2]}, "mode": "exact",
        "functional": {"form": "spectral", "blocks": [{"weights": ["0", "0"]}]}}"#;
    let doc = InstanceDocument::from_json(zero).unwrap();
    assert!(doc.functional::<BigRational>().is_err());
    let exact_matrix = r#"{"schema_version": 1, "algebra": {"blocks": [1]}, "mode": "exact",
        "functional": {"form": "matrix", "blocks": [[["1"]]]}}"#;
    assert!(InstanceDocument::from_json(exact_matrix).is_err());
}
