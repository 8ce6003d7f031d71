use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::Instant;

use noether_core::actions::{identity, ActionKind, GroupElement};
use noether_core::frames::{path_from_invariants, InvariantSequence};
use noether_core::reconstruction::{IntegrationConstants, ReconstructionInput};
use noether_core::variational::InvariantLagrangian;

const PERIOD_SIX: &str = r#"{"action":"sl2-linear","offset":0,"points":[[1,0],[0,2],[-1,2],[-1,0],[0,-2],[1,-2],[1,0],[0,2],[-1,2],[-1,0]]}"#;
const KAPPA: &str = r#"{"terms":[{"coeff":1,"kappa":{"0":1}}]}"#;

fn write(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn noether(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noether")).args(args).output().unwrap()
}

fn run(args: &[&str]) -> (i32, serde_json::Value, String) {
    let out = noether(args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(stdout.trim()).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), json, String::from_utf8(out.stderr).unwrap())
}

fn numbers(v: &serde_json::Value) -> Vec<f64> {
    match v {
        serde_json::Value::Array(xs) => xs.iter().flat_map(numbers).collect(),
        serde_json::Value::Number(n) => vec![n.as_f64().unwrap()],
        _ => vec![],
    }
}

#[test]
fn invariants_examples() {
    let cases = [
        ("inv_sl2.json", r#"{"action":"sl2-linear","offset":0,"points":[[1,1],[2,4],[3,9]]}"#, vec![1.0], Some(vec![2.0, 6.0])),
        ("inv_sa2.json", r#"{"action":"sa2","offset":0,"points":[[0,0],[1,0],[1,1],[0,1]]}"#, vec![1.0, 1.0], Some(vec![1.0])),
        ("inv_proj.json", r#"{"action":"sl2-projective","offset":0,"points":[[1],[0.5],[0.25],[0.125]]}"#, vec![-2.0 / 7.0], None),
    ];
    for (name, doc, kappa, tau) in cases {
        let (code, json, _) = run(&["invariants", "--path", write(name, doc).to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(numbers(&json["kappa"]), kappa, "{name}");
        assert_eq!(tau.map(|t| numbers(&json["tau"]) == t), json.get("tau").map(|_| true), "{name}");
    }
}

#[test]
fn invariants_error_codes() {
    let (code, _, err) = run(&["invariants", "--path", write("bad.json", "{\"action\": \"sa2\",\n \"offset\": }").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
    let shape = write("shape.json", r#"{"action":"sa2","offset":0,"points":[[0,0],[1]]}"#);
    let (code, _, err) = run(&["invariants", "--path", shape.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("points[1]"), "{err}");
    let collinear = write("collinear.json", r#"{"action":"sl2-linear","offset":3,"points":[[1,1],[2,2],[3,3]]}"#);
    let (code, _, err) = run(&["invariants", "--path", collinear.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("degenerate window at site 3"), "{err}");
}

#[test]
fn check_examples() {
    let six = write("six.json", PERIOD_SIX);
    let l = write("kappa.json", KAPPA);
    let (code, json, _) = run(&["check", "--path", six.to_str().unwrap(), "--lagrangian", l.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(numbers(&json["noether_k"]), vec![-1.0, 2.0, -0.5]);
    assert!(json["drift"].as_f64().unwrap() < 1e-12);
    assert!(json["el_residual_max"].as_f64().unwrap() < 1e-12);
    assert_eq!(json["first_integral"].as_f64().unwrap(), -3.0);

    let perturbed = write("six_perturbed.json", &PERIOD_SIX.replacen("[0,2]", "[0,2.01]", 1));
    let (code, json, err) = run(&["check", "--path", perturbed.to_str().unwrap(), "--lagrangian", l.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(json["drift"].as_f64().unwrap() > 1e-3);
    assert!(err.contains("drift"));

    let constant = write("constant.json", r#"{"terms":[{"coeff":2.5}]}"#);
    let (code, json, _) = run(&["check", "--path", six.to_str().unwrap(), "--lagrangian", constant.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(numbers(&json["noether_k"]), vec![0.0, 0.0, 0.0]);
}

#[test]
fn reconstruct_period_six() {
    let inv = write("six_inv.json", r#"{"offset":0,"kappa":[1,1,1,1,1,1,1,1,1,1],"tau":[2,2,2,2,2,2,2,2,2,2]}"#);
    let constants = write("six_k.json", &format!(r#"{{"k":[-1,2,-0.5],"lagrangian":{KAPPA},"c0":0,"d0":1}}"#));
    let (code, json, err) = run(&[
        "reconstruct", "--action", "sl2-linear", "--invariants", inv.to_str().unwrap(), "--constants", constants.to_str().unwrap(), "--length", "7",
    ]);
    assert_eq!(code, 0, "{err}");
    let expected = [1.0, 0.0, 0.0, 2.0, -1.0, 2.0, -1.0, 0.0, 0.0, -2.0, 1.0, -2.0, 1.0, 0.0];
    let got = numbers(&json["points"]);
    assert!(got.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{got:?}");

    let out = write("six_out.json", &json.to_string());
    let (code, back, _) = run(&["invariants", "--path", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(numbers(&back["kappa"]).iter().all(|k| (k - 1.0).abs() < 1e-7));
    assert!(numbers(&back["tau"]).iter().all(|t| (t - 2.0).abs() < 1e-7));
}

#[test]
fn reconstruct_names_the_violated_hypothesis() {
    let inv = write("k3_inv.json", r#"{"offset":0,"kappa":[1,1,1,1],"tau":[2,2,2,2]}"#);
    let constants = write("k3_k.json", &format!(r#"{{"k":[-1,2,0],"lagrangian":{KAPPA},"c0":0,"d0":1}}"#));
    let (code, _, err) = run(&[
        "reconstruct", "--action", "sl2-linear", "--invariants", inv.to_str().unwrap(), "--constants", constants.to_str().unwrap(), "--length", "4",
    ]);
    assert_eq!(code, 4);
    assert!(err.contains("k3*(k1^2+4k2k3) must be nonzero"), "{err}");
}

#[test]
fn reconstruct_sa2_roundtrip() {
    let kind = ActionKind::Sa2Linear;
    let action = kind.strategy();
    let inv = InvariantSequence::constant(kind, 0, 10, 1.0, 3.0);
    let path = path_from_invariants(action, &inv, &identity(kind)).unwrap();
    let input = ReconstructionInput::from_path(action, &InvariantLagrangian::kappa(), &path).unwrap();
    let IntegrationConstants::SeedFrame(GroupElement::Sa2(seed)) = &input.constants else { panic!() };
    let inv_doc = serde_json::json!({"offset": input.inv.offset, "kappa": input.inv.kappa, "tau": input.inv.tau});
    let k_doc = serde_json::json!({"k": input.k, "v_offset": input.v_offset, "v": input.v, "c0": seed.g.c});
    let len = input.v.len().to_string();
    let (code, json, err) = run(&[
        "reconstruct",
        "--action",
        "sa2",
        "--invariants",
        write("sa2_inv.json", &inv_doc.to_string()).to_str().unwrap(),
        "--constants",
        write("sa2_k.json", &k_doc.to_string()).to_str().unwrap(),
        "--length",
        &len,
    ]);
    assert_eq!(code, 0, "{err}");
    let truth = path.slice(input.v_offset, input.v.len()).unwrap();
    let got = numbers(&json["points"]);
    let dev = got.iter().zip(truth.flat_points()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 1e-8, "{dev:e}");
}

#[test]
fn verify_is_deterministic_and_passes() {
    for tag in ["sl2-linear", "sa2", "sl2-projective"] {
        let start = Instant::now();
        let a = noether(&["verify", "--action", tag, "--trials", "100", "--seed", "42"]);
        assert!(start.elapsed().as_secs() < 60);
        let table = String::from_utf8(a.stdout.clone()).unwrap();
        assert_eq!(a.status.code(), Some(0), "{table}");
        assert_eq!(table.matches("PASS").count(), 10, "{table}");
        let b = noether(&["verify", "--action", tag, "--trials", "100", "--seed", "42"]);
        assert_eq!(a.stdout, b.stdout);
    }
    let empty = noether(&["verify", "--action", "sa2", "--trials", "0", "--seed", "1"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(String::from_utf8(empty.stdout).unwrap(), "action sa2 seed 1 trials 0\n");
}

#[test]
fn bad_epsilon_is_a_parse_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_noether"))
        .args(["verify", "--action", "sa2", "--trials", "0"])
        .env("NOETHER_EPS", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let six = write("six_repeat.json", PERIOD_SIX);
    let l = write("kappa_repeat.json", KAPPA);
    let args = ["check", "--path", six.to_str().unwrap(), "--lagrangian", l.to_str().unwrap()];
    assert_eq!(noether(&args).stdout, noether(&args).stdout);
}
