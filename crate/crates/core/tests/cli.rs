use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_pblab");

fn pblab(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("PBLAB_THREADS", t),
        None => cmd.env_remove("PBLAB_THREADS"),
    };
    cmd.output().expect("pblab runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

// a small configuration keeps these end-to-end runs quick
const SMALL: &str = "truncation = 64\nn_max = 12\ngrowth_truncations = [8, 16, 32, 64]\n";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let cfg = write_config(dir.path(), SMALL);
    let ok = pblab(&["run", "norms", "--config", &cfg, "--out", out], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let strict = write_config(dir.path(), &format!("{SMALL}tolerance = 1e-300\n"));
    let fail = pblab(&["run", "ladder", "--config", &strict, "--out", out], None);
    assert_eq!(fail.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&fail.stdout);
    assert!(stdout.contains("failed ladder_relations_n_le_14"), "{stdout}");

    let bad = write_config(dir.path(), "n_max = 40\ntruncation = 64\n");
    assert_eq!(pblab(&["run", "family", "--config", &bad], None).status.code(), Some(2));
    assert_eq!(pblab(&["run", "nonsense", "--out", out], None).status.code(), Some(2));
    assert_eq!(pblab(&["run", "norms", "--format", "xml", "--out", out], None).status.code(), Some(2));
    assert_eq!(pblab(&["run", "norms", "--config", "/nonexistent.toml"], None).status.code(), Some(2));
    assert_eq!(pblab(&["run", "norms", "--out", out], Some("0")).status.code(), Some(2));
    assert_eq!(pblab(&[], None).status.code(), Some(2));
}

fn collect(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    for format in ["csv", "json"] {
        let a = dir.path().join(format!("a-{format}"));
        let b = dir.path().join(format!("b-{format}"));
        let ra = pblab(&["run", "all", "--config", &cfg, "--out", a.to_str().unwrap(), "--format", format], Some("1"));
        let rb = pblab(&["run", "all", "--config", &cfg, "--out", b.to_str().unwrap(), "--format", format], Some("4"));
        assert_eq!(ra.status.code(), Some(0), "{}", String::from_utf8_lossy(&ra.stdout));
        assert_eq!(rb.status.code(), Some(0));
        let (fa, fb) = (collect(&a), collect(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb);
        for (_, bytes) in &fa {
            assert!(!bytes.contains(&b'\r'));
        }
    }
}

#[test]
fn csv_headers_match_documentation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let run = pblab(&["run", "all", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(run.status.code(), Some(0));
    let expected: &[(&str, &str)] = &[
        ("family/assertions.csv", "name,property,measured,relation,bound,passed"),
        ("family/gram.csv", "n,m,re,im"),
        ("family/coordinate_vacua.csv", "vector,overlap_abs,phase_re,phase_im"),
        ("family/translation.csv", "n,max_abs_deviation,norm"),
        ("family/notes.csv", "note"),
        ("family/provenance.csv", "key,value"),
        ("ladder/ladder.csv", "n,raising_phi,lowering_phi,raising_psi,lowering_psi,number_phi,number_psi"),
        ("norms/norms.csv", "n,phi_norm_sq,psi_norm_sq,oracle,lower_bound,psi_lower_bound"),
        ("metric/positivity.csv", "trial,direct,direct_imag,factored,expansion,expansion_defect"),
        ("similarity/similarity.csv", "block,relation,residual"),
        ("similarity/spectrum.csv", "n,re,im,deviation"),
        ("quasi-basis/resolution.csv", "f,g,N,phi_psi_defect,psi_phi_defect"),
        ("quasi-basis/probe_defects.csv", "probe,N,defect"),
        ("quasi-basis/projection_norms.csv", "n,phi_norm,psi_norm,projection_norm"),
        ("quasi-basis/aligned_probe.csv", "n,single_term_norm,projection_norm"),
        ("growth/growth.csv", "M,norm_v,norm_theta,norm_theta_inv"),
        ("growth/family_norms.csv", "n,phi_norm_sq,psi_norm_sq"),
        ("summary/summary.csv", "suite,passed,assertions,failures"),
    ];
    for (file, header) in expected {
        let text = fs::read_to_string(out.join(file)).unwrap_or_else(|_| panic!("missing {file}"));
        assert_eq!(text.lines().next(), Some(*header), "{file}");
    }
    let gram = fs::read_to_string(out.join("family/gram.csv")).unwrap();
    assert_eq!(gram.lines().count(), 1 + 13 * 13);
    let float = gram.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let (mantissa, exp) = float.split_once('e').unwrap();
    assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{float}");
    assert!(exp.starts_with('+') || exp.starts_with('-'));
}

#[test]
fn json_reports_follow_schema() {
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/report.schema.json")).unwrap())
            .unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let run = pblab(&["run", "all", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "json"], None);
    assert_eq!(run.status.code(), Some(0));
    for suite in ["family", "ladder", "norms", "metric", "similarity", "quasi-basis", "growth", "summary"] {
        let text = fs::read_to_string(out.join(suite).join("report.json")).unwrap();
        let report: Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{suite}: {errors:?}");
        assert_eq!(report["suite"], suite);
        assert_eq!(report["passed"], true);
    }
}
