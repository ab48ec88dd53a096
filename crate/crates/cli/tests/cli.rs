use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drinfeld_cli::{execute, Config, Kind, Report};
use serde_json::Value;

fn shipped(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "configs", &format!("{name}.toml")].iter().collect()
}

fn drinfeld(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drinfeld"))
        .args(args)
        .env("DRINFELD_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn report(path: &Path) -> Report {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn carlitz_image_is_full() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = drinfeld(
        &["image", "--config", shipped("carlitz-image").to_str().unwrap(), "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(&out).verdict, "full");
}

#[test]
fn level_meeting_the_characteristic_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "q = 2\nbase = \"finite\"\nbase_degree = 1\nphi_t = [\"0\", \"1\"]\nlevel = \"t\"\nseed = 1\n",
    );
    let o = drinfeld(&["torsion", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("meets characteristic"));
}

#[test]
fn invalid_configs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let base = "q = 2\nphi_t = [\"T\", \"1\"]\nlevel = \"t\"\nplace_bound = 4\n";
    let unknown = write_config(dir.path(), "u.toml", &format!("{base}seed = 1\ncolour = \"red\"\n"));
    let o = drinfeld(&["image", "--config", unknown.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let seedless = write_config(dir.path(), "s.toml", base);
    let o = drinfeld(&["image", "--config", seedless.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = drinfeld(&["image", "--config", seedless.to_str().unwrap(), "--seed", "4"], dir.path());
    assert_ne!(o.status.code(), Some(3));

    let o = drinfeld(&["torsion", "--config", shipped("carlitz-image").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let non_prime = write_config(dir.path(), "p.toml", &format!("{}seed = 1\n", base.replace("q = 2", "q = 4")));
    let o = drinfeld(&["image", "--config", non_prime.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn too_few_places_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.toml",
        "q = 2\nphi_t = [\"T\", \"1\"]\nm = [\"T\"]\nlevel = \"t\"\nplace_bound = 3\nseed = 1\n",
    );
    let out = dir.path().join("r.json");
    let o = drinfeld(&["kummer-density", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(report(&out).error.unwrap().contains("under-sample"));
}

#[test]
fn index_two_hull_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = drinfeld(
        &["division-hull", "--config", shipped("hull-index-two").to_str().unwrap(), "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.payload["index_structure"], serde_json::json!(["2"]));
}

#[test]
fn negative_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = drinfeld(&["kummer-density", "--config", shipped("carlitz-density-f2").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn payload_is_independent_of_worker_count() {
    for (name, kind) in [
        ("carlitz-image", Kind::Image),
        ("carlitz-density-f3", Kind::KummerDensity),
        ("hull-index-two", Kind::DivisionHull),
        ("index-bound-f4", Kind::IndexBound),
        ("carlitz-torsion", Kind::Torsion),
        ("rank2-endring", Kind::Endring),
    ] {
        let mut cfg = Config::load(&shipped(name)).unwrap();
        cfg.workers = Some(1);
        let one = execute(kind, &cfg);
        cfg.workers = Some(8);
        let eight = execute(kind, &cfg);
        assert_eq!(one.payload_bytes(), eight.payload_bytes(), "{name}");
        assert_eq!(one.meta.config_hash, eight.meta.config_hash);
    }
}

fn payload_of(out: &Path) -> String {
    report(out).payload_bytes()
}

#[test]
fn cache_inspect_clear_and_rebuild() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    std::fs::create_dir(&cache).unwrap();
    let cfg = shipped("carlitz-torsion");
    let run = |out: &Path| {
        let o = drinfeld(&["torsion", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &cache);
        assert_eq!(o.status.code(), Some(0));
    };
    let cold = dir.path().join("cold.json");
    run(&cold);
    let o = drinfeld(&["cache", "inspect"], &cache);
    let entries: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(entries.iter().any(|e| e["kind"] == "modulus" && e["key"].is_array()));

    let warm = dir.path().join("warm.json");
    run(&warm);
    assert_eq!(payload_of(&cold), payload_of(&warm));

    // corrupt every entry; the run rebuilds them
    for f in std::fs::read_dir(&cache).unwrap().flatten() {
        std::fs::write(f.path(), b"not json").unwrap();
    }
    let rebuilt = dir.path().join("rebuilt.json");
    run(&rebuilt);
    assert_eq!(payload_of(&cold), payload_of(&rebuilt));

    let o = drinfeld(&["cache", "clear"], &cache);
    assert_eq!(o.status.code(), Some(0));
    let o = drinfeld(&["cache", "inspect"], &cache);
    let entries: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(entries.is_empty());
    let cleared = dir.path().join("cleared.json");
    run(&cleared);
    assert_eq!(payload_of(&cold), payload_of(&cleared));
}

#[test]
fn concurrent_runs_share_a_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("carlitz-image");
    let outs: Vec<PathBuf> = (0..3).map(|i| dir.path().join(format!("{i}.json"))).collect();
    let children: Vec<_> = outs
        .iter()
        .map(|out| {
            Command::new(env!("CARGO_BIN_EXE_drinfeld"))
                .args(["image", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .env("DRINFELD_CACHE_DIR", dir.path())
                .spawn()
                .unwrap()
        })
        .collect();
    for mut c in children {
        assert_eq!(c.wait().unwrap().code(), Some(0));
    }
    let first = payload_of(&outs[0]);
    assert!(outs.iter().all(|o| payload_of(o) == first));
}
