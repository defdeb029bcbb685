//! Save a run's artifact set (instance, x*, distribution, ensembles,
//! exchange trace, report), re-verify it from the files alone, then
//! tamper with one byte of a serialized tree and watch verification fail.
//!
//!     cargo run --example verify_artifacts

use path_tsp::driver::{artifact_names, cmd_solve, cmd_verify, RunConfig};
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::ratio::rat_from_str;

fn main() -> path_tsp::Result<()> {
    let inst = Instance::random(19, 8, MetricKind::Euclidean)?;
    let cfg = RunConfig {
        epsilon_request: rat_from_str("1/3"),
        ..RunConfig::default()
    };
    let outcome = cmd_solve(&inst, &cfg)?;

    let dir = std::env::temp_dir().join("path-tsp-artifacts-demo");
    let _ = std::fs::remove_dir_all(&dir);
    outcome.save_artifacts(&dir, &inst)?;
    println!("artifacts written to {}", dir.display());
    for entry in std::fs::read_dir(&dir)? {
        let entry = entry?;
        println!("  {} ({} bytes)", entry.file_name().to_string_lossy(), entry.metadata()?.len());
    }

    cmd_verify(&dir)?;
    println!("\nuntouched artifacts: verify pass");

    // tamper: rewrite one edge of the first serialized output tree
    let path = dir.join(artifact_names::ENSEMBLE_OUT);
    let text = std::fs::read_to_string(&path)?;
    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    let edges = v["blocks"][0]["edges"].as_array_mut().expect("blocks");
    let first = edges[0].as_array().expect("edge").clone();
    let (a, b) = (first[0].as_u64().unwrap(), first[1].as_u64().unwrap());
    let other = (0..inst.n() as u64).find(|&x| x != a && x != b).unwrap();
    edges[0] = serde_json::json!([other, b]);
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap())?;

    match cmd_verify(&dir) {
        Err(e) => println!("tampered artifacts: verify fail — {e}"),
        Ok(()) => panic!("tampering must not verify"),
    }
    Ok(())
}
