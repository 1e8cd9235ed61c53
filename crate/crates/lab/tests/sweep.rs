use gkdv_lab::sweep;

fn scenario(output: &std::path::Path, a: f64) -> String {
    format!(
        "output = \"{}\"\n[grid]\nL = 40\nN = 512\n[initial]\nrecipe = \"scaledQ a={a}\"\n[evolve]\nT = 0.05\nstride = 25\n[monitors]\nmorawetz_radius = 10\ntail_offsets = [5]\n",
        output.display()
    )
}

#[test]
fn sweep_runs_every_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let cfgs = tmp.path().join("configs");
    std::fs::create_dir(&cfgs).unwrap();
    std::fs::write(cfgs.join("a.toml"), scenario(&tmp.path().join("out-a"), 1.0)).unwrap();
    std::fs::write(cfgs.join("b.toml"), scenario(&tmp.path().join("out-b"), 0.98)).unwrap();
    std::fs::write(cfgs.join("c.toml"), "[grid]\nN = 15\n").unwrap();
    std::fs::write(cfgs.join("notes.txt"), "ignored").unwrap();
    let entries = sweep(&cfgs).unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries[0].config.ends_with("a.toml"));
    let a = entries[0].outcome.as_ref().unwrap();
    let b = entries[1].outcome.as_ref().unwrap();
    assert!(a.mass_gap.abs() < 1e-12 && b.mass_gap > 0.0);
    assert!(tmp.path().join("out-a/report.json").exists());
    assert!(tmp.path().join("out-b/report.json").exists());
    assert!(entries[2].outcome.is_err());
}

#[test]
fn shared_outputs_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("same");
    std::fs::write(tmp.path().join("a.toml"), scenario(&out, 1.0)).unwrap();
    std::fs::write(tmp.path().join("b.toml"), scenario(&out, 0.9)).unwrap();
    assert!(sweep(tmp.path()).is_err());
}
