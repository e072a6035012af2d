use std::path::{Path, PathBuf};
use std::process::Command;

use choral_cli::commands::{cmd_gen_map, cmd_plan, cmd_render, cmd_validate, OutputSpec, PlanOutcome, EXIT_INFEASIBLE};
use choral_cli::pipeline::RunOptions;
use choral_core::gridmap::Label;
use choral_core::scenario::{load_scenario, Template};
use choral_core::{LoadedScenario, MapSpec, SolutionFile};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).join("scenario.json")
}

fn opts(baseline: bool) -> RunOptions {
    RunOptions { seed: Some(11), budget_iters: Some(100_000), baseline, ..Default::default() }
}

fn plan_toy(root: &Path, baseline: bool) -> (PathBuf, Box<choral_cli::pipeline::PipelineOutput>) {
    let out = OutputSpec { root: Some(root.into()), tag: Some("t".into()) };
    match cmd_plan(&fixture("toy"), &opts(baseline), &out).unwrap() {
        PlanOutcome::Feasible { dir, output } => (dir, output),
        PlanOutcome::Infeasible { report, .. } => panic!("toy infeasible: {}", report.message),
    }
}

#[test]
fn plan_writes_all_artifacts_and_both_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, out) = plan_toy(tmp.path(), true);
    for f in ["solution.json", "report.json", "routes.svg", "matrices.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert_eq!(dir, tmp.path().join("toy").join("t"));
    let hom = out.report.hom.as_ref().expect("baseline row");
    assert_eq!(out.report.het.method, "het");
    assert_eq!(hom.method, "hom");
    assert_eq!(out.report.num_tasks, 5);
    let sol = SolutionFile::read(&dir.join("solution.json")).unwrap();
    let mut seen: Vec<usize> = sol.routes.iter().flat_map(|r| r.tasks.iter().copied()).collect();
    seen.sort_unstable();
    assert_eq!(seen, vec![0, 1, 2, 3, 4]);
    let summary = cmd_validate(&fixture("toy"), Some(&dir.join("solution.json"))).unwrap();
    assert_eq!(summary.tasks, 5);
}

#[test]
fn ground_robot_keeps_off_the_cables() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, out) = plan_toy(tmp.path(), false);
    let loaded: LoadedScenario = load_scenario(&fixture("toy")).unwrap();
    let g = &loaded.grid;
    let cables = g.classes().label_by_name("cables").unwrap();
    let ground = out.solution.routes.iter().find(|r| r.robot == "ground0").unwrap();
    let step = g.resolution() / 4.0;
    for w in ground.polyline.windows(2) {
        let n = (w[0].dist(&w[1]) / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let p = choral_core::Point::new(w[0].x + t * (w[1].x - w[0].x), w[0].y + t * (w[1].y - w[0].y));
            let (x, y) = g.cell_of(&p).unwrap();
            assert_ne!(g.label(x, y), cables, "ground route crosses cables at {p:?}");
            assert_ne!(g.label(x, y), Label::Obstacle);
        }
    }
}

#[test]
fn render_reproduces_the_plan_drawing() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, _) = plan_toy(tmp.path(), false);
    let again = tmp.path().join("again.svg");
    cmd_render(&dir.join("solution.json"), &fixture("toy"), &again).unwrap();
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(dir.join("routes.svg")).unwrap());
}

#[test]
fn render_rejects_a_solution_for_another_map() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, _) = plan_toy(tmp.path(), false);
    let err = cmd_render(&dir.join("solution.json"), &fixture("infeasible"), &tmp.path().join("x.svg")).unwrap_err();
    assert!(err.to_string().contains("different map"), "{err}");
    assert!(cmd_validate(&fixture("infeasible"), Some(&dir.join("solution.json"))).is_err());
}

#[test]
fn toy_drawing_matches_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, _) = plan_toy(tmp.path(), false);
    let svg = std::fs::read_to_string(dir.join("routes.svg")).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy/routes.golden.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    let want = std::fs::read_to_string(&golden).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(svg, want);
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_choral");
    let run = |scenario: &Path| {
        Command::new(bin)
            .args(["plan", "--budget-iters", "20000", "--tag", "x", "--out"])
            .arg(tmp.path())
            .arg(scenario)
            .output()
            .unwrap()
    };
    let ok = run(&fixture("toy"));
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = run(&fixture("infeasible"));
    assert_eq!(bad.status.code(), Some(EXIT_INFEASIBLE));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("infeasible"));
    let missing = run(&tmp.path().join("nope.json"));
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn generated_scenario_plans() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = MapSpec { width: 14.0, height: 10.0, tasks: 8, ..MapSpec::standard(Template::Park, 3) };
    let scn = cmd_gen_map(&spec, "ga", &tmp.path().join("park")).unwrap();
    for f in ["map.txt", "legend.json", "map.svg", "scenario.json"] {
        assert!(tmp.path().join("park").join(f).is_file(), "{f}");
    }
    let out = OutputSpec { root: Some(tmp.path().join("out")), tag: Some("p".into()) };
    let run = RunOptions { budget_iters: Some(20_000), ..Default::default() };
    let PlanOutcome::Feasible { output, .. } = cmd_plan(&scn, &run, &out).unwrap() else { panic!("infeasible") };
    assert_eq!(output.report.num_tasks, 8);
}
