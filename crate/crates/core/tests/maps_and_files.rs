use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use choral_core::gridmap::{compute_edf, Label};
use choral_core::scenario::{
    generate_map, map_fingerprint, parse_ascii_map, resolve_scenario, write_ascii_map, MapSource, Preset, RobotEntry,
    SolverSettings, Template, SCHEMA_VERSION,
};
use choral_core::taskextract::dbscan;
use choral_core::{MapSpec, RrtParams, Scenario, SemanticGrid};
use proptest::prelude::*;

fn small(template: Template, seed: u64) -> MapSpec {
    match template {
        Template::Cave => MapSpec { width: 60.0, height: 40.0, resolution: 0.25, tasks: 12, ..MapSpec::standard(template, seed) },
        _ => MapSpec { width: 14.0, height: 10.0, tasks: 12, ..MapSpec::standard(template, seed) },
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    for t in Template::ALL {
        let a = generate_map(&small(t, 3)).unwrap();
        let b = generate_map(&small(t, 3)).unwrap();
        let c = generate_map(&small(t, 4)).unwrap();
        assert_eq!(a.grid, b.grid, "{}", t.name());
        assert_eq!(a.tasks, b.tasks);
        assert_eq!(map_fingerprint(&a.grid), map_fingerprint(&b.grid));
        assert_ne!(map_fingerprint(&a.grid), map_fingerprint(&c.grid), "{}", t.name());
    }
}

#[test]
fn generated_maps_survive_the_text_format() {
    for t in Template::ALL {
        let m = generate_map(&small(t, 9)).unwrap();
        let (text, legend) = write_ascii_map(&m.grid).unwrap();
        let back: SemanticGrid = parse_ascii_map(&text, &legend, "mem").unwrap();
        assert_eq!(back.labels(), m.grid.labels());
        assert_eq!(back.resolution(), m.grid.resolution());
    }
}

#[test]
fn full_cave_generates_quickly() {
    let t0 = Instant::now();
    let m = generate_map(&MapSpec::standard(Template::Cave, 0)).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 2.0, "{dt:.2} s");
    assert_eq!((m.grid.nx(), m.grid.ny()), (560, 360));
}

#[test]
fn distance_field_spot_checks() {
    let m = generate_map(&small(Template::Forest, 1)).unwrap();
    let g = compute_edf(&m.grid);
    let res = g.resolution();
    let obstacles: Vec<(usize, usize)> = (0..g.ny())
        .flat_map(|y| (0..g.nx()).map(move |x| (x, y)))
        .filter(|&(x, y)| g.is_obstacle(x, y))
        .collect();
    assert!(!obstacles.is_empty());
    for y in (0..g.ny()).step_by(7) {
        for x in (0..g.nx()).step_by(5) {
            let d2 = obstacles
                .iter()
                .map(|&(ox, oy)| {
                    let (dx, dy) = (ox as i64 - x as i64, oy as i64 - y as i64);
                    (dx * dx + dy * dy) as f64
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(g.edf(x, y), res * d2.sqrt(), "cell ({x}, {y})");
        }
    }
    for &(x, y) in obstacles.iter().take(50) {
        assert_eq!(g.edf(x, y), 0.0);
    }
}

#[test]
fn task_depot_and_clearance_hold_on_every_template() {
    for t in Template::ALL {
        for seed in 0..3 {
            let spec = small(t, seed);
            let m = generate_map(&spec).unwrap();
            let g = compute_edf(&m.grid);
            assert_eq!(m.tasks.len(), spec.tasks, "{} seed {seed}", t.name());
            for p in m.tasks.iter().chain([&m.depot]) {
                let (x, y) = g.cell_of(p).unwrap();
                assert!(g.edf(x, y) >= spec.clearance - g.resolution(), "{} seed {seed} at {p:?}", t.name());
            }
        }
    }
}

fn partition(clusters: &[Vec<(usize, usize)>]) -> Vec<BTreeSet<(usize, usize)>> {
    clusters.iter().map(|c| c.iter().copied().collect()).collect()
}

#[test]
fn single_point_clusters_only_merge_as_radius_grows() {
    let m = generate_map(&small(Template::Park, 5)).unwrap();
    let cells: Vec<(usize, usize)> = (0..m.grid.ny())
        .flat_map(|y| (0..m.grid.nx()).map(move |x| (x, y)))
        .filter(|&(x, y)| matches!(m.grid.label(x, y), Label::Task(_)))
        .collect();
    let res = m.grid.resolution();
    let mut prev = partition(&dbscan(&m.grid, &cells, res, 1));
    for k in [1.5, 3.0, 8.0, 25.0, 80.0] {
        let next = partition(&dbscan(&m.grid, &cells, res * k, 1));
        assert!(next.len() <= prev.len());
        for c in &prev {
            assert!(next.iter().any(|n| c.is_subset(n)), "cluster split at eps {k}·res");
        }
        prev = next;
    }
    assert_eq!(prev.len(), 1);
}

fn robot() -> impl Strategy<Value = RobotEntry<f64>> {
    (
        "[a-z][a-z0-9]{0,6}",
        prop::option::of(prop_oneof![Just(Preset::Ground), Just(Preset::Aerial)]),
        prop::option::of(0.05f64..3.0),
        prop::collection::btree_map("[a-z]{1,5}", 0.0f64..9.0, 0..3),
        prop::option::of(0.1f64..900.0),
        prop::option::of(1.0f64..1e4),
    )
        .prop_map(|(id, preset, velocity, lambda_trav, alpha, capacity)| RobotEntry {
            id,
            preset,
            velocity,
            lambda_trav: lambda_trav.into_iter().collect::<BTreeMap<_, _>>(),
            alpha,
            capacity,
            ..Default::default()
        })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        "[a-z-]{1,12}",
        prop::sample::select(Template::ALL.to_vec()),
        any::<u64>(),
        prop::collection::vec(robot(), 1..4),
        prop::option::of(1u64..1_000_000),
        prop::option::of(0.0f64..500.0),
        prop::option::of((0.5f64..4.0, 100usize..50_000)),
        any::<bool>(),
    )
        .prop_map(|(name, t, seed, robots, iters, alpha, rrt, baseline)| Scenario {
            schema_version: SCHEMA_VERSION,
            name,
            map: MapSource::Generate { spec: MapSpec::standard(t, seed) },
            cluster: None,
            robots,
            depots: Vec::new(),
            solver: SolverSettings { budget_iters: iters, seed, ..Default::default() },
            alpha,
            rrt: rrt.map(|(step, max_iterations)| RrtParams { step: Some(step), max_iterations, ..Default::default() }),
            baseline,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_json_round_trips(s in scenario()) {
        let text = serde_json::to_string_pretty(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn generated_scenario_resolves_presets() {
    let s = Scenario {
        schema_version: SCHEMA_VERSION,
        name: "x".into(),
        map: MapSource::Generate { spec: small(Template::Orchard, 2) },
        cluster: None,
        robots: vec![RobotEntry::preset("g", Preset::Ground), RobotEntry::preset("a", Preset::Aerial)],
        depots: Vec::new(),
        solver: SolverSettings::default(),
        alpha: None,
        rrt: None,
        baseline: false,
    };
    let l = resolve_scenario(s, Path::new(".")).unwrap();
    assert_eq!(l.robots.len(), 2);
    assert_eq!(l.depots.len(), 1);
    assert!(l.robots[0].velocity < l.robots[1].velocity);
}
