use vsr_core::controller::{ControllerFamily, ControllerSpec};
use vsr_core::episode::{EpisodeOptions, TaskConfig};
use vsr_core::experiments::Evaluator;
use vsr_core::morphology::parse_shape;
use vsr_core::physics::{PhysicsParams, SimState};
use vsr_core::sensing::SensorConfig;
use vsr_core::terrain::generate_terrain;

const BIPED: &str = "1111-1111-1001";

fn evaluator(family: ControllerFamily, t_final: f64) -> Evaluator {
    Evaluator::new(
        parse_shape(BIPED).unwrap(),
        ControllerSpec::with_family(family),
        PhysicsParams::default(),
        SensorConfig::default(),
        TaskConfig {
            t_final,
            ..TaskConfig::default()
        },
    )
    .unwrap()
}

#[test]
fn zero_genotype_does_not_move() {
    for family in [
        ControllerFamily::Attention,
        ControllerFamily::SlowAttention,
        ControllerFamily::Mlp,
        ControllerFamily::MlpComm,
    ] {
        let ev = evaluator(family, 30.0);
        let zero = vec![0.0; ev.genotype_len()];
        for seed in [0, 1, 2] {
            let v = ev.locomotion_fitness(&zero, seed).unwrap();
            assert!(v.abs() < 0.05, "{family} seed {seed}: {v}");
        }
    }
}

#[test]
fn episodes_are_deterministic() {
    let ev = evaluator(ControllerFamily::Attention, 5.0);
    let g: Vec<f64> = (0..ev.genotype_len())
        .map(|k| (k as f64 * 1.3).sin())
        .collect();
    let opts = EpisodeOptions {
        record_trajectory: true,
        record_attention: true,
        capture_snapshots: true,
        ..Default::default()
    };
    let a = ev.episode(&g, 17, &opts).unwrap();
    let b = ev.episode(&g, 17, &opts).unwrap();
    assert_eq!(a.velocity_x.to_bits(), b.velocity_x.to_bits());
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.frames, b.frames);
    assert_eq!(a.snapshots, b.snapshots);
    // one trajectory row per control step plus the initial state
    assert_eq!(a.trajectory.len(), 301);
    assert_eq!(a.snapshots.len(), 5);
    // one frame per voxel per actuation tick
    assert_eq!(a.frames.len(), 10 * 15);
    let c = ev.episode(&g, 18, &opts).unwrap();
    assert_ne!(a.trajectory, c.trajectory);
}

#[test]
fn fitness_is_mean_forward_velocity() {
    let ev = evaluator(ControllerFamily::Mlp, 4.0);
    let g: Vec<f64> = (0..ev.genotype_len())
        .map(|k| (k as f64 * 0.7).cos())
        .collect();
    let r = ev
        .episode(
            &g,
            3,
            &EpisodeOptions {
                record_trajectory: true,
                ..Default::default()
            },
        )
        .unwrap();
    let first = r.trajectory.first().unwrap();
    let last = r.trajectory.last().unwrap();
    assert_eq!(first.time, 0.0);
    assert!((last.time - 4.0).abs() < 1e-12);
    assert_eq!(r.velocity_x, (last.com[0] - first.com[0]) / 4.0);
}

#[test]
fn spawn_sits_just_above_the_highest_ground_under_the_body() {
    let ev = evaluator(ControllerFamily::Mlp, 1.0);
    let terrain = generate_terrain(5, &ev.setup.task.terrain()).unwrap();
    let s = SimState::spawn(&ev.setup.morphology, &terrain, &ev.setup.physics, 1.0, 0.01);
    let xs: Vec<f64> = s.mass_positions.iter().map(|p| p[0]).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((lo - 1.0).abs() < 1e-12);
    assert!((hi - 5.0).abs() < 1e-12);
    let lowest = s
        .mass_positions
        .iter()
        .map(|p| p[1])
        .fold(f64::INFINITY, f64::min);
    // the start plateau is flat at height 0
    assert!((lowest - 0.01).abs() < 1e-12);
}

#[test]
fn divergence_scores_zero() {
    let physics = PhysicsParams {
        spring_stiffness: 1e9,
        spring_damping: 0.0,
        ..PhysicsParams::default()
    };
    let ev = Evaluator::new(
        parse_shape(BIPED).unwrap(),
        ControllerSpec::with_family(ControllerFamily::Mlp),
        physics,
        SensorConfig::default(),
        TaskConfig {
            t_final: 2.0,
            ..TaskConfig::default()
        },
    )
    .unwrap();
    let g = vec![1.0; ev.genotype_len()];
    let r = ev.episode(&g, 1, &EpisodeOptions::default()).unwrap();
    assert!(r.diverged_at.is_some());
    assert_eq!(r.velocity_x, 0.0);
    assert_eq!(ev.locomotion_fitness(&g, 1).unwrap(), 0.0);
}
