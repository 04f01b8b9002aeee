mod common;

use std::collections::BTreeSet;

use common::{build, small_parts, small_trainer};
use dollynav::curriculum::TaskType;
use dollynav::orchestrator::{Trainer, Variant};

fn run(t: &mut Trainer) -> Vec<dollynav::orchestrator::EpisodeRecord> {
    let mut records = Vec::new();
    t.run(|r| records.push(r.clone())).unwrap();
    records
}

#[test]
fn synchronous_runs_are_bit_reproducible() {
    let mut a = small_trainer(9, 1, true, 12);
    let mut b = small_trainer(9, 1, true, 12);
    let ra = run(&mut a);
    let rb = run(&mut b);
    assert_eq!(ra, rb);
    assert!(a.master.sac.updates > 0);
    assert_eq!(a.to_bytes(), b.to_bytes());
    let mut c = small_trainer(10, 1, true, 12);
    run(&mut c);
    assert_ne!(a.to_bytes(), c.to_bytes());
}

#[test]
fn restore_then_updates_equals_uninterrupted() {
    let mut a = small_trainer(3, 1, true, 8);
    run(&mut a);
    let bytes = a.to_bytes();
    let mut b = Trainer::from_bytes(
        &bytes,
        a.env.clone(),
        a.sac.clone(),
        a.per,
        a.nav.clone(),
        a.training.clone(),
    )
    .unwrap();
    for _ in 0..10 {
        let x = a.master.update_once().unwrap();
        let y = b.master.update_once().unwrap();
        assert_eq!(x.critic_loss.to_bits(), y.critic_loss.to_bits());
    }
    assert_eq!(a.to_bytes(), b.to_bytes());
    // and training continues identically
    a.training.episodes = 12;
    b.training.episodes = 12;
    assert_eq!(run(&mut a), run(&mut b));
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn checkpoint_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ckpt");
    let mut a = small_trainer(4, 2, false, 6);
    run(&mut a);
    a.save(&path).unwrap();
    let b = Trainer::restore(
        &path,
        a.env.clone(),
        a.sac.clone(),
        a.per,
        a.nav.clone(),
        a.training.clone(),
    )
    .unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let mut raw = std::fs::read(&path).unwrap();
    let mid = raw.len() / 2;
    raw[mid] ^= 1;
    assert!(Trainer::from_bytes(
        &raw,
        a.env.clone(),
        a.sac.clone(),
        a.per,
        a.nav.clone(),
        a.training.clone()
    )
    .is_err());
}

fn conservation(workers: usize) {
    let mut t = small_trainer(5, workers, false, 30);
    let records = run(&mut t);
    let s = t.master.transitions;
    assert_eq!(records.len() as u64, t.master.episodes);
    assert_eq!(t.master.episodes, 30);
    let steps: u64 = records.iter().map(|r| r.steps as u64).sum();
    assert_eq!(steps, s);
    assert_eq!(t.master.replay.len() as u64, s);
    let ids: BTreeSet<u32> = t
        .master
        .replay
        .items()
        .iter()
        .map(|x| x.worker_id)
        .collect();
    assert_eq!(ids, (0..workers as u32).collect());
    let numbers: Vec<u64> = records.iter().map(|r| r.episode).collect();
    assert_eq!(numbers, (1..=t.master.episodes).collect::<Vec<_>>());
}

#[test]
fn four_workers_conserve_transitions() {
    conservation(4);
}

#[test]
fn eight_workers_conserve_transitions() {
    conservation(8);
}

#[test]
fn sent_equals_ingested() {
    let mut t = small_trainer(6, 4, false, 20);
    let summary = t.run(|_| {}).unwrap();
    assert_eq!(summary.transitions_sent, summary.transitions);
}

#[test]
fn random_starts_bypass_the_curriculum() {
    let mut parts = small_parts(7, 1, true, 20);
    parts.4.variant = Variant::RandomStarts;
    let mut t = build(parts);
    let records = run(&mut t);
    assert!(records.iter().all(|r| r.task_type == TaskType::Random));
    let mut q = small_trainer(7, 1, true, 40);
    let types: std::collections::HashSet<_> = run(&mut q).iter().map(|r| r.task_type).collect();
    assert!(types.len() > 1, "{types:?}");
}

#[test]
fn time_limit_stops_early() {
    let mut t = small_trainer(8, 2, false, 1_000_000);
    t.training.time_limit = Some(0.5);
    let s = t.run(|_| {}).unwrap();
    assert!(s.stopped_by_time);
    assert_eq!(s.transitions_sent, s.transitions);
}
