//! Augmentation schedule and train-set materialization. Each arm gets a
//! `train.jsonl` and a `manifest.json` recording what it was drawn from.
//!
//! ```bash
//! cargo run --example schedule_and_materialize
//! ```

use std::collections::BTreeMap;

use hatesynth::corpus::{Dataset, Label, Method, Post};
use hatesynth::experiment::{materialize_all, verify_arm, arm_dir, ArmMethod, Pool, Pools, Schedule, ScheduleConfig};

fn pool(prefix: &str, n: usize, label: Label, method: Method) -> Pool {
    let posts = (0..n)
        .map(|i| {
            let mut p = Post::new(format!("{prefix}{i}"), format!("{prefix} post number {i}"), label, "hi");
            p.method = method;
            p
        })
        .collect();
    Pool::from_dataset(Dataset::new(posts))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScheduleConfig { id: "demo".into(), max_total_hateful: 40, step: 10, baseline_original: 10, non_hateful: 40, rng_seed: 3 };
    let schedule = Schedule::build(&config)?;
    for arm in &schedule.arms {
        println!(
            "arm {:<4} {:<8} orig={:<3} synth={:<3} non={:<3} hateful={:.2}",
            arm.id,
            arm.method.as_str(),
            arm.original_hateful,
            arm.synthetic_hateful,
            arm.non_hateful,
            arm.hateful_fraction()
        );
    }

    let mut synthetic = BTreeMap::new();
    synthetic.insert(ArmMethod::Mt, pool("mt", 40, Label::Hateful, Method::Mt));
    synthetic.insert(ArmMethod::Ces, pool("ces", 40, Label::Hateful, Method::Ces));
    synthetic.insert(ArmMethod::Lm, pool("lm", 40, Label::Hateful, Method::Lm));
    let pools = Pools {
        non_hateful: pool("nh", 60, Label::NonHateful, Method::Original),
        original_hateful: pool("oh", 60, Label::Hateful, Method::Original),
        synthetic,
    };

    let root = tempfile::tempdir()?;
    let manifests = materialize_all(&schedule, &pools, root.path(), "1970-01-01T00:00:00Z")?;
    println!("materialized {} arms under {}", manifests.len(), root.path().display());

    let dir = arm_dir(root.path(), &schedule.id, "2b");
    let manifest = verify_arm(&dir)?;
    println!("arm 2b manifest verified: {} posts, sha256 {}", manifest.output.posts, &manifest.output.sha256[..12]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
