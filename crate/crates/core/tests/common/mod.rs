#![allow(dead_code)]

use std::path::{Path, PathBuf};

use planforge::ingest::{self, DatasetManifest};
use planforge::synth::{self, FloorSpec, GroundTruth};
use planforge::SceneScale;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn bundled_spec() -> FloorSpec {
    planforge::plan_io::read_json(&data_dir().join("two_rooms.json")).expect("bundled spec parses")
}

/// Renders `spec` into `dir` and parses the manifest back from disk.
pub fn synth_into(spec: &FloorSpec, dir: &Path) -> (DatasetManifest, GroundTruth) {
    let (_, gt) =
        synth::generate(spec, &synth::default_intrinsics(), SceneScale::new(synth::DEFAULT_SCALE).unwrap(), dir)
            .expect("synth succeeds");
    (ingest::parse_manifest(&dir.join("manifest.json")).expect("manifest parses"), gt)
}

pub fn noisy(mut spec: FloorSpec, seed: u64) -> FloorSpec {
    spec.noise.depth_sigma = 0.02;
    spec.noise.yaw_sigma = 1f64.to_radians();
    spec.noise.translation_sigma = 0.02;
    spec.seed = seed;
    spec
}
