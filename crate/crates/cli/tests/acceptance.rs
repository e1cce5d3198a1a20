//! Acceptance suite, CLI half: output determinism across worker counts and
//! repeated runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

use vinepd::synth;

fn hash_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Criterion 7: `pipeline` over the fixture corpus with --jobs 1 and
/// --jobs 8 yields byte-identical output trees on two consecutive runs.
#[test]
fn criterion_7_pipeline_determinism() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();

    let blob = synth::field_to_gray_image(&synth::blob_spike_field());
    image::GrayImage::from_raw(64, 64, blob.samples().to_vec())
        .unwrap()
        .save(corpus.join("blob.png"))
        .unwrap();
    for (name, seed) in [("noise_a.png", 0x51u64), ("noise_b.png", 0x52u64)] {
        let field = synth::lattice_field(33, 21, 31, seed);
        let raster = synth::field_to_gray_image(&field);
        image::GrayImage::from_raw(33, 21, raster.samples().to_vec())
            .unwrap()
            .save(corpus.join(name))
            .unwrap();
    }

    let mut trees = Vec::new();
    for (label, jobs) in [("j1-a", "1"), ("j1-b", "1"), ("j8-a", "8"), ("j8-b", "8")] {
        let out = tmp.path().join(label);
        let status = Command::new(env!("CARGO_BIN_EXE_vinepd"))
            .args([
                "pipeline",
                corpus.to_str().unwrap(),
                "--output",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ])
            .status()
            .expect("binary runs");
        assert_eq!(status.code(), Some(0), "pipeline run {label} failed");
        trees.push((label, hash_tree(&out)));
    }
    let (_, reference) = &trees[0];
    // Per image: 3 scales x 2 filtrations of diagrams, 2 stable CSVs, and
    // one manifest.
    assert_eq!(reference.len(), 3 * 9, "three images, nine files each");
    for (label, tree) in &trees[1..] {
        assert_eq!(tree, reference, "output tree for {label} diverges");
    }
    println!(
        "criterion 7 PASS: 4 pipeline runs (jobs 1 and 8, twice each) byte-identical across {} files",
        reference.len()
    );
}
