//! Batch processing of an image directory with a fixed worker pool.
//!
//! Each image is independent: workers pull the next input off a shared
//! counter, compute every artifact in memory, write them under the image's
//! own output directory, and record a manifest with content digests. Output
//! bytes match a serial run for any worker count.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use vinepd::io::write_stable_csv;
use vinepd::vineyard::stabilize_diagrams;

use crate::commands::{
    compute_diagram_groups, diagram_artifacts, file_stem, load_input_image, write_artifacts,
    Artifact,
};
use crate::config::ConfigEcho;
use crate::{CliError, PipelineConfig};

#[derive(Serialize)]
struct Manifest {
    input: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    config: ConfigEcho,
    outputs: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

pub fn cmd_pipeline(input: &Path, output: &Path, config: &PipelineConfig) -> Result<(), CliError> {
    config.require_stack()?;
    if !input.is_dir() {
        return Err(CliError::MissingInput(format!(
            "input directory {} does not exist",
            input.display()
        )));
    }
    let images = scan_images(input)?;
    if images.is_empty() {
        return Err(CliError::MissingInput(format!(
            "no supported images (.png, .pgm) in {}",
            input.display()
        )));
    }
    std::fs::create_dir_all(output)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", output.display())))?;

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<(usize, String)>> = Mutex::new(Vec::new());
    let workers = config.jobs.min(images.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                let Some(image_path) = images.get(index) else {
                    break;
                };
                if let Err(message) = process_image(image_path, output, config) {
                    failures.lock().unwrap().push((index, message));
                }
            });
        }
    });

    let mut failures = failures.into_inner().unwrap();
    failures.sort_by_key(|&(index, _)| index);
    if failures.is_empty() {
        Ok(())
    } else {
        for (index, message) in &failures {
            eprintln!("vinepd: {}: {message}", images[*index].display());
        }
        Err(CliError::Partial(format!(
            "{} of {} images failed",
            failures.len(),
            images.len()
        )))
    }
}

/// Processes one image; any returned message is also recorded in the
/// image's manifest so downstream consumers see the failure.
fn process_image(image_path: &Path, output: &Path, config: &PipelineConfig) -> Result<(), String> {
    let name = image_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string());
    let image_dir = output.join(&name);

    let artifacts = build_artifacts(image_path, config);
    let (status, error, artifacts) = match artifacts {
        Ok(list) => ("ok", None, list),
        Err(err) => ("failed", Some(err.message().to_string()), Vec::new()),
    };

    let mut entries: Vec<ManifestEntry> = artifacts
        .iter()
        .map(|(rel, bytes)| ManifestEntry {
            path: format!("{name}/{}", rel.display()),
            sha256: hex_digest(bytes),
        })
        .collect();
    entries.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        input: name.clone(),
        status,
        error: error.clone(),
        config: config.echo(),
        outputs: entries,
    };
    let manifest_bytes = {
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        text.into_bytes()
    };

    let mut files = artifacts;
    files.push((PathBuf::from("manifest.json"), manifest_bytes));
    write_artifacts(&image_dir, &files).map_err(|e| e.message().to_string())?;

    match error {
        None => Ok(()),
        Some(message) => Err(message),
    }
}

fn build_artifacts(image_path: &Path, config: &PipelineConfig) -> Result<Vec<Artifact>, CliError> {
    let image = load_input_image(image_path)?;
    let stem = file_stem(image_path);
    let mut artifacts = diagram_artifacts(&image, &stem, config)?;
    for (filtration, diagrams) in compute_diagram_groups(&image, config) {
        let stable = stabilize_diagrams(&diagrams, config.metric, config.tau_m, config.tau_s)
            .map_err(|e| CliError::IncompletePyramid(e.to_string()))?;
        artifacts.push((
            PathBuf::from(format!("{stem}.{filtration}.stable.csv")),
            write_stable_csv(&stable).into_bytes(),
        ));
    }
    Ok(artifacts)
}

fn scan_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut images: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::MissingInput(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|ext| {
                        let ext = ext.to_string_lossy().to_ascii_lowercase();
                        ext == "png" || ext == "pgm"
                    })
                    .unwrap_or(false)
        })
        .collect();
    images.sort();
    Ok(images)
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
