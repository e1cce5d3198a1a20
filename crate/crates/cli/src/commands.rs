//! The single-image subcommands: `pd`, `stabilize`, and `match`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use vinepd::field::{build_pyramid, load_image, FiltrationKind, RasterImage};
use vinepd::io::{read_diagram_csv, write_diagram_csv, write_stable_csv, write_vines_json};
use vinepd::matching::match_diagrams;
use vinepd::persistence::{compute_pd, Degree, PersistenceDiagram};
use vinepd::vineyard::stabilize_with_vines;

use crate::{CliError, PipelineConfig};

/// In-memory output file: path relative to the output root plus content.
pub(crate) type Artifact = (PathBuf, Vec<u8>);

pub fn cmd_pd(input: &Path, output: &Path, config: &PipelineConfig) -> Result<(), CliError> {
    let image = load_input_image(input)?;
    let stem = file_stem(input);
    let artifacts = diagram_artifacts(&image, &stem, config)?;
    write_artifacts(output, &artifacts)
}

pub fn cmd_stabilize(
    input: &Path,
    output: &Path,
    config: &PipelineConfig,
    dump_vines: bool,
) -> Result<(), CliError> {
    config.require_stack()?;
    let (stem, groups) = if input.is_dir() {
        (file_stem(input), read_diagram_dir(input, config)?)
    } else {
        let image = load_input_image(input)?;
        (file_stem(input), compute_diagram_groups(&image, config))
    };
    if groups.is_empty() {
        return Err(CliError::IncompletePyramid(format!(
            "{}: no diagrams for the requested filtrations",
            input.display()
        )));
    }
    let mut artifacts = Vec::new();
    for (filtration, diagrams) in &groups {
        let (stable, vines) =
            stabilize_with_vines(diagrams, config.metric, config.tau_m, config.tau_s)
                .map_err(|e| CliError::IncompletePyramid(e.to_string()))?;
        artifacts.push((
            PathBuf::from(format!("{stem}.{filtration}.stable.csv")),
            write_stable_csv(&stable).into_bytes(),
        ));
        if dump_vines {
            artifacts.push((
                PathBuf::from(format!("{stem}.{filtration}.vines.json")),
                write_vines_json(&vines).into_bytes(),
            ));
        }
    }
    write_artifacts(output, &artifacts)
}

pub fn cmd_match(
    diagram_a: &Path,
    diagram_b: &Path,
    config: &PipelineConfig,
) -> Result<(), CliError> {
    let a = read_diagram_file(diagram_a)?;
    let b = read_diagram_file(diagram_b)?;
    println!(
        "matching {} against {} (metric {}, tau_m {})",
        diagram_a.display(),
        diagram_b.display(),
        config.metric,
        config.tau_m
    );
    for degree in Degree::ALL {
        let result = match_diagrams(&a, &b, degree, config.metric, config.tau_m);
        println!(
            "degree {degree}: {} matched, {} unmatched left, {} unmatched right",
            result.pairs.len(),
            result.unmatched_a.len(),
            result.unmatched_b.len()
        );
        for (i, j, distance) in &result.pairs {
            println!("  {i} -> {j}  distance {}", vinepd::io::fmt_sig9(*distance));
        }
        for i in &result.unmatched_a {
            println!("  {i} -> unmatched");
        }
        for j in &result.unmatched_b {
            println!("  unmatched -> {j}");
        }
    }
    Ok(())
}

/// Per-scale diagram CSVs for every enabled filtration of one image.
pub(crate) fn diagram_artifacts(
    image: &RasterImage,
    stem: &str,
    config: &PipelineConfig,
) -> Result<Vec<Artifact>, CliError> {
    let mut artifacts = Vec::new();
    for (filtration, diagrams) in compute_diagram_groups(image, config) {
        for pd in &diagrams {
            artifacts.push((
                PathBuf::from(format!("{stem}.{filtration}.s{}.pd.csv", pd.scale_index)),
                write_diagram_csv(pd).into_bytes(),
            ));
        }
    }
    Ok(artifacts)
}

/// Diagrams per filtration, scales 1..levels, with the zero-persistence
/// filter already applied when configured.
pub(crate) fn compute_diagram_groups(
    image: &RasterImage,
    config: &PipelineConfig,
) -> BTreeMap<FiltrationKind, Vec<PersistenceDiagram>> {
    let mut groups = BTreeMap::new();
    for &filtration in &config.filtrations {
        let field = match filtration {
            FiltrationKind::Intensity => vinepd::field::intensity_field(image),
            FiltrationKind::Gradient => vinepd::field::gradient_field(image),
        };
        let pyramid = build_pyramid(&field, config.levels, filtration);
        let diagrams: Vec<PersistenceDiagram> = pyramid
            .levels()
            .iter()
            .enumerate()
            .map(|(i, level)| {
                let pd = compute_pd(level, i as u32 + 1, filtration);
                if config.drop_zero_pers {
                    pd.without_zero_persistence()
                } else {
                    pd
                }
            })
            .collect();
        groups.insert(filtration, diagrams);
    }
    groups
}

/// Reads all `*.pd.csv` files of a directory and groups them by filtration,
/// verifying that each group forms a complete pyramid (scales 1..n, n >= 2).
fn read_diagram_dir(
    dir: &Path,
    config: &PipelineConfig,
) -> Result<BTreeMap<FiltrationKind, Vec<PersistenceDiagram>>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::MissingInput(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".pd.csv")))
        .collect();
    paths.sort();

    let mut by_key: BTreeMap<(FiltrationKind, u32), PersistenceDiagram> = BTreeMap::new();
    for path in &paths {
        let pd = read_diagram_file(path)?;
        if !config.filtrations.contains(&pd.filtration) {
            continue;
        }
        let key = (pd.filtration, pd.scale_index);
        if by_key.insert(key, pd).is_some() {
            return Err(CliError::IncompletePyramid(format!(
                "duplicate diagram for filtration {} scale {} in {}",
                key.0,
                key.1,
                dir.display()
            )));
        }
    }

    let mut groups: BTreeMap<FiltrationKind, Vec<PersistenceDiagram>> = BTreeMap::new();
    for ((filtration, _), pd) in by_key {
        groups.entry(filtration).or_default().push(pd);
    }
    for (filtration, diagrams) in &groups {
        let scales: Vec<u32> = diagrams.iter().map(|d| d.scale_index).collect();
        let expected: Vec<u32> = (1..=diagrams.len() as u32).collect();
        if scales != expected || diagrams.len() < 2 {
            return Err(CliError::IncompletePyramid(format!(
                "incomplete pyramid for filtration {filtration}: found scales {scales:?}"
            )));
        }
    }
    Ok(groups)
}

pub(crate) fn load_input_image(path: &Path) -> Result<RasterImage, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(format!(
            "input {} does not exist",
            path.display()
        )));
    }
    load_image(path).map_err(|e| CliError::Parse(e.to_string()))
}

fn read_diagram_file(path: &Path) -> Result<PersistenceDiagram, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(format!(
            "diagram {} does not exist",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {e}", path.display())))?;
    read_diagram_csv(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string())
}

pub(crate) fn write_artifacts(root: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(root)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", root.display())))?;
    for (rel, bytes) in artifacts {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Other(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
