//! Series manifest directories: the MPS files of a generated series plus a
//! JSON sidecar that makes the series reproducible byte for byte.

use crate::AppError;
use ibranch::instance::{
    generate_series, parse_mps, write_mps, MipInstance, SeriesMode, SeriesSpec,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SIDECAR_NAME: &str = "series.json";
pub const BASE_NAME: &str = "base.mps";

/// Sidecar contents; together with `base.mps` this regenerates the series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub base: String,
    pub mode: String,
    pub count: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub files: Vec<String>,
}

fn read_to_string(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path)
        .map_err(|e| AppError::usage(format!("cannot read `{}`: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<MipInstance, AppError> {
    let text = read_to_string(path)?;
    let mut inst =
        parse_mps(&text).map_err(|e| AppError::usage(format!("`{}`: {e}", path.display())))?;
    if inst.name.is_empty() {
        inst.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "instance".into());
    }
    Ok(inst)
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    std::fs::write(path, contents)
        .map_err(|e| AppError::runtime(format!("cannot write `{}`: {e}", path.display())))
}

/// Generates a series from `base` and writes `base.mps`, one MPS file per
/// instance and the sidecar into `dir`.
pub fn write_series(
    dir: &Path,
    base: MipInstance,
    mode: SeriesMode,
    count: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Sidecar, AppError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::runtime(format!("cannot create `{}`: {e}", dir.display())))?;
    let spec = SeriesSpec {
        base,
        mode,
        count,
        epsilon,
        seed,
    };
    let series = generate_series(&spec).map_err(|e| AppError::usage(e.to_string()))?;
    write_file(&dir.join(BASE_NAME), &write_mps(&spec.base))?;
    let mut files = Vec::with_capacity(series.len());
    for inst in &series {
        let file = format!("{}.mps", inst.name);
        write_file(&dir.join(&file), &write_mps(inst))?;
        files.push(file);
    }
    let sidecar = Sidecar {
        name: spec.base.name.clone(),
        base: BASE_NAME.into(),
        mode: mode.as_str().into(),
        count,
        epsilon,
        seed,
        files,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_file(&dir.join(SIDECAR_NAME), &(json + "\n"))?;
    Ok(sidecar)
}

/// Loads a series in order: a manifest directory (sidecar order, or sorted
/// `*.mps` files when no sidecar is present) or an explicit file list.
pub fn load_series(paths: &[PathBuf]) -> Result<(String, Vec<MipInstance>), AppError> {
    if paths.len() == 1 && paths[0].is_dir() {
        let dir = &paths[0];
        let sidecar_path = dir.join(SIDECAR_NAME);
        if sidecar_path.is_file() {
            let sidecar: Sidecar =
                serde_json::from_str(&read_to_string(&sidecar_path)?).map_err(|e| {
                    AppError::usage(format!(
                        "`{}`: invalid sidecar: {e}",
                        sidecar_path.display()
                    ))
                })?;
            let mut instances = Vec::with_capacity(sidecar.files.len());
            for file in &sidecar.files {
                instances.push(load_instance(&dir.join(file))?);
            }
            if instances.is_empty() {
                return Err(AppError::usage(format!(
                    "manifest `{}` lists no instances",
                    sidecar_path.display()
                )));
            }
            return Ok((sidecar.name, instances));
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| AppError::usage(format!("cannot read `{}`: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "mps"))
            .collect();
        // Length-first ordering keeps numeric suffixes in sequence
        // (name_2 before name_10).
        files.sort_by(|a, b| {
            let ka = (a.as_os_str().len(), a.clone());
            let kb = (b.as_os_str().len(), b.clone());
            ka.cmp(&kb)
        });
        if files.is_empty() {
            return Err(AppError::usage(format!(
                "no .mps files in `{}`",
                dir.display()
            )));
        }
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into());
        let instances = files
            .iter()
            .map(|p| load_instance(p))
            .collect::<Result<_, _>>()?;
        return Ok((name, instances));
    }
    let instances: Vec<MipInstance> = paths
        .iter()
        .map(|p| load_instance(p))
        .collect::<Result<_, _>>()?;
    Ok(("series".into(), instances))
}
