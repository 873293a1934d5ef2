//! On-disk cache of frequency sweeps keyed by a content hash.

use std::fs;
use std::path::{Path, PathBuf};

use borscat::bor::SOLVER_VERSION;
use borscat::geometry::TimeOrigin;
use borscat::FsrTable;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::io::atomic_write;
use crate::spec::{Body, RunSpec};

#[derive(Serialize)]
struct KeyInput<'a> {
    body: &'a Body,
    time_origin: TimeOrigin,
    permittivity: f64,
    kappa_grid: Vec<f64>,
    points_per_wavelength: f64,
    solver_version: &'a str,
}

/// Hex SHA-256 over the canonical JSON of everything a sweep depends on.
pub fn cache_key(spec: &RunSpec, eps: f64) -> String {
    cache_key_with_version(spec, eps, SOLVER_VERSION)
}

pub fn cache_key_with_version(spec: &RunSpec, eps: f64, version: &str) -> String {
    let input = KeyInput {
        body: &spec.body,
        time_origin: spec.time_origin,
        permittivity: eps,
        kappa_grid: spec.kappa_grid.values(),
        points_per_wavelength: spec.points_per_wavelength,
        solver_version: version,
    };
    let json = serde_json::to_vec(&input).expect("key input serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub enum Lookup {
    Hit(FsrTable),
    Miss,
    /// The entry exists but cannot be used; the message says why.
    Corrupt(String),
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.csv"))
    }

    pub fn load(&self, key: &str, kappas: &[f64]) -> Lookup {
        let path = self.path(key);
        let Ok(text) = fs::read_to_string(&path) else {
            return Lookup::Miss;
        };
        match FsrTable::read_csv(text.as_bytes()) {
            Ok(t) if t.kappas() == kappas && t.meta.solver_version == SOLVER_VERSION => {
                Lookup::Hit(t)
            }
            Ok(_) => Lookup::Corrupt(format!(
                "{}: grid or solver version mismatch",
                path.display()
            )),
            Err(e) => Lookup::Corrupt(format!("{}: {e}", path.display())),
        }
    }

    pub fn store(&self, key: &str, table: &FsrTable) -> CliResult<()> {
        atomic_write(&self.path(key), table.to_csv_string().as_bytes())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_changes_with_every_input() {
        let base = RunSpec::reference_cone();
        let k0 = cache_key(&base, 2.0);
        assert_eq!(k0, cache_key(&base.clone(), 2.0));
        assert_ne!(k0, cache_key(&base, 4.0));
        assert_ne!(k0, cache_key_with_version(&base, 2.0, "other"));
        let mut s = base.clone();
        s.points_per_wavelength = 16.0;
        assert_ne!(k0, cache_key(&s, 2.0));
        let mut s = base.clone();
        s.kappa_grid.count = 65;
        assert_ne!(k0, cache_key(&s, 2.0));
        let mut s = base.clone();
        if let Body::Cone { rounding, .. } = &mut s.body {
            *rounding = 0.3;
        }
        assert_ne!(k0, cache_key(&s, 2.0));
        let mut s = base.clone();
        s.time_origin = TimeOrigin::ConductorTip;
        assert_ne!(k0, cache_key(&s, 2.0));
        // outputs that do not affect the sweep leave the key alone
        let mut s = base;
        s.threshold_fraction = 0.1;
        s.pulse.c_tau_over_a = 2.0;
        assert_eq!(k0, cache_key(&s, 2.0));
    }
}
