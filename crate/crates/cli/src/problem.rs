//! JSON input: ground structure, material, load and bounds.

use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use trusspp_core::fem::{build_grid_ground_structure, Connectivity, GroundStructure, MassConvention, Supports, TrussModel};
use trusspp_core::loads::HarmonicLoad;
use trusspp_core::presets::{self, Preset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureSpec {
    Grid { nx: usize, ny: usize, spacing: f64, connectivity: Connectivity, supports: Supports },
    Explicit(GroundStructure),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(rename = "E")]
    pub e: f64,
    pub rho: f64,
    #[serde(default)]
    pub mass_convention: MassConvention,
}

/// One Fourier coefficient c_k(f) on a global DOF (2·node + axis).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadEntry {
    pub k: usize,
    pub dof: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub omega0: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<LoadEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    pub structure: StructureSpec,
    pub material: Material,
    pub load: LoadSpec,
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

/// A fully built problem instance.
#[derive(Clone, Debug)]
pub struct Case {
    pub name: String,
    pub model: TrussModel,
    pub load: HarmonicLoad,
    pub mass: f64,
    pub eta: f64,
}

impl From<Preset> for Case {
    fn from(p: Preset) -> Self {
        Case { name: p.name, model: p.model, load: p.load, mass: p.mass, eta: p.eta }
    }
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn build(&self) -> Result<Case> {
        let gs = match &self.structure {
            StructureSpec::Grid { nx, ny, spacing, connectivity, supports } => {
                build_grid_ground_structure(*nx, *ny, *spacing, *connectivity, supports)?
            }
            StructureSpec::Explicit(gs) => {
                gs.validate()?;
                gs.clone()
            }
        };
        let model = TrussModel::with_mass_convention(gs, self.material.e, self.material.rho, self.material.mass_convention)?;
        let entries: Vec<_> = self.load.entries.iter().map(|e| (e.k, e.dof, Complex64::new(e.re, e.im))).collect();
        let load = HarmonicLoad::from_entries(&model.gs, self.load.omega0, self.load.n, &entries)?;
        if !(self.mass > 0.0) {
            bail!("mass bound must be positive, got {}", self.mass);
        }
        Ok(Case { name: self.name.clone(), model, load, mass: self.mass, eta: self.eta.unwrap_or(presets::ETA) })
    }

    pub fn from_case(case: &Case) -> Self {
        let entries = case
            .load
            .to_entries(&case.model.gs)
            .into_iter()
            .map(|(k, dof, v)| LoadEntry { k, dof, re: v.re, im: v.im })
            .collect();
        ProblemFile {
            name: case.name.clone(),
            structure: StructureSpec::Explicit(case.model.gs.clone()),
            material: Material { e: case.model.e_mod, rho: case.model.rho, mass_convention: case.model.mass_convention },
            load: LoadSpec { omega0: case.load.omega0, n: case.load.n_harm(), entries },
            mass: case.mass,
            eta: Some(case.eta),
        }
    }
}

pub fn preset_case(name: &str) -> Result<Case> {
    match presets::preset(name) {
        Some(p) => Ok(p.into()),
        None => bail!("unknown preset {name:?}; available: {}", presets::NAMES.join(", ")),
    }
}
