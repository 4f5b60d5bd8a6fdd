//! Ground structures and 2D truss finite elements with area-linear stiffness and mass.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::linalg::Mat;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundStructure {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<(usize, usize)>,
    /// Constrained DOF indices; DOF `2i` is x of node `i`, `2i+1` is y.
    pub fixed_dofs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Connectivity {
    /// Horizontal and vertical links between adjacent grid nodes.
    Neighbors,
    /// Every pair of nodes, overlapping collinear bars included.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Supports {
    LeftEdge,
    RightEdge,
    TopRow,
    BottomRow,
    Nodes(Vec<usize>),
    Dofs(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FemError {
    BadGrid,
    SelfLoop(usize),
    DuplicateElement(usize),
    ZeroLength(usize),
    NodeOutOfRange(usize),
    DofOutOfRange(usize),
    NoSupports,
    BadMaterial,
    DimensionMismatch { expected: usize, got: usize },
    NegativeArea(usize),
}

impl fmt::Display for FemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FemError::BadGrid => write!(f, "grid needs at least 2x2 nodes and positive spacing"),
            FemError::SelfLoop(e) => write!(f, "element {e} connects a node to itself"),
            FemError::DuplicateElement(e) => write!(f, "element {e} duplicates an earlier node pair"),
            FemError::ZeroLength(e) => write!(f, "element {e} has zero length"),
            FemError::NodeOutOfRange(e) => write!(f, "element {e} references a missing node"),
            FemError::DofOutOfRange(d) => write!(f, "fixed dof {d} is out of range"),
            FemError::NoSupports => write!(f, "no supports: the structure has rigid-body modes"),
            FemError::BadMaterial => write!(f, "E and rho must be positive"),
            FemError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
            FemError::NegativeArea(i) => write!(f, "area {i} is negative"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FemError {}

impl GroundStructure {
    pub fn new(
        nodes: Vec<[f64; 2]>,
        elements: Vec<(usize, usize)>,
        mut fixed_dofs: Vec<usize>,
    ) -> Result<Self, FemError> {
        fixed_dofs.sort_unstable();
        fixed_dofs.dedup();
        let gs = GroundStructure { nodes, elements, fixed_dofs };
        gs.validate()?;
        Ok(gs)
    }

    pub fn validate(&self) -> Result<(), FemError> {
        let nn = self.nodes.len();
        let mut seen: Vec<(usize, usize)> = Vec::with_capacity(self.elements.len());
        for (e, &(i, j)) in self.elements.iter().enumerate() {
            if i >= nn || j >= nn {
                return Err(FemError::NodeOutOfRange(e));
            }
            if i == j {
                return Err(FemError::SelfLoop(e));
            }
            let key = (i.min(j), i.max(j));
            if seen.contains(&key) {
                return Err(FemError::DuplicateElement(e));
            }
            seen.push(key);
            if self.length(e) <= 0.0 {
                return Err(FemError::ZeroLength(e));
            }
        }
        if self.fixed_dofs.is_empty() {
            return Err(FemError::NoSupports);
        }
        if let Some(&d) = self.fixed_dofs.iter().find(|&&d| d >= 2 * nn) {
            return Err(FemError::DofOutOfRange(d));
        }
        Ok(())
    }

    pub fn length(&self, e: usize) -> f64 {
        let (i, j) = self.elements[e];
        let [xi, yi] = self.nodes[i];
        let [xj, yj] = self.nodes[j];
        (xj - xi).hypot(yj - yi)
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_dofs() - self.fixed_dofs.len()
    }

    /// Global DOF to free-DOF index (None when fixed).
    pub fn dof_map(&self) -> Vec<Option<usize>> {
        let mut map = Vec::with_capacity(self.n_dofs());
        let mut next = 0;
        for d in 0..self.n_dofs() {
            if self.fixed_dofs.binary_search(&d).is_ok() {
                map.push(None);
            } else {
                map.push(Some(next));
                next += 1;
            }
        }
        map
    }

    pub fn free_dof(&self, node: usize, axis: usize) -> Option<usize> {
        self.dof_map()[2 * node + axis]
    }

    pub fn is_node_free(&self, node: usize) -> bool {
        let map = self.dof_map();
        map[2 * node].is_some() && map[2 * node + 1].is_some()
    }
}

/// Grid of `nx` by `ny` nodes. Nodes are numbered row by row from the top row down,
/// left to right within a row.
pub fn build_grid_ground_structure(
    nx: usize,
    ny: usize,
    spacing: f64,
    connectivity: Connectivity,
    supports: &Supports,
) -> Result<GroundStructure, FemError> {
    if nx < 2 || ny < 2 || !(spacing > 0.0) {
        return Err(FemError::BadGrid);
    }
    let id = |col: usize, row: usize| row * nx + col;
    let mut nodes = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        for col in 0..nx {
            nodes.push([col as f64 * spacing, (ny - 1 - row) as f64 * spacing]);
        }
    }
    let mut elements = Vec::new();
    match connectivity {
        Connectivity::Neighbors => {
            for row in 0..ny {
                for col in 0..nx - 1 {
                    elements.push((id(col, row), id(col + 1, row)));
                }
            }
            for row in 0..ny - 1 {
                for col in 0..nx {
                    elements.push((id(col, row), id(col, row + 1)));
                }
            }
        }
        Connectivity::Full => {
            for i in 0..nodes.len() {
                for j in (i + 1)..nodes.len() {
                    elements.push((i, j));
                }
            }
        }
    }
    let node_dofs = |ns: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
        ns.flat_map(|n| [2 * n, 2 * n + 1]).collect()
    };
    let fixed = match supports {
        Supports::LeftEdge => node_dofs(&mut (0..ny).map(|r| id(0, r))),
        Supports::RightEdge => node_dofs(&mut (0..ny).map(|r| id(nx - 1, r))),
        Supports::TopRow => node_dofs(&mut (0..nx).map(|c| id(c, 0))),
        Supports::BottomRow => node_dofs(&mut (0..nx).map(|c| id(c, ny - 1))),
        Supports::Nodes(ns) => node_dofs(&mut ns.iter().copied()),
        Supports::Dofs(ds) => ds.clone(),
    };
    GroundStructure::new(nodes, elements, fixed)
}

/// How element mass is distributed to the nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MassConvention {
    /// ρL/6 [[2I, I], [I, 2I]].
    #[default]
    Consistent,
    /// ρL/2 on every end DOF.
    Lumped,
}

/// Per-element data: local 4x4 matrices and their scatter map onto the free DOFs.
#[derive(Clone, Debug)]
pub struct ElementData {
    pub length: f64,
    /// Free-DOF index of (x_i, y_i, x_j, y_j), None where supported.
    pub dofs: [Option<usize>; 4],
    /// Stiffness per unit area, E/L b bᵀ.
    pub k_local: [[f64; 4]; 4],
    /// Mass per unit area.
    pub m_local: [[f64; 4]; 4],
    /// Mass per unit area, ρL.
    pub weight: f64,
}

impl ElementData {
    fn scatter(&self, local: &[[f64; 4]; 4], scale: f64, out: &mut Mat) {
        for p in 0..4 {
            let Some(r) = self.dofs[p] else { continue };
            for q in 0..4 {
                let Some(s) = self.dofs[q] else { continue };
                out[(r, s)] += scale * local[p][q];
            }
        }
    }

    pub fn stiffness_seed(&self, n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        self.scatter(&self.k_local, 1.0, &mut m);
        m
    }

    pub fn mass_seed(&self, n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        self.scatter(&self.m_local, 1.0, &mut m);
        m
    }

    /// Entries of K_i - λ² M_i restricted to free DOFs, as (row, col, value).
    pub fn dynamic_entries(&self, lambda: f64) -> Vec<(usize, usize, f64)> {
        let l2 = lambda * lambda;
        let mut out = Vec::with_capacity(16);
        for p in 0..4 {
            let Some(r) = self.dofs[p] else { continue };
            for q in 0..4 {
                let Some(s) = self.dofs[q] else { continue };
                let v = self.k_local[p][q] - l2 * self.m_local[p][q];
                if v != 0.0 {
                    out.push((r, s, v));
                }
            }
        }
        out
    }
}

pub fn element_matrices(gs: &GroundStructure, e_mod: f64, rho: f64) -> Result<Vec<ElementData>, FemError> {
    element_matrices_with(gs, e_mod, rho, MassConvention::Consistent)
}

pub fn element_matrices_with(
    gs: &GroundStructure,
    e_mod: f64,
    rho: f64,
    convention: MassConvention,
) -> Result<Vec<ElementData>, FemError> {
    if !(e_mod > 0.0) || !(rho > 0.0) {
        return Err(FemError::BadMaterial);
    }
    let map = gs.dof_map();
    let mut out = Vec::with_capacity(gs.elements.len());
    for (e, &(i, j)) in gs.elements.iter().enumerate() {
        let l = gs.length(e);
        if !(l > 0.0) {
            return Err(FemError::ZeroLength(e));
        }
        let [xi, yi] = gs.nodes[i];
        let [xj, yj] = gs.nodes[j];
        let (cx, cy) = ((xj - xi) / l, (yj - yi) / l);
        let b = [-cx, -cy, cx, cy];
        let mut k_local = [[0.0; 4]; 4];
        for p in 0..4 {
            for q in 0..4 {
                k_local[p][q] = e_mod / l * b[p] * b[q];
            }
        }
        let m_local = match convention {
            MassConvention::Consistent => {
                let s = rho * l / 6.0;
                [
                    [2.0 * s, 0.0, s, 0.0],
                    [0.0, 2.0 * s, 0.0, s],
                    [s, 0.0, 2.0 * s, 0.0],
                    [0.0, s, 0.0, 2.0 * s],
                ]
            }
            MassConvention::Lumped => {
                let h = rho * l / 2.0;
                [[h, 0.0, 0.0, 0.0], [0.0, h, 0.0, 0.0], [0.0, 0.0, h, 0.0], [0.0, 0.0, 0.0, h]]
            }
        };
        out.push(ElementData {
            length: l,
            dofs: [map[2 * i], map[2 * i + 1], map[2 * j], map[2 * j + 1]],
            k_local,
            m_local,
            weight: rho * l,
        });
    }
    Ok(out)
}

/// Ground structure plus material and precomputed element data.
#[derive(Clone, Debug)]
pub struct TrussModel {
    pub gs: GroundStructure,
    pub e_mod: f64,
    pub rho: f64,
    pub mass_convention: MassConvention,
    pub elems: Vec<ElementData>,
}

impl TrussModel {
    pub fn new(gs: GroundStructure, e_mod: f64, rho: f64) -> Result<Self, FemError> {
        Self::with_mass_convention(gs, e_mod, rho, MassConvention::Consistent)
    }

    pub fn with_mass_convention(
        gs: GroundStructure,
        e_mod: f64,
        rho: f64,
        mass_convention: MassConvention,
    ) -> Result<Self, FemError> {
        gs.validate()?;
        let elems = element_matrices_with(&gs, e_mod, rho, mass_convention)?;
        Ok(TrussModel { gs, e_mod, rho, mass_convention, elems })
    }

    pub fn n_free(&self) -> usize {
        self.gs.n_free()
    }

    pub fn n_elements(&self) -> usize {
        self.elems.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.elems.iter().map(|e| e.weight).collect()
    }

    fn check(&self, a: &[f64]) -> Result<(), FemError> {
        if a.len() != self.elems.len() {
            return Err(FemError::DimensionMismatch { expected: self.elems.len(), got: a.len() });
        }
        Ok(())
    }

    /// (M(a), K(a)) on the free DOFs.
    pub fn assemble(&self, a: &[f64]) -> Result<(Mat, Mat), FemError> {
        self.check(a)?;
        let n = self.n_free();
        let mut m = Mat::zeros(n, n);
        let mut k = Mat::zeros(n, n);
        for (e, &ai) in self.elems.iter().zip(a) {
            if ai != 0.0 {
                e.scatter(&e.m_local, ai, &mut m);
                e.scatter(&e.k_local, ai, &mut k);
            }
        }
        Ok((m, k))
    }

    /// K(a) - λ² M(a).
    pub fn dynamic_stiffness(&self, a: &[f64], lambda: f64) -> Result<Mat, FemError> {
        let (m, k) = self.assemble(a)?;
        Ok(k - m * (lambda * lambda))
    }

    pub fn mass(&self, a: &[f64]) -> f64 {
        self.elems.iter().zip(a).map(|(e, ai)| e.weight * ai).sum()
    }

    /// Equal areas with total mass `m`.
    pub fn uniform_design(&self, m: f64) -> Vec<f64> {
        let total: f64 = self.elems.iter().map(|e| e.weight).sum();
        alloc::vec![m / total; self.elems.len()]
    }
}
