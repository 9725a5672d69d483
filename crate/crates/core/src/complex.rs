//! Combinatorial model of a manifold with corners.
//!
//! A [`CornerComplex`] records the open faces of a compact manifold with
//! corners together with their codimensions, the adjacency relation
//! `Γ_j ≻ Γ_r` (the closed face `Γ_j` has a boundary face immersed onto
//! `Γ_r`), the finite coverings of adjacent faces by faces of closed faces,
//! and the permutation structure group of each face's normal bundle.
//!
//! The interior `M°` is always face 0. It is implicitly adjacent to every
//! boundary face, so `adjacency` only lists pairs of boundary faces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CornerError, Result};
use crate::perm::{orbits_of, Perm, PermGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceId(pub usize);

impl FaceId {
    pub const INTERIOR: FaceId = FaceId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Γ{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerFace {
    pub id: FaceId,
    pub codim: usize,
    pub dim: usize,
    /// Structure group of the normal bundle, acting on `codim` letters.
    pub structure_group: PermGroup,
    pub label: String,
    /// For polytopal complexes: the facets (hyperfaces of the polytope) containing this face.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<usize>>,
}

/// A local face `l` of the closed face `Γ_parent` covering the open face `Γ_target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringData {
    pub parent: FaceId,
    pub local_face: usize,
    pub target: FaceId,
    pub sheets: usize,
    /// Images of the loop generators of the target in the symmetric group on `sheets` letters.
    #[serde(default)]
    pub monodromy: Vec<Perm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerComplex {
    pub ambient_dim: usize,
    pub faces: Vec<CornerFace>,
    pub adjacency: BTreeSet<(FaceId, FaceId)>,
    pub coverings: Vec<CoveringData>,
}

/// Simple-polytope input: vertex count and facets given as vertex index lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: usize,
    pub facets: Vec<Vec<usize>>,
}

impl Polytope {
    /// Builds the polytope from a vertex × facet incidence matrix.
    pub fn from_incidence(incidence: &[Vec<bool>], dim: usize) -> Result<Self> {
        let n_facets = incidence.first().map_or(0, Vec::len);
        if incidence.iter().any(|row| row.len() != n_facets) {
            return Err(CornerError::MalformedPolytope(
                "ragged incidence matrix".into(),
            ));
        }
        let facets = (0..n_facets)
            .map(|f| (0..incidence.len()).filter(|&v| incidence[v][f]).collect())
            .collect();
        Ok(Polytope {
            dim,
            vertices: incidence.len(),
            facets,
        })
    }

    pub fn incidence(&self) -> Vec<Vec<bool>> {
        let mut inc = vec![vec![false; self.facets.len()]; self.vertices];
        for (f, verts) in self.facets.iter().enumerate() {
            for &v in verts {
                inc[v][f] = true;
            }
        }
        inc
    }

    /// Sorted facet list of every vertex.
    pub fn vertex_facets(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertices];
        for (f, verts) in self.facets.iter().enumerate() {
            for &v in verts {
                if v < self.vertices {
                    vf[v].push(f);
                }
            }
        }
        vf
    }
}

/// Which structural invariant a [`Violation`] breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    FaceIds,
    InteriorFace,
    DimensionSum,
    MissingHyperface,
    StructureGroup,
    HyperfaceGroup,
    AdjacencyUnknownFace,
    AdjacencyNotCodimIncreasing,
    AdjacencyNotTransitive,
    CoveringNotAdjacent,
    CoveringSheets,
    CoveringNotTransitive,
    UnrealizedCodim,
    HasseWithoutCovering,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::FaceIds => "face ids must equal their positions",
            Invariant::InteriorFace => "exactly one face of codim 0, with id 0",
            Invariant::DimensionSum => "codim + dim must equal the ambient dimension",
            Invariant::MissingHyperface => "positive depth requires a hyperface",
            Invariant::StructureGroup => "structure group must act on codim letters",
            Invariant::HyperfaceGroup => "structure group of a face of codim ≤ 1 must be trivial",
            Invariant::AdjacencyUnknownFace => "adjacency references an unknown or interior face",
            Invariant::AdjacencyNotCodimIncreasing => "adjacency not codim-increasing",
            Invariant::AdjacencyNotTransitive => "adjacency not transitively closed",
            Invariant::CoveringNotAdjacent => "covering pair missing from adjacency",
            Invariant::CoveringSheets => {
                "covering sheets and monodromy degree must agree and be positive"
            }
            Invariant::CoveringNotTransitive => "covering monodromy not transitive on sheets",
            Invariant::UnrealizedCodim => "face has no adjacent face of the next lower codimension",
            Invariant::HasseWithoutCovering => "Hasse edge without a covering record",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub faces: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (faces {:?})", self.message, self.faces)
    }
}

/// A closed face as a complex of its own, with the immersion of its faces into `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFace {
    pub source: FaceId,
    pub complex: CornerComplex,
    /// `immersion[l]` is the face of `M` onto which local face `l` is immersed.
    pub immersion: Vec<FaceId>,
    /// Number of sheets of each local face over its image.
    pub sheets: Vec<usize>,
}

impl ClosedFace {
    /// Total number of sheets lying over `target` across all local faces.
    pub fn sheets_over(&self, target: FaceId) -> usize {
        self.immersion
            .iter()
            .zip(&self.sheets)
            .filter(|(t, _)| **t == target)
            .map(|(_, s)| s)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedFace {
    pub base_local: usize,
    pub sheets: usize,
}

/// The principal `𝔖_F`-covering `F̃ → F̄` trivializing the normal bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivializingCover {
    pub face: FaceId,
    pub deck_group: PermGroup,
    pub sheets: usize,
    pub connected: bool,
    pub base: ClosedFace,
    pub lifted_faces: Vec<LiftedFace>,
}

impl TrivializingCover {
    pub fn is_identity(&self) -> bool {
        self.sheets == 1
    }
}

impl CornerComplex {
    /// A smooth closed manifold: a single interior face.
    pub fn closed_manifold(n: usize) -> Self {
        CornerComplex {
            ambient_dim: n,
            faces: vec![interior_face(n)],
            adjacency: BTreeSet::new(),
            coverings: Vec::new(),
        }
    }

    /// A manifold with boundary having `components` boundary components.
    pub fn with_boundary(n: usize, components: usize) -> Self {
        let mut faces = vec![interior_face(n)];
        for b in 0..components {
            faces.push(CornerFace {
                id: FaceId(b + 1),
                codim: 1,
                dim: n.saturating_sub(1),
                structure_group: PermGroup::trivial(1),
                label: format!("boundary{b}"),
                facets: None,
            });
        }
        CornerComplex {
            ambient_dim: n,
            faces,
            adjacency: BTreeSet::new(),
            coverings: Vec::new(),
        }
    }

    /// The 1-gon (teardrop): one edge whose two ends meet at a single corner.
    pub fn one_gon() -> Self {
        let faces = vec![
            interior_face(2),
            CornerFace {
                id: FaceId(1),
                codim: 1,
                dim: 1,
                structure_group: PermGroup::trivial(1),
                label: "edge".into(),
                facets: None,
            },
            CornerFace {
                id: FaceId(2),
                codim: 2,
                dim: 0,
                structure_group: PermGroup::trivial(2),
                label: "corner".into(),
                facets: None,
            },
        ];
        let coverings = (0..2)
            .map(|l| CoveringData {
                parent: FaceId(1),
                local_face: l,
                target: FaceId(2),
                sheets: 1,
                monodromy: Vec::new(),
            })
            .collect();
        CornerComplex {
            ambient_dim: 2,
            faces,
            adjacency: [(FaceId(1), FaceId(2))].into_iter().collect(),
            coverings,
        }
    }

    /// Face lattice of a simple polytope. Faces are the nonempty intersections
    /// of facet subsets, ordered by codimension and then lexicographically on
    /// the facet subset.
    pub fn from_polytope(p: &Polytope) -> Result<Self> {
        let n = p.dim;
        for (f, verts) in p.facets.iter().enumerate() {
            if verts.is_empty() {
                return Err(CornerError::MalformedPolytope(format!(
                    "facet {f} has no vertices"
                )));
            }
            if let Some(&v) = verts.iter().find(|&&v| v >= p.vertices) {
                return Err(CornerError::MalformedPolytope(format!(
                    "facet {f} references vertex {v} of {}",
                    p.vertices
                )));
            }
        }
        let vertex_facets = p.vertex_facets();
        for (v, fs) in vertex_facets.iter().enumerate() {
            if fs.len() != n {
                return Err(CornerError::NonSimplePolytope {
                    vertex: v,
                    facets: fs.len(),
                    dim: n,
                });
            }
        }
        let mut subsets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for fs in &vertex_facets {
            for mask in 0u64..(1u64 << fs.len()) {
                let s: Vec<usize> = fs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &f)| f)
                    .collect();
                subsets.insert(s);
            }
        }
        if p.vertices == 0 {
            subsets.insert(Vec::new());
        }
        Ok(Self::from_facet_subsets(n, subsets.into_iter().collect()))
    }

    /// Builds an embedded (polytopal) complex from its faces' facet subsets.
    fn from_facet_subsets(n: usize, mut subsets: Vec<Vec<usize>>) -> Self {
        subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let faces: Vec<CornerFace> = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| CornerFace {
                id: FaceId(i),
                codim: s.len(),
                dim: n - s.len(),
                structure_group: PermGroup::trivial(s.len()),
                label: if s.is_empty() {
                    "interior".into()
                } else {
                    s.iter()
                        .map(|f| format!("F{f}"))
                        .collect::<Vec<_>>()
                        .join(".")
                },
                facets: Some(s.clone()),
            })
            .collect();
        let mut adjacency = BTreeSet::new();
        let mut coverings = Vec::new();
        for (i, a) in subsets.iter().enumerate().skip(1) {
            let mut local = 0;
            for (j, b) in subsets.iter().enumerate() {
                if b.len() > a.len() && a.iter().all(|f| b.binary_search(f).is_ok()) {
                    adjacency.insert((FaceId(i), FaceId(j)));
                    coverings.push(CoveringData {
                        parent: FaceId(i),
                        local_face: local,
                        target: FaceId(j),
                        sheets: 1,
                        monodromy: Vec::new(),
                    });
                    local += 1;
                }
            }
        }
        CornerComplex {
            ambient_dim: n,
            faces,
            adjacency,
            coverings,
        }
    }

    /// Recovers the simple-polytope incidence: vertices are the faces of
    /// codimension `n`, facets the hyperfaces.
    pub fn to_polytope(&self) -> Polytope {
        let n = self.ambient_dim;
        let vertices: Vec<FaceId> = self
            .faces
            .iter()
            .filter(|f| f.codim == n && n > 0)
            .map(|f| f.id)
            .collect();
        let hyperfaces: Vec<FaceId> = self
            .faces
            .iter()
            .filter(|f| f.codim == 1)
            .map(|f| f.id)
            .collect();
        let facets = hyperfaces
            .iter()
            .map(|&h| {
                vertices
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == h || self.adjacency.contains(&(h, v)))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Polytope {
            dim: n,
            vertices: vertices.len(),
            facets,
        }
    }

    pub fn face(&self, id: FaceId) -> Result<&CornerFace> {
        self.faces.get(id.0).ok_or(CornerError::UnknownFace(id.0))
    }

    pub fn depth(&self) -> usize {
        self.faces.iter().map(|f| f.codim).max().unwrap_or(0)
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = &CornerFace> {
        self.faces.iter().filter(|f| f.codim > 0)
    }

    pub fn faces_of_codim(&self, codim: usize) -> usize {
        self.faces.iter().filter(|f| f.codim == codim).count()
    }

    /// `Γ_j ≻ Γ_r`, with the interior adjacent to every boundary face.
    pub fn is_adjacent(&self, j: FaceId, r: FaceId) -> bool {
        if j == FaceId::INTERIOR {
            return r != FaceId::INTERIOR && r.0 < self.faces.len();
        }
        self.adjacency.contains(&(j, r))
    }

    /// Adjacency pairs with no face strictly between them.
    pub fn hasse_edges(&self) -> Vec<(FaceId, FaceId)> {
        self.adjacency
            .iter()
            .copied()
            .filter(|&(j, r)| {
                !self
                    .adjacency
                    .iter()
                    .any(|&(a, k)| a == j && self.adjacency.contains(&(k, r)))
            })
            .collect()
    }

    pub fn coverings_from(&self, parent: FaceId) -> impl Iterator<Item = &CoveringData> {
        self.coverings.iter().filter(move |c| c.parent == parent)
    }

    /// Checks every structural invariant; an empty list means the complex is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |invariant: Invariant, faces: Vec<usize>, message: String| {
            out.push(Violation {
                invariant,
                faces,
                message,
            });
        };
        let n_faces = self.faces.len();

        for (i, f) in self.faces.iter().enumerate() {
            if f.id.0 != i {
                push(
                    Invariant::FaceIds,
                    vec![i],
                    format!("face at position {i} has id {}", f.id.0),
                );
            }
            if f.codim + f.dim != self.ambient_dim {
                push(
                    Invariant::DimensionSum,
                    vec![i],
                    format!("codim {} + dim {} ≠ {}", f.codim, f.dim, self.ambient_dim),
                );
            }
            if f.structure_group.degree() != f.codim {
                push(
                    Invariant::StructureGroup,
                    vec![i],
                    format!(
                        "group of degree {} on a codim-{} face",
                        f.structure_group.degree(),
                        f.codim
                    ),
                );
            }
            if f.codim <= 1 && !f.structure_group.is_trivial() {
                push(
                    Invariant::HyperfaceGroup,
                    vec![i],
                    format!("{}: nontrivial group", f.label),
                );
            }
        }
        let interior: Vec<usize> = self
            .faces
            .iter()
            .filter(|f| f.codim == 0)
            .map(|f| f.id.0)
            .collect();
        if interior != [0] {
            push(
                Invariant::InteriorFace,
                interior.clone(),
                format!("codim-0 faces {interior:?}"),
            );
        }
        if self.depth() > 0 && self.faces_of_codim(1) == 0 {
            push(Invariant::MissingHyperface, vec![], "no hyperface".into());
        }

        let codim = |id: FaceId| self.faces.get(id.0).map(|f| f.codim);
        for &(j, r) in &self.adjacency {
            match (codim(j), codim(r)) {
                (Some(dj), Some(dr)) if j.0 != 0 && r.0 != 0 => {
                    if dr <= dj {
                        push(
                            Invariant::AdjacencyNotCodimIncreasing,
                            vec![j.0, r.0],
                            format!(
                                "adjacency not codim-increasing: d_{} = {dj}, d_{} = {dr}",
                                j.0, r.0
                            ),
                        );
                    }
                }
                _ => push(
                    Invariant::AdjacencyUnknownFace,
                    vec![j.0, r.0],
                    format!(
                        "pair ({}, {}) out of range of {n_faces} faces or touches the interior",
                        j.0, r.0
                    ),
                ),
            }
        }
        for &(a, b) in &self.adjacency {
            for &(c, d) in &self.adjacency {
                if b == c && !self.adjacency.contains(&(a, d)) {
                    push(
                        Invariant::AdjacencyNotTransitive,
                        vec![a.0, b.0, d.0],
                        format!(
                            "({}, {}) and ({}, {}) present but ({}, {}) missing",
                            a.0, b.0, c.0, d.0, a.0, d.0
                        ),
                    );
                }
            }
        }

        for c in &self.coverings {
            if !self.adjacency.contains(&(c.parent, c.target)) {
                push(
                    Invariant::CoveringNotAdjacent,
                    vec![c.parent.0, c.target.0],
                    format!("covering ({}, {}) not in adjacency", c.parent.0, c.target.0),
                );
            }
            if c.sheets == 0 || c.monodromy.iter().any(|p| p.degree() != c.sheets) {
                push(
                    Invariant::CoveringSheets,
                    vec![c.parent.0, c.target.0],
                    format!(
                        "{} sheets with monodromy degrees {:?}",
                        c.sheets,
                        c.monodromy.iter().map(Perm::degree).collect::<Vec<_>>()
                    ),
                );
            } else if orbits_of(c.sheets, &c.monodromy).len() > 1 {
                push(
                    Invariant::CoveringNotTransitive,
                    vec![c.parent.0, c.target.0],
                    format!(
                        "monodromy of covering ({}, {}) has several orbits",
                        c.parent.0, c.target.0
                    ),
                );
            }
        }

        for f in self.faces.iter().filter(|f| f.codim >= 2) {
            let realized = self
                .adjacency
                .iter()
                .any(|&(j, r)| r == f.id && codim(j) == Some(f.codim - 1));
            if !realized {
                push(
                    Invariant::UnrealizedCodim,
                    vec![f.id.0],
                    format!(
                        "{} (codim {}) has no adjacent face of codim {}",
                        f.label,
                        f.codim,
                        f.codim - 1
                    ),
                );
            }
        }

        for (j, r) in self.hasse_edges() {
            if !self
                .coverings
                .iter()
                .any(|c| c.parent == j && c.target == r)
            {
                push(
                    Invariant::HasseWithoutCovering,
                    vec![j.0, r.0],
                    format!("Hasse edge ({}, {}) has no covering record", j.0, r.0),
                );
            }
        }
        out
    }

    /// The closed face `Γ_j(M)` as a manifold with corners of dimension `n − d_j`.
    pub fn closed_face(&self, j: FaceId) -> Result<ClosedFace> {
        let face = self.face(j)?;
        if face.codim == 0 {
            return Err(CornerError::InteriorClosedFace);
        }
        let n = self.ambient_dim - face.codim;
        if let Some(base) = &face.facets {
            if self.faces.iter().all(|f| f.facets.is_some()) {
                return Ok(self.closed_polytopal_face(j, base, n));
            }
        }

        // Local faces from covering records; one embedded local face per
        // adjacent target without a record.
        let mut locals: Vec<(FaceId, usize)> = Vec::new();
        for &(a, r) in &self.adjacency {
            if a != j {
                continue;
            }
            let recs: Vec<&CoveringData> = self
                .coverings
                .iter()
                .filter(|c| c.parent == j && c.target == r)
                .collect();
            if recs.is_empty() {
                locals.push((r, 1));
            } else {
                let mut recs = recs;
                recs.sort_by_key(|c| c.local_face);
                locals.extend(recs.iter().map(|c| (r, c.sheets)));
            }
        }
        locals.sort_by_key(|(r, _)| (self.faces[r.0].codim, r.0));

        let mut faces = vec![interior_face(n)];
        faces[0].label = format!("{}°", face.label);
        for (l, (r, _)) in locals.iter().enumerate() {
            let c = self.faces[r.0].codim - face.codim;
            faces.push(CornerFace {
                id: FaceId(l + 1),
                codim: c,
                dim: n - c,
                structure_group: PermGroup::trivial(c),
                label: format!("{}|{}", face.label, self.faces[r.0].label),
                facets: None,
            });
        }
        let mut adjacency = BTreeSet::new();
        let mut coverings = Vec::new();
        let mut local_count: BTreeMap<usize, usize> = BTreeMap::new();
        for (a, (ra, _)) in locals.iter().enumerate() {
            for (b, (rb, _)) in locals.iter().enumerate() {
                if self.adjacency.contains(&(*ra, *rb)) {
                    adjacency.insert((FaceId(a + 1), FaceId(b + 1)));
                    let k = local_count.entry(a).or_insert(0);
                    coverings.push(CoveringData {
                        parent: FaceId(a + 1),
                        local_face: *k,
                        target: FaceId(b + 1),
                        sheets: 1,
                        monodromy: Vec::new(),
                    });
                    *k += 1;
                }
            }
        }
        let mut immersion = vec![j];
        immersion.extend(locals.iter().map(|(r, _)| *r));
        let mut sheets = vec![1];
        sheets.extend(locals.iter().map(|(_, s)| *s));
        Ok(ClosedFace {
            source: j,
            complex: CornerComplex {
                ambient_dim: n,
                faces,
                adjacency,
                coverings,
            },
            immersion,
            sheets,
        })
    }

    fn closed_polytopal_face(&self, j: FaceId, base: &[usize], n: usize) -> ClosedFace {
        let mut members: Vec<(Vec<usize>, FaceId)> = self
            .faces
            .iter()
            .filter_map(|f| {
                let s = f.facets.as_ref()?;
                if base.iter().all(|b| s.contains(b)) {
                    let rest: Vec<usize> =
                        s.iter().copied().filter(|x| !base.contains(x)).collect();
                    Some((rest, f.id))
                } else {
                    None
                }
            })
            .collect();
        members.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        let mut complex =
            Self::from_facet_subsets(n, members.iter().map(|(s, _)| s.clone()).collect());
        let parent_label = &self.faces[j.0].label;
        complex.faces[0].label = format!("{parent_label}°");
        ClosedFace {
            source: j,
            complex,
            immersion: members.iter().map(|(_, id)| *id).collect(),
            sheets: vec![1; members.len()],
        }
    }

    /// The principal covering trivializing the normal bundle of face `j`.
    pub fn trivializing_cover(&self, j: FaceId) -> Result<TrivializingCover> {
        let face = self.face(j)?;
        if face.codim == 0 {
            return Err(CornerError::NotBoundaryFace(j.0));
        }
        let base = self.closed_face(j)?;
        let group = face.structure_group.clone();
        let sheets = group.order();
        // The deck group acts on itself by left multiplication; one orbit means F̃ is connected.
        let left_mult: Vec<Perm> = group
            .generators()
            .iter()
            .map(|g| {
                let images = group
                    .elements()
                    .iter()
                    .map(|h| {
                        group
                            .elements()
                            .iter()
                            .position(|x| *x == g.compose(h))
                            .unwrap()
                    })
                    .collect();
                Perm::new(images).unwrap()
            })
            .collect();
        let connected = orbits_of(sheets, &left_mult).len() == 1;
        let lifted_faces = (0..base.complex.faces.len())
            .map(|l| LiftedFace {
                base_local: l,
                sheets,
            })
            .collect();
        Ok(TrivializingCover {
            face: j,
            deck_group: group,
            sheets,
            connected,
            base,
            lifted_faces,
        })
    }
}

fn interior_face(n: usize) -> CornerFace {
    CornerFace {
        id: FaceId::INTERIOR,
        codim: 0,
        dim: n,
        structure_group: PermGroup::trivial(0),
        label: "interior".into(),
        facets: Some(Vec::new()),
    }
}
