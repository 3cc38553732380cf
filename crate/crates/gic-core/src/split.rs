//! Simple split sets, point-ray collections and standard intersection cuts.
//!
//! Collections live in nonbasic coordinates. An initial point has one
//! nonzero coordinate and a point created by an activation has two.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::instance::StandardForm;
use crate::simplex::{BasicSolution, Cone};
use crate::{FRAC_TOL, ZERO_TOL};

/// Sparse vector as sorted `(index, value)` pairs.
pub type SparseVec = Vec<(usize, f64)>;

/// `S_k = {x : lo ≤ x_k ≤ hi}` for a fractional integer variable `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub var: usize,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Facet {
    Lower,
    Upper,
}

impl SplitSet {
    /// Split on `var` at value `value`; `None` unless the value is fractional.
    pub fn new(var: usize, value: f64) -> Option<Self> {
        let lo = value.floor();
        let hi = lo + 1.0;
        if value - lo < FRAC_TOL || hi - value < FRAC_TOL {
            return None;
        }
        Some(SplitSet { var, value, lo, hi })
    }

    /// Step along ray `j` to the nearest facet, with the facet hit.
    pub fn boundary_distance(&self, cone: &Cone, j: usize) -> (f64, Option<Facet>) {
        self.line_hit(self.value, cone.tableau[self.var][j])
    }

    /// First facet reached from a point with split coordinate `x` moving at
    /// rate `slope`.
    pub fn line_hit(&self, x: f64, slope: f64) -> (f64, Option<Facet>) {
        if slope < -ZERO_TOL {
            (((self.lo - x) / slope).max(0.0), Some(Facet::Lower))
        } else if slope > ZERO_TOL {
            (((self.hi - x) / slope).max(0.0), Some(Facet::Upper))
        } else {
            (f64::INFINITY, None)
        }
    }

    /// Value of the split coordinate at a nonbasic point.
    pub fn coordinate(&self, cone: &Cone, y: &[(usize, f64)]) -> f64 {
        cone.var_value(self.var, y)
    }

    /// Whether a nonbasic point lies on one of the two facets.
    pub fn on_boundary(&self, cone: &Cone, y: &[(usize, f64)]) -> bool {
        let x = self.coordinate(cone, y);
        (x - self.lo).abs() < ZERO_TOL || (x - self.hi).abs() < ZERO_TOL
    }

    /// Whether a nonbasic point is strictly inside the split.
    pub fn strictly_inside(&self, cone: &Cone, y: &[(usize, f64)]) -> bool {
        let x = self.coordinate(cone, y);
        x > self.lo + ZERO_TOL && x < self.hi - ZERO_TOL
    }
}

/// Integer variables whose LP value is at least `FRAC_TOL` from an integer.
pub fn fractional_indices(sol: &BasicSolution, sf: &StandardForm) -> Vec<usize> {
    sol.x
        .iter()
        .enumerate()
        .filter(|&(j, &v)| sf.integer[j] && SplitSet::new(j, v).is_some())
        .map(|(j, _)| j)
        .collect()
}

/// Where an element of a collection came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Edge leaving the apex along a cone ray.
    Apex,
    /// Edge leaving the vertex created by activation record `k`.
    Activation(usize),
}

/// Hyperplane that produced an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    BoundaryInit,
    Activated(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollPoint {
    pub coords: SparseVec,
    /// Cone ray carrying the vertex the edge leaves from.
    pub origin_ray: usize,
    pub origin: Origin,
    pub source: Source,
    pub facet: Facet,
    pub is_final: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollRay {
    /// Vertex the ray leaves from (the apex for initial rays).
    pub base: SparseVec,
    pub direction: SparseVec,
    pub origin_ray: usize,
    pub origin: Origin,
    pub source: Source,
    pub is_final: bool,
}

/// One distance-1 vertex `x̄ + d·r^j` created on hyperplane `hyperplane`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationRecord {
    pub hyperplane: usize,
    pub ray: usize,
    pub distance: f64,
    pub step: usize,
}

/// Points on `bd S` and rays missing `bd S`, with provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointRayCollection {
    pub split: SplitSet,
    pub dim: usize,
    pub points: Vec<CollPoint>,
    pub rays: Vec<CollRay>,
    /// Cone rays already cut by some activation.
    pub cut_rays: BTreeSet<usize>,
    pub activations: Vec<ActivationRecord>,
    /// Initial step to `bd S` along each cone ray.
    pub boundary_dist: Vec<f64>,
    /// Rays that never reach `bd S`.
    pub parallel_rays: Vec<usize>,
    /// Number of hyperplane activations applied so far.
    pub steps: usize,
    #[serde(skip)]
    point_index: HashMap<Vec<(usize, i64)>, usize>,
}

/// Intersects every cone ray with `bd S`.
pub fn initial_collection(cone: &Cone, split: &SplitSet) -> PointRayCollection {
    let n = cone.dim();
    let mut coll = PointRayCollection {
        split: split.clone(),
        dim: n,
        points: Vec::new(),
        rays: Vec::new(),
        cut_rays: BTreeSet::new(),
        activations: Vec::new(),
        boundary_dist: Vec::with_capacity(n),
        parallel_rays: Vec::new(),
        steps: 0,
        point_index: HashMap::new(),
    };
    for j in 0..n {
        let (d, facet) = split.boundary_distance(cone, j);
        coll.boundary_dist.push(d);
        match facet {
            Some(f) => {
                let coords = vec![(j, d)];
                let is_final = cone.point_in_p(&coords);
                coll.push_point(CollPoint {
                    coords,
                    origin_ray: j,
                    origin: Origin::Apex,
                    source: Source::BoundaryInit,
                    facet: f,
                    is_final,
                });
            }
            None => {
                let direction = vec![(j, 1.0)];
                let is_final = cone.point_in_p(&[]) && cone.direction_in_recession(&direction);
                coll.parallel_rays.push(j);
                coll.rays.push(CollRay {
                    base: Vec::new(),
                    direction,
                    origin_ray: j,
                    origin: Origin::Apex,
                    source: Source::BoundaryInit,
                    is_final,
                });
            }
        }
    }
    coll
}

impl PointRayCollection {
    /// Adds a point unless the same point (on a `ZERO_TOL` grid) is present.
    pub fn push_point(&mut self, p: CollPoint) -> bool {
        let key = grid_key(&p.coords);
        if self.point_index.contains_key(&key) {
            return false;
        }
        self.point_index.insert(key, self.points.len());
        self.points.push(p);
        true
    }

    /// Keeps the points for which `keep` holds.
    pub fn retain_points(&mut self, mut keep: impl FnMut(usize, &CollPoint) -> bool) -> usize {
        let before = self.points.len();
        let mut i = 0;
        self.points.retain(|p| {
            let k = keep(i, p);
            i += 1;
            k
        });
        self.reindex();
        before - self.points.len()
    }

    /// Rebuilds the dedupe index after external edits to `points`.
    pub fn reindex(&mut self) {
        self.point_index = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (grid_key(&p.coords), i))
            .collect();
    }

    /// Adds a ray unless a parallel ray with the same base is present.
    pub fn push_ray(&mut self, r: CollRay) -> bool {
        let dn = normalize(&r.direction);
        if self
            .rays
            .iter()
            .any(|q| sparse_close(&q.base, &r.base) && sparse_close(&normalize(&q.direction), &dn))
        {
            return false;
        }
        self.rays.push(r);
        true
    }

    /// Fraction of points that are final.
    pub fn final_fraction(&self) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.points.iter().filter(|p| p.is_final).count() as f64 / self.points.len() as f64
        }
    }

    /// Dense copy of each point's coordinates.
    pub fn dense_points(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| densify(&p.coords, self.dim)).collect()
    }

    pub fn dense_rays(&self) -> Vec<Vec<f64>> {
        self.rays.iter().map(|r| densify(&r.direction, self.dim)).collect()
    }

    /// Serializes the collection as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("collection serializes")
    }
}

fn grid_key(v: &[(usize, f64)]) -> Vec<(usize, i64)> {
    let mut k: Vec<(usize, i64)> = v
        .iter()
        .map(|&(j, x)| (j, (x / ZERO_TOL).round() as i64))
        .filter(|&(_, q)| q != 0)
        .collect();
    k.sort_unstable();
    k
}

/// Dense vector of length `n` from sparse pairs.
pub fn densify(v: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for &(j, x) in v {
        d[j] += x;
    }
    d
}

/// Whether two sparse vectors agree within `ZERO_TOL` in every coordinate.
pub fn sparse_close(a: &[(usize, f64)], b: &[(usize, f64)]) -> bool {
    let mut m: HashMap<usize, f64> = HashMap::new();
    for &(j, v) in a {
        *m.entry(j).or_default() += v;
    }
    for &(j, v) in b {
        *m.entry(j).or_default() -= v;
    }
    m.values().all(|d| d.abs() <= ZERO_TOL)
}

fn normalize(v: &[(usize, f64)]) -> SparseVec {
    let norm = v.iter().map(|(_, x)| x.abs()).fold(0.0, f64::max);
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|&(j, x)| (j, x / norm)).collect()
}

/// Which rule produced a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutFamily {
    Sic,
    /// Objective from a cone ray direction.
    Rays,
    /// Objective from an activation vertex.
    Vertices,
    /// Tight-point objective.
    Tight,
    /// Points from other splits.
    OtherSplits,
}

impl CutFamily {
    pub fn letter(self) -> char {
        match self {
            CutFamily::Sic => 'I',
            CutFamily::Rays => 'R',
            CutFamily::Vertices => 'V',
            CutFamily::Tight => 'T',
            CutFamily::OtherSplits => 'S',
        }
    }
}

/// Which cut generator produced a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Sic,
    Pha,
    Tilting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub split_var: usize,
    pub family: CutFamily,
    /// Number of activations applied when the cut was generated.
    pub step: usize,
    pub generator: Generator,
}

/// `αᵀy ≥ 1` in nonbasic space and its structural image `aᵀx ≥ b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub structural: Vec<f64>,
    pub structural_rhs: f64,
    pub provenance: Provenance,
    /// Euclidean distance from `x̄` to the cut hyperplane.
    pub efficacy: f64,
}

impl Cut {
    /// Builds the cut `αᵀy ≥ 1` and maps it to structural space.
    pub fn from_alpha(alpha: Vec<f64>, cone: &Cone, sf: &StandardForm, provenance: Provenance) -> Cut {
        let (structural, structural_rhs) = structural_image(&alpha, 1.0, cone, sf);
        let ax: f64 = structural.iter().zip(&cone.apex).map(|(a, x)| a * x).sum();
        let norm = structural.iter().map(|a| a * a).sum::<f64>().sqrt();
        let efficacy = if norm > 0.0 { (structural_rhs - ax) / norm } else { 0.0 };
        Cut {
            alpha,
            beta: 1.0,
            structural,
            structural_rhs,
            provenance,
            efficacy,
        }
    }

    /// Largest over smallest nonzero absolute coefficient (nonbasic space).
    pub fn dynamism(&self) -> f64 {
        dynamism(&self.alpha)
    }

    /// Violation `b − aᵀx` of a structural point (positive means cut off).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.structural_rhs - self.structural.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }
}

/// Largest over smallest absolute coefficient, ignoring entries below
/// `1e-11` times the largest.
pub fn dynamism(v: &[f64]) -> f64 {
    let big = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if big == 0.0 {
        return 1.0;
    }
    let small = v
        .iter()
        .map(|a| a.abs())
        .filter(|&a| a > 1e-11 * big)
        .fold(f64::INFINITY, f64::min);
    big / small
}

/// Substitutes nonbasic variables by their definitions: `y_j = x_j` for a
/// structural variable and `y_j = a_iᵀx − b_i` for a row surplus.
pub fn structural_image(alpha: &[f64], beta: f64, cone: &Cone, sf: &StandardForm) -> (Vec<f64>, f64) {
    let n = sf.num_cols();
    let mut a = vec![0.0; n];
    let mut b = beta;
    for (j, &v) in cone.nonbasic.iter().enumerate() {
        let aj = alpha[j];
        if aj == 0.0 {
            continue;
        }
        if v < n {
            a[v] += aj;
        } else {
            for (k, coef) in sf.a[v - n].iter().enumerate() {
                a[k] += aj * coef;
            }
            b += aj * sf.b[v - n];
        }
    }
    (a, b)
}

/// The standard intersection cut of an initial collection: `α_j = 1/d_j` for
/// rays that reach `bd S` and `α_j = 0` for parallel rays.
pub fn sic_from_initial(coll: &PointRayCollection) -> Option<Vec<f64>> {
    if coll.boundary_dist.iter().all(|d| !d.is_finite()) {
        return None;
    }
    Some(
        coll.boundary_dist
            .iter()
            .map(|&d| if d.is_finite() && d > 0.0 { 1.0 / d } else { 0.0 })
            .collect(),
    )
}

/// Builds the SIC for split `split` as a [`Cut`].
pub fn sic_cut(cone: &Cone, sf: &StandardForm, coll: &PointRayCollection) -> Option<Cut> {
    let alpha = sic_from_initial(coll)?;
    if alpha.iter().any(|a| !a.is_finite()) {
        return None;
    }
    Some(Cut::from_alpha(
        alpha,
        cone,
        sf,
        Provenance {
            split_var: coll.split.var,
            family: CutFamily::Sic,
            step: 0,
            generator: Generator::Sic,
        },
    ))
}

/// Euclidean distance of a point beyond the SIC hyperplane, clipped at 0.
pub fn point_depth(p: &[(usize, f64)], sic_alpha: &[f64]) -> f64 {
    let norm = sic_alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let v: f64 = p.iter().map(|&(j, x)| sic_alpha[j] * x).sum();
    ((v - 1.0) / norm).max(0.0)
}

/// Whether a nonbasic point lies in `P` (every hyperplane satisfied).
pub fn is_final(p: &[(usize, f64)], cone: &Cone) -> bool {
    cone.point_in_p(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractionality_tolerance() {
        assert!(SplitSet::new(0, 0.5).is_some());
        assert!(SplitSet::new(0, 0.9995).is_none());
        assert!(SplitSet::new(0, 3.0).is_none());
        let s = SplitSet::new(0, 0.25).unwrap();
        assert_eq!((s.lo, s.hi), (0.0, 1.0));
    }

    #[test]
    fn boundary_hits() {
        let s = SplitSet::new(0, 0.25).unwrap();
        assert_eq!(s.line_hit(0.25, -1.0), (0.25, Some(Facet::Lower)));
        assert_eq!(s.line_hit(0.25, 0.5), (1.5, Some(Facet::Upper)));
        assert_eq!(s.line_hit(0.25, 0.0).0, f64::INFINITY);
    }

    #[test]
    fn sic_reciprocals_and_depth() {
        let coll = PointRayCollection {
            split: SplitSet::new(0, 0.5).unwrap(),
            dim: 3,
            points: vec![],
            rays: vec![],
            cut_rays: BTreeSet::new(),
            activations: vec![],
            boundary_dist: vec![2.0, 4.0, f64::INFINITY],
            parallel_rays: vec![2],
            steps: 0,
            point_index: HashMap::new(),
        };
        let a = sic_from_initial(&coll).unwrap();
        assert_eq!(a, vec![0.5, 0.25, 0.0]);
        assert_eq!(point_depth(&[(0, 2.0)], &a), 0.0);
        let norm = (0.25f64 + 0.0625).sqrt();
        assert!((point_depth(&[(0, 4.0)], &a) - 1.0 / norm).abs() < 1e-12);
        assert_eq!(point_depth(&[(0, 1.0)], &a), 0.0);
        assert_eq!(dynamism(&a), 2.0);
    }

    #[test]
    fn closeness_is_coordinatewise() {
        assert!(sparse_close(&[(1, 1.0)], &[(1, 1.0 + 1e-9)]));
        assert!(!sparse_close(&[(1, 1.0)], &[(2, 1.0)]));
        assert!(sparse_close(&[(1, 1.0), (2, 0.0)], &[(1, 1.0)]));
    }
}
