//! Piecewise-constant label fields on intervals and convex polygonal meshes.
//!
//! A partition stores one label index per cell. The jump set is the finite
//! union of interior interfaces between differently labelled cells, reported
//! per mesh edge (2D) or per breakpoint (1D). Edges on `∂Ω` are never part of
//! the jump set.

pub mod clip;
pub mod io;
mod validate;

use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{domain, Error, Result};
use crate::labels::{euclidean, LabelSet};
use crate::quadrature::UnitRule;
use clip::{overlap_area, signed_area, Aabb, Point};

pub use validate::{ValidationReport, Violation, ViolationKind};

/// Cells with area and edges with length at or below this are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance used when two L¹ operands must cover the same domain.
const DOMAIN_MATCH_TOL: f64 = 1e-9;

/// A label field on an open interval `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    interval: (f64, f64),
    breakpoints: Vec<f64>,
    cell_labels: Vec<usize>,
}

impl Partition1D {
    pub fn new(interval: (f64, f64), breakpoints: Vec<f64>, cell_labels: Vec<usize>) -> Result<Self> {
        let p = Self::from_parts_unchecked(interval, breakpoints, cell_labels);
        Partition::D1(p.clone()).structural_check()?;
        Ok(p)
    }

    /// Builds without checking; run [`Partition::validate`] before trusting it.
    pub fn from_parts_unchecked(interval: (f64, f64), breakpoints: Vec<f64>, cell_labels: Vec<usize>) -> Self {
        Self { interval, breakpoints, cell_labels }
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cell_labels(&self) -> &[usize] {
        &self.cell_labels
    }

    pub fn cell(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { self.interval.0 } else { self.breakpoints[k - 1] };
        let hi = if k == self.breakpoints.len() { self.interval.1 } else { self.breakpoints[k] };
        (lo, hi)
    }

    pub fn cell_count(&self) -> usize {
        self.cell_labels.len()
    }

    /// Merges adjacent cells carrying the same label.
    pub fn normalized(&self) -> Self {
        let mut breakpoints = Vec::new();
        let mut cell_labels = vec![self.cell_labels[0]];
        for (k, &b) in self.breakpoints.iter().enumerate() {
            let next = self.cell_labels[k + 1];
            if next != *cell_labels.last().unwrap() {
                breakpoints.push(b);
                cell_labels.push(next);
            }
        }
        Self { interval: self.interval, breakpoints, cell_labels }
    }

    fn facets(&self) -> Vec<JumpFacet> {
        let mut out = Vec::new();
        for (k, &b) in self.breakpoints.iter().enumerate() {
            let (left, right) = (self.cell_labels[k], self.cell_labels[k + 1]);
            if left == right {
                continue;
            }
            // ν points into the side carrying the smaller index
            let (plus, minus, nu) = if left < right { (left, right, -1.0) } else { (right, left, 1.0) };
            out.push(JumpFacet { carrier: FacetCarrier::Point(b), measure: 1.0, plus, minus, normal: vec![nu] });
        }
        out
    }

    fn label_at_cell_sides(&self, label: usize) -> Vec<(usize, usize, f64)> {
        // (own label, neighbour label, measure) for every interior side of a cell with `label`
        let mut out = Vec::new();
        for (k, &l) in self.cell_labels.iter().enumerate() {
            if l != label {
                continue;
            }
            if k > 0 {
                out.push((l, self.cell_labels[k - 1], 1.0));
            }
            if k < self.breakpoints.len() {
                out.push((l, self.cell_labels[k + 1], 1.0));
            }
        }
        out
    }

    fn l1_distance(&self, other: &Self, labels: &LabelSet) -> Result<f64> {
        if self.interval != other.interval {
            return Err(domain(format!("L¹ distance between fields on {:?} and {:?}", self.interval, other.interval)));
        }
        let mut cuts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let (mut i, mut j) = (0usize, 0usize);
        let mut lo = self.interval.0;
        let mut acc = 0.0;
        for hi in cuts.into_iter().chain(std::iter::once(self.interval.1)) {
            // advance to the cells containing (lo, hi)
            while i < self.breakpoints.len() && self.breakpoints[i] <= lo {
                i += 1;
            }
            while j < other.breakpoints.len() && other.breakpoints[j] <= lo {
                j += 1;
            }
            let (a, b) = (self.cell_labels[i], other.cell_labels[j]);
            if a != b {
                acc += labels.distance(a, b) * (hi - lo);
            }
            lo = hi;
        }
        Ok(acc)
    }
}

/// A label field on a conforming mesh of counter-clockwise convex polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition2D {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    cell_labels: Vec<usize>,
}

type EdgeMap = HashMap<(usize, usize), Vec<(usize, usize)>>;

impl Partition2D {
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>, cell_labels: Vec<usize>) -> Result<Self> {
        let p = Self::from_parts_unchecked(vertices, cells, cell_labels);
        Partition::D2(p.clone()).structural_check()?;
        Ok(p)
    }

    /// Builds without checking; run [`Partition::validate`] before trusting it.
    pub fn from_parts_unchecked(vertices: Vec<Point>, cells: Vec<Vec<usize>>, cell_labels: Vec<usize>) -> Self {
        Self { vertices, cells, cell_labels }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_labels(&self) -> &[usize] {
        &self.cell_labels
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_polygon(&self, k: usize) -> Vec<Point> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, k: usize) -> f64 {
        signed_area(&self.cell_polygon(k))
    }

    fn edge_map(&self) -> EdgeMap {
        let mut map: EdgeMap = HashMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            let n = cell.len();
            for k in 0..n {
                let (a, b) = (cell[k], cell[(k + 1) % n]);
                map.entry((a.min(b), a.max(b))).or_default().push((c, k));
            }
        }
        map
    }

    fn edge(&self, c: usize, k: usize) -> (usize, usize) {
        let cell = &self.cells[c];
        (cell[k], cell[(k + 1) % cell.len()])
    }

    /// Neighbour across local edge `k` of cell `c`, if the edge is interior.
    fn neighbour(&self, map: &EdgeMap, c: usize, k: usize) -> Result<Option<usize>> {
        let (a, b) = self.edge(c, k);
        let users = &map[&(a.min(b), a.max(b))];
        match users.len() {
            1 => Ok(None),
            2 => {
                let other = if users[0] == (c, k) { users[1] } else { users[0] };
                if self.edge(other.0, other.1) == (a, b) {
                    return Err(Error::Structural(format!(
                        "cells {c} and {} traverse edge ({a},{b}) in the same direction",
                        other.0
                    )));
                }
                Ok(Some(other.0))
            }
            n => Err(Error::Structural(format!("edge ({a},{b}) is shared by {n} cells"))),
        }
    }

    fn facets(&self) -> Result<Vec<JumpFacet>> {
        let map = self.edge_map();
        let mut out = Vec::new();
        for c in 0..self.cells.len() {
            for k in 0..self.cells[c].len() {
                let Some(other) = self.neighbour(&map, c, k)? else { continue };
                if other < c {
                    continue;
                }
                let (lc, lo) = (self.cell_labels[c], self.cell_labels[other]);
                if lc == lo {
                    continue;
                }
                let (a, b) = self.edge(c, k);
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                let len = euclidean(&pa, &pb);
                let outward = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                let (plus, minus, normal) =
                    if lc < lo { (lc, lo, vec![-outward[0], -outward[1]]) } else { (lo, lc, outward.to_vec()) };
                out.push(JumpFacet { carrier: FacetCarrier::Segment(pa, pb), measure: len, plus, minus, normal });
            }
        }
        Ok(out)
    }

    fn label_at_cell_sides(&self, label: usize) -> Result<Vec<(usize, usize, f64)>> {
        let map = self.edge_map();
        let mut out = Vec::new();
        for c in 0..self.cells.len() {
            if self.cell_labels[c] != label {
                continue;
            }
            for k in 0..self.cells[c].len() {
                if let Some(other) = self.neighbour(&map, c, k)? {
                    let (a, b) = self.edge(c, k);
                    out.push((label, self.cell_labels[other], euclidean(&self.vertices[a], &self.vertices[b])));
                }
            }
        }
        Ok(out)
    }

    fn same_mesh(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.cells == other.cells
    }

    fn l1_distance(&self, other: &Self, labels: &LabelSet) -> Result<f64> {
        if self.same_mesh(other) {
            return Ok((0..self.cells.len())
                .map(|c| {
                    let (a, b) = (self.cell_labels[c], other.cell_labels[c]);
                    if a == b {
                        0.0
                    } else {
                        labels.distance(a, b) * self.cell_area(c)
                    }
                })
                .sum());
        }
        let left: Vec<Vec<Point>> = (0..self.cells.len()).map(|c| self.cell_polygon(c)).collect();
        let right: Vec<Vec<Point>> = (0..other.cells.len()).map(|c| other.cell_polygon(c)).collect();
        let right_boxes: Vec<Aabb> = right.iter().map(|p| Aabb::of(p)).collect();
        let per_cell: Vec<(f64, f64)> = left
            .par_iter()
            .enumerate()
            .map(|(c, poly)| {
                let bb = Aabb::of(poly);
                let mut covered = 0.0;
                let mut gap = 0.0;
                for (d, other_poly) in right.iter().enumerate() {
                    if !bb.overlaps(&right_boxes[d]) {
                        continue;
                    }
                    let area = overlap_area(poly, other_poly);
                    covered += area;
                    let (a, b) = (self.cell_labels[c], other.cell_labels[d]);
                    if a != b {
                        gap += labels.distance(a, b) * area;
                    }
                }
                (covered, gap)
            })
            .collect();
        let covered: f64 = per_cell.iter().map(|p| p.0).sum();
        let gap: f64 = per_cell.iter().map(|p| p.1).sum();
        let (area_l, area_r) = (self.area(), other.area());
        let scale = area_l.max(area_r).max(1.0);
        if (covered - area_l).abs() > DOMAIN_MATCH_TOL * scale || (covered - area_r).abs() > DOMAIN_MATCH_TOL * scale {
            return Err(domain(format!(
                "meshes cover different domains (areas {area_l}, {area_r}, overlap {covered})"
            )));
        }
        Ok(gap)
    }

    pub fn area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Conforming refinement: every edge is split at its midpoint and every
    /// cell is cut into quads around its vertex centroid.
    pub fn refined(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::new();
        let mut cell_labels = Vec::new();
        for (c, cell) in self.cells.iter().enumerate() {
            let n = cell.len();
            let mut mids = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (cell[k], cell[(k + 1) % n]);
                let idx = *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (pa, pb) = (self.vertices[a], self.vertices[b]);
                    vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                    vertices.len() - 1
                });
                mids.push(idx);
            }
            let centre = cell.iter().fold([0.0, 0.0], |acc, &v| {
                [acc[0] + self.vertices[v][0] / n as f64, acc[1] + self.vertices[v][1] / n as f64]
            });
            vertices.push(centre);
            let ci = vertices.len() - 1;
            for k in 0..n {
                cells.push(vec![cell[k], mids[k], ci, mids[(k + n - 1) % n]]);
                cell_labels.push(self.cell_labels[c]);
            }
        }
        Self { vertices, cells, cell_labels }
    }
}

/// A piecewise-constant field with values indexed into a [`LabelSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    D1(Partition1D),
    D2(Partition2D),
}

impl From<Partition1D> for Partition {
    fn from(p: Partition1D) -> Self {
        Partition::D1(p)
    }
}

impl From<Partition2D> for Partition {
    fn from(p: Partition2D) -> Self {
        Partition::D2(p)
    }
}

/// Axis-aligned box enclosing `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// `sup |x_1|` over the box.
    pub fn max_abs_first(&self) -> f64 {
        self.lo[0].abs().max(self.hi[0].abs())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

impl Partition {
    pub fn dim(&self) -> usize {
        match self {
            Partition::D1(_) => 1,
            Partition::D2(_) => 2,
        }
    }

    pub fn cell_labels(&self) -> &[usize] {
        match self {
            Partition::D1(p) => p.cell_labels(),
            Partition::D2(p) => p.cell_labels(),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cell_labels().len()
    }

    /// Lebesgue measure of `Ω`.
    pub fn domain_measure(&self) -> f64 {
        match self {
            Partition::D1(p) => p.interval.1 - p.interval.0,
            Partition::D2(p) => p.area(),
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        match self {
            Partition::D1(p) => BoundingBox { lo: vec![p.interval.0], hi: vec![p.interval.1] },
            Partition::D2(p) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for cell in &p.cells {
                    for &v in cell {
                        for c in 0..2 {
                            lo[c] = lo[c].min(p.vertices[v][c]);
                            hi[c] = hi[c].max(p.vertices[v][c]);
                        }
                    }
                }
                BoundingBox { lo, hi }
            }
        }
    }

    /// Checks every invariant, including label indices against `label_count`.
    pub fn validate(&self, label_count: usize) -> ValidationReport {
        validate::validate(self, Some(label_count))
    }

    fn structural_check(&self) -> Result<()> {
        let report = validate::validate(self, None);
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Structural(report.to_string()))
        }
    }

    /// The jump set `S_u ∩ Ω` as canonically oriented facets.
    pub fn jump_set(&self) -> Result<Vec<JumpFacet>> {
        match self {
            Partition::D1(p) => Ok(p.facets()),
            Partition::D2(p) => p.facets(),
        }
    }

    /// `H^{d−1}(S_u ∩ Ω)`.
    pub fn perimeter(&self) -> Result<f64> {
        Ok(self.jump_set()?.iter().map(|f| f.measure).sum())
    }

    fn cell_sides(&self, label: usize) -> Result<Vec<(usize, usize, f64)>> {
        match self {
            Partition::D1(p) => Ok(p.label_at_cell_sides(label)),
            Partition::D2(p) => p.label_at_cell_sides(label),
        }
    }

    /// `H^{d−1}(F E_i ∩ Ω)` for the level set `E_i = {u = z_i}`, gathered from
    /// the boundaries of the cells carrying label `i`.
    pub fn reduced_boundary_measure(&self, label: usize, labels: &LabelSet) -> Result<f64> {
        labels.check_index(label)?;
        Ok(self.cell_sides(label)?.iter().filter(|s| s.1 != label).map(|s| s.2).sum())
    }

    /// Matrix of `H^{d−1}(F E_i ∩ F E_j ∩ Ω)`, symmetric with zero diagonal.
    pub fn interface_measures(&self, labels: &LabelSet) -> Result<Vec<Vec<f64>>> {
        let q = labels.len();
        let mut out = vec![vec![0.0; q]; q];
        for i in 0..q {
            for (own, other, m) in self.cell_sides(i)? {
                if other != own {
                    if other >= q {
                        return Err(domain(format!("cell label {other} out of range for q = {q}")));
                    }
                    out[own][other] += m;
                }
            }
        }
        Ok(out)
    }

    /// `|Du|(Ω) = Σ_facets |z⁺ − z⁻| · H^{d−1}(facet)`.
    pub fn total_variation(&self, labels: &LabelSet) -> Result<f64> {
        let facets = self.jump_set()?;
        for f in &facets {
            labels.check_index(f.minus)?;
        }
        Ok(facets.iter().map(|f| labels.distance(f.plus, f.minus) * f.measure).sum())
    }

    /// `½ Σ_i Σ_{j≠i} |z_i − z_j| H^{d−1}(F E_i ∩ F E_j ∩ Ω)`.
    pub fn total_variation_pairwise(&self, labels: &LabelSet) -> Result<f64> {
        let h = self.interface_measures(labels)?;
        let mut acc = 0.0;
        for (i, row) in h.iter().enumerate() {
            for (j, hij) in row.iter().enumerate() {
                if i != j {
                    acc += labels.distance(i, j) * hij;
                }
            }
        }
        Ok(0.5 * acc)
    }

    /// `½ Σ_i H^{d−1}(F E_i ∩ Ω)`.
    pub fn perimeter_half_sum(&self, labels: &LabelSet) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..labels.len() {
            acc += self.reduced_boundary_measure(i, labels)?;
        }
        Ok(0.5 * acc)
    }

    /// `∫_Ω |u − v| dx`, exact: per-cell on a shared mesh, otherwise by
    /// breakpoint merging (1D) or convex clipping overlay (2D).
    pub fn l1_distance(&self, other: &Partition, labels: &LabelSet) -> Result<f64> {
        for l in self.cell_labels().iter().chain(other.cell_labels()) {
            labels.check_index(*l)?;
        }
        match (self, other) {
            (Partition::D1(a), Partition::D1(b)) => a.l1_distance(b, labels),
            (Partition::D2(a), Partition::D2(b)) => a.l1_distance(b, labels),
            _ => Err(domain("L¹ distance between partitions of different dimension")),
        }
    }

    /// Finer mesh carrying the same labelled regions.
    pub fn refined(&self) -> Partition {
        match self {
            Partition::D1(p) => {
                let mut breakpoints = Vec::new();
                let mut cell_labels = Vec::new();
                for k in 0..p.cell_count() {
                    let (lo, hi) = p.cell(k);
                    if k > 0 {
                        breakpoints.push(lo);
                    }
                    breakpoints.push(0.5 * (lo + hi));
                    cell_labels.extend([p.cell_labels[k]; 2]);
                }
                Partition::D1(Partition1D { interval: p.interval, breakpoints, cell_labels })
            }
            Partition::D2(p) => Partition::D2(p.refined()),
        }
    }
}

/// Geometric support of one facet.
#[derive(Debug, Clone, PartialEq)]
pub enum FacetCarrier {
    Point(f64),
    Segment(Point, Point),
}

/// One connected piece of the jump set with its traces and normal.
///
/// Canonical orientation: `plus < minus` and `normal` points from the
/// `minus` side into the `plus` side.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpFacet {
    pub carrier: FacetCarrier,
    pub measure: f64,
    pub plus: usize,
    pub minus: usize,
    pub normal: Vec<f64>,
}

impl JumpFacet {
    /// The same facet described by the other admissible triple `(b, a, −ν)`.
    pub fn flipped(&self) -> Self {
        Self {
            carrier: self.carrier.clone(),
            measure: self.measure,
            plus: self.minus,
            minus: self.plus,
            normal: self.normal.iter().map(|v| -v).collect(),
        }
    }

    /// Quadrature points on the facet with weights summing to its measure.
    pub fn quadrature(&self, rule: &UnitRule) -> Vec<(Vec<f64>, f64)> {
        match &self.carrier {
            FacetCarrier::Point(x) => vec![(vec![*x], 1.0)],
            FacetCarrier::Segment(a, b) => rule
                .points()
                .iter()
                .map(|&(t, w)| (vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * self.measure))
                .collect(),
        }
    }
}
