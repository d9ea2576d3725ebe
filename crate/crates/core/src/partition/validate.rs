use std::collections::HashMap;
use std::fmt;

use super::clip::{overlap_area, signed_area, Aabb};
use super::{Partition, Partition1D, Partition2D, DEGENERACY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    EmptyInterval,
    NonIncreasingBreakpoints,
    BreakpointOutsideInterval,
    CellCountMismatch,
    LabelOutOfRange,
    NonFinite,
    VertexOutOfRange,
    DuplicateVertex,
    DegenerateEdge,
    DegenerateCell,
    ClockwiseCell,
    NonConvexCell,
    NonConformingEdge,
    OverlappingCells,
    InvalidLabelSet,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::EmptyInterval => "empty interval",
            Self::NonIncreasingBreakpoints => "non-increasing breakpoints",
            Self::BreakpointOutsideInterval => "breakpoint outside interval",
            Self::CellCountMismatch => "cell count mismatch",
            Self::LabelOutOfRange => "label out of range",
            Self::NonFinite => "non-finite coordinate",
            Self::VertexOutOfRange => "vertex index out of range",
            Self::DuplicateVertex => "duplicate vertex",
            Self::DegenerateEdge => "degenerate edge",
            Self::DegenerateCell => "degenerate cell",
            Self::ClockwiseCell => "clockwise cell",
            Self::NonConvexCell => "non-convex cell",
            Self::NonConformingEdge => "non-conforming edge",
            Self::OverlappingCells => "overlapping cells",
            Self::InvalidLabelSet => "invalid label set",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.detail)
    }
}

/// Outcome of [`Partition::validate`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn push(&mut self, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation { kind, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub(super) fn validate(p: &Partition, label_count: Option<usize>) -> ValidationReport {
    let mut report = ValidationReport::default();
    match p {
        Partition::D1(p) => validate_1d(p, &mut report),
        Partition::D2(p) => validate_2d(p, &mut report),
    }
    if let Some(q) = label_count {
        for (c, &l) in p.cell_labels().iter().enumerate() {
            if l >= q {
                report.push(ViolationKind::LabelOutOfRange, format!("cell {c} has label {l} but q = {q}"));
            }
        }
    }
    report
}

fn validate_1d(p: &Partition1D, report: &mut ValidationReport) {
    let (a, b) = p.interval;
    if !(a.is_finite() && b.is_finite()) || p.breakpoints.iter().any(|x| !x.is_finite()) {
        report.push(ViolationKind::NonFinite, "interval or breakpoints contain non-finite values");
        return;
    }
    if a >= b {
        report.push(ViolationKind::EmptyInterval, format!("({a}, {b})"));
    }
    for w in p.breakpoints.windows(2) {
        if w[1] <= w[0] {
            report.push(ViolationKind::NonIncreasingBreakpoints, format!("{} followed by {}", w[0], w[1]));
        }
    }
    for &x in &p.breakpoints {
        if x <= a || x >= b {
            report.push(ViolationKind::BreakpointOutsideInterval, format!("{x} not in ({a}, {b})"));
        }
    }
    if p.cell_labels.len() != p.breakpoints.len() + 1 {
        report.push(
            ViolationKind::CellCountMismatch,
            format!(
                "{} breakpoints need {} labels, got {}",
                p.breakpoints.len(),
                p.breakpoints.len() + 1,
                p.cell_labels.len()
            ),
        );
    }
}

fn validate_2d(p: &Partition2D, report: &mut ValidationReport) {
    let nv = p.vertices.len();
    if p.vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
        report.push(ViolationKind::NonFinite, "vertex coordinates contain non-finite values");
        return;
    }
    if p.cell_labels.len() != p.cells.len() {
        report.push(
            ViolationKind::CellCountMismatch,
            format!("{} cells but {} labels", p.cells.len(), p.cell_labels.len()),
        );
    }
    if p.cells.is_empty() {
        report.push(ViolationKind::DegenerateCell, "mesh has no cells");
        return;
    }
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    for (i, v) in p.vertices.iter().enumerate() {
        let key = ((v[0] + 0.0).to_bits(), (v[1] + 0.0).to_bits());
        if let Some(j) = seen.insert(key, i) {
            report.push(ViolationKind::DuplicateVertex, format!("vertices {j} and {i} coincide"));
        }
    }
    let mut geometry_ok = true;
    for (c, cell) in p.cells.iter().enumerate() {
        if cell.len() < 3 {
            report.push(ViolationKind::DegenerateCell, format!("cell {c} has {} vertices", cell.len()));
            geometry_ok = false;
            continue;
        }
        if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
            report.push(ViolationKind::VertexOutOfRange, format!("cell {c} references vertex {v}"));
            geometry_ok = false;
            continue;
        }
        let poly = p.cell_polygon(c);
        let n = poly.len();
        for k in 0..n {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            if ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt() <= DEGENERACY_TOL {
                report.push(ViolationKind::DegenerateEdge, format!("cell {c} edge {k}"));
            }
        }
        let area = signed_area(&poly);
        if area.abs() <= DEGENERACY_TOL {
            report.push(ViolationKind::DegenerateCell, format!("cell {c} has area {area:e}"));
            geometry_ok = false;
            continue;
        }
        if area < 0.0 {
            report.push(ViolationKind::ClockwiseCell, format!("cell {c}"));
            geometry_ok = false;
        }
        let scale = Aabb::of(&poly);
        let extent = (scale.hi[0] - scale.lo[0]).max(scale.hi[1] - scale.lo[1]);
        for k in 0..n {
            let (a, b, d) = (poly[k], poly[(k + 1) % n], poly[(k + 2) % n]);
            let cross = (b[0] - a[0]) * (d[1] - b[1]) - (b[1] - a[1]) * (d[0] - b[0]);
            if cross * area.signum() < -DEGENERACY_TOL * extent * extent {
                report.push(
                    ViolationKind::NonConvexCell,
                    format!("cell {c} turns the wrong way at vertex {}", p.cells[c][(k + 1) % n]),
                );
                geometry_ok = false;
                break;
            }
        }
    }
    if !geometry_ok {
        return;
    }
    check_conformity(p, report);
    check_overlaps(p, report);
}

fn check_conformity(p: &Partition2D, report: &mut ValidationReport) {
    let map = p.edge_map();
    let mut keys: Vec<_> = map.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let users = &map[&key];
        match users.len() {
            1 => {
                // a boundary edge must not pass through another vertex (hanging node)
                let (a, b) = (p.vertices[key.0], p.vertices[key.1]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                for (v, pt) in p.vertices.iter().enumerate() {
                    if v == key.0 || v == key.1 {
                        continue;
                    }
                    let t = ((pt[0] - a[0]) * (b[0] - a[0]) + (pt[1] - a[1]) * (b[1] - a[1])) / (len * len);
                    if t <= 0.0 || t >= 1.0 {
                        continue;
                    }
                    let dist = ((pt[0] - a[0]) * (b[1] - a[1]) - (pt[1] - a[1]) * (b[0] - a[0])).abs() / len;
                    if dist <= DEGENERACY_TOL * len.max(1.0) {
                        report.push(
                            ViolationKind::NonConformingEdge,
                            format!("vertex {v} lies inside edge ({}, {}) of cell {}", key.0, key.1, users[0].0),
                        );
                    }
                }
            }
            2 => {
                if p.edge(users[0].0, users[0].1) == p.edge(users[1].0, users[1].1) {
                    report.push(
                        ViolationKind::NonConformingEdge,
                        format!(
                            "cells {} and {} traverse edge ({}, {}) in the same direction",
                            users[0].0, users[1].0, key.0, key.1
                        ),
                    );
                }
            }
            n => report
                .push(ViolationKind::NonConformingEdge, format!("edge ({}, {}) is shared by {n} cells", key.0, key.1)),
        }
    }
}

fn check_overlaps(p: &Partition2D, report: &mut ValidationReport) {
    let polys: Vec<_> = (0..p.cells.len()).map(|c| p.cell_polygon(c)).collect();
    let boxes: Vec<Aabb> = polys.iter().map(|q| Aabb::of(q)).collect();
    let mut order: Vec<usize> = (0..polys.len()).collect();
    order.sort_by(|&a, &b| boxes[a].lo[0].total_cmp(&boxes[b].lo[0]));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if boxes[b].lo[0] > boxes[a].hi[0] {
                break;
            }
            if !boxes[a].overlaps(&boxes[b]) {
                continue;
            }
            let area = overlap_area(&polys[a], &polys[b]);
            if area > DEGENERACY_TOL {
                let (lo, hi) = (a.min(b), a.max(b));
                report.push(ViolationKind::OverlappingCells, format!("cells {lo} and {hi} overlap by {area:e}"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_breakpoint() {
        let p = Partition::D1(Partition1D::from_parts_unchecked((0.0, 1.0), vec![0.5, 0.5], vec![0, 1, 0]));
        let r = p.validate(2);
        assert!(r.has(ViolationKind::NonIncreasingBreakpoints));
        assert!(r.to_string().contains("non-increasing breakpoints"));
    }

    #[test]
    fn t_junction_is_non_conforming() {
        // left cell spans the whole left edge x=1 while the right side is split at (1, 0.5)
        let p = Partition::D2(Partition2D::from_parts_unchecked(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.5], [2.0, 0.0], [2.0, 0.5], [2.0, 1.0]],
            vec![vec![0, 1, 2, 3], vec![1, 5, 6, 4], vec![4, 6, 7, 2]],
            vec![0, 1, 1],
        ));
        let r = p.validate(2);
        assert!(r.has(ViolationKind::NonConformingEdge), "{r}");
    }

    #[test]
    fn three_cells_on_one_edge() {
        let p = Partition::D2(Partition2D::from_parts_unchecked(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]],
            vec![vec![0, 1, 2], vec![1, 0, 3], vec![0, 1, 4]],
            vec![0, 1, 0],
        ));
        let r = p.validate(2);
        assert!(r.has(ViolationKind::NonConformingEdge));
        assert!(r.has(ViolationKind::OverlappingCells));
    }

    #[test]
    fn shape_defects() {
        let clockwise = Partition::D2(Partition2D::from_parts_unchecked(
            vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
            vec![vec![0, 1, 2, 3]],
            vec![0],
        ));
        assert!(clockwise.validate(1).has(ViolationKind::ClockwiseCell));
        let dart = Partition::D2(Partition2D::from_parts_unchecked(
            vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 2.0]],
            vec![vec![0, 2, 1, 3]],
            vec![0],
        ));
        assert!(!dart.validate(1).is_ok());
        let flat = Partition::D2(Partition2D::from_parts_unchecked(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![vec![0, 1, 2]],
            vec![0],
        ));
        assert!(flat.validate(1).has(ViolationKind::DegenerateCell));
    }

    #[test]
    fn labels_checked_against_count() {
        let p = Partition::D1(Partition1D::from_parts_unchecked((0.0, 1.0), vec![0.5], vec![0, 4]));
        assert!(p.validate(2).has(ViolationKind::LabelOutOfRange));
        assert!(p.validate(5).is_ok());
    }
}
