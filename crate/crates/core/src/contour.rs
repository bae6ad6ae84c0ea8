//! Closed contours and their quadrature rules.
//!
//! Weights absorb both the factor `1/(2πi)` and the parametrization derivative,
//! so `Σ w_k f(ζ_k)` approximates `(1/2πi) ∮ f(z) dz` directly.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContourKind {
    Circle {
        center: c64,
        radius: f64,
    },
    Ellipse {
        center: c64,
        semi_axes: (f64, f64),
    },
    /// User-supplied rule. Nodes are taken in order as the vertices of a closed
    /// polygon when deciding membership.
    Custom {
        nodes: Vec<c64>,
        weights: Vec<c64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourQuadrature {
    pub kind: ContourKind,
    pub nodes: Vec<c64>,
    pub weights: Vec<c64>,
}

const BOUNDARY_RTOL: f64 = 1e-12;

pub fn build_contour(kind: ContourKind, n: usize) -> Result<ContourQuadrature> {
    if n < 2 {
        return invalid(format!("quadrature needs at least 2 nodes, got {n}"));
    }
    let (nodes, weights) = match &kind {
        ContourKind::Circle { center, radius } => {
            if !(*radius > 0.0) || !radius.is_finite() {
                return invalid(format!("circle radius must be positive, got {radius}"));
            }
            (1..=n)
                .map(|k| {
                    let e = c64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                    (center + *radius * e, *radius * e / n as f64)
                })
                .unzip()
        }
        ContourKind::Ellipse {
            center,
            semi_axes: (a, b),
        } => {
            if !(*a > 0.0 && *b > 0.0) || !a.is_finite() || !b.is_finite() {
                return invalid(format!(
                    "ellipse semi-axes must be positive, got ({a}, {b})"
                ));
            }
            (1..=n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    let z = center + c64::new(a * t.cos(), b * t.sin());
                    let dz = c64::new(-a * t.sin(), b * t.cos());
                    // dz/dθ · (2π/N) / (2πi)
                    (z, dz / c64::new(0.0, n as f64))
                })
                .unzip()
        }
        ContourKind::Custom { nodes, weights } => {
            if nodes.len() != weights.len() {
                return invalid(format!(
                    "custom contour has {} nodes but {} weights",
                    nodes.len(),
                    weights.len()
                ));
            }
            if nodes.len() != n {
                return invalid(format!(
                    "custom contour has {} nodes, requested {n}",
                    nodes.len()
                ));
            }
            if nodes.len() < 2 {
                return invalid("custom contour needs at least 2 nodes");
            }
            (nodes.clone(), weights.clone())
        }
    };
    Ok(ContourQuadrature {
        kind,
        nodes,
        weights,
    })
}

impl ContourQuadrature {
    pub fn circle(center: c64, radius: f64, n: usize) -> Result<Self> {
        build_contour(ContourKind::Circle { center, radius }, n)
    }

    pub fn ellipse(center: c64, semi_axes: (f64, f64), n: usize) -> Result<Self> {
        build_contour(ContourKind::Ellipse { center, semi_axes }, n)
    }

    /// Same contour with a different node count.
    pub fn with_nodes(&self, n: usize) -> Result<Self> {
        build_contour(self.kind.clone(), n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(ζ_k)` in node order.
    pub fn integrate(&self, f: impl Fn(c64) -> c64) -> c64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(c64::new(0.0, 0.0), |acc, (z, w)| acc + w * f(*z))
    }

    pub fn center(&self) -> c64 {
        match &self.kind {
            ContourKind::Circle { center, .. } | ContourKind::Ellipse { center, .. } => *center,
            ContourKind::Custom { nodes, .. } => nodes.iter().sum::<c64>() / nodes.len() as f64,
        }
    }

    /// Characteristic radius of the enclosed region.
    pub fn scale(&self) -> f64 {
        match &self.kind {
            ContourKind::Circle { radius, .. } => *radius,
            ContourKind::Ellipse {
                semi_axes: (a, b), ..
            } => a.max(*b),
            ContourKind::Custom { nodes, .. } => {
                let c = self.center();
                nodes.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Default exterior expansion point: center shifted by 4/3 of the radius along +Re.
    pub fn default_sigma(&self) -> c64 {
        self.center() + c64::new(4.0 / 3.0 * self.scale(), 0.0)
    }

    pub fn membership(&self, z: c64) -> Membership {
        let d = self.signed_distance(z);
        let tol = BOUNDARY_RTOL * self.scale().max(1.0);
        if d.abs() <= tol {
            Membership::Boundary
        } else if d > 0.0 {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    pub fn contains_closed(&self, z: c64) -> bool {
        self.membership(z) != Membership::Outside
    }

    /// Positive inside, negative outside. Exact for circles and polygons, a
    /// first-order approximation for ellipses.
    pub fn signed_distance(&self, z: c64) -> f64 {
        match &self.kind {
            ContourKind::Circle { center, radius } => radius - (z - center).norm(),
            ContourKind::Ellipse {
                center,
                semi_axes: (a, b),
            } => {
                let d = z - center;
                let q = ((d.re / a).powi(2) + (d.im / b).powi(2)).sqrt();
                if q == 0.0 {
                    return a.min(*b);
                }
                // distance along the ray through the center, scaled by the local radius
                let r_boundary = d.norm() / q;
                r_boundary - d.norm()
            }
            ContourKind::Custom { nodes, .. } => {
                let m = nodes.len();
                let mut dist = f64::INFINITY;
                for k in 0..m {
                    dist = dist.min(segment_distance(z, nodes[k], nodes[(k + 1) % m]));
                }
                if winding_number(nodes, z) != 0 {
                    dist
                } else {
                    -dist
                }
            }
        }
    }

    pub fn min_node_distance(&self, z: c64) -> (usize, f64) {
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, x)| (k, (x - z).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Compact text descriptor used in file headers and summaries.
    pub fn describe(&self) -> String {
        match &self.kind {
            ContourKind::Circle { center, radius } => {
                format!(
                    "circle(center={}{:+}i, radius={}, N={})",
                    center.re,
                    center.im,
                    radius,
                    self.len()
                )
            }
            ContourKind::Ellipse {
                center,
                semi_axes: (a, b),
            } => {
                format!(
                    "ellipse(center={}{:+}i, axes=({a}, {b}), N={})",
                    center.re,
                    center.im,
                    self.len()
                )
            }
            ContourKind::Custom { .. } => format!("custom(N={})", self.len()),
        }
    }
}

fn segment_distance(z: c64, a: c64, b: c64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Winding number of the closed polygon through `vertices` around `z`.
pub fn winding_number(vertices: &[c64], z: c64) -> i64 {
    let m = vertices.len();
    let mut wn = 0i64;
    for k in 0..m {
        let a = vertices[k] - z;
        let b = vertices[(k + 1) % m] - z;
        let cross = a.re * b.im - a.im * b.re;
        if a.im <= 0.0 {
            if b.im > 0.0 && cross > 0.0 {
                wn += 1;
            }
        } else if b.im <= 0.0 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}
