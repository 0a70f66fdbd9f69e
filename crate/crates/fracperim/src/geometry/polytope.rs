//! Polytope-specific machinery: representation building, simplicial
//! volume/barycenter decomposition, vertex diameters and hyperplane slicing.

use super::{ConvexBody, Diameter, Shape, GEOM_TOL};
use crate::error::{Error, Result};
use crate::math::Vector;
use alloc::vec::Vec;

/// Halfspace {x : normal . x <= offset} with |normal| = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

/// Build matching H/V representations of a convex polygon given its
/// vertices in arbitrary order.
pub fn polygon_reps(vertices: &[Vector]) -> Result<(Vec<Halfspace>, Vec<Vector>)> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateBody("polygon needs at least 3 vertices".into()));
    }
    if vertices.iter().any(|v| v.dim() != 2) {
        return Err(Error::InvalidParameter("polygon vertices must be 2-dimensional".into()));
    }
    let mut ctr = Vector::zeros(2);
    for v in vertices {
        ctr = ctr.add(v);
    }
    let ctr = ctr.scale(1.0 / vertices.len() as f64);
    let mut ordered: Vec<Vector> = vertices.to_vec();
    ordered.sort_by(|a, b| {
        let aa = libm::atan2(a.coord(1) - ctr.coord(1), a.coord(0) - ctr.coord(0));
        let ab = libm::atan2(b.coord(1) - ctr.coord(1), b.coord(0) - ctr.coord(0));
        aa.partial_cmp(&ab).unwrap_or(core::cmp::Ordering::Equal)
    });
    let m = ordered.len();
    let mut hs = Vec::with_capacity(m);
    for i in 0..m {
        let a = ordered[i];
        let b = ordered[(i + 1) % m];
        let e = b.sub(&a);
        if e.norm() < 1e-14 {
            return Err(Error::DegenerateBody("duplicate polygon vertices".into()));
        }
        // outward normal for counter-clockwise ordering
        let nrm = Vector::new(&[e.coord(1), -e.coord(0)]).unit()?;
        let mut nrm = nrm;
        let mut off = nrm.dot(&a);
        if nrm.dot(&ctr) > off {
            nrm = nrm.scale(-1.0);
            off = -off;
        }
        hs.push(Halfspace { normal: nrm, offset: off });
    }
    Ok((hs, ordered))
}

/// H/V representations of the simplex conv{v0..v3} in R^3.
pub fn simplex_3d_reps(verts: &[Vector; 4]) -> Result<(Vec<Halfspace>, Vec<Vector>)> {
    let mut hs = Vec::with_capacity(4);
    for drop in 0..4 {
        let face: Vec<Vector> = (0..4).filter(|&i| i != drop).map(|i| verts[i]).collect();
        let e1 = face[1].sub(&face[0]);
        let e2 = face[2].sub(&face[0]);
        let nrm = Vector::new(&[
            e1.coord(1) * e2.coord(2) - e1.coord(2) * e2.coord(1),
            e1.coord(2) * e2.coord(0) - e1.coord(0) * e2.coord(2),
            e1.coord(0) * e2.coord(1) - e1.coord(1) * e2.coord(0),
        ]);
        if nrm.norm() < 1e-14 {
            return Err(Error::DegenerateBody("flat simplex".into()));
        }
        let mut nrm = nrm.unit()?;
        let mut off = nrm.dot(&face[0]);
        if nrm.dot(&verts[drop]) > off {
            nrm = nrm.scale(-1.0);
            off = -off;
        }
        hs.push(Halfspace { normal: nrm, offset: off });
    }
    Ok((hs, verts.to_vec()))
}

/// Exact volume and barycenter by simplicial decomposition from an interior
/// point (fan for polygons, per-face fans of tetrahedra in R^3, interval in R^1).
pub fn volume_barycenter(body: &ConvexBody) -> Result<(f64, Vector)> {
    let (halfspaces, vertices) = match body.shape() {
        Shape::Polytope { halfspaces, vertices } => (halfspaces, vertices),
        _ => return Err(Error::InvalidParameter("not a polytope".into())),
    };
    let n = body.dim();
    match n {
        1 => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in vertices {
                lo = lo.min(v.coord(0));
                hi = hi.max(v.coord(0));
            }
            Ok((hi - lo, Vector::new(&[0.5 * (lo + hi)])))
        }
        2 => {
            // vertices are hull-ordered by construction
            let m = vertices.len();
            let mut area2 = 0.0;
            let mut cx = 0.0;
            let mut cy = 0.0;
            for i in 0..m {
                let a = vertices[i];
                let b = vertices[(i + 1) % m];
                let cross = a.coord(0) * b.coord(1) - b.coord(0) * a.coord(1);
                area2 += cross;
                cx += (a.coord(0) + b.coord(0)) * cross;
                cy += (a.coord(1) + b.coord(1)) * cross;
            }
            let area = 0.5 * area2.abs();
            if area <= 0.0 {
                return Err(Error::DegenerateBody("zero polygon area".into()));
            }
            Ok((area, Vector::new(&[cx / (3.0 * area2), cy / (3.0 * area2)])))
        }
        3 => {
            let mut apex = Vector::zeros(3);
            for v in vertices {
                apex = apex.add(v);
            }
            let apex = apex.scale(1.0 / vertices.len() as f64);
            let tol = GEOM_TOL * body.scale_hint().max(1.0);
            let mut vol = 0.0;
            let mut cen = Vector::zeros(3);
            for h in halfspaces {
                let face: Vec<Vector> = vertices
                    .iter()
                    .copied()
                    .filter(|v| (h.normal.dot(v) - h.offset).abs() <= tol)
                    .collect();
                if face.len() < 3 {
                    continue;
                }
                // order face vertices around their mean in the face plane
                let basis = crate::math::orthonormal_complement(&h.normal);
                let mut fc = Vector::zeros(3);
                for v in &face {
                    fc = fc.add(v);
                }
                let fc = fc.scale(1.0 / face.len() as f64);
                let mut keyed: Vec<(f64, Vector)> = face
                    .iter()
                    .map(|v| {
                        let d = v.sub(&fc);
                        (libm::atan2(d.dot(&basis[1]), d.dot(&basis[0])), *v)
                    })
                    .collect();
                keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
                for i in 1..keyed.len() - 1 {
                    let (a, b, c) = (keyed[0].1, keyed[i].1, keyed[i + 1].1);
                    let u = a.sub(&apex);
                    let v = b.sub(&apex);
                    let w = c.sub(&apex);
                    let det = u.coord(0) * (v.coord(1) * w.coord(2) - v.coord(2) * w.coord(1))
                        - u.coord(1) * (v.coord(0) * w.coord(2) - v.coord(2) * w.coord(0))
                        + u.coord(2) * (v.coord(0) * w.coord(1) - v.coord(1) * w.coord(0));
                    let tv = det.abs() / 6.0;
                    if tv > 0.0 {
                        let tc = a.add(&b).add(&c).add(&apex).scale(0.25);
                        vol += tv;
                        cen = cen.add(&tc.scale(tv));
                    }
                }
            }
            if vol <= 0.0 {
                return Err(Error::DegenerateBody("zero polytope volume".into()));
            }
            Ok((vol, cen.scale(1.0 / vol)))
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Exhaustive max pairwise vertex distance with the achieving pair.
pub fn vertex_diameter(vertices: &[Vector]) -> Diameter {
    let mut best = Diameter {
        length: 0.0,
        x0: vertices[0],
        x1: vertices[0],
    };
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let d = vertices[i].dist(&vertices[j]);
            if d > best.length {
                best = Diameter {
                    length: d,
                    x0: vertices[i],
                    x1: vertices[j],
                };
            }
        }
    }
    best
}

/// Slice a polytope by the hyperplane through `xt` spanned by `basis`
/// (orthonormal, dim-1 vectors). Returns a body of dimension dim-1;
/// empty slices are a valid result.
pub fn slice_polytope(
    halfspaces: &[Halfspace],
    dim: usize,
    xt: &Vector,
    basis: &[Vector],
) -> Result<ConvexBody> {
    let m = dim - 1;
    // restricted constraints: g . y <= r
    let mut gs: Vec<(Vector, f64)> = Vec::new();
    let mut scale: f64 = 1.0;
    for h in halfspaces {
        let mut g = Vector::zeros(m);
        for (i, b) in basis.iter().enumerate() {
            g.set(i, h.normal.dot(b));
        }
        let r = h.offset - h.normal.dot(xt);
        scale = scale.max(r.abs());
        if g.norm() < 1e-12 {
            if r < -GEOM_TOL * scale {
                return Ok(ConvexBody::empty(m));
            }
            continue;
        }
        let gn = g.norm();
        gs.push((g.scale(1.0 / gn), r / gn));
    }
    match m {
        1 => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (g, r) in &gs {
                if g.coord(0) > 0.0 {
                    hi = hi.min(r / g.coord(0));
                } else {
                    lo = lo.max(r / g.coord(0));
                }
            }
            if !(hi - lo > GEOM_TOL * scale.max(1.0) * 1e-3) || !lo.is_finite() || !hi.is_finite() {
                return Ok(ConvexBody::empty(1));
            }
            ConvexBody::cuboid(Vector::new(&[0.5 * (lo + hi)]), Vector::new(&[0.5 * (hi - lo)]))
        }
        2 => {
            // vertex enumeration from pairwise intersections
            let tol = GEOM_TOL * scale.max(1.0);
            let mut pts: Vec<Vector> = Vec::new();
            for i in 0..gs.len() {
                for j in i + 1..gs.len() {
                    let (a, ra) = &gs[i];
                    let (b, rb) = &gs[j];
                    let det = a.coord(0) * b.coord(1) - a.coord(1) * b.coord(0);
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (ra * b.coord(1) - rb * a.coord(1)) / det;
                    let y = (a.coord(0) * rb - b.coord(0) * ra) / det;
                    let p = Vector::new(&[x, y]);
                    if gs
                        .iter()
                        .all(|(g, r)| g.dot(&p) <= r + 10.0 * tol)
                    {
                        if pts.iter().all(|q| q.dist(&p) > 10.0 * tol) {
                            pts.push(p);
                        }
                    }
                }
            }
            if pts.len() < 3 {
                return Ok(ConvexBody::empty(2));
            }
            match ConvexBody::polygon(&pts) {
                Ok(b) => Ok(b),
                Err(_) => Ok(ConvexBody::empty(2)),
            }
        }
        d => Err(Error::UnsupportedDimension(d + 1)),
    }
}
