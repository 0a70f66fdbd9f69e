//! File formats: shape descriptions, radial-set descriptions and family
//! specifications. All parsers reject unknown fields.

use anyhow::{bail, Context};
use fracperim::experiments::{FamilyKind, ShapeFamily};
use fracperim::geometry::ConvexBody;
use fracperim::math::{Matrix, Vector};
use fracperim::spherical::{build_grid, harmonic_u, GridResolution, NearlySphericalSet};
use fracperim::twoball::TwoBallSet;
use serde::{Deserialize, Serialize};

fn to_vector(v: &[f64], dim: usize) -> anyhow::Result<Vector> {
    if v.len() != dim {
        bail!("expected {dim} coordinates, got {}", v.len());
    }
    Ok(Vector::new(v))
}

/// Shape description: {"kind": ..., "dim": n, fields per variant}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        dim: usize,
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        dim: usize,
        center: Vec<f64>,
        semiaxes: Vec<f64>,
        /// Row-major orthogonal matrix; identity when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<Vec<f64>>>,
    },
    Polytope {
        dim: usize,
        vertices: Vec<Vec<f64>>,
    },
    Cuboid {
        dim: usize,
        center: Vec<f64>,
        half_extents: Vec<f64>,
    },
    /// Radial graph over a sphere grid.
    Radial {
        dim: usize,
        grid: GridSpec,
        u: RadialProfile,
    },
    /// Two-ball counterexample configuration.
    TwoBall {
        dim: usize,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        separation: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// n=2: angular node count; n=3: [polar, azimuth].
    pub resolution: ResolutionSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResolutionSpec {
    Angular(usize),
    Product([usize; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialProfile {
    /// Explicit per-node values (length must match the grid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Cosine harmonics [frequency, amplitude] (n = 2 grids).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<Vec<(u32, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

/// A parsed shape ready for evaluation.
pub enum ParsedShape {
    Convex(ConvexBody),
    Radial(NearlySphericalSet),
    TwoBall(TwoBallSet),
}

impl ParsedShape {
    pub fn as_evaluable(&self) -> &dyn fracperim::perimeter::EvaluableSet {
        match self {
            ParsedShape::Convex(b) => b,
            ParsedShape::Radial(r) => r,
            ParsedShape::TwoBall(t) => t,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ParsedShape::Convex(_) => "convex",
            ParsedShape::Radial(_) => "radial",
            ParsedShape::TwoBall(_) => "two_ball",
        }
    }
}

pub fn build_shape(spec: &ShapeSpec) -> anyhow::Result<ParsedShape> {
    match spec {
        ShapeSpec::Ball { dim, center, radius } => Ok(ParsedShape::Convex(
            ConvexBody::ball(to_vector(center, *dim)?, *radius)
                .context("invalid ball")?,
        )),
        ShapeSpec::Ellipsoid { dim, center, semiaxes, rotation } => {
            let rot = match rotation {
                None => Matrix::identity(*dim),
                Some(rows) => {
                    let mut entries = Vec::new();
                    if rows.len() != *dim {
                        bail!("rotation must have {dim} rows");
                    }
                    for row in rows {
                        if row.len() != *dim {
                            bail!("rotation must have {dim} columns");
                        }
                        entries.extend_from_slice(row);
                    }
                    Matrix::from_rows(*dim, &entries)
                }
            };
            Ok(ParsedShape::Convex(
                ConvexBody::ellipsoid(to_vector(center, *dim)?, to_vector(semiaxes, *dim)?, rot)
                    .context("invalid ellipsoid")?,
            ))
        }
        ShapeSpec::Polytope { dim, vertices } => {
            let verts: Vec<Vector> = vertices
                .iter()
                .map(|v| to_vector(v, *dim))
                .collect::<anyhow::Result<_>>()?;
            let body = match *dim {
                2 => ConvexBody::polygon(&verts).context("invalid polygon")?,
                3 => {
                    if verts.len() != 4 {
                        bail!("3-d polytopes are accepted as simplices (4 vertices)");
                    }
                    let arr = [verts[0], verts[1], verts[2], verts[3]];
                    ConvexBody::simplex_3d(&arr).context("invalid simplex")?
                }
                d => bail!("unsupported polytope dimension {d}"),
            };
            Ok(ParsedShape::Convex(body))
        }
        ShapeSpec::Cuboid { dim, center, half_extents } => Ok(ParsedShape::Convex(
            ConvexBody::cuboid(to_vector(center, *dim)?, to_vector(half_extents, *dim)?)
                .context("invalid cuboid")?,
        )),
        ShapeSpec::Radial { dim, grid, u } => {
            let resolution = match (dim, &grid.resolution) {
                (2, ResolutionSpec::Angular(n)) => GridResolution::Angular(*n),
                (3, ResolutionSpec::Product([p, a])) => {
                    GridResolution::Product { polar: *p, azimuth: *a }
                }
                _ => bail!("grid resolution does not match dimension {dim}"),
            };
            let grid = build_grid(*dim, resolution).context("invalid grid")?;
            let raw = match (&u.values, &u.harmonic) {
                (Some(v), None) => v.clone(),
                (None, Some(modes)) => {
                    let phases = u.phases.clone().unwrap_or_default();
                    harmonic_u(&grid, modes, &phases).context("invalid harmonics")?
                }
                _ => bail!("radial profile needs exactly one of `values` or `harmonic`"),
            };
            Ok(ParsedShape::Radial(
                NearlySphericalSet::from_radial_samples(grid, &raw)
                    .context("radial set normalization failed")?,
            ))
        }
        ShapeSpec::TwoBall { dim, eps, separation } => Ok(ParsedShape::TwoBall(
            TwoBallSet::new(*dim, *eps, *separation).context("invalid two-ball config")?,
        )),
    }
}

/// Family specification file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Ellipsoids { dim: usize, eccentricities: Vec<f64> },
    PerturbedBalls {
        dim: usize,
        modes: Vec<(u32, f64)>,
        count: usize,
        seed: u64,
    },
    RegularPolygons { dim: usize, sides: Vec<u32> },
    Cuboids { dim: usize, aspects: Vec<f64> },
    Simplices { dim: usize },
    TwoBall {
        dim: usize,
        eps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        separation: Option<f64>,
    },
    /// The fixed standard convex family used by the stability checks.
    StandardConvex { dim: usize },
}

pub enum ParsedFamily {
    Family(ShapeFamily),
    Standard(usize),
}

pub fn build_family(spec: &FamilySpec) -> anyhow::Result<ParsedFamily> {
    Ok(match spec {
        FamilySpec::Ellipsoids { dim, eccentricities } => ParsedFamily::Family(ShapeFamily {
            kind: FamilyKind::Ellipsoids(eccentricities.clone()),
            dim: *dim,
        }),
        FamilySpec::PerturbedBalls { dim, modes, count, seed } => {
            ParsedFamily::Family(ShapeFamily {
                kind: FamilyKind::PerturbedBalls {
                    modes: modes.clone(),
                    count: *count,
                    seed: *seed,
                },
                dim: *dim,
            })
        }
        FamilySpec::RegularPolygons { dim, sides } => ParsedFamily::Family(ShapeFamily {
            kind: FamilyKind::RegularPolygons(sides.clone()),
            dim: *dim,
        }),
        FamilySpec::Cuboids { dim, aspects } => ParsedFamily::Family(ShapeFamily {
            kind: FamilyKind::Cuboids(aspects.clone()),
            dim: *dim,
        }),
        FamilySpec::Simplices { dim } => {
            ParsedFamily::Family(ShapeFamily { kind: FamilyKind::Simplices, dim: *dim })
        }
        FamilySpec::TwoBall { dim, eps, separation } => ParsedFamily::Family(ShapeFamily {
            kind: FamilyKind::TwoBallCounterexample {
                eps: eps.clone(),
                separation: *separation,
            },
            dim: *dim,
        }),
        FamilySpec::StandardConvex { dim } => ParsedFamily::Standard(*dim),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ball_and_rejects_unknown_fields() {
        let ok: ShapeSpec =
            serde_json::from_str(r#"{"kind":"ball","dim":2,"center":[0,0],"radius":1.0}"#)
                .unwrap();
        assert!(matches!(build_shape(&ok).unwrap(), ParsedShape::Convex(_)));
        let bad = serde_json::from_str::<ShapeSpec>(
            r#"{"kind":"ball","dim":2,"center":[0,0],"radius":1.0,"extra":1}"#,
        );
        assert!(bad.is_err(), "unknown fields must be rejected");
    }

    #[test]
    fn parses_radial_harmonic() {
        let spec: ShapeSpec = serde_json::from_str(
            r#"{"kind":"radial","dim":2,"grid":{"resolution":256},"u":{"harmonic":[[2,0.05]]}}"#,
        )
        .unwrap();
        let shape = build_shape(&spec).unwrap();
        assert_eq!(shape.kind_name(), "radial");
    }

    #[test]
    fn radial_profile_requires_exactly_one_source() {
        let spec: ShapeSpec = serde_json::from_str(
            r#"{"kind":"radial","dim":2,"grid":{"resolution":256},"u":{}}"#,
        )
        .unwrap();
        assert!(build_shape(&spec).is_err());
    }

    #[test]
    fn parses_family_specs() {
        let spec: FamilySpec = serde_json::from_str(
            r#"{"family":"ellipsoids","dim":2,"eccentricities":[0.1,0.2]}"#,
        )
        .unwrap();
        assert!(matches!(build_family(&spec).unwrap(), ParsedFamily::Family(_)));
        let std: FamilySpec =
            serde_json::from_str(r#"{"family":"standard_convex","dim":2}"#).unwrap();
        assert!(matches!(build_family(&std).unwrap(), ParsedFamily::Standard(2)));
    }

    #[test]
    fn parses_polytope_and_two_ball() {
        let spec: ShapeSpec = serde_json::from_str(
            r#"{"kind":"polytope","dim":2,"vertices":[[0,0],[1,0],[0,1]]}"#,
        )
        .unwrap();
        assert!(build_shape(&spec).is_ok());
        let tb: ShapeSpec =
            serde_json::from_str(r#"{"kind":"two_ball","dim":2,"eps":0.1}"#).unwrap();
        assert!(build_shape(&tb).is_ok());
    }
}
