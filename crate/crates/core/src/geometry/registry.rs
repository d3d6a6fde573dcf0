//! Built-in surfaces and curves addressable by a short text spec such as
//! `"ellipsoid 1.25 1.15 1"` or `"quadric-patch -1 0 -1 2 domain=-0.1,0.1,-0.1,0.1"`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::surface::{Ellipse, Ellipsoid, ParametricCurve, ParametricSurface, QuadricPatch, Rect};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SurfaceSpec {
    Ellipsoid(Ellipsoid),
    QuadricPatch(QuadricPatch),
}

impl SurfaceSpec {
    pub fn build(&self) -> Box<dyn ParametricSurface> {
        match self {
            SurfaceSpec::Ellipsoid(e) => Box::new(*e),
            SurfaceSpec::QuadricPatch(q) => Box::new(*q),
        }
    }

    /// Whether the surface bounds a solid (as opposed to being a patch).
    pub fn is_closed(&self) -> bool {
        matches!(self, SurfaceSpec::Ellipsoid(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CurveSpec {
    Ellipse(Ellipse),
}

impl CurveSpec {
    pub fn build(&self) -> Box<dyn ParametricCurve> {
        match self {
            CurveSpec::Ellipse(e) => Box::new(*e),
        }
    }
}

fn numbers(name: &str, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("{name}: cannot parse '{t}' as a number")))
        })
        .collect()
}

fn positive(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|&x| x > 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name}: parameters must be positive")))
    }
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let Some((&name, rest)) = tokens.split_first() else {
            return Err(Error::InvalidInput("empty surface spec".into()));
        };
        match name {
            "ellipsoid" | "sphere" => {
                let xs = numbers(name, rest)?;
                let (a, b, c) = match (name, xs.as_slice()) {
                    ("ellipsoid", &[a, b, c]) => (a, b, c),
                    ("sphere", &[r]) => (r, r, r),
                    _ => return Err(Error::InvalidInput(format!("{name}: wrong number of parameters"))),
                };
                positive(name, &[a, b, c])?;
                Ok(SurfaceSpec::Ellipsoid(Ellipsoid::new(a, b, c)))
            }
            "quadric-patch" => {
                let (pos, kw): (Vec<&str>, Vec<&str>) = rest.iter().partition(|t| !t.contains('='));
                let xs = numbers(name, &pos)?;
                let &[l, m, n, rho] = xs.as_slice() else {
                    return Err(Error::InvalidInput("quadric-patch: expected L M N rho".into()));
                };
                let mut q = QuadricPatch::graph(l, m, n, rho);
                for item in kw {
                    let (key, value) = item.split_once('=').unwrap_or((item, ""));
                    match key {
                        "E" | "e" => q.e = numbers(name, &[value])?[0],
                        "F" | "f" => q.f = numbers(name, &[value])?[0],
                        "G" | "g" => q.g = numbers(name, &[value])?[0],
                        "domain" => {
                            let parts: Vec<&str> = value.split(',').collect();
                            let &[u1, u2, v1, v2] = numbers(name, &parts)?.as_slice() else {
                                return Err(Error::InvalidInput("quadric-patch: domain=u1,u2,v1,v2".into()));
                            };
                            q.domain = Rect::new(u1, u2, v1, v2);
                        }
                        _ => return Err(Error::InvalidInput(format!("quadric-patch: unknown option '{key}'"))),
                    }
                }
                positive(name, &[rho, q.e, q.g, q.e * q.g - q.f * q.f])?;
                if !q.domain.is_valid() {
                    return Err(Error::InvalidInput("quadric-patch: empty domain".into()));
                }
                Ok(SurfaceSpec::QuadricPatch(q))
            }
            other => Err(Error::InvalidInput(format!("unknown surface '{other}'"))),
        }
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceSpec::Ellipsoid(e) => write!(f, "ellipsoid {} {} {}", e.a, e.b, e.c),
            SurfaceSpec::QuadricPatch(q) => write!(
                f,
                "quadric-patch {} {} {} {} E={} F={} G={} domain={},{},{},{}",
                q.l, q.m, q.n, q.rho, q.e, q.f, q.g, q.domain.u1, q.domain.u2, q.domain.v1, q.domain.v2
            ),
        }
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let Some((&name, rest)) = tokens.split_first() else {
            return Err(Error::InvalidInput("empty curve spec".into()));
        };
        let xs = numbers(name, rest)?;
        let e = match (name, xs.as_slice()) {
            ("ellipse", &[a, b]) => Ellipse::new(a, b),
            ("circle", &[r]) => Ellipse::circle(r),
            ("ellipse" | "circle", _) => return Err(Error::InvalidInput(format!("{name}: wrong number of parameters"))),
            (other, _) => return Err(Error::InvalidInput(format!("unknown curve '{other}'"))),
        };
        positive(name, &[e.a, e.b])?;
        Ok(CurveSpec::Ellipse(e))
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Ellipse(e) => write!(f, "ellipse {} {}", e.a, e.b),
        }
    }
}
