use std::path::PathBuf;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Offsets used when neither `--offsets` nor `--seed` is given: fractional
/// parts of multiples of the plastic number, a badly approximable pair.
pub const DEFAULT_OFFSETS: (f64, f64) = (0.7548776662, 0.5698402910);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetSource {
    Explicit,
    Seeded,
    Default,
}

/// Everything a run depends on; embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<(usize, usize)>,
    pub offsets: (f64, f64),
    pub offset_source: OffsetSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub tol: f64,
    pub origin: [f64; 3],
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let sources = [self.surface.is_some(), self.curve.is_some(), self.mesh.is_some()].iter().filter(|&&b| b).count();
        if sources != 1 {
            bail!("exactly one of --surface, --curve, --mesh is required, got {sources}");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tolerance must be positive, got {}", self.tol);
        }
        for x in [self.offsets.0, self.offsets.1] {
            if !(0.0..1.0).contains(&x) {
                bail!("offsets must lie in [0, 1), got {x}");
            }
        }
        if let Some(n) = self.n {
            if n < 3 {
                return Err(equiflock::Error::TooCoarse { n, min: 3 }.into());
            }
        }
        if let Some((a, b)) = self.n_range {
            if a < 3 {
                return Err(equiflock::Error::TooCoarse { n: a, min: 3 }.into());
            }
            if b < a {
                bail!("empty resolution range {a}..={b}");
            }
        }
        if !self.origin.iter().all(|c| c.is_finite()) {
            bail!("origin must be finite");
        }
        Ok(())
    }
}

/// Offsets from `--offsets`, else drawn from `--seed`, else the default pair.
pub fn resolve_offsets(explicit: &[f64], seed: Option<u64>) -> Result<((f64, f64), OffsetSource)> {
    match (explicit, seed) {
        ([a], _) => Ok(((*a, *a), OffsetSource::Explicit)),
        ([a, b], _) => Ok(((*a, *b), OffsetSource::Explicit)),
        ([], Some(s)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            Ok(((rng.gen(), rng.gen()), OffsetSource::Seeded))
        }
        ([], None) => Ok((DEFAULT_OFFSETS, OffsetSource::Default)),
        _ => bail!("--offsets takes one or two values"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            command: "analyze-surface".into(),
            surface: Some("sphere 1".into()),
            curve: None,
            mesh: None,
            n: Some(10),
            n_range: None,
            offsets: DEFAULT_OFFSETS,
            offset_source: OffsetSource::Default,
            k: Some(3),
            tol: 1e-10,
            origin: [0.0; 3],
            out: "out".into(),
            seed: None,
        }
    }

    #[test]
    fn validation() {
        base().validate().unwrap();
        let mut c = base();
        c.curve = Some("circle 1".into());
        assert!(c.validate().is_err());
        let mut c = base();
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.n = Some(2);
        assert!(c.validate().unwrap_err().to_string().contains("n too small"));
    }

    #[test]
    fn offsets() {
        assert_eq!(resolve_offsets(&[], None).unwrap(), (DEFAULT_OFFSETS, OffsetSource::Default));
        assert_eq!(resolve_offsets(&[0.25, 0.5], Some(3)).unwrap().1, OffsetSource::Explicit);
        let a = resolve_offsets(&[], Some(9)).unwrap();
        assert_eq!(a, resolve_offsets(&[], Some(9)).unwrap());
        assert_ne!(a.0, resolve_offsets(&[], Some(10)).unwrap().0);
        assert!(resolve_offsets(&[0.1, 0.2, 0.3], None).is_err());
    }
}
