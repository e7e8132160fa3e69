//! Small text formats accepted on the command line.

use std::f64::consts::PI;

use mbqc_core::state::Channel;
use mbqc_core::{Error, Result};

/// Radians, written as a decimal (`0.785`) or a multiple of pi (`pi/4`,
/// `-3pi/4`, `2*pi`). Degrees are refused, including bare numbers above 2π
/// that would only make sense as degrees.
pub fn angle(text: &str) -> Result<f64> {
    let s = text.trim().to_ascii_lowercase().replace(' ', "");
    if s.contains('°') || s.contains("deg") {
        return Err(Error::InvalidArgument(format!("angle {text:?}: degrees are not accepted, use radians")));
    }
    let bad = || Error::InvalidArgument(format!("cannot parse angle {text:?}"));
    let value = if let Some(i) = s.find("pi") {
        let (coef, rest) = s.split_at(i);
        let rest = &rest[2..];
        let coef = coef.trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => coef.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match rest {
            "" => 1.0,
            _ => rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        if d == 0.0 {
            return Err(bad());
        }
        c * PI / d
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    if value.abs() > 2.0 * PI + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "angle {text:?} exceeds 2π; angles are radians (degrees are not accepted)"
        )));
    }
    Ok(value)
}

/// Comma-separated angles.
pub fn angles(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(angle).collect()
}

/// `start:stop:steps` with `steps` ≥ 2 points, both ends included.
pub fn grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("p grid {text:?} must look like start:stop:steps"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps < 2 || !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
        return Err(bad());
    }
    Ok((0..steps).map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Depolarize,
    Dephase,
    PhaseFlip,
}

/// A single-qubit channel applied to every qubit, `kind:strength`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub kind: NoiseKind,
    pub strength: f64,
}

impl Noise {
    pub fn parse(text: &str) -> Result<Noise> {
        let bad = || Error::InvalidArgument(format!("noise {text:?} must be depolarize|dephase|phaseflip:strength"));
        let (k, v) = text.split_once(':').ok_or_else(bad)?;
        let kind = match k.trim().to_ascii_lowercase().as_str() {
            "depolarize" | "depolarizing" => NoiseKind::Depolarize,
            "dephase" | "dephasing" => NoiseKind::Dephase,
            "phaseflip" | "phase_flip" => NoiseKind::PhaseFlip,
            _ => return Err(bad()),
        };
        let strength: f64 = v.trim().parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidProbability(strength));
        }
        Ok(Noise { kind, strength })
    }

    pub fn channel(&self, qubit: usize) -> Channel {
        let p = self.strength;
        match self.kind {
            NoiseKind::Depolarize => Channel::Depolarize { p, qubit },
            NoiseKind::Dephase => Channel::Dephase { p, qubit },
            NoiseKind::PhaseFlip => Channel::PhaseFlip { p, qubit },
        }
    }
}

/// Comma-separated code lengths.
pub fn n_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad code length {s:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_in_radians() {
        assert_eq!(angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(angle("0.25").unwrap(), 0.25);
        assert_eq!(angles("pi/2,0,-pi/2").unwrap(), vec![PI / 2.0, 0.0, -PI / 2.0]);
    }

    #[test]
    fn degrees_rejected() {
        for s in ["90deg", "45°", "90", "pi/0", "x"] {
            assert!(angle(s).is_err(), "{s}");
        }
    }

    #[test]
    fn grids() {
        let g = grid("0:1:21").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[10], 0.5);
        assert_eq!(g[20], 1.0);
        assert!(grid("0:1").is_err());
        assert!(grid("0:2:3").is_err());
    }

    #[test]
    fn noise_specs() {
        assert_eq!(Noise::parse("depolarize:0.1").unwrap().kind, NoiseKind::Depolarize);
        assert!(Noise::parse("amplitude:0.1").is_err());
        assert!(Noise::parse("dephase:1.5").is_err());
    }
}
