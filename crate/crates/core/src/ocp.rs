//! Tabulated open-circuit potentials.

use std::path::Path;

use crate::error::ParamError;

const GRAPHITE_TABLE: &str = include_str!("../data/ocp/graphite.txt");
const NMC_TABLE: &str = include_str!("../data/ocp/nmc.txt");

/// Open-circuit potential as a function of stoichiometry, linearly
/// interpolated from a table that covers [0, 1] and is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct OcpCurve {
    stoich: Vec<f64>,
    volts: Vec<f64>,
    uniform_step: Option<f64>,
}

impl OcpCurve {
    pub fn new(stoich: Vec<f64>, volts: Vec<f64>) -> Result<Self, ParamError> {
        if stoich.len() != volts.len() || stoich.len() < 2 {
            return Err(ParamError::OcpTable("need at least two (x, U) pairs".into()));
        }
        let first = stoich[0];
        let last = stoich[stoich.len() - 1];
        if first.abs() > 1e-9 || (last - 1.0).abs() > 1e-9 {
            return Err(ParamError::OcpTable(format!(
                "table must span stoichiometry 0..1, got {first}..{last}"
            )));
        }
        for (i, w) in stoich.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(ParamError::OcpTable(format!(
                    "stoichiometry not increasing at row {}",
                    i + 1
                )));
            }
        }
        if volts.iter().any(|v| !v.is_finite()) {
            return Err(ParamError::OcpTable("non-finite potential".into()));
        }
        for (i, w) in volts.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(ParamError::OcpTable(format!(
                    "potential increases with stoichiometry at row {}",
                    i + 1
                )));
            }
        }
        let step = 1.0 / (stoich.len() - 1) as f64;
        let uniform = stoich
            .iter()
            .enumerate()
            .all(|(i, &x)| (x - i as f64 * step).abs() < 1e-9);
        Ok(Self {
            stoich,
            volts,
            uniform_step: uniform.then_some(step),
        })
    }

    /// Parse whitespace-separated two-column text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParamError> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty());
            let parse = |s: Option<&str>| -> Result<f64, ParamError> {
                s.ok_or_else(|| ParamError::OcpTable(format!("line {}: expected two columns", n + 1)))?
                    .parse::<f64>()
                    .map_err(|e| ParamError::OcpTable(format!("line {}: {e}", n + 1)))
            };
            xs.push(parse(cols.next())?);
            us.push(parse(cols.next())?);
        }
        Self::new(xs, us)
    }

    pub fn load(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path).map_err(|source| ParamError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Bundled curves: `graphite` and `nmc`.
    pub fn bundled(name: &str) -> Result<Self, ParamError> {
        let text = match name {
            "graphite" => GRAPHITE_TABLE,
            "nmc" => NMC_TABLE,
            _ => {
                return Err(ParamError::UnknownBundled {
                    kind: "OCP table",
                    name: name.to_string(),
                })
            }
        };
        Self::parse(text)
    }

    /// Potential at stoichiometry `x`; clamps outside [0, 1].
    pub fn value(&self, x: f64) -> f64 {
        let n = self.stoich.len();
        if x <= 0.0 {
            return self.volts[0];
        }
        if x >= 1.0 {
            return self.volts[n - 1];
        }
        let i = match self.uniform_step {
            Some(h) => ((x / h) as usize).min(n - 2),
            None => self.stoich.partition_point(|&s| s <= x).saturating_sub(1).min(n - 2),
        };
        let (x0, x1) = (self.stoich[i], self.stoich[i + 1]);
        let w = (x - x0) / (x1 - x0);
        self.volts[i] + w * (self.volts[i + 1] - self.volts[i])
    }

    /// Smallest stoichiometry where the potential drops to `target`.
    /// Returns `None` when `target` lies outside the table range.
    pub fn inverse(&self, target: f64) -> Option<f64> {
        let n = self.volts.len();
        if target > self.volts[0] || target < self.volts[n - 1] {
            return None;
        }
        let i = self.volts.partition_point(|&v| v > target);
        if i == 0 {
            return Some(0.0);
        }
        let (u0, u1) = (self.volts[i - 1], self.volts[i]);
        let (x0, x1) = (self.stoich[i - 1], self.stoich[i]);
        if u0 == u1 {
            return Some(x0);
        }
        Some(x0 + (u0 - target) / (u0 - u1) * (x1 - x0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load() {
        let g = OcpCurve::bundled("graphite").unwrap();
        let p = OcpCurve::bundled("nmc").unwrap();
        assert!(g.value(0.0) > 0.6 && g.value(1.0) < 0.1);
        assert!(p.value(0.0) > 4.3 && p.value(1.0) < 3.5);
    }

    #[test]
    fn interpolates_linearly_on_nonuniform_grid() {
        let c = OcpCurve::new(vec![0.0, 0.25, 1.0], vec![1.0, 0.5, 0.2]).unwrap();
        assert!((c.value(0.125) - 0.75).abs() < 1e-12);
        assert!((c.value(0.625) - 0.35).abs() < 1e-12);
        assert_eq!(c.value(-1.0), 1.0);
        assert_eq!(c.value(2.0), 0.2);
    }

    #[test]
    fn rejects_increasing_potential() {
        let err = OcpCurve::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.1, 0.2]).unwrap_err();
        assert!(matches!(err, ParamError::OcpTable(_)));
    }

    #[test]
    fn rejects_partial_domain() {
        assert!(OcpCurve::new(vec![0.1, 1.0], vec![1.0, 0.2]).is_err());
        assert!(OcpCurve::new(vec![0.0, 0.9], vec![1.0, 0.2]).is_err());
    }

    #[test]
    fn parse_skips_comments() {
        let c = OcpCurve::parse("# header\n0 2.0\n0.5 1.0 # mid\n\n1 0.5\n").unwrap();
        assert!((c.value(0.75) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        let p = OcpCurve::bundled("nmc").unwrap();
        for &y in &[0.05, 0.3, 0.6, 0.95] {
            let u = p.value(y);
            assert!((p.inverse(u).unwrap() - y).abs() < 1e-6);
        }
        assert!(p.inverse(5.0).is_none());
    }
}
