//! Stretched-state spin energies of HD+ and the composed rotational
//! transition frequency.
//!
//! Coefficients E1..E13 of the effective spin Hamiltonian are read from a
//! TOML file with one `[[level]]` table per (v, N). The HD+ table ships in
//! `data/hdplus_spin_coefficients.toml`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{from_toml, line_of, Error, Result};

const SHIPPED_TABLE: &str = include_str!("../data/hdplus_spin_coefficients.toml");

/// Spin-averaged (0,0) -> (0,1) frequency, Hz.
pub const HD_SPIN_AVERAGED_FREQUENCY: f64 = 1_314_925_752_627.0;
pub const HD_SPIN_AVERAGED_UNCERTAINTY: f64 = 18.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoefficients {
    pub v: u32,
    pub n: u32,
    /// E1..E13; E1..E9 in Hz, E10..E13 in Hz/T.
    pub e: [f64; 13],
}

impl SpinCoefficients {
    pub fn new(v: u32, n: u32, e: [f64; 13]) -> Self {
        SpinCoefficients { v, n, e }
    }

    /// Coefficient E_i with 1-based `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.e[i - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// T+: stretched states with maximal positive projection.
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "T+",
            Branch::Minus => "T-",
        }
    }
}

/// Field-dependent part of the stretched-state energy, Hz.
pub fn zeeman_energy(c: &SpinCoefficients, branch: Branch, b: f64) -> f64 {
    let e = |i| c.get(i);
    branch.sign() * (2.0 * e(10) * c.n as f64 + e(11) + 2.0 * e(12) + e(13)) * b / 2.0
}

/// E/h of the stretched state in field `b` (tesla), Hz.
pub fn stretched_state_energy(c: &SpinCoefficients, branch: Branch, b: f64) -> f64 {
    let e = |i| c.get(i);
    let n = c.n as f64;
    zeeman_energy(c, branch, b)
        + e(4) / 4.0
        + e(5) / 2.0
        + (e(1) + e(2) + 2.0 * e(3) + e(6) + 2.0 * e(7) + 2.0 * e(8) + e(9)) * n / 2.0
        - (2.0 * e(6) + 4.0 * e(7) + 4.0 * e(8) + 2.0 * e(9)) * n * n / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    pub f_spin_avg: f64,
    pub f_spin_avg_uncertainty: f64,
    pub lower: SpinCoefficients,
    pub upper: SpinCoefficients,
    /// Total angular momentum J of the lower and upper stretched states.
    pub lower_j: u32,
    pub upper_j: u32,
}

impl TransitionModel {
    pub fn new(
        f_spin_avg: f64,
        f_spin_avg_uncertainty: f64,
        lower: SpinCoefficients,
        upper: SpinCoefficients,
    ) -> Result<Self> {
        if (lower.v, lower.n) != (0, 0) || (upper.v, upper.n) != (0, 1) {
            return Err(Error::InvalidParameter(format!(
                "transition needs (v,N) = (0,0) -> (0,1), got ({},{}) -> ({},{})",
                lower.v, lower.n, upper.v, upper.n
            )));
        }
        if !f_spin_avg.is_finite() || !(f_spin_avg_uncertainty >= 0.0) {
            return Err(Error::InvalidParameter("spin-averaged frequency must be finite".into()));
        }
        Ok(TransitionModel {
            f_spin_avg,
            f_spin_avg_uncertainty,
            lower,
            upper,
            lower_j: 2,
            upper_j: 3,
        })
    }

    pub fn from_table(table: &CoefficientTable, f_spin_avg: f64, uncertainty: f64) -> Result<Self> {
        let lower = table.require(0, 0)?;
        let upper = table.require(0, 1)?;
        Self::new(f_spin_avg, uncertainty, lower, upper)
    }

    /// Model built from the shipped HD+ coefficient table.
    pub fn hd_plus() -> Self {
        let table = parse_coefficients(SHIPPED_TABLE).expect("shipped coefficient table is valid");
        Self::from_table(&table, HD_SPIN_AVERAGED_FREQUENCY, HD_SPIN_AVERAGED_UNCERTAINTY)
            .expect("shipped table has (0,0) and (0,1)")
    }
}

/// Zero-field energy difference upper - lower, each set evaluated at its own N.
pub fn spin_shift(lower: &SpinCoefficients, upper: &SpinCoefficients) -> f64 {
    stretched_state_energy(upper, Branch::Plus, 0.0) - stretched_state_energy(lower, Branch::Plus, 0.0)
}

/// f_spin of the modelled transition.
pub fn hyperfine_shift(model: &TransitionModel) -> f64 {
    spin_shift(&model.lower, &model.upper)
}

pub fn transition_frequency(model: &TransitionModel, branch: Branch, b: f64) -> f64 {
    model.f_spin_avg
        + hyperfine_shift(model)
        + (zeeman_energy(&model.upper, branch, b) - zeeman_energy(&model.lower, branch, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanPair {
    pub mean: f64,
    pub splitting: f64,
    /// mean - f(B=0); nonzero only when E11..E13 differ between levels.
    pub mean_shift: f64,
}

impl ZeemanPair {
    pub fn half_splitting(&self) -> f64 {
        0.5 * self.splitting
    }
}

pub fn zeeman_pair_stats(model: &TransitionModel, b: f64) -> ZeemanPair {
    let plus = transition_frequency(model, Branch::Plus, b);
    let minus = transition_frequency(model, Branch::Minus, b);
    let mean = 0.5 * (plus + minus);
    ZeemanPair {
        mean,
        splitting: (plus - minus).abs(),
        mean_shift: mean - transition_frequency(model, Branch::Plus, 0.0),
    }
}

/// Coefficient sets keyed by (v, N).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientTable {
    levels: BTreeMap<(u32, u32), SpinCoefficients>,
}

impl CoefficientTable {
    pub fn insert(&mut self, c: SpinCoefficients) -> Option<SpinCoefficients> {
        self.levels.insert((c.v, c.n), c)
    }

    pub fn get(&self, v: u32, n: u32) -> Option<&SpinCoefficients> {
        self.levels.get(&(v, n))
    }

    pub fn require(&self, v: u32, n: u32) -> Result<SpinCoefficients> {
        self.get(v, n)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("no coefficients for (v,N) = ({v},{n})")))
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpinCoefficients> {
        self.levels.values()
    }

    /// Writes the table in the loader's format; values round-trip exactly.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# units: E1..E9 in Hz, E10..E13 in Hz/T")?;
        for c in self.iter() {
            writeln!(w, "\n[[level]]\nv = {}\nN = {}", c.v, c.n)?;
            for (i, e) in c.e.iter().enumerate() {
                writeln!(w, "E{} = {:?}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    level: Vec<toml::Spanned<RawLevel>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawLevel {
    v: u32,
    N: u32,
    E1: f64,
    E2: f64,
    E3: f64,
    E4: f64,
    E5: f64,
    E6: f64,
    E7: f64,
    E8: f64,
    E9: f64,
    E10: f64,
    E11: f64,
    E12: f64,
    E13: f64,
}

pub fn parse_coefficients(text: &str) -> Result<CoefficientTable> {
    let raw: RawFile = toml::from_str(text).map_err(|e| from_toml(text, e))?;
    if raw.level.is_empty() {
        return Err(Error::parse(1, "no [[level]] tables"));
    }
    let mut table = CoefficientTable::default();
    let mut seen: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for spanned in raw.level {
        let line = line_of(text, spanned.span().start);
        let r = spanned.into_inner();
        let e = [
            r.E1, r.E2, r.E3, r.E4, r.E5, r.E6, r.E7, r.E8, r.E9, r.E10, r.E11, r.E12, r.E13,
        ];
        if let Some(i) = e.iter().position(|x| !x.is_finite()) {
            return Err(Error::parse(line, format!("E{} is not finite", i + 1)));
        }
        if let Some(first) = seen.insert((r.v, r.N), line) {
            return Err(Error::parse(
                line,
                format!("duplicate level (v,N) = ({},{}), first defined at line {first}", r.v, r.N),
            ));
        }
        table.insert(SpinCoefficients::new(r.v, r.N, e));
    }
    Ok(table)
}

pub fn load_coefficients(path: impl AsRef<Path>) -> Result<CoefficientTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_coefficients(&text).map_err(|e| e.with_path(path))
}

/// The shipped HD+ table.
pub fn shipped_coefficients() -> CoefficientTable {
    parse_coefficients(SHIPPED_TABLE).expect("shipped coefficient table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAUSS: f64 = 1e-4;

    fn ones(n: u32) -> SpinCoefficients {
        SpinCoefficients::new(0, n, [1.0; 13])
    }

    #[test]
    fn printed_expression_by_hand() {
        assert_eq!(stretched_state_energy(&ones(1), Branch::Plus, 1.0), 2.75);
        assert_eq!(stretched_state_energy(&ones(1), Branch::Minus, 1.0), -3.25);
        let mut c = ones(0);
        c.e[3] = 8.0;
        c.e[4] = 6.0;
        assert_eq!(stretched_state_energy(&c, Branch::Plus, 0.0), 2.0 + 3.0);
    }

    #[test]
    fn only_e1_gives_half() {
        let mut upper = SpinCoefficients::new(0, 1, [0.0; 13]);
        upper.e[0] = 32e6;
        let lower = SpinCoefficients::new(0, 0, [0.0; 13]);
        let m = TransitionModel::new(0.0, 0.0, lower, upper).unwrap();
        assert_eq!(hyperfine_shift(&m), 16e6);
    }

    #[test]
    fn identical_sets_without_n_terms_cancel() {
        let mut e = [3.3e6; 13];
        for i in [0, 1, 2, 5, 6, 7, 8, 9] {
            e[i] = 0.0;
        }
        let m = TransitionModel::new(0.0, 0.0, SpinCoefficients::new(0, 0, e), SpinCoefficients::new(0, 1, e))
            .unwrap();
        assert_eq!(hyperfine_shift(&m), 0.0);
    }

    #[test]
    fn swap_is_antisymmetric() {
        let m = TransitionModel::hd_plus();
        assert_eq!(spin_shift(&m.upper, &m.lower), -hyperfine_shift(&m));
    }

    #[test]
    fn shipped_model_values() {
        let m = TransitionModel::hd_plus();
        assert!((hyperfine_shift(&m) - 10.0747e6).abs() < 1e3);
        let f0 = transition_frequency(&m, Branch::Plus, 0.0);
        assert_eq!(f0, transition_frequency(&m, Branch::Minus, 0.0));
        assert!((f0 - 1_314_935_827_300.0).abs() < 100.0);
        let d = transition_frequency(&m, Branch::Plus, GAUSS) - f0;
        assert!((d + 560.0).abs() < 1e-6, "{d}");
        let pair = zeeman_pair_stats(&m, 0.4 * GAUSS);
        assert!((pair.splitting - 448.0).abs() < 1e-6);
        assert!((pair.half_splitting() - 224.0).abs() < 1e-6);
        assert!(pair.mean_shift.abs() < 1e-3);
    }

    #[test]
    fn pair_mean_field_independent() {
        let m = TransitionModel::hd_plus();
        let f0 = zeeman_pair_stats(&m, 0.0).mean;
        for b in [0.0, 0.1, 1.0, 10.0] {
            let s = zeeman_pair_stats(&m, b * GAUSS);
            assert!((s.mean - f0).abs() < 1e-3);
        }
        assert_eq!(zeeman_pair_stats(&m, 0.0).splitting, 0.0);
    }

    #[test]
    fn unequal_g_factors_are_reported() {
        let mut m = TransitionModel::hd_plus();
        m.upper.e[10] += 1e6;
        let s = zeeman_pair_stats(&m, 1e-3);
        assert!(s.mean_shift.abs() < 1e-3);
        // E11 enters each branch with opposite sign, so the pair mean is
        // still field free; the splitting picks up the difference
        assert!((s.splitting - 2.0 * (5.6e6 - 0.5e6) * 1e-3).abs() < 1e-3);
    }

    #[test]
    fn zeeman_difference_is_odd_and_linear() {
        let c = shipped_coefficients().require(0, 1).unwrap();
        let diff = |b| zeeman_energy(&c, Branch::Plus, b) - zeeman_energy(&c, Branch::Minus, b);
        let full = |b| stretched_state_energy(&c, Branch::Plus, b) - stretched_state_energy(&c, Branch::Minus, b);
        for b in [1e-5, 3e-4, 0.01] {
            assert_eq!(diff(-b), -diff(b));
            assert_eq!(diff(2.0 * b), 2.0 * diff(b));
            // the zero-field part cancels up to rounding of the level energy
            assert!((full(b) - diff(b)).abs() < 1e-6);
        }
    }

    #[test]
    fn wrong_levels_rejected() {
        let c = ones(1);
        assert!(TransitionModel::new(0.0, 0.0, c, c).is_err());
    }

    #[test]
    fn round_trip_bit_exact() {
        let mut t = shipped_coefficients();
        t.insert(SpinCoefficients::new(1, 3, [0.1, -1e-300, 1e21, 3.0, 2.5e-7, 0.0, -0.0, 7.0, 1.0 / 3.0, 1.0, 2.0, 3.0, 4.0]));
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = parse_coefficients(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.len(), 3);
        for c in t.iter() {
            let d = back.get(c.v, c.n).unwrap();
            for (a, b) in c.e.iter().zip(&d.e) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_coefficients(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_coefficients("# nothing\n"), Err(Error::Parse { .. })));
        let mut buf = Vec::new();
        shipped_coefficients().write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let missing = text.replacen("E7 = ", "X7 = ", 1);
        match parse_coefficients(&missing) {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
        let bad = text.replacen("E4 = ", "E4 = abc #", 1);
        assert!(matches!(parse_coefficients(&bad), Err(Error::Parse { line, .. }) if line > 1));
        let dup = text.replacen("N = 1", "N = 0", 1);
        match parse_coefficients(&dup) {
            Err(Error::Parse { line, message, .. }) => {
                assert!(message.contains("duplicate"));
                assert!(line > 10);
            }
            other => panic!("{other:?}"),
        }
    }
}
