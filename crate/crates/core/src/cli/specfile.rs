//! Problem spec files.
//!
//! ```text
//! # comment
//! [moduleA]
//! base = hardy
//! theta1 = poly:[1]
//! theta2 = poly:[0, 1]
//!
//! [moduleB]           # optional, needed by `decide`
//! base = bergman(alpha=0.5)
//! theta1 = rat:[1]/[1, -0.5]
//! theta2 = poly:[0, 1]
//!
//! [grid]              # optional, every key optional
//! r_max = 0.8
//! n_r = 24
//! n_theta = 48
//!
//! [tolerances]        # optional, every key optional
//! tol = 1e-6
//! target_gap = 1e-6
//! fd_step = 1e-3
//! oracle_degree = 120
//! gap_tol = 1e-4
//! ```
//!
//! One `key = value` per line. `#` starts a comment anywhere on a line.
//! Unknown sections, unknown keys and repeated keys or sections are errors.

use std::fmt::{self, Write as _};

use crate::curvature::QuotientSpec;
use crate::holofun::{HoloFun, MultiplierPair};
use crate::literal::{parse_function, parse_module};
use crate::rkhs::ModuleKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSpec {
    pub base: ModuleKind<f64>,
    pub theta1: HoloFun<f64>,
    pub theta2: HoloFun<f64>,
    /// Line of the section header, for diagnostics raised after parsing.
    pub line: usize,
}

impl ModuleSpec {
    pub fn quotient(&self) -> Result<QuotientSpec<f64>, SpecError> {
        let pair = MultiplierPair::new(self.theta1.clone(), self.theta2.clone())
            .map_err(|e| SpecError { line: self.line, column: 1, message: e.to_string() })?;
        Ok(QuotientSpec::new(self.base, pair))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridSpec {
    pub r_max: Option<f64>,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tolerances {
    pub tol: Option<f64>,
    pub target_gap: Option<f64>,
    pub fd_step: Option<f64>,
    pub oracle_degree: Option<usize>,
    pub gap_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub module_a: ModuleSpec,
    pub module_b: Option<ModuleSpec>,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
}

impl ProblemSpec {
    pub fn modules(&self) -> Vec<(&'static str, &ModuleSpec)> {
        let mut out = vec![("A", &self.module_a)];
        if let Some(b) = &self.module_b {
            out.push(("B", b));
        }
        out
    }

    /// Canonical text: fixed section and key order, only keys that are set.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        for (name, m) in self.modules() {
            let _ = writeln!(out, "[module{name}]");
            let _ = writeln!(out, "base = {}", m.base);
            let _ = writeln!(out, "theta1 = {}", m.theta1);
            let _ = writeln!(out, "theta2 = {}", m.theta2);
            out.push('\n');
        }
        let g = &self.grid;
        let grid: Vec<String> = [
            g.r_max.map(|v| format!("r_max = {v:?}")),
            g.n_r.map(|v| format!("n_r = {v}")),
            g.n_theta.map(|v| format!("n_theta = {v}")),
        ]
        .into_iter()
        .flatten()
        .collect();
        let t = &self.tolerances;
        let tols: Vec<String> = [
            t.tol.map(|v| format!("tol = {v:e}")),
            t.target_gap.map(|v| format!("target_gap = {v:e}")),
            t.fd_step.map(|v| format!("fd_step = {v:e}")),
            t.oracle_degree.map(|v| format!("oracle_degree = {v}")),
            t.gap_tol.map(|v| format!("gap_tol = {v:e}")),
        ]
        .into_iter()
        .flatten()
        .collect();
        for (header, lines) in [("grid", grid), ("tolerances", tols)] {
            if lines.is_empty() {
                continue;
            }
            let _ = writeln!(out, "[{header}]");
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
            out.push('\n');
        }
        out.pop();
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    ModuleA,
    ModuleB,
    Grid,
    Tolerances,
}

#[derive(Default)]
struct PartialModule {
    line: usize,
    base: Option<ModuleKind<f64>>,
    theta1: Option<HoloFun<f64>>,
    theta2: Option<HoloFun<f64>>,
}

impl PartialModule {
    fn finish(self, name: &str) -> Result<ModuleSpec, SpecError> {
        let missing = |key: &str| SpecError {
            line: self.line,
            column: 1,
            message: format!("section [{name}] is missing `{key}`"),
        };
        Ok(ModuleSpec {
            base: self.base.ok_or_else(|| missing("base"))?,
            theta1: self.theta1.clone().ok_or_else(|| missing("theta1"))?,
            theta2: self.theta2.clone().ok_or_else(|| missing("theta2"))?,
            line: self.line,
        })
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SpecError {
    SpecError { line, column, message: message.into() }
}

fn set_once<V>(slot: &mut Option<V>, value: V, line: usize, column: usize, key: &str) -> Result<(), SpecError> {
    if slot.is_some() {
        return Err(err(line, column, format!("duplicate key `{key}`")));
    }
    *slot = Some(value);
    Ok(())
}

fn positive_real(value: &str, line: usize, column: usize, key: &str) -> Result<f64, SpecError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(err(line, column, format!("`{key}` expects a positive number, got `{value}`"))),
    }
}

fn count(value: &str, line: usize, column: usize, key: &str) -> Result<usize, SpecError> {
    value
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| err(line, column, format!("`{key}` expects a positive integer, got `{value}`")))
}

pub fn parse(src: &str) -> Result<ProblemSpec, SpecError> {
    let mut section: Option<Section> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut a = PartialModule::default();
    let mut b = PartialModule::default();
    let mut grid = GridSpec::default();
    let mut tols = Tolerances::default();

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let col0 = content[..indent].chars().count() + 1;

        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, col0, format!("malformed section header `{trimmed}`")))?
                .trim();
            let s = match name {
                "moduleA" => Section::ModuleA,
                "moduleB" => Section::ModuleB,
                "grid" => Section::Grid,
                "tolerances" => Section::Tolerances,
                other => return Err(err(line, col0, format!("unknown section `[{other}]`"))),
            };
            if seen.contains(&s) {
                return Err(err(line, col0, format!("duplicate section `[{name}]`")));
            }
            seen.push(s);
            match s {
                Section::ModuleA => a.line = line,
                Section::ModuleB => b.line = line,
                _ => {}
            }
            section = Some(s);
            continue;
        }

        let eq = content
            .find('=')
            .ok_or_else(|| err(line, col0, format!("expected `key = value`, got `{trimmed}`")))?;
        let key = content[..eq].trim();
        let value_raw = &content[eq + 1..];
        let value = value_raw.trim();
        let value_col = content[..eq + 1].chars().count() + (value_raw.len() - value_raw.trim_start().len()) + 1;
        let sec = section.ok_or_else(|| err(line, col0, format!("key `{key}` outside any section")))?;
        if value.is_empty() {
            return Err(err(line, value_col, format!("missing value for `{key}`")));
        }

        match sec {
            Section::ModuleA | Section::ModuleB => {
                let m = if sec == Section::ModuleA { &mut a } else { &mut b };
                let lit_err = |e: crate::literal::LiteralError| {
                    err(line, value_col + e.column - 1, format!("{} (at `{}`)", e.message, e.token))
                };
                match key {
                    "base" => set_once(&mut m.base, parse_module(value).map_err(lit_err)?, line, col0, key)?,
                    "theta1" => set_once(&mut m.theta1, parse_function(value).map_err(lit_err)?, line, col0, key)?,
                    "theta2" => set_once(&mut m.theta2, parse_function(value).map_err(lit_err)?, line, col0, key)?,
                    _ => return Err(err(line, col0, format!("unknown key `{key}`"))),
                }
            }
            Section::Grid => match key {
                "r_max" => set_once(&mut grid.r_max, positive_real(value, line, value_col, key)?, line, col0, key)?,
                "n_r" => set_once(&mut grid.n_r, count(value, line, value_col, key)?, line, col0, key)?,
                "n_theta" => set_once(&mut grid.n_theta, count(value, line, value_col, key)?, line, col0, key)?,
                _ => return Err(err(line, col0, format!("unknown key `{key}`"))),
            },
            Section::Tolerances => match key {
                "tol" => set_once(&mut tols.tol, positive_real(value, line, value_col, key)?, line, col0, key)?,
                "target_gap" => {
                    set_once(&mut tols.target_gap, positive_real(value, line, value_col, key)?, line, col0, key)?
                }
                "fd_step" => set_once(&mut tols.fd_step, positive_real(value, line, value_col, key)?, line, col0, key)?,
                "oracle_degree" => {
                    set_once(&mut tols.oracle_degree, count(value, line, value_col, key)?, line, col0, key)?
                }
                "gap_tol" => set_once(&mut tols.gap_tol, positive_real(value, line, value_col, key)?, line, col0, key)?,
                _ => return Err(err(line, col0, format!("unknown key `{key}`"))),
            },
        }
    }

    if !seen.contains(&Section::ModuleA) {
        return Err(err(1, 1, "spec file has no [moduleA] section"));
    }
    let module_a = a.finish("moduleA")?;
    let module_b = if seen.contains(&Section::ModuleB) { Some(b.finish("moduleB")?) } else { None };
    Ok(ProblemSpec { module_a, module_b, grid, tolerances: tols })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# two modules
[moduleA]
base = hardy
theta1 = poly:[1]
theta2 = poly:[0, 1]   # z

[moduleB]
base = bergman(alpha=0.5)
theta1 = rat:[1]/[1, -0.5]
theta2 = poly:[0.5-0.25i, 1]

[grid]
r_max = 0.7
n_theta = 12

[tolerances]
tol = 1e-7
oracle_degree = 80
";

    #[test]
    fn parses_full_file() {
        let s = parse(FULL).unwrap();
        assert_eq!(s.module_a.base, ModuleKind::Hardy);
        assert_eq!(s.module_b.as_ref().unwrap().base, ModuleKind::weighted_bergman(0.5).unwrap());
        assert_eq!(s.grid, GridSpec { r_max: Some(0.7), n_r: None, n_theta: Some(12) });
        assert_eq!(s.tolerances.tol, Some(1e-7));
        assert_eq!(s.tolerances.oracle_degree, Some(80));
        assert_eq!(s.tolerances.fd_step, None);
    }

    #[test]
    fn canonical_round_trip() {
        let s = parse(FULL).unwrap();
        let canon = s.to_canonical();
        let again = parse(&canon).unwrap();
        assert_eq!(again.to_canonical(), canon);
        assert_eq!(again.module_b.unwrap().theta1, s.module_b.unwrap().theta1);
    }

    #[test]
    fn malformed_literal_points_at_token() {
        let src = "[moduleA]\nbase = hardy\ntheta1 = poly:[1, 2x]\ntheta2 = poly:[1]\n";
        let e = parse(src).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.column, 19);
        assert!(e.message.contains("2x"), "{e}");
    }

    #[test]
    fn rejects_unknown_and_duplicate() {
        let e = parse("[moduleA]\nbase = hardy\ncolour = red\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        assert!(e.message.contains("colour"));
        let e = parse("[moduleC]\n").unwrap_err();
        assert!(e.message.contains("moduleC"));
        let e = parse("[moduleA]\nbase = hardy\nbase = bergman\n").unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = parse("[moduleA]\nbase=hardy\ntheta1=poly:[1]\ntheta2=poly:[1]\n[moduleA]\n").unwrap_err();
        assert_eq!(e.line, 5);
    }

    #[test]
    fn missing_pieces() {
        let e = parse("[moduleA]\nbase = hardy\ntheta1 = poly:[1]\n").unwrap_err();
        assert!(e.message.contains("theta2"));
        assert!(parse("# nothing\n").is_err());
        let e = parse("base = hardy\n").unwrap_err();
        assert!(e.message.contains("outside"));
        let e = parse("[grid]\nn_r = -3\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
    }

    #[test]
    fn bad_module_literal() {
        let e = parse("[moduleA]\n  base = bergman(alpha=-2)\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.column >= 10);
    }
}
