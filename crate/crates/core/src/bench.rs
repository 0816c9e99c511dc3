//! Experiment grids over `(s, N)`, the inequality suite, and regression
//! comparison against the checked-in reference tables.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{
    exact_condition_number, pcg, random_vector, GuessDistribution, PcgOptions, SolveReport,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::mesh::{MeshHierarchy, MeshLevel};
use crate::multilevel::{MultilevelPreconditioner, TildePreconditioner};
use crate::operator::LinearOperator;
use crate::parallel::Execution;
use crate::spectral::{decompose_level, group_property_defect, FractionalOperator, SpectralDecomposition};
use crate::theory::{
    check_loewner_heinz, check_smoother_bounds, check_subspace_inequality, InequalityReport,
    SmootherBounds,
};

pub const DEFAULT_N_VALUES: [usize; 5] = [32, 64, 128, 256, 512];
pub const DEFAULT_LEVELS: usize = 5;
pub const CSV_HEADER: [&str; 8] = [
    "s",
    "N",
    "J",
    "iterations",
    "condition_estimate",
    "exact_condition",
    "wall_time",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `B^s` for `s ∈ [0, 1]`.
    Positive,
    /// `B̃^s` for `s ∈ [-1, 0]`.
    Negative,
    /// Inequality suite; no grid.
    Theory,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    #[default]
    Multilevel,
    /// Exact `(A^s)⁻¹` from the fine-level decomposition.
    Spectral,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    /// Homogeneous system; the random initial guess is the whole error.
    #[default]
    Zero,
    /// i.i.d. uniform `[-1, 1]` dual vector.
    Random,
}

/// Ten equal steps across `[0, 1]` or `[-1, 0]`.
pub fn default_s_values(mode: Mode) -> Vec<f64> {
    match mode {
        Mode::Negative => (0..=10).map(|i| (i as f64 - 10.0) / 10.0).collect(),
        _ => (0..=10).map(|i| i as f64 / 10.0).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub mode: Mode,
    pub s_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub j_levels: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub preconditioner: PreconditionerKind,
    pub rhs: RhsKind,
    pub guess: GuessDistribution,
    /// Also compute the dense condition number for `N` up to this size.
    pub exact_up_to: usize,
    /// When false, `wall_time` is written as 0 so output is byte-stable.
    pub timing: bool,
    pub execution: Execution,
}

impl BenchConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            s_values: default_s_values(mode),
            n_values: DEFAULT_N_VALUES.to_vec(),
            j_levels: DEFAULT_LEVELS,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            preconditioner: PreconditionerKind::default(),
            rhs: RhsKind::default(),
            guess: GuessDistribution::default(),
            exact_up_to: 0,
            timing: true,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        let (lo, hi) = match self.mode {
            Mode::Positive => (0.0, 1.0),
            Mode::Negative => (-1.0, 0.0),
            Mode::Theory => return invalid("theory mode has no grid".into()),
        };
        if self.s_values.is_empty() || self.n_values.is_empty() {
            return invalid("empty s or N list".into());
        }
        if let Some(s) = self.s_values.iter().find(|s| !(lo..=hi).contains(*s)) {
            return invalid(format!("s = {s} outside [{lo}, {hi}] for {:?} mode", self.mode));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return invalid(format!("tolerance {} must be positive", self.tol));
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be positive".into());
        }
        for &n in &self.n_values {
            MeshHierarchy::build(n, self.j_levels)
                .map_err(|e| Error::InvalidConfig(format!("N = {n}, J = {}: {e}", self.j_levels)))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub iterations: usize,
    pub converged: bool,
    pub condition_estimate: f64,
    pub exact_condition: Option<f64>,
    pub wall_time: f64,
    pub seed: u64,
}

struct Fine {
    n: usize,
    hierarchy: MeshHierarchy,
    decomposition: Arc<SpectralDecomposition>,
}

/// Runs every `(s, N)` cell. Rows come back sorted by `(s, N)` whatever the
/// execution policy.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let ns: Vec<usize> = config.n_values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let fines = config
        .execution
        .map(&ns, |&n| -> Result<Fine> {
            let hierarchy = MeshHierarchy::build(n, config.j_levels)?;
            let decomposition = Arc::new(decompose_level(hierarchy.finest())?);
            Ok(Fine {
                n,
                hierarchy,
                decomposition,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut s_sorted = config.s_values.clone();
    s_sorted.sort_by(f64::total_cmp);
    s_sorted.dedup();
    let cells: Vec<(f64, &Fine)> = s_sorted
        .iter()
        .flat_map(|&s| fines.iter().map(move |f| (s, f)))
        .collect();
    config
        .execution
        .map(&cells, |&(s, fine)| run_cell(config, s, fine))
        .into_iter()
        .collect()
}

fn run_cell(config: &BenchConfig, s: f64, fine: &Fine) -> Result<BenchRow> {
    let system = FractionalOperator::new(fine.decomposition.clone(), s)?;
    let coarse = if fine.hierarchy.n_levels() == 1 {
        fine.decomposition.clone()
    } else {
        Arc::new(decompose_level(fine.hierarchy.coarsest())?)
    };
    let preconditioner: Box<dyn LinearOperator> = match (config.preconditioner, config.mode) {
        (PreconditionerKind::Spectral, _) => Box::new(system.inverse()),
        (PreconditionerKind::Multilevel, Mode::Negative) => Box::new(
            TildePreconditioner::with_coarse_decomposition(&fine.hierarchy, s, coarse)?,
        ),
        (PreconditionerKind::Multilevel, _) => Box::new(
            MultilevelPreconditioner::with_coarse_decomposition(&fine.hierarchy, s, coarse)?,
        ),
    };
    let dim = system.dim();
    let rhs = match config.rhs {
        RhsKind::Zero => vec![0.0; dim],
        RhsKind::Random => random_vector(dim, config.seed.wrapping_add(1), GuessDistribution::Symmetric),
    };
    let x0 = random_vector(dim, config.seed, config.guess);
    let options = PcgOptions {
        tol: config.tol,
        max_iter: config.max_iter,
    };
    let report = match pcg(&system, preconditioner.as_ref(), &rhs, x0, &options) {
        Ok((_, report)) => report,
        Err(Error::Breakdown { iteration, .. }) => SolveReport {
            iterations: iteration,
            converged: false,
            relative_preconditioned_residuals: Vec::new(),
            condition_estimate: f64::NAN,
            alphas: Vec::new(),
            betas: Vec::new(),
            wall_time: 0.0,
        },
        Err(e) => return Err(e),
    };
    let exact_condition = if fine.n <= config.exact_up_to {
        Some(exact_condition_number(&system, preconditioner.as_ref(), config.execution)?)
    } else {
        None
    };
    Ok(BenchRow {
        s,
        n: fine.n,
        j: fine.hierarchy.n_levels(),
        iterations: report.iterations,
        converged: report.converged,
        condition_estimate: report.condition_estimate,
        exact_condition,
        wall_time: if config.timing { report.wall_time } else { 0.0 },
        seed: config.seed,
    })
}

/// Writes rows under the fixed [`CSV_HEADER`]. Floats use the shortest
/// round-trip representation.
pub fn write_csv<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:?}", r.s),
            r.n.to_string(),
            r.j.to_string(),
            r.iterations.to_string(),
            format!("{:?}", r.condition_estimate),
            r.exact_condition.map(|c| format!("{c:?}")).unwrap_or_default(),
            format!("{:?}", r.wall_time),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub iterations: usize,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTable {
    cells: Vec<ReferenceCell>,
}

const POSITIVE_REFERENCE: &str = include_str!("../data/positive.csv");
const NEGATIVE_REFERENCE: &str = include_str!("../data/negative.csv");

fn s_key(s: f64) -> i64 {
    (s * 1000.0).round() as i64
}

impl ReferenceTable {
    /// Reads `s,N,iterations,condition` rows; `#` lines are comments.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
        let cells = r.deserialize().collect::<Result<Vec<ReferenceCell>, _>>()?;
        Ok(Self { cells })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Bundled reference for the positive-exponent grid.
    pub fn positive() -> Self {
        Self::from_reader(POSITIVE_REFERENCE.as_bytes()).expect("bundled table parses")
    }

    /// Bundled reference for the negative-exponent grid.
    pub fn negative() -> Self {
        Self::from_reader(NEGATIVE_REFERENCE.as_bytes()).expect("bundled table parses")
    }

    pub fn cells(&self) -> &[ReferenceCell] {
        &self.cells
    }

    pub fn get(&self, s: f64, n: usize) -> Option<&ReferenceCell> {
        self.cells.iter().find(|c| c.n == n && s_key(c.s) == s_key(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance on condition numbers.
    pub condition_rel: f64,
    /// Iterations may deviate by `max(iterations_abs, iterations_rel · reference)`.
    pub iterations_abs: f64,
    pub iterations_rel: f64,
}

impl Tolerances {
    pub fn positive() -> Self {
        Self {
            condition_rel: 0.15,
            iterations_abs: 3.0,
            iterations_rel: 0.20,
        }
    }

    /// Looser: iteration counts at high condition numbers are sensitive to
    /// the random start.
    pub fn negative() -> Self {
        Self {
            condition_rel: 0.20,
            iterations_abs: 5.0,
            iterations_rel: 0.25,
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Negative => Self::negative(),
            _ => Self::positive(),
        }
    }

    pub fn iteration_allowance(&self, reference: usize) -> f64 {
        self.iterations_abs.max(self.iterations_rel * reference as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDeviation {
    pub s: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub iterations: usize,
    pub reference_iterations: usize,
    pub iteration_deviation: usize,
    pub condition: f64,
    pub reference_condition: f64,
    pub condition_deviation: f64,
    pub iterations_ok: bool,
    pub condition_ok: bool,
}

impl CellDeviation {
    pub fn flagged(&self) -> bool {
        !(self.iterations_ok && self.condition_ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub cells: Vec<CellDeviation>,
    /// Rows with no reference cell; these are not judged.
    pub unmatched: usize,
}

impl ComparisonReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CellDeviation> {
        self.cells.iter().filter(|c| c.flagged())
    }

    pub fn passed(&self) -> bool {
        self.flagged().next().is_none()
    }
}

pub fn compare_to_reference(
    rows: &[BenchRow],
    reference: &ReferenceTable,
    tolerances: &Tolerances,
) -> ComparisonReport {
    let mut unmatched = 0;
    let cells = rows
        .iter()
        .filter_map(|row| {
            let Some(r) = reference.get(row.s, row.n) else {
                unmatched += 1;
                return None;
            };
            let iteration_deviation = row.iterations.abs_diff(r.iterations);
            let condition_deviation = (row.condition_estimate - r.condition).abs() / r.condition;
            Some(CellDeviation {
                s: row.s,
                n: row.n,
                iterations: row.iterations,
                reference_iterations: r.iterations,
                iteration_deviation,
                condition: row.condition_estimate,
                reference_condition: r.condition,
                condition_deviation,
                iterations_ok: row.converged
                    && iteration_deviation as f64 <= tolerances.iteration_allowance(r.iterations),
                condition_ok: condition_deviation <= tolerances.condition_rel,
            })
        })
        .collect();
    ComparisonReport { cells, unmatched }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPropertyCheck {
    pub n_elements: usize,
    pub s: f64,
    pub t: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySuiteReport {
    pub seed: u64,
    pub loewner_heinz: Vec<InequalityReport>,
    pub subspace: Vec<InequalityReport>,
    pub group_property: Vec<GroupPropertyCheck>,
    pub smoother_bounds: Vec<SmootherBounds>,
}

/// Defect allowed for the matrix group property.
pub const GROUP_PROPERTY_TOLERANCE: f64 = 1e-10;

impl TheorySuiteReport {
    pub fn all_hold(&self) -> bool {
        self.loewner_heinz.iter().chain(&self.subspace).all(InequalityReport::holds)
            && self.group_property.iter().all(|g| g.defect <= GROUP_PROPERTY_TOLERANCE)
            && self.smoother_bounds.iter().all(SmootherBounds::is_valid)
    }
}

/// Löwner–Heinz with 200 trials at dimension 10, the subspace inequality on
/// every adjacent pair of the hierarchy 2 → 128, the group property at
/// N = 16, and smoother constants on N = 2 … 256.
pub fn run_theory_suite(seed: u64, execution: Execution) -> Result<TheorySuiteReport> {
    let exponents = [0.25, 0.5, 0.75];
    let loewner_heinz = exponents
        .iter()
        .map(|&s| check_loewner_heinz(10, 200, s, seed, execution))
        .collect::<Result<Vec<_>>>()?;
    let hierarchy = MeshHierarchy::build(128, 7)?;
    let subspace = exponents
        .iter()
        .map(|&s| check_subspace_inequality(&hierarchy, s, execution))
        .collect::<Result<Vec<_>>>()?;
    let group_level = MeshLevel::new(16)?;
    let op = FractionalOperator::on_level(&group_level, 0.0)?;
    let group_property = [(0.5, -0.5), (0.0, 0.0), (1.0, -1.0), (0.25, 0.5), (-0.3, -0.7)]
        .iter()
        .map(|&(s, t)| {
            Ok(GroupPropertyCheck {
                n_elements: 16,
                s,
                t,
                defect: group_property_defect(&op, s, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let smoother_cases: Vec<(usize, f64)> = [0.0, 0.5, 1.0]
        .iter()
        .flat_map(|&s| (1..=8).map(move |p| (1usize << p, s)))
        .collect();
    let smoother_bounds = execution
        .map(&smoother_cases, |&(n, s)| check_smoother_bounds(&MeshLevel::new(n)?, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(TheorySuiteReport {
        seed,
        loewner_heinz,
        subspace,
        group_property,
        smoother_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> BenchConfig {
        BenchConfig {
            s_values: if mode == Mode::Positive { vec![0.5, 0.0] } else { vec![-0.5] },
            n_values: vec![64, 32],
            j_levels: 3,
            timing: false,
            ..BenchConfig::new(mode)
        }
    }

    #[test]
    fn default_grids() {
        let p = default_s_values(Mode::Positive);
        assert_eq!(p.len(), 11);
        assert_eq!(p[3], 0.3);
        let n = default_s_values(Mode::Negative);
        assert_eq!(n[0], -1.0);
        assert_eq!(n[10], 0.0);
        assert_eq!(n[7], -0.3);
    }

    #[test]
    fn validation() {
        assert!(BenchConfig::new(Mode::Positive).validate().is_ok());
        assert!(BenchConfig::new(Mode::Negative).validate().is_ok());
        assert!(BenchConfig::new(Mode::Theory).validate().is_err());
        let mut c = BenchConfig::new(Mode::Positive);
        c.s_values = vec![-0.5];
        assert!(c.validate().is_err());
        let mut c = BenchConfig::new(Mode::Negative);
        c.s_values = vec![0.5];
        assert!(c.validate().is_err());
        let mut c = BenchConfig::new(Mode::Positive);
        c.n_values = vec![40];
        assert!(c.validate().is_err());
        c.n_values = vec![16];
        assert!(c.validate().is_err(), "16 / 2^4 = 1 element");
        let mut c = BenchConfig::new(Mode::Positive);
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rows_sorted_and_policy_independent() {
        let mut cfg = small(Mode::Positive);
        cfg.execution = Execution::Sequential;
        let seq = run_benchmark(&cfg).unwrap();
        cfg.execution = Execution::Parallel;
        let par = run_benchmark(&cfg).unwrap();
        assert_eq!(seq, par);
        let keys: Vec<_> = seq.iter().map(|r| (r.s, r.n)).collect();
        assert_eq!(keys, vec![(0.0, 32), (0.0, 64), (0.5, 32), (0.5, 64)]);
    }

    #[test]
    fn csv_is_byte_stable() {
        let cfg = small(Mode::Negative);
        let render = || {
            let mut buf = Vec::new();
            write_csv(&run_benchmark(&cfg).unwrap(), &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        assert!(a.starts_with("s,N,J,iterations,condition_estimate,exact_condition,wall_time,seed\n"));
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn exact_condition_only_for_small_meshes() {
        let mut cfg = small(Mode::Positive);
        cfg.exact_up_to = 32;
        let rows = run_benchmark(&cfg).unwrap();
        for r in rows {
            assert_eq!(r.exact_condition.is_some(), r.n == 32);
            if let Some(e) = r.exact_condition {
                assert!((r.condition_estimate - e).abs() / e < 0.1);
            }
        }
    }

    #[test]
    fn spectral_preconditioner_takes_one_step() {
        for mode in [Mode::Positive, Mode::Negative] {
            let mut cfg = small(mode);
            cfg.preconditioner = PreconditionerKind::Spectral;
            cfg.rhs = RhsKind::Random;
            for r in run_benchmark(&cfg).unwrap() {
                assert_eq!(r.iterations, 1);
            }
        }
    }

    #[test]
    fn bundled_references_are_complete() {
        for (table, mode) in [(ReferenceTable::positive(), Mode::Positive), (ReferenceTable::negative(), Mode::Negative)] {
            assert_eq!(table.cells().len(), 55);
            for s in default_s_values(mode) {
                for n in DEFAULT_N_VALUES {
                    assert!(table.get(s, n).is_some(), "missing ({s}, {n})");
                }
            }
        }
        let p = ReferenceTable::positive();
        let c = p.get(0.5, 512).unwrap();
        assert_eq!((c.iterations, c.condition), (14, 3.2));
        let n = ReferenceTable::negative();
        let c = n.get(-1.0, 256).unwrap();
        assert_eq!((c.iterations, c.condition), (64, 193.8));
    }

    fn rows_from(table: &ReferenceTable) -> Vec<BenchRow> {
        table
            .cells()
            .iter()
            .map(|c| BenchRow {
                s: c.s,
                n: c.n,
                j: 5,
                iterations: c.iterations,
                converged: true,
                condition_estimate: c.condition,
                exact_condition: None,
                wall_time: 0.0,
                seed: 0,
            })
            .collect()
    }

    #[test]
    fn identical_rows_pass() {
        let table = ReferenceTable::positive();
        let report = compare_to_reference(&rows_from(&table), &table, &Tolerances::positive());
        assert!(report.passed());
        assert_eq!(report.cells.len(), 55);
        assert_eq!(report.unmatched, 0);
    }

    #[test]
    fn large_condition_deviation_is_flagged() {
        let table = ReferenceTable::positive();
        let mut rows = rows_from(&table);
        rows[7].condition_estimate *= 1.5;
        let report = compare_to_reference(&rows, &table, &Tolerances::positive());
        let flagged: Vec<_> = report.flagged().collect();
        assert_eq!(flagged.len(), 1);
        assert!(!flagged[0].condition_ok && flagged[0].iterations_ok);
        assert!(!report.passed());
    }

    #[test]
    fn iteration_allowance() {
        let t = Tolerances::positive();
        assert_eq!(t.iteration_allowance(10), 3.0);
        assert_eq!(t.iteration_allowance(29), 0.2 * 29.0);
        let t = Tolerances::negative();
        assert_eq!(t.iteration_allowance(62), 15.5);
        let table = ReferenceTable::negative();
        let mut rows = rows_from(&table);
        rows[0].iterations += 5;
        rows[1].iterations += 6;
        let report = compare_to_reference(&rows, &table, &t);
        let flagged: Vec<_> = report.flagged().map(|c| (c.s, c.n)).collect();
        // rows[1] is (-1.0, 64) with 47 reference iterations: allowance 11.75
        assert!(flagged.is_empty(), "{flagged:?}");
        rows[0].iterations += 20;
        assert_eq!(compare_to_reference(&rows, &table, &t).flagged().count(), 1);
    }

    #[test]
    fn unmatched_rows_are_counted() {
        let table = ReferenceTable::positive();
        let mut rows = rows_from(&table);
        rows.truncate(2);
        rows[0].n = 1024;
        let report = compare_to_reference(&rows, &table, &Tolerances::positive());
        assert_eq!(report.unmatched, 1);
        assert_eq!(report.cells.len(), 1);
    }

    #[test]
    fn reference_reader_skips_comments() {
        let text = "# note\ns,N,iterations,condition\n0.5,32,11,2.9\n";
        let t = ReferenceTable::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.cells().len(), 1);
        assert!(ReferenceTable::from_reader("s,N\nx,1\n".as_bytes()).is_err());
    }
}
