//! Trial matrices: expand a grid over β, e, Δ_BFT and variant, run every
//! trial, and write versioned CSV reports.
//!
//! ```toml
//! output = "results"
//! trials = 5
//!
//! [grid]
//! beta = [0.5, 0.67, 0.9]
//! e = [5, 10]
//! delta_bft = [0, 2]
//! variant = ["advocate", "stochastic-cp", "nakamoto-cp"]
//!
//! [base]          # any SimConfig field; grid axes override it
//! rounds = 600
//!
//! [goodput]       # optional saturated runs used only for FG
//! block_capacity = 4
//! tx_rate = 4.0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{bound_short_term_cq, fractional_goodput, MetricsReport};
use crate::sim::{simulate, simulate_traced, SimConfig, SimRun, Variant};

/// Bumped whenever a CSV column is added, removed or reinterpreted.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub beta: Vec<f64>,
    pub e: Vec<u64>,
    pub delta_bft: Vec<u64>,
    pub variant: Vec<Variant>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            beta: vec![0.5],
            e: vec![5],
            delta_bft: vec![0],
            variant: vec![Variant::Advocate],
        }
    }
}

/// Load used for the goodput measurement: blocks are capped and the
/// pool is kept saturated, so goodput reflects wasted capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodputLoad {
    pub block_capacity: u32,
    pub tx_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentMatrix {
    pub output: PathBuf,
    /// Seeds per cell when `seeds` is empty: 1..=trials.
    pub trials: u32,
    pub seeds: Vec<u64>,
    pub grid: Grid,
    pub base: SimConfig,
    pub goodput: Option<GoodputLoad>,
}

impl Default for ExperimentMatrix {
    fn default() -> Self {
        ExperimentMatrix {
            output: PathBuf::from("results"),
            trials: 5,
            seeds: Vec::new(),
            grid: Grid::default(),
            base: SimConfig::default(),
            goodput: None,
        }
    }
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub variant: Variant,
    pub beta: f64,
    pub e: u64,
    pub delta_bft: u64,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}-b{}-e{}-d{}", self.variant, self.beta, self.e, self.delta_bft)
    }
}

/// Metrics of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub cell: Cell,
    pub seed: u64,
    pub metrics: MetricsReport,
}

/// Outcome of one cell: its rows, or the trial that broke safety.
#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Completed(Vec<TrialRow>),
    Aborted { seed: u64, detail: String, trace: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub cells: Vec<(Cell, CellOutcome)>,
}

impl Report {
    pub fn safety_violations(&self) -> usize {
        self.cells
            .iter()
            .filter(|(_, o)| matches!(o, CellOutcome::Aborted { .. }))
            .count()
    }

    pub fn rows(&self) -> impl Iterator<Item = &TrialRow> {
        self.cells.iter().flat_map(|(_, o)| match o {
            CellOutcome::Completed(rows) => rows.as_slice(),
            CellOutcome::Aborted { .. } => &[],
        })
    }
}

impl ExperimentMatrix {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let matrix: ExperimentMatrix = toml::from_str(text)?;
        matrix.validate()?;
        Ok(matrix)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds().is_empty() {
            return Err(Error::Config("every cell needs at least one seed".into()));
        }
        let g = &self.grid;
        if g.beta.is_empty() || g.e.is_empty() || g.delta_bft.is_empty() || g.variant.is_empty() {
            return Err(Error::Config("every grid axis needs at least one value".into()));
        }
        for cell in self.cells() {
            for seed in self.seeds() {
                self.config(&cell, seed).validate()?;
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (1..=u64::from(self.trials)).collect()
        } else {
            self.seeds.clone()
        }
    }

    /// Cartesian product in a fixed order: variant, β, e, Δ_BFT.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &variant in &g.variant {
            for &beta in &g.beta {
                for &e in &g.e {
                    for &delta_bft in &g.delta_bft {
                        out.push(Cell { variant, beta, e, delta_bft });
                    }
                }
            }
        }
        out
    }

    /// Trial configuration. A nonzero Δ_BFT widens the window by the same
    /// amount; outside the committee variant it becomes the service's
    /// signing delay.
    pub fn config(&self, cell: &Cell, seed: u64) -> SimConfig {
        let mut cfg = SimConfig {
            variant: cell.variant,
            beta: cell.beta,
            e: cell.e,
            seed,
            c: self.base.c + cell.delta_bft,
            ..self.base.clone()
        };
        if cell.variant == Variant::AdvocateBft {
            cfg.delta_bft = cell.delta_bft;
        } else {
            cfg.delta_bft = 0;
            cfg.service_delay = self.base.service_delay + cell.delta_bft;
        }
        if cell.variant == Variant::AdvocateHooks && cfg.hook_t.is_none() {
            cfg.hook_t = Some(2);
        }
        cfg
    }
}

/// Runs every cell, serially or with one worker per trial. Both paths
/// produce the same report.
pub fn run_matrix(matrix: &ExperimentMatrix, parallel: bool) -> Result<Report> {
    matrix.validate()?;
    let jobs: Vec<(Cell, u64)> = matrix
        .cells()
        .into_iter()
        .flat_map(|cell| matrix.seeds().into_iter().map(move |seed| (cell, seed)))
        .collect();
    let run = |&(cell, seed): &(Cell, u64)| run_trial(matrix, &cell, seed);
    let results: Vec<Result<Trial>> = if parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    };
    let mut results = results.into_iter();
    let mut cells = Vec::new();
    for cell in matrix.cells() {
        let mut rows = Vec::new();
        let mut aborted = None;
        for _ in matrix.seeds() {
            match results.next().expect("one result per job")? {
                Trial::Row(row) => rows.push(row),
                Trial::Aborted { seed, detail, trace } if aborted.is_none() => {
                    aborted = Some(CellOutcome::Aborted { seed, detail, trace });
                }
                Trial::Aborted { .. } => {}
            }
        }
        cells.push((cell, aborted.unwrap_or(CellOutcome::Completed(rows))));
    }
    Ok(Report { cells })
}

enum Trial {
    Row(TrialRow),
    Aborted { seed: u64, detail: String, trace: PathBuf },
}

fn run_trial(matrix: &ExperimentMatrix, cell: &Cell, seed: u64) -> Result<Trial> {
    let cfg = matrix.config(cell, seed);
    let run = match simulate_traced(&cfg) {
        Ok(run) => run,
        Err(aborted) => match aborted.error {
            Error::SafetyViolation { .. } => {
                let dir = matrix.output.join("traces");
                fs::create_dir_all(&dir)?;
                let trace = dir.join(format!("{}-seed{seed}.ndjson", cell.label()));
                aborted.log.write_ndjson(fs::File::create(&trace)?)?;
                return Ok(Trial::Aborted {
                    seed,
                    detail: aborted.error.to_string(),
                    trace,
                });
            }
            other => return Err(other),
        },
    };
    let reference = simulate(&SimConfig { beta: 0.0, ..cfg.clone() })?;
    let mut metrics = MetricsReport::compute(&run, &reference)?;
    if let Some(load) = &matrix.goodput {
        metrics.fg = saturated_goodput(&cfg, load)?;
    }
    Ok(Trial::Row(TrialRow { cell: *cell, seed, metrics }))
}

/// FG of `cfg` under a saturating load, against its β = 0 twin.
pub fn saturated_goodput(cfg: &SimConfig, load: &GoodputLoad) -> Result<f64> {
    let loaded = SimConfig {
        block_capacity: Some(load.block_capacity),
        tx_rate: load.tx_rate,
        ..cfg.clone()
    };
    let run: SimRun = simulate(&loaded)?;
    let reference = simulate(&SimConfig { beta: 0.0, ..loaded })?;
    fractional_goodput(&run.log, &reference.log)
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

impl Report {
    /// One row per trial.
    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema", "variant", "beta", "e", "delta_bft", "seed", "fg", "il", "il_unconfirmed", "hw", "cq",
            "safety_ok", "liveness_bound_ok",
        ])?;
        for row in self.rows() {
            let m = &row.metrics;
            w.write_record([
                CSV_SCHEMA_VERSION.to_string(),
                row.cell.variant.to_string(),
                row.cell.beta.to_string(),
                row.cell.e.to_string(),
                row.cell.delta_bft.to_string(),
                row.seed.to_string(),
                fmt_f64(m.fg),
                fmt_f64(m.il),
                m.il_unconfirmed.to_string(),
                fmt_f64(m.hw),
                fmt_f64(m.cq),
                m.safety_ok.to_string(),
                m.liveness_bound_ok.to_string(),
            ])?;
        }
        into_string(w)
    }

    /// Means over each cell's trials; aborted cells name their trace.
    pub fn cells_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "schema", "variant", "beta", "e", "delta_bft", "seeds", "fg", "il", "hw", "cq", "status",
        ])?;
        for (cell, outcome) in &self.cells {
            let head = [
                CSV_SCHEMA_VERSION.to_string(),
                cell.variant.to_string(),
                cell.beta.to_string(),
                cell.e.to_string(),
                cell.delta_bft.to_string(),
            ];
            let tail: Vec<String> = match outcome {
                CellOutcome::Completed(rows) => {
                    let seeds = rows.iter().map(|r| r.seed.to_string()).collect::<Vec<_>>().join(";");
                    let m = |f: fn(&MetricsReport) -> f64| fmt_f64(mean(rows.iter().map(|r| f(&r.metrics))));
                    vec![seeds, m(|x| x.fg), m(|x| x.il), m(|x| x.hw), m(|x| x.cq), "ok".into()]
                }
                CellOutcome::Aborted { seed, trace, .. } => vec![
                    seed.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("safety-violation:{}", trace.display()),
                ],
            };
            w.write_record(head.into_iter().chain(tail))?;
        }
        into_string(w)
    }

    /// Chain quality against β: the optimal line, the measured
    /// stochastic baseline (blank when not in the grid) and the hooks
    /// lower bound for window `hook_t`.
    pub fn cq_vs_beta_csv(&self, hook_t: u64) -> Result<String> {
        let mut betas: Vec<f64> = self.cells.iter().map(|(c, _)| c.beta).collect();
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["schema", "beta", "advocate_optimal", "stochastic_cp_measured", "hooks_bound"])?;
        for beta in betas {
            let measured: Vec<f64> = self
                .rows()
                .filter(|r| r.cell.beta == beta && r.cell.variant == Variant::StochasticCp)
                .map(|r| r.metrics.cq)
                .collect();
            let stochastic = if measured.is_empty() {
                String::new()
            } else {
                fmt_f64(mean(measured.into_iter()))
            };
            w.write_record([
                CSV_SCHEMA_VERSION.to_string(),
                beta.to_string(),
                fmt_f64(1.0 - beta),
                stochastic,
                fmt_f64(bound_short_term_cq(beta, hook_t.max(2))?),
            ])?;
        }
        into_string(w)
    }

    /// Writes `trials.csv`, `cells.csv` and `cq_vs_beta.csv` under `dir`.
    pub fn write(&self, dir: &Path, hook_t: u64) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let files = [
            ("trials.csv", self.trials_csv()?),
            ("cells.csv", self.cells_csv()?),
            ("cq_vs_beta.csv", self.cq_vs_beta_csv(hook_t)?),
        ];
        let mut paths = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            paths.push(path);
        }
        Ok(paths)
    }

    /// Cell means as an aligned text table.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>5} {:>3} {:>3} {:>7} {:>8} {:>7} {:>7}", "variant", "beta", "e", "dbft", "fg", "il", "hw", "cq");
        for (cell, outcome) in &self.cells {
            match outcome {
                CellOutcome::Completed(rows) => {
                    let m = |f: fn(&MetricsReport) -> f64| mean(rows.iter().map(|r| f(&r.metrics)));
                    let _ = writeln!(
                        out,
                        "{:<16} {:>5} {:>3} {:>3} {:>7.3} {:>8.3} {:>7.3} {:>7.3}",
                        cell.variant.to_string(),
                        cell.beta,
                        cell.e,
                        cell.delta_bft,
                        m(|x| x.fg),
                        m(|x| x.il),
                        m(|x| x.hw),
                        m(|x| x.cq)
                    );
                }
                CellOutcome::Aborted { seed, detail, trace } => {
                    let _ = writeln!(out, "{:<16} {:>5} {:>3} {:>3} ABORTED seed {seed}: {detail} ({})", cell.variant.to_string(), cell.beta, cell.e, cell.delta_bft, trace.display());
                }
            }
        }
        out
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(beta: f64) -> ExperimentMatrix {
        ExperimentMatrix {
            trials: 2,
            grid: Grid {
                beta: vec![beta],
                ..Grid::default()
            },
            base: SimConfig {
                rounds: 120,
                ..SimConfig::default()
            },
            ..ExperimentMatrix::default()
        }
    }

    #[test]
    fn adversary_free_cell() {
        let report = run_matrix(&small(0.0), false).unwrap();
        let rows: Vec<&TrialRow> = report.rows().collect();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert_eq!(r.metrics.fg, 1.0);
            assert_eq!(r.metrics.hw, 0.0);
            assert_eq!(r.metrics.cq, 1.0);
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let m = small(0.5);
        let a = run_matrix(&m, false).unwrap();
        let b = run_matrix(&m, true).unwrap();
        assert_eq!(a.trials_csv().unwrap(), b.trials_csv().unwrap());
        assert_eq!(a.cells_csv().unwrap(), b.cells_csv().unwrap());
    }

    #[test]
    fn grid_expands_in_fixed_order() {
        let m = ExperimentMatrix::from_toml_str(
            r#"
            trials = 1
            [grid]
            beta = [0.5, 0.9]
            e = [5, 10]
            delta_bft = [0, 2]
            variant = ["advocate", "advocate-bft"]
            "#,
        )
        .unwrap();
        let cells = m.cells();
        assert_eq!(cells.len(), 16);
        assert_eq!(cells[1].delta_bft, 2);
        assert_eq!(cells[8].variant, Variant::AdvocateBft);
        let bft = m.config(&cells[9], 1);
        assert_eq!((bft.c, bft.delta_bft, bft.service_delay), (4, 2, 0));
        let plain = m.config(&cells[1], 1);
        assert_eq!((plain.c, plain.delta_bft, plain.service_delay), (4, 0, 2));
    }

    #[test]
    fn rejects_empty_axes_and_bad_cells() {
        assert!(ExperimentMatrix::from_toml_str("trials = 0").is_err());
        assert!(ExperimentMatrix::from_toml_str("[grid]\nbeta = []").is_err());
        assert!(ExperimentMatrix::from_toml_str("[grid]\ne = [2]").is_err());
        assert!(ExperimentMatrix::from_toml_str("bogus = 1").is_err());
    }
}
