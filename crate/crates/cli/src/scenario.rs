//! Executes a scenario and writes its CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ffspin::{
    gap_at, spectrum_at, DrivingCoefficients, FastForward, FastForwardOptions, FastForwardProfile, Model, ModelKind,
    ModelSpec, TrackOptions, TrajectoryRecord,
};

use crate::config::{Mode, ScenarioConfig};
use crate::error::CliError;

pub const TRAJECTORY: &str = "trajectory.csv";
pub const EIGENVALUES: &str = "eigenvalues.csv";
pub const REGULARIZATION: &str = "regularization.csv";
pub const COEFFICIENTS: &str = "coefficients.csv";
pub const GAP: &str = "gap.csv";
pub const BRANCH: &str = "branch.csv";
pub const MANIFEST: &str = "run_manifest";

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    /// Only for integrating modes.
    pub final_fidelity: Option<f64>,
    pub max_norm_drift: Option<f64>,
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Table {
    out: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[String]) -> Self {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(header).expect("in-memory write");
        Table { out }
    }

    fn row(&mut self, cells: &[String]) {
        self.out.write_record(cells).expect("in-memory write");
    }

    fn into_bytes(self) -> Vec<u8> {
        self.out.into_inner().expect("in-memory flush")
    }
}

fn columns(fixed: &[&str], prefix: &str, n: usize, tail: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = fixed.iter().map(|s| s.to_string()).collect();
    out.extend((1..=n).map(|k| format!("{prefix}{k}")));
    out.extend(tail.iter().map(|s| s.to_string()));
    out
}

/// Record times of a `steps`-step run sampled every `stride` steps, in the
/// same arithmetic as the integrator.
pub fn record_times(t_ff: f64, steps: usize, stride: usize) -> Vec<f64> {
    let dt = t_ff / steps as f64;
    let mut out: Vec<f64> = (0..steps).step_by(stride).map(|k| k as f64 * dt).collect();
    out.push(t_ff);
    out
}

pub fn build(config: &ScenarioConfig) -> Result<FastForward, CliError> {
    let model = Model::new(ModelSpec { kind: config.model, j0: config.j0, b0: config.b0, r0: config.r0 })?;
    let profile = FastForwardProfile::new(config.v_bar, config.t_ff)?;
    let opts = FastForwardOptions {
        grid_points: config.grid_points,
        selection: config.sector.selection(),
        track: TrackOptions::default(),
        driving: config.mode != Mode::NoDriving,
    };
    Ok(FastForward::new(model, profile, &opts)?)
}

fn w2_cell(kind: ModelKind, c: &DrivingCoefficients) -> String {
    match kind {
        ModelKind::TwoSpinXY => String::new(),
        ModelKind::ThreeSpinKagome => num(c.w2),
    }
}

fn trajectory_table(ff: &FastForward, records: &[TrajectoryRecord]) -> Table {
    let kind = ff.model.spec().kind;
    let mut t = Table::new(&columns(&["t", "R", "v", "w1", "w2", "norm", "fidelity"], "p", ff.model.dim(), &[]));
    for r in records {
        let mut cells = vec![num(r.t), num(r.r), num(r.v), num(r.coeffs.w1), w2_cell(kind, &r.coeffs), num(r.norm), num(r.fidelity)];
        cells.extend(r.populations().into_iter().map(num));
        t.row(&cells);
    }
    t
}

fn regularization_table(ff: &FastForward, times: &[f64]) -> Result<Table, CliError> {
    let kind = ff.model.spec().kind;
    let header = ["t", "R", "v", "w1", "w2", "bz_tilde", "h14_amplitude"].map(String::from);
    let mut t = Table::new(&header);
    for &time in times {
        let (r, v, c) = ff.schedule(time)?;
        t.row(&[num(time), num(r), num(v), num(c.w1), w2_cell(kind, &c), num(c.bz_tilde), num(2.0 * c.w1)]);
    }
    Ok(t)
}

fn coefficient_table(ff: &FastForward) -> Table {
    let kind = ff.model.spec().kind;
    let header = ["R", "w1", "w2", "bz_tilde", "residual", "correction"].map(String::from);
    let mut t = Table::new(&header);
    for (r, s) in ff.table.r.iter().zip(&ff.table.solutions) {
        t.row(&[num(*r), num(s.coeffs.w1), w2_cell(kind, &s.coeffs), num(s.coeffs.bz_tilde), num(s.residual), num(s.correction)]);
    }
    t
}

/// eigenvalues, gap and branch tables on the record times.
fn spectral_tables(ff: &FastForward, times: &[f64]) -> Result<[Table; 3], CliError> {
    let dim = ff.model.dim();
    let parity = ff.branch.parity(&ff.model);
    let mut eig = Table::new(&columns(&["t", "R"], "e", dim, &["branch_energy"]));
    let mut gap = Table::new(&["t", "R", "energy", "gap", "sector_gap"].map(String::from));
    let mut branch = Table::new(&columns(&["t", "R", "energy"], "c", dim, &[]));
    for &time in times {
        let r = ff.profile.r_of_t(ff.r0(), time)?;
        let (energy, vector) = ff.branch_at(r)?;
        let levels = spectrum_at(&ff.model, r)?;
        let g = gap_at(&ff.model, r, energy, parity)?;

        let mut cells = vec![num(time), num(r)];
        cells.extend(levels.iter().copied().map(num));
        cells.push(num(energy));
        eig.row(&cells);

        gap.row(&[num(time), num(r), num(energy), num(g.gap), num(g.sector_gap)]);

        let mut cells = vec![num(time), num(r), num(energy)];
        cells.extend(vector.iter().copied().map(num));
        branch.row(&cells);
    }
    Ok([eig, gap, branch])
}

fn write(dir: &Path, name: &str, text: &[u8], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
    files.push(path);
    Ok(())
}

/// Validates, computes and writes every file for the configured mode.
pub fn run(config: &ScenarioConfig) -> Result<RunSummary, CliError> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.clone(), message: e.to_string() })?;

    let ff = build(config)?;
    let mut files = Vec::new();
    write(dir, MANIFEST, config.to_manifest().as_bytes(), &mut files)?;

    let times = record_times(config.t_ff, config.integrator_steps, config.output_stride);
    let mut summary = RunSummary { files: Vec::new(), rows: times.len(), final_fidelity: None, max_norm_drift: None };

    if config.mode.integrates() {
        let records = ff.run(config.integrator_steps, config.output_stride)?;
        debug_assert_eq!(records.len(), times.len());
        summary.final_fidelity = records.last().map(|r| r.fidelity);
        summary.max_norm_drift = Some(records.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max));
        write(dir, TRAJECTORY, &trajectory_table(&ff, &records).into_bytes(), &mut files)?;
    }
    if config.mode != Mode::SpectrumOnly {
        write(dir, REGULARIZATION, &regularization_table(&ff, &times)?.into_bytes(), &mut files)?;
    }
    if matches!(config.mode, Mode::FastForward | Mode::RegularizationOnly) {
        write(dir, COEFFICIENTS, &coefficient_table(&ff).into_bytes(), &mut files)?;
    }
    if config.mode != Mode::RegularizationOnly {
        let [eig, gap, branch] = spectral_tables(&ff, &times)?;
        write(dir, EIGENVALUES, &eig.into_bytes(), &mut files)?;
        write(dir, GAP, &gap.into_bytes(), &mut files)?;
        write(dir, BRANCH, &branch.into_bytes(), &mut files)?;
    }
    summary.files = files;
    Ok(summary)
}

/// Human-readable one-screen report of a finished run.
pub fn describe(config: &ScenarioConfig, summary: &RunSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode {} ({} rows)", config.mode, summary.rows);
    if let Some(f) = summary.final_fidelity {
        let _ = writeln!(s, "final fidelity {f:.12}");
    }
    if let Some(d) = summary.max_norm_drift {
        let _ = writeln!(s, "max norm drift {d:.3e}");
    }
    for f in &summary.files {
        let _ = writeln!(s, "wrote {}", f.display());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_times_match_integrator() {
        assert_eq!(record_times(1.0, 4, 2), vec![0.0, 0.5, 1.0]);
        assert_eq!(record_times(1.0, 5, 2), vec![0.0, 0.4, 0.8, 1.0]);
        assert_eq!(record_times(2.0, 3, 1), vec![0.0, 2.0 / 3.0, 4.0 / 3.0, 2.0]);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.05), "5.0000000000000003e-2");
    }

    fn quick(model: ModelKind, mode: Mode, dir: &Path) -> ScenarioConfig {
        let mut c = ScenarioConfig::standard(model, mode);
        c.grid_points = 401;
        c.integrator_steps = 2000;
        c.output_stride = 100;
        c.output_dir = dir.to_path_buf();
        c
    }

    fn names(summary: &RunSummary) -> Vec<String> {
        let mut v: Vec<String> =
            summary.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        v.sort();
        v
    }

    fn read(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let mut r = csv::Reader::from_path(dir.join(name)).unwrap();
        let head = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
        (head, rows)
    }

    #[test]
    fn files_per_mode() {
        let tmp = tempfile::tempdir().unwrap();
        let cases = [
            (Mode::FastForward, vec![BRANCH, COEFFICIENTS, EIGENVALUES, GAP, REGULARIZATION, MANIFEST, TRAJECTORY]),
            (Mode::NoDriving, vec![BRANCH, EIGENVALUES, GAP, REGULARIZATION, MANIFEST, TRAJECTORY]),
            (Mode::SpectrumOnly, vec![BRANCH, EIGENVALUES, GAP, MANIFEST]),
            (Mode::RegularizationOnly, vec![COEFFICIENTS, REGULARIZATION, MANIFEST]),
        ];
        for (mode, expected) in cases {
            let dir = tmp.path().join(mode.to_string());
            let summary = run(&quick(ModelKind::TwoSpinXY, mode, &dir)).unwrap();
            let mut expected: Vec<String> = expected.into_iter().map(String::from).collect();
            expected.sort();
            assert_eq!(names(&summary), expected, "{mode}");
            assert_eq!(summary.rows, 21);
            assert_eq!(summary.final_fidelity.is_some(), mode.integrates());
        }
    }

    #[test]
    fn trajectory_schema() {
        let tmp = tempfile::tempdir().unwrap();
        run(&quick(ModelKind::ThreeSpinKagome, Mode::FastForward, tmp.path())).unwrap();
        let (head, rows) = read(tmp.path(), TRAJECTORY);
        let expected: Vec<String> = ["t", "R", "v", "w1", "w2", "norm", "fidelity", "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"]
            .map(String::from)
            .to_vec();
        assert_eq!(head, expected);
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[20][0].parse::<f64>().unwrap(), 1.0);
        assert_eq!(rows[20][1].parse::<f64>().unwrap(), 10.0);
        let (head, _) = read(tmp.path(), EIGENVALUES);
        assert_eq!(head.len(), 2 + 8 + 1);
    }

    #[test]
    fn two_spin_leaves_w2_empty() {
        let tmp = tempfile::tempdir().unwrap();
        run(&quick(ModelKind::TwoSpinXY, Mode::RegularizationOnly, tmp.path())).unwrap();
        let (head, rows) = read(tmp.path(), REGULARIZATION);
        let w2 = head.iter().position(|h| h == "w2").unwrap();
        assert!(rows.iter().all(|r| r[w2].is_empty()));
        let amp = head.iter().position(|h| h == "h14_amplitude").unwrap();
        assert!((rows[0][amp].parse::<f64>().unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn no_driving_zeroes_the_coefficients() {
        let tmp = tempfile::tempdir().unwrap();
        run(&quick(ModelKind::ThreeSpinKagome, Mode::NoDriving, tmp.path())).unwrap();
        for name in [TRAJECTORY, REGULARIZATION] {
            let (head, rows) = read(tmp.path(), name);
            for col in ["w1", "w2"] {
                let k = head.iter().position(|h| h == col).unwrap();
                assert!(rows.iter().all(|r| r[k].parse::<f64>().unwrap() == 0.0), "{name} {col}");
            }
        }
    }

    #[test]
    fn manifest_reloads_to_the_same_config() {
        let tmp = tempfile::tempdir().unwrap();
        let config = quick(ModelKind::TwoSpinXY, Mode::SpectrumOnly, tmp.path());
        run(&config).unwrap();
        let reloaded = crate::config::load(&tmp.path().join(MANIFEST), &[]).unwrap();
        assert_eq!(reloaded, config);
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("never");
        let mut config = quick(ModelKind::TwoSpinXY, Mode::FastForward, &dir);
        config.t_ff = -1.0;
        assert!(matches!(run(&config), Err(CliError::Invalid(v)) if v == vec!["t_ff must be positive".to_string()]));
        assert!(!dir.exists());
    }

    #[test]
    fn unresolvable_start_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = quick(ModelKind::ThreeSpinKagome, Mode::SpectrumOnly, tmp.path());
        config.sector = crate::config::Sector::None;
        assert!(matches!(run(&config), Err(CliError::Core(ffspin::Error::UnresolvedDegeneracy(_)))));
    }
}
