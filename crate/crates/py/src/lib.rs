//! Python bindings. Angles are in degrees, as on the command line.

use gedanken_core::bellstates::{correlation_closed, correlation_numeric, BellKind, MeasurementDirection};
use gedanken_core::eraser::{self as er, EraseTiming, MarkerBasis};
use gedanken_core::ensembles::{self as ens, Source};
use gedanken_core::inequalities::{self as ineq, Objective, SearchConfig, SettingsSix};
use gedanken_core::qstate::{Direction, Plane};
use gedanken_core::wigner::{self as wg, Agent, Basis, Event, Formalism, MeasurementChoice};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyComplex;
use serde::Serialize;

fn err(e: gedanken_core::Error) -> PyErr {
    match e {
        gedanken_core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = gedanken_core::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// Plain Python data (dicts, lists, floats) via JSON.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> gedanken_core::Result<()>) -> PyResult<String> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(err)?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn settings(alice: Option<[f64; 3]>, bob: Option<[f64; 3]>, plane: &str) -> PyResult<SettingsSix> {
    let (a, b) = SettingsSix::chsh_optimal().degrees();
    SettingsSix::from_degrees(alice.unwrap_or(a), bob.unwrap_or(b), parse(plane)?).map_err(err)
}

/// Returns `(closed_form, numeric)` for unit axes `alice` and `bob`.
#[pyfunction]
#[pyo3(signature = (kind, alice, bob))]
fn bell_correlation(kind: &str, alice: [f64; 3], bob: [f64; 3]) -> PyResult<(f64, f64)> {
    let kind: BellKind = parse(kind)?;
    let dirs = MeasurementDirection::new(Direction::new(alice).map_err(err)?, Direction::new(bob).map_err(err)?, None)
        .map_err(err)?;
    Ok((correlation_closed(kind, &dirs), correlation_numeric(kind, &dirs).map_err(err)?))
}

/// Same as `bell_correlation` with both axes in `plane`, Bob at `alpha + theta`.
#[pyfunction]
#[pyo3(signature = (kind, theta, plane = "xz", alpha = 0.0))]
fn bell_correlation_in_plane(kind: &str, theta: f64, plane: &str, alpha: f64) -> PyResult<(f64, f64)> {
    let kind: BellKind = parse(kind)?;
    let dirs = MeasurementDirection::in_plane(parse(plane)?, alpha.to_radians(), (alpha + theta).to_radians());
    Ok((correlation_closed(kind, &dirs), correlation_numeric(kind, &dirs).map_err(err)?))
}

#[pyclass(frozen, skip_from_py_object)]
struct TrialEnsemble(ens::TrialEnsemble);

#[pymethods]
impl TrialEnsemble {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn alice_outcomes(&self) -> Vec<i8> {
        self.0.trials.iter().map(|t| t.alice_outcome).collect()
    }

    #[getter]
    fn bob_outcomes(&self) -> Vec<i8> {
        self.0.trials.iter().map(|t| t.bob_outcome).collect()
    }

    fn product_average(&self) -> PyResult<f64> {
        self.0.product_average().map_err(err)
    }

    /// Conditional averages grouped by `by` ("alice" or "bob").
    #[pyo3(signature = (by = "alice"))]
    fn partition<'py>(&self, py: Python<'py>, by: &str) -> PyResult<Bound<'py, PyAny>> {
        let report = match by {
            "alice" => ens::partition_by_alice(&self.0),
            "bob" => ens::partition_by_bob(&self.0),
            other => return Err(PyValueError::new_err(format!("unknown party '{other}'"))),
        }
        .map_err(err)?;
        to_py(py, &report)
    }

    #[pyo3(signature = (tolerance = 1e-12))]
    fn conservation<'py>(&self, py: Python<'py>, tolerance: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ens::conservation_check(&self.0, tolerance).map_err(err)?)
    }

    fn to_csv(&self) -> PyResult<String> {
        csv_string(|w| self.0.write_csv(w))
    }
}

/// Seeded trials; `mu` selects the singlet/product mixture instead of `kind`.
#[pyfunction]
#[pyo3(signature = (n, seed, kind = "psi-minus", theta = 0.0, alpha = 0.0, plane = "xz", mu = None))]
fn run_trials(n: usize, seed: u64, kind: &str, theta: f64, alpha: f64, plane: &str, mu: Option<f64>) -> PyResult<TrialEnsemble> {
    let source = match mu {
        Some(mu) => Source::Mu(mu),
        None => Source::Bell(parse(kind)?),
    };
    let e = ens::run_trials(source, alpha.to_radians(), (alpha + theta).to_radians(), parse(plane)?, n, seed).map_err(err)?;
    Ok(TrialEnsemble(e))
}

/// The fixed eight-trial ensemble: Alice +1 at 0 degrees, Bob at 60 degrees.
#[pyfunction]
fn figure7() -> TrialEnsemble {
    TrialEnsemble(ens::figure7_ensemble().0)
}

#[pyclass(frozen, skip_from_py_object)]
struct InequalityReport(ineq::InequalityReport);

#[pymethods]
impl InequalityReport {
    #[getter]
    fn state(&self) -> String {
        self.0.state.clone()
    }

    #[getter]
    fn mu(&self) -> Option<f64> {
        self.0.mu
    }

    #[getter]
    fn chsh_lhs(&self) -> f64 {
        self.0.chsh_lhs
    }

    #[getter]
    fn lf_lhs(&self) -> f64 {
        self.0.lf_lhs
    }

    #[getter]
    fn chsh_violated(&self) -> bool {
        self.0.chsh_violated
    }

    #[getter]
    fn lf_violated(&self) -> bool {
        self.0.lf_violated
    }

    #[getter]
    fn singles_a(&self) -> [f64; 3] {
        self.0.singles_a
    }

    #[getter]
    fn singles_b(&self) -> [f64; 3] {
        self.0.singles_b
    }

    /// `E(A_i, B_j)`, row `i`.
    #[getter]
    fn correlators(&self) -> [[f64; 3]; 3] {
        self.0.correlators
    }

    /// `(alice, bob)` angles in degrees, or `None` for deterministic models.
    #[getter]
    fn settings(&self) -> Option<([f64; 3], [f64; 3])> {
        self.0.settings.as_ref().map(SettingsSix::degrees)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("InequalityReport(state={:?}, chsh_lhs={}, lf_lhs={})", self.0.state, self.0.chsh_lhs, self.0.lf_lhs)
    }
}

/// Both left-hand sides for the mixture; settings default to the CHSH-optimal ones.
#[pyfunction]
#[pyo3(signature = (mu, alice = None, bob = None, plane = "xy"))]
fn evaluate_mu(mu: f64, alice: Option<[f64; 3]>, bob: Option<[f64; 3]>, plane: &str) -> PyResult<InequalityReport> {
    Ok(InequalityReport(ineq::evaluate_mu(mu, &settings(alice, bob, plane)?).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (kind, alice = None, bob = None, plane = "xy"))]
fn evaluate_bell(kind: &str, alice: Option<[f64; 3]>, bob: Option<[f64; 3]>, plane: &str) -> PyResult<InequalityReport> {
    let kind: BellKind = parse(kind)?;
    let state = gedanken_core::bellstates::make_bell(kind).density();
    let mut r = ineq::evaluate(&state, &settings(alice, bob, plane)?).map_err(err)?;
    r.state = kind.to_string();
    Ok(InequalityReport(r))
}

/// Six ±1 values `A1, A2, A3, B1, B2, B3`.
#[pyfunction]
fn evaluate_deterministic(values: [i8; 6]) -> PyResult<InequalityReport> {
    let a = ineq::DeterministicAssignment::new(values).map_err(err)?;
    Ok(InequalityReport(ineq::evaluate_deterministic(&a)))
}

/// Searches settings for `objective` ("max-chsh", "max-lf" or "joint:C,L").
/// Returns `(report, target_met)`.
#[pyfunction]
#[pyo3(signature = (objective, mu = 1.0, plane = "xy", grid = 72, refine = 200, tolerance = 0.01))]
fn search_settings(
    py: Python<'_>,
    objective: &str,
    mu: f64,
    plane: &str,
    grid: usize,
    refine: usize,
    tolerance: f64,
) -> PyResult<(InequalityReport, bool)> {
    let objective: Objective = parse(objective)?;
    let plane: Plane = parse(plane)?;
    let config = SearchConfig { grid_resolution: grid, refine_iters: refine, joint_tolerance: tolerance, ..SearchConfig::default() };
    let state = ineq::rho_mu(mu).map_err(err)?;
    let out = py.detach(|| ineq::search_settings(&state, plane, objective, &config)).map_err(err)?;
    let mut report = out.report;
    (report.state, report.mu) = (format!("rho-mu({mu})"), Some(mu));
    Ok((InequalityReport(report), out.target_met))
}

/// Reports at `mu = k/steps` for `k = 0..=steps`.
#[pyfunction]
#[pyo3(signature = (steps, alice = None, bob = None, plane = "xy"))]
fn mu_sweep(steps: usize, alice: Option<[f64; 3]>, bob: Option<[f64; 3]>, plane: &str) -> PyResult<Vec<InequalityReport>> {
    if steps == 0 {
        return Err(PyValueError::new_err("steps must be positive"));
    }
    let mus: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let reports = ineq::mu_sweep(&settings(alice, bob, plane)?, &mus).map_err(err)?;
    Ok(reports.into_iter().map(InequalityReport).collect())
}

/// `P(target | conditions)`, with events written `agent:outcome` and the
/// superobserver sequence written `agent:basis`.
#[pyfunction]
#[pyo3(signature = (target, conditions = Vec::new(), sequence = Vec::new(), formalism = "standard"))]
fn wigner_probability(target: &str, conditions: Vec<String>, sequence: Vec<String>, formalism: &str) -> PyResult<f64> {
    let target: Event = parse(target)?;
    let conditions = conditions.iter().map(|s| parse(s)).collect::<PyResult<Vec<Event>>>()?;
    let sequence = sequence.iter().map(|s| parse(s)).collect::<PyResult<Vec<MeasurementChoice>>>()?;
    match parse::<Formalism>(formalism)? {
        Formalism::Standard => {
            let order: Vec<Agent> = sequence.iter().map(|c| c.agent).collect();
            wg::standard_probability(&conditions, &target, &order).map_err(err)
        }
        Formalism::RelativeState => wg::relative_state_probability(&sequence, &conditions, &target).map_err(err),
        Formalism::SubjectiveCollapse => Err(PyValueError::new_err("use contradiction_demo for subjective collapse")),
    }
}

fn expansion_list<'py>(py: Python<'py>, x: &wg::Expansion) -> Vec<(Vec<String>, Bound<'py, PyComplex>)> {
    x.components
        .iter()
        .map(|c| (c.labels.clone(), PyComplex::from_doubles(py, c.amplitude.re, c.amplitude.im)))
        .collect()
}

/// Components `(labels, amplitude)` of the initial state with both labs in the OK/fail bases.
#[pyfunction]
fn ok_fail_expansion(py: Python<'_>) -> Vec<(Vec<String>, Bound<'_, PyComplex>)> {
    expansion_list(py, &wg::ok_fail_expansion(&wg::build_initial()))
}

/// Components of the initial state with `agent`'s lab written in `basis`.
#[pyfunction]
fn rewrite_in_basis<'py>(py: Python<'py>, agent: &str, basis: &str) -> PyResult<Vec<(Vec<String>, Bound<'py, PyComplex>)>> {
    let x = wg::rewrite_in_basis(&wg::build_initial(), parse::<Agent>(agent)?, parse::<Basis>(basis)?).map_err(err)?;
    Ok(expansion_list(py, &x))
}

/// Summary dict of the shared-record scenario; `ledgers=True` adds every entry.
#[pyfunction]
#[pyo3(signature = (n, seed, formalism = "subjective-collapse", ledgers = false))]
fn contradiction_demo<'py>(py: Python<'py>, n: usize, seed: u64, formalism: &str, ledgers: bool) -> PyResult<Bound<'py, PyAny>> {
    let (report, books) = wg::contradiction_demo(parse(formalism)?, seed, n).map_err(err)?;
    let out = to_py(py, &report)?;
    if ledgers {
        let entries: Vec<&wg::LedgerEntry> = books.iter().flat_map(|l| l.entries()).collect();
        out.set_item("ledgers", to_py(py, &entries)?)?;
    }
    Ok(out)
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct EraserConfig(er::EraserConfig);

#[pymethods]
impl EraserConfig {
    #[new]
    #[pyo3(signature = (
        mark = false, erase = false, timing = "before-screen", erase_basis = "conjugate", marker_overlap = 0.0,
        slit_separation = 4.0, sigma = 1.0, x_min = -4.025, x_max = 4.025, bins = 161
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mark: bool,
        erase: bool,
        timing: &str,
        erase_basis: &str,
        marker_overlap: f64,
        slit_separation: f64,
        sigma: f64,
        x_min: f64,
        x_max: f64,
        bins: usize,
    ) -> PyResult<Self> {
        let cfg = er::EraserConfig {
            slit_separation,
            sigma,
            x_min,
            x_max,
            bins,
            mark,
            erase,
            timing: parse::<EraseTiming>(timing)?,
            erase_basis: parse::<MarkerBasis>(erase_basis)?,
            marker_overlap,
        };
        cfg.validate().map_err(err)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn mark(&self) -> bool {
        self.0.mark
    }

    #[getter]
    fn erase(&self) -> bool {
        self.0.erase
    }

    #[getter]
    fn bins(&self) -> usize {
        self.0.bins
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }

    fn bin_centers(&self) -> Vec<f64> {
        self.0.bin_centers()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct ScreenHistogram(er::ScreenHistogram);

#[pymethods]
impl ScreenHistogram {
    #[getter]
    fn bin_centers(&self) -> Vec<f64> {
        self.0.bin_centers.clone()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.0.p.clone()
    }

    #[getter]
    fn p_plus(&self) -> Option<Vec<f64>> {
        self.0.p_plus.clone()
    }

    #[getter]
    fn p_minus(&self) -> Option<Vec<f64>> {
        self.0.p_minus.clone()
    }

    #[getter]
    fn counts(&self) -> Option<Vec<u64>> {
        self.0.counts.clone()
    }

    #[getter]
    fn marker_probabilities(&self) -> Option<[f64; 2]> {
        self.0.marker_probabilities
    }

    /// Fringe visibility of "screen", "plus" or "minus" over `|x| <= half_width`.
    #[pyo3(signature = (series = "screen", half_width = 1.0))]
    fn visibility(&self, series: &str, half_width: f64) -> PyResult<Option<f64>> {
        let s = match series {
            "screen" => er::Series::Screen,
            "plus" => er::Series::Plus,
            "minus" => er::Series::Minus,
            other => return Err(PyValueError::new_err(format!("unknown series '{other}'"))),
        };
        Ok(self.0.visibility(s, half_width))
    }

    fn to_csv(&self) -> PyResult<String> {
        csv_string(|w| self.0.write_csv(w))
    }
}

#[pyfunction]
fn analytic_histogram(config: &EraserConfig) -> PyResult<ScreenHistogram> {
    Ok(ScreenHistogram(er::analytic_histogram(&config.0).map_err(err)?))
}

/// Seeded particle sampling; conditionals are filled when the config erases.
#[pyfunction]
fn sample_screen(py: Python<'_>, config: &EraserConfig, seed: u64, n: usize) -> PyResult<ScreenHistogram> {
    let cfg = config.0.clone();
    let h = py.detach(|| er::screen_distribution(&cfg, seed, n)).map_err(err)?;
    Ok(ScreenHistogram(h))
}

/// One erase decision per particle. Returns `(all, erased, kept, max_marginal_z)`.
#[pyfunction]
fn sample_with_choices(
    config: &EraserConfig,
    seed: u64,
    choices: Vec<bool>,
) -> PyResult<(ScreenHistogram, ScreenHistogram, ScreenHistogram, f64)> {
    let run = er::sample_with_choices(&config.0, seed, &choices).map_err(err)?;
    Ok((ScreenHistogram(run.all), ScreenHistogram(run.erased), ScreenHistogram(run.kept), run.max_marginal_z))
}

#[pyfunction]
#[pyo3(signature = (config, seeds = Vec::new(), n = 0))]
fn ordering_invariance_check<'py>(py: Python<'py>, config: &EraserConfig, seeds: Vec<u64>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &er::ordering_invariance_check(&config.0, &seeds, n).map_err(err)?)
}

#[pymodule]
fn gedanken(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TSIRELSON_CHSH_LHS", ineq::TSIRELSON_CHSH_LHS)?;
    m.add("GENERATOR_ID", gedanken_core::rng::GENERATOR_ID)?;
    m.add_class::<TrialEnsemble>()?;
    m.add_class::<InequalityReport>()?;
    m.add_class::<EraserConfig>()?;
    m.add_class::<ScreenHistogram>()?;
    m.add_function(wrap_pyfunction!(bell_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(bell_correlation_in_plane, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(figure7, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_mu, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bell, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_deterministic, m)?)?;
    m.add_function(wrap_pyfunction!(search_settings, m)?)?;
    m.add_function(wrap_pyfunction!(mu_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ok_fail_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(rewrite_in_basis, m)?)?;
    m.add_function(wrap_pyfunction!(contradiction_demo, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(sample_screen, m)?)?;
    m.add_function(wrap_pyfunction!(sample_with_choices, m)?)?;
    m.add_function(wrap_pyfunction!(ordering_invariance_check, m)?)?;
    Ok(())
}
