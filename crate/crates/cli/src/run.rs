//! Mode dispatch and artifact writing. Every run ends with `manifest.json`.

use crate::config::{serialize_config, Format, Mode, RunConfig};
use crate::plot::{spectrum_script, table_script};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use twodcs::io::{write_binary, write_csv, write_table};
use twodcs::model::{derive_rates, DerivedRates};
use twodcs::nhh::{quasi_green_freq_detuned, QuasiGreenKind};
use twodcs::popdyn::{first_extrema, population_dynamics, trace_series, uniform_times};
use twodcs::rdc::{build_rdc_with, measure_gaps, simulate_rdc};
use twodcs::rf::{green_freq_detuned, GreenKind};
use twodcs::spectra::{adjacent_gaps, find_peaks, match_peaks, Peak, SpectralAxis, SpectrumResult};
use twodcs::twod::{detuning_axis, three_level_spectrum, three_level_terms, Method};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// The engines rejected the parameters or failed numerically.
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

fn numeric(e: impl ToString) -> RunError {
    RunError::Numeric(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub kind: &'static str,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    /// Factor the stored values were divided by.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub mode: Mode,
    /// Canonical configuration text; rerunning it reproduces the outputs.
    pub config: String,
    pub parameters: RunConfig,
    pub units: BTreeMap<&'static str, &'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_rates: Option<DerivedRates>,
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

struct Writer<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    artifacts: Vec<Artifact>,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn fail(&self, name: &str, e: impl ToString) -> RunError {
        RunError::Output { path: self.path(name), message: e.to_string() }
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    /// Plot scripts read the CSV files, so asking for plots writes those too.
    fn wants_csv(&self) -> bool {
        self.wants(Format::Csv) || self.wants(Format::Plot)
    }

    fn text(&self, name: &str, content: &str) -> Result<(), RunError> {
        fs::write(self.path(name), content).map_err(|e| self.fail(name, e))
    }

    fn spectrum(&mut self, stem: &str, title: &str, s: &SpectrumResult) -> Result<(), RunError> {
        let mut files = Vec::new();
        if self.wants_csv() {
            let name = format!("{stem}.csv");
            write_csv(&self.path(&name), s).map_err(|e| self.fail(&name, e))?;
            files.push(name);
        }
        if self.wants(Format::Bin) {
            write_binary(self.dir, stem, s).map_err(|e| self.fail(&format!("{stem}.bin"), e))?;
            files.extend([format!("{stem}.bin"), format!("{stem}.json")]);
        }
        if self.wants(Format::Plot) {
            let name = format!("{stem}.gp");
            self.text(&name, &spectrum_script(stem, title, &s.grid.axis1.unit, &s.grid.axis2.unit))?;
            files.push(name);
        }
        self.artifacts.push(Artifact {
            kind: "spectrum",
            files,
            method: Some(s.method.clone()),
            t2: s.t2,
            normalization: Some(s.normalization),
        });
        Ok(())
    }

    fn table(&mut self, stem: &str, title: &str, columns: &[(&str, &[f64])], log_y: bool) -> Result<(), RunError> {
        let mut files = Vec::new();
        // Tables have no binary form; they are always written as CSV.
        let name = format!("{stem}.csv");
        write_table(&self.path(&name), title, columns).map_err(|e| self.fail(&name, e))?;
        files.push(name);
        if self.wants(Format::Plot) {
            let name = format!("{stem}.gp");
            self.text(&name, &table_script(stem, title, columns.len(), log_y))?;
            files.push(name);
        }
        self.artifacts.push(Artifact { kind: "table", files, method: None, t2: None, normalization: None });
        Ok(())
    }
}

fn t2_stem(prefix: &str, t2: f64) -> String {
    format!("{prefix}_t2_{t2:?}us")
}

fn peak_json(peaks: &[Peak]) -> Value {
    peaks.iter().map(|p| json!([p.omega1, p.omega3, p.height])).collect()
}

fn spacings(peaks: &[Peak], tolerance: f64) -> Value {
    json!({
        "omega1": adjacent_gaps(peaks, SpectralAxis::Omega1, tolerance),
        "omega3": adjacent_gaps(peaks, SpectralAxis::Omega3, tolerance),
    })
}

fn normalized_spectrum(cfg: &RunConfig, method: Method, t2: f64) -> Result<SpectrumResult, RunError> {
    let axis = detuning_axis(cfg.spectrum.half_width, cfg.spectrum.count).map_err(numeric)?;
    three_level_spectrum(&cfg.three_level, method, t2, &axis).map_err(numeric)?.normalize_real().map_err(numeric)
}

fn run_spectra(w: &mut Writer, method: Method) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let mut rows = Vec::new();
    for &t2 in &cfg.spectrum.t2 {
        let s = normalized_spectrum(cfg, method, t2)?;
        let stem = t2_stem(method.label(), t2);
        w.spectrum(&stem, &format!("{} at t2 = {t2} us", method.label()), &s)?;
        if cfg.output.split_paths {
            let axis = detuning_axis(cfg.spectrum.half_width, cfg.spectrum.count).map_err(numeric)?;
            for (label, mut term) in three_level_terms(&cfg.three_level, method, t2, &axis).map_err(numeric)? {
                // Terms share the total's scale so they add up to it.
                term.grid = term.grid.scaled(1.0 / s.normalization);
                term.normalization = s.normalization;
                w.spectrum(&format!("{stem}_{label}"), &format!("{} term {label} at t2 = {t2} us", method.label()), &term)?;
            }
        }
        let peaks = find_peaks(&s.grid, cfg.spectrum.peak_fraction).map_err(numeric)?;
        rows.push(json!({
            "t2": t2,
            "normalization": s.normalization,
            "peaks": peak_json(&peaks),
            "spacings": spacings(&peaks, 2.0 * s.grid.axis1.step),
        }));
    }
    Ok(json!({ "peak_fraction": cfg.spectrum.peak_fraction, "peak_format": "[omega1, omega3, height]", "spectra": rows }))
}

fn run_popdyn(w: &mut Writer) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let t = uniform_times(cfg.popdyn.t2_max, cfg.popdyn.count);
    let tab = population_dynamics(&cfg.three_level, &t).map_err(numeric)?;
    w.table("popdyn", "waiting-time kernels; t2 in us, coherence kernels by imaginary part", &tab.columns(), false)?;
    let (valley, peak) = first_extrema(&tab.t2, &tab.nhh_eeee);
    Ok(json!({ "nhh_eeee_first_valley": valley, "nhh_eeee_first_peak": peak }))
}

fn run_trace(w: &mut Writer) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let t = uniform_times(cfg.popdyn.t2_max, cfg.popdyn.count);
    let s = trace_series(&cfg.three_level, &t, None).map_err(numeric)?;
    w.table("trace", "density-matrix trace; t2 in us", &s.columns(), false)?;
    let last = |v: &[f64]| v.last().copied();
    Ok(json!({
        "final": {
            "lindblad_from_b": last(&s.lindblad_from_b),
            "lindblad_from_e": last(&s.lindblad_from_e),
            "nhh_from_b": last(&s.nhh_from_b),
            "nhh_from_e": last(&s.nhh_from_e),
        }
    }))
}

fn run_greens(w: &mut Writer) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let r = derive_rates(&cfg.three_level).map_err(numeric)?;
    let axis = detuning_axis(cfg.spectrum.half_width, cfg.spectrum.count).map_err(numeric)?;
    let x = axis.values();
    let i = Complex64::new(0.0, 1.0);
    let kinds = [
        ("bebe", GreenKind::BebeW, QuasiGreenKind::Bebe, i),
        ("ebeb", GreenKind::EbebW, QuasiGreenKind::Ebeb, -i),
        ("bcbe", GreenKind::BcbeW, QuasiGreenKind::Bcbe, i),
        ("ebcb", GreenKind::EbcbW, QuasiGreenKind::Ebcb, -i),
    ];
    let mut names = vec!["detuning_rad_per_us".to_string()];
    let mut cols = vec![x.clone()];
    for (label, g, q, phase) in kinds {
        let rf: Vec<Complex64> = x.iter().map(|&x| green_freq_detuned(g, x, &r)).collect::<Result<_, _>>().map_err(numeric)?;
        let nhh: Vec<Complex64> =
            x.iter().map(|&x| quasi_green_freq_detuned(q, x, &r).map(|z| phase * z)).collect::<Result<_, _>>().map_err(numeric)?;
        for (engine, v) in [("rf", &rf), ("nhh", &nhh)] {
            names.push(format!("{engine}_{label}_re"));
            cols.push(v.iter().map(|z| z.re).collect());
            names.push(format!("{engine}_{label}_im"));
            cols.push(v.iter().map(|z| z.im).collect());
        }
    }
    let columns: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(cols.iter().map(Vec::as_slice)).collect();
    w.table(
        "greens",
        "frequency kernels vs detuning from omega_e - omega_b; nhh columns carry the factor i (bebe, bcbe) or -i (ebeb, ebcb)",
        &columns,
        false,
    )?;
    Ok(json!({ "points": x.len() }))
}

fn run_rdc(w: &mut Writer) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let settings = &cfg.rdc.settings;
    let sys = build_rdc_with(settings.gamma_cm).map_err(numeric)?;
    let s = simulate_rdc(&sys, settings).map_err(numeric)?;
    w.spectrum("rdc", "absorptive six-level spectrum", &s)?;
    let peaks = find_peaks(&s.grid, cfg.rdc.peak_fraction).map_err(numeric)?;
    let cols: [Vec<f64>; 3] = [
        peaks.iter().map(|p| p.omega1).collect(),
        peaks.iter().map(|p| p.omega3).collect(),
        peaks.iter().map(|p| p.height).collect(),
    ];
    w.table(
        "rdc_peaks",
        "significant peaks of the absorptive spectrum; positions in cm-1",
        &[("omega1_cm", &cols[0]), ("omega3_cm", &cols[1]), ("height", &cols[2])],
        false,
    )?;
    let gaps = measure_gaps(&sys, &peaks, 2.0);
    Ok(json!({
        "normalization": s.normalization,
        "peak_fraction": cfg.rdc.peak_fraction,
        "peaks": peak_json(&peaks),
        "gaps_cm": gaps,
    }))
}

fn run_compare(w: &mut Writer) -> Result<Value, RunError> {
    let cfg = w.cfg;
    let [ma, mb] = cfg.compare.methods;
    let mut rows = Vec::new();
    for &t2 in &cfg.spectrum.t2 {
        let sa = normalized_spectrum(cfg, ma, t2)?;
        let sb = normalized_spectrum(cfg, mb, t2)?;
        let pa = find_peaks(&sa.grid, cfg.spectrum.peak_fraction).map_err(numeric)?;
        let pb = find_peaks(&sb.grid, cfg.spectrum.peak_fraction).map_err(numeric)?;
        let matched = match_peaks(&pa, &pb, 2);
        let mut cols: [Vec<f64>; 9] = Default::default();
        let (mut worst_height, mut worst_relative, mut worst_position) = (0.0f64, 0.0f64, 0.0f64);
        for (p, m) in pa.iter().zip(&matched) {
            let q = m.map(|k| pb[k]);
            let (q1, q3, qh) = q.map_or((f64::NAN, f64::NAN, f64::NAN), |q| (q.omega1, q.omega3, q.height));
            for (col, v) in cols.iter_mut().zip([p.omega1, p.omega3, p.height, q1, q3, qh, q1 - p.omega1, q3 - p.omega3, qh - p.height]) {
                col.push(v);
            }
            if let Some(q) = q {
                worst_height = worst_height.max((q.height - p.height).abs());
                worst_relative = worst_relative.max((q.height - p.height).abs() / p.height.abs());
                worst_position = worst_position.max((q.omega1 - p.omega1).abs().max((q.omega3 - p.omega3).abs()));
            }
        }
        let names = ["omega1_a", "omega3_a", "height_a", "omega1_b", "omega3_b", "height_b", "d_omega1", "d_omega3", "d_height"];
        let columns: Vec<(&str, &[f64])> = names.iter().copied().zip(cols.iter().map(Vec::as_slice)).collect();
        let stem = t2_stem("compare", t2);
        w.table(
            &stem,
            &format!("peaks of a = {} vs b = {} at t2 = {t2} us; positions in rad/us, heights normalized per method", ma.label(), mb.label()),
            &columns,
            false,
        )?;
        let tolerance = 2.0 * sa.grid.axis1.step;
        rows.push(json!({
            "t2": t2,
            "peaks_a": pa.len(),
            "peaks_b": pb.len(),
            "unmatched": matched.iter().filter(|m| m.is_none()).count(),
            "max_height_difference": worst_height,
            "max_relative_height_difference": worst_relative,
            "max_position_difference": worst_position,
            "spacings_a": spacings(&pa, tolerance),
            "spacings_b": spacings(&pb, tolerance),
            "normalization_a": sa.normalization,
            "normalization_b": sb.normalization,
        }));
    }
    Ok(json!({ "methods": [ma.label(), mb.label()], "comparisons": rows }))
}

/// Runs the configured mode, writing artifacts and `manifest.json` into the
/// output directory.
pub fn run(cfg: &RunConfig) -> Result<Manifest, RunError> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| RunError::Output { path: dir.to_path_buf(), message: e.to_string() })?;
    let mut w = Writer { dir, cfg, artifacts: Vec::new() };
    let summary = match cfg.mode {
        Mode::Rf2d | Mode::Nhh2d | Mode::RfNhhPaths2d => run_spectra(&mut w, cfg.mode.method().expect("2D mode"))?,
        Mode::Popdyn => run_popdyn(&mut w)?,
        Mode::Trace => run_trace(&mut w)?,
        Mode::Greens => run_greens(&mut w)?,
        Mode::Rdc => run_rdc(&mut w)?,
        Mode::Compare => run_compare(&mut w)?,
    };
    let derived_rates = if cfg.mode == Mode::Rdc { None } else { Some(derive_rates(&cfg.three_level).map_err(numeric)?) };
    let units = if cfg.mode == Mode::Rdc {
        [("frequency", "cm-1"), ("time", "ps")]
    } else {
        [("frequency", "rad/us (angular)"), ("time", "us")]
    };
    let manifest = Manifest {
        tool: "twodcs",
        version: env!("CARGO_PKG_VERSION"),
        library_version: twodcs::VERSION,
        mode: cfg.mode,
        config: serialize_config(cfg),
        parameters: cfg.clone(),
        units: units.into_iter().collect(),
        derived_rates,
        artifacts: w.artifacts,
        summary,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(numeric)?;
    fs::write(dir.join("manifest.json"), text + "\n")
        .map_err(|e| RunError::Output { path: dir.join("manifest.json"), message: e.to_string() })?;
    Ok(manifest)
}
