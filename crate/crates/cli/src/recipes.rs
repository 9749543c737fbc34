//! Recipe dispatch: Config → core parameters → ResultFile.

use std::time::{SystemTime, UNIX_EPOCH};

use gspin_core::coherence::{rabi_rate_from_half_pi, Protocol, ProtocolKind, PulseMode};
use gspin_core::fitting::{fit, ArrheniusForm, FitModel};
use gspin_core::photodynamics::LaserPulse;
use gspin_core::sequencer::recipes::{
    self as core_recipes, arange, CoherenceRecipeParams, ContrastMapParams, ExperimentResult, FieldSplitParams, LacParams,
    LifetimeDiffParams, OdmrParams, RabiParams, TrplParams,
};
use nalgebra::Vector3;

use crate::config::{parse_mode, parse_transition, Config};
use crate::result::{read_result, Column, ResultFile, FORMAT_NAME, SCHEMA_VERSION};
use crate::synthetic::{generate, initial_guess, parse_model, reference_case};
use crate::CliError;

pub const RECIPES: [&str; 9] =
    ["odmr", "trpl-diff", "contrast-map", "field-split", "lac-sweep", "rabi", "coherence", "lifetime-diff", "fit"];

const ZFS_KEYS: [&str; 3] = ["d", "e", "gamma_e"];
const RATE_KEYS: [&str; 8] = ["tau_e_ns", "k_isc", "branching", "tau_0", "tau_plus", "tau_minus", "pump_coeff", "detrap_coeff"];
const COHERENCE_KEYS: [&str; 4] = ["t2_star", "gamma_phi_dyn", "rabi_spread", "nodes"];

/// Maps a core error to the config key that most likely caused it.
fn keyed(section: &str, e: gspin_core::Error) -> CliError {
    match e {
        gspin_core::Error::Domain { param, reason } => {
            let owner = if ZFS_KEYS.contains(&param) {
                "zfs"
            } else if RATE_KEYS.contains(&param) {
                "rates"
            } else if COHERENCE_KEYS.contains(&param) {
                "coherence"
            } else {
                section
            };
            CliError::Invalid { key: format!("{owner}.{param}"), reason }
        }
        other => CliError::Numerical(other.to_string()),
    }
}

fn run<T>(section: &str, r: gspin_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| keyed(section, e))
}

pub fn parse_protocol_kind(s: &str) -> Result<ProtocolKind, CliError> {
    let bad = || CliError::Invalid { key: "protocol.kind".into(), reason: format!("unknown protocol '{s}' (ramsey, echo, cpmg-N)") };
    match s {
        "ramsey" => Ok(ProtocolKind::Ramsey),
        "echo" => Ok(ProtocolKind::Echo),
        _ => match s.strip_prefix("cpmg-").map(str::parse::<usize>) {
            Some(Ok(n)) if n >= 1 => Ok(ProtocolKind::Cpmg(n)),
            _ => Err(bad()),
        },
    }
}

fn vector(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn unit(v: [f64; 3]) -> Vector3<f64> {
    let v = vector(v);
    v / v.norm()
}

fn laser(c: &Config) -> LaserPulse {
    LaserPulse { power: c.laser.power, duration: c.laser.duration }
}

fn lab_field(c: &Config) -> Vector3<f64> {
    unit(c.field.direction) * c.field.magnitude
}

/// Runs `name` and returns the core result (no file metadata).
pub fn run_experiment(name: &str, c: &Config) -> Result<ExperimentResult, CliError> {
    let sys = c.system();
    match name {
        "odmr" => {
            let o = &c.odmr;
            let p = OdmrParams {
                frequencies: run("odmr", arange(o.start, o.stop, o.step))?,
                field: lab_field(c),
                laser: laser(c),
                t_a: o.t_a,
                t_b: o.t_b,
                mw_duration_ns: o.mw_duration_ns,
                rabi_rate: o.rabi_rate,
                mode: parse_mode("odmr.mode", &o.mode)?,
                target: parse_transition("odmr.transition", &o.transition)?,
            };
            run("odmr", core_recipes::odmr_spectrum(&sys, &p))
        }
        "contrast-map" => {
            let m = &c.contrast_map;
            let p = ContrastMapParams {
                t_a: m.t_a.clone(),
                t_b: m.t_b.clone(),
                field: lab_field(c),
                laser: laser(c),
                mw_duration_ns: m.mw_duration_ns,
                rabi_rate: m.rabi_rate,
                mode: parse_mode("contrast_map.mode", &m.mode)?,
                target: parse_transition("contrast_map.transition", &m.transition)?,
            };
            run("contrast_map", core_recipes::contrast_map(&sys, &p))
        }
        "field-split" => {
            let f = &c.field_split;
            let p = FieldSplitParams { fields: run("field_split", arange(f.start, f.stop, f.step))?, direction: vector(f.direction) };
            run("field_split", core_recipes::field_split(&sys, &p))
        }
        "lac-sweep" => {
            let l = &c.lac_sweep;
            let p = LacParams {
                fields: run("lac_sweep", arange(l.start, l.stop, l.step))?,
                axis: vector(l.axis),
                misalignment_deg: c.field.misalignment_deg,
                tilt_towards: vector(c.field.tilt_towards),
                laser: laser(c),
                delay: l.delay,
            };
            run("lac_sweep", core_recipes::lac_sweep(&sys, &p))
        }
        "trpl-diff" => {
            let t = &c.trpl_diff;
            let p = TrplParams {
                delays: run("trpl_diff", arange(t.start, t.stop, t.step))?,
                field: unit(c.field.direction) * t.field,
                laser: laser(c),
            };
            run("trpl_diff", core_recipes::trpl_differential(&sys, &p))
        }
        "lifetime-diff" => {
            let l = &c.lifetime_diff;
            let p = LifetimeDiffParams {
                delays: run("lifetime_diff", arange(l.start, l.stop, l.step))?,
                target: parse_transition("lifetime_diff.transition", &l.transition)?,
                rabi_rate: rabi_rate_from_half_pi(l.half_pi_ns),
                pulse_angle: l.pulse_angle_deg.to_radians(),
                wait: l.wait,
                laser: laser(c),
                field: lab_field(c),
            };
            run("lifetime_diff", core_recipes::lifetime_differential(&sys, &p))
        }
        "rabi" => {
            let r = &c.rabi;
            let p = RabiParams {
                durations: run("rabi", arange(r.start, r.stop, r.step))?,
                rabi_rate: rabi_rate_from_half_pi(r.half_pi_ns),
                target: parse_transition("rabi.transition", &r.transition)?,
                powers: r.powers.clone(),
                coefficient: r.coefficient,
            };
            run("rabi", core_recipes::rabi(&sys, &p))
        }
        "coherence" => {
            let p = &c.protocol;
            let pulses = if p.pulse_rabi_rate == 0.0 { PulseMode::Ideal } else { PulseMode::Finite { rabi_rate: p.pulse_rabi_rate } };
            let protocol = Protocol {
                kind: parse_protocol_kind(&p.kind)?,
                target: parse_transition("protocol.transition", &p.transition)?,
                pulses,
            };
            let params = CoherenceRecipeParams { protocol, times: run("protocol", arange(p.start, p.stop, p.step))? };
            run("protocol", core_recipes::coherence(&sys, &params))
        }
        "fit" => run_fit(c),
        other => Err(CliError::Usage(format!("unknown recipe '{other}' (one of {})", RECIPES.join(", ")))),
    }
}

fn fit_data(c: &Config, model: &FitModel) -> Result<(Vec<f64>, Vec<f64>, String, String), CliError> {
    let f = &c.fit;
    if f.input.is_empty() {
        let x = run("fit", arange(f.start, f.stop, f.step))?;
        let truth = if f.truth.is_empty() { reference_case(model).1 } else { f.truth.clone() };
        let y = generate(model, &x, &truth, f.noise, c.seed)?;
        return Ok((x, y, "x".into(), "1".into()));
    }
    let r = read_result(std::path::Path::new(&f.input))?;
    let pick = |name: &str, fallback: usize, key: &str| -> Result<&Column, CliError> {
        if name.is_empty() {
            r.columns.get(fallback).ok_or_else(|| CliError::Invalid { key: key.into(), reason: "input has too few columns".into() })
        } else {
            r.column(name).ok_or_else(|| CliError::Invalid { key: key.into(), reason: format!("no column '{name}' in {}", f.input) })
        }
    };
    let xc = pick(&f.x_column, 0, "fit.x_column")?;
    let yc = pick(&f.y_column, 1, "fit.y_column")?;
    Ok((xc.values.clone(), yc.values.clone(), xc.name.clone(), xc.unit.clone()))
}

fn run_fit(c: &Config) -> Result<ExperimentResult, CliError> {
    use core_recipes::{Scalar, Series};
    let model = parse_model(&c.fit.model)?;
    let (x, y, x_name, x_unit) = fit_data(c, &model)?;
    let mut forms = vec![(model, String::new())];
    // The two Arrhenius forms are always reported together.
    match model {
        FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating) => forms.push((FitModel::ArrheniusAmplitude(ArrheniusForm::Pure), "pure_".into())),
        FitModel::ArrheniusAmplitude(ArrheniusForm::Pure) => forms.push((FitModel::ArrheniusAmplitude(ArrheniusForm::Saturating), "saturating_".into())),
        _ => {}
    }
    let mut res = ExperimentResult {
        recipe: "fit".into(),
        axes: vec![Series::new(&x_name, &x_unit, x.clone())],
        signal: Series::new("data", "1", y.clone()),
        extra: Vec::new(),
        per_family: Vec::new(),
        summary: Vec::new(),
    };
    let push = |res: &mut ExperimentResult, name: String, unit: &str, value: f64| res.summary.push(Scalar { name, unit: unit.into(), value });
    for (k, (m, prefix)) in forms.iter().enumerate() {
        let init = if k == 0 && !c.fit.init.is_empty() { c.fit.init.clone() } else { initial_guess(m, &x, &y)? };
        let r = run("fit", fit(m, &x, &y, None, &init))?;
        res.extra.push(Series::new(&format!("{prefix}model"), "1", run("fit", m.evaluate(&x, &r.params))?));
        for ((name, unit), (v, s)) in m.param_names().iter().zip(m.param_units()).zip(r.params.iter().zip(&r.uncertainties)) {
            push(&mut res, format!("{prefix}{name}"), unit, *v);
            push(&mut res, format!("{prefix}{name}_sigma"), unit, *s);
        }
        push(&mut res, format!("{prefix}converged"), "1", if r.converged { 1.0 } else { 0.0 });
        push(&mut res, format!("{prefix}iterations"), "1", r.iterations as f64);
        push(&mut res, format!("{prefix}residual_norm"), "1", r.residual_norm);
    }
    Ok(res)
}

fn timestamp() -> String {
    if let Ok(s) = std::env::var("SOURCE_DATE_EPOCH") {
        return s;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs().to_string()).unwrap_or_else(|_| "0".into())
}

fn series_column(s: &core_recipes::Series) -> Column {
    Column { name: s.name.clone(), unit: s.unit.clone(), percent: s.percent, values: s.values.clone() }
}

/// Flattens an experiment into a result file with provenance metadata.
pub fn to_result_file(res: &ExperimentResult, c: &Config) -> ResultFile {
    let mut metadata = vec![
        ("format".to_string(), format!("{FORMAT_NAME} {SCHEMA_VERSION}")),
        ("recipe".to_string(), res.recipe.clone()),
        ("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config_hash".to_string(), c.hash()),
        ("seed".to_string(), c.seed.to_string()),
        ("timestamp_unix".to_string(), timestamp()),
    ];
    for s in &res.summary {
        metadata.push((format!("summary.{}", s.name), format!("{:.16e} {}", s.value, s.unit)));
    }
    for (k, f) in res.per_family.iter().enumerate() {
        metadata.push((
            format!("family_{}", k + 1),
            format!("theta_deg={:.6} phi_deg={:.6} multiplicity={}", f.theta_deg, f.phi_deg, f.multiplicity),
        ));
    }
    let mut columns: Vec<Column> = res.axes.iter().map(series_column).collect();
    columns.push(series_column(&res.signal));
    columns.extend(res.extra.iter().map(series_column));
    for (k, f) in res.per_family.iter().enumerate() {
        columns.push(Column {
            name: format!("family_{}", k + 1),
            unit: res.signal.unit.clone(),
            percent: res.signal.percent,
            values: f.values.clone(),
        });
    }
    ResultFile { metadata, columns }
}

pub fn run_recipe(name: &str, c: &Config) -> Result<ResultFile, CliError> {
    let res = run_experiment(name, c)?;
    Ok(to_result_file(&res, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::config_from_str;

    fn small(extra: &[&str]) -> Config {
        let mut o: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        o.push("coherence.nodes=41".into());
        config_from_str(None, "test", &o).unwrap()
    }

    #[test]
    fn protocol_kinds() {
        assert_eq!(parse_protocol_kind("cpmg-8").unwrap(), ProtocolKind::Cpmg(8));
        assert!(parse_protocol_kind("cpmg-0").is_err());
        assert!(parse_protocol_kind("hahn").is_err());
    }

    #[test]
    fn lac_error_points_at_zfs_e() {
        let c = config_from_str(None, "t", &["zfs.e=1300".into()]).unwrap();
        let e = run_recipe("lac-sweep", &c).unwrap_err();
        assert!(matches!(&e, CliError::Invalid { key, .. } if key == "zfs.e"), "{e}");
    }

    #[test]
    fn unknown_recipe_is_a_usage_error() {
        assert!(matches!(run_recipe("nmr", &Config::defaults()), Err(CliError::Usage(_))));
    }

    #[test]
    fn result_file_layout() {
        let c = small(&["odmr.start=600", "odmr.stop=800", "odmr.step=10"]);
        let r = run_recipe("odmr", &c).unwrap();
        assert_eq!(r.meta("recipe"), Some("odmr"));
        assert_eq!(r.meta("config_hash"), Some(c.hash().as_str()));
        assert!(r.meta("summary.grid_peak_1").is_some());
        assert_eq!(r.columns[0].name, "frequency");
        assert!(r.columns[1].percent);
        assert!(r.columns.iter().all(|col| col.values.len() == 21));
    }

    #[test]
    fn fit_reports_both_arrhenius_forms() {
        let r = run_experiment("fit", &Config::defaults()).unwrap();
        let e_a = r.summary_value("e_a").unwrap();
        assert!((e_a - 8.7).abs() / 8.7 < 0.1, "{e_a}");
        assert!(r.summary_value("pure_e_a").is_some());
        assert_eq!(r.extra.len(), 2);
    }
}
