//! TOML configuration: bundled defaults, user file, `--set` overrides,
//! validation and a canonical hash.

use std::fs;
use std::path::Path;

use gspin_core::coherence::CoherenceParams;
use gspin_core::photodynamics::RateParams;
use gspin_core::sequencer::{MwMode, SystemParams};
use gspin_core::spin_model::{Transition, ZfsParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::CliError;

pub const DEFAULTS_PROFILE: &str = include_str!("../profiles/gcenter-defaults.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub zfs: ZfsSection,
    pub rates: RatesSection,
    pub coherence: CoherenceSection,
    pub field: FieldSection,
    pub laser: LaserSection,
    pub odmr: OdmrSection,
    pub contrast_map: ContrastMapSection,
    pub field_split: FieldSplitSection,
    pub lac_sweep: LacSection,
    pub trpl_diff: TrplSection,
    pub lifetime_diff: LifetimeSection,
    pub rabi: RabiSection,
    pub protocol: ProtocolSection,
    pub fit: FitSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZfsSection {
    pub d: f64,
    pub e: f64,
    pub gamma_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub tau_e_ns: f64,
    pub k_isc: f64,
    pub branching: [f64; 3],
    pub tau_0: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub pump_coeff: f64,
    pub detrap_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSection {
    pub t2_star: f64,
    pub gamma_phi_dyn: f64,
    pub rabi_spread: f64,
    pub nodes: usize,
}

/// Lab field used by recipes that do not sweep it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub magnitude: f64,
    pub direction: [f64; 3],
    pub misalignment_deg: f64,
    pub tilt_towards: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub power: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdmrSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub mw_duration_ns: f64,
    pub rabi_rate: f64,
    pub mode: String,
    pub transition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContrastMapSection {
    pub t_a: Vec<f64>,
    pub t_b: Vec<f64>,
    pub mw_duration_ns: f64,
    pub rabi_rate: f64,
    pub mode: String,
    pub transition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSplitSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub direction: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LacSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub axis: [f64; 3],
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrplSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Field magnitude (mT) along `field.direction`.
    pub field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub transition: String,
    pub half_pi_ns: f64,
    pub pulse_angle_deg: f64,
    pub wait: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub half_pi_ns: f64,
    pub transition: String,
    pub powers: Vec<f64>,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    /// "ramsey", "echo" or "cpmg-N".
    pub kind: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub transition: String,
    /// 0 for instantaneous pulses.
    pub pulse_rabi_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: String,
    /// Result file to fit; empty for seeded synthetic data.
    pub input: String,
    pub x_column: String,
    pub y_column: String,
    /// Initial parameters; empty for the model's default guess.
    pub init: Vec<f64>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub truth: Vec<f64>,
    /// Gaussian noise, relative to the peak |y| of the noiseless data.
    pub noise: f64,
}

fn parse_table(text: &str, origin: &str) -> Result<Table, CliError> {
    text.parse::<Table>().map_err(|e| CliError::Parse(format!("{origin}: {e}")))
}

/// Recursively overlays `over` onto `base`. Tables merge, anything else
/// replaces.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies one `key.path=value` override. The value is read as a TOML value
/// and falls back to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override '{assignment}' is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("bad key '{key}'")));
    }
    let mut node = table;
    for p in &parts[..parts.len() - 1] {
        node = match node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => return Err(CliError::Usage(format!("'{p}' in '{key}' is not a section"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Defaults, then `text` (if any), then overrides; validated.
pub fn config_from_str(text: Option<&str>, origin: &str, overrides: &[String]) -> Result<Config, CliError> {
    let mut table = parse_table(DEFAULTS_PROFILE, "defaults profile")?;
    if let Some(text) = text {
        merge(&mut table, parse_table(text, origin)?);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let config: Config = Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Parse(format!("{origin}: {}", e.message())))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    config_from_str(Some(&text), &path.display().to_string(), overrides)
}

fn keyed(section: &str, e: gspin_core::Error) -> CliError {
    match e {
        gspin_core::Error::Domain { param, reason } => CliError::Invalid { key: format!("{section}.{param}"), reason },
        other => CliError::Numerical(other.to_string()),
    }
}

/// Prefixes a core domain error with the config section it came from.
pub fn with_key<T>(section: &str, r: gspin_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| keyed(section, e))
}

fn check(cond: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Invalid { key: key.to_string(), reason: reason.to_string() })
    }
}

fn check_range(section: &str, start: f64, stop: f64, step: f64) -> Result<(), CliError> {
    check(start.is_finite() && stop.is_finite() && stop >= start, &format!("{section}.stop"), "need finite start <= stop")?;
    check(step.is_finite() && step > 0.0, &format!("{section}.step"), "must be finite and > 0")?;
    check((stop - start) / step < 1e6, &format!("{section}.step"), "sweep longer than 1e6 points")
}

pub fn parse_transition(key: &str, s: &str) -> Result<Transition, CliError> {
    s.parse().map_err(|_| CliError::Invalid { key: key.to_string(), reason: format!("unknown transition '{s}' (plus-zero, minus-zero, plus-minus)") })
}

pub fn parse_mode(key: &str, s: &str) -> Result<MwMode, CliError> {
    match s {
        "addressed" => Ok(MwMode::Addressed),
        "nearest-pair" => Ok(MwMode::NearestPair),
        "ideal-swap" => Ok(MwMode::IdealSwap),
        _ => Err(CliError::Invalid { key: key.to_string(), reason: format!("unknown mode '{s}' (addressed, nearest-pair, ideal-swap)") }),
    }
}

impl Config {
    pub fn defaults() -> Config {
        config_from_str(None, "defaults", &[]).expect("bundled profile is valid")
    }

    pub fn zfs(&self) -> ZfsParams {
        ZfsParams { d: self.zfs.d, e: self.zfs.e, gamma_e: self.zfs.gamma_e }
    }

    pub fn rates(&self) -> RateParams {
        let r = &self.rates;
        RateParams {
            tau_e_ns: r.tau_e_ns,
            k_isc: r.k_isc,
            branching: r.branching,
            tau_0: r.tau_0,
            tau_plus: r.tau_plus,
            tau_minus: r.tau_minus,
            pump_coeff: r.pump_coeff,
            detrap_coeff: r.detrap_coeff,
        }
    }

    pub fn coherence(&self) -> CoherenceParams {
        let c = &self.coherence;
        CoherenceParams { t2_star: c.t2_star, gamma_phi_dyn: c.gamma_phi_dyn, rabi_spread: c.rabi_spread, nodes: c.nodes }
    }

    pub fn system(&self) -> SystemParams {
        SystemParams { zfs: self.zfs(), rates: self.rates(), coherence: self.coherence() }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        with_key("zfs", self.zfs().validate())?;
        with_key("rates", self.rates().validate())?;
        with_key("coherence", self.coherence().validate())?;
        let f = &self.field;
        check(f.magnitude.is_finite() && f.magnitude >= 0.0, "field.magnitude", "must be finite and >= 0")?;
        check(f.direction.iter().any(|v| *v != 0.0) && f.direction.iter().all(|v| v.is_finite()), "field.direction", "must be a finite non-zero vector")?;
        check(f.misalignment_deg.is_finite() && f.misalignment_deg >= 0.0, "field.misalignment_deg", "must be finite and >= 0")?;
        check(f.tilt_towards.iter().all(|v| v.is_finite()), "field.tilt_towards", "must be finite")?;
        check(self.laser.power.is_finite() && self.laser.power >= 0.0, "laser.power", "must be finite and >= 0")?;
        check(self.laser.duration.is_finite() && self.laser.duration > 0.2, "laser.duration", "must exceed the 0.2 us readout window")?;

        let o = &self.odmr;
        check_range("odmr", o.start, o.stop, o.step)?;
        check(o.start > 0.0, "odmr.start", "must be > 0")?;
        check(o.t_a >= 0.0 && o.t_b >= 0.0, "odmr.t_a", "delays must be >= 0")?;
        check(o.mw_duration_ns.is_finite() && o.mw_duration_ns >= 0.0, "odmr.mw_duration_ns", "must be finite and >= 0")?;
        check(o.rabi_rate.is_finite() && o.rabi_rate >= 0.0, "odmr.rabi_rate", "must be finite and >= 0")?;
        parse_mode("odmr.mode", &o.mode)?;
        parse_transition("odmr.transition", &o.transition)?;

        let c = &self.contrast_map;
        check(!c.t_a.is_empty() && c.t_a.iter().all(|t| t.is_finite() && *t >= 0.0), "contrast_map.t_a", "need a non-empty list of delays >= 0")?;
        check(!c.t_b.is_empty() && c.t_b.iter().all(|t| t.is_finite() && *t >= 0.0), "contrast_map.t_b", "need a non-empty list of delays >= 0")?;
        check(c.mw_duration_ns.is_finite() && c.mw_duration_ns >= 0.0, "contrast_map.mw_duration_ns", "must be finite and >= 0")?;
        check(c.rabi_rate.is_finite() && c.rabi_rate >= 0.0, "contrast_map.rabi_rate", "must be finite and >= 0")?;
        parse_mode("contrast_map.mode", &c.mode)?;
        parse_transition("contrast_map.transition", &c.transition)?;

        check_range("field_split", self.field_split.start, self.field_split.stop, self.field_split.step)?;
        check(self.field_split.start >= 0.0, "field_split.start", "must be >= 0")?;
        check_range("lac_sweep", self.lac_sweep.start, self.lac_sweep.stop, self.lac_sweep.step)?;
        check(self.lac_sweep.start >= 0.0, "lac_sweep.start", "must be >= 0")?;
        check(self.lac_sweep.delay.is_finite() && self.lac_sweep.delay >= 0.0, "lac_sweep.delay", "must be finite and >= 0")?;
        check_range("trpl_diff", self.trpl_diff.start, self.trpl_diff.stop, self.trpl_diff.step)?;
        check(self.trpl_diff.start > 0.0, "trpl_diff.start", "must be > 0")?;
        check(self.trpl_diff.field.is_finite() && self.trpl_diff.field >= 0.0, "trpl_diff.field", "must be finite and >= 0")?;

        let l = &self.lifetime_diff;
        check_range("lifetime_diff", l.start, l.stop, l.step)?;
        check(l.start >= 0.0, "lifetime_diff.start", "must be >= 0")?;
        check(l.half_pi_ns.is_finite() && l.half_pi_ns > 0.0, "lifetime_diff.half_pi_ns", "must be finite and > 0")?;
        check(l.pulse_angle_deg.is_finite() && l.pulse_angle_deg >= 0.0, "lifetime_diff.pulse_angle_deg", "must be finite and >= 0")?;
        check(l.wait.is_finite() && l.wait >= 0.0, "lifetime_diff.wait", "must be finite and >= 0")?;
        parse_transition("lifetime_diff.transition", &l.transition)?;

        let r = &self.rabi;
        check_range("rabi", r.start, r.stop, r.step)?;
        check(r.start >= 0.0, "rabi.start", "must be >= 0")?;
        check(r.half_pi_ns.is_finite() && r.half_pi_ns > 0.0, "rabi.half_pi_ns", "must be finite and > 0")?;
        check(r.powers.iter().all(|p| p.is_finite() && *p >= 0.0), "rabi.powers", "must be finite and >= 0")?;
        check(r.coefficient.is_finite() && r.coefficient >= 0.0, "rabi.coefficient", "must be finite and >= 0")?;
        parse_transition("rabi.transition", &r.transition)?;

        let p = &self.protocol;
        check_range("protocol", p.start, p.stop, p.step)?;
        check(p.start >= 0.0, "protocol.start", "must be >= 0")?;
        check(p.pulse_rabi_rate.is_finite() && p.pulse_rabi_rate >= 0.0, "protocol.pulse_rabi_rate", "must be finite and >= 0")?;
        crate::recipes::parse_protocol_kind(&p.kind)?;
        parse_transition("protocol.transition", &p.transition)?;

        let fit = &self.fit;
        crate::synthetic::parse_model(&fit.model)?;
        check_range("fit", fit.start, fit.stop, fit.step)?;
        check(fit.noise.is_finite() && fit.noise >= 0.0, "fit.noise", "must be finite and >= 0")?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serialises");
        let canonical = serde_json::to_string(&v).expect("value serialises");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = config_from_str(Some(""), "empty", &[]).unwrap();
        assert_eq!(c, Config::defaults());
        assert_eq!(c.zfs(), ZfsParams::G_CENTER);
        assert_eq!(c.rates(), RateParams::G_CENTER);
        assert_eq!(c.coherence(), CoherenceParams::G_CENTER);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = config_from_str(Some("[zfs]\ndd = 3.0\n"), "typo.toml", &[]).unwrap_err();
        assert!(e.to_string().contains("dd"), "{e}");
        assert!(config_from_str(Some("bogus = 1\n"), "x", &[]).is_err());
    }

    #[test]
    fn parse_errors_carry_a_location() {
        let e = config_from_str(Some("[zfs]\nd = = 3\n"), "bad.toml", &[]).unwrap_err();
        let s = e.to_string();
        assert!(s.contains("bad.toml") && s.contains("line 2"), "{s}");
    }

    #[test]
    fn overrides_and_validation_name_the_key() {
        let c = config_from_str(None, "x", &["zfs.e=300".into(), "odmr.mode=ideal-swap".into()]).unwrap();
        assert_eq!(c.zfs.e, 300.0);
        assert_eq!(c.odmr.mode, "ideal-swap");
        let e = config_from_str(None, "x", &["rates.tau_0=-1".into()]).unwrap_err();
        assert!(e.to_string().contains("rates.tau_0"), "{e}");
        let e = config_from_str(None, "x", &["odmr.transition=sideways".into()]).unwrap_err();
        assert!(e.to_string().contains("odmr.transition"), "{e}");
        assert!(matches!(config_from_str(None, "x", &["novalue".into()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn hash_ignores_key_order_and_tracks_values() {
        let a = config_from_str(Some("seed = 3\n[zfs]\nd = -1200.0\ne = 500.0\n"), "a", &[]).unwrap();
        let b = config_from_str(Some("[zfs]\ne = 500.0\nd = -1200.0\n"), "b", &["seed=3".into()]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), Config::defaults().hash());
        assert_eq!(a.hash().len(), 64);
    }
}
