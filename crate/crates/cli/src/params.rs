//! Building a model from `key = value` settings (config files and flags share this path).

use std::str::FromStr;

use epsense::model::ModelParams;
use epsense::numerics::C64;

use crate::config::Config;
use crate::CliError;

pub const MODEL_NAMES: [&str; 4] = ["two-ring", "three-ring", "single-ring", "mirror-ring"];

/// Default mirror reflectivity when `rho` is not given.
pub const DEFAULT_RHO: f64 = 1.0;

fn real(cfg: &Config, key: &str) -> Result<Option<f64>, CliError> {
    cfg.get(key)
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{key}: `{s}` is not a number")))
        })
        .transpose()
}

fn complex(cfg: &Config, key: &str) -> Result<Option<C64>, CliError> {
    cfg.get(key)
        .map(|s| {
            C64::from_str(&s.replace(' ', ""))
                .map_err(|_| CliError::Usage(format!("{key}: `{s}` is not a complex number")))
        })
        .transpose()
}

/// A model together with the waveguide coupling `gamma` that sets the QFI scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub params: ModelParams,
    pub gamma: f64,
}

pub fn model_from_config(cfg: &Config) -> Result<Selection, CliError> {
    let name = cfg
        .get("model")
        .ok_or_else(|| CliError::Usage("no model given".into()))?;
    let gamma = real(cfg, "gamma")?.unwrap_or(1.0);
    let kappa = real(cfg, "kappa")?.unwrap_or(0.0);
    let params = match name {
        "two-ring" => ModelParams::TwoRing {
            gamma,
            v: complex(cfg, "v")?.unwrap_or(C64::new(gamma / 4.0, 0.0)),
            kappa,
        },
        "three-ring" => {
            let ModelParams::ThreeRing { v1, v2, .. } = ModelParams::three_ring_ep(gamma) else {
                unreachable!()
            };
            ModelParams::ThreeRing {
                gamma,
                v1: complex(cfg, "v1")?.unwrap_or(v1),
                v2: complex(cfg, "v2")?.unwrap_or(v2),
                kappa,
            }
        }
        "single-ring" => ModelParams::SingleRing {
            gamma_wg: real(cfg, "gamma_wg")?.unwrap_or(gamma / 2.0),
            kappa,
        },
        "mirror-ring" => ModelParams::MirrorRing {
            gamma,
            rho: real(cfg, "rho")?.unwrap_or(DEFAULT_RHO),
            phi: real(cfg, "phi")?.unwrap_or(0.0),
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown model `{other}` (expected one of {})",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    params.validate()?;
    Ok(Selection { params, gamma })
}

/// Evaluation frequency, defaulting to resonance.
pub fn omega_from_config(cfg: &Config) -> Result<f64, CliError> {
    Ok(real(cfg, "omega")?.unwrap_or(0.0))
}

/// Returns a copy of `cfg` with a swept model parameter set to `value`.
///
/// `v`, `v1` and `v2` set the coupling magnitude and keep its phase. Sweeping
/// `gamma` on a single ring with an explicit `gamma_wg` rescales it in proportion.
pub fn with_parameter(cfg: &Config, key: &str, value: f64) -> Result<Config, CliError> {
    let mut out = cfg.clone();
    match key {
        "v" | "v1" | "v2" => {
            let phase = complex(cfg, key)?.map_or(0.0, |z| z.arg());
            let z = C64::from_polar(value, phase);
            out.set(key, format!("{:e}{:+e}i", z.re, z.im));
        }
        "gamma" => {
            if let (Some(wg), Some(old)) = (real(cfg, "gamma_wg")?, real(cfg, "gamma")?) {
                out.set("gamma_wg", format!("{:e}", wg * value / old));
            }
            out.set(key, format!("{value:e}"));
        }
        "kappa" | "rho" | "phi" | "gamma_wg" => out.set(key, format!("{value:e}")),
        other => return Err(CliError::Usage(format!("`{other}` is not a model parameter"))),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::parse(text).unwrap()
    }

    #[test]
    fn defaults_follow_gamma() {
        let s = model_from_config(&cfg("model = two-ring\ngamma = 2")).unwrap();
        assert_eq!(s.params, ModelParams::TwoRing { gamma: 2.0, v: C64::new(0.5, 0.0), kappa: 0.0 });
        let s = model_from_config(&cfg("model = single-ring")).unwrap();
        assert_eq!(s.params, ModelParams::SingleRing { gamma_wg: 0.5, kappa: 0.0 });
        let s = model_from_config(&cfg("model = three-ring")).unwrap();
        assert_eq!(s.params, ModelParams::three_ring_ep(1.0));
    }

    #[test]
    fn complex_coupling_and_sweeps() {
        let base = cfg("model = two-ring\nv = 0.1+0.1i");
        let moved = with_parameter(&base, "v", 2f64.sqrt()).unwrap();
        let ModelParams::TwoRing { v, .. } = model_from_config(&moved).unwrap().params else {
            panic!()
        };
        assert!((v - C64::new(1.0, 1.0)).norm() < 1e-14);

        let base = cfg("model = single-ring\ngamma = 1\ngamma_wg = 0.3");
        let moved = with_parameter(&base, "gamma", 2.0).unwrap();
        assert_eq!(
            model_from_config(&moved).unwrap().params,
            ModelParams::SingleRing { gamma_wg: 0.6, kappa: 0.0 }
        );
        assert!(with_parameter(&base, "omega", 1.0).is_err());
    }

    #[test]
    fn bad_input() {
        assert!(model_from_config(&cfg("model = four-ring")).is_err());
        assert!(model_from_config(&cfg("model = two-ring\nv = x")).is_err());
        assert!(model_from_config(&cfg("model = mirror-ring\nrho = 2")).is_err());
        assert!(model_from_config(&Config::default()).is_err());
    }
}
