//! One-dimensional parameter sweeps of the Fisher-information figures of merit.

use rayon::prelude::*;

use epsense::model::{ModelParams, Perturbation, ScatteringModel};
use epsense::qfi::{self, QfiError};
use epsense::spectral::{self, PointKind, SpectralError};

use crate::config::Config;
use crate::params::{model_from_config, omega_from_config, with_parameter, Selection};
use crate::table::{Cell, SweepResult};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Grid { start, stop, points, scale: GridScale::Linear }
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Grid { start, stop, points, scale: GridScale::Log }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::Usage("a grid needs at least 2 points".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start >= self.stop {
            return Err(CliError::Usage(format!(
                "grid start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.scale == GridScale::Log && self.start <= 0.0 {
            return Err(CliError::Usage("log grid needs start > 0".into()));
        }
        Ok(())
    }

    /// Grid values; the last point is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.start + t * (self.stop - self.start),
                    GridScale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect();
        v[0] = self.start;
        v[n - 1] = self.stop;
        v
    }
}

/// Quantities a sweep can tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    IMax,
    IAvg,
    IReduced,
    IMod,
    BoundLocalized,
    BoundGeneral,
    Xi,
    Petermann,
    Ldos,
    MinDecay,
}

impl Output {
    pub const ALL: [Output; 10] = [
        Output::IMax,
        Output::IAvg,
        Output::IReduced,
        Output::IMod,
        Output::BoundLocalized,
        Output::BoundGeneral,
        Output::Xi,
        Output::Petermann,
        Output::Ldos,
        Output::MinDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::IMax => "i_max",
            Output::IAvg => "i_avg",
            Output::IReduced => "i_reduced",
            Output::IMod => "i_mod",
            Output::BoundLocalized => "bound_localized",
            Output::BoundGeneral => "bound_general",
            Output::Xi => "xi",
            Output::Petermann => "petermann",
            Output::Ldos => "ldos",
            Output::MinDecay => "min_decay",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
                CliError::Usage(format!("unknown output `{s}` (expected {})", names.join(", ")))
            })
    }

    /// Whether the value is a Fisher information and takes the QFI scale factor.
    fn is_qfi(self) -> bool {
        matches!(
            self,
            Output::IMax
                | Output::IAvg
                | Output::IReduced
                | Output::BoundLocalized
                | Output::BoundGeneral
        )
    }

    fn needs_localized(self) -> bool {
        matches!(self, Output::IReduced | Output::Ldos)
    }
}

/// Factor applied to QFI columns to make them dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiScale {
    None,
    Gamma2,
    Kappa2,
}

impl QfiScale {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "none" => Ok(QfiScale::None),
            "gamma2" => Ok(QfiScale::Gamma2),
            "kappa2" => Ok(QfiScale::Kappa2),
            _ => Err(CliError::Usage(format!("unknown scale `{s}` (none, gamma2, kappa2)"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            QfiScale::None => "none",
            QfiScale::Gamma2 => "gamma2",
            QfiScale::Kappa2 => "kappa2",
        }
    }

    fn factor(self, sel: &Selection) -> f64 {
        match self {
            QfiScale::None => 1.0,
            QfiScale::Gamma2 => sel.gamma * sel.gamma,
            QfiScale::Kappa2 => sel.params.kappa().powi(2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Model settings; swept keys are overwritten point by point.
    pub base: Config,
    pub parameter: String,
    pub grid: Grid,
    pub outputs: Vec<Output>,
    pub scale: QfiScale,
}

impl SweepSpec {
    /// Reads a sweep from settings: the model keys plus `parameter`, `start`,
    /// `stop`, `points`, optional `grid = linear|log`, `outputs` (comma list)
    /// and `scale = none|gamma2|kappa2`.
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let need = |k: &str| {
            cfg.get(k)
                .ok_or_else(|| CliError::Usage(format!("sweep needs `{k}`")))
        };
        let num = |k: &str| -> Result<f64, CliError> {
            let s = need(k)?;
            s.parse()
                .map_err(|_| CliError::Usage(format!("{k}: `{s}` is not a number")))
        };
        let points = need("points")?
            .parse::<usize>()
            .map_err(|_| CliError::Usage("points must be a positive integer".into()))?;
        let scale = match cfg.get("grid").unwrap_or("linear") {
            "linear" => GridScale::Linear,
            "log" => GridScale::Log,
            other => return Err(CliError::Usage(format!("unknown grid `{other}`"))),
        };
        let outputs = cfg
            .get("outputs")
            .unwrap_or("i_max")
            .split(',')
            .map(|s| Output::parse(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = SweepSpec {
            base: cfg.clone(),
            parameter: need("parameter")?.replace('-', "_"),
            grid: Grid { start: num("start")?, stop: num("stop")?, points, scale },
            outputs,
            scale: QfiScale::parse(cfg.get("scale").unwrap_or("gamma2"))?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid.validate()?;
        if self.outputs.is_empty() {
            return Err(CliError::Usage("no outputs requested".into()));
        }
        let first = self.point(self.grid.start)?;
        let (_, pert) = first.selection.params.build()?;
        if pert.localized_site().is_none() {
            if let Some(o) = self.outputs.iter().find(|o| o.needs_localized()) {
                return Err(CliError::Usage(format!(
                    "`{}` needs a perturbation localized on one ring",
                    o.name()
                )));
            }
        }
        Ok(())
    }

    fn point(&self, value: f64) -> Result<Point, CliError> {
        let mut epsilon = self
            .base
            .get("epsilon")
            .map(|s| s.parse::<f64>())
            .transpose()
            .map_err(|_| CliError::Usage("epsilon must be a number".into()))?
            .unwrap_or(0.0);
        let mut omega = omega_from_config(&self.base)?;
        let cfg = match self.parameter.as_str() {
            "epsilon" => {
                epsilon = value;
                self.base.clone()
            }
            "omega" => {
                omega = value;
                self.base.clone()
            }
            key => with_parameter(&self.base, key, value)?,
        };
        Ok(Point {
            selection: model_from_config(&cfg)?,
            epsilon,
            omega,
        })
    }

    pub fn run(&self) -> Result<SweepResult, CliError> {
        self.validate()?;
        let values = self.grid.values();
        let points = values
            .iter()
            .map(|&v| self.point(v))
            .collect::<Result<Vec<_>, _>>()?;
        let rows: Vec<Result<Vec<Cell>, CliError>> = points
            .par_iter()
            .zip(values.par_iter())
            .map(|(p, &x)| self.row(p, x))
            .collect();

        let mut header = vec![self.parameter.clone()];
        header.extend(self.outputs.iter().map(|o| o.name().to_string()));
        header.push("pole".into());
        let mut result = SweepResult::new(header);
        result.meta("model", serde_json::to_string(&points[0].selection.params).unwrap_or_default());
        result.meta("reference_gamma", format!("{}", points[0].selection.gamma));
        result.meta("parameter", self.parameter.clone());
        result.meta("qfi_scale", self.scale.name());
        result.meta("seed", epsense::numerics::restart_seed().to_string());
        for row in rows {
            result.push(row?);
        }
        Ok(result)
    }

    fn row(&self, p: &Point, x: f64) -> Result<Vec<Cell>, CliError> {
        let mut row = vec![Cell::Num(x)];
        match evaluate_point(p, &self.outputs, self.scale) {
            Ok(cells) => {
                row.extend(cells.into_iter().map(Cell::Num));
                row.push(Cell::Num(0.0));
            }
            Err(e) if e.is_pole() => {
                row.extend(self.outputs.iter().map(|_| Cell::Num(f64::NAN)));
                row.push(Cell::Num(1.0));
            }
            Err(e) => return Err(e.into()),
        }
        Ok(row)
    }
}

#[derive(Debug, Clone)]
struct Point {
    selection: Selection,
    epsilon: f64,
    omega: f64,
}

fn evaluate_point(p: &Point, outputs: &[Output], scale: QfiScale) -> Result<Vec<f64>, QfiError> {
    let (m0, pert) = p.selection.params.build()?;
    let m = if p.epsilon == 0.0 { m0 } else { m0.perturbed(&pert, p.epsilon)? };
    let factor = scale.factor(&p.selection);
    let kato = match spectral::kato_decompose_default(&m.effective_hamiltonian()) {
        Ok(k) => Some(k),
        Err(SpectralError::IllConditioned { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    outputs
        .iter()
        .map(|&o| {
            let v = value(o, &m, &pert, p.omega, kato.as_ref())?;
            Ok(if o.is_qfi() { v * factor } else { v })
        })
        .collect()
}

fn value(
    o: Output,
    m: &ScatteringModel,
    pert: &Perturbation,
    omega: f64,
    kato: Option<&spectral::KatoDecomposition>,
) -> Result<f64, QfiError> {
    let nearest = kato.map(|k| (k, k.nearest_cluster(omega)));
    Ok(match o {
        Output::IMax => qfi::qfi_max(m, pert, omega)?.0,
        Output::IAvg => qfi::qfi_avg(m, pert, omega)?,
        Output::IReduced => {
            let ch = m.observed_channels()[0];
            qfi::reduced_qfi(m, pert, omega, ch, ch)?
        }
        Output::IMod => qfi::decay_modified_qfi(m, pert, omega)?,
        Output::BoundLocalized => match nearest {
            Some((k, l)) => spectral::qfi_bound_localized(k, l, omega)?,
            None => f64::NAN,
        },
        Output::BoundGeneral => match nearest {
            Some((k, l)) => spectral::qfi_bound_general(m, pert, k, l, omega)?,
            None => f64::NAN,
        },
        Output::Xi => match nearest {
            Some((k, l)) => spectral::spectral_response_strength(k, l)?,
            None => f64::NAN,
        },
        Output::Petermann => match nearest {
            Some((k, l)) if k.clusters()[l].kind == PointKind::Isolated => {
                k.clusters()[l].petermann()
            }
            _ => f64::NAN,
        },
        Output::Ldos => {
            let site = pert.localized_site().ok_or(QfiError::NotLocalized)?;
            spectral::ldos(m, site, omega, false)?.rho
        }
        Output::MinDecay => qfi::min_decay_rate(m)?,
    })
}

/// Convenience for callers that already hold parameters rather than settings.
pub fn config_for(params: &ModelParams) -> Config {
    let mut c = Config::default();
    c.set("model", params.name());
    match *params {
        ModelParams::TwoRing { gamma, v, kappa } => {
            c.set("gamma", format!("{gamma:e}"));
            c.set("v", format!("{:e}{:+e}i", v.re, v.im));
            c.set("kappa", format!("{kappa:e}"));
        }
        ModelParams::ThreeRing { gamma, v1, v2, kappa } => {
            c.set("gamma", format!("{gamma:e}"));
            c.set("v1", format!("{:e}{:+e}i", v1.re, v1.im));
            c.set("v2", format!("{:e}{:+e}i", v2.re, v2.im));
            c.set("kappa", format!("{kappa:e}"));
        }
        ModelParams::SingleRing { gamma_wg, kappa } => {
            c.set("gamma", format!("{:e}", 2.0 * gamma_wg));
            c.set("gamma_wg", format!("{gamma_wg:e}"));
            c.set("kappa", format!("{kappa:e}"));
        }
        ModelParams::MirrorRing { gamma, rho, phi } => {
            c.set("gamma", format!("{gamma:e}"));
            c.set("rho", format!("{rho:e}"));
            c.set("phi", format!("{phi:e}"));
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> SweepSpec {
        SweepSpec::from_config(&Config::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::linear(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        let g = Grid::log(0.1, 10.0, 3).values();
        assert!((g[1] - 1.0).abs() < 1e-15 && g[2] == 10.0);
        assert!(Grid::linear(1.0, 0.0, 3).validate().is_err());
        assert!(Grid::linear(0.0, 1.0, 1).validate().is_err());
        assert!(Grid::log(0.0, 1.0, 3).validate().is_err());
    }

    #[test]
    fn coupling_sweep_is_monotone() {
        let s = spec("model = two-ring\nparameter = v\nstart = 0.05\nstop = 0.6\npoints = 40\noutputs = i_max, i_mod");
        let r = s.run().unwrap();
        let i = r.column("i_max").unwrap();
        assert!(i.windows(2).all(|w| w[1] < w[0]));
        assert!(r.column("pole").unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn pole_rows_are_marked() {
        // With V = 0 the lower ring decouples and leaves a real pole at resonance.
        let s = spec("model = two-ring\nv = 0\nparameter = omega\nstart = -1\nstop = 1\npoints = 3");
        let r = s.run().unwrap();
        assert_eq!(r.column("pole").unwrap(), vec![0.0, 1.0, 0.0]);
        assert!(r.column("i_max").unwrap()[1].is_nan());
    }

    #[test]
    fn localized_outputs_are_checked() {
        let cfg = Config::parse("model = mirror-ring\nparameter = rho\nstart = 0\nstop = 1\npoints = 3\noutputs = i_reduced").unwrap();
        assert!(SweepSpec::from_config(&cfg).is_err());
    }

    #[test]
    fn config_round_trip() {
        for p in [
            ModelParams::two_ring_ep(1.0),
            ModelParams::three_ring_ep(2.0),
            ModelParams::SingleRing { gamma_wg: 0.5, kappa: 0.1 },
            ModelParams::MirrorRing { gamma: 1.0, rho: 0.3, phi: 0.2 },
        ] {
            assert_eq!(model_from_config(&config_for(&p)).unwrap().params, p);
        }
    }
}
