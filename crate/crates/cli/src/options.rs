//! Command-line flags, the flat JSON config file and their merge.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_6};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lodisc_core::{
    optimal_discrimination_unitary, two_splitter_network, BellLikeFamily, ModeUnitary, Priors,
    TwoPhotonState, DEFAULT_EPSILON,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "lodisc",
    version,
    about = "Unambiguous linear-optical discrimination of Bell-like states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
    /// Flat JSON object with defaults for any flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Detection distribution of one state as CSV `m,n,probability`.
    Probs,
    /// Conditional event probabilities of the four Bell-like states.
    Table,
    /// Bayes confidences D1, D2, D3 of the two-splitter network over (C2, φ).
    ConfidenceSweep,
    /// The optimal discriminating unitary as JSON.
    OptimalUnitary,
    /// Multi-start search for the best unambiguous success probability.
    Optimize,
    /// `optimize` over a grid of families read from `--grid-file`.
    Sweep,
    /// Deterministic self-checks at one family; prints pass/fail.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Probs => "probs",
            Command::Table => "table",
            Command::ConfidenceSweep => "confidence-sweep",
            Command::OptimalUnitary => "optimal-unitary",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

/// Every setting is optional here; the same keys are accepted in the
/// config file with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// First-qubit angle θ1 (defaults to θ2).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    /// Second-qubit angle θ2.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    /// Angle of the (2,4) splitter; selects the two-splitter network.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Transmissivity of the (1,3) splitter [default: 1/√2].
    #[arg(long, global = true)]
    pub eta1: Option<f64>,
    /// Unitary as JSON `{"dim": n, "entries": [[re, im], ...]}`, row-major.
    #[arg(long, visible_alias = "unitary", global = true, value_name = "FILE")]
    pub unitary_file: Option<PathBuf>,
    /// Two-photon state as JSON `{"a13": [re, im], "a14": ..., "a23": ..., "a24": ...}`.
    #[arg(long, global = true, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Use Bell-like state Ψk (1..=4) of the family instead of `--state`.
    #[arg(long, global = true)]
    pub psi: Option<usize>,
    /// Prior probabilities `a,b,c,d` [default: uniform].
    #[arg(long, global = true, value_name = "A,B,C,D")]
    pub priors: Option<String>,
    /// Confidence slack for unambiguous events, in (0, 0.1].
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Output file [default: stdout].
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Optimizer seed [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Optimizer restarts [default: 64].
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// CSV with header `theta1,theta2`.
    #[arg(long, global = true, value_name = "FILE")]
    pub grid_file: Option<PathBuf>,
    /// Read angles in degrees instead of radians.
    #[arg(long, global = true, num_args = 0, default_missing_value = "true")]
    pub degrees: Option<bool>,
    /// Number of C2 samples in [0, 1] for `confidence-sweep` [default: 11].
    #[arg(long, global = true)]
    pub c2_steps: Option<usize>,
    /// Number of φ samples in [0, π/2] for `confidence-sweep` [default: 21].
    #[arg(long, global = true)]
    pub phi_steps: Option<usize>,
    /// Emit U† instead of U from `optimal-unitary`.
    #[arg(long, global = true, num_args = 0, default_missing_value = "true")]
    pub dagger: Option<bool>,
}

impl Options {
    /// Fills every unset field from `fallback`.
    pub fn or(self, fallback: Options) -> Options {
        Options {
            theta1: self.theta1.or(fallback.theta1),
            theta2: self.theta2.or(fallback.theta2),
            phi: self.phi.or(fallback.phi),
            eta1: self.eta1.or(fallback.eta1),
            unitary_file: self.unitary_file.or(fallback.unitary_file),
            state: self.state.or(fallback.state),
            psi: self.psi.or(fallback.psi),
            priors: self.priors.or(fallback.priors),
            epsilon: self.epsilon.or(fallback.epsilon),
            out: self.out.or(fallback.out),
            seed: self.seed.or(fallback.seed),
            restarts: self.restarts.or(fallback.restarts),
            grid_file: self.grid_file.or(fallback.grid_file),
            degrees: self.degrees.or(fallback.degrees),
            c2_steps: self.c2_steps.or(fallback.c2_steps),
            phi_steps: self.phi_steps.or(fallback.phi_steps),
            dagger: self.dagger.or(fallback.dagger),
        }
    }

    pub fn load(path: &Path) -> Result<Options, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Where the measurement comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySource {
    Optimal,
    File(PathBuf),
    Splitters { eta1: f64, phi: f64 },
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub unitary: UnitarySource,
    pub state: Option<PathBuf>,
    pub psi: Option<usize>,
    pub priors: Priors,
    pub epsilon: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub restarts: usize,
    pub grid_file: Option<PathBuf>,
    pub degrees: bool,
    pub eta1: f64,
    pub c2_steps: usize,
    pub phi_steps: usize,
    pub dagger: bool,
}

impl RunConfig {
    pub fn resolve(command: Command, o: Options) -> Result<RunConfig, Failure> {
        let degrees = o.degrees.unwrap_or(false);
        let angle = |x: Option<f64>| x.map(|v| if degrees { v.to_radians() } else { v });

        let eta1 = o.eta1.unwrap_or(FRAC_1_SQRT_2);
        if !(0.0..=1.0).contains(&eta1) {
            return Err(Failure::Invalid(format!(
                "eta1 must lie in [0, 1], got {eta1}"
            )));
        }
        let unitary = match (&o.unitary_file, o.phi, o.eta1) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Failure::Usage(
                    "exactly one unitary source: --unitary-file conflicts with --phi/--eta1".into(),
                ))
            }
            (Some(path), None, None) => UnitarySource::File(path.clone()),
            (None, Some(phi), _) => UnitarySource::Splitters {
                eta1,
                phi: angle(Some(phi)).expect("phi present"),
            },
            (None, None, Some(_)) if command != Command::ConfidenceSweep => {
                return Err(Failure::Usage("--eta1 requires --phi".into()))
            }
            (None, None, _) => UnitarySource::Optimal,
        };

        if o.state.is_some() && o.psi.is_some() {
            return Err(Failure::Usage("--state conflicts with --psi".into()));
        }
        if let Some(k) = o.psi {
            if !(1..=4).contains(&k) {
                return Err(Failure::Usage(format!("--psi must be 1..=4, got {k}")));
            }
        }

        let priors = match &o.priors {
            None => Priors::uniform(),
            Some(text) => parse_priors(text)?,
        };
        let epsilon = o.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon > 0.0 && epsilon <= 0.1) {
            return Err(Failure::Invalid(format!(
                "epsilon must lie in (0, 0.1], got {epsilon}"
            )));
        }

        let restarts = o.restarts.unwrap_or(64);
        if restarts == 0 {
            return Err(Failure::Invalid("restarts must be at least 1".into()));
        }
        let c2_steps = o.c2_steps.unwrap_or(11);
        let phi_steps = o.phi_steps.unwrap_or(21);
        if c2_steps < 2 || phi_steps < 2 {
            return Err(Failure::Invalid(
                "c2-steps and phi-steps must be at least 2".into(),
            ));
        }

        Ok(RunConfig {
            command,
            theta1: angle(o.theta1),
            theta2: angle(o.theta2),
            unitary,
            state: o.state,
            psi: o.psi,
            priors,
            epsilon,
            out: o.out,
            seed: o.seed.unwrap_or(0),
            restarts,
            grid_file: o.grid_file,
            degrees,
            eta1,
            c2_steps,
            phi_steps,
            dagger: o.dagger.unwrap_or(false),
        })
    }

    /// Converts an input angle to radians.
    pub fn angle(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    /// The Bell-like family from `θ2` and `θ1` (which defaults to `θ2`).
    pub fn family(&self) -> Result<BellLikeFamily, Failure> {
        let theta2 = self
            .theta2
            .ok_or_else(|| Failure::Usage(format!("{} requires --theta2", self.command.name())))?;
        let theta1 = self.theta1.unwrap_or(theta2);
        Ok(BellLikeFamily::from_angles(theta1, theta2)?)
    }

    /// `θ1` for commands that sweep `θ2`.
    pub fn sweep_theta1(&self) -> f64 {
        self.theta1.unwrap_or(FRAC_PI_6)
    }

    pub fn unitary(&self, family: Option<&BellLikeFamily>) -> Result<ModeUnitary, Failure> {
        match &self.unitary {
            UnitarySource::File(path) => read_json(path),
            UnitarySource::Splitters { eta1, phi } => Ok(two_splitter_network(*eta1, *phi)?),
            UnitarySource::Optimal => match family {
                Some(f) => Ok(optimal_discrimination_unitary(f)),
                None => Err(Failure::Usage(format!(
                    "{} needs --theta2, --phi or --unitary-file",
                    self.command.name()
                ))),
            },
        }
    }

    pub fn state(&self) -> Result<TwoPhotonState, Failure> {
        match (&self.state, self.psi) {
            (Some(path), _) => read_json(path),
            (None, Some(k)) => Ok(lodisc_core::bell_like_states(&self.family()?)[k - 1]),
            (None, None) => Err(Failure::Usage("probs requires --state or --psi".into())),
        }
    }
}

fn parse_priors(text: &str) -> Result<Priors, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("--priors: {e}")))?;
    let arr: [f64; 4] = values.try_into().map_err(|v: Vec<f64>| {
        Failure::Usage(format!("--priors needs 4 values, got {}", v.len()))
    })?;
    Ok(Priors::new(arr)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Options {
        Options::default()
    }

    #[test]
    fn flags_override_config() {
        let flags = Options {
            theta2: Some(0.3),
            ..opts()
        };
        let file = Options {
            theta2: Some(0.9),
            seed: Some(5),
            ..opts()
        };
        let merged = flags.or(file);
        assert_eq!(merged.theta2, Some(0.3));
        assert_eq!(merged.seed, Some(5));
    }

    #[test]
    fn unitary_sources() {
        let r = RunConfig::resolve(Command::Table, opts()).unwrap();
        assert_eq!(r.unitary, UnitarySource::Optimal);
        let r = RunConfig::resolve(
            Command::Table,
            Options {
                phi: Some(0.2),
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(
            r.unitary,
            UnitarySource::Splitters {
                eta1: FRAC_1_SQRT_2,
                phi: 0.2
            }
        );
        let clash = Options {
            phi: Some(0.2),
            unitary_file: Some("u.json".into()),
            ..opts()
        };
        assert!(matches!(
            RunConfig::resolve(Command::Table, clash),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn degrees_convert_angles() {
        let r = RunConfig::resolve(
            Command::Table,
            Options {
                theta2: Some(45.0),
                phi: Some(90.0),
                degrees: Some(true),
                ..opts()
            },
        )
        .unwrap();
        assert!((r.theta2.unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(
            matches!(r.unitary, UnitarySource::Splitters { phi, .. } if (phi - std::f64::consts::FRAC_PI_2).abs() < 1e-15)
        );
    }

    #[test]
    fn numeric_validation() {
        for bad in [0.0, 0.2, -1.0] {
            let o = Options {
                epsilon: Some(bad),
                ..opts()
            };
            assert!(matches!(
                RunConfig::resolve(Command::Table, o),
                Err(Failure::Invalid(_))
            ));
        }
        let o = Options {
            priors: Some("0.5,0.5,0.5,0.5".into()),
            ..opts()
        };
        assert!(matches!(
            RunConfig::resolve(Command::Table, o),
            Err(Failure::Invalid(_))
        ));
        let o = Options {
            priors: Some("0.5,x,0,0".into()),
            ..opts()
        };
        assert!(matches!(
            RunConfig::resolve(Command::Table, o),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn theta1_defaults_to_theta2() {
        let r = RunConfig::resolve(
            Command::Table,
            Options {
                theta2: Some(0.4),
                ..opts()
            },
        )
        .unwrap();
        let f = r.family().unwrap();
        assert_eq!(f.angles(), Some((0.4, 0.4)));
    }
}
