//! Declarative game descriptions in TOML.
//!
//! A config names the scenario, a problem from a small catalog (literal
//! state lists, the unambiguous-estimation pair, parallel or antiparallel
//! spins) and an instrument. Nothing in a config is executable.
//!
//! ```toml
//! scenario = "pre-only"          # pre-only | fixed-post | pre-post
//! trials = 100000                # optional
//! seed = 1                       # optional
//!
//! [problem]
//! kind = "states"
//! priors = [0.5, 0.5]
//! pre = [[1, 0], [0, 1]]         # amplitude: number or [re, im]
//! merit = [[1, 0], [0, 1]]       # hypotheses x guesses
//!
//! [instrument]
//! kind = "computational-basis"
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use prepost_core::covariant::{
    covariant_design_povm, exact_order, optimal_fidelity, Alignment, CovariantProblem, Representation,
};
use prepost_core::gamesim::{DiscreteProblem, SpinDirectionProblem};
use prepost_core::instruments::{computational_basis_povm, Instrument};
use prepost_core::scenarios::{use_prepost_instrument, use_problem};
use prepost_core::{ComplexOperator, Direction, KrausSet, NormMode, Povm, QuantumState, Scenario, UseParams};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

pub const BUNDLED: [(&str, &str); 3] = [
    ("orthogonal-pair", include_str!("../configs/orthogonal-pair.toml")),
    ("use-eps0.1", include_str!("../configs/use-eps0.1.toml")),
    ("parallel-N1", include_str!("../configs/parallel-N1.toml")),
];

pub fn bundled(name: &str) -> Result<&'static str, CliError> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| {
        let names: Vec<_> = BUNDLED.iter().map(|(n, _)| *n).collect();
        CliError::Validation(format!("unknown bundled config '{name}', expected one of {}", names.join(", ")))
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Amp {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    States { priors: Vec<f64>, pre: Vec<Vec<Amp>>, post: Option<Vec<Vec<Amp>>>, merit: Vec<Vec<f64>> },
    UsePair { alpha_sq: f64, epsilon: f64, priors: Option<[f64; 2]> },
    ParallelSpins { spins: usize, grid_order: Option<usize> },
    AntiparallelSpins { spins: usize, grid_order: Option<usize> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstrumentSpec {
    ComputationalBasis,
    Povm { mode: NormMode, elements: Vec<Vec<Vec<Amp>>> },
    Kraus { mode: NormMode, operators: Vec<Vec<Vec<Amp>>> },
    UsePrepost,
    CovariantOptimal { order: Option<usize> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub name: Option<String>,
    pub scenario: Scenario,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub max_retries: Option<u64>,
    pub problem: Spanned<ProblemSpec>,
    pub instrument: Spanned<InstrumentSpec>,
    /// Guess label per outcome; defaults to the outcome index.
    pub estimator: Option<Spanned<Vec<usize>>>,
}

/// Parsed config with its source, for line numbers in diagnostics.
pub struct Config {
    pub file: GameFile,
    pub source: String,
    pub origin: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

impl Config {
    pub fn parse(source: &str, origin: &str) -> Result<Self, CliError> {
        let file: GameFile = toml::from_str(source).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        Ok(Config { file, source: source.to_string(), origin: origin.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source =
            std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&source, &path.display().to_string())
    }

    fn at<T>(&self, item: &Spanned<T>, msg: impl std::fmt::Display) -> CliError {
        CliError::Validation(format!("{}: line {}: {msg}", self.origin, line_of(&self.source, item.span().start)))
    }

    pub fn build(&self) -> Result<Game, CliError> {
        let problem = self.build_problem().map_err(|e| self.at(&self.file.problem, e))?;
        let inst = &self.file.instrument;
        let game = self.build_instrument(problem).map_err(|e| self.at(inst, e))?;
        if let Some(est) = &self.file.estimator {
            return match game {
                Game::Discrete { problem, instrument, .. } => {
                    if est.get_ref().len() != instrument.outcomes() {
                        return Err(self.at(
                            est,
                            format!(
                                "estimator has {} entries for {} outcomes",
                                est.get_ref().len(),
                                instrument.outcomes()
                            ),
                        ));
                    }
                    if let Some(g) = est.get_ref().iter().find(|&&g| g >= problem.guesses()) {
                        return Err(self.at(est, format!("guess label {g} exceeds the merit table")));
                    }
                    Ok(Game::Discrete { problem, instrument, estimator: est.get_ref().clone() })
                }
                Game::Spin { .. } => Err(self.at(est, "spin problems fix the estimator through the instrument")),
            };
        }
        Ok(game)
    }

    fn build_problem(&self) -> Result<ProblemKind, String> {
        Ok(match self.file.problem.get_ref() {
            ProblemSpec::States { priors, pre, post, merit } => {
                let states = |list: &[Vec<Amp>]| -> Result<Vec<QuantumState>, String> {
                    list.iter()
                        .enumerate()
                        .map(|(i, s)| {
                            QuantumState::from_vec(s.iter().map(amp).collect()).map_err(|e| format!("state {i}: {e}"))
                        })
                        .collect()
                };
                let pre = states(pre)?;
                let post = post.as_deref().map(states).transpose()?;
                let cols = merit.first().map(Vec::len).unwrap_or(0);
                if merit.iter().any(|r| r.len() != cols) {
                    return Err("merit rows differ in length".into());
                }
                let m = DMatrix::from_fn(merit.len(), cols, |i, j| merit[i][j]);
                ProblemKind::Discrete(DiscreteProblem::new(priors.clone(), pre, post, m).map_err(|e| e.to_string())?)
            }
            ProblemSpec::UsePair { alpha_sq, epsilon, priors } => {
                let p = UseParams::from_alpha_sq(*alpha_sq, *epsilon).map_err(|e| e.to_string())?;
                let problem = use_problem(&p, priors.unwrap_or([0.5, 0.5])).map_err(|e| e.to_string())?;
                ProblemKind::Use(p, problem)
            }
            ProblemSpec::ParallelSpins { spins, grid_order } => ProblemKind::Spin(
                SpinDirectionProblem::new(*spins, Alignment::Parallel, grid_order.unwrap_or(exact_order(*spins)))
                    .map_err(|e| e.to_string())?,
            ),
            ProblemSpec::AntiparallelSpins { spins, grid_order } => ProblemKind::Spin(
                SpinDirectionProblem::new(*spins, Alignment::Antiparallel, grid_order.unwrap_or(exact_order(*spins)))
                    .map_err(|e| e.to_string())?,
            ),
        })
    }

    fn build_instrument(&self, problem: ProblemKind) -> Result<Game, String> {
        let spec = self.file.instrument.get_ref();
        let discrete = |problem: DiscreteProblem<f64>, instrument: OwnedInstrument| {
            let estimator = (0..instrument.outcomes()).collect();
            Game::Discrete { problem, instrument, estimator }
        };
        match (problem, spec) {
            (ProblemKind::Discrete(p) | ProblemKind::Use(_, p), InstrumentSpec::ComputationalBasis) => {
                let dim = p.pre[0].dim();
                let povm = computational_basis_povm(dim).map_err(|e| e.to_string())?;
                Ok(discrete(p, OwnedInstrument::Povm(povm)))
            }
            (ProblemKind::Discrete(p) | ProblemKind::Use(_, p), InstrumentSpec::Povm { mode, elements }) => {
                let els = elements
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix(m).map_err(|e| format!("element {i}: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                let povm = Povm::new(els, *mode).map_err(|e| e.to_string())?;
                Ok(discrete(p, OwnedInstrument::Povm(povm)))
            }
            (ProblemKind::Discrete(p) | ProblemKind::Use(_, p), InstrumentSpec::Kraus { mode, operators }) => {
                let ops = operators
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix(m).map_err(|e| format!("operator {i}: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                let k = KrausSet::new(ops, *mode).map_err(|e| e.to_string())?;
                Ok(discrete(p, OwnedInstrument::Kraus(k)))
            }
            (ProblemKind::Use(params, p), InstrumentSpec::UsePrepost) => {
                let k = use_prepost_instrument(&params).map_err(|e| e.to_string())?;
                Ok(discrete(p, OwnedInstrument::Kraus(k)))
            }
            (ProblemKind::Spin(p), InstrumentSpec::CovariantOptimal { order }) => {
                let order = order.unwrap_or(exact_order(p.spins));
                let cov = CovariantProblem::new(p.spins, p.alignment, order, Representation::Full)
                    .map_err(|e| e.to_string())?;
                let opt = optimal_fidelity::<f64>(&cov).map_err(|e| e.to_string())?;
                let seed = nalgebra::DVector::from_iterator(
                    opt.seed_re.len(),
                    opt.seed_re.iter().zip(&opt.seed_im).map(|(&r, &i)| prepost_core::scalar::Cx::new(r, i)),
                );
                let (povm, guesses) = covariant_design_povm(p.spins, &seed, order).map_err(|e| e.to_string())?;
                Ok(Game::Spin { problem: p, povm, guesses })
            }
            (_, InstrumentSpec::UsePrepost) => Err("use-prepost needs a use-pair problem".into()),
            (_, InstrumentSpec::CovariantOptimal { .. }) => {
                Err("covariant-optimal needs a parallel-spins or antiparallel-spins problem".into())
            }
            (ProblemKind::Spin(_), _) => Err("spin problems take the covariant-optimal instrument".into()),
        }
    }
}

fn amp(a: &Amp) -> prepost_core::scalar::Cx<f64> {
    match a {
        Amp::Real(x) => prepost_core::scalar::Cx::new(*x, 0.0),
        Amp::Complex([re, im]) => prepost_core::scalar::Cx::new(*re, *im),
    }
}

fn matrix(rows: &[Vec<Amp>]) -> Result<ComplexOperator, String> {
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err("matrix rows must be non-empty and of equal length".into());
    }
    let entries: Vec<_> = rows.iter().flatten().map(amp).collect();
    ComplexOperator::from_row_slice(rows.len(), cols, &entries).map_err(|e| e.to_string())
}

enum ProblemKind {
    Discrete(DiscreteProblem<f64>),
    Use(UseParams, DiscreteProblem<f64>),
    Spin(SpinDirectionProblem),
}

pub enum OwnedInstrument {
    Povm(Povm),
    Kraus(KrausSet),
}

impl OwnedInstrument {
    pub fn as_instrument(&self) -> Instrument<'_, f64> {
        match self {
            OwnedInstrument::Povm(p) => Instrument::Povm(p),
            OwnedInstrument::Kraus(k) => Instrument::Kraus(k),
        }
    }

    pub fn outcomes(&self) -> usize {
        self.as_instrument().outcomes()
    }
}

/// A fully built game ready to simulate.
pub enum Game {
    Discrete { problem: DiscreteProblem<f64>, instrument: OwnedInstrument, estimator: Vec<usize> },
    Spin { problem: SpinDirectionProblem, povm: Povm, guesses: Vec<Direction> },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_build() {
        for (name, src) in BUNDLED {
            let cfg = Config::parse(src, name).unwrap();
            cfg.build().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let src = "scenario = \"pre-only\"\n[problem]\nkind = \"states\"\npriors = [0.5, \n";
        let err = Config::parse(src, "bad.toml").err().unwrap().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = "scenario = \"pre-only\"\ncolour = 1\n[problem]\nkind = \"use-pair\"\nalpha_sq = 0.8\nepsilon = 0.1\n[instrument]\nkind = \"use-prepost\"\n";
        let err = Config::parse(src, "x").err().unwrap().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn semantic_errors_point_at_the_table() {
        let src = "scenario = \"pre-only\"\n\n[problem]\nkind = \"states\"\npriors = [0.5, 0.2]\npre = [[1, 0], [0, 1]]\nmerit = [[1, 0], [0, 1]]\n\n[instrument]\nkind = \"computational-basis\"\n";
        let err = Config::parse(src, "x").unwrap().build().err().unwrap().to_string();
        assert!(err.contains("line 3") && err.contains("priors"), "{err}");

        let src = "scenario = \"pre-only\"\n[problem]\nkind = \"parallel-spins\"\nspins = 1\n[instrument]\nkind = \"use-prepost\"\n";
        let err = Config::parse(src, "x").unwrap().build().err().unwrap().to_string();
        assert!(err.contains("line 5"), "{err}");
    }

    #[test]
    fn complex_amplitudes() {
        let src = "scenario = \"fixed-post\"\n[problem]\nkind = \"states\"\npriors = [1.0]\npre = [[[0.6, 0.0], [0.0, 0.8]]]\nmerit = [[1, 0]]\n[instrument]\nkind = \"povm\"\nmode = \"subnormalized\"\nelements = [[[0.5, 0], [0, 0]], [[0, 0], [0, 0.25]]]\n";
        let g = Config::parse(src, "x").unwrap().build().unwrap();
        assert!(matches!(g, Game::Discrete { .. }));
    }
}
