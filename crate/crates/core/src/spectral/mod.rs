//! The internal-mode eigenvalue problem and the auxiliary linear problems
//! built on it.

pub mod asys;
pub mod bs;
pub mod direct;
pub mod expansions;
pub mod golden;
pub mod mode;
pub mod probe;
pub mod quad;

pub use asys::{solve_a, ASystem, ASystemDiagnostics};
pub use bs::{bs_scalar, solve_alpha, BsOptions, BsSolution, BsSolver};
pub use direct::{compare_with_mode, direct_eigen_oracle, DirectEigen, OracleComparison};
pub use expansions::Expansions;
pub use golden::{solve_g, solve_g_with, GoldenDiagnostics, GoldenEval, GoldenOptions, GoldenRulePair};
pub use mode::{build_internal_mode, build_internal_mode_with, InternalMode, ModeDiagnostics, ModeEval, ModeOptions, Normalization};
pub use probe::{uniqueness_probe, uniqueness_probe_with, BoxProbe, ModeClass, ProbeOptions, ProbePair, UniquenessReport};
pub use quad::{ExpConv, KernelQuad};
