//! Property-based testing harness: random trials against classical
//! functions, approximation error, dense-simulation checks of the circuit
//! translation, a random program generator and reference implementations.

pub mod catalog;
pub mod gen;
pub mod pbt;
pub mod qimp;
pub mod reference;
pub mod report;
pub mod square;

pub use catalog::{all_instances, default_params, flavors, small_instances};
pub use gen::{gen_program, GenConfig};
pub use pbt::{circular_distance, max_error, replay, run_pbt, seed_from_env, ErrorReport, Runner, TrialConfig, Witness, DEFAULT_SEED};
pub use qimp::{QimpRun, QimpRunner};
pub use report::{CaseResult, Suite};
pub use square::{
    check_linearity, check_reversibility, check_soundness, check_spec_translation, check_translation, check_translation_with,
    random_nor_state, SquareReport, Translator, AMP_TOL,
};
