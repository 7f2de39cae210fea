//! Single-machine discard problem, the binary-tree gap instance, its lifted
//! solution and the model-gap families.

pub mod families;
pub mod reduction;
pub mod single_lp;
pub mod smi;
pub mod tree;
pub mod verify;

pub use families::{gen_model_gap_family, search_bc_witness, BcWitness, FamilyError, GapFamily};
pub use reduction::{chain_reduction, ChainReduction, Direction, ReductionError};
pub use single_lp::{build_single_machine_lp, SingleMachineLp};
pub use smi::{random_smi, random_solution, Segment, SingleMachineInstance, SmiError, SmiJob};
pub use tree::{
    aligned_domain, check_contradiction, gen_tree_instance, sa_closed_form, tree_level, tree_warning,
    ClosedFormSolution, PlacementVar,
};
pub use verify::{
    sample_pairs, verify_lifted_constraints, verify_pairs_exact, verify_pairs_fast, Family, Scope, VerificationReport,
    VerifyError,
};
