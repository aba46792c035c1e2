//! Explicit norm-one elements for cyclic `p`-groups acting on arbitrary,
//! possibly noncommutative, rings.
//!
//! Given `x` with `N_E(x) = 1` for the subgroup `E` of order `p`, the
//! [`construction`] module builds a noncommutative integer polynomial in the
//! `σ^j(x)` whose norm over `Z/p^n` is 1. The [`oracle`] module proves such
//! identities exactly in the universal ring, [`proof_replay`] re-checks every
//! intermediate identity of the construction, [`ring_instances`] evaluates
//! formulas on concrete matrix-valued rings, and [`cohomology`] computes Tate
//! cohomology of integer lattices.

pub mod context;
pub mod error;
pub mod group_action;
pub mod ncpoly;
pub mod oracle;
pub mod construction;
pub mod proof_replay;
pub mod ring_instances;
pub mod cohomology;
pub mod cli;

pub use context::GroupContext;
pub use error::{Error, Result};
pub use group_action::{apply_operator, norm_op, partial_sum_op, shift, Operator, SubgroupSpec};
pub use ncpoly::{Poly, PolyDocument, Word};
pub use oracle::{is_norm_one, monomial_count, normal_form, CountMode, RelationSet};
pub use construction::{
    generate, ChainResult, ChainStep, GenerateOptions, LiftStepResult, Strategy, Verification,
};
pub use ring_instances::{
    check_numeric, evaluate, random_instance, InstanceKind, InstanceSpec, IntMat, MapValue,
};
pub use cohomology::{smith_normal_form, tate_h1, tate_h2, IntMatrix, LatticeAction, SmithForm};
