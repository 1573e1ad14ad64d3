//! Rational trees as states of finite coalgebras of polynomial functors.
//!
//! A signature f (shapes with finitely many positions each) induces the
//! polynomial functor P(X) = Σ_a X^{B_a}.  Its final coalgebra is the set of
//! possibly-infinite trees over the signature; the fragment reachable by
//! finite machinery is the set of *rational* trees, represented here as a
//! state of a finite coalgebra X → P(X).  The crate provides
//!
//! * signatures, signature morphisms, and the induced functors ([`signature`]),
//! * finite coalgebras, bisimulation, minimisation, paths ([`coalgebra`]),
//! * proto-coalgebras and the coherent-part coreflection ([`proto`]),
//! * truncations, approximation sequences, path sets ([`tree`]),
//! * fibred signatures and reindexing ([`indexed`]),
//! * finite categories, presheaves, sites, sheaf glueing ([`category`],
//!   [`presheaf`], [`site`]).
//!
//! Everything is deterministic: sets are kept in declared or lexicographic
//! order and no operation depends on hashing.

pub mod category;
pub mod coalgebra;
pub mod fixtures;
pub mod indexed;
pub mod presheaf;
pub mod proto;
pub mod random;
pub mod signature;
pub mod site;
pub mod tree;
pub mod util;

pub use category::{FiniteCategory, Morphism, PullbackSquare};
pub use coalgebra::{bisimilar, check_coalgebra_morphism, lift_path, relabel, Coalgebra, Path, TreeHandle};
pub use presheaf::{Presheaf, PresheafMorphism};
pub use signature::{PfElement, Signature, SignatureMorphism};
pub use site::{family_equivalent, glue, plus_restrict, sheaf_check, unit_family, CompatibleFamily, Site};
pub use tree::{FiniteTree, PathSequence};
