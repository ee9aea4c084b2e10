//! Exact arithmetic for labelled cluster seeds and the global mutation group.

pub mod explore;
pub mod graph;
pub mod group;
pub mod io;
pub mod laurent;
pub mod perm;
pub mod quiver;
pub mod quotient;
pub mod seed;
pub mod specialize;
pub mod verify;
pub mod serve;
