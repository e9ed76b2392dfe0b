pub mod tree;
pub mod omega;
pub mod labeled;
pub mod oplax;
pub mod dendro;
pub mod group;
pub mod equivariant;
pub mod genuine;
pub mod suites;
pub mod io;
pub mod dot;
