//! Link-homotopy classification of 4- and 5-component links.

pub(crate) mod coeff;
pub(crate) mod fiber;
pub(crate) mod reduce;
pub mod decide;
pub mod indexing;
pub mod lattice;
pub mod magnus;
pub mod milnor;
pub mod moves;
pub mod stringlink;
