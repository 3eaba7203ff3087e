//! Z2 harmonic functions and 1-forms.

pub mod branch;
pub mod catalogue;
pub mod descriptor;
pub mod io;
pub mod morphisms;
pub mod sun;
pub mod verify;
