//! Code construction: constellations, the linear-code representation and
//! every code of the family (Alamouti, Family I/II, Golden, quasi-orthogonal
//! and the 4×2 twisted code).

pub mod catalog;
mod constellation;
mod designs;
mod linear;

pub use constellation::Constellation;
pub use designs::{
    build_u_dft, make_alamouti, make_alamouti_unchecked, make_family1, make_family2, make_golden, make_new_4x2,
    make_quasi_orthogonal, Family1Scaling,
};
pub use linear::{ComplexForm, LinearCode};
