//! Exact point counts, mod-`n` Euler characteristics and Frobenius data of
//! definable sets over finite fields.
//!
//! The crate is organized bottom-up:
//!
//! * [`gf`]: finite field towers with Frobenius, sorts `K_m` as fixed fields.
//! * [`logic`]: formulas with counting quantifiers, parsed and evaluated by
//!   enumeration in the Frobenius periodic field.
//! * [`geometry`]: affine and projective constructible sets and point counts.
//! * [`zeta`]: characteristic roots recovered from point counts.
//! * [`padic`]: Newton polygons, unit-root residues, dual Euler characteristic.
//! * [`euler`]: coherent mod-`n` Euler characteristics and their axioms.
//! * [`torsion`]: elliptic-curve torsion and the Frobenius action on it.
//!
//! The guide under `book/` is compiled into this crate's doc-tests, so every
//! snippet there runs with `cargo test`.

pub mod euler;
pub mod geometry;
pub mod gf;
pub mod logic;
pub mod padic;
pub mod torsion;
pub mod zeta;

/// Reads the enumeration bound from `PFCHI_BOUND`, falling back to the default.
pub fn enumeration_bound() -> u128 {
    std::env::var("PFCHI_BOUND")
        .ok()
        .and_then(|s| s.trim().parse::<u128>().ok())
        .filter(|&b| b >= 1)
        .unwrap_or(gf::DEFAULT_ENUMERATION_BOUND)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/varieties.md")]
    mod varieties {}
    #[doc = include_str!("../../../book/src/zeta.md")]
    mod zeta {}
    #[doc = include_str!("../../../book/src/euler.md")]
    mod euler {}
    #[doc = include_str!("../../../book/src/torsion.md")]
    mod torsion {}
}
