//! Simulation toolkit for individual-atom addressing in an optical lattice
//! with standing-wave driving fields.
//!
//! Atoms sit at every lattice site and carry a Lambda-type level structure
//! `{ |a>, |b>, |q> }` plus one excited state `|e_q>`. Two standing waves,
//! tilted so that their common spatial period is commensurate with the
//! lattice, drive a STIRAP transfer `|b> -> |q>` everywhere except at their
//! shared nodes. Choosing the node spacing `(L+1) d_l` leaves the sublattice
//! `s = k + (L+1) n` untouched, so a focused manipulation beam of width
//! `~ L d_l` afterwards addresses site `k` alone.
//!
//! Module map:
//! - [`geometry`]: standing-wave periods, node placement, alignment budgets;
//! - [`pulse`]: STIRAP pulse pair and manipulation-beam parameters;
//! - [`quantum`]: single-site non-Hermitian Schroedinger integration;
//! - [`stirap`]: transfer figures of merit, threshold scans, site maps;
//! - [`register`]: dense multi-site state vector and protocol operations.
//!
//! Units: energies and rates in units of the spontaneous rate `gamma_q`,
//! times in `1/gamma_q`, lengths in units of the lattice constant `d_l`.

pub mod geometry;
pub mod pulse;
pub mod quantum;
pub mod register;
pub mod stirap;

pub use num_complex::Complex64 as C64;
