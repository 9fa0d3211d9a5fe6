//! Binary ↔ spin translation and the diagonal of the cost Hamiltonian.
//!
//! Bits map to spins as `x_i = (1 - s_i) / 2`, so a measured 1 is the `-1`
//! eigenvalue of `σ_z`. Energy tables are indexed by basis state with qubit 0
//! as the most significant bit.

use crate::poly::{BinaryPoly, PolyError, SpinPoly};

/// Rewrites a pseudo-Boolean polynomial over spins via `x_i = (1 - s_i)/2`.
pub fn to_spin(p: &BinaryPoly) -> SpinPoly {
    let mut out = SpinPoly::zero(p.num_bits());
    for (set, c) in p.terms() {
        // Π (1 - s_i)/2 = 2^-k Σ_{T ⊆ S} (-1)^|T| s_T
        let scale = c / 2f64.powi(set.len() as i32);
        for sub in set.subsets() {
            let sign = if sub.len() % 2 == 0 { 1.0 } else { -1.0 };
            out.accumulate(sub, sign * scale);
        }
    }
    out
}

/// Inverse of [`to_spin`] via `s_i = 1 - 2 x_i`.
pub fn to_binary(h: &SpinPoly) -> BinaryPoly {
    let mut out = BinaryPoly::zero(h.num_bits());
    for (set, c) in h.terms() {
        // Π (1 - 2 x_i) = Σ_{U ⊆ T} (-2)^|U| x_U
        for sub in set.subsets() {
            let w = (-2f64).powi(sub.len() as i32);
            out.accumulate(sub, w * c);
        }
    }
    out
}

/// Energies of all `2^n` basis states; entry `k` is `h` at `s_i = 1 - 2·bit_i(k)`.
pub fn spin_energy_table(h: &SpinPoly) -> Result<Vec<f64>, PolyError> {
    h.energy_table()
}
