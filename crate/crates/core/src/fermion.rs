//! Occupation-number bit strings with Jordan–Wigner ordering.
//!
//! Mode `p` is bit `p` (mode 0 is the least significant bit). A creation or
//! annihilation operator on mode `p` picks up `(-1)^k` where `k` counts the
//! occupied modes with index below `p`.

#[inline]
pub fn jw_sign(bits: usize, mode: usize) -> f64 {
    let below = bits & ((1usize << mode) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn occupied(bits: usize, mode: usize) -> bool {
    bits >> mode & 1 == 1
}

/// `a_p |bits>`; `None` when the mode is empty.
#[inline]
pub fn annihilate(bits: usize, mode: usize) -> Option<(usize, f64)> {
    if occupied(bits, mode) {
        Some((bits ^ (1 << mode), jw_sign(bits, mode)))
    } else {
        None
    }
}

/// `a†_p |bits>`; `None` when the mode is already filled.
#[inline]
pub fn create(bits: usize, mode: usize) -> Option<(usize, f64)> {
    if occupied(bits, mode) {
        None
    } else {
        Some((bits | (1 << mode), jw_sign(bits, mode)))
    }
}

/// All bit strings over `n_modes` with exactly `n_particles` set bits, ascending.
pub fn sector_states(n_modes: usize, n_particles: usize) -> Vec<usize> {
    (0..1usize << n_modes)
        .filter(|b| b.count_ones() as usize == n_particles)
        .collect()
}

pub fn occupied_modes(bits: usize) -> impl Iterator<Item = usize> {
    let mut rest = bits;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(p)
        }
    })
}
