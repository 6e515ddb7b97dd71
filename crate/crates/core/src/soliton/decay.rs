use alloc::vec;

use crate::fit::{ring_decay_fit, RingFit};
use crate::lattice::{LatticeField, Site, Window};
use crate::{Error, Result};

/// Signed minimal-image difference along a periodic direction.
fn wrap(delta: i64, period: usize) -> i64 {
    let k = period as i64;
    let m = delta.rem_euclid(k);
    if m > k / 2 {
        m - k
    } else {
        m
    }
}

/// Chebyshev distance from `center`, minimal image in periodic directions.
pub fn ring_distance(window: &Window, site: Site, center: Site) -> usize {
    let (d1, d2) = match *window {
        Window::Periodic { period, .. } => (wrap(site[0] - center[0], period), wrap(site[1] - center[1], period)),
        Window::HalfStrip { period, .. } => (site[0] - center[0], wrap(site[1] - center[1], period)),
        Window::Box { .. } => (site[0] - center[0], site[1] - center[1]),
    };
    d1.unsigned_abs().max(d2.unsigned_abs()) as usize
}

/// Site of largest `max_i |a_n^i|`, first in storage order on ties.
pub fn peak_site(a: &LatticeField) -> Site {
    let d = a.d();
    let mut best = (0.0, a.window().site(0));
    for (i, s) in a.window().sites().enumerate() {
        let m = (0..d).map(|c| a.values()[i * d + c].norm()).fold(0.0, f64::max);
        if m > best.0 {
            best = (m, s);
        }
    }
    best.1
}

/// Exponential decay of `max_i |a_n^i|` on Chebyshev rings `ρ ≤ k/4`
/// around `center`. Needs a period of at least 8.
pub fn decay_rate(a: &LatticeField, center: Site) -> Result<RingFit> {
    let w = a.window();
    let k = match w {
        Window::Periodic { period, .. } | Window::HalfStrip { period, .. } => period,
        Window::Box { half_width } => 2 * half_width + 1,
    };
    if k < 8 {
        return Err(Error::TooFewAnnuli { period: k });
    }
    let rmax = k / 4;
    let mut rings = vec![0.0f64; rmax + 1];
    let d = a.d();
    for (i, s) in w.sites().enumerate() {
        let r = ring_distance(&w, s, center);
        if r <= rmax {
            let m = (0..d).map(|c| a.values()[i * d + c].norm()).fold(0.0, f64::max);
            rings[r] = rings[r].max(m);
        }
    }
    ring_decay_fit(&rings).ok_or(Error::InvalidParameter("decay fit of a zero field".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponential() {
        let w = Window::centered(32);
        let vals: alloc::vec::Vec<f64> = w
            .sites()
            .map(|s| (-0.7 * (s[0].unsigned_abs().max(s[1].unsigned_abs())) as f64).exp())
            .collect();
        let a = LatticeField::from_real(w, 1, &vals).unwrap();
        let fit = decay_rate(&a, [0, 0]).unwrap();
        assert!((fit.gamma - 0.7).abs() < 1e-3 && fit.quality > 0.999);
    }

    #[test]
    fn delta_is_floor_saturated() {
        let a = LatticeField::delta(Window::centered(8), 2, [0, 0], 1, 1.0).unwrap();
        assert!(decay_rate(&a, [0, 0]).unwrap().floor_saturated);
        let small = LatticeField::delta(Window::centered(6), 1, [0, 0], 0, 1.0).unwrap();
        assert_eq!(decay_rate(&small, [0, 0]), Err(Error::TooFewAnnuli { period: 6 }));
    }

    #[test]
    fn rings_wrap_periodically() {
        let w = Window::periodic(10);
        assert_eq!(ring_distance(&w, [9, 0], [0, 0]), 1);
        assert_eq!(ring_distance(&Window::half_strip(10, 10), [9, 0], [1, 0]), 8);
    }
}
