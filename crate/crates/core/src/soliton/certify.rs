use alloc::vec::Vec;

use super::decay::{decay_rate, peak_site};
use super::energy::energy;
use super::linking::{critical_floor, reference_overlap, LinkingSet};
use super::newton::residual_tolerance;
use super::ProblemSpec;
use crate::fit::RingFit;
use crate::lattice::{nonlinear_residual, LatticeField, Site, Window};
use crate::Result;

/// Pass/fail flags of a computed soliton; `None` means not applicable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checks {
    pub in_gap: bool,
    pub defect_ok: bool,
    pub residual_ok: bool,
    pub nontrivial: bool,
    /// `J ≥ δ²/(16λσ) − 1e-8`, applicable when `2‖V‖₁ ≤ δ`.
    pub critical_value_ok: Option<bool>,
    pub realness_ok: bool,
    /// `‖a‖ ≤ M₁ = ρ`, applicable with a linking set.
    pub norm_bound_ok: Option<bool>,
    /// Decay fit with `γ > 0` and `R² > 0.9`, applicable for periods ≥ 8.
    pub decay_ok: Option<bool>,
}

impl Checks {
    pub fn entries(&self) -> [(&'static str, Option<bool>); 8] {
        [
            ("in_gap", Some(self.in_gap)),
            ("defect_ok", Some(self.defect_ok)),
            ("residual_ok", Some(self.residual_ok)),
            ("nontrivial", Some(self.nontrivial)),
            ("critical_value_ok", self.critical_value_ok),
            ("realness_ok", Some(self.realness_ok)),
            ("norm_bound_ok", self.norm_bound_ok),
            ("decay_ok", self.decay_ok),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, v)| v.unwrap_or(true))
    }
}

/// Every certified quantity, recomputed from the field and the problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub checks: Checks,
    pub residual_norm: f64,
    pub residual_tolerance: f64,
    pub energy: f64,
    pub a_norm: f64,
    pub defect_norm: f64,
    pub delta: Option<f64>,
    pub critical_floor: Option<f64>,
    /// `(R^[k] a, z0)` and the threshold `m₁`.
    pub overlap: Option<f64>,
    pub m1: Option<f64>,
    pub big_m1: Option<f64>,
    pub decay: Option<RingFit>,
    pub decay_center: Site,
    /// Center of mass in `n₁` on a half-space strip, measured from the edge row `n₁ = 0`.
    pub edge_distance: Option<f64>,
}

fn center_of_mass_n1(a: &LatticeField) -> f64 {
    let d = a.d();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, s) in a.window().sites().enumerate() {
        let w: f64 = (0..d).map(|c| a.values()[i * d + c].norm_sqr()).sum();
        num += s[0] as f64 * w;
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn certify(spec: &ProblemSpec, a: &LatticeField, linking: Option<&LinkingSet>) -> Result<Certification> {
    let (_, residual_norm) = nonlinear_residual(spec.operator(), spec.defect(), spec.lambda(), spec.sigma(), a)?;
    let energy = energy(spec, a)?;
    let a_norm = a.norm_l2();
    let tol = residual_tolerance(a_norm);
    let delta = spec.isolation();
    let defect_norm = spec.defect().norm_l1();
    let floor = delta.map(|dl| critical_floor(dl, spec.lambda(), spec.sigma()));
    let critical_value_ok = match (delta, floor) {
        (Some(dl), Some(fl)) if 2.0 * defect_norm <= dl => Some(energy >= fl - 1e-8),
        _ => None,
    };
    let overlap = linking.map(|l| reference_overlap(a, &l.z0));
    let nontrivial = match (overlap, linking) {
        (Some(o), Some(l)) => o >= l.m1,
        _ => a.norm_inf() > 1e-8,
    };
    let decay_center = peak_site(a);
    let decay = decay_rate(a, decay_center).ok();
    let decay_ok = decay.map(|f| f.gamma > 0.0 && f.quality > 0.9);
    let edge_distance = matches!(a.window(), Window::HalfStrip { .. }).then(|| center_of_mass_n1(a));
    let checks = Checks {
        in_gap: spec.gap().is_some_and(|g| g.contains(spec.lambda())),
        defect_ok: spec.defect_admissible(),
        residual_ok: residual_norm < tol,
        nontrivial,
        critical_value_ok,
        realness_ok: a.is_real(),
        norm_bound_ok: linking.map(|l| a_norm <= l.big_m1),
        decay_ok,
    };
    Ok(Certification {
        checks,
        residual_norm,
        residual_tolerance: tol,
        energy,
        a_norm,
        defect_norm,
        delta,
        critical_floor: floor,
        overlap,
        m1: linking.map(|l| l.m1),
        big_m1: linking.map(|l| l.big_m1),
        decay,
        decay_center,
        edge_distance,
    })
}

/// Names of failing checks.
pub fn failures(c: &Checks) -> Vec<&'static str> {
    c.entries().iter().filter(|(_, v)| *v == Some(false)).map(|(n, _)| *n).collect()
}
