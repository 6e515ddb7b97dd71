use alloc::format;
use alloc::vec::Vec;

use super::certify::{certify, Certification};
use super::linking::{build_linking_set, linking_maximize, reference_overlap, LinkingSet};
use super::newton::newton_refine;
use super::ProblemSpec;
use crate::lattice::{LatticeField, Site};
use crate::{Error, Result};

/// A refined and certified critical point on one period.
#[derive(Clone, Debug)]
pub struct SolitonResult {
    pub k: usize,
    pub a: LatticeField,
    pub lambda: f64,
    pub sigma: f64,
    pub newton_iterations: usize,
    /// Iterations of the linking ascent, absent for warm starts.
    pub ascent_iterations: Option<usize>,
    /// Energy of the linking maximizer.
    pub ascent_energy: Option<f64>,
    pub linking: Option<LinkingSet>,
    pub certification: Certification,
}

impl SolitonResult {
    pub fn residual_norm(&self) -> f64 {
        self.certification.residual_norm
    }

    pub fn energy(&self) -> f64 {
        self.certification.energy
    }

    pub fn decay_gamma(&self) -> Option<f64> {
        self.certification.decay.map(|f| f.gamma)
    }
}

/// Solves on period `k`: linking maximizer (or `warm`, periodized onto the
/// working window) followed by Newton. Problems without a gap need `warm`.
pub fn solve(spec: &ProblemSpec, k: usize, seed: Site, k_ref: usize, warm: Option<&LatticeField>) -> Result<SolitonResult> {
    let window = spec.window(k);
    let linking = match spec.gap() {
        Some(_) => Some(build_linking_set(spec, k, seed, k_ref)?),
        None => None,
    };
    let (a0, ascent) = match (warm, &linking) {
        (Some(w), _) => (w.periodize(window), None),
        (None, Some((set, _, pm))) => {
            let max = linking_maximize(spec, set, pm)?;
            (max.a.clone(), Some(max))
        }
        (None, None) => return Err(Error::InvalidParameter("a warm start is required without a spectral gap".into())),
    };
    let out = newton_refine(spec, &a0)?;
    let mut a = out.a;
    let set = linking.map(|l| l.0);
    if let Some(s) = &set {
        // −a is a critical point as well; report the branch aligned with z0
        if reference_overlap(&a, &s.z0) < 0.0 {
            a.values_mut().iter_mut().for_each(|v| *v = -*v);
        }
    }
    let certification = certify(spec, &a, set.as_ref())?;
    Ok(SolitonResult {
        k,
        a,
        lambda: spec.lambda(),
        sigma: spec.sigma(),
        newton_iterations: out.iterations,
        ascent_iterations: ascent.as_ref().map(|m| m.iterations),
        ascent_energy: ascent.as_ref().map(|m| m.energy),
        linking: set,
        certification,
    })
}

/// Per-period outcomes of a sweep, with tail metrics between consecutive successes.
#[derive(Debug)]
pub struct SweepReport {
    pub results: Vec<(usize, Result<SolitonResult>)>,
    /// `(k₁, k₂, max |R^[k₁]a^[k₂] − R^[k₁]a^[k₁]|)`.
    pub tail: Vec<(usize, usize, f64)>,
    pub converged: bool,
}

impl SweepReport {
    pub fn successes(&self) -> impl Iterator<Item = &SolitonResult> {
        self.results.iter().filter_map(|(_, r)| r.as_ref().ok())
    }
}

/// `4·max k`.
pub fn default_reference_period(ks: &[usize]) -> usize {
    4 * ks.iter().copied().max().unwrap_or(1)
}

/// Solves along increasing periods, warm-starting each from the previous
/// solution.
pub fn k_sweep(spec: &ProblemSpec, ks: &[usize], seed: Site, k_ref: usize, warm: Option<&LatticeField>) -> Result<SweepReport> {
    if ks.is_empty() || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!("k list must be non-empty and increasing, got {ks:?}")));
    }
    let mut results: Vec<(usize, Result<SolitonResult>)> = Vec::new();
    let mut tail = Vec::new();
    let mut previous: Option<LatticeField> = warm.cloned();
    let mut last_ok: Option<(usize, LatticeField)> = None;
    for &k in ks {
        let r = solve(spec, k, seed, k_ref, previous.as_ref());
        if let Ok(res) = &r {
            if let Some((k1, a1)) = &last_ok {
                tail.push((*k1, k, a1.max_diff_on_cell(&res.a)));
            }
            last_ok = Some((k, res.a.clone()));
            previous = Some(res.a.clone());
        }
        results.push((k, r));
    }
    let converged = tail.last().is_some_and(|t| t.2 < 1e-6);
    Ok(SweepReport { results, tail, converged })
}
