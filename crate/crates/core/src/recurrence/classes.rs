use serde::{Deserialize, Serialize};

use super::burning::is_recurrent;
use crate::config::{HeightConfig, TopplingVector};
use crate::error::{Error, Result};
use crate::lattice::{solve_integral, TopplingMatrix, Volume};
use crate::topple::{special_boundary_addition, Engine};

/// Integer `m` with `eta - xi = Δ_V m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub volume: Volume,
    pub m: Vec<i64>,
}

impl EquivalenceCertificate {
    pub fn verify(&self, eta: &HeightConfig, xi: &HeightConfig) -> bool {
        let dm = TopplingMatrix::new(&self.volume).apply(&self.m);
        eta.heights().iter().zip(xi.heights()).zip(&dm).all(|((a, b), d)| a - b == *d)
    }
}

/// Solve `Δ_V m = eta - xi` exactly; a certificate exists iff the solution
/// is integral.
pub fn equivalence_check(eta: &HeightConfig, xi: &HeightConfig) -> Result<Option<EquivalenceCertificate>> {
    if eta.volume() != xi.volume() {
        return Err(Error::InvalidVolume(format!("{} vs {}", eta.volume(), xi.volume())));
    }
    let diff: Vec<i64> = eta.heights().iter().zip(xi.heights()).map(|(a, b)| a - b).collect();
    Ok(solve_integral(eta.volume(), &diff)?
        .map(|m| EquivalenceCertificate { volume: eta.volume().clone(), m }))
}

/// The recurrent configuration equivalent to `eta` modulo `Δ_V`.
///
/// Stabilize, then repeatedly add the boundary field `λ_V = Δ_V 1` and
/// stabilize again; the iteration stops at the first fixed point, and the
/// fixed points are exactly the recurrent configurations.
pub fn recurrent_representative(eta: &HeightConfig) -> Result<HeightConfig> {
    let v = eta.volume();
    let mut engine = Engine::new(v);
    let beta = special_boundary_addition(v);
    let mut cur = engine.stabilize(eta)?.into_result()?.xi;
    let cap = representative_iteration_cap(v);
    for _ in 0..cap {
        let next = engine.stabilize(&cur.plus(&beta)?)?.into_result()?.xi;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    Err(Error::IterationCap(cap))
}

/// Iteration cap for [`recurrent_representative`]. Hitting it is an
/// internal error: each round burns at least one more layer of the volume.
pub fn representative_iteration_cap(v: &Volume) -> u64 {
    4 * v.len() as u64 + 16
}

/// Outcome of adding `λ_V` to a configuration and stabilizing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleCheck {
    pub recurrent: bool,
    pub all_toppled_once: bool,
    pub unchanged: bool,
    pub m: TopplingVector,
    pub xi: HeightConfig,
}

impl RectangleCheck {
    pub fn holds(&self) -> bool {
        self.all_toppled_once && self.unchanged
    }

    /// A recurrent input that fails the identity.
    pub fn contradicts_recurrence(&self) -> bool {
        self.recurrent && !self.holds()
    }
}

/// Add the boundary field and stabilize. For recurrent input every site
/// topples exactly once and the configuration comes back unchanged.
pub fn rectangle_identity_check(eta: &HeightConfig) -> Result<RectangleCheck> {
    let v = eta.volume();
    let recurrent = is_recurrent(eta)?;
    let r = Engine::new(v).stabilize(&eta.plus(&special_boundary_addition(v))?)?.into_result()?;
    Ok(RectangleCheck {
        recurrent,
        all_toppled_once: r.m.counts.iter().all(|&c| c == 1),
        unchanged: &r.xi == eta,
        m: r.m,
        xi: r.xi,
    })
}
