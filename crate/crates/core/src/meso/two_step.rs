//! Homogenizing the leading mesoscale model `U_t = D(𝒦 D U)` over `x1`,
//! compared with homogenizing both phases at once.

use serde_json::{json, Value};

use crate::constructor::{construct, Construction};
use crate::error::Result;
use crate::heterogeneity::Family;
use crate::trigpoly::poly::int;
use crate::trigpoly::{RingElement, Substitution};

#[derive(Clone, Debug)]
pub struct TwoStepComparison {
    /// `(N_d, N_a)` of both constructions.
    pub orders: (u32, u32),
    pub k2_two_step: RingElement,
    pub k2_one_step: RingElement,
    /// Field terms of the two-step construction that differ from the
    /// one-step field with `a2 = 0`.
    pub field_mismatches: usize,
    /// Higher coefficients of the two routes; not expected to agree since
    /// the mesoscale model was truncated before the second homogenization.
    pub higher_two_step: Vec<RingElement>,
    pub higher_one_step: Vec<RingElement>,
}

impl TwoStepComparison {
    pub fn leading_agrees(&self) -> bool {
        self.k2_two_step.is_one() && self.k2_one_step.is_one()
    }

    pub fn field_agrees(&self) -> bool {
        self.field_mismatches == 0
    }

    pub fn to_json(&self) -> Value {
        let fmt = |v: &[RingElement]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        json!({
            "orders": [self.orders.0, self.orders.1],
            "K2_two_step": self.k2_two_step.to_string(),
            "K2_one_step": self.k2_one_step.to_string(),
            "leading_agrees": self.leading_agrees(),
            "field_agrees": self.field_agrees(),
            "higher_two_step": fmt(&self.higher_two_step),
            "higher_one_step": fmt(&self.higher_one_step),
        })
    }
}

fn mismatches(two: &Construction, one: &Construction) -> Result<usize> {
    let sub = Substitution {
        a2: Some(int(0)),
        ..Default::default()
    };
    let reduced = one.manifold.u.substitute(&sub)?;
    let mut count = 0;
    for ((d, h), c) in two.manifold.u.iter() {
        if reduced.coefficient(*d, *h) != Some(c) {
            count += 1;
        }
    }
    for ((d, h), _) in reduced.iter() {
        if two.manifold.u.coefficient(*d, *h).is_none() {
            count += 1;
        }
    }
    Ok(count)
}

/// Both routes at derivative order `n_d` and amplitude order `n_a`.
pub fn two_step_vs_one_step(n_d: u32, n_a: u32) -> Result<TwoStepComparison> {
    let two = construct(Family::FirstPhase, n_d, n_a)?;
    let one = construct(Family::QuasiPeriodic, n_d, n_a)?;
    let higher = |c: &Construction| c.pde.coeffs.iter().skip(3).cloned().collect::<Vec<_>>();
    Ok(TwoStepComparison {
        orders: (n_d, n_a),
        k2_two_step: two.pde.coeffs[2].clone(),
        k2_one_step: one.pde.coeffs[2].clone(),
        field_mismatches: mismatches(&two, &one)?,
        higher_two_step: higher(&two),
        higher_one_step: higher(&one),
    })
}
