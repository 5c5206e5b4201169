use serde::{Deserialize, Serialize};

use super::Ledger;
use crate::error::Result;
use crate::interval::IntervalValue as I;

/// Relative bracket width of the δ* search.
pub const REL_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// C₁·C₁₄(δ) < 1
    Absorption,
    /// absorption holds, ε(δ) > 0 and δ stays below δ*_absorption
    OneForm,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaStar {
    pub criterion: Criterion,
    pub delta_star: f64,
    /// largest δ found where the criterion holds
    pub good: f64,
    /// smallest δ found where it fails
    pub bad: f64,
    pub below: f64,
    pub above: f64,
    /// criterion quantity at `below` (C₁·C₁₄ or ε)
    pub certificate_below: I,
    /// criterion quantity at `above`, when it can be evaluated
    pub certificate_above: Option<I>,
    pub holds_below: bool,
    pub fails_above: bool,
    pub above_reason: String,
    /// for the one-form criterion, the ceiling imposed by δ*_absorption
    pub ceiling: Option<f64>,
}

impl DeltaStar {
    pub fn bracket(&self) -> I {
        I::new(self.good, self.bad).expect("bracket is ordered")
    }

    pub fn certified(&self) -> bool {
        self.holds_below && self.fails_above
    }
}

struct Probe {
    holds: bool,
    quantity: Option<I>,
    reason: String,
}

fn probe(ledger: &Ledger, criterion: Criterion, ceiling: Option<f64>, delta: f64) -> Probe {
    let absorption = ledger
        .eval("C_flat_injectivity", None)
        .and_then(|c1| Ok(c1 * ledger.eval("C_Laplacian_comparison", Some(delta))?));
    match criterion {
        Criterion::Absorption => match absorption {
            Ok(p) => Probe {
                holds: p.hi() < 1.0,
                quantity: Some(p),
                reason: format!("C1*C14 upper bound {:e}", p.hi()),
            },
            Err(e) => Probe {
                holds: false,
                quantity: None,
                reason: e.to_string(),
            },
        },
        Criterion::OneForm => {
            let eps = ledger.eval("epsilon_one_form", Some(delta));
            let (quantity, mut reason, positive) = match eps {
                Ok(e) => (Some(e), format!("epsilon lower bound {:e}", e.lo()), e.lo() > 0.0),
                Err(err) => (None, err.to_string(), false),
            };
            let under_ceiling = ceiling.map_or(true, |c| delta <= c);
            if !under_ceiling {
                reason = format!("{reason}; delta above the absorption ceiling");
            }
            Probe {
                holds: positive && under_ceiling,
                quantity,
                reason,
            }
        }
    }
}

/// Bisection for the largest δ satisfying `criterion`, with rigorous interval
/// certificates at δ*(1 ∓ 10⁻³).
pub fn max_admissible_delta(ledger: &Ledger, criterion: Criterion) -> Result<DeltaStar> {
    let ceiling = match criterion {
        Criterion::Absorption => None,
        Criterion::OneForm => {
            let abs = max_admissible_delta(ledger, Criterion::Absorption)?;
            Some(abs.delta_star * (1.0 - REL_TOL))
        }
    };
    let test = |d: f64| probe(ledger, criterion, ceiling, d).holds;

    let mut bad = 1.0 / 6.0;
    let mut good = bad / 2.0;
    while !test(good) {
        bad = good;
        good /= 2.0;
        if good < f64::MIN_POSITIVE {
            return Err(crate::Error::Domain(format!("{criterion:?} criterion fails for every positive delta")));
        }
    }
    while bad / good > 1.0 + REL_TOL / 4.0 {
        let mid = (good * bad).sqrt();
        if test(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let delta_star = 0.5 * (good + bad);
    let below = delta_star * (1.0 - REL_TOL);
    let above = delta_star * (1.0 + REL_TOL);
    let lo = probe(ledger, criterion, ceiling, below);
    let hi = probe(ledger, criterion, ceiling, above);
    Ok(DeltaStar {
        criterion,
        delta_star,
        good,
        bad,
        below,
        above,
        certificate_below: lo.quantity.expect("criterion holds below, so its quantity was evaluated"),
        certificate_above: hi.quantity,
        holds_below: lo.holds,
        fails_above: !hi.holds,
        above_reason: hi.reason,
        ceiling,
    })
}
