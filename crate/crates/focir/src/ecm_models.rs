//! Circuit model definitions (Randles, n-CPE FO-ECM) and the forward maps
//! from circuit parameters to state-space matrices and branch coefficients.
//!
//! Units follow the usual conventions (Ω, F, s); they are documented but not
//! enforced, validation is range-based.

use crate::error::{Error, Result};
use crate::frac_core::{ASequence, FractionalOrder};
use crate::ss_sim::DiscreteFoSystem;

/// The integer-order Randles circuit: series R∞ plus one parallel R-C pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandlesParams {
    pub r_inf: f64,
    pub r1: f64,
    pub c1: f64,
}

impl RandlesParams {
    pub fn new(r_inf: f64, r1: f64, c1: f64) -> Result<Self> {
        for (name, v) in [("r_inf", r_inf), ("r1", r1), ("c1", c1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { r_inf, r1, c1 })
    }
}

/// Parallel resistance of a CPE branch; `Open` models a Warburg element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resistance {
    Finite(f64),
    Open,
}

impl Resistance {
    pub fn finite(self) -> Option<f64> {
        match self {
            Resistance::Finite(r) => Some(r),
            Resistance::Open => None,
        }
    }
}

/// One R‖CPE branch: parallel resistance, CPE constant (F·cm⁻²·s^{α-1}),
/// and fractional exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams {
    r: Resistance,
    c: f64,
    alpha: FractionalOrder,
}

impl BranchParams {
    pub fn new(r: Resistance, c: f64, alpha: FractionalOrder) -> Result<Self> {
        if let Resistance::Finite(v) = r {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "branch resistance must be positive, got {v}"
                )));
            }
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!(
                "CPE constant must be positive, got {c}"
            )));
        }
        Ok(Self { r, c, alpha })
    }

    pub fn r(&self) -> Resistance {
        self.r
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }
}

/// Full FO-ECM parameter vector θ = [R∞, R_1..R_n, C_1..C_n, α_1..α_n]
/// together with the sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct FoEcmParams {
    r_inf: f64,
    branches: Vec<BranchParams>,
    ts: f64,
}

impl FoEcmParams {
    pub fn new(r_inf: f64, branches: Vec<BranchParams>, ts: f64) -> Result<Self> {
        if !(r_inf.is_finite() && r_inf > 0.0) {
            return Err(Error::Domain(format!(
                "r_inf must be positive, got {r_inf}"
            )));
        }
        if branches.is_empty() {
            return Err(Error::Domain("at least one branch is required".into()));
        }
        if !(ts.is_finite() && ts > 0.0) {
            return Err(Error::Domain(format!(
                "sample time must be positive, got {ts}"
            )));
        }
        Ok(Self {
            r_inf,
            branches,
            ts,
        })
    }

    pub fn r_inf(&self) -> f64 {
        self.r_inf
    }

    pub fn branches(&self) -> &[BranchParams] {
        &self.branches
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    /// Flatten into [R∞, R_1..R_n, C_1..C_n, α_1..α_n]; an open (Warburg)
    /// resistance flattens to +∞.
    pub fn theta(&self) -> Vec<f64> {
        let mut out = vec![self.r_inf];
        out.extend(self.branches.iter().map(|b| match b.r {
            Resistance::Finite(r) => r,
            Resistance::Open => f64::INFINITY,
        }));
        out.extend(self.branches.iter().map(|b| b.c));
        out.extend(self.branches.iter().map(|b| b.alpha.value()));
        out
    }
}

/// Discrete-time coefficients of one branch: the A_j diagonal entries, input
/// gain, output weight, and the shared feed-through.
#[derive(Debug, Clone)]
pub struct BranchCoefficients {
    pub a0: f64,
    pub a_tail: ASequence,
    pub b: f64,
    /// Shared feed-through d = R∞.
    pub d: f64,
    pub m: f64,
}

/// Transfer-function coefficients (f_1, f_0, g_0) of the Randles circuit at
/// sample time `ts`:
/// f_1 = R∞, f_0 = -R∞(1 - ts/(R1 C1)) + ts/C1, g_0 = -(1 - ts/(R1 C1)).
pub fn randles_tf_coeffs(p: &RandlesParams, ts: f64) -> Result<(f64, f64, f64)> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::Domain(format!(
            "sample time must be positive, got {ts}"
        )));
    }
    let pole = 1.0 - ts / (p.r1 * p.c1);
    let f1 = p.r_inf;
    let f0 = -p.r_inf * pole + ts / p.c1;
    let g0 = -pole;
    Ok((f1, f0, g0))
}

/// Discrete coefficients of branch `i` at data length `t`:
/// a_0 = α - ts^α/(R C) (Warburg: a_0 = α), b = ts^α/C, d = R∞, m = 1.
pub fn branch_coefficients(p: &FoEcmParams, i: usize, t: usize) -> Result<BranchCoefficients> {
    let Some(branch) = p.branches().get(i) else {
        return Err(Error::DimensionMismatch(format!(
            "branch index {i} out of range (n = {})",
            p.branches().len()
        )));
    };
    if t < 1 {
        return Err(Error::Domain("data length must be at least 1".into()));
    }
    let alpha = branch.alpha.value();
    let ts_pow = p.ts().powf(alpha);
    let a0 = match branch.r {
        Resistance::Finite(r) => alpha - ts_pow / (r * branch.c),
        Resistance::Open => alpha,
    };
    Ok(BranchCoefficients {
        a0,
        a_tail: ASequence::from_raw(alpha, t)?,
        b: ts_pow / branch.c,
        d: p.r_inf(),
        m: 1.0,
    })
}

/// Assemble the full discrete state-space model of an n-branch FO-ECM:
/// diagonal A_j, B = [b_1..b_n], M = [1..1], D = R∞.
pub fn to_state_space(p: &FoEcmParams, t: usize) -> Result<DiscreteFoSystem> {
    let n = p.branches().len();
    let mut a0 = vec![0.0; n * n];
    let mut a_tail = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let bc = branch_coefficients(p, i, t)?;
        a0[i * n + i] = bc.a0;
        a_tail.push(bc.a_tail);
        b.push(bc.b);
    }
    let alphas = p.branches().iter().map(|br| br.alpha.value()).collect();
    DiscreteFoSystem::new(alphas, a0, a_tail, b, vec![1.0; n], p.r_inf(), p.ts())
}

/// Discrete state-space model of the integer-order Randles circuit, for
/// simulation of α = 1 models (the history tail vanishes identically).
pub fn randles_state_space(p: &RandlesParams, ts: f64, t: usize) -> Result<DiscreteFoSystem> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::Domain(format!(
            "sample time must be positive, got {ts}"
        )));
    }
    let a0 = 1.0 - ts / (p.r1 * p.c1);
    let tail = ASequence::from_raw(1.0, t.max(1))?;
    DiscreteFoSystem::new(
        vec![1.0],
        vec![a0],
        vec![tail],
        vec![ts / p.c1],
        vec![1.0],
        p.r_inf,
        ts,
    )
}
