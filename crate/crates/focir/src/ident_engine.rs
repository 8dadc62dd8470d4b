//! Inversion of coefficient maps and classification of structural
//! identifiability.
//!
//! Three inverse procedures are implemented:
//! - the closed-form Randles inverse,
//! - single-CPE recovery, where the fractional order is pinned down by
//!   intersecting the preimages of two (or more) a-sequence values, and
//! - two-CPE recovery, where (α₁, α₂) solve a pair of nonlinear relations in
//!   the three trailing denominator coefficients and the remaining
//!   parameters follow from a backward chain through the leading
//!   coefficients.

use crate::ecm_models::{BranchParams, FoEcmParams, RandlesParams, Resistance};
use crate::error::{Error, Result};
use crate::frac_core::{a_value, ASequence, FractionalOrder};
use crate::tf_builder::{coefficient_map, CoefficientVector, StructureTag};

/// Identifiability class of a solution set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    GloballyIdentifiable,
    /// Finitely many solutions; the count is the solution multiplicity.
    Identifiable(usize),
    Unidentifiable,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::GloballyIdentifiable => write!(f, "globally_identifiable"),
            Classification::Identifiable(k) => write!(f, "identifiable({k})"),
            Classification::Unidentifiable => write!(f, "unidentifiable"),
        }
    }
}

/// Solution set of an inversion, with per-solution reconstruction residuals
/// (max relative error of the forward coefficient map against the input).
#[derive(Debug, Clone)]
pub struct IdentifiabilityResult {
    pub solutions: Vec<FoEcmParams>,
    pub classification: Classification,
    pub residuals: Vec<f64>,
}

/// Tolerances and scan resolution for the inverse procedures.
#[derive(Debug, Clone)]
pub struct InversionConfig {
    /// Bisection / search tolerance on α.
    pub alpha_root_tol: f64,
    /// Agreement tolerance when intersecting preimages across indices.
    pub alpha_match_tol: f64,
    /// Relative tolerance for a-sequence consistency checks.
    pub consistency_tol: f64,
    /// Acceptance threshold on the forward reconstruction residual.
    pub residual_accept: f64,
    /// Grid resolution of the two-CPE α₁ scan.
    pub grid_points: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            alpha_root_tol: 1e-12,
            alpha_match_tol: 1e-8,
            consistency_tol: 1e-6,
            residual_accept: 1e-6,
            grid_points: 4000,
        }
    }
}

/// Closed-form inverse of the Randles coefficient map:
/// R∞ = f₁, C₁ = ts/(f₀ - f₁g₀), R₁ = ts/((1 + g₀)·C₁).
pub fn invert_randles(f1: f64, f0: f64, g0: f64, ts: f64) -> Result<RandlesParams> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::Domain(format!(
            "sample time must be positive, got {ts}"
        )));
    }
    let pole = 1.0 + g0;
    let cap_den = f0 - f1 * g0;
    if pole == 0.0 || cap_den == 0.0 {
        return Err(Error::SingularStructure(
            "degenerate Randles coefficients: parameters lie on the domain boundary".into(),
        ));
    }
    let c1 = ts / cap_den;
    let r1 = ts / (pole * c1);
    RandlesParams::new(f1, r1, c1)
}

// Interior maximizer of alpha -> a_j(alpha) on (0, 1) by golden-section
// search; a_j is unimodal with a_j(0+) = a_j(1-) = 0.
fn argmax_a(j: usize, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = a_value(x1, j);
    let mut f2 = a_value(x2, j);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = a_value(x2, j);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = a_value(x1, j);
        }
    }
    0.5 * (lo + hi)
}

// Bisect a_j(alpha) = target on [lo, hi], where the residual changes sign.
fn bisect_a(j: usize, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = a_value(lo, j) - target;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return mid;
        }
        let fm = a_value(mid, j) - target;
        if (fm >= 0.0) == (flo >= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

// The <= 2 preimages of a_j(alpha) = target over (0, 1).
fn alpha_preimages(j: usize, target: f64, cfg: &InversionConfig) -> Result<Vec<f64>> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::NoSolution(format!(
            "a_{j} must be positive for a fractional order, got {target}"
        )));
    }
    let peak = argmax_a(j, cfg.alpha_root_tol);
    let peak_val = a_value(peak, j);
    if target > peak_val {
        if target <= peak_val * (1.0 + 1e-12) {
            return Ok(vec![peak]);
        }
        return Err(Error::NoSolution(format!(
            "a_{j} = {target} exceeds the unimodal maximum {peak_val}"
        )));
    }
    let mut roots = vec![
        bisect_a(j, target, 1e-12, peak, cfg.alpha_root_tol),
        bisect_a(j, target, peak, 1.0 - 1e-12, cfg.alpha_root_tol),
    ];
    roots.dedup_by(|a, b| (*a - *b).abs() < cfg.alpha_match_tol);
    Ok(roots)
}

/// Recover the fractional order from probed a-sequence values at two or more
/// distinct indices. Each probe narrows the preimage to at most two roots;
/// the unique root common to all indices (within the matching tolerance) is
/// the order.
pub fn recover_alpha_single(
    probes: &[(usize, f64)],
    cfg: &InversionConfig,
) -> Result<FractionalOrder> {
    let mut indices: Vec<usize> = probes.iter().map(|&(j, _)| j).collect();
    indices.sort_unstable();
    indices.dedup();
    if indices.len() < 2 {
        return Err(Error::Domain(
            "at least two distinct probe indices are required".into(),
        ));
    }
    if probes.iter().any(|&(j, _)| j < 1) {
        return Err(Error::Domain("probe indices must satisfy j >= 1".into()));
    }

    let first = alpha_preimages(probes[0].0, probes[0].1, cfg)?;
    let mut common: Vec<f64> = Vec::new();
    'cand: for cand in first {
        let mut acc = cand;
        let mut count = 1.0;
        for &(j, target) in &probes[1..] {
            let roots = alpha_preimages(j, target, cfg)?;
            match roots
                .iter()
                .find(|&&r| (r - cand).abs() <= cfg.alpha_match_tol)
            {
                Some(&r) => {
                    acc += r;
                    count += 1.0;
                }
                None => continue 'cand,
            }
        }
        common.push(acc / count);
    }
    common.dedup_by(|a, b| (*a - *b).abs() < cfg.alpha_match_tol);
    match common.as_slice() {
        [] => Err(Error::InconsistentCoefficients(
            "no common preimage across the probed indices".into(),
        )),
        [root] => FractionalOrder::new(*root),
        _ => Err(Error::InconsistentCoefficients(format!(
            "ambiguous order: {} distinct common preimages",
            common.len()
        ))),
    }
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-12))
        .fold(0.0, f64::max)
}

/// Invert a single-CPE coefficient vector: read off (d, a₀, b₁, a₁..a_T)
/// recursively, pin α₁ from (a₁, a₂) with the remaining indices as
/// consistency checks, then recover (R∞, R₁, C₁). The single-CPE map is
/// one-to-one, so a valid vector yields exactly one solution.
pub fn invert_single_cpe(
    c: &CoefficientVector,
    cfg: &InversionConfig,
) -> Result<IdentifiabilityResult> {
    if c.structure() != StructureTag::SingleCpe {
        return Err(Error::UnsupportedStructure(format!(
            "expected single_cpe, got {}",
            c.structure().as_str()
        )));
    }
    let t = c.horizon();
    if t < 2 {
        return Err(Error::Domain("single-CPE inversion needs T >= 2".into()));
    }
    let (f, g) = c.blocks();
    if f.len() != t + 2 || g.len() != t + 1 {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has blocks ({}, {}), expected ({}, {})",
            f.len(),
            g.len(),
            t + 2,
            t + 1
        )));
    }

    // The recursive read-off: d, a_{1,0}, b_1, then the tail.
    let d = f[0];
    let a0 = -g[0];
    let b1 = f[1] - g[0] * f[0];
    let a_tail: Vec<f64> = (1..=t).map(|j| -g[j]).collect();

    let alpha = recover_alpha_single(&[(1, a_tail[0]), (2, a_tail[1])], cfg)?;

    // Every remaining coefficient must agree with the recovered order,
    // otherwise the vector does not have single-CPE structure.
    let model_tail = ASequence::from_raw(alpha.value(), t)?;
    for j in 1..=t {
        let expect = model_tail.value(j);
        let got = a_tail[j - 1];
        if (got - expect).abs() > cfg.consistency_tol * expect.abs().max(1e-12) {
            return Err(Error::InconsistentCoefficients(format!(
                "a_{j} = {got} is inconsistent with recovered order {} (expected {expect})",
                alpha.value()
            )));
        }
    }

    if b1 <= 0.0 {
        return Err(Error::SingularStructure(format!(
            "numerator gain b1 = {b1} is not positive"
        )));
    }
    let gap = alpha.value() - a0;
    if gap <= 0.0 {
        return Err(Error::SingularStructure(
            "alpha - a_{1,0} <= 0: branch resistance is not finite positive".into(),
        ));
    }
    let ts = c.ts();
    let ts_pow = ts.powf(alpha.value());
    let c1 = ts_pow / b1;
    let r1 = ts_pow / (gap * c1);
    let params = FoEcmParams::new(
        d,
        vec![BranchParams::new(Resistance::Finite(r1), c1, alpha)?],
        ts,
    )?;

    let rebuilt = coefficient_map(&params, t)?;
    let residual = max_rel_diff(c.values(), rebuilt.values());
    Ok(IdentifiabilityResult {
        solutions: vec![params],
        classification: Classification::GloballyIdentifiable,
        residuals: vec![residual],
    })
}

/// The three trailing denominator coefficients of a two-CPE model, which
/// determine the pair of fractional orders.
#[derive(Debug, Clone, Copy)]
pub struct LemmaSystem {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub horizon: usize,
}

impl LemmaSystem {
    pub fn new(g0: f64, g1: f64, g2: f64, horizon: usize) -> Result<Self> {
        if g0 == 0.0 {
            return Err(Error::SingularStructure(
                "g0 = 0: both trailing a-coefficients must be nonzero".into(),
            ));
        }
        if horizon < 2 {
            return Err(Error::Domain("lemma system needs T >= 2".into()));
        }
        Ok(Self {
            g0,
            g1,
            g2,
            horizon,
        })
    }
}

/// Residuals of the two order relations
/// r₁ = g₁ + g₀(T+1)(1/(α₁-T) + 1/(α₂-T)) and
/// r₂ = g₂ - g₀(T+1)(â + b̂ + ĉ).
pub fn lemma_residuals(alpha1: f64, alpha2: f64, sys: &LemmaSystem) -> (f64, f64) {
    let t = sys.horizon as f64;
    let r1 = sys.g1 + sys.g0 * (t + 1.0) * (1.0 / (alpha1 - t) + 1.0 / (alpha2 - t));
    let a_hat = t / ((alpha2 - t) * (alpha2 - t + 1.0));
    let b_hat = (t + 1.0) / ((alpha1 - t) * (alpha2 - t));
    let c_hat = t / ((alpha1 - t) * (alpha1 - t + 1.0));
    let r2 = sys.g2 - sys.g0 * (t + 1.0) * (a_hat + b_hat + c_hat);
    (r1, r2)
}

// alpha2 implied by the first lemma relation at a given alpha1, or None if
// it falls outside (0, 1).
fn alpha2_from_first_relation(alpha1: f64, sys: &LemmaSystem) -> Option<f64> {
    let t = sys.horizon as f64;
    let s = -sys.g1 / (sys.g0 * (t + 1.0)) - 1.0 / (alpha1 - t);
    if s == 0.0 {
        return None;
    }
    let alpha2 = t + 1.0 / s;
    (alpha2 > 0.0 && alpha2 < 1.0).then_some(alpha2)
}

// Magnitude scale of the second relation, used to normalize residuals.
fn r2_scale(sys: &LemmaSystem) -> f64 {
    let t = sys.horizon as f64;
    // hat terms are O(1/T) each at alpha in (0,1).
    (sys.g2.abs() + sys.g0.abs() * (t + 1.0) * 3.0 / t).max(f64::MIN_POSITIVE)
}

/// Solve the two order relations for (α₁, α₂): eliminate α₂ through the
/// first relation (linear in 1/(α₂-T)) and scan α₁ over (0, 1), polishing
/// each sign change of the second residual by bisection. A tangency (the
/// permutation fixed point α₁ = α₂) is detected as a near-zero local
/// minimum and refined by ternary search.
///
/// Normally exactly two solutions come back, permutations of each other;
/// any other count is surfaced as found.
pub fn solve_two_cpe_alphas(sys: &LemmaSystem, cfg: &InversionConfig) -> Result<Vec<(f64, f64)>> {
    let r2_at = |alpha1: f64| -> Option<f64> {
        alpha2_from_first_relation(alpha1, sys).map(|a2| lemma_residuals(alpha1, a2, sys).1)
    };
    let scale = r2_scale(sys);

    let n = cfg.grid_points.max(100);
    let lo_edge = 1e-9;
    let hi_edge = 1.0 - 1e-9;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo_edge + (hi_edge - lo_edge) * i as f64 / n as f64)
        .collect();
    let vals: Vec<Option<f64>> = grid.iter().map(|&a| r2_at(a)).collect();

    let mut roots: Vec<f64> = Vec::new();

    // Sign changes -> bisection.
    for w in 0..n {
        if let (Some(v0), Some(v1)) = (vals[w], vals[w + 1]) {
            if v0 == 0.0 {
                roots.push(grid[w]);
                continue;
            }
            if (v0 > 0.0) != (v1 > 0.0) {
                let (mut lo, mut hi) = (grid[w], grid[w + 1]);
                let mut flo = v0;
                while hi - lo > cfg.alpha_root_tol {
                    let mid = 0.5 * (lo + hi);
                    match r2_at(mid) {
                        Some(fm) if (fm > 0.0) == (flo > 0.0) => {
                            lo = mid;
                            flo = fm;
                        }
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
    }

    // Tangency: local minima of |r2| that touch zero without crossing.
    for w in 1..n {
        if let (Some(vm), Some(v0), Some(vp)) = (vals[w - 1], vals[w], vals[w + 1]) {
            if v0.abs() <= vm.abs()
                && v0.abs() <= vp.abs()
                && v0.abs() < 1e-3 * scale
                && (v0 > 0.0) == (vm > 0.0)
                && (v0 > 0.0) == (vp > 0.0)
            {
                // Ternary search on |r2|.
                let (mut lo, mut hi) = (grid[w - 1], grid[w + 1]);
                while hi - lo > cfg.alpha_root_tol {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    let f1 = r2_at(m1).map_or(f64::INFINITY, f64::abs);
                    let f2 = r2_at(m2).map_or(f64::INFINITY, f64::abs);
                    if f1 < f2 {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let x = 0.5 * (lo + hi);
                if let Some(v) = r2_at(x) {
                    if v.abs() < 1e-7 * scale {
                        roots.push(x);
                    }
                }
            }
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // A double root at the permutation fixed point surfaces as two crossings
    // separated by the numerical noise floor; merge within 1e-5 and snap
    // near-diagonal pairs onto the diagonal.
    let merge_tol = (10.0 * cfg.alpha_match_tol).max(1e-5);
    roots.dedup_by(|a, b| (*a - *b).abs() < merge_tol);

    let pairs: Vec<(f64, f64)> = roots
        .into_iter()
        .filter_map(|a1| alpha2_from_first_relation(a1, sys).map(|a2| (a1, a2)))
        .map(|(a1, a2)| {
            if (a1 - a2).abs() < merge_tol {
                let m = 0.5 * (a1 + a2);
                (m, m)
            } else {
                (a1, a2)
            }
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::InconsistentCoefficients(
            "no (alpha1, alpha2) pair satisfies the order relations".into(),
        ));
    }
    Ok(pairs)
}

// Stable roots of t^2 - s t + p = 0; None when the discriminant is
// meaningfully negative.
fn monic_quadratic_roots(s: f64, p: f64) -> Option<(f64, f64)> {
    let disc = s * s - 4.0 * p;
    let scale = s * s + 4.0 * p.abs();
    if disc < 0.0 {
        if disc > -1e-12 * scale.max(1e-300) {
            let r = 0.5 * s;
            return Some((r, r));
        }
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (s + s.signum() * sq);
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    Some((-q, p / -q))
}

/// Invert a two-CPE coefficient vector: R∞ = f_{2T+2}; the order pair from
/// the trailing (g₀, g₁, g₂); then for each order candidate, (a_{1,0},
/// a_{2,0}) from (g_{2T+1}, g_{2T}) and (b₁, b₂) from (f_{2T+1}, f_{2T}),
/// with the forward map as the arbiter between the two quadratic-root
/// assignments. Generically the result is two solutions, permuted copies of
/// each other; the symmetric α₁ = α₂ case collapses to one.
pub fn invert_two_cpe(
    c: &CoefficientVector,
    cfg: &InversionConfig,
) -> Result<IdentifiabilityResult> {
    if c.structure() != StructureTag::TwoCpe {
        return Err(Error::UnsupportedStructure(format!(
            "expected two_cpe, got {}",
            c.structure().as_str()
        )));
    }
    let t = c.horizon();
    if t < 3 {
        return Err(Error::Domain("two-CPE inversion needs T >= 3".into()));
    }
    let (f, g) = c.blocks();
    if f.len() != 2 * t + 3 || g.len() != 2 * t + 2 {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has blocks ({}, {}), expected ({}, {})",
            f.len(),
            g.len(),
            2 * t + 3,
            2 * t + 2
        )));
    }

    let d = f[0];
    let f_2t1 = f[1];
    let f_2t = f[2];
    let g_2t1 = g[0];
    let g_2t = g[1];
    let (g2, g1, g0) = (g[2 * t - 1], g[2 * t], g[2 * t + 1]);

    let sys = LemmaSystem::new(g0, g1, g2, t)?;
    let order_pairs = solve_two_cpe_alphas(&sys, cfg)?;

    let ts = c.ts();
    let mut solutions: Vec<FoEcmParams> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();

    for (alpha1, alpha2) in order_pairs {
        let a11 = a_value(alpha1, 1);
        let a21 = a_value(alpha2, 1);
        let sum_a0 = -g_2t1;
        let prod_a0 = g_2t + a11 + a21;
        let Some((x, y)) = monic_quadratic_roots(sum_a0, prod_a0) else {
            continue;
        };
        let symmetric = (alpha1 - alpha2).abs() < 10.0 * cfg.alpha_match_tol;
        let assignments: Vec<(f64, f64)> = if (x - y).abs() < 1e-12 * (x.abs() + y.abs() + 1.0) {
            vec![(x, y)]
        } else {
            vec![(x, y), (y, x)]
        };

        for (a10, a20) in assignments {
            // b1 + b2 and b1 a20 + b2 a10 from the leading f coefficients.
            let v1 = f_2t1 + d * sum_a0;
            let v2 = d * (prod_a0 - a11 - a21) - f_2t;
            let den = a20 - a10;
            let (b1, b2) = if den.abs() < 1e-10 * (a10.abs() + a20.abs() + 1.0) {
                if !symmetric {
                    // Exchange symmetry broken only by deeper coefficients;
                    // the forward-residual filter below rejects wrong splits.
                    continue;
                }
                (0.5 * v1, 0.5 * v1)
            } else {
                let b1 = (v2 - a10 * v1) / den;
                (b1, v1 - b1)
            };
            if b1 <= 0.0 || b2 <= 0.0 {
                continue;
            }
            let gap1 = alpha1 - a10;
            let gap2 = alpha2 - a20;
            if gap1 <= 0.0 || gap2 <= 0.0 {
                continue;
            }
            let (Ok(o1), Ok(o2)) = (FractionalOrder::new(alpha1), FractionalOrder::new(alpha2))
            else {
                continue;
            };
            let branch = |b: f64, gap: f64, o: FractionalOrder| -> Result<BranchParams> {
                let ts_pow = ts.powf(o.value());
                let cap = ts_pow / b;
                BranchParams::new(Resistance::Finite(b / gap), cap, o)
            };
            let (Ok(b_1), Ok(b_2)) = (branch(b1, gap1, o1), branch(b2, gap2, o2)) else {
                continue;
            };
            let Ok(params) = FoEcmParams::new(d, vec![b_1, b_2], ts) else {
                continue;
            };
            let rebuilt = coefficient_map(&params, t)?;
            let residual = max_rel_diff(c.values(), rebuilt.values());
            if residual < cfg.residual_accept {
                let duplicate = solutions.iter().any(|s| {
                    max_rel_diff(&s.theta(), &params.theta()) < 10.0 * cfg.alpha_match_tol
                });
                if !duplicate {
                    solutions.push(params);
                    residuals.push(residual);
                }
            }
        }
    }

    if solutions.is_empty() {
        return Err(Error::InconsistentCoefficients(
            "no parameter set reproduces the coefficient vector".into(),
        ));
    }

    // Deterministic order: ascending alpha1.
    let mut order: Vec<usize> = (0..solutions.len()).collect();
    order.sort_by(|&i, &j| {
        let ai = solutions[i].branches()[0].alpha().value();
        let aj = solutions[j].branches()[0].alpha().value();
        ai.partial_cmp(&aj).unwrap()
    });
    let solutions: Vec<FoEcmParams> = order.iter().map(|&i| solutions[i].clone()).collect();
    let residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();

    let classification = Classification::Identifiable(solutions.len());
    Ok(IdentifiabilityResult {
        solutions,
        classification,
        residuals,
    })
}

/// Classification from a completed solve: a rank-deficient forward Jacobian
/// signals a continuum of solutions; otherwise the solution count decides.
pub fn classify(solution_count: usize, jacobian_full_rank: bool) -> Classification {
    if !jacobian_full_rank {
        Classification::Unidentifiable
    } else if solution_count == 1 {
        Classification::GloballyIdentifiable
    } else {
        Classification::Identifiable(solution_count)
    }
}

/// Numerical rank of the map x -> f(x) at x0 via central differences.
///
/// Columns are taken with respect to relative parameter perturbations, so
/// parameters of very different magnitudes weigh equally; for nonzero x0
/// this has the same rank as the ordinary Jacobian.
pub fn jacobian_rank(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: &[f64], rel_tol: f64) -> usize {
    let q = x0.len();
    let m = f(x0).len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(q);
    for i in 0..q {
        let h = 1e-6 * x0[i].abs().max(1e-6);
        let scale = x0[i].abs().max(1e-6);
        let mut xp = x0.to_vec();
        let mut xm = x0.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        cols.push(
            (0..m)
                .map(|r| scale * (fp[r] - fm[r]) / (2.0 * h))
                .collect(),
        );
    }
    // Rank by modified Gram-Schmidt with a relative drop tolerance.
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_norm = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in cols {
        let mut v = col;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let n = norm(&v);
        if n > rel_tol * max_norm {
            for vi in v.iter_mut() {
                *vi /= n;
            }
            basis.push(v);
        }
    }
    basis.len()
}

/// True iff the coefficient map has full-rank Jacobian with respect to the
/// circuit parameters at `params`.
pub fn coefficient_map_full_rank(params: &FoEcmParams, t: usize) -> Result<bool> {
    let n = params.branches().len();
    let ts = params.ts();
    let theta = params.theta();
    let forward = move |x: &[f64]| -> Vec<f64> {
        let branches: Vec<BranchParams> = (0..n)
            .map(|i| {
                BranchParams::new(
                    Resistance::Finite(x[1 + i]),
                    x[1 + n + i],
                    FractionalOrder::new(x[1 + 2 * n + i]).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let p = FoEcmParams::new(x[0], branches, ts).unwrap();
        coefficient_map(&p, t).unwrap().values().to_vec()
    };
    Ok(jacobian_rank(&forward, &theta, 1e-7) == theta.len())
}
