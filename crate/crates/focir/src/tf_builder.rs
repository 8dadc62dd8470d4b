//! Dense polynomial arithmetic and assembly of the monic rational transfer
//! function and its coefficient vector for one- and two-branch FO-ECMs.

use num_complex::Complex64;

use crate::ecm_models::{self, FoEcmParams, RandlesParams};
use crate::error::{Error, Result};
use crate::frac_core::ASequence;

/// Dense real polynomial; `coeffs[i]` multiplies z^i.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from coefficients in ascending-power order, trimming trailing
    /// zeros so the leading coefficient is nonzero (the zero polynomial is
    /// the empty-ish constant 0).
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    /// b·z^k monomial.
    pub fn monomial(b: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = b;
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of z^k (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

/// Coefficient convolution.
pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    if p.is_zero() || q.is_zero() {
        return Polynomial::zero();
    }
    let mut out = vec![0.0; p.degree() + q.degree() + 1];
    for (i, &a) in p.coeffs().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in q.coeffs().iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Polynomial::new(out)
}

/// One R‖CPE branch as a rational function of z at horizon T:
/// numerator b·z^T over the monic denominator
/// z^{T+1} - a_0 z^T - a_1 z^{T-1} - … - a_T.
#[derive(Debug, Clone)]
pub struct BranchTF {
    b: f64,
    a0: f64,
    a_tail: ASequence,
    horizon: usize,
}

impl BranchTF {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn numerator(&self) -> Polynomial {
        Polynomial::monomial(self.b, self.horizon)
    }

    pub fn denominator(&self) -> Polynomial {
        let t = self.horizon;
        let mut coeffs = vec![0.0; t + 2];
        coeffs[t + 1] = 1.0;
        coeffs[t] = -self.a0;
        for j in 1..=t {
            coeffs[t - j] = -self.a_tail.value(j);
        }
        Polynomial { coeffs }
    }
}

/// Build one branch transfer function; `a_tail` must cover j = 1..T.
pub fn branch_tf(b: f64, a0: f64, a_tail: ASequence, horizon: usize) -> Result<BranchTF> {
    if horizon < 1 {
        return Err(Error::Domain("branch horizon must be at least 1".into()));
    }
    if a_tail.j_max() < horizon {
        return Err(Error::DimensionMismatch(format!(
            "a-sequence covers j <= {}, horizon needs {horizon}",
            a_tail.j_max()
        )));
    }
    Ok(BranchTF {
        b,
        a0,
        a_tail,
        horizon,
    })
}

/// Monic rational transfer function
/// H(z) = (f_deg z^deg + … + f_0) / (z^deg + g_{deg-1} z^{deg-1} + … + g_0).
#[derive(Debug, Clone)]
pub struct MonicRationalTF {
    /// f_0..f_deg in ascending-power order, length deg + 1.
    f: Vec<f64>,
    /// g_0..g_{deg-1} in ascending-power order; the leading 1 is implicit.
    g: Vec<f64>,
}

impl MonicRationalTF {
    pub fn degree(&self) -> usize {
        self.g.len()
    }

    /// f_k, the numerator coefficient of z^k.
    pub fn f(&self, k: usize) -> f64 {
        self.f[k]
    }

    /// g_k for k < deg; the z^deg coefficient is 1.
    pub fn g(&self, k: usize) -> f64 {
        self.g[k]
    }

    pub fn numerator(&self) -> Polynomial {
        Polynomial::new(self.f.clone())
    }

    pub fn denominator(&self) -> Polynomial {
        let mut coeffs = self.g.clone();
        coeffs.push(1.0);
        Polynomial { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.numerator().eval(z) / self.denominator().eval(z)
    }

    /// Leading terms of the impulse response h_0, h_1, … obtained by long
    /// division of the numerator by the monic denominator.
    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let deg = self.degree();
        let mut h = vec![0.0; len];
        for k in 0..len {
            let mut v = if k <= deg { self.f[deg - k] } else { 0.0 };
            for j in 1..=k.min(deg) {
                v -= self.g[deg - j] * h[k - j];
            }
            h[k] = v;
        }
        h
    }
}

/// Identified circuit structure carried by a coefficient vector; inversion
/// is only defined for the first three.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureTag {
    Randles,
    SingleCpe,
    TwoCpe,
    /// n > 2 branches: the transfer function exists but no inversion does.
    MultiCpe(usize),
}

impl StructureTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructureTag::Randles => "randles",
            StructureTag::SingleCpe => "single_cpe",
            StructureTag::TwoCpe => "two_cpe",
            StructureTag::MultiCpe(_) => "multi_cpe",
        }
    }
}

/// Flattened image of the coefficient map: the f block then the g block,
/// highest power first.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    values: Vec<f64>,
    structure: StructureTag,
    horizon: usize,
    ts: f64,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>, structure: StructureTag, horizon: usize, ts: f64) -> Self {
        Self {
            values,
            structure,
            horizon,
            ts,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn structure(&self) -> StructureTag {
        self.structure
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    /// Split back into (f highest-first, g highest-first) blocks.
    /// The f block has one more entry than the g block.
    pub fn blocks(&self) -> (&[f64], &[f64]) {
        let nf = self.values.len() / 2 + 1;
        self.values.split_at(nf)
    }

    pub fn from_tf(tf: &MonicRationalTF, structure: StructureTag, horizon: usize, ts: f64) -> Self {
        let deg = tf.degree();
        let mut values = Vec::with_capacity(2 * deg + 1);
        for k in (0..=deg).rev() {
            values.push(tf.f(k));
        }
        for k in (0..deg).rev() {
            values.push(tf.g(k));
        }
        Self {
            values,
            structure,
            horizon,
            ts,
        }
    }
}

/// Combine the feed-through `d` with the branch terms over their common
/// product denominator. All branches must share the same horizon; the
/// denominator stays exactly monic since every factor is monic.
pub fn assemble_tf(d: f64, branches: &[BranchTF]) -> Result<MonicRationalTF> {
    let Some(first) = branches.first() else {
        return Err(Error::Domain("at least one branch is required".into()));
    };
    let t = first.horizon();
    if branches.iter().any(|b| b.horizon() != t) {
        return Err(Error::DimensionMismatch(
            "branches have mixed horizons".into(),
        ));
    }

    let mut den = Polynomial::new(vec![1.0]);
    for b in branches {
        den = poly_mul(&den, &b.denominator());
    }

    let mut num = den.scale(d);
    for (i, b) in branches.iter().enumerate() {
        let mut cof = b.numerator();
        for (k, other) in branches.iter().enumerate() {
            if k != i {
                cof = poly_mul(&cof, &other.denominator());
            }
        }
        num = num.add(&cof);
    }

    let deg = den.degree();
    let f = (0..=deg).map(|k| num.coeff(k)).collect();
    let g = (0..deg).map(|k| den.coeff(k)).collect();
    Ok(MonicRationalTF { f, g })
}

/// The coefficient map for a fractional ECM: assemble the monic transfer
/// function at horizon `t` and flatten it, tagging the structure by branch
/// count. More than two branches is constructed but tagged as
/// non-invertible.
pub fn coefficient_map(params: &FoEcmParams, t: usize) -> Result<CoefficientVector> {
    let n = params.branches().len();
    let mut branches = Vec::with_capacity(n);
    for i in 0..n {
        let bc = ecm_models::branch_coefficients(params, i, t)?;
        branches.push(branch_tf(bc.b, bc.a0, bc.a_tail, t)?);
    }
    let tf = assemble_tf(params.r_inf(), &branches)?;
    let structure = match n {
        1 => StructureTag::SingleCpe,
        2 => StructureTag::TwoCpe,
        n => StructureTag::MultiCpe(n),
    };
    Ok(CoefficientVector::from_tf(&tf, structure, t, params.ts()))
}

/// The length-3 coefficient vector (f_1, f_0, g_0) of the integer-order
/// Randles circuit.
pub fn randles_coefficient_map(params: &RandlesParams, ts: f64) -> Result<CoefficientVector> {
    let (f1, f0, g0) = ecm_models::randles_tf_coeffs(params, ts)?;
    Ok(CoefficientVector::new(
        vec![f1, f0, g0],
        StructureTag::Randles,
        1,
        ts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_core::ASequence;

    #[test]
    fn poly_mul_small_cases() {
        let one = Polynomial::new(vec![1.0]);
        let zp1 = Polynomial::new(vec![1.0, 1.0]);
        assert_eq!(poly_mul(&one, &zp1), zp1);

        let zm1 = Polynomial::new(vec![-1.0, 1.0]);
        assert_eq!(poly_mul(&zm1, &zp1), Polynomial::new(vec![-1.0, 0.0, 1.0]));

        // (z+2)(z^2+3z) = z^3 + 5z^2 + 6z
        let p = Polynomial::new(vec![2.0, 1.0]);
        let q = Polynomial::new(vec![0.0, 3.0, 1.0]);
        assert_eq!(poly_mul(&p, &q), Polynomial::new(vec![0.0, 6.0, 5.0, 1.0]));

        assert!(poly_mul(&Polynomial::zero(), &zp1).is_zero());
    }

    #[test]
    fn polynomial_trims_leading_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        let z = Polynomial::new(vec![0.0, 0.0]);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
    }

    #[test]
    fn branch_tf_structure() {
        // All-zero tail: b z^2 / z^3.
        let tail = ASequence::from_raw(1.0, 4).unwrap();
        let b = branch_tf(1.0, 0.0, tail, 2).unwrap();
        assert_eq!(b.numerator(), Polynomial::monomial(1.0, 2));
        assert_eq!(b.denominator(), Polynomial::monomial(1.0, 3));

        // R1 = C1 = 1, alpha = 0.5, ts = 1: a0 = -0.5, a1 = 0.125, a2 = 0.0625.
        let tail = ASequence::from_raw(0.5, 2).unwrap();
        let den = branch_tf(1.0, -0.5, tail, 2).unwrap().denominator();
        let expect = [-0.0625, -0.125, 0.5, 1.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((den.coeff(k) - e).abs() < 1e-15, "z^{k}");
        }
    }

    #[test]
    fn branch_tf_rejects_short_tail() {
        let tail = ASequence::from_raw(0.5, 2).unwrap();
        assert!(branch_tf(1.0, 0.0, tail.clone(), 5).is_err());
        assert!(branch_tf(1.0, 0.0, tail, 0).is_err());
    }

    #[test]
    fn single_branch_assembly_matches_closed_forms() {
        // f_{T+1} = d, f_T = b - a_0 d, f_{T-j} = -a_j d, g_{T-j} = -a_j.
        let t = 6;
        let d = 0.05;
        let b1 = 0.7;
        let a0 = -0.3;
        let tail = ASequence::from_raw(0.45, t).unwrap();
        let branch = branch_tf(b1, a0, tail.clone(), t).unwrap();
        let tf = assemble_tf(d, &[branch]).unwrap();
        assert_eq!(tf.degree(), t + 1);
        assert!((tf.f(t + 1) - d).abs() < 1e-15);
        assert!((tf.f(t) - (b1 - a0 * d)).abs() < 1e-15);
        assert!((tf.g(t) - (-a0)).abs() < 1e-15);
        for j in 1..=t {
            assert!((tf.f(t - j) - (-tail.value(j) * d)).abs() < 1e-15);
            assert!((tf.g(t - j) - (-tail.value(j))).abs() < 1e-15);
        }
    }

    #[test]
    fn assemble_rejects_mixed_horizons() {
        let t1 = branch_tf(1.0, 0.0, ASequence::from_raw(0.5, 3).unwrap(), 3).unwrap();
        let t2 = branch_tf(1.0, 0.0, ASequence::from_raw(0.5, 4).unwrap(), 4).unwrap();
        assert!(assemble_tf(0.0, &[t1, t2]).is_err());
        assert!(assemble_tf(0.0, &[]).is_err());
    }

    #[test]
    fn impulse_response_first_terms() {
        // H = d + b z^T / (z^{T+1} - a0 z^T - ...): h0 = d, h1 = b, h2 = b a0.
        let t = 5;
        let d = 0.1;
        let b1 = 2.0;
        let a0 = 0.4;
        let tail = ASequence::from_raw(0.5, t).unwrap();
        let a1 = tail.value(1);
        let branch = branch_tf(b1, a0, tail, t).unwrap();
        let tf = assemble_tf(d, &[branch]).unwrap();
        let h = tf.impulse_response(4);
        assert!((h[0] - d).abs() < 1e-15);
        assert!((h[1] - b1).abs() < 1e-15);
        assert!((h[2] - b1 * a0).abs() < 1e-14);
        assert!((h[3] - b1 * (a0 * a0 + a1)).abs() < 1e-14);
    }

    #[test]
    fn coefficient_vector_layout() {
        let t = 4;
        let branch = branch_tf(1.0, -0.2, ASequence::from_raw(0.5, t).unwrap(), t).unwrap();
        let tf = assemble_tf(0.05, &[branch]).unwrap();
        let cv = CoefficientVector::from_tf(&tf, StructureTag::SingleCpe, t, 1.0);
        assert_eq!(cv.values().len(), 2 * (t + 1) + 1);
        // Highest power first: values[0] = f_{T+1} = d.
        assert!((cv.values()[0] - 0.05).abs() < 1e-15);
        let (f, g) = cv.blocks();
        assert_eq!(f.len(), t + 2);
        assert_eq!(g.len(), t + 1);
        assert!((g[0] - tf.g(t)).abs() < 1e-15);
        assert!((g[t] - tf.g(0)).abs() < 1e-15);
    }
}
