//! Norms, duality mappings, Bregman distances and smoothness-of-power-type
//! constants for discretized Lebesgue and Lebesgue-Bochner spaces.
//!
//! A discrete function lives on a tensor grid `time × space` and carries a
//! [`Quadrature`]: one positive weight per time sample and one per spatial
//! (or angle × offset) sample. The weight of sample `(t, i)` is the product
//! `w_t · w_i`, so inner norms only see the spatial weights and the outer
//! norm only sees the time weights.
//!
//! # Dual-space representation
//!
//! Dual elements are stored as functions on the same grid with the same
//! weights, and the duality pairing is the quadrature
//! `<f, g> = Σ_t w_t Σ_i w_i f_{t,i} g_{t,i}`. Under this pairing the dual of
//! the discrete `L^p(0,T; L^r)` is the discrete `L^{p*}(0,T; L^{r*})` with
//! *unchanged* weights, and the duality identities
//! `<f, j(f)> = ‖f‖‖j(f)‖_*`, `‖j(f)‖_* = ‖f‖^{power-1}` hold exactly.
//!
//! If one instead stores a dual element as the covector `c_i = w_i g_i`
//! paired with the plain Euclidean sum, the same dual norm reads
//! `(Σ w_i^{1-r*} |c_i|^{r*})^{1/r*}`; both forms are the same number.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conjugate exponent `e / (e - 1)`.
pub fn conjugate(e: f64) -> f64 {
    e / (e - 1.0)
}

fn check_exponent(name: &str, e: f64) -> Result<()> {
    if e.is_finite() && e > 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {e} must lie in (1, inf)")))
    }
}

/// Outer (time) and inner (space) exponent of a Bochner space `L^outer(0,T; L^inner)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub outer: f64,
    pub inner: f64,
}

impl Exponents {
    pub fn new(outer: f64, inner: f64) -> Self {
        Self { outer, inner }
    }

    pub fn uniform(e: f64) -> Self {
        Self { outer: e, inner: e }
    }

    /// Exponents of the dual space.
    pub fn conjugate(self) -> Self {
        Self {
            outer: conjugate(self.outer),
            inner: conjugate(self.inner),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent("outer exponent", self.outer)?;
        check_exponent("inner exponent", self.inner)
    }
}

/// Exponents and domain of the Lebesgue-Bochner setting
/// `X = L^p(0,T; L^r)`, `Y = L^q(0,T; L^s)` with Tikhonov powers `v` (penalty)
/// and `u` (data fidelity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub p: f64,
    pub r: f64,
    pub q: f64,
    pub s: f64,
    pub v: f64,
    pub u: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Half-widths `b_i` of the spatial box `[-b_1,b_1] × ... × [-b_n,b_n]`.
    pub extents: Vec<f64>,
}

impl SpaceSpec {
    /// Dynamic setting with `v = max(2,p,r)` and `u = max(2,q,s)`, unit
    /// horizon and the square `[-1,1]²`.
    pub fn new(p: f64, r: f64, q: f64, s: f64) -> Result<Self> {
        let spec = Self {
            p,
            r,
            q,
            s,
            v: 2f64.max(p).max(r),
            u: 2f64.max(q).max(s),
            horizon: 1.0,
            extents: vec![1.0, 1.0],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Static setting `X = L^r`, `Y = L^s` with `v = max(2,r)`, `u = max(2,s)`.
    pub fn static_setting(r: f64, s: f64) -> Result<Self> {
        Self::new(r, r, s, s)
    }

    pub fn hilbert() -> Self {
        Self::new(2.0, 2.0, 2.0, 2.0).expect("hilbert exponents are valid")
    }

    /// Overrides the automatically derived Tikhonov powers.
    pub fn with_powers(mut self, v: f64, u: f64) -> Result<Self> {
        self.v = v;
        self.u = u;
        self.validate()?;
        Ok(self)
    }

    pub fn with_domain(mut self, horizon: f64, extents: Vec<f64>) -> Result<Self> {
        self.horizon = horizon;
        self.extents = extents;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [
            ("p", self.p),
            ("r", self.r),
            ("q", self.q),
            ("s", self.s),
            ("v", self.v),
            ("u", self.u),
        ] {
            check_exponent(name, e)?;
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Parameter(format!("horizon {} must be positive", self.horizon)));
        }
        if self.extents.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::Parameter("spatial half-widths must be positive".into()));
        }
        Ok(())
    }

    pub fn primal(&self) -> Exponents {
        Exponents::new(self.p, self.r)
    }

    pub fn data(&self) -> Exponents {
        Exponents::new(self.q, self.s)
    }
}

/// Product quadrature weights over a `time × space` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    time: Vec<f64>,
    space: Vec<f64>,
}

impl Quadrature {
    pub fn new(time: Vec<f64>, space: Vec<f64>) -> Result<Self> {
        if time.is_empty() || space.is_empty() {
            return Err(Error::Layout("quadrature axes must be nonempty".into()));
        }
        if time.iter().chain(space.iter()).any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Layout("quadrature weights must be positive and finite".into()));
        }
        Ok(Self { time, space })
    }

    /// Constant weights `dt` per time sample and `dx` per spatial sample.
    pub fn uniform(n_time: usize, n_space: usize, dt: f64, dx: f64) -> Result<Self> {
        Self::new(vec![dt; n_time], vec![dx; n_space])
    }

    pub fn n_time(&self) -> usize {
        self.time.len()
    }

    pub fn n_space(&self) -> usize {
        self.space.len()
    }

    pub fn len(&self) -> usize {
        self.time.len() * self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_weights(&self) -> &[f64] {
        &self.time
    }

    pub fn space_weights(&self) -> &[f64] {
        &self.space
    }

    /// Multiplies every spatial weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.time.clone(), self.space.iter().map(|w| w * factor).collect())
    }

    /// Weight of the single time slice `t`, with unit time weight.
    pub fn slice(&self, _t: usize) -> Self {
        Self {
            time: vec![1.0],
            space: self.space.clone(),
        }
    }

    /// Total measure of the time axis and of the spatial axis.
    pub fn measure(&self) -> (f64, f64) {
        (self.time.iter().sum(), self.space.iter().sum())
    }
}

/// Real samples on a weighted `time × space` grid, stored time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    quad: Arc<Quadrature>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, quad: Arc<Quadrature>) -> Result<Self> {
        if values.len() != quad.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} samples",
                values.len(),
                quad.len()
            )));
        }
        Ok(Self { values, quad })
    }

    pub fn zeros(quad: Arc<Quadrature>) -> Self {
        Self {
            values: vec![0.0; quad.len()],
            quad,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn quadrature(&self) -> &Arc<Quadrature> {
        &self.quad
    }

    pub fn n_time(&self) -> usize {
        self.quad.n_time()
    }

    pub fn slice(&self, t: usize) -> &[f64] {
        let n = self.quad.n_space();
        &self.values[t * n..(t + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `self - other` on a shared grid.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        check_compatible(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { values, quad: self.quad.clone() })
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &GridFunction) -> Result<()> {
        check_compatible(self, other)?;
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
        Ok(())
    }
}

fn check_compatible(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if a.values.len() != b.values.len() || a.quad.n_time() != b.quad.n_time() {
        return Err(Error::Shape(format!(
            "grid functions of {} and {} samples",
            a.values.len(),
            b.values.len()
        )));
    }
    Ok(())
}

fn weighted_power_sum(values: &[f64], weights: &[f64], e: f64) -> f64 {
    if e == 2.0 {
        values.iter().zip(weights).map(|(v, w)| w * v * v).sum()
    } else {
        values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(e)).sum()
    }
}

/// `(Σ w |f|^e)^{1/e}` over the full grid with product weights.
pub fn lebesgue_norm(f: &GridFunction, exponent: f64) -> f64 {
    let n = f.quad.n_space();
    let total: f64 = f
        .quad
        .time_weights()
        .iter()
        .enumerate()
        .map(|(t, wt)| wt * weighted_power_sum(&f.values[t * n..(t + 1) * n], f.quad.space_weights(), exponent))
        .sum();
    total.powf(1.0 / exponent)
}

/// Inner `L^inner` norm of every time slice.
pub fn slice_norms(f: &GridFunction, inner: f64) -> Vec<f64> {
    let w = f.quad.space_weights();
    (0..f.n_time())
        .map(|t| weighted_power_sum(f.slice(t), w, inner).powf(1.0 / inner))
        .collect()
}

/// Norm of `L^outer(0,T; L^inner)`.
pub fn bochner_norm(f: &GridFunction, outer: f64, inner: f64) -> f64 {
    if outer == inner {
        return lebesgue_norm(f, inner);
    }
    let total: f64 = slice_norms(f, inner)
        .iter()
        .zip(f.quad.time_weights())
        .map(|(n, wt)| wt * n.powf(outer))
        .sum();
    total.powf(1.0 / outer)
}

/// Norm of a dual element under the quadrature pairing.
pub fn dual_norm(g: &GridFunction, primal: Exponents) -> f64 {
    let dual = primal.conjugate();
    bochner_norm(g, dual.outer, dual.inner)
}

/// Quadrature pairing `Σ w f g`.
pub fn pairing(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    check_compatible(f, g)?;
    let n = f.quad.n_space();
    let ws = f.quad.space_weights();
    Ok(f.quad
        .time_weights()
        .iter()
        .enumerate()
        .map(|(t, wt)| {
            let range = t * n..(t + 1) * n;
            wt * f.values[range.clone()]
                .iter()
                .zip(&g.values[range])
                .zip(ws)
                .map(|((a, b), w)| w * a * b)
                .sum::<f64>()
        })
        .sum())
}

/// `a^e` with `0^e := 0`, the zero-function convention for the scalar prefactors.
fn prefactor(norm: f64, e: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else if e == 0.0 {
        1.0
    } else {
        norm.powf(e)
    }
}

#[inline]
fn signed_power(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else {
        x.abs().powf(e).copysign(x)
    }
}

/// Duality mapping `j_power` of the space `L^inner` over the full grid:
/// `g = ‖f‖^{power-inner} |f|^{inner-1} sign(f)`.
pub fn duality_map_lebesgue(f: &GridFunction, power: f64, inner_exponent: f64) -> GridFunction {
    let scale = prefactor(lebesgue_norm(f, inner_exponent), power - inner_exponent);
    let values = f
        .values
        .iter()
        .map(|x| scale * signed_power(*x, inner_exponent - 1.0))
        .collect();
    GridFunction { values, quad: f.quad.clone() }
}

/// Duality mapping `j_power` of `L^outer(0,T; L^inner)`: the slice-wise
/// `L^inner` mapping with power `outer`, rescaled by `‖f‖^{power-outer}`.
pub fn duality_map_bochner(f: &GridFunction, power: f64, exps: Exponents) -> GridFunction {
    let Exponents { outer, inner } = exps;
    let slice = slice_norms(f, inner);
    let global = {
        let total: f64 = slice
            .iter()
            .zip(f.quad.time_weights())
            .map(|(n, wt)| wt * n.powf(outer))
            .sum();
        prefactor(total.powf(1.0 / outer), power - outer)
    };
    let n = f.quad.n_space();
    let mut values = Vec::with_capacity(f.values.len());
    for (t, sn) in slice.iter().enumerate() {
        let scale = global * prefactor(*sn, outer - inner);
        values.extend(
            f.values[t * n..(t + 1) * n]
                .iter()
                .map(|x| scale * signed_power(*x, inner - 1.0)),
        );
    }
    GridFunction { values, quad: f.quad.clone() }
}

/// Bregman distance of `‖·‖^power / power` in `L^outer(0,T; L^inner)`.
pub fn bregman_distance(x: &GridFunction, y: &GridFunction, power: f64, exps: Exponents) -> Result<f64> {
    check_compatible(x, y)?;
    let nx = bochner_norm(x, exps.outer, exps.inner);
    let ny = bochner_norm(y, exps.outer, exps.inner);
    let jy = duality_map_bochner(y, power, exps);
    let diff = x.sub(y)?;
    Ok((nx.powf(power) - ny.powf(power)) / power - pairing(&jy, &diff)?)
}

/// Constant `C` of the embedding `‖f‖_{small} ≤ C ‖f‖_{large}` on a finite
/// measure grid, for componentwise `small ≤ large`.
pub fn embedding_constant(quad: &Quadrature, small: Exponents, large: Exponents) -> Result<f64> {
    if small.outer > large.outer || small.inner > large.inner {
        return Err(Error::Parameter("embedding needs smaller exponents on the left".into()));
    }
    let (mt, mx) = quad.measure();
    Ok(mt.powf(1.0 / small.outer - 1.0 / large.outer) * mx.powf(1.0 / small.inner - 1.0 / large.inner))
}

/// Lipschitz constant of `h ↦ h^a` on `[1/2, 1]`.
pub fn lipschitz_power_constant(a: f64) -> f64 {
    if a < 1.0 {
        (a * 2f64.powf(1.0 - a)).abs()
    } else {
        a
    }
}

/// A space is `order`-smooth with constant `constant`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessConstant {
    pub order: f64,
    pub constant: f64,
}

/// Power type and constant of `L^p` on a bounded domain.
pub fn smoothness_constant_lebesgue(p: f64) -> SmoothnessConstant {
    if p <= 2.0 {
        SmoothnessConstant { order: p, constant: 2f64.powf(2.0 - p) }
    } else {
        SmoothnessConstant { order: 2.0, constant: p - 1.0 }
    }
}

/// Constant for `q`-smoothness of an `s`-smooth space, `1 < q < s`.
pub fn smoothness_constant_downgrade(s: f64, g_s: f64, q: f64) -> Result<f64> {
    if !(q > 1.0 && q < s) {
        return Err(Error::Domain(format!("downgrade needs 1 < q < s, got q = {q}, s = {s}")));
    }
    if !(g_s > 0.0) {
        return Err(Error::Parameter(format!("smoothness constant {g_s} must be positive")));
    }
    let k = lipschitz_power_constant(q - s);
    Ok(2f64.powf(s - q) * 2f64.powf(s).max(g_s + k * 2f64.powf(s - 2.0)))
}

/// Power type and constant of `L^q(0,T; X)` when `X` is `p`-smooth with constant `g_inner`.
pub fn smoothness_constant_bochner(p_inner_order: f64, g_inner: f64, q_outer: f64) -> Result<SmoothnessConstant> {
    let p = p_inner_order;
    let q = q_outer;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("inner power type {p} must lie in (1, 2]")));
    }
    if !(g_inner > 0.0) || !(q > 1.0) {
        return Err(Error::Parameter(format!("need G > 0 and q > 1, got G = {g_inner}, q = {q}")));
    }
    let k = lipschitz_power_constant(q - p);
    if q <= p {
        Ok(SmoothnessConstant {
            order: q,
            constant: 2f64.powf(p - q) * 2f64.powf(p).max(g_inner + k * 2f64.powf(p - 2.0)),
        })
    } else {
        let k_prime = lipschitz_power_constant(p - q);
        Ok(SmoothnessConstant {
            order: p,
            constant: 2f64.powf(q).max(2f64.powf(q - p) * g_inner + k * 2f64.powf(q - 2.0))
                + k_prime * 2f64.powf(p - 2.0),
        })
    }
}

/// Smoothness of `L^outer(0,T; L^inner)` from the Lebesgue constant of the
/// inner space lifted to the Bochner space.
pub fn bochner_smoothness(exps: Exponents) -> Result<SmoothnessConstant> {
    let inner = smoothness_constant_lebesgue(exps.inner);
    smoothness_constant_bochner(inner.order, inner.constant, exps.outer)
}

/// Constant for `power`-smoothness given a known smoothness of higher or equal order.
pub fn constant_for_power(known: SmoothnessConstant, power: f64) -> Result<f64> {
    if (power - known.order).abs() <= 1e-12 * known.order {
        Ok(known.constant)
    } else if power < known.order {
        smoothness_constant_downgrade(known.order, known.constant, power)
    } else {
        Err(Error::Domain(format!(
            "space is only {}-smooth, cannot use power {power}",
            known.order
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n_time: usize, n_space: usize) -> Arc<Quadrature> {
        Arc::new(Quadrature::uniform(n_time, n_space, 1.0, 1.0).unwrap())
    }

    #[test]
    fn conjugates_are_reciprocal() {
        for e in [1.1, 1.5, 2.0, 3.5, 10.0] {
            let c = conjugate(e);
            assert!((1.0 / e + 1.0 / c - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn space_spec_derives_powers() {
        let spec = SpaceSpec::new(1.5, 3.5, 3.0, 1.2).unwrap();
        assert_eq!(spec.v, 3.5);
        assert_eq!(spec.u, 3.0);
        let spec = SpaceSpec::new(1.5, 1.5, 1.5, 1.5).unwrap();
        assert_eq!((spec.v, spec.u), (2.0, 2.0));
        assert!(SpaceSpec::new(1.0, 2.0, 2.0, 2.0).is_err());
        assert!(SpaceSpec::new(2.0, f64::INFINITY, 2.0, 2.0).is_err());
    }

    #[test]
    fn lebesgue_norm_examples() {
        let zero = GridFunction::zeros(unit_grid(2, 3));
        assert_eq!(lebesgue_norm(&zero, 1.7), 0.0);

        let quad = Arc::new(Quadrature::uniform(2, 2, 1.0, 1.0).unwrap());
        let ones = GridFunction::new(vec![1.0; 4], quad).unwrap();
        assert!((lebesgue_norm(&ones, 2.0) - 2.0).abs() < 1e-15);

        let f = GridFunction::new(vec![3.0, -4.0], unit_grid(1, 2)).unwrap();
        assert!((lebesgue_norm(&f, 2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let err = GridFunction::new(vec![1.0; 5], unit_grid(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
        assert!(Quadrature::new(vec![1.0], vec![1.0, 0.0]).is_err());
        assert!(Quadrature::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn bochner_norm_examples() {
        let f = GridFunction::new(vec![3.0, 0.0, 0.0, 4.0], unit_grid(2, 2)).unwrap();
        assert!((bochner_norm(&f, 2.0, 1.5) - 5.0).abs() < 1e-14);

        let quad = Arc::new(Quadrature::new(vec![0.5, 0.25, 0.25], vec![0.1, 0.2, 0.3, 0.4]).unwrap());
        let values: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let f = GridFunction::new(values, quad).unwrap();
        let a = bochner_norm(&f, 2.0, 2.0);
        let b = lebesgue_norm(&f, 2.0);
        assert!((a - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn hilbert_duality_map_is_identity() {
        let quad = Arc::new(Quadrature::new(vec![0.3, 0.7], vec![0.5, 1.5, 2.0]).unwrap());
        let f = GridFunction::new(vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0], quad).unwrap();
        let g = duality_map_lebesgue(&f, 2.0, 2.0);
        assert_eq!(g.values(), f.values());
        let h = duality_map_bochner(&f, 2.0, Exponents::uniform(2.0));
        for (a, b) in h.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn duality_map_scaling() {
        let f = GridFunction::new(vec![1.0, -0.5, 2.0, 0.25], unit_grid(2, 2)).unwrap();
        let mut af = f.clone();
        af.scale(3.0);
        for power in [1.5, 2.0, 3.5] {
            let exps = Exponents::new(1.5, 3.0);
            let g = duality_map_bochner(&f, power, exps);
            let ag = duality_map_bochner(&af, power, exps);
            let factor = 3f64.powf(power - 1.0);
            for (a, b) in ag.values().iter().zip(g.values()) {
                assert!((a - factor * b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn lebesgue_duality_identity_for_small_exponent() {
        let f = GridFunction::new(vec![1.0, -1.0], unit_grid(1, 2)).unwrap();
        let g = duality_map_lebesgue(&f, 1.5, 1.5);
        let nf = lebesgue_norm(&f, 1.5);
        let ng = lebesgue_norm(&g, conjugate(1.5));
        let pair = pairing(&f, &g).unwrap();
        assert!((pair - nf * ng).abs() < 1e-12);
        assert!((ng - nf.powf(0.5)).abs() < 1e-12);
    }

    #[test]
    fn zero_function_maps_to_zero() {
        let zero = GridFunction::zeros(unit_grid(3, 4));
        for (power, exps) in [(1.5, Exponents::new(3.0, 1.5)), (3.5, Exponents::new(1.5, 2.0))] {
            assert!(duality_map_bochner(&zero, power, exps).is_zero());
            assert!(duality_map_lebesgue(&zero, power, exps.inner).is_zero());
        }
    }

    #[test]
    fn single_time_step_matches_lebesgue_map() {
        let quad = Arc::new(Quadrature::new(vec![1.0], vec![0.2, 0.3, 0.5]).unwrap());
        let f = GridFunction::new(vec![0.4, -1.2, 2.0], quad).unwrap();
        let a = duality_map_bochner(&f, 2.5, Exponents::new(1.7, 3.0));
        let b = duality_map_lebesgue(&f, 2.5, 3.0);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-14 * y.abs());
        }
    }

    #[test]
    fn lipschitz_constants() {
        assert_eq!(lipschitz_power_constant(0.0), 0.0);
        assert_eq!(lipschitz_power_constant(2.0), 2.0);
        assert!((lipschitz_power_constant(0.5) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((lipschitz_power_constant(0.5) - 0.70711).abs() < 1e-5);
        assert!((lipschitz_power_constant(-0.5) - 0.5 * 2f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_constants() {
        assert_eq!(smoothness_constant_lebesgue(2.0), SmoothnessConstant { order: 2.0, constant: 1.0 });
        let c = smoothness_constant_lebesgue(1.5);
        assert_eq!(c.order, 1.5);
        assert!((c.constant - 1.41421).abs() < 1e-5);
        assert_eq!(smoothness_constant_lebesgue(4.0), SmoothnessConstant { order: 2.0, constant: 3.0 });
    }

    #[test]
    fn downgrade_constants() {
        let g = smoothness_constant_downgrade(2.0, 1.0, 1.5).unwrap();
        assert!((g - 2f64.sqrt() * 4.0).abs() < 1e-12);
        assert!((g - 5.65685).abs() < 1e-5);

        let k = 0.1 * 2f64.powf(1.1);
        let g = smoothness_constant_downgrade(2.0, 100.0, 1.9).unwrap();
        assert!((g - 2f64.powf(0.1) * (100.0 + k)).abs() < 1e-10);

        let near = smoothness_constant_downgrade(2.5, 3.0, 2.5 - 1e-9).unwrap();
        assert!((near - 2f64.powf(2.5).max(3.0)).abs() < 1e-6);

        assert!(matches!(smoothness_constant_downgrade(2.0, 1.0, 2.0), Err(Error::Domain(_))));
        assert!(smoothness_constant_downgrade(2.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn bochner_constants() {
        let c = smoothness_constant_bochner(1.5, 2f64.sqrt(), 1.5).unwrap();
        assert_eq!(c.order, 1.5);
        assert!((c.constant - 2f64.powf(1.5)).abs() < 1e-12);

        let c = smoothness_constant_bochner(2.0, 1.0, 2.0).unwrap();
        assert_eq!(c, SmoothnessConstant { order: 2.0, constant: 4.0 });

        let c = smoothness_constant_bochner(2.0, 1.0, 1.5).unwrap();
        assert_eq!(c.order, 1.5);
        assert!((c.constant - 5.65685).abs() < 1e-5);

        // inner order below the outer exponent: second branch
        let c = smoothness_constant_bochner(1.5, 2f64.sqrt(), 3.5).unwrap();
        let k = lipschitz_power_constant(2.0);
        let kp = lipschitz_power_constant(-2.0);
        let expected = 2f64.powf(3.5).max(4.0 * 2f64.sqrt() + k * 2f64.powf(1.5)) + kp * 2f64.powf(-0.5);
        assert_eq!(c.order, 1.5);
        assert!((c.constant - expected).abs() < 1e-12);

        assert!(smoothness_constant_bochner(2.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn constant_for_power_downgrades_or_rejects() {
        let known = SmoothnessConstant { order: 2.0, constant: 1.0 };
        assert_eq!(constant_for_power(known, 2.0).unwrap(), 1.0);
        assert!((constant_for_power(known, 1.5).unwrap() - 5.65685).abs() < 1e-5);
        assert!(constant_for_power(known, 2.5).is_err());
    }

    #[test]
    fn bregman_examples() {
        let quad = Arc::new(Quadrature::new(vec![0.5, 0.5], vec![1.0, 2.0]).unwrap());
        let x = GridFunction::new(vec![1.0, -2.0, 0.5, 0.3], quad.clone()).unwrap();
        let y = GridFunction::new(vec![0.2, 1.0, -0.5, 0.0], quad).unwrap();
        let exps = Exponents::new(1.5, 3.0);
        assert!(bregman_distance(&x, &x, 3.0, exps).unwrap().abs() < 1e-14);

        let hilbert = Exponents::uniform(2.0);
        let d = bregman_distance(&x, &y, 2.0, hilbert).unwrap();
        let diff = x.sub(&y).unwrap();
        let expected = 0.5 * lebesgue_norm(&diff, 2.0).powi(2);
        assert!((d - expected).abs() < 1e-12);

        let other = GridFunction::zeros(unit_grid(1, 4));
        assert!(bregman_distance(&x, &other, 2.0, hilbert).is_err());
    }

    #[test]
    fn embedding_constant_bounds_smaller_norms() {
        let quad = Arc::new(Quadrature::uniform(4, 9, 0.25, 1.0 / 9.0).unwrap());
        let values: Vec<f64> = (0..36).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.3).collect();
        let f = GridFunction::new(values, quad.clone()).unwrap();
        let small = Exponents::new(1.5, 2.0);
        let large = Exponents::new(3.5, 3.5);
        let c = embedding_constant(&quad, small, large).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!(bochner_norm(&f, 1.5, 2.0) <= c * bochner_norm(&f, 3.5, 3.5) + 1e-12);
        assert!(embedding_constant(&quad, large, small).is_err());
    }
}
