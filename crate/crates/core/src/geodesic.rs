//! Closed-form geodesics `γ(t) = exp(tX_1) ⋯ exp(tX_N) H` for chain metrics.
//!
//! Given the initial velocity `v ∈ m` with components `Y_i = π_i(v)` the
//! generators are
//!
//! ```text
//! X_1 = (1/λ_1) Σ_{k≥1} λ_k Y_k
//! X_i = (λ_{i−1} − λ_i)/(λ_{i−1} λ_i) Σ_{k≥i} λ_k Y_k     (i ≥ 2)
//! ```
//!
//! The transport maps `T_i^j(t) = Ad((exp(tX_{i+1}) ⋯ exp(tX_j))⁻¹)` give the
//! Maurer–Cartan lift of the product curve in closed form,
//! `ω = Σ_i T_i^N X_i` and `ω̇ = Σ_i [T_i^N X_i, Σ_{k≥i} T_k^N X_k]`, from
//! which the Lax residual `Ḟ − [F, ω]` with `F = A ω_m` is evaluated without
//! any numerical differentiation.
//!
//! Indices in this module are 0-based: generator `i` is `X_{i+1}`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::homogeneous::{ChainMetric, DOMAIN_TOL};
use crate::liealgebra::{AlgebraVector, GroupElement, LieAlgebraBasis};
use crate::numkernel::exp_dense;

/// Tolerance for `Σ X_i = v` and `X_i ∈ m_i ⊕ … ⊕ m_N`.
pub const GENERATOR_TOL: f64 = 1e-12;

/// Initial velocity, its eigenspace components and the geodesic generators.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    cm: Arc<ChainMetric>,
    velocity: DVector<f64>,
    components: Vec<DVector<f64>>,
    generators: Vec<DVector<f64>>,
}

/// Computes the generators of the geodesic with initial velocity `v`.
pub fn generators_from_velocity(cm: &Arc<ChainMetric>, v: &AlgebraVector) -> Result<GeneratorSet> {
    let split = cm.split();
    let coords = split.m_coords(v)?;
    let lambdas = cm.lambdas();
    if let Some(i) = lambdas.iter().position(|l| *l == 0.0) {
        return Err(Error::DegenerateMetric { index: i });
    }
    let n = cm.steps();
    let components: Vec<DVector<f64>> = (0..n).map(|i| split.from_m_coords(&cm.project_coords(i, &coords))).collect();
    // tails[i] = Σ_{k≥i} λ_k Y_k
    let d = cm.algebra().dim();
    let mut tails = vec![DVector::zeros(d); n + 1];
    for i in (0..n).rev() {
        tails[i] = &tails[i + 1] + &components[i] * lambdas[i];
    }
    let generators = (0..n)
        .map(|i| {
            if i == 0 {
                &tails[0] / lambdas[0]
            } else {
                let (a, b) = (lambdas[i - 1], lambdas[i]);
                if a == b {
                    DVector::zeros(d)
                } else {
                    &tails[i] * ((a - b) / (a * b))
                }
            }
        })
        .collect();
    Ok(GeneratorSet { cm: Arc::clone(cm), velocity: v.coeffs().clone(), components, generators })
}

impl GeneratorSet {
    pub fn metric(&self) -> &Arc<ChainMetric> {
        &self.cm
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        self.cm.algebra()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn velocity(&self) -> AlgebraVector {
        AlgebraVector::new(self.algebra(), self.velocity.clone()).expect("finite")
    }

    /// `Y_{i+1} = π_{i+1}(v)`.
    pub fn component(&self, i: usize) -> AlgebraVector {
        AlgebraVector::new(self.algebra(), self.components[i].clone()).expect("finite")
    }

    /// `X_{i+1}`.
    pub fn generator(&self, i: usize) -> AlgebraVector {
        AlgebraVector::new(self.algebra(), self.generators[i].clone()).expect("finite")
    }

    pub fn generator_coeffs(&self) -> &[DVector<f64>] {
        &self.generators
    }

    pub fn component_coeffs(&self) -> &[DVector<f64>] {
        &self.components
    }

    /// `‖Σ X_i − v‖` in coefficient max-norm.
    pub fn sum_defect(&self) -> f64 {
        let sum = self.generators.iter().fold(DVector::zeros(self.velocity.len()), |acc, x| acc + x);
        (sum - &self.velocity).amax()
    }

    /// Largest norm of the part of `X_i` outside `m_i ⊕ … ⊕ m_N`.
    pub fn tail_defect(&self) -> f64 {
        let split = self.cm.split();
        let mut worst = 0.0f64;
        for (i, x) in self.generators.iter().enumerate() {
            let c = split.to_m_coords(x);
            let head = self.cm.block(i).start;
            let outside = c.rows(0, head).norm_squared() + split.h_component_norm(x).powi(2);
            worst = worst.max(outside.sqrt());
        }
        worst
    }
}

/// Result of [`ProductCurve::lax_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxResidual {
    /// `‖Ḟ − [F, ω]‖` on all of `g`.
    pub full: f64,
    /// Norm of the `m`-component only.
    pub mod_h: f64,
}

/// Closed-form lift sample at time `t`.
#[derive(Debug, Clone)]
pub struct LiftSample {
    pub t: f64,
    pub omega: AlgebraVector,
    pub omega_dot: AlgebraVector,
    /// `F = A ω_m` in m-coordinates.
    pub f: DVector<f64>,
    /// `Ḟ = A (ω̇)_m` in m-coordinates.
    pub f_dot: DVector<f64>,
}

/// The curve `t ↦ exp(tX_1) ⋯ exp(tX_N)`.
#[derive(Debug, Clone)]
pub struct ProductCurve {
    gen: GeneratorSet,
    mats: Vec<DMatrix<f64>>,
}

/// Per-time cache of the factors of the product and the transported
/// generators `T_i^N(t) X_i`.
struct Frame {
    factors: Vec<DMatrix<f64>>,
    inv_factors: Vec<DMatrix<f64>>,
    transported: Vec<DVector<f64>>,
}

impl ProductCurve {
    pub fn new(gen: GeneratorSet) -> Self {
        let alg = Arc::clone(gen.algebra());
        let mats = gen.generators.iter().map(|x| alg.combine(x)).collect();
        Self { gen, mats }
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gen
    }

    pub fn metric(&self) -> &Arc<ChainMetric> {
        &self.gen.cm
    }

    pub fn algebra(&self) -> &Arc<LieAlgebraBasis> {
        self.gen.algebra()
    }

    fn n(&self) -> usize {
        self.mats.len()
    }

    fn matrix_size(&self) -> usize {
        self.algebra().matrix_size()
    }

    fn frame(&self, t: f64) -> Result<Frame> {
        let factors = self.mats.iter().map(|x| exp_dense(&(x * t))).collect::<Result<Vec<_>>>()?;
        let inv_factors = self.mats.iter().map(|x| exp_dense(&(x * -t))).collect::<Result<Vec<_>>>()?;
        let n = self.n();
        let size = self.matrix_size();
        let alg = self.algebra();
        let mut transported = vec![DVector::zeros(alg.dim()); n];
        // Walk i = N-1 … 0 keeping S = Π_{k>i} factors and S⁻¹.
        let mut s = DMatrix::<f64>::identity(size, size);
        let mut s_inv = DMatrix::<f64>::identity(size, size);
        for i in (0..n).rev() {
            let conj = &s_inv * &self.mats[i] * &s;
            transported[i] = alg.expand_dense(&conj).0;
            s = &factors[i] * &s;
            s_inv = &s_inv * &inv_factors[i];
        }
        Ok(Frame { factors, inv_factors, transported })
    }

    /// Coset representative `exp(tX_1) ⋯ exp(tX_N)` of `γ(t)`.
    pub fn eval(&self, t: f64) -> Result<GroupElement> {
        Ok(GroupElement::new_unchecked(self.algebra(), self.eval_dense(t)?))
    }

    pub(crate) fn eval_dense(&self, t: f64) -> Result<DMatrix<f64>> {
        let size = self.matrix_size();
        let mut g = DMatrix::<f64>::identity(size, size);
        for x in &self.mats {
            g *= exp_dense(&(x * t))?;
        }
        Ok(g)
    }

    /// `T_i^j(t) X = Ad((exp(tX_{i+1}) ⋯ exp(tX_j))⁻¹) X` with 0-based
    /// `i ≤ j < N`; the product runs over generators `i+1 ..= j`.
    pub fn transport(&self, i: usize, j: usize, t: f64, x: &AlgebraVector) -> Result<AlgebraVector> {
        if i > j || j >= self.n() {
            return Err(Error::Index(format!("transport needs i <= j < {}, got ({i}, {j})", self.n())));
        }
        if x.coeffs().len() != self.algebra().dim() {
            return Err(Error::Dimension("vector from another algebra".into()));
        }
        if i == j {
            return Ok(x.clone());
        }
        let size = self.matrix_size();
        let mut p = DMatrix::<f64>::identity(size, size);
        let mut p_inv = DMatrix::<f64>::identity(size, size);
        for k in (i + 1)..=j {
            p *= exp_dense(&(&self.mats[k] * t))?;
            p_inv = exp_dense(&(&self.mats[k] * -t))? * p_inv;
        }
        let conj = p_inv * x.matrix() * p;
        let (c, _) = self.algebra().expand_dense(&conj);
        AlgebraVector::new(self.algebra(), c)
    }

    /// `T_i^N(t) X_i` for every generator.
    pub fn transported_generators(&self, t: f64) -> Result<Vec<AlgebraVector>> {
        let f = self.frame(t)?;
        f.transported.into_iter().map(|c| AlgebraVector::new(self.algebra(), c)).collect()
    }

    /// `T_i^N(t) Y_i` for every eigenspace component of the velocity.
    pub fn transported_components(&self, t: f64) -> Result<Vec<AlgebraVector>> {
        let f = self.frame(t)?;
        let alg = self.algebra();
        let size = self.matrix_size();
        let n = self.n();
        let mut out = vec![AlgebraVector::zero(alg); n];
        let mut s = DMatrix::<f64>::identity(size, size);
        let mut s_inv = DMatrix::<f64>::identity(size, size);
        for i in (0..n).rev() {
            let y = alg.combine(&self.gen.components[i]);
            out[i] = AlgebraVector::new(alg, alg.expand_dense(&(&s_inv * y * &s)).0)?;
            s = &f.factors[i] * &s;
            s_inv = &s_inv * &f.inv_factors[i];
        }
        Ok(out)
    }

    fn lift(&self, frame: &Frame) -> (DVector<f64>, DVector<f64>) {
        let alg = self.algebra();
        let tx = &frame.transported;
        let n = tx.len();
        let d = alg.dim();
        // tails[i] = Σ_{k≥i} T_k X_k
        let mut tails = vec![DVector::zeros(d); n + 1];
        for i in (0..n).rev() {
            tails[i] = &tails[i + 1] + &tx[i];
        }
        let mut omega_dot = DVector::zeros(d);
        for i in 0..n {
            omega_dot += alg.bracket_coeffs(&tx[i], &tails[i]);
        }
        (tails.swap_remove(0), omega_dot)
    }

    /// Closed-form Maurer–Cartan lift `ω(t) = α⁻¹α̇` and its derivative.
    pub fn maurer_cartan(&self, t: f64) -> Result<LiftSample> {
        let frame = self.frame(t)?;
        let (omega, omega_dot) = self.lift(&frame);
        let cm = self.metric();
        let split = cm.split();
        let f = cm.apply_a_coords(&split.to_m_coords(&omega));
        let f_dot = cm.apply_a_coords(&split.to_m_coords(&omega_dot));
        let alg = self.algebra();
        Ok(LiftSample {
            t,
            omega: AlgebraVector::new(alg, omega)?,
            omega_dot: AlgebraVector::new(alg, omega_dot)?,
            f,
            f_dot,
        })
    }

    /// Residual of the Lax equation `Ḟ = [F, ω]` at `t`.
    pub fn lax_residual(&self, t: f64) -> Result<LaxResidual> {
        let s = self.maurer_cartan(t)?;
        let split = self.metric().split();
        let alg = self.algebra();
        let f_g = split.from_m_coords(&s.f);
        let r = split.from_m_coords(&s.f_dot) - alg.bracket_coeffs(&f_g, s.omega.coeffs());
        Ok(LaxResidual { full: split.g_norm(&r), mod_h: split.to_m_coords(&r).norm() })
    }

    /// `‖(Σ_i A[T_iX_i, Σ_{k≥i} T_kX_k]_m − [A Σ_i (T_iX_i)_m, Σ_k T_kX_k])_m‖`,
    /// the geodesic equation written directly in the transported generators.
    pub fn gelan_residual(&self, t: f64) -> Result<f64> {
        let frame = self.frame(t)?;
        let cm = self.metric();
        let split = cm.split();
        let alg = self.algebra();
        let tx = &frame.transported;
        let n = tx.len();
        let d = alg.dim();
        let dm = split.dim_m();
        let mut first = DVector::zeros(dm);
        for i in 0..n {
            let mut tail = DVector::zeros(d);
            for x in &tx[i..] {
                tail += x;
            }
            first += cm.apply_a_coords(&split.to_m_coords(&alg.bracket_coeffs(&tx[i], &tail)));
        }
        let mut m_sum = DVector::zeros(dm);
        let mut total = DVector::zeros(d);
        for x in tx {
            m_sum += split.to_m_coords(x);
            total += x;
        }
        let a_sum = split.from_m_coords(&cm.apply_a_coords(&m_sum));
        let second = split.to_m_coords(&alg.bracket_coeffs(&a_sum, &total));
        Ok((first - second).norm())
    }

    /// `⟨A ω_m, ω_m⟩₀`, constant along geodesics.
    pub fn energy(&self, t: f64) -> Result<f64> {
        let frame = self.frame(t)?;
        let omega: DVector<f64> = frame.transported.iter().sum();
        let cm = self.metric();
        Ok(cm.energy_coords(&cm.split().to_m_coords(&omega)))
    }
}

/// `true` when `x` has no `h`-component beyond [`DOMAIN_TOL`].
pub fn lies_in_m(cm: &ChainMetric, x: &AlgebraVector) -> bool {
    cm.split().h_component_norm(x.coeffs()) <= DOMAIN_TOL * x.norm().max(1.0)
}
