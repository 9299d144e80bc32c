//! Independent ODE oracle for the closed-form geodesics.
//!
//! The horizontal lift `α` (with `ω_h ≡ 0`) of a geodesic solves
//!
//! ```text
//! A ẇ = [A w, w]_m,        α̇ = α · w,        (w, α)(0) = (v, I)
//! ```
//!
//! which is integrated with fixed-step RK4 in ambient matrix space. Cosets
//! are compared through an [`OrbitMap`], i.e. through the matrix columns
//! fixed by every element of `H`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geodesic::{generators_from_velocity, ProductCurve};
use crate::homogeneous::{ChainMetric, ReductiveSplit};
use crate::liealgebra::{AlgebraVector, Family, GroupElement};
use crate::numkernel::{exp_dense, polar_orthogonal};

/// `step · ‖v‖` must not exceed this.
pub const STABILITY_BOUND: f64 = 0.1;
/// Tolerance for `h` fixing the anchored columns.
pub const ANCHOR_TOL: f64 = 1e-11;

/// Fixed-step RK4 configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub step: f64,
    pub t_max: f64,
    /// Polar re-orthonormalization period in steps (0 disables it).
    pub reortho_every: usize,
    /// Record every n-th step; the final step is always recorded.
    pub record_every: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { step: 1e-3, t_max: 1.0, reortho_every: 100, record_every: 1 }
    }
}

impl OdeConfig {
    pub fn new(step: f64, t_max: f64) -> Self {
        Self { step, t_max, ..Self::default() }
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    fn validate(&self, speed: f64) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if self.step * speed > STABILITY_BOUND {
            return Err(Error::Config(format!(
                "step * |v| = {:.3e} exceeds stability bound {STABILITY_BOUND}",
                self.step * speed
            )));
        }
        Ok(())
    }
}

/// Samples of an integrated horizontal lift.
#[derive(Debug, Clone)]
pub struct OdePath {
    pub ts: Vec<f64>,
    pub alphas: Vec<GroupElement>,
    /// `ω_m` in m-coordinates.
    pub omegas: Vec<DVector<f64>>,
}

impl OdePath {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Largest relative deviation of `⟨Aω_m, ω_m⟩₀` from its initial value.
    pub fn energy_drift(&self, cm: &ChainMetric) -> f64 {
        let e0 = cm.energy_coords(&self.omegas[0]);
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        self.omegas.iter().map(|w| (cm.energy_coords(w) - e0).abs() / scale).fold(0.0, f64::max)
    }

    /// Largest `‖αᵀα − I‖` entry over the samples.
    pub fn orthogonality_defect(&self) -> f64 {
        self.alphas
            .iter()
            .map(|a| {
                let m = a.matrix().inner();
                let n = m.nrows();
                (m.transpose() * m - DMatrix::<f64>::identity(n, n)).amax()
            })
            .fold(0.0, f64::max)
    }
}

fn rhs(
    cm: &ChainMetric,
    mats: &[DMatrix<f64>],
    w: &DVector<f64>,
    alpha: &DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let split = cm.split();
    let alg = split.algebra();
    let wg = split.from_m_coords(w);
    let awg = split.from_m_coords(&cm.apply_a_coords(w));
    let dw = cm.apply_a_inv_coords(&split.to_m_coords(&alg.bracket_coeffs(&awg, &wg)));
    let mut wmat = DMatrix::zeros(alpha.nrows(), alpha.ncols());
    for (c, b) in wg.iter().zip(mats) {
        if *c != 0.0 {
            wmat += b * *c;
        }
    }
    (dw, alpha * wmat)
}

/// Compensated `x += dx`; `c` carries the lost low-order bits.
fn kahan_add<R: nalgebra::Dim, C: nalgebra::Dim>(
    x: &mut nalgebra::OMatrix<f64, R, C>,
    c: &mut nalgebra::OMatrix<f64, R, C>,
    dx: &nalgebra::OMatrix<f64, R, C>,
) where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<R, C>,
{
    for ((xi, ci), di) in x.iter_mut().zip(c.iter_mut()).zip(dx.iter()) {
        let y = di - *ci;
        let t = *xi + y;
        *ci = (t - *xi) - y;
        *xi = t;
    }
}

/// Integrates the horizontal geodesic equation from `(v, I)` up to `cfg.t_max`.
pub fn integrate_horizontal(cm: &ChainMetric, v: &AlgebraVector, cfg: &OdeConfig) -> Result<OdePath> {
    let split = cm.split();
    let w0 = split.m_coords(v)?;
    cfg.validate(w0.norm())?;
    let alg = split.algebra();
    let mats = alg.basis();
    let size = alg.matrix_size();
    let steps = ((cfg.t_max / cfg.step).round() as usize).max(if cfg.t_max > 0.0 { 1 } else { 0 });
    let h = if steps == 0 { 0.0 } else { cfg.t_max / steps as f64 };
    let orthogonal = alg.family() != Family::Custom;

    let mut w = w0;
    let mut a = DMatrix::<f64>::identity(size, size);
    let mut cw = DVector::zeros(w.len());
    let mut ca = DMatrix::zeros(size, size);
    let mut path =
        OdePath { ts: vec![0.0], alphas: vec![GroupElement::new_unchecked(alg, a.clone())], omegas: vec![w.clone()] };
    for s in 1..=steps {
        let (k1w, k1a) = rhs(cm, mats, &w, &a);
        let (k2w, k2a) = rhs(cm, mats, &(&w + &k1w * (h / 2.0)), &(&a + &k1a * (h / 2.0)));
        let (k3w, k3a) = rhs(cm, mats, &(&w + &k2w * (h / 2.0)), &(&a + &k2a * (h / 2.0)));
        let (k4w, k4a) = rhs(cm, mats, &(&w + &k3w * h), &(&a + &k3a * h));
        kahan_add(&mut w, &mut cw, &((k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (h / 6.0)));
        kahan_add(&mut a, &mut ca, &((k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0)));
        if orthogonal && cfg.reortho_every > 0 && s % cfg.reortho_every == 0 {
            a = polar_orthogonal(&(&a - &ca))?;
            ca.fill(0.0);
        }
        if s % cfg.record_every == 0 || s == steps {
            path.ts.push(if s == steps { cfg.t_max } else { s as f64 * h });
            path.alphas.push(GroupElement::new_unchecked(alg, a.clone()));
            path.omegas.push(w.clone());
        }
    }
    Ok(path)
}

/// Coset projection `gH ↦ (g e_j)_{j anchored}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitMap {
    n: usize,
    anchored: Vec<usize>,
}

impl OrbitMap {
    /// Columns annihilated by every element of `h`. The map is faithful when
    /// the stabilizer of those columns in `so(n)` has the dimension of `h`.
    pub fn from_split(split: &ReductiveSplit) -> Result<Self> {
        let alg = split.algebra();
        if !matches!(alg.family(), Family::SpecialOrthogonal(_)) {
            return Err(Error::Unsupported(format!("no orbit map for algebra {}", alg.name())));
        }
        let n = alg.matrix_size();
        let hb = split.h_basis();
        let h_mats: Vec<DMatrix<f64>> = (0..hb.ncols()).map(|c| alg.combine(&hb.column(c).into_owned())).collect();
        let anchored: Vec<usize> =
            (0..n).filter(|&j| h_mats.iter().all(|m| m.column(j).amax() <= ANCHOR_TOL)).collect();
        let free = n - anchored.len();
        if free * free.saturating_sub(1) / 2 != split.dim_h() {
            return Err(Error::Unsupported(format!(
                "isotropy algebra of dimension {} is not a column stabilizer",
                split.dim_h()
            )));
        }
        Ok(Self { n, anchored })
    }

    pub fn anchored_columns(&self) -> &[usize] {
        &self.anchored
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    /// Number of entries produced by [`OrbitMap::project`].
    pub fn width(&self) -> usize {
        self.n * self.anchored.len()
    }

    /// Anchored columns of `g`, column by column.
    pub fn project(&self, g: &DMatrix<f64>) -> Vec<f64> {
        self.anchored.iter().flat_map(|&j| g.column(j).iter().copied().collect::<Vec<_>>()).collect()
    }

    /// Max-norm distance between the images of two representatives.
    pub fn distance(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        self.anchored.iter().map(|&j| (a.column(j) - b.column(j)).amax()).fold(0.0, f64::max)
    }

    /// Largest displacement of an anchored column under `exp(a)`, `a ∈ h` random.
    pub fn soundness_violation<R: Rng + ?Sized>(
        &self,
        split: &ReductiveSplit,
        rng: &mut R,
        draws: usize,
    ) -> Result<f64> {
        let alg = split.algebra();
        let hb = split.h_basis();
        let id = DMatrix::<f64>::identity(self.n, self.n);
        let mut worst = 0.0f64;
        if hb.ncols() == 0 {
            return Ok(0.0);
        }
        for _ in 0..draws {
            let c = DVector::from_fn(hb.ncols(), |_, _| rng.random_range(-2.0..2.0));
            let g = exp_dense(&alg.combine(&(&hb * c)))?;
            worst = worst.max(self.distance(&g, &id));
        }
        Ok(worst)
    }
}

/// Result of [`compare_paths`].
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_deviation: f64,
    /// `(t, deviation)` per path sample.
    pub per_sample: Vec<(f64, f64)>,
}

/// Compares the closed-form curve and an integrated path sample by sample.
pub fn compare_paths(pc: &ProductCurve, path: &OdePath, om: &OrbitMap) -> Result<Comparison> {
    let alg = pc.algebra();
    if alg.matrix_size() != om.matrix_size() {
        return Err(Error::Comparison(format!(
            "orbit map acts on {}x{} matrices, curve on {}x{}",
            om.n,
            om.n,
            alg.matrix_size(),
            alg.matrix_size()
        )));
    }
    if let Some(a) = path.alphas.iter().find(|a| !Arc::ptr_eq(a.algebra(), alg)) {
        return Err(Error::Comparison(format!("path lives in {}, curve in {}", a.algebra().name(), alg.name())));
    }
    let mut per_sample = Vec::with_capacity(path.len());
    let mut max_deviation = 0.0f64;
    for (t, a) in path.ts.iter().zip(&path.alphas) {
        let g = pc.eval_dense(*t)?;
        let d = om.distance(&g, a.matrix().inner());
        max_deviation = max_deviation.max(d);
        per_sample.push((*t, d));
    }
    Ok(Comparison { max_deviation, per_sample })
}

/// Timings of [`bench`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub closed_form_time: Duration,
    pub ode_time: Duration,
    pub deviation: f64,
    pub samples: usize,
    pub ode_steps: usize,
}

/// Times closed-form evaluation at `t_samples` against integrating to the
/// largest sample, and reports the deviation at the shared times.
pub fn bench(cm: &Arc<ChainMetric>, v: &AlgebraVector, t_samples: &[f64], cfg: &OdeConfig) -> Result<BenchReport> {
    let om = OrbitMap::from_split(cm.split())?;
    let t_max = t_samples.iter().copied().fold(0.0, f64::max);
    let start = Instant::now();
    let pc = ProductCurve::new(generators_from_velocity(cm, v)?);
    let closed: Vec<DMatrix<f64>> = t_samples.iter().map(|t| pc.eval_dense(*t)).collect::<Result<_>>()?;
    let closed_form_time = start.elapsed();

    let cfg = OdeConfig { t_max, ..*cfg };
    let start = Instant::now();
    let path = integrate_horizontal(cm, v, &cfg)?;
    let ode_time = start.elapsed();

    // Deviation at every sample the integrator hit, plus the closed-form samples
    // matched by time.
    let mut deviation = compare_paths(&pc, &path, &om)?.max_deviation;
    for (t, g) in t_samples.iter().zip(&closed) {
        if let Some(k) = path.ts.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0)) {
            deviation = deviation.max(om.distance(g, path.alphas[k].matrix().inner()));
        }
    }
    let ode_steps = if cfg.t_max > 0.0 { (cfg.t_max / cfg.step).round().max(1.0) as usize } else { 0 };
    Ok(BenchReport { closed_form_time, ode_time, deviation, samples: t_samples.len(), ode_steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::{build_chain_metric, reductive_split, SubalgebraChain};
    use crate::liealgebra::{catalog_so, catalog_so_block, trace_form};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn metric(n: usize, ks: &[usize], lambdas: &[f64]) -> Arc<ChainMetric> {
        let g = catalog_so(n).unwrap();
        let q = trace_form(&g).unwrap();
        let chain = SubalgebraChain::so_blocks(&g, ks).unwrap();
        Arc::new(build_chain_metric(&chain, &q, lambdas).unwrap())
    }

    #[test]
    fn anchored_columns_for_blocks() {
        let g = catalog_so(4).unwrap();
        let q = trace_form(&g).unwrap();
        let s = reductive_split(&g, &catalog_so_block(4, 2).unwrap(), &q).unwrap();
        assert_eq!(OrbitMap::from_split(&s).unwrap().anchored_columns(), &[0, 1]);
        let s = reductive_split(&g, &[], &q).unwrap();
        assert_eq!(OrbitMap::from_split(&s).unwrap().anchored_columns(), &[0, 1, 2, 3]);
        let s = reductive_split(&g, &catalog_so_block(4, 3).unwrap(), &q).unwrap();
        let om = OrbitMap::from_split(&s).unwrap();
        assert_eq!(om.anchored_columns(), &[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert!(om.soundness_violation(&s, &mut rng, 20).unwrap() <= ANCHOR_TOL);
    }

    #[test]
    fn identity_metric_is_one_parameter_orbit() {
        let cm = metric(3, &[0], &[1.0]);
        let v = cm.split().m_vector(&[0.3, -0.2, 0.5]).unwrap();
        let path = integrate_horizontal(&cm, &v, &OdeConfig::new(1e-3, 1.0).with_record_every(250)).unwrap();
        for w in &path.omegas {
            assert_eq!(w, &path.omegas[0]);
        }
        let last = path.alphas.last().unwrap().matrix().inner();
        let exact = exp_dense(&v.matrix()).unwrap();
        assert!((last - exact).amax() <= 1e-10);
    }

    #[test]
    fn zero_velocity_stays_at_identity() {
        let cm = metric(3, &[0, 2], &[1.0, 2.0]);
        let v = AlgebraVector::zero(cm.algebra());
        let path = integrate_horizontal(&cm, &v, &OdeConfig::new(1e-2, 1.0)).unwrap();
        for a in &path.alphas {
            assert_eq!(a.matrix().inner(), &DMatrix::<f64>::identity(3, 3));
        }
    }

    #[test]
    fn stability_guard() {
        let cm = metric(3, &[0], &[1.0]);
        let v = cm.split().m_vector(&[10.0, 0.0, 0.0]).unwrap();
        let r = integrate_horizontal(&cm, &v, &OdeConfig::new(0.011, 1.0));
        assert!(matches!(r, Err(Error::Config(_))));
        let r = integrate_horizontal(&cm, &v, &OdeConfig::new(-1.0, 1.0));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn so3_chain_energy_and_comparison() {
        let cm = metric(3, &[0, 2], &[1.0, 2.0]);
        let v = cm.split().m_vector(&[0.6, -0.48, 0.64]).unwrap();
        let cfg = OdeConfig::new(1e-3, 2.0).with_record_every(100);
        let path = integrate_horizontal(&cm, &v, &cfg).unwrap();
        assert!(path.energy_drift(&cm) <= 1e-8);
        assert!(path.orthogonality_defect() <= 1e-8);
        let pc = ProductCurve::new(generators_from_velocity(&cm, &v).unwrap());
        let om = OrbitMap::from_split(cm.split()).unwrap();
        let cmp = compare_paths(&pc, &path, &om).unwrap();
        assert_eq!(cmp.per_sample[0], (0.0, 0.0));
        assert!(cmp.max_deviation <= 1e-6, "{}", cmp.max_deviation);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let cm3 = metric(3, &[0], &[1.0]);
        let cm4 = metric(4, &[0], &[1.0]);
        let v3 = cm3.split().m_vector(&[0.1, 0.2, 0.3]).unwrap();
        let path = integrate_horizontal(&cm3, &v3, &OdeConfig::new(1e-2, 0.1)).unwrap();
        let v4 = cm4.split().m_vector(&[0.1; 6]).unwrap();
        let pc = ProductCurve::new(generators_from_velocity(&cm4, &v4).unwrap());
        let om = OrbitMap::from_split(cm4.split()).unwrap();
        assert!(matches!(compare_paths(&pc, &path, &om), Err(Error::Comparison(_))));
    }
}
