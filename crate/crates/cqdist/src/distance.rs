//! The two distance functionals between a prescribed trajectory and exact
//! quantum evolution: the density-matrix form D = ∫‖iρ̇ − [H, ρ]‖dt and the
//! gauge-minimized pure-state form 𝒟 = min_α ∫‖iψ̇ − (α̇ + H)ψ‖dt.
//!
//! Gauge minimization is pointwise in t: the integrand depends on α only
//! through α̇(t) and each pointwise value is attainable, so the closed-form
//! minimizer α̇* = Re⟨ψ, iψ̇⟩ − ⟨ψ|H|ψ⟩ realizes the minimum over α. The
//! outer integral is adaptive Simpson with a Richardson error estimate.

use crate::cmatrix::{commutator, ComplexMatrix, ComplexVector, C64};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::par;
use crate::trajectory::{
    density_from_state, HamiltonianSpec, SampledPoint, TrajectorySpec, SAMPLE_TOL,
};

/// Interval and error control for the outer ∫…dt.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub t0: f64,
    pub t1: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl QuadratureConfig {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
            return Err(Error::Validation(format!(
                "invalid integration interval [{t0}, {t1}]"
            )));
        }
        Ok(Self {
            t0,
            t1,
            abs_tol: 1e-9,
            max_depth: 40,
        })
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Result<Self> {
        if !abs_tol.is_finite() || abs_tol <= 0.0 {
            return Err(Error::Validation(format!(
                "quadrature tolerance must be positive, got {abs_tol}"
            )));
        }
        self.abs_tol = abs_tol;
        Ok(self)
    }
}

/// Choice of the gauge rate α̇(t) in the pure-state functional.
#[derive(Debug, Clone)]
pub enum GaugeChoice {
    /// Pointwise closed-form minimizer.
    Optimal,
    /// α̇ ≡ 0.
    Zero,
    /// A fixed expression in `t` and the spec's parameters.
    Fixed(Expr),
}

/// Result of a distance computation.
#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub distance: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub curve: Option<Vec<(f64, f64)>>,
}

/// Deviation operator A = iρ̇ − [H, ρ]; vanishes on solutions of the von
/// Neumann equation. Anti-Hermitian and traceless when ρ and H are Hermitian.
pub fn deviation(rho: &ComplexMatrix, rho_dot: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
    rho_dot.scale(C64::new(0.0, 1.0)).sub(&commutator(h, rho))
}

fn density_sample(spec: &TrajectorySpec, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    match spec.sample(t)? {
        SampledPoint::Density { rho, rho_dot, .. } => Ok((rho, rho_dot)),
        SampledPoint::Pure { psi, psi_dot, .. } => {
            // product rule: dρ/dt = ψ̇ψ† + ψψ̇†
            let rho = density_from_state(&psi)?;
            let rho_dot = psi_dot.outer(&psi).add(&psi.outer(&psi_dot));
            Ok((rho, rho_dot))
        }
    }
}

fn density_integrand_with(h: &ComplexMatrix, spec: &TrajectorySpec, t: f64) -> Result<f64> {
    let (rho, rho_dot) = density_sample(spec, t)?;
    Ok(deviation(&rho, &rho_dot, h).operator_norm())
}

/// ‖iρ̇(t) − [H, ρ(t)]‖ at time `t`. Pure-state specs are converted to
/// density form first.
pub fn density_integrand(spec: &TrajectorySpec, h: &HamiltonianSpec, t: f64) -> Result<f64> {
    density_integrand_with(&h.materialize(spec.params()), spec, t)
}

/// Pointwise minimizer of ‖iψ̇ − (α̇ + H)ψ‖ over real α̇:
/// α̇* = Re⟨ψ, iψ̇⟩ − ⟨ψ|H|ψ⟩.
pub fn optimal_gauge_rate(
    psi: &ComplexVector,
    psi_dot: &ComplexVector,
    h: &ComplexMatrix,
) -> Result<f64> {
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidState("zero state vector".into()));
    }
    // second-order condition of the quadratic in α̇
    debug_assert!(norm * norm > 0.0);
    if (norm - 1.0).abs() > SAMPLE_TOL {
        return Err(Error::InvalidState(format!(
            "state vector has norm {norm}, expected 1"
        )));
    }
    let i = C64::new(0.0, 1.0);
    let kinetic = psi.inner(&psi_dot.scale(i)).re;
    let energy = psi.inner(&h.mul_vec(psi)).re;
    Ok(kinetic - energy)
}

/// ‖iψ̇ − α̇ψ − Hψ‖ for an explicit gauge rate.
pub fn pure_residual_norm(
    psi: &ComplexVector,
    psi_dot: &ComplexVector,
    h: &ComplexMatrix,
    alpha_dot: f64,
) -> f64 {
    let i = C64::new(0.0, 1.0);
    psi_dot
        .scale(i)
        .sub(&psi.scale(C64::new(alpha_dot, 0.0)))
        .sub(&h.mul_vec(psi))
        .norm()
}

fn pure_integrand_with(
    h: &ComplexMatrix,
    spec: &TrajectorySpec,
    gauge: &GaugeChoice,
    t: f64,
) -> Result<f64> {
    let SampledPoint::Pure { psi, psi_dot, .. } = spec.sample(t)? else {
        return Err(Error::Validation(format!(
            "spec `{}` is not a pure-state trajectory",
            spec.label()
        )));
    };
    let alpha_dot = match gauge {
        GaugeChoice::Optimal => optimal_gauge_rate(&psi, &psi_dot, h)?,
        GaugeChoice::Zero => 0.0,
        GaugeChoice::Fixed(e) => expr::eval(e, t, spec.params())?,
    };
    Ok(pure_residual_norm(&psi, &psi_dot, h, alpha_dot))
}

/// ‖iψ̇(t) − [α̇ + H]ψ(t)‖ at time `t` under the given gauge.
pub fn pure_integrand(
    spec: &TrajectorySpec,
    h: &HamiltonianSpec,
    gauge: &GaugeChoice,
    t: f64,
) -> Result<f64> {
    pure_integrand_with(&h.materialize(spec.params()), spec, gauge, t)
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// The interval is pre-split into a fixed number of panels so that symmetric
/// integrands sampled at their zeros cannot fool the first Simpson estimate.
const INITIAL_PANELS: usize = 13;

struct Quad<'a> {
    f: &'a mut dyn FnMut(f64) -> Result<f64>,
    evaluations: u64,
    max_depth: u32,
}

impl Quad<'_> {
    fn eval(&mut self, t: f64) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(t)?;
        if !v.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(v)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<(f64, f64)> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let h = b - a;
        let left = h * ((fa + 4.0 * flm + fm) / 12.0);
        let right = h * ((fm + 4.0 * frm + fb) / 12.0);
        let sum = left + right;
        let delta = sum - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok((sum + delta / 15.0, delta.abs() / 15.0));
        }
        if depth == 0 {
            return Err(Error::Quadrature {
                t0: a,
                t1: b,
                max_depth: self.max_depth,
            });
        }
        let (lv, le) = self.refine(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let (rv, re) = self.refine(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok((lv + rv, le + re))
    }
}

/// Adaptive Simpson on [t0, t1]: accepts a subinterval when
/// |S_fine − S_coarse| ≤ 15·tol_local with the tolerance budget split
/// proportionally to subinterval length; the 1/15 Richardson correction is
/// both applied and accumulated as the error estimate.
///
/// Returns (value, error estimate, integrand evaluations).
pub fn integrate<F>(mut f: F, cfg: &QuadratureConfig) -> Result<(f64, f64, u64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !cfg.t0.is_finite() || !cfg.t1.is_finite() || cfg.t0 >= cfg.t1 {
        return Err(Error::Validation(format!(
            "invalid integration interval [{}, {}]",
            cfg.t0, cfg.t1
        )));
    }
    if !cfg.abs_tol.is_finite() || cfg.abs_tol <= 0.0 {
        return Err(Error::Validation(
            "quadrature tolerance must be positive".into(),
        ));
    }

    let mut quad = Quad {
        f: &mut f,
        evaluations: 0,
        max_depth: cfg.max_depth,
    };
    let width = cfg.t1 - cfg.t0;
    let panel_tol = cfg.abs_tol / INITIAL_PANELS as f64;

    let mut total = 0.0;
    let mut err = 0.0;
    let mut a = cfg.t0;
    let mut fa = quad.eval(a)?;
    for k in 0..INITIAL_PANELS {
        let b = if k + 1 == INITIAL_PANELS {
            cfg.t1
        } else {
            cfg.t0 + width * ((k + 1) as f64 / INITIAL_PANELS as f64)
        };
        let m = 0.5 * (a + b);
        let fm = quad.eval(m)?;
        let fb = quad.eval(b)?;
        let whole = (b - a) * ((fa + 4.0 * fm + fb) / 6.0);
        let (v, e) = quad.refine(a, m, b, fa, fm, fb, whole, panel_tol, cfg.max_depth)?;
        total += v;
        err += e;
        a = b;
        fa = fb;
    }
    Ok((total, err, quad.evaluations))
}

// ---------------------------------------------------------------------------
// Distances, curves, comparison
// ---------------------------------------------------------------------------

/// D = ∫‖iρ̇ − [H, ρ]‖dt over the configured interval.
pub fn distance_density(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    cfg: &QuadratureConfig,
) -> Result<DistanceReport> {
    let h = hspec.materialize(spec.params());
    let (value, error_estimate, evaluations) =
        integrate(|t| density_integrand_with(&h, spec, t), cfg)?;
    Ok(DistanceReport {
        distance: value.max(0.0),
        error_estimate,
        evaluations,
        curve: None,
    })
}

/// 𝒟 = ∫‖iψ̇ − (α̇ + H)ψ‖dt under the given gauge. With `Optimal` this
/// realizes the minimum over α.
pub fn distance_pure(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    cfg: &QuadratureConfig,
    gauge: &GaugeChoice,
) -> Result<DistanceReport> {
    let h = hspec.materialize(spec.params());
    let (value, error_estimate, evaluations) =
        integrate(|t| pure_integrand_with(&h, spec, gauge, t), cfg)?;
    Ok(DistanceReport {
        distance: value.max(0.0),
        error_estimate,
        evaluations,
        curve: None,
    })
}

fn uniform_grid(t0: f64, t1: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
        return Err(Error::Validation(format!("invalid interval [{t0}, {t1}]")));
    }
    let n = samples;
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect())
}

/// Density integrand on a uniform grid; parallel when the `parallel` feature
/// is enabled.
pub fn density_curve(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let ts = uniform_grid(t0, t1, samples)?;
    let h = hspec.materialize(spec.params());
    let values = par::try_map(&ts, |&t| density_integrand_with(&h, spec, t))?;
    Ok(ts.into_iter().zip(values).collect())
}

/// Sequential reference path for [`density_curve`]; always produces the same
/// bits.
pub fn density_curve_seq(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let ts = uniform_grid(t0, t1, samples)?;
    let h = hspec.materialize(spec.params());
    let values = par::try_map_seq(&ts, |&t| density_integrand_with(&h, spec, t))?;
    Ok(ts.into_iter().zip(values).collect())
}

/// Pure-state integrand on a uniform grid under the given gauge.
pub fn pure_curve(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    gauge: &GaugeChoice,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let ts = uniform_grid(t0, t1, samples)?;
    let h = hspec.materialize(spec.params());
    let values = par::try_map(&ts, |&t| pure_integrand_with(&h, spec, gauge, t))?;
    Ok(ts.into_iter().zip(values).collect())
}

/// Sequential reference path for [`pure_curve`].
pub fn pure_curve_seq(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    gauge: &GaugeChoice,
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let ts = uniform_grid(t0, t1, samples)?;
    let h = hspec.materialize(spec.params());
    let values = par::try_map_seq(&ts, |&t| pure_integrand_with(&h, spec, gauge, t))?;
    Ok(ts.into_iter().zip(values).collect())
}

/// [`distance_density`] with the integrand curve attached.
pub fn distance_density_with_curve(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    cfg: &QuadratureConfig,
    samples: usize,
) -> Result<DistanceReport> {
    let mut report = distance_density(spec, hspec, cfg)?;
    report.curve = Some(density_curve(spec, hspec, cfg.t0, cfg.t1, samples)?);
    Ok(report)
}

/// [`distance_pure`] with the integrand curve attached.
pub fn distance_pure_with_curve(
    spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    cfg: &QuadratureConfig,
    gauge: &GaugeChoice,
    samples: usize,
) -> Result<DistanceReport> {
    let mut report = distance_pure(spec, hspec, cfg, gauge)?;
    report.curve = Some(pure_curve(spec, hspec, gauge, cfg.t0, cfg.t1, samples)?);
    Ok(report)
}

/// Outcome of the pure-vs-density agreement check.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub max_pointwise_gap: f64,
    pub distance_gap: f64,
    pub pure_distance: f64,
    pub density_distance: f64,
}

/// Checks pointwise and integrated agreement of the two functionals on a
/// paired (pure, density) trajectory: max over `n_samples` uniform t of
/// |pure integrand − density integrand|, plus |𝒟 − D|. The caller asserts
/// that `density_spec` is the pointwise ψψ† twin of `pure_spec`.
pub fn compare(
    pure_spec: &TrajectorySpec,
    density_spec: &TrajectorySpec,
    hspec: &HamiltonianSpec,
    cfg: &QuadratureConfig,
    n_samples: usize,
    gauge: &GaugeChoice,
) -> Result<Comparison> {
    let ts = uniform_grid(cfg.t0, cfg.t1, n_samples)?;
    let h_pure = hspec.materialize(pure_spec.params());
    let h_density = hspec.materialize(density_spec.params());
    let gaps = par::try_map(&ts, |&t| {
        let p = pure_integrand_with(&h_pure, pure_spec, gauge, t)?;
        let d = density_integrand_with(&h_density, density_spec, t)?;
        Ok((p - d).abs())
    })?;
    let max_pointwise_gap = gaps.into_iter().fold(0.0, f64::max);

    let pure_report = distance_pure(pure_spec, hspec, cfg, gauge)?;
    let density_report = distance_density(density_spec, hspec, cfg)?;
    Ok(Comparison {
        max_pointwise_gap,
        distance_gap: (pure_report.distance - density_report.distance).abs(),
        pure_distance: pure_report.distance,
        density_distance: density_report.distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{catalog_entry, Cell, TrajectorySpec, Validation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn entry(label: &str) -> (TrajectorySpec, HamiltonianSpec) {
        let e = catalog_entry(label).unwrap();
        (e.trajectory, e.hamiltonian)
    }

    fn stationary_pair() -> (TrajectorySpec, HamiltonianSpec) {
        let cells = vec![
            Cell::real("0.3").unwrap(),
            Cell::real("0").unwrap(),
            Cell::real("0").unwrap(),
            Cell::real("0.7").unwrap(),
        ];
        let spec = TrajectorySpec::density(
            "stationary",
            2,
            cells,
            BTreeMap::new(),
            (0.0, 5.0),
            Validation::Strict,
        )
        .unwrap();
        let h = HamiltonianSpec::new(ComplexMatrix::diag(&[1.0, -1.0]), "diag").unwrap();
        (spec, h)
    }

    #[test]
    fn deviation_vanishes_for_commuting_stationary_state() {
        let rho = ComplexMatrix::diag(&[0.3, 0.7]);
        let rho_dot = ComplexMatrix::zeros(2);
        let h = ComplexMatrix::diag(&[2.0, -2.0]);
        assert_eq!(deviation(&rho, &rho_dot, &h).max_abs_entry(), 0.0);
    }

    #[test]
    fn deviation_matches_trig_family_closed_form() {
        // A = [[−2i cos t sin t, 2iβcos2t − 2λβ sin2t],
        //      [2iβcos2t + 2λβ sin2t, 2i sin t cos t]]
        let (spec, hspec) = entry("ex1");
        let spec = spec.with_param("lambda", 2.0).unwrap();
        let (beta, lambda, t) = (0.5, 2.0, 0.7);
        let (rho, rho_dot) = density_sample(&spec, t).unwrap();
        let a = deviation(&rho, &rho_dot, &hspec.materialize(spec.params()));

        let (s2, c2) = ((2.0 * t).sin(), (2.0 * t).cos());
        let expected = ComplexMatrix::from_rows(&[
            vec![
                c(0.0, -2.0 * t.cos() * t.sin()),
                c(-2.0 * lambda * beta * s2, 2.0 * beta * c2),
            ],
            vec![
                c(2.0 * lambda * beta * s2, 2.0 * beta * c2),
                c(0.0, 2.0 * t.sin() * t.cos()),
            ],
        ])
        .unwrap();
        assert!(a.sub(&expected).max_abs_entry() < 1e-14);
        assert!(a.is_antihermitian_traceless(1e-10));
    }

    #[test]
    fn deviation_matches_offdiag_family_closed_form() {
        // A = [[−i sin2t, 2iβcos2t + λcos2t],[2iβcos2t − λcos2t, i sin2t]]
        let (spec, hspec) = entry("ex2");
        let spec = spec
            .with_param("beta", 0.25)
            .unwrap()
            .with_param("lambda", 1.3)
            .unwrap();
        let (beta, lambda, t) = (0.25, 1.3, 0.9);
        let (rho, rho_dot) = density_sample(&spec, t).unwrap();
        let a = deviation(&rho, &rho_dot, &hspec.materialize(spec.params()));

        let (s2, c2) = ((2.0 * t).sin(), (2.0 * t).cos());
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0, -s2), c(lambda * c2, 2.0 * beta * c2)],
            vec![c(-lambda * c2, 2.0 * beta * c2), c(0.0, s2)],
        ])
        .unwrap();
        assert!(a.sub(&expected).max_abs_entry() < 1e-14);
    }

    #[test]
    fn density_integrand_spot_values() {
        let (ex1, h1) = entry("ex1");
        let v = density_integrand(&ex1, &h1, FRAC_PI_4).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-12);

        let (ex3, h3) = entry("ex3");
        let v = density_integrand(&ex3, &h3, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let (ex2, h2) = entry("ex2");
        let ex2 = ex2.with_param("beta", 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let t = rng.gen_range(0.0..PI);
            let v = density_integrand(&ex2, &h2, t).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "got {v} at t={t}");
        }
    }

    #[test]
    fn optimal_gauge_reproduces_displayed_minimizers() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for lambda in [0.5, 1.0, 2.0] {
            let (psi_spec, hspec) = entry("ex1a-psi");
            let psi_spec = psi_spec.with_param("lambda", lambda).unwrap();
            let h = hspec.materialize(psi_spec.params());
            for _ in 0..30 {
                let t = rng.gen_range(0.0..PI);
                let SampledPoint::Pure { psi, psi_dot, .. } = psi_spec.sample(t).unwrap() else {
                    unreachable!()
                };
                let adot = optimal_gauge_rate(&psi, &psi_dot, &h).unwrap();
                assert!((adot + lambda * (2.0 * t).cos()).abs() < 1e-12);
            }

            let (psi3, hspec3) = entry("ex3a-psi");
            let psi3 = psi3.with_param("lambda", lambda).unwrap();
            let h3 = hspec3.materialize(psi3.params());
            for _ in 0..30 {
                let t = rng.gen_range(-4.0..4.0);
                let SampledPoint::Pure { psi, psi_dot, .. } = psi3.sample(t).unwrap() else {
                    unreachable!()
                };
                let adot = optimal_gauge_rate(&psi, &psi_dot, &h3).unwrap();
                let expected = lambda * (t * t - 1.0) / (t * t + 1.0);
                assert!((adot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn optimal_gauge_is_zero_for_real_state_and_no_hamiltonian() {
        let t = 0.4_f64;
        let psi = ComplexVector::from_real(&[t.cos(), t.sin()]);
        let psi_dot = ComplexVector::from_real(&[-t.sin(), t.cos()]);
        let h = ComplexMatrix::zeros(2);
        assert_eq!(optimal_gauge_rate(&psi, &psi_dot, &h).unwrap(), 0.0);
    }

    #[test]
    fn optimal_gauge_rejects_bad_states() {
        let h = ComplexMatrix::zeros(2);
        let zero = ComplexVector::from_real(&[0.0, 0.0]);
        assert!(optimal_gauge_rate(&zero, &zero, &h).is_err());
        let not_unit = ComplexVector::from_real(&[1.0, 1.0]);
        assert!(optimal_gauge_rate(&not_unit, &zero, &h).is_err());
    }

    #[test]
    fn pure_integrand_spot_values() {
        let (psi1, h1) = entry("ex1a-psi");
        let v = pure_integrand(&psi1, &h1, &GaugeChoice::Optimal, FRAC_PI_4).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-12);

        // zero gauge at t = 0: √(1 + α̇² + λ² + 2α̇λcos2t) = √2
        let v = pure_integrand(&psi1, &h1, &GaugeChoice::Zero, 0.0).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-12);

        let (psi3, h3) = entry("ex3a-psi");
        let v = pure_integrand(&psi3, &h3, &GaugeChoice::Optimal, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_integrand_rejects_density_specs() {
        let (ex1, h1) = entry("ex1");
        assert!(pure_integrand(&ex1, &h1, &GaugeChoice::Optimal, 0.1).is_err());
    }

    #[test]
    fn gauge_minimum_is_a_true_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..500 {
            let raw: Vec<C64> = (0..2)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let v = ComplexVector::new(raw).unwrap();
            let norm = v.norm();
            if norm < 0.1 {
                continue;
            }
            let psi = v.scale(c(1.0 / norm, 0.0));
            let psi_dot = ComplexVector::new(
                (0..2)
                    .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                    .collect(),
            )
            .unwrap();
            let h = {
                let a = rng.gen_range(-1.0..1.0);
                let d = rng.gen_range(-1.0..1.0);
                let off = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                ComplexMatrix::from_rows(&[vec![c(a, 0.0), off], vec![off.conj(), c(d, 0.0)]])
                    .unwrap()
            };
            let best = optimal_gauge_rate(&psi, &psi_dot, &h).unwrap();
            let at_best = pure_residual_norm(&psi, &psi_dot, &h, best);
            for delta in [-1.0, -1e-3, 1e-3, 1.0] {
                let shifted = pure_residual_norm(&psi, &psi_dot, &h, best + delta);
                assert!(at_best <= shifted + 1e-12);
            }
        }
    }

    #[test]
    fn integrate_constant_is_exact() {
        let cfg = QuadratureConfig::new(0.0, 1.0).unwrap();
        let (v, err, evals) = integrate(|_| Ok(1.0), &cfg).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(err, 0.0);
        assert!(evals >= 27);
    }

    #[test]
    fn integrate_handles_kinked_absolute_sine() {
        let cfg = QuadratureConfig::new(0.0, 4.0 * PI).unwrap();
        let (v, err, _) = integrate(|t| Ok((2.0 * t).sin().abs()), &cfg).unwrap();
        assert!((v - 8.0).abs() < 1e-6, "got {v}");
        assert!(err <= cfg.abs_tol);
    }

    #[test]
    fn integrate_matches_frozen_quadrature_value() {
        // ∫₀^π √(1 + sin²2t) dt, pinned beforehand by an independent
        // quadrature at 1e−10.
        let frozen = 3.820197789027712;
        let cfg = QuadratureConfig::new(0.0, PI).unwrap();
        let (v, _, _) = integrate(|t| Ok((1.0 + (2.0 * t).sin().powi(2)).sqrt()), &cfg).unwrap();
        assert!((v - frozen).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn integrate_reports_depth_exhaustion() {
        let mut cfg = QuadratureConfig::new(0.0, 1.0).unwrap();
        cfg.max_depth = 2;
        cfg.abs_tol = 1e-14;
        let r = integrate(|t| Ok((40.0 * t).sin().abs()), &cfg);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn integrate_rejects_non_finite_samples() {
        let cfg = QuadratureConfig::new(0.0, 1.0).unwrap();
        let r = integrate(|t| Ok(if t > 0.4 { f64::NAN } else { 1.0 }), &cfg);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn distance_of_diagonal_family_over_two_periods() {
        let (ex1, h1) = entry("ex1");
        let ex1 = ex1.with_param("beta", 0.0).unwrap();
        let cfg = QuadratureConfig::new(0.0, 4.0 * PI).unwrap();
        let report = distance_density(&ex1, &h1, &cfg).unwrap();
        assert!((report.distance - 8.0).abs() < 1e-6);
        assert!(report.evaluations > 0);
    }

    #[test]
    fn distance_vanishes_for_stationary_commuting_pair() {
        let (spec, h) = stationary_pair();
        let cfg = QuadratureConfig::new(0.0, 5.0).unwrap();
        let report = distance_density(&spec, &h, &cfg).unwrap();
        assert!(report.distance.abs() <= 1e-10);
        // pointwise too
        for t in [0.0, 1.2, 4.9] {
            assert!(
                density_integrand_with(&h.materialize(spec.params()), &spec, t)
                    .unwrap()
                    .abs()
                    <= 1e-10
            );
        }
    }

    #[test]
    fn fixed_gauge_at_displayed_minimizer_matches_optimal() {
        let (psi1, h1) = entry("ex1a-psi");
        let cfg = QuadratureConfig::new(0.0, PI).unwrap();
        let optimal = distance_pure(&psi1, &h1, &cfg, &GaugeChoice::Optimal).unwrap();
        let fixed = GaugeChoice::Fixed(expr::parse("-lambda*cos(2*t)").unwrap());
        let pinned = distance_pure(&psi1, &h1, &cfg, &fixed).unwrap();
        assert!((optimal.distance - pinned.distance).abs() < 1e-10);
    }

    #[test]
    fn compare_pure_and_density_routes() {
        let (psi1, h1) = entry("ex1a-psi");
        let ex1 = catalog_entry("ex1").unwrap().trajectory;
        let cfg = QuadratureConfig::new(0.0, PI).unwrap();
        let cmp = compare(&psi1, &ex1, &h1, &cfg, 200, &GaugeChoice::Optimal).unwrap();
        assert!(
            cmp.max_pointwise_gap <= 1e-9,
            "gap {}",
            cmp.max_pointwise_gap
        );
        assert!(cmp.distance_gap <= 1e-8);

        // degenerate case: stationary state against itself, H = 0
        let h0 = HamiltonianSpec::new(ComplexMatrix::zeros(2), "zero").unwrap();
        let e0 = TrajectorySpec::pure_state(
            "stationary-psi",
            2,
            vec![Cell::real("1").unwrap(), Cell::real("0").unwrap()],
            BTreeMap::new(),
            (0.0, 1.0),
            Validation::Strict,
        )
        .unwrap();
        let cfg0 = QuadratureConfig::new(0.0, 1.0).unwrap();
        let cmp0 = compare(&e0, &e0, &h0, &cfg0, 50, &GaugeChoice::Optimal).unwrap();
        assert_eq!(cmp0.max_pointwise_gap, 0.0);
        assert_eq!(cmp0.distance_gap, 0.0);
    }

    #[test]
    fn nonnegative_integrands_and_antihermitian_deviations() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for label in ["ex1", "ex2", "ex3", "ex4"] {
            let (spec, h) = entry(label);
            let hm = h.materialize(spec.params());
            let (t0, t1) = spec.interval();
            for _ in 0..50 {
                let t = rng.gen_range(t0..t1);
                assert!(density_integrand(&spec, &h, t).unwrap() >= 0.0);
                let (rho, rho_dot) = density_sample(&spec, t).unwrap();
                assert!(deviation(&rho, &rho_dot, &hm).is_antihermitian_traceless(1e-10));
            }
            let cfg = QuadratureConfig::new(t0, t1).unwrap();
            assert!(distance_density(&spec, &h, &cfg).unwrap().distance >= 0.0);
        }
    }

    #[test]
    fn curves_carry_uniform_strictly_increasing_grid() {
        let (ex1, h1) = entry("ex1");
        let curve = density_curve(&ex1, &h1, 0.0, PI, 9).unwrap();
        assert_eq!(curve.len(), 9);
        assert_eq!(curve[0].0, 0.0);
        assert_eq!(curve[8].0, PI);
        for w in curve.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
        assert!(density_curve(&ex1, &h1, 0.0, PI, 1).is_err());
    }

    #[test]
    fn parallel_and_sequential_curves_are_bit_identical() {
        let (ex3, h3) = entry("ex3");
        let a = density_curve(&ex3, &h3, -4.0, 4.0, 501).unwrap();
        let b = density_curve_seq(&ex3, &h3, -4.0, 4.0, 501).unwrap();
        assert_eq!(a.len(), b.len());
        for ((ta, va), (tb, vb)) in a.iter().zip(&b) {
            assert_eq!(ta.to_bits(), tb.to_bits());
            assert_eq!(va.to_bits(), vb.to_bits());
        }

        let (psi1, h1) = entry("ex1a-psi");
        let g = GaugeChoice::Optimal;
        let a = pure_curve(&psi1, &h1, &g, 0.0, PI, 301).unwrap();
        let b = pure_curve_seq(&psi1, &h1, &g, 0.0, PI, 301).unwrap();
        for ((ta, va), (tb, vb)) in a.iter().zip(&b) {
            assert_eq!(ta.to_bits(), tb.to_bits());
            assert_eq!(va.to_bits(), vb.to_bits());
        }
    }

    #[test]
    fn reports_can_carry_curves() {
        let (ex1, h1) = entry("ex1");
        let cfg = QuadratureConfig::new(0.0, PI).unwrap();
        let report = distance_density_with_curve(&ex1, &h1, &cfg, 33).unwrap();
        let curve = report.curve.unwrap();
        assert_eq!(curve.len(), 33);

        let (psi1, hp) = entry("ex1a-psi");
        let report = distance_pure_with_curve(&psi1, &hp, &cfg, &GaugeChoice::Optimal, 17).unwrap();
        assert_eq!(report.curve.unwrap().len(), 17);
    }
}
