//! Gauge-orbit descent to a prescribed real moment level.
//!
//! Each step moves along `g = exp(s X)` with `X` hermitian in the Lie
//! algebra of the chosen subgroup, minimising
//! `f = sum_i ||P(mu_R,i - tau_i I)||^2` where `P` projects onto that Lie
//! algebra. Directions are Newton steps on the linearised moment map (with a
//! gradient fallback) and step sizes come from Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, frob, frob_sq, real, real_inner, split_trace, CMat, ONE};
use crate::moment::{complex_parts, real_parts};
use crate::quiver::{act_gauge, GaugeElement, Quiver, SubgroupTag};

pub use crate::stability::{polystable_test, Certificate, CertificateBlock, StabilityOptions, StabilityStatus, StabilityVerdict};

/// Which gauge subgroup the flow runs in: `H = prod SU(n_i)`,
/// `HT` its maximal torus, `TildeH = prod U(n_i)` and `TildeHT` its torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeSubgroup {
    H,
    HT,
    TildeH,
    TildeHT,
}

impl GaugeSubgroup {
    fn is_torus(self) -> bool {
        matches!(self, GaugeSubgroup::HT | GaugeSubgroup::TildeHT)
    }

    fn is_special(self) -> bool {
        matches!(self, GaugeSubgroup::H | GaugeSubgroup::HT)
    }

    pub fn complex_tag(self) -> SubgroupTag {
        match self {
            GaugeSubgroup::H => SubgroupTag::SL,
            GaugeSubgroup::TildeH => SubgroupTag::GL,
            GaugeSubgroup::HT | GaugeSubgroup::TildeHT => SubgroupTag::TorusC,
        }
    }

    /// Orthogonal projection of a hermitian matrix onto the Lie algebra.
    pub fn project(self, m: &CMat) -> CMat {
        let mut out = if self.is_torus() {
            let d: Vec<_> = (0..m.nrows()).map(|i| m[(i, i)]).collect();
            linalg::diag(&d)
        } else {
            m.clone()
        };
        if self.is_special() {
            out = split_trace(&out).0;
        }
        out
    }

    /// A real basis of the hermitian part of the Lie algebra on a node of size `m`.
    fn basis(self, m: usize) -> Vec<CMat> {
        let mut out = Vec::new();
        if self.is_special() {
            for k in 0..m.saturating_sub(1) {
                let mut b = linalg::zeros(m, m);
                b[(k, k)] = ONE;
                b[(k + 1, k + 1)] = -ONE;
                out.push(b);
            }
        } else {
            for k in 0..m {
                let mut b = linalg::zeros(m, m);
                b[(k, k)] = ONE;
                out.push(b);
            }
        }
        if !self.is_torus() {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for k in 0..m {
                for l in (k + 1)..m {
                    let mut b = linalg::zeros(m, m);
                    b[(k, l)] = real(s);
                    b[(l, k)] = real(s);
                    out.push(b);
                    let mut b = linalg::zeros(m, m);
                    b[(k, l)] = c(0.0, s);
                    b[(l, k)] = c(0.0, -s);
                    out.push(b);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Newton,
    Gradient,
}

/// Armijo backtracking parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub initial: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            initial: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub step: StepPolicy,
    pub subgroup: GaugeSubgroup,
    pub direction: Direction,
    /// Allowed complex moment residual in hyperkähler mode, relative to `max(1, ||q||^2)`.
    pub precondition_tol: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-10,
            step: StepPolicy::default(),
            subgroup: GaugeSubgroup::TildeH,
            direction: Direction::Newton,
            precondition_tol: 1e-9,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.step.shrink > 0.0 && self.step.shrink < 1.0) || !(self.step.initial > 0.0) {
            return Err(Error::InvalidArgument("invalid step policy".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Max over nodes of `||P(mu_R - tau I)||_F` at the returned quiver.
    pub final_residual: f64,
    /// Objective after each accepted step, starting with the initial value.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl SolverReport {
    pub fn is_monotone(&self) -> bool {
        self.objective_trace.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub quiver: Quiver,
    /// `quiver = act_gauge(input, gauge)`.
    pub gauge: GaugeElement,
    pub report: SolverReport,
}

struct Problem<'a> {
    target: &'a [f64],
    subgroup: GaugeSubgroup,
}

impl Problem<'_> {
    fn residuals(&self, q: &Quiver) -> Vec<CMat> {
        real_parts(q.alpha(), q.beta())
            .iter()
            .zip(self.target)
            .map(|(m, &t)| {
                let shifted = m - linalg::eye(m.nrows()) * real(t);
                self.subgroup.project(&shifted)
            })
            .collect()
    }

    fn objective(r: &[CMat]) -> f64 {
        r.iter().map(frob_sq).sum()
    }

    fn max_norm(r: &[CMat]) -> f64 {
        r.iter().map(frob).fold(0.0, f64::max)
    }

    /// Derivative of the projected real moment along the infinitesimal
    /// action of hermitian `x` (one block per gauge node).
    fn linearized(&self, q: &Quiver, x: &[CMat]) -> Vec<CMat> {
        let edges = x.len();
        let alpha = q.alpha();
        let xi_alpha: Vec<CMat> = (0..edges)
            .map(|i| {
                let mut d = -(&alpha[i] * &x[i]);
                if i + 1 < edges {
                    d += &x[i + 1] * &alpha[i];
                }
                d
            })
            .collect();
        let xi_beta: Option<Vec<CMat>> = q.beta().map(|beta| {
            (0..edges)
                .map(|i| {
                    let mut d = &x[i] * &beta[i];
                    if i + 1 < edges {
                        d -= &beta[i] * &x[i + 1];
                    }
                    d
                })
                .collect()
        });
        let plus_a: Vec<CMat> = alpha.iter().zip(&xi_alpha).map(|(a, d)| a + d).collect();
        let minus_a: Vec<CMat> = alpha.iter().zip(&xi_alpha).map(|(a, d)| a - d).collect();
        let (plus_b, minus_b) = match (q.beta(), &xi_beta) {
            (Some(beta), Some(xb)) => (
                Some(beta.iter().zip(xb).map(|(b, d)| b + d).collect::<Vec<_>>()),
                Some(beta.iter().zip(xb).map(|(b, d)| b - d).collect::<Vec<_>>()),
            ),
            _ => (None, None),
        };
        // the real moment is quadratic, so polarisation is exact
        let mp = real_parts(&plus_a, plus_b.as_deref());
        let mm = real_parts(&minus_a, minus_b.as_deref());
        mp.iter()
            .zip(&mm)
            .map(|(p, m)| self.subgroup.project(&((p - m) * real(0.5))))
            .collect()
    }

    fn newton_direction(&self, q: &Quiver, r: &[CMat]) -> Vec<CMat> {
        let sizes: Vec<usize> = r.iter().map(|m| m.nrows()).collect();
        let mut basis: Vec<(usize, CMat)> = Vec::new();
        for (node, &m) in sizes.iter().enumerate() {
            for b in self.subgroup.basis(m) {
                basis.push((node, b));
            }
        }
        let k = basis.len();
        let embed = |node: usize, b: &CMat| -> Vec<CMat> {
            sizes
                .iter()
                .enumerate()
                .map(|(i, &m)| if i == node { b.clone() } else { linalg::zeros(m, m) })
                .collect()
        };
        let images: Vec<Vec<CMat>> = basis
            .iter()
            .map(|(node, b)| self.linearized(q, &embed(*node, b)))
            .collect();
        let mut a = linalg::zeros(k, k);
        let mut rhs = linalg::zeros(k, 1);
        for (row, (node, b)) in basis.iter().enumerate() {
            for (col, img) in images.iter().enumerate() {
                a[(row, col)] = real(real_inner(b, &img[*node]));
            }
            rhs[(row, 0)] = real(-real_inner(b, &r[*node]));
        }
        let coeffs = linalg::pinv(&a) * rhs;
        let mut x: Vec<CMat> = sizes.iter().map(|&m| linalg::zeros(m, m)).collect();
        for (idx, (node, b)) in basis.iter().enumerate() {
            x[*node] += b * real(coeffs[(idx, 0)].re);
        }
        x
    }

    fn slope(&self, q: &Quiver, r: &[CMat], x: &[CMat]) -> f64 {
        let jx = self.linearized(q, x);
        2.0 * r.iter().zip(&jx).map(|(a, b)| real_inner(a, b)).sum::<f64>()
    }
}

fn exp_blocks(x: &[CMat], s: f64) -> Vec<CMat> {
    x.iter().map(|b| linalg::expm_hermitian(&(b * real(s)))).collect()
}

/// Moves `q` along its complexified gauge orbit until the real moment map
/// equals `target_levels` (projected onto the chosen subgroup).
pub fn solve_real_moment(q: &Quiver, target_levels: &[f64], opts: &SolveOptions) -> Result<Solution> {
    opts.validate()?;
    let edges = q.dv().edges();
    if target_levels.len() != edges {
        return Err(Error::ShapeMismatch(format!(
            "{} target levels for {edges} gauge nodes",
            target_levels.len()
        )));
    }
    let scale = q.norm_sq().max(1.0);
    if let Some(beta) = q.beta() {
        let worst = complex_parts(q.alpha(), beta)
            .iter()
            .map(|m| frob(&split_trace(m).0))
            .fold(0.0, f64::max);
        if worst > opts.precondition_tol * scale {
            return Err(Error::PreconditionViolated(format!(
                "complex moment residual {worst:.3e} is off-level"
            )));
        }
    }
    if opts.subgroup.is_special() {
        let levels = crate::moment::moment(q).levels_real;
        for (i, (&l, &t)) in levels.iter().zip(target_levels).enumerate() {
            if (l - t).abs() > opts.tol.max(1e-12 * scale) {
                return Err(Error::PreconditionViolated(format!(
                    "level {i} is {l}, target {t}: special unitary gauge cannot change levels"
                )));
            }
        }
    }

    let problem = Problem {
        target: target_levels,
        subgroup: opts.subgroup,
    };
    let tag = opts.subgroup.complex_tag();
    let mut current = q.clone();
    let mut total: Vec<CMat> = q.dv().dims()[..edges].iter().map(|&d| linalg::eye(d)).collect();
    let mut r = problem.residuals(&current);
    let mut f = Problem::objective(&r);
    let mut trace = vec![f];
    let mut iterations = 0;

    let finish = |current: Quiver, total: Vec<CMat>, r: &[CMat], trace: Vec<f64>, iterations, converged| Solution {
        quiver: current,
        gauge: GaugeElement::from_blocks_unchecked(total, tag),
        report: SolverReport {
            iterations,
            final_residual: Problem::max_norm(r),
            objective_trace: trace,
            converged,
        },
    };

    while Problem::max_norm(&r) > opts.tol {
        if iterations >= opts.max_iters {
            let sol = finish(current, total, &r, trace, iterations, false);
            return Err(Error::MaxIters(Box::new(sol)));
        }
        let mut accepted = None;
        let mut directions = Vec::new();
        if opts.direction == Direction::Newton {
            directions.push(problem.newton_direction(&current, &r));
        }
        directions.push(r.clone());
        for x in directions {
            let slope = problem.slope(&current, &r, &x);
            if !(slope < 0.0) {
                continue;
            }
            let mut s = opts.step.initial;
            for _ in 0..opts.step.max_backtracks {
                let blocks = exp_blocks(&x, s);
                let step = GaugeElement::from_blocks_unchecked(blocks.clone(), tag);
                let trial = act_gauge(&current, &step)?;
                let tr = problem.residuals(&trial);
                let tf = Problem::objective(&tr);
                if tf.is_finite() && tf <= f + opts.step.armijo * s * slope {
                    accepted = Some((trial, tr, tf, blocks));
                    break;
                }
                s *= opts.step.shrink;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((trial, tr, tf, blocks)) = accepted else {
            let sol = finish(current, total, &r, trace, iterations, false);
            return Err(Error::SolverFailed(format!(
                "line search stalled at residual {:.3e} after {} iterations",
                sol.report.final_residual, sol.report.iterations
            )));
        };
        total = blocks.iter().zip(&total).map(|(g, t)| g * t).collect();
        current = trial;
        r = tr;
        f = tf;
        trace.push(f);
        iterations += 1;
    }
    Ok(finish(current, total, &r, trace, iterations, true))
}
