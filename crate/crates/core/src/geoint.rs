//! Lie group integrators on the unit sphere, with `SO(3)` acting by rotation.
//!
//! An ODE `y' = f(y)·y` on `S²` is given by an angular velocity field
//! `ω: S² → R³`, with `f(y) = hat(ω(y)) ∈ so(3)`. Every update multiplies by a
//! rotation matrix, so points stay on the sphere up to roundoff.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lbseries::Method;

/// A unit vector in `R³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    /// Normalizes `v`, which must be nonzero and finite.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(format!("cannot normalize {v:?}")));
        }
        Ok(SpherePoint(v / norm))
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// `|‖y‖ - 1|`.
    pub fn norm_defect(&self) -> f64 {
        (self.0.norm() - 1.0).abs()
    }

    pub fn rotate(&self, r: &Matrix3<f64>) -> SpherePoint {
        SpherePoint(r * self.0)
    }
}

/// Angular velocity field; `f(y)·y = ω(y) × y`.
pub trait AngularField {
    fn omega(&self, y: &Vector3<f64>) -> Vector3<f64>;
}

impl<F> AngularField for F
where
    F: Fn(&Vector3<f64>) -> Vector3<f64>,
{
    fn omega(&self, y: &Vector3<f64>) -> Vector3<f64> {
        self(y)
    }
}

/// Free rigid body on the momentum sphere: `ω(y) = (y₁/I₁, y₂/I₂, y₃/I₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBody {
    pub inertia: Vector3<f64>,
}

impl Default for RigidBody {
    fn default() -> Self {
        RigidBody {
            inertia: Vector3::new(1.0, 2.0, 3.0),
        }
    }
}

impl AngularField for RigidBody {
    fn omega(&self, y: &Vector3<f64>) -> Vector3<f64> {
        y.component_div(&self.inertia)
    }
}

/// The rigid-body test problem's initial point `(1,1,1)/√3`.
pub fn rigid_body_start() -> SpherePoint {
    SpherePoint::new(Vector3::new(1.0, 1.0, 1.0)).expect("nonzero")
}

/// Skew matrix with `hat(w)·v = w × v`.
pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// `exp(hat(w))` by the Rodrigues formula; Taylor coefficients below
/// `θ = 1e-6`.
pub fn rot_exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-6 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(w);
    Matrix3::identity() + k * a + (k * k) * b
}

fn check_step(h: f64) -> Result<()> {
    if !h.is_finite() || h == 0.0 {
        return Err(Error::InvalidStep(format!("step must be finite and nonzero, got {h}")));
    }
    Ok(())
}

/// `y₁ = exp(h f(y₀))·y₀`.
pub fn step_lie_euler<F: AngularField + ?Sized>(f: &F, y0: &SpherePoint, h: f64) -> Result<SpherePoint> {
    check_step(h)?;
    Ok(y0.rotate(&rot_exp(&(f.omega(&y0.0) * h))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointOptions {
    pub tol: f64,
    pub maxit: usize,
}

impl Default for MidpointOptions {
    fn default() -> Self {
        MidpointOptions { tol: 1e-13, maxit: 50 }
    }
}

/// Result of one implicit midpoint step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointStep {
    pub point: SpherePoint,
    pub iterations: usize,
    pub residual: f64,
}

/// `K = h f(exp(K/2)·y₀)` solved by fixed-point iteration from `K = h f(y₀)`,
/// then `y₁ = exp(K)·y₀`.
pub fn step_lie_midpoint_detailed<F: AngularField + ?Sized>(
    f: &F,
    y0: &SpherePoint,
    h: f64,
    opts: MidpointOptions,
) -> Result<MidpointStep> {
    check_step(h)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let mut k = f.omega(&y0.0) * h;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.maxit {
        let next = f.omega(&(rot_exp(&(k * 0.5)) * y0.0)) * h;
        residual = (next - k).norm();
        k = next;
        if residual <= opts.tol {
            return Ok(MidpointStep {
                point: y0.rotate(&rot_exp(&k)),
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.maxit,
        residual,
    })
}

pub fn step_lie_midpoint<F: AngularField + ?Sized>(
    f: &F,
    y0: &SpherePoint,
    h: f64,
    tol: f64,
    maxit: usize,
) -> Result<SpherePoint> {
    step_lie_midpoint_detailed(f, y0, h, MidpointOptions { tol, maxit }).map(|s| s.point)
}

pub fn step<F: AngularField + ?Sized>(method: Method, f: &F, y0: &SpherePoint, h: f64) -> Result<SpherePoint> {
    match method {
        Method::LieEuler => step_lie_euler(f, y0, h),
        Method::LieMidpoint => step_lie_midpoint_detailed(f, y0, h, MidpointOptions::default()).map(|s| s.point),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<SpherePoint>,
}

impl Trajectory {
    pub fn last(&self) -> &SpherePoint {
        self.points.last().expect("trajectory holds the initial point")
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.points.iter().map(SpherePoint::norm_defect).fold(0.0, f64::max)
    }

    /// Columns `t, y1, y2, y3, norm_defect`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "y1", "y2", "y3", "norm_defect"]).map_err(io)?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let y = p.vector();
            w.write_record(&[
                t.to_string(),
                y.x.to_string(),
                y.y.to_string(),
                y.z.to_string(),
                p.norm_defect().to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
    }
}

/// `steps` steps of size `h` from `y0`; `t_k = k h`.
pub fn integrate<F: AngularField + ?Sized>(
    method: Method,
    f: &F,
    y0: &SpherePoint,
    h: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_step(h)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(*y0);
    let mut y = *y0;
    for k in 1..=steps {
        y = step(method, f, &y, h)?;
        times.push(k as f64 * h);
        points.push(y);
    }
    Ok(Trajectory { times, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error is zero.
    pub slope: Option<f64>,
    pub max_norm_defect: f64,
}

fn steps_for(horizon: f64, h: f64) -> Result<usize> {
    let n = horizon / h;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::DegenerateSteps(format!("step {h} does not divide horizon {horizon}")));
    }
    Ok(rounded as usize)
}

/// Least-squares slope of `log(error)` against `log(h)`, with errors taken
/// at `horizon` against the same method run at `min(h)/64`.
pub fn convergence_order<F: AngularField + ?Sized>(
    f: &F,
    y0: &SpherePoint,
    horizon: f64,
    method: Method,
    h_list: &[f64],
) -> Result<ConvergenceReport> {
    if h_list.len() < 3 {
        return Err(Error::DegenerateSteps(format!("need at least 3 step sizes, got {}", h_list.len())));
    }
    if h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::DegenerateSteps("step sizes must be positive".into()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateSteps("step sizes must be strictly decreasing".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::DegenerateSteps(format!("horizon must be positive, got {horizon}")));
    }
    let counts = h_list
        .iter()
        .map(|&h| steps_for(horizon, h))
        .collect::<Result<Vec<_>>>()?;

    let h_ref = h_list[h_list.len() - 1] / 64.0;
    let reference = integrate(method, f, y0, h_ref, steps_for(horizon, h_ref)?)?;
    let mut max_defect = reference.max_norm_defect();
    let target = reference.last().vector();

    let mut errors = Vec::with_capacity(h_list.len());
    for (&h, &n) in h_list.iter().zip(&counts) {
        let run = integrate(method, f, y0, h, n)?;
        max_defect = max_defect.max(run.max_norm_defect());
        errors.push((run.last().vector() - target).norm());
    }

    let slope = if errors.iter().all(|&e| e == 0.0) {
        None
    } else if errors.iter().any(|&e| e == 0.0) {
        return Err(Error::DegenerateSteps("some but not all errors vanish".into()));
    } else {
        let xs: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    };

    Ok(ConvergenceReport {
        method: method.name().to_string(),
        h: h_list.to_vec(),
        errors,
        slope,
        max_norm_defect: max_defect,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
