//! Bound-constrained derivative-free Gauss-Newton trust-region solver for nonlinear least squares.
//!
//! Each residual is modelled as a linear function interpolating `n + 1` points; the step solves
//! the Gauss-Newton model inside a trust region intersected with the bounds. Two radii are kept:
//! the trust region `delta` and a lower resolution `rho` that is only ever reduced.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Residual entries that are not finite are replaced by this value.
pub const NON_FINITE_RESIDUAL: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfoOptions {
    /// Evaluation budget; `None` means 100 per variable.
    pub max_evals: Option<usize>,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Stop once the sum of squares drops below this.
    pub objective_floor: f64,
}

impl Default for DfoOptions {
    fn default() -> Self {
        Self {
            max_evals: None,
            rho_begin: 0.1,
            rho_end: 1e-8,
            objective_floor: 1e-24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    RadiusConverged,
    SmallObjective,
    MaxEvals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfoResult {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub objective: f64,
    pub evals: usize,
    /// Best objective after each evaluation.
    pub trace: Vec<f64>,
    pub status: SolverStatus,
}

impl DfoResult {
    pub fn residual_norm(&self) -> f64 {
        self.objective.sqrt()
    }
}

struct Evaluator<F> {
    f: F,
    evals: usize,
    budget: usize,
    best: f64,
    trace: Vec<f64>,
    len: Option<usize>,
}

impl<F: FnMut(&[f64]) -> Vec<f64>> Evaluator<F> {
    fn call(&mut self, x: &DVector<f64>) -> Result<(DVector<f64>, f64), SolverError> {
        let mut r = (self.f)(x.as_slice());
        match self.len {
            None => self.len = Some(r.len()),
            Some(m) if m != r.len() => {
                return Err(SolverError::ResidualLength {
                    expected: m,
                    got: r.len(),
                })
            }
            _ => {}
        }
        if r.is_empty() {
            return Err(SolverError::ResidualLength { expected: 1, got: 0 });
        }
        for v in &mut r {
            if !v.is_finite() {
                log::warn!("non-finite residual at {:?}", x.as_slice());
                *v = NON_FINITE_RESIDUAL;
            }
        }
        let r = DVector::from_vec(r);
        let obj = r.norm_squared();
        self.evals += 1;
        self.best = self.best.min(obj);
        self.trace.push(self.best);
        Ok((r, obj))
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }
}

struct Sample {
    x: DVector<f64>,
    r: DVector<f64>,
    obj: f64,
}

/// Interpolation set with the index of its best point.
struct Model {
    samples: Vec<Sample>,
    best: usize,
}

impl Model {
    fn center(&self) -> &Sample {
        &self.samples[self.best]
    }

    /// Indices of the non-center points, in row order of the displacement matrix.
    fn others(&self) -> Vec<usize> {
        (0..self.samples.len()).filter(|&i| i != self.best).collect()
    }

    /// Rows are displacements of the other points from the center.
    fn displacements(&self) -> DMatrix<f64> {
        let idx = self.others();
        let c = &self.center().x;
        let n = c.len();
        DMatrix::from_fn(idx.len(), n, |i, j| self.samples[idx[i]].x[j] - c[j])
    }

    /// Jacobian of the linear interpolant, `m x n`.
    fn jacobian(&self, w_inv: &DMatrix<f64>) -> DMatrix<f64> {
        let idx = self.others();
        let c = &self.center().r;
        let dr = DMatrix::from_fn(idx.len(), c.len(), |i, j| self.samples[idx[i]].r[j] - c[j]);
        (w_inv * dr).transpose()
    }

    fn distance(&self, i: usize) -> f64 {
        (&self.samples[i].x - &self.center().x).norm()
    }

    fn farthest(&self) -> (usize, f64) {
        self.others()
            .into_iter()
            .map(|i| (i, self.distance(i)))
            .fold((usize::MAX, 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }

    fn replace(&mut self, i: usize, s: Sample) {
        let better = s.obj < self.center().obj;
        self.samples[i] = s;
        if better {
            self.best = i;
        }
    }
}

/// Minimize `sum r(x)^2` over the box `[lower, upper]` starting from `x0`.
pub fn solve<F>(f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &DfoOptions) -> Result<DfoResult, SolverError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    if n == 0 || lower.len() != n || upper.len() != n {
        return Err(SolverError::Dimension);
    }
    for i in 0..n {
        if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
            return Err(SolverError::Bounds(i));
        }
        if !(lower[i] <= x0[i] && x0[i] <= upper[i]) {
            return Err(SolverError::StartOutside(i));
        }
    }
    let budget = opts.max_evals.unwrap_or(100 * n);
    if budget < n + 1 {
        return Err(SolverError::Budget { budget, needed: n + 1 });
    }
    let lo = DVector::from_column_slice(lower);
    let hi = DVector::from_column_slice(upper);
    let min_width = (&hi - &lo).min();
    let mut rho = opts.rho_begin.min(0.5 * min_width);
    let rho_end = opts.rho_end.min(rho);
    let mut delta = rho;

    let mut ev = Evaluator {
        f,
        evals: 0,
        budget,
        best: f64::INFINITY,
        trace: Vec::with_capacity(budget),
        len: None,
    };

    let start = DVector::from_column_slice(x0);
    let mut model = initial_model(&mut ev, &start, &lo, &hi, rho)?;

    let status = loop {
        if model.center().obj <= opts.objective_floor {
            break SolverStatus::SmallObjective;
        }
        if ev.exhausted() {
            break SolverStatus::MaxEvals;
        }
        let Some(w_inv) = model.displacements().try_inverse() else {
            log::debug!("degenerate interpolation set; rebuilding");
            let c = model.center().x.clone();
            model = rebuild(&mut ev, model, &c, &lo, &hi, delta)?;
            continue;
        };
        let jac = model.jacobian(&w_inv);
        let xk = model.center().x.clone();
        let rk = model.center().r.clone();
        let g = jac.transpose() * &rk;
        let h = jac.transpose() * &jac;
        let step = trust_region_step(&g, &h, delta, &(&lo - &xk), &(&hi - &xk));
        let snorm = step.norm();

        if snorm < 0.5 * rho {
            // the model sees no progress at this resolution
            delta = (0.5 * delta).max(rho);
            let (far, dist) = model.farthest();
            if dist > 2.0 * rho.max(delta) && far != usize::MAX {
                geometry_step(&mut ev, &mut model, &w_inv, far, delta, &lo, &hi)?;
                continue;
            }
            if rho <= rho_end {
                break SolverStatus::RadiusConverged;
            }
            (rho, delta) = reduce(rho, rho_end);
            continue;
        }

        let xnew = &xk + &step;
        let (rnew, fnew) = ev.call(&xnew)?;
        let q = g.dot(&step) + 0.5 * step.dot(&(&h * &step));
        let predicted = -2.0 * q;
        let ratio = if predicted > 0.0 {
            (model.center().obj - fnew) / predicted
        } else {
            -1.0
        };

        delta = if ratio < 0.1 {
            (0.5 * delta).min(snorm)
        } else if ratio <= 0.7 {
            (0.5 * delta).max(snorm)
        } else {
            (2.0 * delta).max(2.0 * snorm).min(1e10)
        };
        if delta <= 1.5 * rho {
            delta = rho;
        }

        let t = replacement_index(&model, &w_inv, &step, delta, fnew < model.center().obj);
        model.replace(
            t,
            Sample {
                x: xnew,
                r: rnew,
                obj: fnew,
            },
        );

        if ratio < 0.1 {
            let (far, dist) = model.farthest();
            if dist > 2.0 * delta && far != usize::MAX && !ev.exhausted() {
                if let Some(w_inv) = model.displacements().try_inverse() {
                    geometry_step(&mut ev, &mut model, &w_inv, far, delta, &lo, &hi)?;
                }
            } else if delta <= rho && snorm <= rho {
                if rho <= rho_end {
                    break SolverStatus::RadiusConverged;
                }
                (rho, delta) = reduce(rho, rho_end);
            }
        }
    };

    let best = model.center();
    Ok(DfoResult {
        x: best.x.iter().copied().collect(),
        residuals: best.r.iter().copied().collect(),
        objective: best.obj,
        evals: ev.evals,
        trace: ev.trace,
        status,
    })
}

fn reduce(rho: f64, rho_end: f64) -> (f64, f64) {
    let next = if rho > 250.0 * rho_end {
        0.1 * rho
    } else if rho > 16.0 * rho_end {
        (rho * rho_end).sqrt()
    } else {
        rho_end
    };
    (next, (0.5 * rho).max(next))
}

/// Coordinate step of length `h` that stays inside the box, preferring the positive side.
fn coordinate_offset(x: f64, lo: f64, hi: f64, h: f64) -> f64 {
    if x + h <= hi {
        h
    } else if x - h >= lo {
        -h
    } else if hi - x >= x - lo {
        hi - x
    } else {
        lo - x
    }
}

fn initial_model<F: FnMut(&[f64]) -> Vec<f64>>(
    ev: &mut Evaluator<F>,
    x0: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    h: f64,
) -> Result<Model, SolverError> {
    let (r, obj) = ev.call(x0)?;
    let mut samples = vec![Sample { x: x0.clone(), r, obj }];
    for i in 0..x0.len() {
        let mut x = x0.clone();
        x[i] += coordinate_offset(x0[i], lo[i], hi[i], h);
        let (r, obj) = ev.call(&x)?;
        samples.push(Sample { x, r, obj });
    }
    let best = (0..samples.len())
        .min_by(|&a, &b| samples[a].obj.total_cmp(&samples[b].obj))
        .unwrap_or(0);
    Ok(Model { samples, best })
}

/// Replace every point but the center with coordinate steps of length `h`.
fn rebuild<F: FnMut(&[f64]) -> Vec<f64>>(
    ev: &mut Evaluator<F>,
    model: Model,
    center: &DVector<f64>,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    h: f64,
) -> Result<Model, SolverError> {
    let keep = model
        .samples
        .into_iter()
        .nth(model.best)
        .ok_or(SolverError::Dimension)?;
    let mut samples = vec![keep];
    for i in 0..center.len() {
        if ev.exhausted() {
            return Err(SolverError::DegenerateAtBudget);
        }
        let mut x = center.clone();
        x[i] += coordinate_offset(center[i], lo[i], hi[i], h);
        let (r, obj) = ev.call(&x)?;
        samples.push(Sample { x, r, obj });
    }
    let best = (0..samples.len())
        .min_by(|&a, &b| samples[a].obj.total_cmp(&samples[b].obj))
        .unwrap_or(0);
    Ok(Model { samples, best })
}

/// Lagrange values of the new point at displacement `d` for every interpolation point.
fn lagrange_values(model: &Model, w_inv: &DMatrix<f64>, d: &DVector<f64>) -> Vec<(usize, f64)> {
    let c = w_inv.transpose() * d;
    let others = model.others();
    let mut out: Vec<(usize, f64)> = others.iter().zip(c.iter()).map(|(&i, &v)| (i, v)).collect();
    out.push((model.best, 1.0 - c.sum()));
    out
}

fn replacement_index(
    model: &Model,
    w_inv: &DMatrix<f64>,
    d: &DVector<f64>,
    delta: f64,
    can_drop_center: bool,
) -> usize {
    let mut best = (usize::MAX, -1.0);
    for (i, l) in lagrange_values(model, w_inv, d) {
        if i == model.best && !can_drop_center {
            continue;
        }
        let dist = model.distance(i);
        let score = l.abs() * (dist / delta).powi(2).max(1.0);
        if score > best.1 {
            best = (i, score);
        }
    }
    best.0
}

/// Move point `t` to where its Lagrange function is largest within radius `delta`.
fn geometry_step<F: FnMut(&[f64]) -> Vec<f64>>(
    ev: &mut Evaluator<F>,
    model: &mut Model,
    w_inv: &DMatrix<f64>,
    t: usize,
    delta: f64,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> Result<(), SolverError> {
    let row = model
        .others()
        .iter()
        .position(|&i| i == t)
        .ok_or(SolverError::Dimension)?;
    let v = w_inv.column(row).into_owned();
    let vn = v.norm();
    if !(vn > 0.0) {
        return Ok(());
    }
    let xk = model.center().x.clone();
    let clip = |d: DVector<f64>| DVector::from_fn(d.len(), |i, _| d[i].clamp(lo[i] - xk[i], hi[i] - xk[i]));
    let plus = clip(&v * (delta / vn));
    let minus = clip(&v * (-delta / vn));
    let d = if v.dot(&plus).abs() >= v.dot(&minus).abs() {
        plus
    } else {
        minus
    };
    if d.norm() == 0.0 {
        return Ok(());
    }
    let x = &xk + d;
    let (r, obj) = ev.call(&x)?;
    model.replace(t, Sample { x, r, obj });
    Ok(())
}

fn model_value(g: &DVector<f64>, h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * s.dot(&(h * s))
}

/// Approximate minimizer of `g.s + s.H.s/2` with `|s| <= delta` and `lo <= s <= hi`.
pub(crate) fn trust_region_step(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    delta: f64,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
) -> DVector<f64> {
    let n = g.len();
    let mut s = DVector::zeros(n);
    let mut fixed = vec![false; n];
    for _ in 0..=n {
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        if free.is_empty() {
            break;
        }
        let fixed_norm2: f64 = (0..n).filter(|&i| fixed[i]).map(|i| s[i] * s[i]).sum();
        let radius = (delta * delta - fixed_norm2).max(0.0).sqrt();
        // gradient on the free block including the pull of fixed coordinates
        let hs = h * &s;
        let gf = DVector::from_fn(free.len(), |a, _| {
            let i = free[a];
            g[i] + hs[i] - (0..n).filter(|&j| !fixed[j]).map(|j| h[(i, j)] * s[j]).sum::<f64>()
        });
        let hf = DMatrix::from_fn(free.len(), free.len(), |a, b| h[(free[a], free[b])]);
        let sf = ball_step(&gf, &hf, radius);
        let mut clipped = false;
        for (a, &i) in free.iter().enumerate() {
            s[i] = sf[a];
            if s[i] < lo[i] {
                s[i] = lo[i];
                fixed[i] = true;
                clipped = true;
            } else if s[i] > hi[i] {
                s[i] = hi[i];
                fixed[i] = true;
                clipped = true;
            }
        }
        if !clipped {
            break;
        }
    }
    let cauchy = cauchy_step(g, h, delta, lo, hi);
    if model_value(g, h, &cauchy) < model_value(g, h, &s) {
        cauchy
    } else {
        s
    }
}

/// Levenberg-Marquardt solution of the ball-constrained quadratic.
fn ball_step(g: &DVector<f64>, h: &DMatrix<f64>, radius: f64) -> DVector<f64> {
    let n = g.len();
    if radius <= 0.0 || g.norm() == 0.0 {
        return DVector::zeros(n);
    }
    let solve = |lambda: f64| -> Option<DVector<f64>> {
        let m = h + DMatrix::identity(n, n) * lambda;
        m.cholesky().map(|c| -c.solve(g))
    };
    let scale = h.diagonal().amax().max(g.norm() / radius);
    if let Some(s) = solve(1e-14 * scale) {
        if s.norm() <= radius {
            return s;
        }
    }
    let (mut a, mut b) = (1e-14 * scale, scale);
    while solve(b).is_none_or(|s| s.norm() > radius) {
        b *= 10.0;
    }
    for _ in 0..100 {
        let m = (a * b).sqrt().max(0.5 * (a + b) * 1e-3);
        match solve(m) {
            Some(s) if s.norm() > radius => a = m,
            _ => b = m,
        }
        if b - a <= 1e-10 * b {
            break;
        }
    }
    let s = solve(b).unwrap_or_else(|| -g * (radius / g.norm()));
    let norm = s.norm();
    if norm > radius {
        s * (radius / norm)
    } else {
        s
    }
}

fn cauchy_step(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    let d = DVector::from_fn(g.len(), |i, _| {
        let v = -g[i];
        if (v < 0.0 && lo[i] >= 0.0) || (v > 0.0 && hi[i] <= 0.0) {
            0.0
        } else {
            v
        }
    });
    let dn = d.norm();
    if dn == 0.0 {
        return d;
    }
    let curv = d.dot(&(h * &d));
    let mut t = delta / dn;
    if curv > 0.0 {
        t = t.min(d.dot(&d) / curv);
    }
    DVector::from_fn(d.len(), |i, _| (t * d[i]).clamp(lo[i], hi[i]))
}
