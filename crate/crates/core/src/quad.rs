//! Adaptive Gauss–Kronrod quadrature for scalar and vector integrands,
//! principal values by singularity subtraction, and Gauss–Legendre rules.
//!
//! Vector integrands share one set of nodes: the interval is refined until
//! every component meets the tolerance, so fields evaluated at many sites
//! come from the same energy grid.

use crate::error::Error;
use num_complex::Complex64;
use rayon::prelude::*;

/// Values that can be integrated: anything that flattens to real components.
pub trait QuadValue: Sized + Send {
    fn flat_len(&self) -> usize;
    fn write_flat(&self, out: &mut [f64]);
    fn from_flat(flat: &[f64], like: &Self) -> Self;
}

impl QuadValue for f64 {
    fn flat_len(&self) -> usize {
        1
    }
    fn write_flat(&self, out: &mut [f64]) {
        out[0] = *self;
    }
    fn from_flat(flat: &[f64], _: &Self) -> Self {
        flat[0]
    }
}

impl QuadValue for Complex64 {
    fn flat_len(&self) -> usize {
        2
    }
    fn write_flat(&self, out: &mut [f64]) {
        out[0] = self.re;
        out[1] = self.im;
    }
    fn from_flat(flat: &[f64], _: &Self) -> Self {
        Complex64::new(flat[0], flat[1])
    }
}

impl QuadValue for Vec<f64> {
    fn flat_len(&self) -> usize {
        self.len()
    }
    fn write_flat(&self, out: &mut [f64]) {
        out.copy_from_slice(self);
    }
    fn from_flat(flat: &[f64], _: &Self) -> Self {
        flat.to_vec()
    }
}

impl QuadValue for Vec<Complex64> {
    fn flat_len(&self) -> usize {
        2 * self.len()
    }
    fn write_flat(&self, out: &mut [f64]) {
        for (c, z) in out.chunks_exact_mut(2).zip(self) {
            c[0] = z.re;
            c[1] = z.im;
        }
    }
    fn from_flat(flat: &[f64], _: &Self) -> Self {
        flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
    }
}

/// Result of a quadrature together with its error estimate.
#[derive(Debug, Clone)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
}

/// Failed adaptive integration; keeps the best estimate reached.
#[derive(Debug, Clone)]
pub struct NotConverged<V> {
    pub best: Estimate<V>,
    pub tol: f64,
}

impl<V> From<NotConverged<V>> for Error {
    fn from(e: NotConverged<V>) -> Self {
        Error::Convergence { what: "adaptive quadrature", error: e.best.error, tol: e.tol }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525730917,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances and limits of the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Evaluate nodes on the rayon pool (worth it for expensive integrands).
    pub parallel: bool,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-7, rel_tol: 0.0, max_intervals: 4000, parallel: false }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn parallel(mut self) -> Self {
        self.parallel = true;
        self
    }

    /// Integrate `f` over `[a, b]`, splitting first at the `hints` lying
    /// strictly inside. Endpoints and hints are never evaluated.
    pub fn integrate<V, F>(&self, f: F, a: f64, b: f64, hints: &[f64]) -> Result<Estimate<V>, NotConverged<V>>
    where
        V: QuadValue,
        F: Fn(f64) -> V + Sync,
    {
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts = vec![lo];
        let mut inner: Vec<f64> = hints.iter().copied().filter(|&h| h > lo && h < hi).collect();
        inner.sort_by(|x, y| x.total_cmp(y));
        inner.dedup();
        cuts.extend(inner);
        cuts.push(hi);

        let mut like: Option<V> = None;
        let mut evals = 0usize;
        let mut panels: Vec<Panel> = Vec::new();
        let initial: Vec<(f64, f64)> = cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
        if initial.is_empty() {
            // Degenerate interval: evaluate once to learn the shape.
            let v = f(lo);
            let zero = vec![0.0; v.flat_len()];
            return Ok(Estimate { value: V::from_flat(&zero, &v), error: 0.0, evaluations: 1 });
        }
        for p in self.apply_batch(&f, &initial, &mut like) {
            panels.push(p);
        }
        evals += 21 * initial.len();

        loop {
            let len = panels[0].value.len();
            let mut total = vec![0.0; len];
            let mut err = 0.0;
            for p in &panels {
                for (t, v) in total.iter_mut().zip(&p.value) {
                    *t += v;
                }
                err += p.error;
            }
            let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let target = self.abs_tol.max(self.rel_tol * scale);
            let like_ref = like.as_ref().expect("at least one evaluation");
            if err <= target {
                for t in total.iter_mut() {
                    *t *= sign;
                }
                return Ok(Estimate { value: V::from_flat(&total, like_ref), error: err, evaluations: evals });
            }
            if panels.len() >= self.max_intervals {
                for t in total.iter_mut() {
                    *t *= sign;
                }
                let best = Estimate { value: V::from_flat(&total, like_ref), error: err, evaluations: evals };
                return Err(NotConverged { best, tol: target });
            }

            // Bisect the worst panels; several at once keeps the pool busy.
            let mut order: Vec<usize> = (0..panels.len()).collect();
            order.sort_by(|&i, &j| panels[j].error.total_cmp(&panels[i].error));
            let worst = panels[order[0]].error;
            let batch = if self.parallel { 8 } else { 1 };
            let mut chosen: Vec<usize> = order
                .iter()
                .copied()
                .take(batch)
                .take_while(|&i| panels[i].error >= 0.25 * worst)
                .collect();
            chosen.sort_unstable();
            let mut halves = Vec::with_capacity(2 * chosen.len());
            let mut stuck = false;
            for &i in &chosen {
                let (a, b) = (panels[i].a, panels[i].b);
                let m = 0.5 * (a + b);
                if !(m > a && m < b) || (b - a) <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
                    stuck = true;
                }
                halves.push((a, m));
                halves.push((m, b));
            }
            if stuck {
                for t in total.iter_mut() {
                    *t *= sign;
                }
                let best = Estimate { value: V::from_flat(&total, like_ref), error: err, evaluations: evals };
                return Err(NotConverged { best, tol: target });
            }
            let fresh = self.apply_batch(&f, &halves, &mut like);
            evals += 21 * halves.len();
            for &i in chosen.iter().rev() {
                panels.swap_remove(i);
            }
            panels.extend(fresh);
        }
    }

    fn apply_batch<V, F>(&self, f: &F, intervals: &[(f64, f64)], like: &mut Option<V>) -> Vec<Panel>
    where
        V: QuadValue,
        F: Fn(f64) -> V + Sync,
    {
        let nodes: Vec<f64> = intervals
            .iter()
            .flat_map(|&(a, b)| {
                let c = 0.5 * (a + b);
                let h = 0.5 * (b - a);
                (0..21).map(move |k| if k < 10 { c - h * XGK[k] } else if k == 10 { c } else { c + h * XGK[20 - k] })
            })
            .collect();
        let values: Vec<V> = if self.parallel {
            nodes.par_iter().map(|&t| f(t)).collect()
        } else {
            nodes.iter().map(|&t| f(t)).collect()
        };
        let len = values[0].flat_len();
        let mut flat = vec![0.0; len * values.len()];
        for (chunk, v) in flat.chunks_exact_mut(len).zip(&values) {
            v.write_flat(chunk);
        }
        let mut out = Vec::with_capacity(intervals.len());
        for (j, &(a, b)) in intervals.iter().enumerate() {
            let h = 0.5 * (b - a);
            let fv = |k: usize, i: usize| flat[(21 * j + k) * len + i];
            let mut value = vec![0.0; len];
            let mut error = 0.0f64;
            for (i, out_i) in value.iter_mut().enumerate() {
                let fc = fv(10, i);
                let mut kron = WGK[10] * fc;
                let mut gauss = 0.0;
                for k in 0..10 {
                    let s = fv(k, i) + fv(20 - k, i);
                    kron += WGK[k] * s;
                    if k % 2 == 1 {
                        gauss += WG[k / 2] * s;
                    }
                }
                let mean = 0.5 * kron;
                let mut asc = WGK[10] * (fc - mean).abs();
                for (k, w) in WGK[..10].iter().enumerate() {
                    asc += w * ((fv(k, i) - mean).abs() + (fv(20 - k, i) - mean).abs());
                }
                let asc = asc * h.abs();
                let mut e = ((kron - gauss) * h).abs();
                if asc != 0.0 && e != 0.0 {
                    e = asc * (200.0 * e / asc).powf(1.5).min(1.0);
                }
                *out_i = kron * h;
                error = error.max(e);
            }
            out.push(Panel { a, b, value, error });
        }
        if like.is_none() {
            *like = values.into_iter().next();
        }
        out
    }
}

/// Relative distance from a singular point inside which graded integrands are not evaluated.
pub const SINGULAR_GUARD: f64 = 1e-13;

impl Quadrature {
    /// Like [`integrate`](Self::integrate) but for integrands with integrable
    /// (e.g. logarithmic) singularities at the points in `singular`. Each
    /// piece between breakpoints is mapped t = t₀ + (t₁ − t₀)u⁴ towards its
    /// singular end, which makes the integrand smooth enough for GK21.
    pub fn integrate_graded<V, F>(&self, f: F, a: f64, b: f64, hints: &[f64], singular: &[f64]) -> Result<Estimate<V>, NotConverged<V>>
    where
        V: QuadValue + Sync,
        F: Fn(f64) -> V + Sync,
    {
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = hints.iter().chain(singular).copied().filter(|&h| h > lo && h < hi).collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.dedup();
        let is_sing = |t: f64| singular.contains(&t);
        // (start, end) with the singular end first when there is one.
        let mut pieces: Vec<(f64, f64, bool)> = Vec::new();
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q <= p {
                continue;
            }
            match (is_sing(p), is_sing(q)) {
                (true, true) => {
                    let m = 0.5 * (p + q);
                    pieces.push((p, m, true));
                    pieces.push((q, m, true));
                }
                (true, false) => pieces.push((p, q, true)),
                (false, true) => pieces.push((q, p, true)),
                (false, false) => pieces.push((p, q, false)),
            }
        }
        if pieces.is_empty() {
            return self.integrate(f, lo, hi, &[]);
        }
        let like = f(0.5 * (pieces[0].0 + pieces[0].1));
        let zero = vec![0.0; like.flat_len()];
        let mapped = |u: f64| {
            let k = (u.floor() as usize).min(pieces.len() - 1);
            let s = u - k as f64;
            let (t0, t1, graded) = pieces[k];
            let (t, jac) = if graded {
                let s2 = s * s;
                (t0 + (t1 - t0) * s2 * s2, 4.0 * (t1 - t0).abs() * s2 * s)
            } else {
                (t0 + (t1 - t0) * s, t1 - t0)
            };
            if graded && (t - t0).abs() <= SINGULAR_GUARD * t0.abs().max(1.0) {
                // Within the guard the weight is O(guard·ln guard); skip the
                // evaluation rather than ask f for values at rounding distance.
                return V::from_flat(&zero, &like);
            }
            let v = f(t);
            let mut flat = vec![0.0; v.flat_len()];
            v.write_flat(&mut flat);
            flat.iter_mut().for_each(|x| *x *= jac * sign);
            V::from_flat(&flat, &v)
        };
        let knots: Vec<f64> = (1..pieces.len()).map(|k| k as f64).collect();
        self.integrate(mapped, 0.0, pieces.len() as f64, &knots)
    }
}

/// One-shot adaptive integral with an absolute tolerance.
pub fn integrate_adaptive<V, F>(f: F, a: f64, b: f64, hints: &[f64], tol: f64) -> Result<Estimate<V>, NotConverged<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync,
{
    Quadrature::with_tol(tol).integrate(f, a, b, hints)
}

/// Principal value of ∫ₐᵇ f(t)/(t − pole) dt by subtracting f(pole).
pub fn principal_value<V, F>(quad: &Quadrature, f: F, pole: f64, a: f64, b: f64, hints: &[f64]) -> Result<Estimate<V>, Error>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync,
{
    if !(a < pole && pole < b) {
        return Err(Error::domain("principal_value", format!("pole {pole} not strictly inside ({a}, {b})")));
    }
    let at_pole = f(pole);
    let len = at_pole.flat_len();
    let mut fc = vec![0.0; len];
    at_pole.write_flat(&mut fc);
    let mut all_hints = hints.to_vec();
    all_hints.push(pole);
    let est = quad
        .integrate(
            |t| {
                let mut ft = vec![0.0; len];
                f(t).write_flat(&mut ft);
                let d = t - pole;
                for (x, c) in ft.iter_mut().zip(&fc) {
                    *x = (*x - c) / d;
                }
                ft
            },
            a,
            b,
            &all_hints,
        )
        .map_err(Error::from)?;
    let log_ratio = ((b - pole) / (pole - a)).ln();
    let value: Vec<f64> = est.value.iter().zip(&fc).map(|(v, c)| v + c * log_ratio).collect();
    Ok(Estimate { value: V::from_flat(&value, &at_pole), error: est.error, evaluations: est.evaluations + 1 })
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
