//! Adaptive Gauss–Kronrod quadrature (3/7 and 7/15 points) and a nested log-domain integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    finish(resk, resg, resabs, resasc, h)
}

const XK7: [f64; 4] = [
    0.960491268708020283423507092629080,
    0.774596669241483377035853079956480,
    0.434243749346802558002071502844628,
    0.0,
];
const WK7: [f64; 4] = [
    0.104656226026467265193823857192073,
    0.268488089868333440728569280666710,
    0.401397414775962222905051818618432,
    0.450916538658474142345110087045571,
];
const WG3: [f64; 2] = [
    0.555555555555555555555555555555556,
    0.888888888888888888888888888888889,
];

/// One 7-point Kronrod panel (embedded 3-point Gauss rule), same error heuristic as [`gk15`].
pub fn gk7(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WK7[3];
    let resg_c = fc * WG3[1];
    let mut resg = resg_c;
    let mut resabs = fc.abs() * WK7[3];
    let mut fv = [(0.0, 0.0); 3];
    for j in 0..3 {
        let x = h * XK7[j];
        let (f1, f2) = (f(c - x), f(c + x));
        fv[j] = (f1, f2);
        resk += WK7[j] * (f1 + f2);
        resabs += WK7[j] * (f1.abs() + f2.abs());
        if j == 1 {
            resg += WG3[0] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WK7[3] * (fc - mean).abs();
    for j in 0..3 {
        resasc += WK7[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    finish(resk, resg, resabs, resasc, h)
}

fn finish(resk: f64, resg: f64, resabs: f64, resasc: f64, h: f64) -> (f64, f64) {
    let (resk, resabs, resasc) = (resk * h.abs(), resabs * h.abs(), resasc * h.abs());
    let mut err = (resk - resg * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (resk, err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Gk7,
    Gk15,
}

impl Rule {
    fn panel(self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        match self {
            Rule::Gk7 => gk7(f, a, b),
            Rule::Gk15 => gk15(f, a, b),
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive integration over `[breaks[0], breaks[last]]`, starting from the given panels.
pub fn integrate_breaks(
    f: impl FnMut(f64) -> f64,
    breaks: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Quad {
    integrate_rule(f, breaks, tol, max_panels, Rule::Gk15)
}

pub fn integrate_rule(
    mut f: impl FnMut(f64) -> f64,
    breaks: &[f64],
    tol: Tolerance,
    max_panels: usize,
    rule: Rule,
) -> Quad {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Quad {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in pts.windows(2) {
        let (v, e) = rule.panel(&mut f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= max_panels {
            return Quad {
                value: total,
                error: err,
                converged: false,
            };
        }
        let p = heap.pop().expect("at least one panel");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            return Quad {
                value: total,
                error: err,
                converged: false,
            };
        }
        let (v1, e1) = rule.panel(&mut f, p.a, m);
        let (v2, e2) = rule.panel(&mut f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value = crate::util::pairwise_sum(&heap.iter().map(|p| p.value).collect::<Vec<_>>());
    let error = heap.iter().map(|p| p.error).sum();
    Quad {
        value,
        error,
        converged: true,
    }
}

pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Quad {
    integrate_breaks(f, &[a, b], tol, 2000)
}

/// `∫ e^{−(E(w) − E(c))} dw` over a box in `ℝⁿ`, nested one axis at a time.
///
/// Axis `k` is mapped by `w_k = c_k + h_k sinh(u)`, which resolves a peak of width `h_k` at `c_k`
/// and its tails with few panels.
pub struct PeakedIntegral<'a> {
    pub energy: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Extra breakpoints per axis, in `w` coordinates.
    pub kinks: Vec<Vec<f64>>,
}

/// `log ∫ e^{−E}` with a relative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuad {
    pub log_value: f64,
    pub rel_error: f64,
    pub converged: bool,
}

impl PeakedIntegral<'_> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn breaks(&self, k: usize) -> Vec<f64> {
        let (c, h) = (self.center[k], self.width[k]);
        let map = |w: f64| ((w - c) / h).asinh();
        let mut b = vec![map(self.lo[k]), 0.0, map(self.hi[k])];
        let (ul, uh) = (b[0], b[2]);
        b.extend(
            self.kinks[k]
                .iter()
                .map(|&w| map(w))
                .filter(|&u| u > ul && u < uh),
        );
        b
    }

    fn axis(
        &self,
        k: usize,
        w: &mut Vec<f64>,
        shift: f64,
        rel: f64,
        rule: Rule,
        ok: &mut bool,
    ) -> f64 {
        let (c, h) = (self.center[k], self.width[k]);
        let scale: f64 = self.width[k..].iter().product();
        let breaks = self.breaks(k);
        let mut inner_ok = true;
        let q = integrate_rule(
            |u| {
                w[k] = c + h * u.sinh();
                let jac = h * u.cosh();
                if k + 1 == self.dim() {
                    jac * (shift - (self.energy)(w)).exp()
                } else {
                    jac * self.axis(k + 1, w, shift, rel, rule, &mut inner_ok)
                }
            },
            &breaks,
            Tolerance::new(rel * scale, rel),
            400,
            rule,
        );
        *ok &= q.converged && inner_ok;
        q.value
    }

    pub fn log_integral(&self, rel: f64) -> LogQuad {
        self.log_integral_with(rel, Rule::Gk15)
    }

    pub fn log_integral_with(&self, rel: f64, rule: Rule) -> LogQuad {
        let shift = (self.energy)(&self.center);
        let mut w = self.center.clone();
        let mut ok = true;
        let (c, h) = (self.center[0], self.width[0]);
        let breaks = self.breaks(0);
        let q = integrate_rule(
            |u| {
                w[0] = c + h * u.sinh();
                let jac = h * u.cosh();
                if self.dim() == 1 {
                    jac * (shift - (self.energy)(&w)).exp()
                } else {
                    jac * self.axis(1, &mut w, shift, rel, rule, &mut ok)
                }
            },
            &breaks,
            Tolerance::new(0.0, rel),
            400,
            rule,
        );
        LogQuad {
            log_value: q.value.ln() - shift,
            rel_error: q.error / q.value.abs(),
            converged: ok && q.converged && q.value > 0.0,
        }
    }
}
