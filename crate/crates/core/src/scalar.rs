//! Scalar numerics shared by the bound evaluators: golden-section search,
//! bisection, and stable log-domain helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section minimization on `[lo, hi]`.
///
/// Returns the best point ever evaluated, endpoints included, so the value
/// is always attained by some argument even when `f` is not unimodal.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> ScalarOptimum {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = ScalarOptimum {
        x: a,
        value: f64::INFINITY,
        evaluations: 0,
    };
    let mut eval = |x: f64, best: &mut ScalarOptimum| {
        let v = f(x);
        best.evaluations += 1;
        if v < best.value || (best.value.is_nan() && !v.is_nan()) {
            best.x = x;
            best.value = v;
        }
        v
    };
    eval(a, &mut best);
    eval(b, &mut best);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut best);
    let mut fd = eval(d, &mut best);
    while (b - a).abs() > xtol {
        if fc < fd || fd.is_nan() {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut best);
        }
        if best.evaluations > 10_000 {
            break;
        }
    }
    best
}

/// Golden-section maximization on `[lo, hi]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> ScalarOptimum {
    let r = golden_min(|x| -f(x), lo, hi, xtol);
    ScalarOptimum {
        value: -r.value,
        ..r
    }
}

/// Bisection for a root of a monotone function on a bracket where the sign
/// changes. Stops once the bracket is at floating-point resolution.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> f64 {
    let flo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `log(sum(exp(v)))` with max-shift.
pub fn log_sum_exp(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Converts a dB value to linear amplitude; `A_dB = 10 log10(A)`.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn amplitude_to_db(a: f64) -> f64 {
    10.0 * a.log10()
}
