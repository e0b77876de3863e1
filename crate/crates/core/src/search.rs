//! Golden-section search for the maximum of a unimodal function.

/// `(sqrt(5) - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a bracketed maximization: the best abscissa seen and its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// The returned point is the best of every evaluated abscissa (interior
/// probes and both bracket ends), so the result never scores below the
/// initial bracket ends even when `f` is not unimodal.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()));
    let mut best = Maximum {
        x: a,
        value: f(a),
        evaluations: 1,
    };
    let consider = |x: f64, v: f64, best: &mut Maximum| {
        best.evaluations += 1;
        if v > best.value {
            best.x = x;
            best.value = v;
        }
    };
    let fb = f(b);
    consider(b, fb, &mut best);

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    consider(x1, f1, &mut best);
    let mut f2 = f(x2);
    consider(x2, f2, &mut best);

    while (b - a) > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            consider(x1, f1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            consider(x2, f2, &mut best);
        }
    }
    best
}

/// Minimizes `f` on `[lo, hi]`; see [`golden_section_max`].
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let mut m = golden_section_max(|x| -f(x), lo, hi, tol);
    m.value = -m.value;
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 2.3).powi(2), 0.0, 5.0, 1e-6);
        assert!((m.x - 2.3).abs() < 1e-6);
        assert!(m.evaluations < 50);
    }

    #[test]
    fn finds_minimum() {
        let m = golden_section_min(|x| (x + 0.7).cosh(), -3.0, 3.0, 1e-8);
        assert!((m.x + 0.7).abs() < 1e-7);
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_function_returns_endpoint() {
        let m = golden_section_max(|x| x, 1.0, 4.0, 1e-3);
        assert_eq!(m.x, 4.0);
        let m = golden_section_max(|x| -x, 4.0, 1.0, 1e-3);
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn never_worse_than_bracket_ends() {
        // bimodal: the search may pick either bump but not a worse point
        let f = |x: f64| (-(x - 0.5).powi(2) * 40.0).exp() + 0.9 * (-(x - 2.5).powi(2) * 40.0).exp();
        let m = golden_section_max(f, 0.0, 3.0, 1e-4);
        assert!(m.value >= f(0.0).max(f(3.0)));
    }
}
