//! Scalar root finding and one-dimensional search.

/// Bracket width at which inversion stops bisecting.
pub const INVERSION_WIDTH: f64 = 1e-10;

/// Density threshold above which a Newton step is attempted.
const NEWTON_MIN_SLOPE: f64 = 1e-8;

/// Solve `g(x) = target` for a nondecreasing `g`, returning (approximately)
/// `inf { x : g(x) >= target }` inside `[lo, hi]`.
///
/// Bisection keeps the bracket; whenever the slope `dg` at the current point
/// exceeds `1e-8` a Newton step is tried and accepted if it stays inside the
/// bracket. `hi` may be `+∞`, in which case the bracket is grown geometrically
/// from `lo`.
pub fn invert_monotone<G, D>(g: G, dg: D, target: f64, lo: f64, hi: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = lo;
    let mut hi = hi;
    if hi.is_infinite() {
        let mut step = 1.0f64.max(lo.abs());
        let mut probe = lo + step;
        while g(probe) < target {
            lo = probe;
            step *= 2.0;
            probe = lo + step;
            if !probe.is_finite() {
                return f64::INFINITY;
            }
        }
        hi = probe;
    }
    if g(lo) >= target {
        return lo;
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let gx = g(x);
        if gx >= target {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= INVERSION_WIDTH * (1.0 + x.abs()) {
            break;
        }
        let mut next = 0.5 * (lo + hi);
        let slope = dg(x);
        if slope > NEWTON_MIN_SLOPE {
            let step = (gx - target) / slope;
            let candidate = x - step;
            if candidate > lo && candidate < hi {
                if step.abs() <= 1e-14 * (1.0 + x.abs()) {
                    return candidate;
                }
                next = candidate;
            }
        }
        x = next;
    }
    hi
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `width`. Returns `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // Endpoints of the final bracket can beat the midpoint on monotone pieces.
    [(x, fx), (c, fc), (d, fd)].into_iter().fold(
        (x, fx),
        |best, cand| if cand.1 > best.1 { cand } else { best },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_smooth_cdf() {
        let x = invert_monotone(
            |x: f64| 1.0 - (-x).exp(),
            |x: f64| (-x).exp(),
            0.5,
            0.0,
            f64::INFINITY,
        );
        assert!((x - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn flat_region_returns_left_end() {
        // g = 0 on [0,1), 0.5 on [1,2), then rises
        let g = |x: f64| {
            if x < 1.0 {
                0.5 * x
            } else if x < 2.0 {
                0.5
            } else {
                (0.5 + 0.5 * (x - 2.0)).min(1.0)
            }
        };
        let x = invert_monotone(g, |_| 0.0, 0.5, 0.0, 3.0);
        assert!((x - 1.0).abs() < 1e-9, "{x}");
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx <= 0.0 && fx > -1e-16);
    }
}
