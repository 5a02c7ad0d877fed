//! Adaptive Simpson quadrature.

/// `int_a^b f` to absolute tolerance `tol`, with Richardson correction on
/// each accepted panel. Recursion stops at `max_depth` halvings, or once
/// the panel estimates agree to rounding.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(noise) {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson over consecutive panels `[p_k, p_{k+1}]` of `breaks`,
/// splitting `tol` in proportion to panel length.
pub fn adaptive_simpson_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64, max_depth: u32) -> f64 {
    let span = breaks.last().unwrap_or(&0.0) - breaks.first().unwrap_or(&0.0);
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol * (w[1] - w[0]) / span, max_depth))
        .sum()
}
