//! Log-Γ ratios and the products built from them.

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT_TO: f64 = 10.0;

fn stirling_tail(z: f64) -> f64 {
    let z2 = 1.0 / (z * z);
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * z2 + c;
    }
    acc / z
}

/// ln Γ(x) − ln Γ(y) for x, y > 0, without forming either log-Γ value.
///
/// Both arguments are shifted up by the recurrence until the Stirling series is
/// accurate, and the leading terms are combined so that nothing large cancels.
pub fn ln_gamma_ratio(x: f64, y: f64) -> f64 {
    debug_assert!(x > 0.0 && y > 0.0, "ln_gamma_ratio({x}, {y})");
    if x == y {
        return 0.0;
    }
    let (mut x, mut y) = (x, y);
    let mut acc = 0.0;
    while x.min(y) < SHIFT_TO {
        acc -= ((x - y) / y).ln_1p();
        x += 1.0;
        y += 1.0;
    }
    let d = x - y;
    acc + (y - 0.5) * (d / y).ln_1p() + d * x.ln() - d + stirling_tail(x) - stirling_tail(y)
}

/// ln of Γ(x + ½) / Γ(x).
pub fn ln_half_ratio(x: f64) -> f64 {
    ln_gamma_ratio(x + 0.5, x)
}

// Below this span the product is summed term by term.
const DIRECT_SPAN: u64 = 64;

/// ln ξ(m, n) = ∑_{i=m}^{n−1} ln(1 + 1/(2i)).
pub fn ln_xi(m: u64, n: u64) -> f64 {
    debug_assert!(1 <= m && m <= n);
    if n - m <= DIRECT_SPAN {
        (m..n).map(|i| (0.5 / i as f64).ln_1p()).sum()
    } else {
        ln_half_ratio(n as f64) - ln_half_ratio(m as f64)
    }
}

/// ln ∏_{i=a}^{b−1} (1 − c/i) for 0 ≤ c < a ≤ b.
pub fn ln_no_jump(c: f64, a: u64, b: u64) -> f64 {
    debug_assert!(c >= 0.0 && (a as f64) > c && a <= b);
    if c == 0.0 || a == b {
        return 0.0;
    }
    if b - a <= 8 {
        return (a..b).map(|i| (-c / i as f64).ln_1p()).sum();
    }
    let (a, b) = (a as f64, b as f64);
    ln_gamma_ratio(b - c, a - c) - ln_gamma_ratio(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn ratio_matches_lanczos() {
        for &(x, y) in &[
            (0.5, 1.0),
            (2.0, 1.0),
            (3.7, 0.2),
            (15.5, 15.0),
            (100.0, 3.0),
            (1e4, 9e3),
        ] {
            let want = ln_gamma(x) - ln_gamma(y);
            let got = ln_gamma_ratio(x, y);
            assert!(
                (got - want).abs() < 1e-12 * want.abs().max(1.0),
                "{x} {y}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn ratio_small_integers_are_log_factorials() {
        // Γ(6)/Γ(3) = 5!/2! = 60
        assert!((ln_gamma_ratio(6.0, 3.0) - 60f64.ln()).abs() < 1e-14);
        assert!((ln_gamma_ratio(3.0, 6.0) + 60f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn half_ratio_asymptotics() {
        // ln Γ(x+½)/Γ(x) = ½ ln x − 1/(8x) + O(x⁻³)
        for &x in &[1e4, 1e6, 1e8] {
            let want = 0.5 * f64::ln(x) - 1.0 / (8.0 * x);
            assert!((ln_half_ratio(x) - want).abs() < 1e-13, "{x}");
        }
        let x = 50.0;
        assert!((ln_half_ratio(x) - (ln_gamma(x + 0.5) - ln_gamma(x))).abs() < 1e-12);
    }

    #[test]
    fn ln_xi_regimes_agree() {
        for &(m, n) in &[(1u64, 65u64), (3, 67), (1000, 1064), (12345, 12409)] {
            let direct: f64 = (m..n).map(|i| (0.5 / i as f64).ln_1p()).sum();
            let gamma = ln_half_ratio(n as f64) - ln_half_ratio(m as f64);
            assert!((direct - gamma).abs() < 1e-13 * direct + 4e-15, "{m} {n}");
        }
    }

    #[test]
    fn no_jump_matches_product() {
        for &(c, a, b) in &[
            (0.5, 1u64, 40u64),
            (3.2, 4, 500),
            (9.99, 10, 20),
            (1.0, 2, 3),
            (50.0, 60, 10_000),
        ] {
            let direct: f64 = (a..b).map(|i| (1.0 - c / i as f64).ln()).sum();
            let got = ln_no_jump(c, a, b);
            assert!(
                (got - direct).abs() < 1e-11 * direct.abs().max(1.0),
                "{c} {a} {b}: {got} vs {direct}"
            );
        }
    }
}
