//! The attachment rule f and the quantities derived from it.

use std::f64::consts::E;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Functional form of an attachment rule.
#[derive(Clone, Debug, PartialEq)]
pub enum RuleForm {
    /// f(k) = k/2 + (α/2)·k/log(k ∨ e) + β
    Critical { alpha: f64, beta: f64 },
    /// f(k) = γk + β
    Affine { gamma: f64, beta: f64 },
    /// f(k) = values[k]
    Tabulated { values: Vec<f64> },
}

/// A concave, positive attachment rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleJson", into = "RuleJson")]
pub struct AttachmentRule {
    form: RuleForm,
    /// Values replacing the formula for k < prefix.len().
    prefix: Vec<f64>,
    concavity_fixup: bool,
}

// Past this index the Critical formula is concave for every α ≥ 0.
const FIXUP_SCAN: usize = 64;

fn critical_formula(alpha: f64, beta: f64, k: u64) -> f64 {
    let x = k as f64;
    x / 2.0 + 0.5 * alpha * x / x.max(E).ln() + beta
}

impl AttachmentRule {
    pub fn critical(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidRule(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidRule(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        let raw: Vec<f64> = (0..=FIXUP_SCAN as u64 + 1)
            .map(|k| critical_formula(alpha, beta, k))
            .collect();
        let prefix = concave_minorant_prefix(&raw)?;
        let concavity_fixup = !prefix.is_empty();
        Ok(Self {
            form: RuleForm::Critical { alpha, beta },
            prefix,
            concavity_fixup,
        })
    }

    pub fn affine(gamma: f64, beta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidRule(format!(
                "gamma must lie in (0,1), got {gamma}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidRule(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        Ok(Self {
            form: RuleForm::Affine { gamma, beta },
            prefix: Vec::new(),
            concavity_fixup: false,
        })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidRule("empty table".into()));
        }
        if let Some(k) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidRule(format!(
                "table value at k={k} is not positive"
            )));
        }
        let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(k) = d.iter().position(|x| *x < 0.0) {
            return Err(Error::InvalidRule(format!("table decreases at k={k}")));
        }
        if let Some(k) = d.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidRule(format!(
                "table is not concave at k={}",
                k + 1
            )));
        }
        Ok(Self {
            form: RuleForm::Tabulated { values },
            prefix: Vec::new(),
            concavity_fixup: false,
        })
    }

    pub fn form(&self) -> &RuleForm {
        &self.form
    }

    pub fn concavity_fixup(&self) -> bool {
        self.concavity_fixup
    }

    /// The α in the asymptotic form (0 for affine and tabulated rules).
    pub fn alpha(&self) -> f64 {
        match self.form {
            RuleForm::Critical { alpha, .. } => alpha,
            _ => 0.0,
        }
    }

    /// f(k).
    pub fn evaluate(&self, k: u64) -> Result<f64> {
        if (k as usize) < self.prefix.len() {
            return Ok(self.prefix[k as usize]);
        }
        match &self.form {
            RuleForm::Critical { alpha, beta } => Ok(critical_formula(*alpha, *beta, k)),
            RuleForm::Affine { gamma, beta } => Ok(gamma * k as f64 + beta),
            RuleForm::Tabulated { values } => {
                values.get(k as usize).copied().ok_or(Error::RuleDomain(k))
            }
        }
    }

    /// Δf(k) = f(k+1) − f(k).
    ///
    /// Past the fixed-up prefix the Critical difference is evaluated in a form
    /// free of cancellation, so monotonicity survives rounding at large k.
    pub fn delta(&self, k: u64) -> Result<f64> {
        match &self.form {
            RuleForm::Critical { alpha, .. } if k >= 3 && k as usize >= self.prefix.len() => {
                let x = k as f64;
                let (l0, l1) = (x.ln(), (x + 1.0).ln());
                let h = (l0 - x * (1.0 / x).ln_1p()) / (l0 * l1);
                Ok(0.5 + 0.5 * alpha * h)
            }
            RuleForm::Affine { gamma, .. } => Ok(*gamma),
            _ => Ok(self.evaluate(k + 1)? - self.evaluate(k)?),
        }
    }
}

/// Replaces the non-concave prefix of `raw` by the largest values that keep the
/// differences nonincreasing while leaving the tail unchanged. Returns the new
/// prefix, or an empty vector if `raw` is already concave.
fn concave_minorant_prefix(raw: &[f64]) -> Result<Vec<f64>> {
    let d: Vec<f64> = raw.windows(2).map(|w| w[1] - w[0]).collect();
    // first index from which the differences are nonincreasing
    let mut k0 = d.len() - 1;
    while k0 > 0 && d[k0 - 1] >= d[k0] {
        k0 -= 1;
    }
    if k0 == 0 {
        return Ok(Vec::new());
    }
    let mut g = raw.to_vec();
    for k in (0..k0).rev() {
        g[k] = raw[k].min(2.0 * g[k + 1] - g[k + 2]);
    }
    if g[0] <= 0.0 {
        return Err(Error::InvalidRule(
            "concave minorant is not positive at k=0".into(),
        ));
    }
    let last = (0..k0).rev().find(|&k| g[k] != raw[k]).map_or(0, |k| k + 1);
    g.truncate(last);
    Ok(g)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleJson {
    form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<f64>>,
}

impl From<AttachmentRule> for RuleJson {
    fn from(r: AttachmentRule) -> Self {
        let mut j = RuleJson {
            form: String::new(),
            alpha: None,
            beta: None,
            gamma: None,
            table: None,
        };
        match r.form {
            RuleForm::Critical { alpha, beta } => {
                j.form = "critical".into();
                j.alpha = Some(alpha);
                j.beta = Some(beta);
            }
            RuleForm::Affine { gamma, beta } => {
                j.form = "affine".into();
                j.gamma = Some(gamma);
                j.beta = Some(beta);
            }
            RuleForm::Tabulated { values } => {
                j.form = "tabulated".into();
                j.table = Some(values);
            }
        }
        j
    }
}

impl TryFrom<RuleJson> for AttachmentRule {
    type Error = Error;

    fn try_from(j: RuleJson) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidRule(format!("missing field {name}")))
        };
        match j.form.as_str() {
            "critical" => AttachmentRule::critical(need(j.alpha, "alpha")?, need(j.beta, "beta")?),
            "affine" => AttachmentRule::affine(need(j.gamma, "gamma")?, need(j.beta, "beta")?),
            "tabulated" => AttachmentRule::tabulated(
                j.table
                    .ok_or_else(|| Error::InvalidRule("missing field table".into()))?,
            ),
            other => Err(Error::InvalidRule(format!("unknown form {other:?}"))),
        }
    }
}

/// ξ(m, n) = ∏_{i=m}^{n−1} (1 + 1/(2i)) = Γ(n+½)Γ(m) / (Γ(m+½)Γ(n)).
pub fn xi(m: u64, n: u64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "xi requires 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    Ok(special::ln_xi(m, n).exp())
}

/// Φ(x) = ∑_{i<x} 1/f(i).
pub fn phi(rule: &AttachmentRule, x: u64) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..x {
        s += 1.0 / rule.evaluate(i)?;
    }
    Ok(s)
}

// Guard against unbounded scans: Φ grows only logarithmically.
const PHI_SCAN_LIMIT: u64 = 1 << 32;

/// Piecewise-linear inverse of Φ on [1/f(0), ∞).
pub fn phi_inverse(rule: &AttachmentRule, y: f64) -> Result<f64> {
    let f0 = rule.evaluate(0)?;
    if !(y >= 1.0 / f0) || !y.is_finite() {
        return Err(Error::Domain(format!(
            "phi_inverse requires y >= 1/f(0) = {}, got {y}",
            1.0 / f0
        )));
    }
    let mut s = 0.0;
    let mut k = 0u64;
    loop {
        let fk = rule.evaluate(k)?;
        let next = s + 1.0 / fk;
        if next > y {
            return Ok(k as f64 + (y - s) * fk);
        }
        s = next;
        k += 1;
        if k > PHI_SCAN_LIMIT {
            return Err(Error::Domain(format!("phi_inverse({y}) beyond scan limit")));
        }
    }
}

/// Prefix sums of 1/f for repeated Φ and Φ⁻¹ queries.
#[derive(Clone, Debug)]
pub struct PhiTable {
    sums: Vec<f64>,
    f: Vec<f64>,
}

impl PhiTable {
    /// Table covering Φ(0..=x_max).
    pub fn new(rule: &AttachmentRule, x_max: u64) -> Result<Self> {
        let mut sums = Vec::with_capacity(x_max as usize + 1);
        let mut f = Vec::with_capacity(x_max as usize + 1);
        let mut s = 0.0;
        sums.push(s);
        for i in 0..=x_max {
            let fi = rule.evaluate(i)?;
            f.push(fi);
            s += 1.0 / fi;
            if i < x_max {
                sums.push(s);
            }
        }
        Ok(Self { sums, f })
    }

    pub fn phi(&self, x: u64) -> Option<f64> {
        self.sums.get(x as usize).copied()
    }

    /// Φ⁻¹(y) for y within the table; None past its end.
    pub fn inverse(&self, y: f64) -> Result<Option<f64>> {
        if !(y >= 1.0 / self.f[0]) {
            return Err(Error::Domain(format!(
                "phi_inverse requires y >= 1/f(0), got {y}"
            )));
        }
        // largest k with Φ(k) <= y
        let k = self.sums.partition_point(|&s| s <= y) - 1;
        if k + 1 >= self.sums.len() {
            return Ok(None);
        }
        Ok(Some(k as f64 + (y - self.sums[k]) * self.f[k]))
    }
}

/// μ_k = [1/(1+f(k))]·∏_{j<k} f(j)/(1+f(j)).
pub fn mu(rule: &AttachmentRule, k: u64) -> Result<f64> {
    let mut ln = 0.0;
    for j in 0..k {
        ln -= (1.0 / rule.evaluate(j)?).ln_1p();
    }
    Ok((ln - rule.evaluate(k)?.ln_1p()).exp())
}

/// μ_0..=μ_{k_max}, accumulated in one pass.
pub fn mu_sequence(rule: &AttachmentRule, k_max: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut ln = 0.0;
    for k in 0..=k_max {
        let fk = rule.evaluate(k)?;
        out.push((ln - fk.ln_1p()).exp());
        ln -= (1.0 / fk).ln_1p();
    }
    Ok(out)
}

/// ∑_{k>K} μ_k = ∏_{j≤K} f(j)/(1+f(j)).
pub fn mu_tail(rule: &AttachmentRule, k: u64) -> Result<f64> {
    let mut ln = 0.0;
    for j in 0..=k {
        ln -= (1.0 / rule.evaluate(j)?).ln_1p();
    }
    Ok(ln.exp())
}

/// One-step drift of X(n) = f(Z)/ξ(m,n) from state Z[m,n] = z, as
/// (E[X(n+1) | z], X(n)), with jump probability f(z)/n left uncapped.
pub fn x_step(rule: &AttachmentRule, m: u64, n: u64, z: u64) -> Result<(f64, f64)> {
    let f = rule.evaluate(z)?;
    let d = rule.delta(z)?;
    let nf = n as f64;
    Ok((f * (1.0 + d / nf) / xi(m, n + 1)?, f / xi(m, n)?))
}

/// One-step drift of Y(n) = (f(Z)² + f(Z)/2)/(n/m), as (E[Y(n+1) | z], Y(n)).
pub fn y_step(rule: &AttachmentRule, m: u64, n: u64, z: u64) -> Result<(f64, f64)> {
    let f = rule.evaluate(z)?;
    let d = rule.delta(z)?;
    let (nf, mf) = (n as f64, m as f64);
    let ef = f + f * d / nf;
    let ef2 = f * f + (2.0 * f * d + d * d) * f / nf;
    Ok((
        (ef2 + 0.5 * ef) * mf / (nf + 1.0),
        (f * f + 0.5 * f) * mf / nf,
    ))
}

/// Parameters of a truncation sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub n: u64,
    pub s0: f64,
    pub delta0: f64,
    pub kappa: f64,
    pub alpha: f64,
}

/// Per-generation lower label cutoffs ℓ_1 ≥ ℓ_2 ≥ … ≥ ℓ_{K*}.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationSequence {
    levels: Vec<u64>,
    params: Option<TruncationParams>,
}

impl TruncationSequence {
    /// ℓ_k ≡ level for every generation.
    pub fn constant(level: u64) -> Self {
        Self {
            levels: vec![level],
            params: None,
        }
    }

    /// ℓ_k ≡ 1.
    pub fn untruncated() -> Self {
        Self::constant(1)
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    pub fn params(&self) -> Option<&TruncationParams> {
        self.params.as_ref()
    }

    /// K*, the index at which the sequence stabilizes.
    pub fn k_star(&self) -> usize {
        self.levels.len()
    }

    /// ℓ_k for k ≥ 1; constant after K*.
    pub fn level(&self, k: u64) -> u64 {
        let i = (k.max(1) as usize).min(self.levels.len()) - 1;
        self.levels[i]
    }

    /// CSV with columns k, ell_k.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,ell_k\n");
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(s, "{},{}", i + 1, l);
        }
        s
    }
}

/// Largest n ∈ [N] with N/n ≥ rhs², or 1 if none.
fn max_label_below(n_total: u64, rhs: f64) -> u64 {
    let nf = n_total as f64;
    let r2 = rhs * rhs;
    if !(r2 > 0.0) {
        return n_total;
    }
    if !r2.is_finite() || nf / r2 < 1.0 {
        return 1;
    }
    let ok = |n: u64| nf / n as f64 >= r2;
    let mut n = ((nf / r2).floor() as u64).clamp(1, n_total);
    while n < n_total && ok(n + 1) {
        n += 1;
    }
    while n > 1 && !ok(n) {
        n -= 1;
    }
    n
}

/// ℓ_k = max{n ∈ [N] : √(N/n) ≥ (s0·δ0/(1∨log k))·∏_{i<k} κ·(log(N/ℓ_i))^{α+1}}.
///
/// Generation stops at the first k with ℓ_{k+1} ≥ ℓ_k; the returned levels are
/// ℓ_1..ℓ_{K*}.
pub fn truncation_sequence(
    n: u64,
    s0: f64,
    delta0: f64,
    kappa: f64,
    alpha: f64,
) -> Result<TruncationSequence> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "truncation needs N >= 2, got {n}"
        )));
    }
    if !(s0 > 0.0) || !(delta0 > 0.0 && delta0 < 0.5) || !(kappa > 0.0) || !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation parameters out of range: s0={s0}, delta0={delta0}, kappa={kappa}, alpha={alpha}"
        )));
    }
    let nf = n as f64;
    let mut levels: Vec<u64> = Vec::new();
    let mut product = 1.0;
    let mut k = 1u64;
    loop {
        let rhs = s0 * delta0 / (k as f64).ln().max(1.0) * product;
        let l = max_label_below(n, rhs);
        if let Some(&prev) = levels.last() {
            if l >= prev {
                break;
            }
        }
        levels.push(l);
        product *= kappa * (nf / l as f64).ln().powf(alpha + 1.0);
        k += 1;
    }
    Ok(TruncationSequence {
        levels,
        params: Some(TruncationParams {
            n,
            s0,
            delta0,
            kappa,
            alpha,
        }),
    })
}

/// k₀ = min{k ≥ 3 : δ log k ≥ (2α+2−δ)·k·log(1+1/k) + 1}.
pub fn decay_start(alpha: f64, delta: f64) -> u64 {
    let mut k = 3u64;
    loop {
        let x = k as f64;
        if delta * x.ln() >= (2.0 * alpha + 2.0 - delta) * x * (1.0 / x).ln_1p() + 1.0 {
            return k;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn crit11() -> AttachmentRule {
        AttachmentRule::critical(1.0, 1.0).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let r = crit11();
        assert_eq!(r.evaluate(0).unwrap(), 1.0);
        assert_eq!(r.evaluate(2).unwrap(), 3.0);
        assert_eq!(
            AttachmentRule::affine(0.5, 0.5)
                .unwrap()
                .evaluate(10)
                .unwrap(),
            5.5
        );
        let t = AttachmentRule::tabulated(vec![1.0, 2.0, 2.5]).unwrap();
        assert!(matches!(t.evaluate(3), Err(Error::RuleDomain(3))));
    }

    #[test]
    fn critical_tail_matches_formula() {
        let r = crit11();
        for k in [8u64, 50, 1000, 123_456] {
            let x = k as f64;
            assert_eq!(r.evaluate(k).unwrap(), x / 2.0 + 0.5 * x / x.ln() + 1.0);
        }
    }

    #[test]
    fn fixup_only_lowers_the_prefix() {
        for &alpha in &[0.25, 0.5, 1.0, 2.0, 5.0] {
            let r = AttachmentRule::critical(alpha, 1.0).unwrap();
            assert!(r.concavity_fixup(), "alpha={alpha}");
            for k in 0..200u64 {
                let raw = critical_formula(alpha, 1.0, k);
                assert!(r.evaluate(k).unwrap() <= raw);
            }
            assert_eq!(r.evaluate(0).unwrap(), 1.0);
        }
        assert!(!AttachmentRule::critical(0.0, 1.0)
            .unwrap()
            .concavity_fixup());
    }

    #[test]
    fn fixup_keeps_small_values_for_alpha_one() {
        let r = crit11();
        assert_eq!(r.evaluate(1).unwrap(), 2.0);
        assert_eq!(r.evaluate(2).unwrap(), 3.0);
    }

    #[test]
    fn concavity_up_to_a_million() {
        for &alpha in &[0.0, 0.5, 1.0, 2.0] {
            let r = AttachmentRule::critical(alpha, 1.0).unwrap();
            let mut prev = r.delta(0).unwrap();
            assert!(prev >= 0.0);
            for k in 1..=1_000_000u64 {
                let d = r.delta(k).unwrap();
                assert!(d <= prev && d >= 0.0, "alpha={alpha} k={k}: {d} > {prev}");
                prev = d;
            }
        }
    }

    #[test]
    fn delta_agrees_with_difference() {
        let r = AttachmentRule::critical(1.5, 0.7).unwrap();
        for k in 0..5000u64 {
            let diff = r.evaluate(k + 1).unwrap() - r.evaluate(k).unwrap();
            assert!((r.delta(k).unwrap() - diff).abs() < 1e-11, "{k}");
        }
    }

    #[test]
    fn non_concave_table_rejected() {
        assert!(AttachmentRule::tabulated(vec![1.0, 1.5, 2.5]).is_err());
        assert!(AttachmentRule::tabulated(vec![1.0, 0.5]).is_err());
        assert!(AttachmentRule::tabulated(vec![0.0]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        for r in [
            crit11(),
            AttachmentRule::affine(0.5, 0.5).unwrap(),
            AttachmentRule::tabulated(vec![1.0, 1.5, 1.75]).unwrap(),
        ] {
            let s = serde_json::to_string(&r).unwrap();
            let back: AttachmentRule = serde_json::from_str(&s).unwrap();
            assert_eq!(back, r);
        }
        let s = serde_json::to_string(&crit11()).unwrap();
        assert_eq!(s, r#"{"form":"critical","alpha":1.0,"beta":1.0}"#);
        assert!(
            serde_json::from_str::<AttachmentRule>(r#"{"form":"critical","alpha":1}"#).is_err()
        );
        assert!(serde_json::from_str::<AttachmentRule>(
            r#"{"form":"critical","alpha":1,"beta":1,"zeta":2}"#
        )
        .is_err());
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(5, 5).unwrap(), 1.0);
        assert!((xi(1, 2).unwrap() - 1.5).abs() < 1e-15);
        let direct: f64 = (4..16).map(|i| 1.0 + 0.5 / i as f64).product();
        let v = xi(4, 16).unwrap();
        assert!((v - direct).abs() < 1e-13);
        assert!((2.0..=2.26).contains(&v));
        assert!(xi(3, 2).is_err());
        assert!(xi(0, 2).is_err());
    }

    #[test]
    fn xi_matches_direct_product_across_regimes() {
        for &(m, n) in &[
            (1u64, 1000u64),
            (7, 100_000),
            (999, 1_000_000),
            (500_000, 1_000_000),
        ] {
            let direct: f64 = (m..n).map(|i| (0.5 / i as f64).ln_1p()).sum();
            let got = xi(m, n).unwrap().ln();
            assert!((got - direct).abs() < 1e-10 * direct, "{m} {n}");
        }
    }

    proptest! {
        #[test]
        fn xi_multiplicative(a in 1u64..1_000_000, b in 1u64..1_000_000, c in 1u64..1_000_000) {
            let mut v = [a, b, c];
            v.sort();
            let [m, n, p] = v;
            let lhs = special::ln_xi(m, n) + special::ln_xi(n, p);
            let rhs = special::ln_xi(m, p);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs() + 1e-15, "{} {} {}: {} vs {}", m, n, p, lhs, rhs);
        }

        #[test]
        fn xi_sandwich(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let (m, n) = (a.min(b), a.max(b));
            let x = xi(m, n).unwrap();
            let r = (n as f64 / m as f64).sqrt();
            prop_assert!(x >= r * (1.0 - 1e-14) && x <= 1.13 * r);
        }

        #[test]
        fn phi_table_matches_direct(x in 0u64..3000) {
            let r = crit11();
            let t = PhiTable::new(&r, 3000).unwrap();
            prop_assert_eq!(t.phi(x).unwrap(), phi(&r, x).unwrap());
        }
    }

    #[test]
    fn phi_examples() {
        let r = crit11();
        assert_eq!(phi(&r, 0).unwrap(), 0.0);
        assert_eq!(phi(&r, 1).unwrap(), 1.0);
        assert_eq!(phi(&r, 2).unwrap(), 1.5);
        assert!(phi_inverse(&r, 0.5).is_err());
        assert_eq!(phi_inverse(&r, 1.0).unwrap(), 1.0);
        assert_eq!(phi_inverse(&r, 1.25).unwrap(), 1.5);
    }

    #[test]
    fn phi_roundtrip_to_1e5() {
        for r in [
            crit11(),
            AttachmentRule::affine(0.5, 0.5).unwrap(),
            AttachmentRule::critical(2.0, 0.3).unwrap(),
        ] {
            let t = PhiTable::new(&r, 100_001).unwrap();
            for x in 1..=100_000u64 {
                let y = t.phi(x).unwrap();
                assert_eq!(t.inverse(y).unwrap(), Some(x as f64), "x={x}");
            }
            for x in [1u64, 2, 17, 999] {
                assert_eq!(phi_inverse(&r, phi(&r, x).unwrap()).unwrap(), x as f64);
            }
        }
    }

    #[test]
    fn phi_inverse_is_monotone_and_concavity_of_phi() {
        let r = crit11();
        let t = PhiTable::new(&r, 10_000).unwrap();
        let mut prev = 0.0;
        let mut y = 1.0;
        while y < t.phi(9_999).unwrap() {
            let x = t.inverse(y).unwrap().unwrap();
            assert!(x > prev);
            prev = x;
            y += 0.01;
        }
        for x in 1..9_998u64 {
            let d0 = t.phi(x).unwrap() - t.phi(x - 1).unwrap();
            let d1 = t.phi(x + 1).unwrap() - t.phi(x).unwrap();
            assert!(d1 <= d0);
        }
    }

    #[test]
    fn phi_log_shape_is_bounded() {
        // Φ(x) − 2 log x + 2α loglog x stays within a bounded band.
        for &alpha in &[0.0, 1.0, 2.0] {
            let r = AttachmentRule::critical(alpha, 1.0).unwrap();
            let t = PhiTable::new(&r, 1_000_000).unwrap();
            let dev = |x: u64| {
                let lx = (x as f64).ln();
                t.phi(x).unwrap() - 2.0 * lx + 2.0 * alpha * lx.ln()
            };
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let mut x = 100u64;
            while x <= 1_000_000 {
                let d = dev(x);
                lo = lo.min(d);
                hi = hi.max(d);
                x = x * 11 / 10 + 1;
            }
            assert!(hi - lo < 1.0, "alpha={alpha}: band [{lo}, {hi}]");
        }
    }

    #[test]
    fn mu_examples() {
        let r = crit11();
        assert_eq!(mu(&r, 0).unwrap(), 1.0 / 2.0);
        let seq = mu_sequence(&r, 50).unwrap();
        for k in [0u64, 1, 7, 50] {
            assert!((seq[k as usize] - mu(&r, k).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_affine_closed_form() {
        // f(k) = (k+1)/2 telescopes to μ_k = 4/((k+1)(k+2)(k+3)).
        let r = AttachmentRule::affine(0.5, 0.5).unwrap();
        let seq = mu_sequence(&r, 100_000).unwrap();
        for k in [0usize, 1, 10, 1000, 100_000] {
            let x = k as f64;
            let want = 4.0 / ((x + 1.0) * (x + 2.0) * (x + 3.0));
            assert!((seq[k] / want - 1.0).abs() < 1e-9, "k={k}");
        }
    }

    fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    }

    #[test]
    fn mu_affine_exponent_is_minus_three() {
        let r = AttachmentRule::affine(0.5, 0.5).unwrap();
        let seq = mu_sequence(&r, 1_000_000).unwrap();
        let ks: Vec<usize> = (0..=60)
            .map(|i| (1e3 * 1e3f64.powf(i as f64 / 60.0)).round() as usize)
            .collect();
        let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
        let ys: Vec<f64> = ks.iter().map(|&k| seq[k].ln()).collect();
        let s = log_slope(&xs, &ys);
        assert!((s + 3.0).abs() < 0.05, "slope {s}");
    }

    #[test]
    fn mu_critical_log_correction_bounded() {
        let r = crit11();
        let seq = mu_sequence(&r, 1_000_000).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut k = 1000usize;
        while k <= 1_000_000 {
            let lk = (k as f64).ln();
            let v = seq[k].ln() + 3.0 * lk - 2.0 * lk.ln();
            lo = lo.min(v);
            hi = hi.max(v);
            k = k * 5 / 4;
        }
        assert!(hi - lo < 0.5, "band [{lo}, {hi}]");
    }

    #[test]
    fn mu_normalization_and_tail() {
        let aff = AttachmentRule::affine(0.5, 0.5).unwrap();
        for kk in [10u64, 100, 1000, 10_000] {
            let seq = mu_sequence(&aff, kk).unwrap();
            let s: f64 = seq.iter().sum();
            let tail = mu_tail(&aff, kk).unwrap();
            let x = kk as f64;
            assert!((1.0 - s - tail).abs() < 1e-12);
            assert!((tail - 2.0 / ((x + 2.0) * (x + 3.0))).abs() < 1e-12);
            assert!(tail <= 2.0 / (x * x));
        }
        // critical tail carries the (log K)^{2α} correction
        let r = crit11();
        let mut ratios = Vec::new();
        for kk in [100u64, 1000, 10_000, 100_000] {
            let seq = mu_sequence(&r, kk).unwrap();
            let s: f64 = seq.iter().sum();
            let tail = mu_tail(&r, kk).unwrap();
            assert!((1.0 - s - tail).abs() < 1e-12);
            let x = kk as f64;
            ratios.push(tail * x * x / x.ln().powi(2));
        }
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo < 2.0, "{ratios:?}");
    }

    #[test]
    fn truncation_examples() {
        let t = truncation_sequence(1_000_000, 100.0, 0.25, 0.25, 1.0).unwrap();
        assert_eq!(t.level(1), 1600);
        let t2 = truncation_sequence(1_000_000, 2.0, 0.25, 0.25, 1.0).unwrap();
        assert_eq!(t2.level(1), 1_000_000);
        assert_eq!(t2.k_star(), 1);
        assert!(t.to_csv().starts_with("k,ell_k\n1,1600\n"));
    }

    #[test]
    fn truncation_oracle_by_scan() {
        // recompute ℓ_k by a brute-force scan over n
        for &(n, alpha) in &[(10_000u64, 0.5), (100_000, 1.0), (1_000_000, 2.0)] {
            let t = truncation_sequence(n, 100.0, 0.25, 0.25, alpha).unwrap();
            let mut prod = 1.0;
            for (i, &l) in t.levels().iter().enumerate() {
                let k = (i + 1) as f64;
                let rhs = 25.0 / k.ln().max(1.0) * prod;
                let want = (1..=n)
                    .rev()
                    .find(|&m| (n as f64 / m as f64).sqrt() >= rhs)
                    .unwrap_or(1);
                assert_eq!(l, want, "N={n} k={k}");
                prod *= 0.25 * (n as f64 / l as f64).ln().powf(alpha + 1.0);
            }
            assert!(t.levels().windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn decay_start_definition() {
        for &alpha in &[0.5, 1.0, 2.0] {
            let k0 = decay_start(alpha, 1.0);
            let ok = |k: u64| {
                let x = k as f64;
                x.ln() >= (2.0 * alpha + 1.0) * x * (1.0 / x).ln_1p() + 1.0
            };
            assert!(ok(k0));
            assert!((3..k0).all(|k| !ok(k)));
        }
    }

    #[test]
    fn martingale_drifts() {
        let affine = AttachmentRule::affine(0.5, 0.7).unwrap();
        let crit = AttachmentRule::critical(1.0, 1.0).unwrap();
        for &n in &[10u64, 1000, 1_000_000] {
            for &z in &[0u64, 1, 7, 500, 10_000] {
                let (e, x) = x_step(&affine, 1, n, z).unwrap();
                assert!((e - x).abs() <= 1e-12 * x);
                let (e, y) = y_step(&affine, 3, n, z).unwrap();
                assert!((e - y).abs() <= 1e-12 * y);
                let (e, x) = x_step(&crit, 1, n, z).unwrap();
                assert!(e >= x * (1.0 - 1e-12));
                let (e, y) = y_step(&crit, 1, n, z).unwrap();
                assert!(e >= y * (1.0 - 1e-12));
            }
        }
    }
}
