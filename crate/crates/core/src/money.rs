//! Fixed-point currency and month-indexed series helpers.
//!
//! Every amount is an `i64` count of minor units (cents). Splitting an
//! amount by fractional weights goes through [`apportion`], which hands out
//! the rounding remainder by largest fractional part so the pieces always
//! add back to the whole.

/// Currency amount in minor units.
pub type Money = i64;

/// Month index on the deal timeline, `0` being the origin.
pub type Month = usize;

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Split `total` into parts proportional to `weights`, exactly.
///
/// Weights are normalised by their sum; a zero or empty weight vector puts
/// everything in the first slot. Remainders go to the largest fractional
/// parts, ties to the lowest index.
pub fn apportion(total: Money, weights: &[f64]) -> Vec<Money> {
    if weights.is_empty() {
        return Vec::new();
    }
    if total < 0 {
        return apportion(-total, weights).into_iter().map(|x| -x).collect();
    }
    let sum: f64 = weights.iter().sum();
    let mut out = vec![0; weights.len()];
    if sum.is_nan() || sum <= 0.0 || total == 0 {
        out[0] = total;
        return out;
    }
    let mut fractions = Vec::with_capacity(weights.len());
    let mut assigned: Money = 0;
    for (i, w) in weights.iter().enumerate() {
        let raw = total as f64 * (w / sum);
        let floor = raw.floor();
        let part = (floor as Money).clamp(0, total);
        out[i] = part;
        assigned += part;
        fractions.push((raw - floor, i));
    }
    distribute_remainder(&mut out, total - assigned, &mut fractions);
    out
}

/// Split `total` in proportion to integer `weights` using exact arithmetic.
///
/// Falls back to everything in the first slot when the weights sum to zero.
pub fn apportion_exact(total: Money, weights: &[Money]) -> Vec<Money> {
    if weights.is_empty() {
        return Vec::new();
    }
    if total < 0 {
        return apportion_exact(-total, weights).into_iter().map(|x| -x).collect();
    }
    let sum: i128 = weights.iter().map(|&w| w.max(0) as i128).sum();
    let mut out = vec![0; weights.len()];
    if sum == 0 || total == 0 {
        out[0] = total;
        return out;
    }
    let mut remainders = Vec::with_capacity(weights.len());
    let mut assigned: Money = 0;
    for (i, &w) in weights.iter().enumerate() {
        let num = total as i128 * w.max(0) as i128;
        let part = (num / sum) as Money;
        out[i] = part;
        assigned += part;
        remainders.push(((num % sum) as f64 / sum as f64, i));
    }
    distribute_remainder(&mut out, total - assigned, &mut remainders);
    out
}

fn distribute_remainder(out: &mut [Money], mut remainder: Money, fractions: &mut [(f64, usize)]) {
    fractions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut k = 0;
    while remainder > 0 {
        out[fractions[k % fractions.len()].1] += 1;
        remainder -= 1;
        k += 1;
    }
    while remainder < 0 {
        let idx = fractions[fractions.len() - 1 - (k % fractions.len())].1;
        if out[idx] > 0 {
            out[idx] -= 1;
            remainder += 1;
        }
        k += 1;
    }
}

// ---------------------------------------------------------------------------
// Series arithmetic
// ---------------------------------------------------------------------------

/// Integer mean rounded half away from zero.
pub fn mean_rounded(sum: i128, count: usize) -> Money {
    assert!(count > 0, "mean of an empty set");
    let n = count as i128;
    let q = sum / n;
    let r = sum % n;
    let adj = if 2 * r.abs() >= n { r.signum() } else { 0 };
    (q + adj) as Money
}

/// `out(t) = Σ_{τ>t} s(τ)`: what is still to come after month `t`.
pub fn tail_sums(series: &[Money]) -> Vec<Money> {
    let mut out = vec![0; series.len()];
    let mut acc: Money = 0;
    for t in (0..series.len()).rev() {
        out[t] = acc;
        acc += series[t];
    }
    out
}

/// Element-wise sum of several equally long series.
pub fn sum_series<'a, I>(len: usize, parts: I) -> Vec<Money>
where
    I: IntoIterator<Item = &'a Vec<Money>>,
{
    let mut out = vec![0; len];
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
    out
}

/// Copy `series` into a vector of exactly `len` months, zero-padding or cutting.
pub fn fit(series: &[Money], len: usize) -> Vec<Money> {
    let mut out = vec![0; len];
    let n = series.len().min(len);
    out[..n].copy_from_slice(&series[..n]);
    out
}

/// Format cents as a decimal string with two fractional digits.
pub fn format_cents(amount: Money) -> String {
    let sign = if amount < 0 { "-" } else { "" };
    let abs = amount.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_keeps_the_total() {
        assert_eq!(apportion(100, &[0.5, 0.5]), vec![50, 50]);
        assert_eq!(apportion(3, &[0.5, 0.5]), vec![2, 1]);
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(-3, &[0.5, 0.5]), vec![-2, -1]);
        assert_eq!(apportion(7, &[0.0, 0.0]), vec![7, 0]);
        assert_eq!(apportion(7, &[]), Vec::<Money>::new());
    }

    #[test]
    fn apportion_exact_is_proportional() {
        assert_eq!(apportion_exact(40, &[30, 10]), vec![30, 10]);
        assert_eq!(apportion_exact(10, &[1, 1, 1]), vec![4, 3, 3]);
        assert_eq!(apportion_exact(5, &[0, 0]), vec![5, 0]);
    }

    #[test]
    fn mean_rounds_half_away_from_zero() {
        assert_eq!(mean_rounded(5, 2), 3);
        assert_eq!(mean_rounded(-5, 2), -3);
        assert_eq!(mean_rounded(4, 3), 1);
        assert_eq!(mean_rounded(5500, 2), 2750);
    }

    #[test]
    fn tail_sums_telescope() {
        assert_eq!(tail_sums(&[0, 50, 50]), vec![100, 50, 0]);
        assert_eq!(tail_sums(&[]), Vec::<Money>::new());
    }

    #[test]
    fn cents_format() {
        assert_eq!(format_cents(12345), "123.45");
        assert_eq!(format_cents(-5), "-0.05");
    }
}
