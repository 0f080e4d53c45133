/// Composite Simpson rule on uniform samples; an even number of intervals
/// is closed with the 3/8 rule on the last three.
pub fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (v[0] + v[1]),
        3 => h / 3.0 * (v[0] + 4.0 * v[1] + v[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) {
                (n - 1, 0.0)
            } else {
                let k = n - 4;
                (
                    k,
                    3.0 * h / 8.0 * (v[k] + 3.0 * v[k + 1] + 3.0 * v[k + 2] + v[k + 3]),
                )
            };
            let mut acc = v[0] + v[simpson_end];
            for (i, x) in v.iter().enumerate().take(simpson_end).skip(1) {
                acc += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
            }
            acc * h / 3.0 + tail
        }
    }
}

/// Integral over `[z_i, z_{i+1}]` from the cubic through four nearby samples.
fn interval(v: &[f64], i: usize, h: f64) -> f64 {
    let n = v.len();
    if n < 4 {
        return 0.5 * h * (v[i] + v[i + 1]);
    }
    if i == 0 {
        h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3])
    } else if i + 2 >= n {
        h / 24.0 * (9.0 * v[i + 1] + 19.0 * v[i] - 5.0 * v[i - 1] + v[i - 2])
    } else {
        h / 24.0 * (-v[i - 1] + 13.0 * v[i] + 13.0 * v[i + 1] - v[i + 2])
    }
}

/// Running integral `c_k = ∫_{z_start}^{z_k} v`, fourth order, computed
/// outward from `start` in both directions (`c_start = 0`).
pub fn cumulative(v: &[f64], h: f64, start: usize) -> Vec<f64> {
    let n = v.len();
    let mut c = vec![0.0; n];
    for i in start..n.saturating_sub(1) {
        c[i + 1] = c[i] + interval(v, i, h);
    }
    for i in (0..start).rev() {
        c[i] = c[i + 1] - interval(v, i, h);
    }
    c
}

/// Tail beyond a grid end for an integrand decaying like `exp(-rate |z|)`:
/// `∫_{z_end}^{∞} g ≈ g(z_end) / rate`. Zero when the rate is not positive.
pub fn tail_integral(value_at_end: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        value_at_end / rate
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials() {
        for n in [5usize, 6, 11, 12] {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h) - 0.25).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn cumulative_matches_exact() {
        let n = 401;
        let h = 8.0 / (n - 1) as f64;
        let z: Vec<f64> = (0..n).map(|i| -4.0 + i as f64 * h).collect();
        let v: Vec<f64> = z.iter().map(|z| z.cos()).collect();
        let mid = 200;
        let c = cumulative(&v, h, mid);
        for (i, zi) in z.iter().enumerate() {
            assert!((c[i] - zi.sin()).abs() < 1e-8, "{i}");
        }
    }

    #[test]
    fn tail_formula_is_exact_for_exponentials() {
        let r = 1.7;
        let z0: f64 = 3.0;
        assert!((tail_integral((-r * z0).exp(), r) - (-r * z0).exp() / r).abs() < 1e-16);
        assert_eq!(tail_integral(1.0, -1.0), 0.0);
    }
}
