//! Finite-difference stencils and composite quadrature on uniform samples.

/// Five-point central first derivative at interior index `i` (needs `2 ≤ i < n-2`).
#[inline]
pub fn first_derivative<T>(f: &[T], i: usize, h: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (f[i - 2] - f[i + 2] + (f[i + 1] - f[i - 1]) * 8.0) * (1.0 / (12.0 * h))
}

/// Five-point central second derivative at interior index `i`.
#[inline]
pub fn second_derivative<T>(f: &[T], i: usize, h: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    ((f[i + 1] + f[i - 1]) * 16.0 - (f[i + 2] + f[i - 2]) - f[i] * 30.0) * (1.0 / (12.0 * h * h))
}

/// Interior indices where the five-point stencils apply.
pub fn interior(n: usize) -> std::ops::Range<usize> {
    2..n.saturating_sub(2)
}

/// Composite Simpson rule; an even point count closes with a 3/8 panel.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ if n % 2 == 1 => simpson_odd(f, h),
        _ => {
            let head = simpson_odd(&f[..n - 3], h);
            let t = &f[n - 4..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_odd(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    let mut acc = f[0] + f[n - 1];
    for (i, v) in f.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}
