//! Amplitude-invariant Clarke and Park transforms.

const INV_SQRT_3: f64 = 0.577_350_269_189_625_8;
const SQRT_3_2: f64 = 0.866_025_403_784_438_6;

/// Phase currents a, b (c = −a − b) to the stationary frame.
pub fn clarke(i_a: f64, i_b: f64) -> (f64, f64) {
    (i_a, (i_a + 2.0 * i_b) * INV_SQRT_3)
}

/// Stationary frame back to phases a, b, c.
pub fn inverse_clarke(alpha: f64, beta: f64) -> [f64; 3] {
    [alpha, -0.5 * alpha + SQRT_3_2 * beta, -0.5 * alpha - SQRT_3_2 * beta]
}

pub fn park(alpha: f64, beta: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (alpha * c + beta * s, -alpha * s + beta * c)
}

pub fn inverse_park(d: f64, q: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (d * c - q * s, d * s + q * c)
}
