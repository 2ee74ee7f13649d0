//! Carrier-based space-vector modulation by min-max common-mode injection.

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Duty cycles for the stationary voltage command `(v_alpha, v_beta)`.
/// The flag reports that at least one duty had to be clamped to `[0, 1]`.
pub fn duties_from_alpha_beta(v_alpha: f64, v_beta: f64, v_dc: f64) -> ([f64; 3], bool) {
    debug_assert!(v_dc > 0.0);
    let phases = [
        v_alpha,
        (-v_alpha + SQRT_3 * v_beta) / 2.0,
        (-v_alpha - SQRT_3 * v_beta) / 2.0,
    ];
    let max = phases.iter().copied().fold(f64::MIN, f64::max);
    let min = phases.iter().copied().fold(f64::MAX, f64::min);
    let cm = (max + min) / 2.0;
    let mut clamped = false;
    let duties = phases.map(|v| {
        let d = 0.5 + (v - cm) / v_dc;
        // tolerate rounding right at the linear-range boundary
        if !(-1e-12..=1.0 + 1e-12).contains(&d) {
            clamped = true;
        }
        d.clamp(0.0, 1.0)
    });
    (duties, clamped)
}
