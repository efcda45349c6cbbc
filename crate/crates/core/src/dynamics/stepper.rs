//! Integrating-factor Runge-Kutta stepping over flat complex vectors.

use num_complex::Complex64;

/// Lawson RK4 for `y' = −λ∘y + F(t, y)` with the linear factor `e^{−λh}`
/// applied exactly.
pub struct IfRk4<'a> {
    decay: &'a [f64],
}

fn scale(e: &[f64], y: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(e).map(|(y, e)| y * e).collect()
}

impl<'a> IfRk4<'a> {
    pub fn new(decay: &'a [f64]) -> Self {
        IfRk4 { decay }
    }

    /// One step of size `h` from `(t, y)`; `f` is the nonlinear part.
    pub fn step<F>(&self, f: &F, t: f64, y: &[Complex64], h: f64) -> Vec<Complex64>
    where
        F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
    {
        let e1: Vec<f64> = self.decay.iter().map(|l| (-l * h).exp()).collect();
        let e2: Vec<f64> = self.decay.iter().map(|l| (-l * 0.5 * h).exp()).collect();
        let hh = 0.5 * h;
        let k1 = f(t, y);
        let y2: Vec<Complex64> = (0..y.len()).map(|i| e2[i] * (y[i] + hh * k1[i])).collect();
        let k2 = f(t + hh, &y2);
        let y3: Vec<Complex64> = (0..y.len()).map(|i| e2[i] * y[i] + hh * k2[i]).collect();
        let k3 = f(t + hh, &y3);
        let y4: Vec<Complex64> = (0..y.len())
            .map(|i| e1[i] * y[i] + h * e2[i] * k3[i])
            .collect();
        let k4 = f(t + h, &y4);
        let ey = scale(&e1, y);
        (0..y.len())
            .map(|i| ey[i] + h / 6.0 * (e1[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i]))
            .collect()
    }
}

/// Phase-integrated midpoint step for `y' = −λ∘y + Φ'`, where `phi(t, τ, y)`
/// integrates the nonlinearity over `[t, t+τ]` with `y` frozen and its phases
/// treated exactly.
pub fn phase_midpoint_step<P>(
    decay: &[f64],
    phi: &P,
    t: f64,
    y: &[Complex64],
    h: f64,
) -> Vec<Complex64>
where
    P: Fn(f64, f64, &[Complex64]) -> Vec<Complex64>,
{
    let e1: Vec<f64> = decay.iter().map(|l| (-l * h).exp()).collect();
    let e2: Vec<f64> = decay.iter().map(|l| (-l * 0.5 * h).exp()).collect();
    let half = phi(t, 0.5 * h, y);
    let mid: Vec<Complex64> = (0..y.len()).map(|i| e2[i] * (y[i] + half[i])).collect();
    let full = phi(t, h, &mid);
    (0..y.len())
        .map(|i| e1[i] * y[i] + e2[i] * full[i])
        .collect()
}
