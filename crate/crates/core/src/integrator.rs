//! Classical fourth-order Runge–Kutta time stepping.

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, Scalar};
use crate::pml::{PmlOperator, PmlState, WaveOperator, WaveState};

/// A state vector the integrator can combine in place.
pub trait OdeState: Clone {
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);
    fn assign(&mut self, other: &Self);
    fn all_finite(&self) -> bool;
}

/// Right-hand side `out = f(state)`; `out` is fully overwritten.
pub trait Rhs<S> {
    fn eval(&self, state: &S, out: &mut S);
}

impl<S, F: Fn(&S, &mut S)> Rhs<S> for F {
    fn eval(&self, state: &S, out: &mut S) {
        self(state, out)
    }
}

impl<T: Scalar> Rhs<WaveState<T>> for WaveOperator {
    fn eval(&self, state: &WaveState<T>, out: &mut WaveState<T>) {
        self.apply(state, out)
    }
}

impl<T: Scalar> Rhs<PmlState<T>> for PmlOperator {
    fn eval(&self, state: &PmlState<T>, out: &mut PmlState<T>) {
        self.apply(state, out)
    }
}

impl<T: Scalar> OdeState for Field<T> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.add_scaled(a, x)
    }
    fn assign(&mut self, other: &Self) {
        self.values_mut().copy_from_slice(other.values())
    }
    fn all_finite(&self) -> bool {
        Field::all_finite(self)
    }
}

impl<T: Scalar> OdeState for WaveState<T> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.u.add_scaled(a, &x.u);
        self.v.add_scaled(a, &x.v);
    }
    fn assign(&mut self, other: &Self) {
        self.u.assign(&other.u);
        self.v.assign(&other.v);
    }
    fn all_finite(&self) -> bool {
        self.u.all_finite() && self.v.all_finite()
    }
}

impl<T: Scalar> OdeState for PmlState<T> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (p, q) in self.fields_mut().zip(x.fields()) {
            p.add_scaled(a, q);
        }
    }
    fn assign(&mut self, other: &Self) {
        for (p, q) in self.fields_mut().zip(other.fields()) {
            p.assign(q);
        }
    }
    fn all_finite(&self) -> bool {
        self.fields().all(|f| f.all_finite())
    }
}

/// Uniform time levels `t0 + n·dt`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub t0: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self { dt, steps, t0: 0.0 })
    }

    /// Smallest number of equal steps of size at most `dt_max` that lands
    /// exactly on `t_end`.
    pub fn covering(t_end: f64, dt_max: f64) -> Result<Self> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::param("t_end", format!("must be finite and >= 0, got {t_end}")));
        }
        if !(dt_max > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt_max}")));
        }
        let steps = (t_end / dt_max * (1.0 - 1e-12)).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(Self { dt: dt_max, steps: 0, t0: 0.0 });
        }
        Self::new(t_end / steps as f64, steps)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps)
    }
}

/// Largest step `safety·√2·Δx/√d`: the undamped spectrum reaches
/// `±2i√d/Δx` and RK4 is stable on the imaginary axis up to `2√2`.
pub fn stable_dt(grid: &GridSpec, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::param("safety", format!("must lie in (0, 1], got {safety}")));
    }
    Ok(safety * std::f64::consts::SQRT_2 * grid.dx() / (grid.dim() as f64).sqrt())
}

/// RK4 stepper with preallocated stage buffers.
pub struct Rk4<S> {
    k: [S; 4],
    tmp: S,
}

impl<S: OdeState> Rk4<S> {
    /// Buffers are shaped after `template`.
    pub fn new(template: &S) -> Self {
        Self {
            k: std::array::from_fn(|_| template.clone()),
            tmp: template.clone(),
        }
    }

    /// Advances `y` by `dt`. `step` only labels the error.
    pub fn step<R: Rhs<S> + ?Sized>(&mut self, rhs: &R, y: &mut S, dt: f64, step: usize) -> Result<()> {
        const NODES: [f64; 3] = [0.5, 0.5, 1.0];
        rhs.eval(y, &mut self.k[0]);
        if !self.k[0].all_finite() {
            return Err(Error::Instability { step, stage: 1 });
        }
        for stage in 1..4 {
            let (done, rest) = self.k.split_at_mut(stage);
            self.tmp.assign(y);
            self.tmp.axpy(NODES[stage - 1] * dt, &done[stage - 1]);
            rhs.eval(&self.tmp, &mut rest[0]);
            if !rest[0].all_finite() {
                return Err(Error::Instability { step, stage: stage + 1 });
            }
        }
        y.axpy(dt / 6.0, &self.k[0]);
        y.axpy(dt / 3.0, &self.k[1]);
        y.axpy(dt / 3.0, &self.k[2]);
        y.axpy(dt / 6.0, &self.k[3]);
        if !y.all_finite() {
            return Err(Error::Instability { step, stage: 4 });
        }
        Ok(())
    }
}

/// Integrates over `time`, calling `observe(step, t, state)` at step 0,
/// every `period` steps and at the final step.
pub fn simulate<S, R, O>(initial: S, rhs: &R, time: TimeGrid, period: usize, mut observe: O) -> Result<S>
where
    S: OdeState,
    R: Rhs<S> + ?Sized,
    O: FnMut(usize, f64, &S) -> Result<()>,
{
    let period = period.max(1);
    let mut y = initial;
    let mut rk = Rk4::new(&y);
    observe(0, time.time(0), &y)?;
    for n in 1..=time.steps {
        rk.step(rhs, &mut y, time.dt, n)?;
        if n % period == 0 || n == time.steps {
            observe(n, time.time(n), &y)?;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn oscillator(s: &WaveState<f64>, out: &mut WaveState<f64>) {
        // u'' = -u on every cell
        out.u.assign(&s.v);
        out.v.assign(&s.u);
        out.v.values_mut().iter_mut().for_each(|x| *x = -*x);
    }

    fn oscillator_error(steps: usize) -> f64 {
        let grid = make_grid(1, 1.0, 4).unwrap();
        let mut s = WaveState::<f64>::zeros(grid);
        s.u.values_mut().fill(1.0);
        let tg = TimeGrid::covering(2.0, 2.0 / steps as f64).unwrap();
        let end = simulate(s, &oscillator, tg, usize::MAX, |_, _, _| Ok(())).unwrap();
        (end.u.values()[0] - 2.0f64.cos()).abs()
    }

    #[test]
    fn fourth_order_convergence() {
        let e1 = oscillator_error(20);
        let e2 = oscillator_error(40);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.15, "order {order}");
    }

    #[test]
    fn single_step_matches_taylor_polynomial() {
        // For y' = y one step multiplies by 1 + h + h²/2 + h³/6 + h⁴/24.
        let grid = make_grid(1, 1.0, 4).unwrap();
        let mut y = Field::from_values(grid, vec![1.0; 4]).unwrap();
        let h = 0.3;
        let mut rk = Rk4::new(&y);
        rk.step(&|s: &Field<f64>, o: &mut Field<f64>| o.assign(s), &mut y, h, 1).unwrap();
        let want = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((y.values()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn observer_schedule() {
        let grid = make_grid(1, 1.0, 4).unwrap();
        let tg = TimeGrid::new(0.1, 7).unwrap();
        let mut seen = Vec::new();
        simulate(WaveState::<f64>::zeros(grid), &WaveOperator, tg, 3, |n, t, _| {
            seen.push((n, t));
            Ok(())
        })
        .unwrap();
        let steps: Vec<usize> = seen.iter().map(|p| p.0).collect();
        assert_eq!(steps, vec![0, 3, 6, 7]);
        assert!((seen[3].1 - 0.7).abs() < 1e-15);
    }

    #[test]
    fn instability_is_reported() {
        let grid = make_grid(1, 1.0, 4).unwrap();
        let y = Field::from_values(grid, vec![1.0; 4]).unwrap();
        let blow = |s: &Field<f64>, o: &mut Field<f64>| {
            o.assign(s);
            o.values_mut()[0] *= 1e300;
        };
        let tg = TimeGrid::new(1e10, 5).unwrap();
        match simulate(y, &blow, tg, 1, |_, _, _| Ok(())) {
            Err(Error::Instability { step, .. }) => assert_eq!(step, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stable_dt_formula() {
        let g = make_grid(2, 0.1, 8).unwrap();
        let dt = stable_dt(&g, 0.5).unwrap();
        assert!((dt - 0.05).abs() < 1e-15);
        assert!(stable_dt(&g, 0.0).is_err());
        assert!(stable_dt(&g, 1.5).is_err());
    }

    #[test]
    fn covering_time_grid() {
        let tg = TimeGrid::covering(1.0, 0.3).unwrap();
        assert_eq!(tg.steps, 4);
        assert!((tg.t_end() - 1.0).abs() < 1e-15);
        let exact = TimeGrid::covering(1.0, 0.25).unwrap();
        assert_eq!(exact.steps, 4);
        assert!(TimeGrid::new(-1.0, 3).is_err());
    }

    #[test]
    fn wave_energy_is_nearly_conserved_at_stable_dt() {
        let grid = make_grid(1, 0.1, 64).unwrap();
        let u = Field::from_lattice_fn(grid, |c| (-(c[0] as f64 * 0.1 / 0.6).powi(2)).exp());
        let s = WaveState::new(u, Field::zeros(grid)).unwrap();
        let energy = |s: &WaveState<f64>| {
            let up = s.u.shift(0, 1).unwrap();
            let kin: f64 = s.v.values().iter().map(|v| v * v).sum();
            let pot: f64 = up.values().iter().zip(s.u.values()).map(|(a, b)| ((a - b) / 0.1).powi(2)).sum();
            0.5 * (kin + pot)
        };
        let e0 = energy(&s);
        let tg = TimeGrid::covering(2.0, stable_dt(&grid, 0.5).unwrap()).unwrap();
        let end = simulate(s, &WaveOperator, tg, usize::MAX, |_, _, _| Ok(())).unwrap();
        let drift = (energy(&end) - e0).abs() / e0;
        assert!(drift < 1e-3, "drift {drift}");
    }
}
