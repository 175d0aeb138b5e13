//! CSV exports. Column contract: first column `t` printed with nine fixed
//! decimals; every other value in scientific notation with full round-trip
//! precision; complex quantities as paired `<name>_re`, `<name>_im` columns;
//! header row always present; rows in time order.

use std::fmt::Write as _;

use num_complex::Complex64;
use qsync_core::analysis::decoherence_measure;
use qsync_core::consensus::{max_sq_modulus_series, ClassicalTrajectory};
use qsync_core::lindblad::{DiagonalHamiltonian, Trajectory};

fn push_time(out: &mut String, t: f64) {
    let _ = write!(out, "{t:.9}");
}

fn push_value(out: &mut String, v: f64) {
    let _ = write!(out, ",{v:e}");
}

/// Diagonal entries, one column per basis label bitstring: t,d000,d001,...
pub fn diagonals_csv(traj: &Trajectory) -> String {
    let n = traj.meta.n;
    let dim = 1usize << n;
    let mut out = String::from("t");
    for x in 0..dim {
        let _ = write!(out, ",d{x:0width$b}", width = n);
    }
    out.push('\n');
    for (t, state) in traj.times.iter().zip(&traj.states) {
        push_time(&mut out, *t);
        for x in 0..dim {
            push_value(&mut out, state.entry(x, x).re);
        }
        out.push('\n');
    }
    out
}

/// The off-diagonal decoherence measure: t,E_o
pub fn eo_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,E_o\n");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        push_time(&mut out, *t);
        push_value(&mut out, decoherence_measure(state));
        out.push('\n');
    }
    out
}

/// The top-right corner entry against its predicted pure phase rotation:
/// t,corner_re,corner_im,corner_modulus,phase_error
pub fn corner_csv(traj: &Trajectory, h: &DiagonalHamiltonian) -> String {
    let corner = (1usize << traj.meta.n) - 1;
    let rate = h.rotation_rate(0, corner);
    let c0 = traj.states[0].entry(0, corner);
    let mut out = String::from("t,corner_re,corner_im,corner_modulus,phase_error\n");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let actual = state.entry(0, corner);
        let predicted = c0 * Complex64::from_polar(1.0, rate * t);
        push_time(&mut out, *t);
        push_value(&mut out, actual.re);
        push_value(&mut out, actual.im);
        push_value(&mut out, actual.norm());
        push_value(&mut out, (actual - predicted).norm());
        out.push('\n');
    }
    out
}

/// Classical node states: t,x1_re,x1_im,...,xN_re,xN_im
pub fn states_csv(traj: &ClassicalTrajectory) -> String {
    let n = traj.values[0].len();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}_re,x{i}_im");
    }
    out.push('\n');
    for (t, vals) in traj.times.iter().zip(&traj.values) {
        push_time(&mut out, *t);
        for v in vals {
            push_value(&mut out, v.re);
            push_value(&mut out, v.im);
        }
        out.push('\n');
    }
    out
}

/// The Lyapunov series f(t) = max_i |X_i|^2: t,f
pub fn fmax_csv(traj: &ClassicalTrajectory) -> String {
    let report = max_sq_modulus_series(traj);
    let mut out = String::from("t,f\n");
    for (t, f) in report.series {
        push_time(&mut out, t);
        push_value(&mut out, f);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsync_core::consensus::{integrate_classical, ClassicalSystem};
    use qsync_core::hilbert::DensityMatrix;
    use qsync_core::lindblad::{integrate, StepParams};
    use qsync_core::presets;

    fn tiny_hamiltonian() -> DiagonalHamiltonian {
        DiagonalHamiltonian::zero(3).unwrap()
    }

    fn tiny_trajectory() -> Trajectory {
        let rho0 = DensityMatrix::maximally_mixed(3).unwrap();
        let params = StepParams::new(0.01, 0.2, 0.1).unwrap();
        integrate(&rho0, &tiny_hamiltonian(), &presets::demo_graph(), &params).unwrap()
    }

    #[test]
    fn diagonal_header_lists_bitstrings() {
        let csv = diagonals_csv(&tiny_trajectory());
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "t,d000,d001,d010,d011,d100,d101,d110,d111");
    }

    #[test]
    fn eo_and_corner_headers() {
        let traj = tiny_trajectory();
        assert_eq!(eo_csv(&traj).lines().next().unwrap(), "t,E_o");
        assert_eq!(
            corner_csv(&traj, &tiny_hamiltonian()).lines().next().unwrap(),
            "t,corner_re,corner_im,corner_modulus,phase_error"
        );
    }

    #[test]
    fn time_column_is_fixed_point_with_nine_decimals() {
        let csv = eo_csv(&tiny_trajectory());
        let first_row = csv.lines().nth(1).unwrap();
        assert!(first_row.starts_with("0.000000000,"));
    }

    #[test]
    fn classical_headers_pair_re_and_im() {
        let sys = ClassicalSystem::new(vec![0.0, 1.0], vec![(0, 1)]).unwrap();
        let x0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let params = StepParams::new(0.01, 0.5, 0.25).unwrap();
        let traj = integrate_classical(&sys, &x0, &params).unwrap();
        assert_eq!(
            states_csv(&traj).lines().next().unwrap(),
            "t,x1_re,x1_im,x2_re,x2_im"
        );
        assert_eq!(fmax_csv(&traj).lines().next().unwrap(), "t,f");
    }

    #[test]
    fn row_count_matches_samples() {
        let traj = tiny_trajectory();
        let csv = diagonals_csv(&traj);
        assert_eq!(csv.lines().count(), traj.len() + 1);
    }
}
