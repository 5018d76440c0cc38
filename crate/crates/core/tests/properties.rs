//! Property tests over randomized inputs.

use proptest::prelude::*;

use qubench_core::{uhlmann_fidelity, Axis, BlochState, Envelope, PulseSpec};

proptest! {
    /// Every envelope integrates to its nominal angle, whatever the
    /// geometry.
    #[test]
    fn envelope_integral_equals_angle(
        theta in 0.05f64..6.0,
        gate_ns in 5.0f64..200.0,
        window_frac in 0.2f64..1.0,
        cosine in any::<bool>(),
    ) {
        let t_g = gate_ns * 1e-9;
        let tau = window_frac * t_g;
        let envelope = if cosine { Envelope::Cosine } else { Envelope::Square };
        let spec = PulseSpec::new(Axis::X, 1, theta, t_g, tau, envelope).unwrap();
        let start = spec.padding();
        let n = 4000;
        let dt = tau / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let t0 = start + i as f64 * dt;
            acc += dt / 6.0
                * (spec.envelope_amplitude(t0)
                    + 4.0 * spec.envelope_amplitude(t0 + 0.5 * dt)
                    + spec.envelope_amplitude((t0 + dt).min(start + tau)));
        }
        prop_assert!((acc - theta).abs() / theta < 1e-6);
    }

    /// Bloch <-> density-matrix round trip for arbitrary pure states.
    #[test]
    fn bloch_density_roundtrip(theta in 0.0f64..std::f64::consts::PI, phi in -3.2f64..3.2) {
        let b = BlochState::pure(theta, phi);
        let back = b.density().bloch().unwrap();
        prop_assert!((b.v - back.v).norm() < 1e-12);
    }

    /// Uhlmann fidelity of arbitrary Bloch-ball states stays in [0, 1] and
    /// is symmetric.
    #[test]
    fn uhlmann_bounded_and_symmetric(
        r1 in 0.0f64..1.0, t1 in 0.0f64..std::f64::consts::PI, p1 in -3.2f64..3.2,
        r2 in 0.0f64..1.0, t2 in 0.0f64..std::f64::consts::PI, p2 in -3.2f64..3.2,
    ) {
        let mk = |r: f64, t: f64, p: f64| {
            let pure = BlochState::pure(t, p);
            BlochState::new(pure.v * r).density()
        };
        let a = mk(r1, t1, p1);
        let b = mk(r2, t2, p2);
        let f_ab = uhlmann_fidelity(&a, &b).unwrap();
        let f_ba = uhlmann_fidelity(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&f_ab));
        prop_assert!((f_ab - f_ba).abs() < 1e-10);
    }

    /// Coherent-error angles round-trip through the stored rate fields.
    #[test]
    fn coherent_error_roundtrip(
        dtheta in -0.1f64..0.1,
        dphi in -0.1f64..0.1,
    ) {
        let spec = PulseSpec::square_pi(Axis::Y, 1).with_angle_errors(dtheta, dphi);
        let (t, p) = qubench_core::coherent_errors(&spec).unwrap();
        prop_assert!((t - dtheta).abs() < 1e-12);
        prop_assert!((p - dphi).abs() < 1e-12);
    }

    /// Seeded binomial sampling is deterministic and stays in [0, 1].
    #[test]
    fn binomial_fraction_contained(seed in any::<u64>(), p in 0.0f64..1.0) {
        let mut rng1 = qubench_core::rng::seeded(seed);
        let mut rng2 = qubench_core::rng::seeded(seed);
        let a = qubench_core::rng::binomial_fraction(&mut rng1, 800, p);
        let b = qubench_core::rng::binomial_fraction(&mut rng2, 800, p);
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}
