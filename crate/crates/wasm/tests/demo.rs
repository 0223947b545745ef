use svlab_wasm::{coupled_data, delay_data, spike_data};

#[test]
fn spike_windows_are_reciprocals() {
    let d = spike_data(0.32, 200, 0.1).unwrap();
    assert_eq!(d.windows.len(), 199);
    for (i, w) in d.windows.iter().enumerate() {
        let n = (i + 2) as f64;
        assert!((w - 1.0 / n).abs() < 1e-12 / n, "n = {n}");
    }
    assert_eq!(d.curve.len(), 1 + 3 * 199);
    assert!(d.s_epsilon.windows(2).all(|w| w[1] >= w[0]));
    assert!(spike_data(0.32, 1, 0.1).is_err());
    assert!(spike_data(-1.0, 10, 0.1).is_err());
}

#[test]
fn unit_rate_sve_is_the_ou_path() {
    let d = coupled_data(1.0, 0.5, 0.4, 5.0, 0.01, 9).unwrap();
    assert_eq!(d.t.len(), 501);
    assert_eq!(d.max_gap, 0.0);
    let other = coupled_data(2.0, 0.5, 0.4, 5.0, 0.01, 9).unwrap();
    assert!(other.max_gap > 0.0);
    assert!(coupled_data(1.0, 0.0, 1.0, 1e4, 1e-3, 0).is_err());
}

#[test]
fn delay_stability_switches_at_half_pi() {
    // x' = -a x(t - 1) is stable iff a < π/2
    let stable = delay_data(1.2, 1.0, 10.0, 0.01).unwrap();
    let unstable = delay_data(2.0, 1.0, 10.0, 0.01).unwrap();
    assert_eq!(serde_json::to_value(stable.verdict).unwrap(), "stable");
    assert_eq!(serde_json::to_value(unstable.verdict).unwrap(), "unstable");
    // zero history keeps r at 1 until t = tau
    let k = 50;
    assert_eq!(stable.resolvent[k], 1.0);
    assert!(stable.resolvent[150] < 1.0);
}
