use proptest::prelude::*;
use wsnsim::election::{weighted_probabilities, ElectionBookkeeping};
use wsnsim::report::{emit_csv, parse_series_csv};
use wsnsim::{simulate, summarize, Point, Protocol, SimConfig, Simulation};

fn protocol() -> impl Strategy<Value = Protocol> {
    prop::sample::select(Protocol::ALL.to_vec())
}

fn small_config() -> impl Strategy<Value = SimConfig> {
    (
        5usize..60,
        40.0f64..200.0,
        0.05f64..0.3,
        0.0f64..3.0,
        0.0f64..0.3,
        0.05f64..0.3,
        0.1f64..1.0,
        any::<u64>(),
    )
        .prop_map(|(n, side, p_opt, alpha, m, x, p_h, seed)| SimConfig {
            n_nodes: n,
            field_width: side,
            field_height: side,
            bs_position: Point::new(side / 2.0, side * 1.2),
            p_opt,
            alpha,
            m,
            intermediate_fraction: x,
            p_h,
            max_rounds: 400,
            seed,
            ..SimConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_are_reproducible(c in small_config(), p in protocol()) {
        let a = simulate(&c, p).unwrap();
        let b = simulate(&c, p).unwrap();
        prop_assert_eq!(&a, &b);
        let mut x = Vec::new();
        let mut y = Vec::new();
        emit_csv(&a, &mut x).unwrap();
        emit_csv(&b, &mut y).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn csv_parses_back_exactly(c in small_config(), p in protocol()) {
        let s = simulate(&c, p).unwrap();
        let mut buf = Vec::new();
        emit_csv(&s, &mut buf).unwrap();
        prop_assert_eq!(parse_series_csv(&buf[..]).unwrap(), s.rows);
    }

    #[test]
    fn summary_events_ordered(c in small_config(), p in protocol()) {
        let mut c = c;
        c.max_rounds = 10_000;
        let s = simulate(&c, p).unwrap();
        let sum = summarize(&s).unwrap();
        prop_assert_eq!(summarize(&s).unwrap(), sum);
        if let (Some(f), Some(h), Some(l)) = (sum.fnd, sum.hnd, sum.lnd) {
            prop_assert!(f <= h && h <= l);
        }
        let last = s.rows.last().unwrap();
        prop_assert!(last.alive == 0 || last.round == c.max_rounds);
    }

    #[test]
    fn bookkeeping_consistent(c in small_config(), p in protocol()) {
        let mut sim = Simulation::new(&c, p).unwrap();
        while sim.step().unwrap().is_some() {
            for n in &sim.state().nodes {
                let ElectionBookkeeping { eligible, rounds_until_eligible, .. } = n.election;
                prop_assert_eq!(eligible, rounds_until_eligible == 0);
                prop_assert!(n.residual_energy >= 0.0 && n.residual_energy <= n.initial_energy);
                prop_assert_eq!(n.alive, n.residual_energy > 0.0);
            }
        }
    }

    #[test]
    fn hsep_secondaries_within_primaries(c in small_config()) {
        let mut sim = Simulation::new(&c, Protocol::Hsep).unwrap();
        while let Some((out, _)) = sim.step().unwrap() {
            for s in &out.secondary_chs {
                prop_assert!(out.primary_chs.contains(s));
            }
            prop_assert_eq!(out.packets_to_bs as usize, out.uplink_chs().len());
            for (primary, secondary) in &out.relays {
                prop_assert!(out.primary_chs.contains(primary));
                prop_assert!(out.secondary_chs.contains(secondary));
            }
        }
    }
}

/// Monte Carlo over 2000 rounds without deaths: mean head count within 15%
/// of N * p_opt for every class-weighted protocol.
#[test]
fn mean_head_count_near_target() {
    for p in [
        Protocol::Leach,
        Protocol::Sep,
        Protocol::Esep,
        Protocol::Hsep,
    ] {
        let mut c = SimConfig {
            seed: 17,
            max_rounds: 2000,
            ..SimConfig::default()
        };
        c.energy.e0 = 1e9;
        let s = simulate(&c, p).unwrap();
        let mean = s.rows.iter().map(|r| r.primary_chs as f64).sum::<f64>() / s.rows.len() as f64;
        assert!((mean - 10.0).abs() <= 1.5, "{p}: mean {mean}");
    }
}

#[test]
fn deec_head_count_near_target() {
    let mut c = SimConfig {
        seed: 17,
        max_rounds: 2000,
        ..SimConfig::default()
    };
    c.energy.e0 = 1e9;
    let s = simulate(&c, Protocol::Deec).unwrap();
    let mean = s.rows.iter().map(|r| r.primary_chs as f64).sum::<f64>() / s.rows.len() as f64;
    // heterogeneity is counted twice (class weight and residual ratio), so the
    // expected count sits above N * p_opt
    let cp = weighted_probabilities(0.1, 1.0, 0.1, 0.3, 0.0).unwrap();
    let avg = (90.0 * 1.0 + 10.0 * 2.0) / 100.0;
    let expected = 90.0 * cp.p_nrm * 1.0 / avg + 10.0 * cp.p_adv * 2.0 / avg;
    assert!(
        (mean - expected).abs() <= 0.15 * expected,
        "mean {mean}, expected {expected}"
    );
}

#[test]
fn leach_and_deec_agree_in_homogeneous_network() {
    for seed in 0..10 {
        let c = SimConfig {
            seed,
            alpha: 0.0,
            m: 0.0,
            ..SimConfig::default()
        };
        let mut a = Simulation::new(&c, Protocol::Leach).unwrap();
        let mut b = Simulation::new(&c, Protocol::Deec).unwrap();
        let (ra, _) = a.step().unwrap().unwrap();
        let (rb, _) = b.step().unwrap().unwrap();
        assert_eq!(ra, rb);
    }
}

#[test]
fn residual_total_tracks_energy_spent() {
    for p in Protocol::ALL {
        let c = SimConfig {
            seed: 8,
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(&c, p).unwrap();
        let mut prev = sim.state().residual_total();
        assert!((prev - sim.state().total_initial_energy).abs() < 1e-12);
        while let Some((out, row)) = sim.step().unwrap() {
            let dec = prev - row.energy_total;
            assert!(
                (dec - out.energy_spent).abs() <= 1e-9 * out.energy_spent.max(1e-12),
                "{p} round {}",
                out.round
            );
            prev = row.energy_total;
        }
    }
}
