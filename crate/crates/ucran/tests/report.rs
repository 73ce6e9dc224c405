use proptest::prelude::*;
use ucran::report::{parse_csv, sig6, to_csv, to_txt};
use ucran_core::{Architecture, MetricsReport, MetricsRow};

fn value() -> impl Strategy<Value = Option<f64>> {
    prop_oneof![
        1 => Just(None),
        1 => Just(Some(0.0)),
        6 => (-12i32..12, 1.0..10.0f64).prop_map(|(e, m)| Some(m * 10f64.powi(e))),
    ]
}

fn row() -> impl Strategy<Value = MetricsRow> {
    (0usize..3, 1u32..5000, 1u32..20, prop::collection::vec(value(), 6)).prop_map(|(a, ue, seeds, v)| MetricsRow {
        architecture: Architecture::ALL[a],
        ue_count: ue,
        seed_count: seeds,
        avg_e2e_delay_s: v[0],
        delay_ci: v[1],
        blocking_probability: v[2],
        blocking_ci: v[3],
        total_power_w: v[4],
        power_ci: v[5],
    })
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 5e-6 * y.abs(),
        _ => false,
    }
}

proptest! {
    #[test]
    fn csv_round_trip_keeps_six_digits(rows in prop::collection::vec(row(), 1..30)) {
        let report = MetricsReport { rows };
        let text = to_csv(&report);
        prop_assert_eq!(text.lines().count(), report.rows.len() + 1);
        prop_assert_eq!(&text, &to_csv(&report));
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(back.rows.len(), report.rows.len());
        for (a, b) in back.rows.iter().zip(&report.rows) {
            prop_assert_eq!(a.architecture, b.architecture);
            prop_assert_eq!(a.ue_count, b.ue_count);
            prop_assert_eq!(a.seed_count, b.seed_count);
            for (x, y) in [
                (a.avg_e2e_delay_s, b.avg_e2e_delay_s),
                (a.delay_ci, b.delay_ci),
                (a.blocking_probability, b.blocking_probability),
                (a.blocking_ci, b.blocking_ci),
                (a.total_power_w, b.total_power_w),
                (a.power_ci, b.power_ci),
            ] {
                prop_assert!(close(x, y), "{:?} vs {:?}", x, y);
            }
        }
        // a second pass is a fixed point
        prop_assert_eq!(to_csv(&back), text);
        prop_assert_eq!(to_txt(&report).lines().count(), report.rows.len() + 1);
    }

    #[test]
    fn sig6_has_at_most_six_digits(v in -1e9..1e9f64) {
        let s = sig6(v);
        let mantissa = s.split('e').next().unwrap();
        let digits = mantissa.chars().filter(char::is_ascii_digit).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 6, "{}", s);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs() + f64::MIN_POSITIVE);
    }
}

#[test]
fn thirty_rows_make_thirty_one_lines() {
    let rows = Architecture::ALL
        .iter()
        .flat_map(|&a| {
            (1..=10).map(move |k| MetricsRow {
                architecture: a,
                ue_count: k * 100,
                seed_count: 5,
                avg_e2e_delay_s: Some(0.01 * f64::from(k)),
                delay_ci: Some(0.001),
                blocking_probability: Some(0.0),
                blocking_ci: None,
                total_power_w: Some(300.0),
                power_ci: Some(1.5),
            })
        })
        .collect();
    let csv = to_csv(&MetricsReport { rows });
    assert_eq!(csv.lines().count(), 31);
}
