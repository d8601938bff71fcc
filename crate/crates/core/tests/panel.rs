use diffdisc::panel::{first_difference, load_panel, period_slice, validate_panel, ColumnMapping};
use diffdisc::{Observation, PanelDataset};
use proptest::prelude::*;

fn arb_panel() -> impl Strategy<Value = PanelDataset> {
    prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -50.0f64..50.0), 2..60).prop_map(|units| {
        let mut obs = Vec::new();
        for (i, (y0, y1, d)) in units.into_iter().enumerate() {
            obs.push(Observation::new(format!("unit {i}"), 0, y0, d));
            obs.push(Observation::new(format!("unit {i}"), 1, y1, d));
        }
        // Guarantee both sides of the cutoff.
        for (id, d) in [("left", -1.0), ("right", 1.0)] {
            obs.push(Observation::new(id, 0, 0.0, d));
            obs.push(Observation::new(id, 1, 0.0, d));
        }
        PanelDataset::new(obs, "arb")
    })
}

proptest! {
    #[test]
    fn swap_negates_first_difference(data in arb_panel()) {
        prop_assert!(validate_panel(&data).is_valid);
        let a = first_difference(&data).unwrap();
        let b = first_difference(&data.with_periods_swapped()).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            prop_assert_eq!(&p.unit_id, &q.unit_id);
            prop_assert_eq!(p.value, -q.value);
        }
    }

    #[test]
    fn first_difference_is_slice_difference(data in arb_panel()) {
        let fd = first_difference(&data).unwrap();
        let s0 = period_slice(&data, 0).unwrap();
        let s1 = period_slice(&data, 1).unwrap();
        let pre: std::collections::HashMap<_, _> =
            s0.points().iter().map(|p| (p.unit_id.clone(), p.value)).collect();
        prop_assert_eq!(fd.len(), s1.len());
        for p in s1.points() {
            let f = fd.points().iter().find(|q| q.unit_id == p.unit_id).unwrap();
            prop_assert_eq!(f.value, p.value - pre[&p.unit_id]);
        }
    }

    #[test]
    fn csv_round_trip_is_lossless(data in arb_panel()) {
        let cols = ColumnMapping {
            unit: "id".into(),
            period: "t".into(),
            outcome: "y".into(),
            distance: "km".into(),
        };
        let mut buf = Vec::new();
        data.write_csv(&mut buf, &cols).unwrap();
        let back = load_panel(buf.as_slice(), &cols).unwrap();
        prop_assert_eq!(back.observations(), data.observations());
    }
}

#[test]
fn hundred_unit_slices() {
    let data = diffdisc::dgp::generate_panel(
        &diffdisc::dgp::DgpSpec {
            n_units: 100,
            ..Default::default()
        },
        3,
    )
    .unwrap();
    assert_eq!(period_slice(&data, 0).unwrap().len(), 100);
    assert_eq!(period_slice(&data, 1).unwrap().len(), 100);
}

#[test]
fn scientific_notation_accepted() {
    let text = "unit_id,period,outcome,distance\na,0,1.5e-3,-2E1\n";
    let data = load_panel(text.as_bytes(), &ColumnMapping::default()).unwrap();
    assert_eq!(data.observations()[0].outcome, 0.0015);
    assert_eq!(data.observations()[0].distance, -20.0);
}
