use proptest::prelude::*;
use wigner_kg_cli::io::{read_bin, write_bin, Axis, Field, Table};

fn any_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>(),
        Just(f64::NAN),
        Just(-0.0),
        Just(f64::INFINITY),
        Just(f64::MIN_POSITIVE / 2.0),
    ]
}

proptest! {
    #[test]
    fn binary_round_trip_is_bit_exact(
        sizes in prop::collection::vec(1usize..6, 0..4),
        labels in prop::collection::vec("[a-zA-Z_μ]{0,6}", 4),
        deltas in prop::collection::vec(any_f64(), 4),
        seed in prop::collection::vec(any_f64(), 1..64),
    ) {
        let axes: Vec<Axis> = sizes.iter().enumerate().map(|(i, &s)| Axis::new(labels[i].clone(), s, deltas[i])).collect();
        let len: usize = sizes.iter().product();
        let data: Vec<f64> = (0..len).map(|i| seed[i % seed.len()]).collect();
        let f = Field::new(axes, data).unwrap();
        let mut buf = Vec::new();
        write_bin(&f, &mut buf).unwrap();
        let g = read_bin(&buf[..]).unwrap();
        prop_assert_eq!(g.axes.len(), f.axes.len());
        for (a, b) in f.axes.iter().zip(&g.axes) {
            prop_assert_eq!(&a.label, &b.label);
            prop_assert_eq!(a.size, b.size);
            prop_assert_eq!(a.delta.to_bits(), b.delta.to_bits());
        }
        prop_assert_eq!(f.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), g.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let mut again = Vec::new();
        write_bin(&g, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}

#[test]
fn table_csv_and_field_agree() {
    let mut t = Table::new(&["t", "charge"]);
    t.push(vec![0.0, 1.5]);
    t.push(vec![0.5, 1.25]);
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "t,charge\n0e0,1.5e0\n5e-1,1.25e0\n");
    let f = t.to_field();
    assert_eq!(f.data, vec![0.0, 1.5, 0.5, 1.25]);
    assert_eq!(t.column("charge").unwrap(), vec![1.5, 1.25]);
}
