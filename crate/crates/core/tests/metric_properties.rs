use originality::{DescriptorParams, Metric, ShapeDescriptor};
use proptest::prelude::*;

fn params() -> DescriptorParams {
    DescriptorParams { grid: 8, radii: 4, degree: 3, bandwidth: 4, density: 100.0, seed: 0 }
}

fn descriptor() -> impl Strategy<Value = ShapeDescriptor> {
    prop::collection::vec(0.0..10.0f64, 16).prop_map(|e| ShapeDescriptor::from_energies(params(), e).unwrap())
}

proptest! {
    #[test]
    fn triangle_inequality(a in descriptor(), b in descriptor(), c in descriptor()) {
        for m in [Metric::L2, Metric::L1] {
            let (ab, bc, ac) = (m.distance(&a, &b).unwrap(), m.distance(&b, &c).unwrap(), m.distance(&a, &c).unwrap());
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn symmetric_and_zero_on_self(a in descriptor(), b in descriptor()) {
        for m in [Metric::L2, Metric::L1] {
            prop_assert_eq!(m.distance(&a, &b).unwrap(), m.distance(&b, &a).unwrap());
            prop_assert_eq!(m.distance(&a, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn scaling_scales_distance(a in descriptor(), b in descriptor(), k in 0u32..8) {
        let f = 2f64.powi(k as i32 - 4);
        let d = Metric::L2.distance(&a, &b).unwrap();
        prop_assert_eq!(Metric::L2.distance(&a.scaled(f), &b.scaled(f)).unwrap(), d * f);
    }
}

#[test]
fn mismatched_parameters_are_refused() {
    let a = ShapeDescriptor::from_energies(params(), vec![1.0; 16]).unwrap();
    let p = DescriptorParams { seed: 1, ..params() };
    let b = ShapeDescriptor::from_energies(p, vec![1.0; 16]).unwrap();
    assert!(Metric::L2.distance(&a, &b).is_err());
}
