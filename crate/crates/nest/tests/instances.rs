use nest::instance::{
    gen_random_connected, gen_rough_rectangle, parse_instance, rough_rectangle_sides,
    serialize_instance,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_fields_are_connected_and_round_trip(z in 1u64..300, seed in any::<u64>()) {
        let spec = gen_random_connected(z, seed).unwrap();
        prop_assert_eq!(spec.z(), z);
        prop_assert!(spec.field.is_connected());
        prop_assert_eq!(Some(spec.start), spec.field.iter().next());
        prop_assert_eq!(parse_instance(&serialize_instance(&spec)).unwrap(), spec);
    }

    #[test]
    fn rough_rectangle_span_is_close_to_its_sides(z in 20u64..3000, frac in 0.05f64..0.95) {
        let s_prime = ((z as f64 * frac) as u64).clamp(1, z - 1);
        let spec = gen_rough_rectangle(z, s_prime).unwrap();
        let (a, b) = rough_rectangle_sides(z, s_prime);
        prop_assert_eq!(spec.z(), z);
        prop_assert!(z - a * b < b);
        let span = spec.field.span();
        if a > 0 {
            prop_assert!(a + b - 2 <= span && span <= a + b, "a={} b={} span={}", a, b, span);
        } else {
            prop_assert_eq!(span, z - 1);
        }
        prop_assert_eq!(parse_instance(&serialize_instance(&spec)).unwrap(), spec);
    }
}

#[test]
fn exact_rectangle_has_no_remainder() {
    let spec = gen_rough_rectangle(1600, 400).unwrap();
    assert_eq!(rough_rectangle_sides(1600, 400), (4, 400));
    assert_eq!(spec.field.span(), 3 + 399);
    assert_eq!(spec.field.iter().filter(|c| c.y == 4).count(), 0);
}

#[test]
fn small_case_uses_the_wide_side() {
    // 10 * sqrt(10) rounds up to 32 > 10, so the block is empty and the
    // remainder is a single row of ten cells.
    let spec = gen_rough_rectangle(10, 4).unwrap();
    assert!(spec.field.iter().all(|c| c.y == 0));
    assert_eq!(spec.field.span(), 9);
}
