mod common;

use esn_chip::fixed_point::FxFormat;
use esn_chip::FxValue;
use proptest::prelude::*;

#[test]
fn randomized_cases_match_exact_arithmetic() {
    let run = common::fixed_point_battery(100_000, 0xF1DE);
    assert!(run.mismatches.is_empty(), "{:#?}", run.mismatches);
}

fn format() -> impl Strategy<Value = FxFormat> {
    (2u32..=32).prop_flat_map(|t| (Just(t), 0..t)).prop_map(|(t, f)| FxFormat::new(t, f).unwrap())
}

fn value() -> impl Strategy<Value = FxValue> {
    format().prop_flat_map(|f| (f.min_raw()..=f.max_raw()).prop_map(move |r| FxValue::from_raw(r, f)))
}

proptest! {
    #[test]
    fn quantize_round_trips(v in value()) {
        prop_assert_eq!(FxValue::quantize(v.to_f64(), v.format()), v);
    }

    #[test]
    fn quantize_stays_in_range(x in -1e12f64..1e12, f in format()) {
        let q = FxValue::quantize(x, f);
        prop_assert!(q.raw() >= f.min_raw() && q.raw() <= f.max_raw());
        if x.abs() < f.max_value() {
            prop_assert!((q.to_f64() - x).abs() <= f.resolution() / 2.0 + 1e-9 * x.abs());
        }
    }

    #[test]
    fn add_is_commutative(a in value(), r in any::<i64>()) {
        let f = a.format();
        let b = FxValue::from_raw(r, f);
        prop_assert_eq!(a.add(b).unwrap(), b.add(a).unwrap());
    }

    #[test]
    fn multiplying_by_one_is_identity(v in value()) {
        let one = FxValue::one(FxFormat::SQ3_12);
        prop_assert_eq!(v.mul(one, v.format()), v);
    }

    #[test]
    fn widening_conversion_is_lossless(v in value(), extra in 0u32..8) {
        let f = v.format();
        let total = (f.total_bits() + extra).min(32);
        let wide = FxFormat::new(total, f.frac_bits() + (total - f.total_bits())).unwrap();
        prop_assert_eq!(v.convert(wide).convert(f), v);
    }

    #[test]
    fn saturation_is_monotone(a in value(), b in value()) {
        let f = a.format();
        let b = b.convert(f);
        let s = a.add(b).unwrap();
        if b.raw() >= 0 {
            prop_assert!(s.raw() >= a.raw());
        } else {
            prop_assert!(s.raw() <= a.raw());
        }
    }

    #[test]
    fn mismatched_formats_are_rejected(v in value()) {
        let other = if v.format() == FxFormat::SQ3_12 { FxFormat::SQ0_15 } else { FxFormat::SQ3_12 };
        prop_assert!(v.add(FxValue::zero(other)).is_err());
    }
}
