use pimdb_core::kernel::{compile_predicate, filter_column, pack_column, unpack_column, Bitmap, PredOp, WIDTHS};
use proptest::prelude::*;

fn naive(values: &[u64], op: PredOp, acc: Option<&Bitmap>) -> Vec<bool> {
    values.iter().enumerate().map(|(i, &v)| op.eval(v) && acc.is_none_or(|a| a.get(i))).collect()
}

fn mask(width: u32) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1 << width) - 1
    }
}

fn op_from(kind: u8, a: u64, b: u64) -> PredOp {
    match kind % 7 {
        0 => PredOp::Eq(a),
        1 => PredOp::Neq(a),
        2 => PredOp::Lt(a),
        3 => PredOp::Le(a),
        4 => PredOp::Gt(a),
        5 => PredOp::Ge(a),
        _ => PredOp::Between(a.min(b), a.max(b)),
    }
}

fn case() -> impl Strategy<Value = (u32, PredOp, Vec<u64>, Option<Vec<bool>>)> {
    (prop::sample::select(WIDTHS.to_vec()), 0u8..7, any::<u64>(), any::<u64>(), 0usize..300, any::<bool>()).prop_flat_map(
        |(w, kind, a, b, len, with_acc)| {
            let m = mask(w);
            // Bias operands and data towards a small range so hits are common.
            let narrow = m.min(15);
            let vals = prop::collection::vec(prop_oneof![0..=narrow, 0..=m], len);
            let acc = if with_acc { prop::collection::vec(any::<bool>(), len).prop_map(Some).boxed() } else { Just(None).boxed() };
            let (a, b) = if kind % 2 == 0 { (a & narrow, b & narrow) } else { (a & m, b & m) };
            (Just(w), Just(op_from(kind, a, b)), vals, acc)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn packed_filter_matches_scalar_scan((width, op, values, acc) in case()) {
        let col = pack_column(&values, width).unwrap();
        prop_assert_eq!(unpack_column(&col), values.clone());
        let cmp = compile_predicate(op, width).unwrap();
        let acc = acc.map(|bits| Bitmap::from_bools(&bits));
        let got = filter_column(&col, &cmp, acc.as_ref()).unwrap();
        let want = naive(&values, op, acc.as_ref());
        prop_assert_eq!(got, Bitmap::from_bools(&want));
    }
}

#[test]
fn exhaustive_narrow_widths() {
    for width in [2u32, 4] {
        let n = 1u64 << width;
        // Every value in every lane position.
        let values: Vec<u64> = (0..n * 64 / width as u64 + 3).map(|i| i % n).collect();
        let col = pack_column(&values, width).unwrap();
        for a in 0..n {
            for b in 0..n {
                let mut ops = vec![PredOp::Between(a.min(b), a.max(b))];
                if a == b {
                    ops.extend([PredOp::Eq(a), PredOp::Neq(a), PredOp::Lt(a), PredOp::Le(a), PredOp::Gt(a), PredOp::Ge(a)]);
                }
                for op in ops {
                    let cmp = compile_predicate(op, width).unwrap();
                    let got = filter_column(&col, &cmp, None).unwrap();
                    assert_eq!(got, Bitmap::from_bools(&naive(&values, op, None)), "width {width} {op:?}");
                }
            }
        }
    }
}

#[test]
fn operand_wider_than_column_is_rejected() {
    assert!(compile_predicate(PredOp::Eq(4), 2).is_err());
    assert!(compile_predicate(PredOp::Between(3, 1), 4).is_err());
    assert!(compile_predicate(PredOp::Eq(0), 3).is_err());
}

#[test]
fn bitmap_algebra() {
    let a = Bitmap::from_indices(130, [0, 5, 64, 129]);
    let b = Bitmap::from_indices(130, [5, 6, 129]);
    assert_eq!(a.and(&b).unwrap().iter_set_bits().collect::<Vec<_>>(), vec![5, 129]);
    assert_eq!(a.or(&b).unwrap().popcount(), 5);
    assert_eq!(a.not().popcount(), 126);
    assert!(a.and(&Bitmap::zeros(3)).is_err());
}
