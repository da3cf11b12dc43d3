use nalgebra::DMatrix;
use proptest::prelude::*;
use wdmd::lifting::{lift_with, structural_output_map};
use wdmd::modwt::{forward, inverse, mra};
use wdmd::{FilterBank, WaveletBasis};

fn banks() -> impl Strategy<Value = FilterBank> {
    prop_oneof![Just(FilterBank::haar()), Just(FilterBank::d4())]
}

fn signal(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..max)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

fn rotate(y: &[f64], s: usize) -> Vec<f64> {
    let n = y.len();
    (0..n).map(|k| y[(k + n - s % n) % n]).collect()
}

proptest! {
    #[test]
    fn inverse_reconstructs(y in signal(200), j in 1usize..8, bank in banks()) {
        let dec = forward(&y, &bank, j).unwrap();
        prop_assert!(close(&inverse(&dec, &bank).unwrap(), &y, 1e-12));
        prop_assert!(close(&mra(&dec, &bank).unwrap().reconstruct(), &y, 1e-12));
    }

    #[test]
    fn energy_is_preserved(y in signal(200), j in 1usize..8, bank in banks()) {
        let dec = forward(&y, &bank, j).unwrap();
        let energy: f64 = dec.wavelet.iter().flatten().chain(&dec.scaling).map(|v| v * v).sum();
        let want: f64 = y.iter().map(|v| v * v).sum();
        prop_assert!((energy - want).abs() <= 1e-10 * want.max(1.0));
    }

    #[test]
    fn circular_shift_commutes(y in signal(120), j in 1usize..6, s in 0usize..50, bank in banks()) {
        let a = forward(&rotate(&y, s), &bank, j).unwrap();
        let b = forward(&y, &bank, j).unwrap();
        for (wa, wb) in a.wavelet.iter().zip(&b.wavelet) {
            prop_assert!(close(wa, &rotate(wb, s), 1e-12));
        }
        prop_assert!(close(&a.scaling, &rotate(&b.scaling, s), 1e-12));
    }

    #[test]
    fn transform_is_linear(
        pair in (1usize..150).prop_flat_map(|n| (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(-5.0..5.0f64, n))),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        j in 1usize..6,
    ) {
        let bank = FilterBank::haar();
        let (x, y) = pair;
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let dx = forward(&x, &bank, j).unwrap();
        let dy = forward(&y, &bank, j).unwrap();
        let dm = forward(&mix, &bank, j).unwrap();
        for l in 0..j {
            let want: Vec<f64> = dx.wavelet[l].iter().zip(&dy.wavelet[l]).map(|(p, q)| a * p + b * q).collect();
            prop_assert!(close(&dm.wavelet[l], &want, 1e-12));
        }
    }

    #[test]
    fn lifting_is_linear_in_both_bases(
        seed in prop::collection::vec(-5.0..5.0f64, 2 * 60),
        a in -3.0..3.0f64,
        j in 1usize..7,
        mra_basis in any::<bool>(),
    ) {
        let basis = if mra_basis { WaveletBasis::Mra } else { WaveletBasis::Modwt };
        let bank = FilterBank::haar();
        let y1 = DMatrix::from_row_slice(2, 30, &seed[..60]);
        let y2 = DMatrix::from_row_slice(2, 30, &seed[60..]);
        let z1 = lift_with(&y1, &bank, j, basis).unwrap().z;
        let z2 = lift_with(&y2, &bank, j, basis).unwrap().z;
        let zm = lift_with(&(&y1 * a + &y2), &bank, j, basis).unwrap().z;
        prop_assert!((zm - (z1 * a + z2)).amax() < 1e-10);
    }

    #[test]
    fn mra_lifting_sums_back(seed in prop::collection::vec(-5.0..5.0f64, 3 * 40), j in 1usize..7) {
        let y = DMatrix::from_row_slice(3, 40, &seed);
        let lifted = lift_with(&y, &FilterBank::haar(), j, WaveletBasis::Mra).unwrap();
        let cw = structural_output_map(3, j);
        prop_assert!((cw * lifted.z - y).amax() < 1e-10);
    }
}
