use proptest::prelude::*;

use frobweb::chern::is_flat_exact;
use frobweb::scalar::{parse_rat, q};
use frobweb::wdvv::wdvv0_identically_zero;
use frobweb::web::{catalog, NormalForm};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shears_preserve_flatness(num in -20i128..20, den in 1i128..20) {
        let web = catalog(&NormalForm::Form2);
        let sheared = web.pushforward_shear(2, q(num, den)).unwrap();
        prop_assert_eq!(is_flat_exact(&sheared), Some(true));
    }

    #[test]
    fn only_the_fitted_shear_solves_wdvv0(num in -30i128..30) {
        let web = catalog(&NormalForm::Form3);
        let r = q(num, 36);
        let sheared = web.pushforward_shear(2, r).unwrap();
        prop_assert_eq!(wdvv0_identically_zero(&sheared), Some(r == q(-1, 12)));
    }

    #[test]
    fn rationals_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let r = parse_rat(&format!("{n}/{d}")).unwrap();
        prop_assert_eq!(r * d, n.into());
    }
}
