use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stegkit::mimic::{is_member, mimic_decode, mimic_decode_frame, mimic_encode, MimicGrammar};
use stegkit::payload::frame_payload;
use stegkit::Passphrase;

mod common;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_grammars_round_trip(seed in any::<u64>(), body in proptest::collection::vec(any::<u8>(), 0..300)) {
        let src = common::random_grammar(&mut ChaCha8Rng::seed_from_u64(seed));
        let g = MimicGrammar::parse(&src).unwrap();
        let report = g.validate();
        prop_assert!(report.is_valid(), "{}\n{}", src, report);
        let frame = frame_payload(&body, "n", None).unwrap();
        let text = mimic_encode(&frame, &g).unwrap();
        prop_assert!(is_member(&text, &g));
        prop_assert_eq!(mimic_decode_frame(&text, &g).unwrap(), frame);
    }

    #[test]
    fn encrypted_payload_on_random_grammar(seed in any::<u64>(), body in proptest::collection::vec(any::<u8>(), 1..64)) {
        let g = MimicGrammar::load(&common::random_grammar(&mut ChaCha8Rng::seed_from_u64(seed))).unwrap();
        let pass = Passphrase::new("x").unwrap();
        let text = mimic_encode(&frame_payload(&body, "", Some(&pass)).unwrap(), &g).unwrap();
        prop_assert_eq!(mimic_decode(&text, &g, Some(&pass)).unwrap().body, body);
    }
}
