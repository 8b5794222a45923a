use mubkit_core::cipher::container::{decrypt_blocks, encrypt_blocks, QctContainer};
use mubkit_core::cipher::{decrypt, encrypt, hn_spec, wn_spec, CipherSpec};
use mubkit_core::mub::{wf_vector, MubFamily};
use proptest::prelude::*;

fn wn(n: u32) -> CipherSpec {
    wn_spec(&MubFamily::with_default_field(n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wf_amplitudes_are_scaled_fourth_roots_of_unity(n in 1u32..=6, r in any::<u32>(), s in any::<u32>()) {
        let fam = MubFamily::with_default_field(n).unwrap();
        let mask = (1u32 << n) - 1;
        let v = wf_vector(fam.alpha(), r & mask, s & mask).unwrap();
        let scale = (1u64 << n) as f64;
        for a in v.amps().iter() {
            let z = a * scale.sqrt();
            let on_axis = (z.re.abs() - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12
                || (z.im.abs() - 1.0).abs() < 1e-12 && z.re.abs() < 1e-12;
            prop_assert!(on_axis, "amplitude {z} is not a quarter-turn phase");
        }
    }

    #[test]
    fn random_key_roundtrip(n in 1u32..=8, key in any::<usize>(), plain in any::<u32>(), use_wn in any::<bool>()) {
        let spec = if use_wn && n <= 5 { wn(n) } else { hn_spec(n).unwrap() };
        let key = spec.key_from_index(key % spec.num_keys());
        let a = plain % spec.num_plaintexts() as u32;
        let ct = encrypt(&spec, key, a).unwrap();
        prop_assert_eq!(decrypt(&spec, key, &ct).unwrap(), a);
    }

    #[test]
    fn container_bytes_roundtrip(n in 1u32..=4, picks in prop::collection::vec((any::<usize>(), any::<u32>()), 0..12)) {
        let spec = wn(n);
        let keys: Vec<_> = picks.iter().map(|&(k, _)| spec.key_from_index(k % spec.num_keys())).collect();
        let plain: Vec<u32> = picks.iter().map(|&(_, p)| p % spec.num_plaintexts() as u32).collect();
        let sealed = encrypt_blocks(&spec, &keys, &plain).unwrap();
        let bytes = sealed.to_bytes().unwrap();
        let reread = QctContainer::read_from(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(&reread, &sealed);
        prop_assert_eq!(reread.to_bytes().unwrap(), bytes);
        prop_assert_eq!(decrypt_blocks(&spec, &keys, &reread).unwrap(), plain);
    }
}
