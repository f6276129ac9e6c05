use mediacube::{Catalog, StoreError};
use mediacube_testkit::{sized_catalog, Limits};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn big() -> Catalog {
    let mut rng = StdRng::seed_from_u64(42);
    let c = sized_catalog(
        &mut rng,
        &Limits {
            docs: 150,
            users: 20,
            contexts: 10,
            events: 500,
        },
    );
    assert_eq!((c.record_count(), c.event_count()), (150, 500));
    c
}

#[test]
fn save_load_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let c = big();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    c.save(&a).unwrap();
    let back = Catalog::load(&a).unwrap();
    assert_eq!(back.snapshot(), c.snapshot());
    back.save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn every_truncation_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    big().save(&path).unwrap();
    let bytes = std::fs::read_to_string(&path).unwrap();
    for cut in [1, 2, 17, bytes.len() / 2, bytes.len() - 1] {
        let mut cut_at = bytes.len() - cut;
        while !bytes.is_char_boundary(cut_at) {
            cut_at -= 1;
        }
        std::fs::write(&path, &bytes[..cut_at]).unwrap();
        match Catalog::load(&path) {
            Err(StoreError::CorruptCatalog { .. }) => {}
            other => panic!("cut {cut}: {:?}", other.map(|c| c.record_count())),
        }
    }
}

#[test]
fn missing_file_is_a_storage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        Catalog::load(&dir.path().join("absent.jsonl")),
        Err(StoreError::StorageIo(_))
    ));
}
