use pimdb_core::store::ssb::generate_ssb;
use pimdb_core::store::{open_store, save_store};

#[test]
fn size_extrapolates_linearly_to_sf10() {
    let db = generate_ssb(0.1, 7).unwrap();
    let lineorder = db.table("lineorder").unwrap().rows() as f64;
    assert!((lineorder / 600_000.0 - 1.0).abs() < 0.02, "{lineorder}");
    let plain_gb = db.plain_bytes() as f64 * 100.0 / 1e9;
    assert!((plain_gb / 6.8 - 1.0).abs() <= 0.3, "{plain_gb} GB");
    assert!(db.encoded_bytes() < db.plain_bytes());
}

#[test]
fn binary_store_round_trip() {
    let db = generate_ssb(0.002, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ssb.store");
    save_store(&db, &path).unwrap();
    let back = open_store(&path).unwrap();
    assert_eq!(back.manifest(), db.manifest());
    for t in db.tables() {
        let u = back.table(t.name()).unwrap();
        for i in (0..t.rows()).step_by(97) {
            assert_eq!(t.row(i), u.row(i));
        }
    }
}
