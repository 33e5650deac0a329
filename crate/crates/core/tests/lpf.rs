use logsp::lpf::{read_field, write_field};
use logsp::{Field, Grid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_trip_is_exact(values in prop::collection::vec(-1e6f64..1e6, 256), extent in 0.1f64..1e3) {
        let grid = Grid::new(16, extent).unwrap();
        let field = Field::new(grid, values).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(back.grid(), field.grid());
        prop_assert_eq!(back.values(), field.values());
    }

    #[test]
    fn every_truncation_is_rejected(cut in 0usize..2072) {
        let field = Field::zeros(Grid::new(16, 1.0).unwrap());
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        prop_assume!(cut < buf.len());
        prop_assert!(read_field(&buf[..cut]).is_err());
    }
}

#[test]
fn save_and_load_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.lpf");
    let field = Field::from_fn(Grid::new(32, 5.0).unwrap(), |x, y| (x * y).sin()).unwrap();
    logsp::lpf::save(&path, &field).unwrap();
    let back = logsp::lpf::load(&path).unwrap();
    assert_eq!(back.values(), field.values());
    assert!(logsp::lpf::load(dir.path().join("missing.lpf")).is_err());
}
