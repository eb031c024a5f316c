use std::fs;

use fleetplan::terrain::{discretize, load_dem, DemFormat, TerrainError};

const HILL: &str = "ncols 4
nrows 4
xllcorner 0
yllcorner 0
cellsize 5
NODATA_value -9999
0 1 2 3
0 1 2 3
0 1 2 3
0 1 2 -9999
";

#[test]
fn ascii_grid_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hill.asc");
    fs::write(&path, HILL).unwrap();
    let heights = load_dem(&path, DemFormat::AsciiGrid).unwrap();
    let grid = discretize(&heights, 10.0).unwrap();
    assert_eq!((grid.a_count, grid.b_count), (2, 2));
    // west column averages 0 and 1, east column 2 and 3 (one sample missing)
    assert!((grid.height(grid.index(fleetplan::Cell::new(0, 0))) - 0.5).abs() < 1e-12);
    let se = grid.index(fleetplan::Cell::new(1, 0));
    assert!((grid.height(se) - 7.0 / 3.0).abs() < 1e-12);
    assert!(grid.is_traversable(se));
}

#[test]
fn csv_heightmap_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    fs::write(&path, "1,1,1\n1,1,1\n1,1,1\n").unwrap();
    let heights = load_dem(&path, DemFormat::CsvHeightmap).unwrap().with_resolution(10.0).unwrap();
    let grid = discretize(&heights, 10.0).unwrap();
    assert_eq!(grid.len(), 9);
}

#[test]
fn missing_file_names_the_path() {
    let err = load_dem("/no/such/dem.asc", DemFormat::AsciiGrid).unwrap_err();
    assert!(matches!(err, TerrainError::Io { .. }));
    assert!(err.to_string().contains("/no/such/dem.asc"));
}
