mod common;

use std::fs;

use mfscan::{load_functional_csv, load_panel, load_sites, CliError};
use mfscan_core::CoordinateMode;

fn message(e: CliError) -> String {
    e.to_string()
}

#[test]
fn sites_by_header_name_with_extra_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    fs::write(
        &path,
        "name,lat,site_id,lon\nParis,48.85,75,2.35\nLyon,45.76,69,4.83\n",
    )
    .unwrap();
    let sites = load_sites(&path, CoordinateMode::Geodetic).unwrap();
    assert_eq!(sites.ids(), ["75", "69"]);
    assert_eq!(sites.coords()[1], [4.83, 45.76]);
    let err = message(load_sites(&path, CoordinateMode::Planar).unwrap_err());
    assert!(err.contains("missing column `x`"), "{err}");
}

#[test]
fn departement_table_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dep.csv");
    fs::write(&path, mfscan_core::simulation::departement_csv()).unwrap();
    assert_eq!(
        load_sites(&path, CoordinateMode::Geodetic).unwrap().len(),
        94
    );
}

#[test]
fn site_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let cases = [
        (
            "site_id,x,y\na,0,0\na,1,1\n",
            "line 3: duplicate site_id `a` (first on line 2)",
        ),
        (
            "site_id,x,y\na,0,0\nb,1,1\nc,0,0\n",
            "sites `a` (line 2) and `c` share coordinates",
        ),
        (
            "site_id,x,y\na,0,0\nb,one,1\n",
            "line 3: `one` is not a valid x",
        ),
        ("site_id,x,y\na,0,0\nb,1\n", "record 2"),
        ("site_id,x,y\n", "need at least 2 sites"),
        ("", "need at least 2 sites"),
        ("site_id,x,y\na,0,0\n", "need at least 2 sites"),
    ];
    for (text, expected) in cases {
        fs::write(&path, text).unwrap();
        let err = message(load_sites(&path, CoordinateMode::Planar).unwrap_err());
        assert!(err.contains(expected), "{text:?}: {err}");
    }
    let missing = load_sites(&dir.path().join("nope.csv"), CoordinateMode::Planar).unwrap_err();
    assert_eq!(missing.category(), "io");
}

fn two_sites(dir: &std::path::Path) -> mfscan_core::SiteMap {
    let path = dir.join("s.csv");
    fs::write(&path, "site_id,x,y\na,0,0\nb,1,0\nc,2,0\n").unwrap();
    load_sites(&path, CoordinateMode::Planar).unwrap()
}

#[test]
fn panel_is_aligned_to_site_order_and_sorted_in_time() {
    let dir = tempfile::tempdir().unwrap();
    let sites = two_sites(dir.path());
    let path = dir.path().join("p.csv");
    let mut text = String::from("time,site_id,v1,v2\n");
    for (site, base) in [("c", 30.0), ("a", 10.0), ("b", 20.0)] {
        for t in [2.0, 0.0, 1.0] {
            text += &format!("{t},{site},{},{}\n", base + t, -base - t);
        }
    }
    fs::write(&path, text).unwrap();
    let data = load_functional_csv(&path, &sites).unwrap();
    assert_eq!((data.n_sites(), data.n_vars(), data.n_times()), (3, 2, 3));
    assert_eq!(data.var_names(), ["v1", "v2"]);
    assert_eq!(data.grid().points(), [0.0, 1.0, 2.0]);
    assert_eq!(data.point(0, 2), [12.0, -12.0]);
    assert_eq!(data.point(2, 1), [31.0, -31.0]);
}

#[test]
fn calendar_times_become_days() {
    let dir = tempfile::tempdir().unwrap();
    let sites = two_sites(dir.path());
    let path = dir.path().join("p.csv");
    let mut text = String::from("site_id,time,v\n");
    for s in ["a", "b", "c"] {
        for d in ["2020-05-01", "2020-05-02", "2020-06-25"] {
            text += &format!("{s},{d},1\n");
        }
    }
    fs::write(&path, text).unwrap();
    let panel = load_panel(&path, &sites).unwrap();
    assert_eq!(panel.dataset.grid().points(), [0.0, 1.0, 55.0]);
    assert_eq!(panel.time_labels[2], "2020-06-25");
}

#[test]
fn panel_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sites = two_sites(dir.path());
    let path = dir.path().join("p.csv");
    let full = |skip: Option<(&str, &str)>| {
        let mut text = String::from("site_id,time,v1,v2\n");
        for s in ["a", "b", "c"] {
            for t in ["0", "1"] {
                let v2 = if skip == Some((s, t)) { "" } else { "2" };
                text += &format!("{s},{t},1,{v2}\n");
            }
        }
        text
    };
    fs::write(&path, full(Some(("b", "1")))).unwrap();
    let err = message(load_functional_csv(&path, &sites).unwrap_err());
    assert!(
        err.contains("1 missing") && err.contains("(b, 1, v2)"),
        "{err}"
    );

    fs::write(&path, full(None) + "z,0,1,2\n").unwrap();
    let err = message(load_functional_csv(&path, &sites).unwrap_err());
    assert!(err.contains("line 8: unknown site_id `z`"), "{err}");

    fs::write(&path, full(None) + "a,0,1,2\n").unwrap();
    assert!(
        load_functional_csv(&path, &sites).is_ok(),
        "consistent duplicates are accepted"
    );
    fs::write(&path, full(None) + "a,0,1,5\n").unwrap();
    let err = message(load_functional_csv(&path, &sites).unwrap_err());
    assert!(
        err.contains("conflicting values") && err.contains("`v2`"),
        "{err}"
    );

    fs::write(&path, full(None) + "a,2020-01-01,1,2\n").unwrap();
    let err = message(load_functional_csv(&path, &sites).unwrap_err());
    assert!(err.contains("mixes numeric times and dates"), "{err}");

    // Many gaps: only the first ten are listed.
    let mut text = String::from("site_id,time,v\n");
    for t in 0..20 {
        text += &format!("a,{t},1\n");
    }
    fs::write(&path, text).unwrap();
    let err = message(load_functional_csv(&path, &sites).unwrap_err());
    assert!(
        err.contains("40 missing") && err.contains("and 30 more"),
        "{err}"
    );
    assert_eq!(err.matches("(b,").count() + err.matches("(c,").count(), 10);
}
