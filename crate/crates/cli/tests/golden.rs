//! Headline recipes against stored outputs. `GSPIN_BLESS=1` rewrites them.

use std::path::PathBuf;

use gspin::{compare, read_result, run_recipe, write_result, Config};

pub const GOLDEN_RECIPES: [&str; 5] = ["odmr", "trpl-diff", "contrast-map", "field-split", "lac-sweep"];
const REL_TOL: f64 = 1e-9;

fn golden_path(recipe: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{recipe}.tsv"))
}

#[test]
fn headline_recipes_match_golden_files() {
    let config = Config::defaults();
    let bless = std::env::var_os("GSPIN_BLESS").is_some();
    for recipe in GOLDEN_RECIPES {
        let fresh = run_recipe(recipe, &config).unwrap();
        let path = golden_path(recipe);
        if bless {
            write_result(&path, &fresh).unwrap();
            continue;
        }
        let stored = read_result(&path).unwrap_or_else(|e| panic!("{recipe}: {e} (run with GSPIN_BLESS=1 to create)"));
        assert_eq!(stored.meta("config_hash"), fresh.meta("config_hash"), "{recipe}: defaults changed");
        for d in compare(&fresh, &stored).unwrap() {
            let scale = stored.column(&d.name).unwrap().values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(d.max_rel <= REL_TOL || d.max_abs <= 1e-12 * scale, "{recipe}/{}: abs {:e} rel {:e}", d.name, d.max_abs, d.max_rel);
        }
    }
}

#[test]
fn reruns_give_identical_rows() {
    let config = Config::defaults();
    for recipe in GOLDEN_RECIPES {
        let a = run_recipe(recipe, &config).unwrap();
        let b = run_recipe(recipe, &config).unwrap();
        assert_eq!(a.data_text(), b.data_text(), "{recipe}");
    }
}
