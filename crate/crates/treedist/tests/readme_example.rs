//! Keeps the quick-start snippet in README.md honest.

use treedist::decide::Engine;
use treedist::io::parse_tree_text;
use treedist::search::compute_interleaving;

#[test]
fn readme_snippet_runs_as_printed() {
    let t1 = parse_tree_text("mergetree\nnode a 0\nnode r 4\nedge a r\n")
        .unwrap()
        .into_merge()
        .unwrap();
    let t2 = parse_tree_text("mergetree\nnode b 3\nnode s 9\nedge b s\n")
        .unwrap()
        .into_merge()
        .unwrap();
    let d = compute_interleaving(&t1, &t2, Engine::Fast);
    assert_eq!(d.to_string(), "3");
}
