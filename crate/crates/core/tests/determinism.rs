use dendron::suites::{run_with_workers, Suite, SuiteConfig};

fn small(suite: Suite) -> SuiteConfig {
    let groups = |gs: &[&str]| gs.iter().map(|g| g.to_string()).collect();
    match suite {
        Suite::Factorization | Suite::Equivalence => SuiteConfig { max_edges: 4, max_size: 0, max_components: 0, groups: vec![] },
        Suite::Coherence => SuiteConfig { max_edges: 2, max_size: 2, max_components: 0, groups: vec![] },
        Suite::Equivariant => SuiteConfig { max_edges: 4, max_size: 1, max_components: 0, groups: groups(&["z2", "z4"]) },
        Suite::Genuine => SuiteConfig { max_edges: 2, max_size: 2, max_components: 2, groups: groups(&["z2", "s3"]) },
    }
}

#[test]
fn reports_are_identical_across_runs_and_workers() {
    for suite in Suite::ALL {
        let config = small(suite);
        let first = run_with_workers(suite, &config, Some(1)).unwrap().to_json();
        assert!(first.contains("\"passed\": true"), "{first}");
        for workers in [Some(1), Some(3), None] {
            let again = run_with_workers(suite, &config, workers).unwrap().to_json();
            assert_eq!(again, first, "{suite} with {workers:?} workers");
        }
    }
}

#[test]
fn bad_bounds_are_rejected() {
    let mut config = small(Suite::Genuine);
    config.max_components = 0;
    assert!(run_with_workers(Suite::Genuine, &config, Some(1)).is_err());
    config = small(Suite::Equivariant);
    config.groups.clear();
    assert!(run_with_workers(Suite::Equivariant, &config, Some(1)).is_err());
    config.groups = vec!["q8".into()];
    assert!(run_with_workers(Suite::Equivariant, &config, Some(1)).is_err());
}
