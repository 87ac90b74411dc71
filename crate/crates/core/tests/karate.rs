use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use netgof_core::estimators::{fit_dcsbm_with_labels, CandidateModel, FittedModel};
use netgof_core::gof::{gof_test, normalize_residuals, statistic, Decision, TestResult};
use netgof_core::graph::load_edge_list;
use netgof_core::numerics::{two_sided_p_value, SeededStream};
use netgof_core::{AdjacencyMatrix, Indexing};

fn karate() -> AdjacencyMatrix {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.txt");
    let file = File::open(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    load_edge_list(BufReader::new(file), Indexing::OneBased, None)
        .unwrap()
        .adjacency
}

#[test]
fn summary() {
    let s = karate().summarize();
    assert_eq!((s.n, s.edges, s.d_max, s.d_min), (34, 78, 17, 1));
    assert!((s.mean_degree - 4.59).abs() < 0.005);
}

#[test]
fn er_p_value() {
    let a = karate();
    let r: TestResult =
        gof_test(&a, CandidateModel::Er, 0.05, &mut SeededStream::new(0, 0)).unwrap();
    assert!((r.p_value - 0.2625).abs() < 0.01, "{}", r.p_value);
    assert_eq!(r.decision, Decision::Accept);
}

#[test]
fn beta_model_rejected() {
    let a = karate();
    let r: TestResult =
        gof_test(&a, CandidateModel::Beta, 0.05, &mut SeededStream::new(0, 0)).unwrap();
    assert!(r.p_value < 1e-5, "{}", r.p_value);
}

#[test]
fn club_split_fits_degree_corrected_blocks() {
    // Members who followed the instructor (node 1) after the split.
    let instructor = [1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 13, 14, 17, 18, 20, 22];
    let labels: Vec<usize> = (1..=34)
        .map(|v| if instructor.contains(&v) { 0 } else { 1 })
        .collect();
    let a = karate();
    let f: FittedModel = fit_dcsbm_with_labels(&a, &labels, 2).unwrap();
    let t = statistic(&normalize_residuals(&a, &f.phat).unwrap());
    assert!(two_sided_p_value(t) > 0.05);
}
