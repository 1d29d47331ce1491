mod common;

use common::*;
use cutcover::graph::{Graph, VertexCut};
use cutcover::kecss::{normalized_free_cut_value, range_map_backward};

#[test]
fn range_mapping_suite() {
    let t = Tally::run(0..500, range_mapping_trial);
    assert!(t.ok(), "{}", t.summary());
    assert!(t.pass >= 450, "{}", t.summary());
}

#[test]
fn backward_frees_the_heavy_edges() {
    // two parallel paths between 0 and 2; cutting {0} crosses edges 0 and 2
    let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
    let v = [5.0, 1.0, 0.5];
    let c = VertexCut::new(3, &[0]).unwrap();
    let (f, value) = range_map_backward(&g, &c, &v, 2.0, 2).unwrap();
    assert_eq!(f, vec![0]);
    assert_eq!(value, 0.5);
    assert_eq!(normalized_free_cut_value(&g, &c, &f, &v, 2).unwrap(), value);
}
