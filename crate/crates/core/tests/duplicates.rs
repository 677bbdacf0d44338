mod common;

#[test]
fn duplicated_scc_found_and_near_miss_ignored() {
    let groups = common::dup_corpus_groups();
    assert_eq!(groups, vec![common::dup_expected()]);
}
