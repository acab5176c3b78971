use pimdb_core::denorm::{analyze_workload, build_widetable, memory_overhead, rewrite_query, DenormLevel};
use pimdb_core::query::fixtures::{ssb_queries, tpch_queries, tpch_schema};
use pimdb_core::reference::reference_execute;
use pimdb_core::store::ssb::{generate_ssb, ssb_schema};

#[test]
fn fold_sets_nest() {
    for (queries, schema) in [(ssb_queries(), ssb_schema()), (tpch_queries(), tpch_schema())] {
        let sets: Vec<_> =
            DenormLevel::ALL.iter().map(|&l| analyze_workload(&queries, &schema, l).unwrap().fold_set()).collect();
        for w in sets.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
        assert!(sets[0].is_empty());
    }
}

#[test]
fn overhead_monotone_in_level() {
    let db = generate_ssb(0.01, 5).unwrap();
    let queries = ssb_queries();
    let mut last = -1.0;
    for level in DenormLevel::ALL {
        let plan = analyze_workload(&queries, db.schema(), level).unwrap();
        let wide = build_widetable(&db, &plan).unwrap();
        let o = memory_overhead(&db, &wide);
        assert!(o >= last, "{level}: {o} < {last}");
        last = o;
    }
}

#[test]
fn rewritten_queries_agree_with_originals() {
    let db = generate_ssb(0.002, 11).unwrap();
    let queries = ssb_queries();
    for level in DenormLevel::ALL {
        let plan = analyze_workload(&queries, db.schema(), level).unwrap();
        let wide = build_widetable(&db, &plan).unwrap();
        for q in &queries {
            let r = rewrite_query(q, &plan, db.schema()).unwrap();
            assert_eq!(reference_execute(&r, &wide).unwrap(), reference_execute(q, &db).unwrap(), "{} at {level}", q.name);
        }
    }
}
