use std::collections::BTreeMap;

use upr_core::bench::{read_records, read_rows, run_bench, BenchConfig, GenMatrix, Method};
use upr_core::gen::{generate, Family, GenParams, TinyParams};

fn tiny_config(dir: Option<std::path::PathBuf>) -> BenchConfig {
    BenchConfig {
        generator: Some(GenMatrix {
            base: GenParams { seed: 0, family: Family::Tiny(TinyParams { max_throughput: 1, ..TinyParams::default() }) },
            seeds: vec![1, 2],
            n: vec![3, 4, 5],
            k: vec![3, 5],
            m: vec![],
            capacity_fracs: vec![],
        }),
        methods: vec![Method::FullIp, Method::Ddd, Method::TwoPhase],
        ub_factors: vec![1.0, 1.5, 2.0],
        time_limit_s: 60.0,
        rel_gap: 0.0,
        alpha: 0.0,
        output_dir: dir,
        ..BenchConfig::default()
    }
}

#[test]
fn tiny_matrix_methods_agree() {
    let cfg = tiny_config(None);
    let out = run_bench(&cfg).unwrap();
    assert_eq!(out.rows.len(), 12 * 3 * 3);
    let mut spans: BTreeMap<(String, i64), Vec<Option<u32>>> = BTreeMap::new();
    for r in &out.rows {
        assert_eq!(r.status, "solved", "{r:?}");
        spans.entry((r.instance.clone(), (r.ub_factor * 10.0) as i64)).or_default().push(r.makespan);
    }
    for (key, s) in &spans {
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|&m| m == s[0] && m.is_some()), "{key:?}: {s:?}");
        assert_eq!(s[0], out.optimum.get(&key.0).copied(), "{key:?}");
    }
}

#[test]
fn iterations_bounded_and_rows_traceable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(Some(dir.path().to_path_buf()));
    let out = run_bench(&cfg).unwrap();
    let ids: BTreeMap<String, GenParams> = cfg.generator.as_ref().unwrap().expand().into_iter().collect();

    for r in out.rows.iter().filter(|r| r.method != Method::FullIp) {
        let inst = generate(&ids[&r.instance]).unwrap();
        let t_star = out.optimum[&r.instance] as usize;
        assert!(r.iters <= inst.num_nodes() * t_star, "{r:?}");
        let recs: Vec<_> = out
            .records
            .iter()
            .filter(|t| t.instance == r.instance && t.method == r.method && t.ub_factor == r.ub_factor)
            .collect();
        assert_eq!(recs.len(), r.iters);
        assert_eq!(recs.iter().map(|t| t.record.violations.short).sum::<usize>(), r.short_viol);
        assert_eq!(recs.iter().map(|t| t.record.violations.nodes_storage).sum::<usize>(), r.nodes_sto);
    }

    let rows = read_rows(dir.path().join("results.csv")).unwrap();
    assert_eq!(rows, out.rows);
    let records = read_records(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records.len(), out.records.len());
}

#[test]
fn deterministic_across_runs() {
    let a = run_bench(&tiny_config(None)).unwrap();
    let b = run_bench(&tiny_config(None)).unwrap();
    let strip = |o: &upr_core::bench::BenchOutput| {
        o.rows.iter().map(|r| (r.instance.clone(), r.method, r.makespan, r.iters, r.ns_ratio.to_bits())).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
}
