mod common;

use common::fixtures::{fixtures_dir, stores};
use common::script::load_script;
use proptest::prelude::*;
use svagen::eval::load_dataset;
use svagen::ingest::{split_corpus, ChunkStore, SourceDocument, SplitMode};
use svagen::llm::{Gateway, LlmError, ScriptedProvider, TemplateId};
use svagen::retrieval::{
    Embedder, Embedding, HashEmbedder, RetrievalConfig, RetrievalError, RetrievalPath, Retriever,
    VectorIndex,
};
use svagen::sva::OperatorKind;

/// Independent model of the offline embedder: FNV-1a over lowercase
/// identifier runs and the three operator tokens, counted per bucket.
fn oracle_embed(text: &str, dim: usize) -> Vec<f64> {
    let lower = text.to_lowercase();
    let mut v = vec![0.0; dim];
    let mut bump = |tok: &str| {
        let mut h: u64 = 14695981039346656037;
        for b in tok.bytes() {
            h = (h ^ b as u64).wrapping_mul(1099511628211);
        }
        v[(h % dim as u64) as usize] += 1.0;
    };
    let chars: Vec<char> = lower.chars().collect();
    let is_word = |c: char| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '$';
    let mut i = 0;
    while i < chars.len() {
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if rest == "|->" || rest == "|=>" {
            bump(&rest);
            i += 3;
        } else if rest.starts_with("##") {
            bump("##");
            i += 2;
        } else if is_word(chars[i]) {
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                i += 1;
            }
            bump(&chars[start..i].iter().collect::<String>());
        } else {
            i += 1;
        }
    }
    v
}

fn oracle_cosine(a: &str, b: &str, dim: usize) -> f64 {
    let (x, y) = (oracle_embed(a, dim), oracle_embed(b, dim));
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let n = |v: &[f64]| v.iter().map(|p| p * p).sum::<f64>().sqrt();
    dot / (n(&x) * n(&y))
}

fn cos(e: &HashEmbedder, a: &str, b: &str) -> f64 {
    e.embed(a).unwrap().cosine(&e.embed(b).unwrap())
}

#[test]
fn offline_embedder_examples() {
    let e = HashEmbedder::new(256);
    let t = "assert property (@(posedge clk) a |-> ##1 b);";
    assert_eq!(e.embed(t).unwrap(), e.embed(t).unwrap());
    assert!((cos(&e, t, t) - 1.0).abs() < 1e-6);
    assert!(matches!(e.embed("  ,, "), Err(RetrievalError::EmptyText)));

    let base = "posedge clock rising edge";
    let unrelated = cos(&e, base, "stock market prices");
    let shared = cos(&e, base, "clock edge posedge");
    assert!((unrelated - 0.0).abs() < 1e-9);
    assert!((shared - 0.8660254037844388).abs() < 1e-9);
    assert!((shared - oracle_cosine(base, "clock edge posedge", 256)).abs() < 1e-12);
    assert!(unrelated < shared);
}

fn unit(dim: usize, i: usize) -> Embedding {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    Embedding::from_unit(v).unwrap()
}

#[test]
fn query_examples() {
    let mut idx = VectorIndex::new(3);
    for i in 0..3 {
        idx.insert(format!("c{i}"), unit(3, i)).unwrap();
    }
    let r = idx.query(&unit(3, 2), 10).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!((r[0].chunk_id.as_str(), r[0].similarity), ("c2", 1.0));
    assert_eq!(r[1].similarity, 0.0);
    assert_eq!(r[1].chunk_id, "c0");
    assert_eq!(idx.query(&unit(3, 0), 1).unwrap().len(), 1);
    assert!(matches!(
        idx.query(&unit(2, 0), 1),
        Err(RetrievalError::DimMismatch { expected: 3, found: 2 })
    ));
    assert!(matches!(idx.insert("c0", unit(3, 0)), Err(RetrievalError::DuplicateChunk(_))));
}

proptest! {
    #[test]
    fn ranking_ignores_insertion_order(
        vecs in prop::collection::vec(prop::collection::vec(-2i8..3, 4), 1..12),
        q in prop::collection::vec(-2i8..3, 4),
        k in 1usize..15,
        seed in any::<u64>(),
    ) {
        let to_emb = |v: &[i8]| Embedding::normalized(v.iter().map(|x| *x as f64).collect());
        let Ok(q) = to_emb(&q) else { return Ok(()) };
        let items: Vec<(String, Embedding)> = vecs
            .iter()
            .enumerate()
            .filter_map(|(i, v)| to_emb(v).ok().map(|e| (format!("c{i:02}"), e)))
            .collect();
        let mut shuffled = items.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let build = |xs: &[(String, Embedding)]| {
            let mut idx = VectorIndex::new(4);
            for (id, e) in xs {
                idx.insert(id.clone(), e.clone()).unwrap();
            }
            idx.query(&q, k).unwrap()
        };
        let a = build(&items);
        prop_assert_eq!(&a, &build(&shuffled));
        prop_assert_eq!(a.len(), k.min(items.len()));
        prop_assert!(a.windows(2).all(|w| w[0].similarity >= w[1].similarity));
    }
}

#[test]
fn global_path_on_fixtures() {
    let s = stores();
    let e = HashEmbedder::new(256);
    let spec = "the value in the previous clock cycle";
    let ranked = s.dynamic.retrieve_global(spec, 100).unwrap();
    assert_eq!(ranked.len(), s.dynamic.store().chunks.len());
    for r in &ranked {
        let text = s.dynamic.chunk(&r.chunk_id).unwrap().text();
        assert!((r.similarity - oracle_cosine(spec, &text, 256)).abs() < 1e-12, "{}", r.chunk_id);
    }
    let pos = |id: &str| ranked.iter().position(|r| r.chunk_id == id).unwrap();
    // Top hit explains `$past`; the one-hot chunk shares no tokens.
    assert_eq!(ranked[0].chunk_id, "implication:code:0001");
    assert!(s.dynamic.chunk("implication:code:0001").unwrap().text().contains("$past"));
    assert!(pos("sampled_functions:code:0002") < pos("onehot:code:0001"));
    assert_eq!(ranked[pos("onehot:code:0001")].similarity, 0.0);

    let own = s.dynamic.chunk("delays:code:0001").unwrap().text();
    let hit = &s.dynamic.retrieve_global(&own, 1).unwrap()[0];
    assert_eq!(hit.chunk_id, "delays:code:0001");
    assert!((hit.similarity - 1.0).abs() < 1e-9);
    assert!((cos(&e, &own, &own) - 1.0).abs() < 1e-9);

    let empty = Retriever::build(
        ChunkStore::new(SplitMode::Dynamic, Vec::new()),
        Box::new(HashEmbedder::new(16)),
        None,
        RetrievalConfig::default(),
    )
    .unwrap();
    assert!(empty.retrieve_global(spec, 3).unwrap().is_empty());
}

fn fixed_gateway(keywords: &'static str, map: &'static str) -> Gateway {
    Gateway::new(ScriptedProvider::new(move |req| match req.template_id {
        TemplateId::KeywordExtraction => Some(keywords.to_string()),
        TemplateId::OperatorExtraction => Some(map.to_string()),
        _ => None,
    }))
}

fn small_retriever() -> Retriever {
    let docs = [
        SourceDocument::markdown("a", "Delay example.\n\n```\nreq |-> ##2 ack\n```\n").unwrap(),
        SourceDocument::markdown("b", "Past example.\n\n```\nout == $past(in)\n```\n").unwrap(),
        SourceDocument::markdown("c", "Stable example.\n\n```\n$stable(x)\n```\n").unwrap(),
    ];
    let store = ChunkStore::new(SplitMode::Dynamic, split_corpus(&docs, SplitMode::Dynamic).unwrap());
    Retriever::build(store, Box::new(HashEmbedder::new(64)), None, RetrievalConfig::default()).unwrap()
}

#[test]
fn operator_guided_examples() {
    let r = small_retriever();
    let g = fixed_gateway(r#"["two cycles later"]"#, r###"{"two cycles later": "##"}"###);
    let got = r.retrieve_operator_guided("ack comes two cycles later", &g, 5).unwrap();
    assert_eq!(got.keyword_map.operators(), vec![OperatorKind::Delay]);
    assert_eq!(got.operator_chunks.len(), 1);
    let ids: Vec<&str> = got.operator_chunks[0].chunks.iter().map(|c| c.chunk_id.as_str()).collect();
    assert_eq!(ids, vec!["a:code:0000"]);

    let none = fixed_gateway("[]", "{}");
    let got = r.retrieve_operator_guided("anything", &none, 5).unwrap();
    assert!(got.keyword_map.pairs.is_empty() && got.operator_chunks.is_empty());

    let clamp = fixed_gateway(r#"["both", "before"]"#, r#"{"both": "&&", "before": "$past"}"#);
    let got = r.retrieve_operator_guided("both before", &clamp, 5).unwrap();
    assert_eq!(got.keyword_map.operators(), vec![OperatorKind::Past]);
    assert_eq!(got.discarded, vec!["&&".to_string()]);

    let bad = fixed_gateway("sure, here you go", "{}");
    match r.retrieve_operator_guided("x", &bad, 5) {
        Err(RetrievalError::Gateway(e @ LlmError::Malformed { .. })) => {
            assert_eq!(e.raw_response(), Some("sure, here you go"))
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn previous_clock_cycle_maps_to_past() {
    let s = stores();
    let g = fixed_gateway(
        r#"["in the previous clock cycle"]"#,
        r#"{"in the previous clock cycle": "$past"}"#,
    );
    let got = s
        .dynamic
        .retrieve_operator_guided("output equals input in the previous clock cycle", &g, 2)
        .unwrap();
    assert!(got
        .keyword_map
        .pairs
        .iter()
        .any(|p| p.keyword == "in the previous clock cycle" && p.operator == OperatorKind::Past));
    for oc in &got.operator_chunks {
        let token = oc.operator.surface_token().unwrap();
        for c in &oc.chunks {
            assert!(s.dynamic.chunk(&c.chunk_id).unwrap().text().contains(token));
        }
    }
    assert_eq!(got.operator_chunks[0].chunks.len(), 2);
}

#[test]
fn hybrid_is_the_pair_of_single_paths_on_every_fixture() {
    let s = stores();
    let g = Gateway::new(load_script().provider());
    let d = load_dataset(&fixtures_dir().join("dataset")).unwrap();
    let cfg = RetrievalConfig::default();
    for rec in &d.records {
        let spec = &rec.nl_property;
        for r in [&s.dynamic, &s.static_windows] {
            let runs: Vec<_> = (0..3)
                .map(|_| r.hybrid_retrieve(spec, &g, cfg.k_global, cfg.k_per_op).unwrap())
                .collect();
            let global = r.retrieve_global(spec, cfg.k_global).unwrap();
            let guided = r.retrieve_operator_guided(spec, &g, cfg.k_per_op).unwrap();
            for h in &runs {
                assert_eq!(h.global_chunks, global, "{}", rec.record_id);
                assert_eq!(h.operator_chunks, guided.operator_chunks, "{}", rec.record_id);
                assert_eq!(h.keyword_map, guided.keyword_map);
                assert_eq!(h.discarded_operators, guided.discarded);
                assert!(h.degraded.is_none());
                assert_eq!(serde_json::to_string(h).unwrap(), serde_json::to_string(&runs[0]).unwrap());
            }
        }
    }
}

#[test]
fn one_failed_path_degrades() {
    let s = stores();
    let down = Gateway::new(ScriptedProvider::new(|_| None));
    let spec = "ack follows req";
    let h = s.dynamic.hybrid_retrieve(spec, &down, 3, 2).unwrap();
    assert_eq!(h.global_chunks, s.dynamic.retrieve_global(spec, 3).unwrap());
    assert!(h.operator_chunks.is_empty());
    assert_eq!(h.degraded.unwrap().failed_path, RetrievalPath::OperatorGuided);

    let empty = fixed_gateway("[]", "{}");
    let r = Retriever::build(
        ChunkStore::new(SplitMode::Dynamic, Vec::new()),
        Box::new(HashEmbedder::new(8)),
        None,
        RetrievalConfig::default(),
    )
    .unwrap();
    assert_eq!(r.hybrid_retrieve(spec, &empty, 3, 2).unwrap(), Default::default());
}

#[test]
fn cached_embeddings_are_reused_only_for_the_same_provider() {
    let s = stores();
    let side = s.dynamic.sidecar();
    let again = Retriever::build(
        s.dynamic.store().clone(),
        Box::new(HashEmbedder::new(256)),
        Some(&side),
        RetrievalConfig::default(),
    )
    .unwrap();
    assert_eq!(again.sidecar(), side);
    let other = Retriever::build(
        s.dynamic.store().clone(),
        Box::new(HashEmbedder::new(32)),
        Some(&side),
        RetrievalConfig::default(),
    )
    .unwrap();
    assert_eq!(other.index().dim(), 32);
}
