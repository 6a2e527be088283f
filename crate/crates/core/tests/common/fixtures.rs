//! Paths and builders for the bundled fixtures.

use std::path::PathBuf;

use svagen::config::Config;
use svagen::ingest::{load_corpus, split_corpus, ChunkStore, SplitMode};
use svagen::retrieval::{HashEmbedder, Retriever};
use svagen::pipeline::Retrievers;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub struct Stores {
    pub dynamic: Retriever,
    pub static_windows: Retriever,
}

impl Stores {
    pub fn retrievers(&self) -> Retrievers<'_> {
        Retrievers {
            dynamic: Some(&self.dynamic),
            static_windows: Some(&self.static_windows),
        }
    }
}

fn build(mode: SplitMode, config: &Config) -> Retriever {
    let docs = load_corpus(&fixtures_dir().join("corpus")).unwrap();
    let store = ChunkStore::new(mode, split_corpus(&docs, mode).unwrap());
    Retriever::build(
        store,
        Box::new(HashEmbedder::new(config.embedding.dim)),
        None,
        config.retrieval,
    )
    .unwrap()
}

/// Both stores over the bundled corpus with the default configuration.
pub fn stores() -> Stores {
    let config = Config::default();
    Stores {
        dynamic: build(SplitMode::Dynamic, &config),
        static_windows: build(config.ingest.static_split, &config),
    }
}

pub fn assertion_pairs() -> Vec<svagen::pipeline::FinetunePair> {
    std::fs::read_to_string(fixtures_dir().join("assertions.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}
