#![allow(dead_code)]

use std::path::PathBuf;

use reaudit_core::frontend::{parse, SourceUnit};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn unit(name: &str) -> SourceUnit {
    parse(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The six contracts whose flagged functions are known in advance.
pub const CORPUS: [&str; 6] = [
    "DeFi.sol",
    "Globalcryptox.sol",
    "FairDare.sol",
    "Moneybox.sol",
    "AIRToken.sol",
    "QuizBLZ.sol",
];

pub fn all_fixtures() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_path(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "sol"))
        .collect();
    files.sort();
    files
}
