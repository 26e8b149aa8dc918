//! Bundled example specifications with their inputs and golden traces.

pub const CBV_SPEC: &str = include_str!("../../../corpus/cbv.sl");
pub const CBN_SPEC: &str = include_str!("../../../corpus/cbn.sl");
pub const ARITH_SPEC: &str = include_str!("../../../corpus/arith.sl");
pub const OVERLAP_SPEC: &str = include_str!("../../../corpus/overlap.sl");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub spec: &'static str,
    pub input: &'static str,
    pub golden: &'static str,
}

const ENTRIES: [CorpusEntry; 4] = [
    CorpusEntry {
        name: "cbv",
        spec: CBV_SPEC,
        input: include_str!("../../../corpus/cbv.input"),
        golden: include_str!("../../../corpus/cbv.golden"),
    },
    CorpusEntry {
        name: "cbn",
        spec: CBN_SPEC,
        input: include_str!("../../../corpus/cbn.input"),
        golden: include_str!("../../../corpus/cbn.golden"),
    },
    CorpusEntry {
        name: "arith",
        spec: ARITH_SPEC,
        input: include_str!("../../../corpus/arith.input"),
        golden: include_str!("../../../corpus/arith.golden"),
    },
    CorpusEntry {
        name: "overlap",
        spec: OVERLAP_SPEC,
        input: include_str!("../../../corpus/overlap.input"),
        golden: include_str!("../../../corpus/overlap.golden"),
    },
];

pub fn provide_corpus() -> &'static [CorpusEntry] {
    &ENTRIES
}

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_found() {
        for e in provide_corpus() {
            assert_eq!(entry(e.name), Some(e));
            assert!(e.input.trim_end().ends_with(";;"));
            assert!(e.golden.ends_with('\n'));
        }
        assert!(entry("missing").is_none());
    }
}
