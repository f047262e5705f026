use corex::corpus::{binarize, build_vocabulary, load_corpus, CorpusFormat};
use corex::metrics::{evaluate_clustering, top_words};
use corex::store::{load_model, save_model};
use corex::synthetic::PlantedCorpus;
use corex::{fit, AnchorSpec, ModelConfig};

fn write_corpus(
    c: &PlantedCorpus,
    dir: &std::path::Path,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let lines: String = (0..c.data.n_docs())
        .map(|d| {
            let words: Vec<&str> = c
                .data
                .doc_words(d)
                .iter()
                .map(|&w| c.vocab.term(w))
                .collect();
            words.join(" ") + "\n"
        })
        .collect();
    let lines_path = dir.join("corpus.txt");
    std::fs::write(&lines_path, lines).unwrap();

    let mut triplets = format!("{} {}\n", c.data.n_docs(), c.data.n_words());
    for (d, w) in c.data.coordinates() {
        triplets += &format!("{d} {w}\n");
    }
    std::fs::write(dir.join("corpus.trip"), triplets).unwrap();
    std::fs::write(dir.join("vocab.txt"), c.vocab.terms().join("\n") + "\n").unwrap();
    (lines_path, dir.join("corpus.trip"))
}

#[test]
fn file_to_model_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let c = PlantedCorpus::blocks(400, 4, 10, 0.5, 0.02, 6);
    let (lines, triplets) = write_corpus(&c, dir.path());

    let docs = load_corpus(&lines, &CorpusFormat::Lines).unwrap();
    let from_triplets = load_corpus(
        &triplets,
        &CorpusFormat::SparseTriplets {
            vocab_path: dir.path().join("vocab.txt"),
        },
    )
    .unwrap();
    let vocab = build_vocabulary(&docs, 1, usize::MAX).unwrap();
    let data = binarize(&docs, &vocab).unwrap();
    assert_eq!(data.oov_tokens, 0);
    assert_eq!(
        data.matrix,
        binarize(&from_triplets, &vocab).unwrap().matrix
    );
    assert_eq!(data.matrix.nnz(), c.data.nnz());

    let anchors = AnchorSpec::single(0, &["b1w0"], 3.0);
    let config = ModelConfig::new(4).with_seed(1).with_restarts(3);
    let result = fit(&data.matrix, &vocab, &config, Some(&anchors)).unwrap();
    assert!(result.restarts.iter().all(|r| r.converged));
    let model = result.model;

    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(
        loaded.transform(&data.matrix).unwrap(),
        model.transform(&data.matrix).unwrap()
    );

    // every planted block surfaces as the top words of some topic
    for block in 0..4 {
        let prefix = format!("b{block}w");
        let found = (0..4).any(|t| {
            top_words(&model, t, 5)
                .unwrap()
                .iter()
                .all(|w| w.term.starts_with(&prefix))
        });
        assert!(found, "block {block} missing");
    }
    let anchored = model.position_of(0).unwrap();
    assert!(top_words(&model, anchored, 5)
        .unwrap()
        .iter()
        .all(|w| w.term.starts_with("b1w")));

    let scores = evaluate_clustering(&model, &data.matrix, &c.doc_classes).unwrap();
    assert!(scores.homogeneity > 0.9, "{scores:?}");
    assert!(scores.ami > 0.9, "{scores:?}");
}
