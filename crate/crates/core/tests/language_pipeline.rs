use hdc_core::assocmem::EvalMode;
use hdc_core::encoder::{EncoderConfig, TextEncoder, TieMode};
use hdc_core::langid::{
    evaluate, ingest, synthetic_texts, train_pipeline, write_layout, IngestOptions, Model,
    SynthConfig,
};
use hdc_core::HdcError;

fn small_synth() -> SynthConfig {
    SynthConfig {
        languages: 6,
        families: 3,
        train_chars: 20_000,
        test_sentences: 20,
        ..SynthConfig::default()
    }
}

#[test]
fn same_language_profiles_are_closer_than_different_ones() {
    let (train, _) = synthetic_texts(&small_synth()).unwrap();
    let config = EncoderConfig::default();
    let items = config.build_item_memory().unwrap();
    let enc = TextEncoder::new(&config, &items).unwrap();
    // Two disjoint halves of the same language's text.
    let halves: Vec<(_, _)> = train
        .iter()
        .map(|(_, t)| {
            let mid = t.len() / 2;
            (
                enc.encode(&t[..mid]).unwrap(),
                enc.encode(&t[mid..]).unwrap(),
            )
        })
        .collect();
    for (i, (a, a2)) in halves.iter().enumerate() {
        let same = a.normalized_hamming(a2).unwrap();
        for (j, (b, _)) in halves.iter().enumerate() {
            if i != j {
                let diff = a.normalized_hamming(b).unwrap();
                assert!(
                    same < diff,
                    "lang {i}: same {same:.3} vs lang {j} {diff:.3}"
                );
            }
        }
        assert!(same < 0.3, "same-language distance {same}");
    }
}

#[test]
fn disk_round_trip_train_save_load_classify() {
    let (train, test) = synthetic_texts(&small_synth()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_layout(dir.path(), &train, &test).unwrap();
    let corpus = ingest(dir.path(), &IngestOptions::default()).unwrap();
    assert_eq!(corpus.labels().len(), 6);
    assert_eq!(corpus.test().len(), 120);

    let config = EncoderConfig {
        dim: 4096,
        ..EncoderConfig::default()
    };
    let (model, stats) = train_pipeline(&corpus, &config).unwrap();
    assert_eq!(stats.symbols as usize, corpus.train_chars());

    let path = dir.path().join("m.hdc");
    model.save(&path).unwrap();
    let loaded = Model::load(&path).unwrap();
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.hdc.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["dim"], 4096);

    let r1 = evaluate(&model, &corpus, EvalMode::Multiclass).unwrap();
    let r2 = evaluate(&loaded, &corpus, EvalMode::Multiclass).unwrap();
    assert_eq!(r1.to_json(), r2.to_json());
    assert!(r1.accuracy > 0.8, "accuracy {}", r1.accuracy);

    let sentence = &test[0].1;
    assert_eq!(
        model.classify_raw(sentence).unwrap(),
        loaded.classify_raw(sentence).unwrap()
    );
}

#[test]
fn raw_text_is_normalized_before_encoding() {
    let config = EncoderConfig {
        dim: 1024,
        tie_mode: TieMode::Random,
        ..EncoderConfig::default()
    };
    let corpus = hdc_core::Corpus::from_texts(
        vec![("en".into(), "hello world".into())],
        vec![],
        &IngestOptions::default(),
    )
    .unwrap();
    let (model, _) = train_pipeline(&corpus, &config).unwrap();
    assert_eq!(
        model.encode_raw("Hello,   WORLD!!").unwrap(),
        model.encoder().encode("hello world").unwrap()
    );
}

#[test]
fn unreadable_text_file_is_io_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("train").join("en").join("broken.txt");
    std::fs::create_dir_all(&bad).unwrap();
    let err = ingest(dir.path(), &IngestOptions::default()).unwrap_err();
    match err {
        HdcError::Io { path, .. } => assert!(path.ends_with("broken.txt")),
        other => panic!("expected Io error, got {other:?}"),
    }
}

#[test]
fn missing_train_directory_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = ingest(dir.path(), &IngestOptions::default()).unwrap_err();
    assert!(err.is_config());
}
