use ndarray::array;
use nhkh_nn::{ArchSpec, Layer, ModelFile, Network, OutputKind, Scaler, TrainingMeta};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/tiny_model.bin");

fn hand_model() -> ModelFile {
    ModelFile {
        tag: "task=entropy;features=two_point".into(),
        scaler: Scaler {
            mean: vec![0.5, -1.0],
            scale: vec![2.0, 1.0],
        },
        network: Network {
            arch: ArchSpec {
                input_dim: 2,
                hidden: vec![2],
                output: OutputKind::Regression,
            },
            layers: vec![
                Layer {
                    w: array![[1.0, -2.0], [0.25, 3.0]],
                    b: array![0.5, -0.5],
                },
                Layer {
                    w: array![[1.5], [-1.0]],
                    b: array![0.125],
                },
            ],
        },
        meta: TrainingMeta {
            seed: 42,
            epochs: 7,
            train_loss: 0.25,
            val_loss: 0.375,
        },
    }
}

#[test]
fn bytes_match_golden_file() {
    let bytes = hand_model().to_bytes();
    if std::env::var_os("NHKH_BLESS").is_some() {
        std::fs::write(GOLDEN, &bytes).unwrap();
    }
    let golden = std::fs::read(GOLDEN).unwrap();
    assert_eq!(bytes, golden);
    assert_eq!(ModelFile::from_bytes(&golden).unwrap(), hand_model());
}

#[test]
fn header_fields_sit_at_documented_offsets() {
    let b = hand_model().to_bytes();
    assert_eq!(&b[..8], b"NHKHMODL");
    assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 2);
    assert_eq!(b[24], 0);
    let tag_len = u32::from_le_bytes(b[25..29].try_into().unwrap()) as usize;
    assert_eq!(&b[29..29 + tag_len], b"task=entropy;features=two_point");
    // 4 scaler reals, seed, epochs, 2 losses, 4 + 2 + 2 + 1 layer reals
    assert_eq!(b.len(), 29 + tag_len + 4 * 8 + 8 + 4 + 2 * 8 + 9 * 8);
    let last = f64::from_le_bytes(b[b.len() - 8..].try_into().unwrap());
    assert_eq!(last, 0.125);
}

#[test]
fn saved_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let m = hand_model();
    m.save(&path).unwrap();
    let back = ModelFile::load(&path).unwrap();
    let x = array![[1.0, 2.0], [-3.0, 0.5]];
    assert_eq!(
        back.predict(x.view()).unwrap(),
        m.predict(x.view()).unwrap()
    );
}
