use road_core::superres::{
    apply_sr, decode_pgm, encode_pgm, fixture_pair, psnr, resize_to, train_sr, GrayImage, SrCoder,
    SrConfig, SrMode, SrModel,
};

fn small_params(cfg: &mut SrConfig) {
    cfg.params.max_iter = Some(40);
}

#[test]
fn self_reconstruction_is_at_least_bicubic() {
    let (low, high) = fixture_pair(32, 2, 8).unwrap();
    let bicubic = resize_to(&low, 32, 32).unwrap().clamped();
    let raw_coder = SrCoder::Lasso {
        lambda_rel: 0.01,
        max_inner: 500,
        tol: 1e-6,
    };
    for (mut cfg, coder) in [
        (SrConfig::yang(64), raw_coder),
        (SrConfig::zeyde(32), SrCoder::default()),
    ] {
        small_params(&mut cfg);
        if cfg.mode == SrMode::Yang {
            cfg.params.max_iter = Some(100);
        }
        let model = train_sr(&[low.clone()], &[high.clone()], &cfg).unwrap().model;
        let out = apply_sr(&model, &low, coder).unwrap();
        let (sr, bc) = (psnr(&high, &out).unwrap(), psnr(&high, &bicubic).unwrap());
        assert!(sr >= bc, "{}: sr {sr} < bicubic {bc}", cfg.mode);
    }
}

#[test]
fn model_directory_round_trip_preserves_output() {
    let dir = tempfile::tempdir().unwrap();
    let (low, high) = fixture_pair(24, 2, 3).unwrap();
    let mut cfg = SrConfig::zeyde(16);
    cfg.pca_dim = Some(12);
    small_params(&mut cfg);
    let model = train_sr(&[low.clone()], &[high], &cfg).unwrap().model;
    model.save(dir.path()).unwrap();
    let back = SrModel::load(dir.path()).unwrap();
    assert_eq!(back, model);
    assert_eq!(
        apply_sr(&back, &low, SrCoder::Omp { s: 3 }).unwrap(),
        apply_sr(&model, &low, SrCoder::Omp { s: 3 }).unwrap()
    );
}

#[test]
fn pgm_bytes_round_trip_through_quantization() {
    let (_, high) = fixture_pair(16, 2, 1).unwrap();
    let bytes = encode_pgm(&high);
    let img: GrayImage = decode_pgm(&bytes).unwrap();
    assert_eq!(encode_pgm(&img), bytes);
    assert!(psnr(&high, &img).unwrap() > 50.0);
}

#[test]
fn mismatched_pairs_are_rejected() {
    let (low, high) = fixture_pair(16, 2, 1).unwrap();
    assert!(train_sr(&[low.clone()], &[low.clone()], &SrConfig::yang(8)).is_err());
    assert!(train_sr(&[low.clone(), low], &[high], &SrConfig::yang(8)).is_err());
}
