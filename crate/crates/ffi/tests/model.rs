use std::ffi::CString;
use std::ptr;

use rhythmsvm::ecoc::{train_ecoc, CodingMatrix, LossFn};
use rhythmsvm::represent::{Featurizer, RepresentationKind};
use rhythmsvm::svm::{KernelSpec, SvmParams};
use rhythmsvm::task::Task;
use rhythmsvm_ffi::*;

/// Segments of length 4 whose class is set by which sample carries the
/// energy; trained in the time domain.
fn toy_model_path(dir: &std::path::Path) -> std::path::PathBuf {
    let mut pts = Vec::new();
    for g in 0..3usize {
        for k in 0..5 {
            let mut v = vec![0.05 * k as f64; 4];
            v[g] += 2.0;
            pts.push((v, g));
        }
    }
    let training: Vec<(&[f64], usize)> = pts.iter().map(|(v, g)| (v.as_slice(), *g)).collect();
    let params = vec![SvmParams::new(10.0, KernelSpec::Rbf { gamma: 0.5 }); 6];
    let feat = Featurizer::unfitted(RepresentationKind::Time, 4).unwrap();
    let model = train_ecoc(&training, Task::ThreeWay, &CodingMatrix::standard(), &params, LossFn::Hinge, feat).unwrap();
    let path = dir.join("model.json");
    model.save(&path).unwrap();
    path
}

#[test]
fn load_classify_and_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(toy_model_path(dir.path()).to_str().unwrap()).unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(rsvm_model_load(path.as_ptr(), &mut m), RsvmStatus::Ok);
        let (mut seg, mut n) = (0usize, 0usize);
        assert_eq!(rsvm_model_segment_len(m, &mut seg), RsvmStatus::Ok);
        assert_eq!(rsvm_model_n_classifiers(m, &mut n), RsvmStatus::Ok);
        assert_eq!((seg, n), (4, 6));

        let mut class = 9u32;
        for g in 0..3 {
            let mut x = [0.1; 4];
            x[g] += 2.0;
            assert_eq!(rsvm_model_classify(m, x.as_ptr(), 4, &mut class), RsvmStatus::Ok);
            assert_eq!(class as usize, g);
        }
        let x = [0.0, 2.0, 0.0, 0.0];
        let mut values = [0.0; 6];
        let mut written = 0;
        assert_eq!(
            rsvm_model_decision_values(m, x.as_ptr(), 4, values.as_mut_ptr(), 6, &mut written),
            RsvmStatus::Ok
        );
        let mut decoded = 9u32;
        assert_eq!(rsvm_decode(values.as_ptr(), 6, RsvmLoss::Hinge as u32, &mut decoded), RsvmStatus::Ok);
        assert_eq!(decoded, 1);
        assert_eq!(rsvm_model_classify(m, x.as_ptr(), 3, &mut class), RsvmStatus::InvalidArgument);

        // 8-sample window split into two 4-sample segments
        let window = [0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0, 0.0];
        assert_eq!(
            rsvm_ensemble_classify(m, window.as_ptr(), 8, 0.08, 0.04, 0.04, RsvmAggregation::Mean as u32, &mut class),
            RsvmStatus::Ok
        );
        assert_eq!(class, 2);
        assert_eq!(
            rsvm_ensemble_classify(m, window.as_ptr(), 8, 0.08, 0.08, 0.01, RsvmAggregation::Mean as u32, &mut class),
            RsvmStatus::InvalidArgument
        );
        rsvm_model_free(m);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rhythmsvm.h")).unwrap();
    for name in [
        "rsvm_version",
        "rsvm_last_error_message",
        "rsvm_record_load",
        "rsvm_model_classify",
        "rsvm_ensemble_classify",
        "rsvm_decode",
        "RSVM_STATUS_OK",
        "RSVM_STATUS_BUFFER_TOO_SMALL",
        "typedef struct RsvmModel RsvmModel",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
