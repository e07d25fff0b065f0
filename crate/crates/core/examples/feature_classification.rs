//! Tucker feature extraction on a labelled tensor corpus, then nearest
//! neighbour and nearest centroid classification of held-out samples.

use multiway::features::{accuracy, classify_centroid, classify_knn, confusion_matrix, extract_train, project_test};
use multiway::synth::class_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = class_corpus(&[16, 16, 8], &[3, 3, 2], 3, 60, 30, 0.1, 11)?;
    let fs = extract_train(&corpus.train, &[3, 3, 2])?;
    println!("training fit error {:.4}, feature dims {:?}", fs.fit_error, fs.features[0].dims());

    let test: Vec<_> = corpus
        .test
        .samples
        .iter()
        .map(|x| project_test(x, &fs.bases))
        .collect::<Result<_, _>>()?;

    let knn = classify_knn(&fs, &test, 1)?;
    println!("1-nn accuracy {:.3}", accuracy(&corpus.test.labels, &knn));
    let (centroid, _) = classify_centroid(&fs, &test)?;
    println!("centroid accuracy {:.3}", accuracy(&corpus.test.labels, &centroid));

    let (labels, table) = confusion_matrix(&corpus.test.labels, &knn);
    println!("confusion (rows truth, cols predicted) over labels {labels:?}");
    for row in table {
        println!("  {row:?}");
    }
    Ok(())
}
