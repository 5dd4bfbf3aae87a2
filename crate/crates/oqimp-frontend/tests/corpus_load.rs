use oqimp_frontend::{corpus, load};

#[test]
fn every_corpus_program_loads() {
    for (name, src) in corpus::ALL {
        if let Err(e) = load(src) {
            panic!("{name}: {e}");
        }
    }
}
