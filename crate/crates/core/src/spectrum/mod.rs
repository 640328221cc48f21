//! Length spectra of free Fuchsian groups given by generator matrices.

pub mod cache;
pub mod enumerate;
pub mod group;
pub mod markov;
pub mod word;

pub use cache::{load_spectrum, save_spectrum, write_csv, CACHE_VERSION};
pub use enumerate::{counting_function, enumerate_spectrum, EnumerationOptions, GeodesicRecord, SpectrumTable};
pub use group::{commutator_trace, length_of_word, matrix_of_word, GroupPresentation, WordProduct};
pub use markov::{markov_simple_lengths, markov_triples, MarkovLength, MarkovTriple};
pub use word::{homology_class, primitivity, CyclicWord};
