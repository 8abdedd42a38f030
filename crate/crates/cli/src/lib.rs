//! Command-line front end: corpus ingestion, SVG plots, synthetic corpora and
//! the `tsmorph` subcommands.

pub mod app;
pub mod corpus;
pub mod plot;
pub mod synth;

pub use app::{run, CliError, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
pub use corpus::{load_corpus, CorpusFormat, CorpusManifest};
pub use plot::{render_svg, PlotSpec};
