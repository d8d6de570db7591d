pub mod cli;
pub mod error;
pub mod geo;
pub mod lppm;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    macro_rules! booktest {
        ($i:ident) => {
            #[doc = include_str!(concat!("../../../book/src/", stringify!($i), ".md"))]
            mod $i {}
        };
    }
    booktest!(introduction);
    booktest!(geometry);
    booktest!(mechanisms);
    booktest!(metrics);
    booktest!(annealing);
    booktest!(pipeline);
    booktest!(cli);
}
