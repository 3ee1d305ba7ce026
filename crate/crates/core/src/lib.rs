pub mod error;
pub mod fixtures;
pub mod growth;
pub mod linalg;
pub mod mass;
pub mod moments;
pub mod oracle;
pub mod poly;
pub mod pushforward;
pub mod rational;
pub mod support;
pub mod univariate;

pub use error::{Error, Result};
pub use moments::{AtomicMeasure, Family, MomentSequence};
pub use poly::Polynomial;
pub use rational::Rational;
