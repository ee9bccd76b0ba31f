//! Distances on `[S]`, on unordered tuples, and one level up on `[[S]]`.

pub mod determining;
pub mod fm;
mod flow;
pub mod level2;
pub mod prokhorov;
pub mod transport;
pub mod wasserstein;

pub use determining::{dw, dw_product, ClassConfig, DeterminingClass, HatFunction, SeriesValue};
pub use fm::fortet_mourier;
pub use level2::{
    expected_distance_to, level2_dist, prokhorov_to_dirac, quotient_dist, series_distance, tuple_law_dist, AnchorClass, BaseMetric, Level2Metric,
    MeasureOnMeasures, QuotientMetric,
};
pub use prokhorov::{prokhorov, prokhorov_bruteforce, prokhorov_separated};
pub use wasserstein::{ot_cost, w1_real};
