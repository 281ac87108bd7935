//! Datasets: MNIST 0/1 ingestion, PCA reduction to angle-ready features,
//! balanced splits, and the synthetic linear regression task.

mod dataset;
mod mnist;
mod pca;
mod regression;

pub use dataset::{split_balanced, Dataset, Split, Splits, Task};
pub use mnist::{
    data_dir, load_mnist_csv, load_mnist_dir, load_mnist_idx, mnist_splits, parse_idx_images,
    parse_idx_labels, DATA_DIR_ENV,
};
pub use pca::{pca_apply, pca_fit, PcaModel};
pub use regression::{make_regression, regression_splits};
