//! Channel reconstruction: standard process tomography, ancilla-assisted
//! tomography with joint separable measurements, direct characterization
//! via Bell-state inputs, and gate set tomography with maximum-likelihood
//! estimation.

pub mod aapt;
pub mod dcqd;
pub mod gst;
pub mod sqpt;

pub use aapt::{aapt_channel, aapt_collect, aapt_reconstruct, max_entangled_input};
pub use dcqd::{dcqd_resource_count, dcqd_single_qubit, DcqdConfig};
pub use gst::{
    gst_fit, gst_simulate_dataset, Experiment, GstDataset, GstDesign, GstFit, GstModel,
};
pub use sqpt::{sqpt_channel, sqpt_channel_shots, sqpt_collect, sqpt_reconstruct, SqptWorkspace};
