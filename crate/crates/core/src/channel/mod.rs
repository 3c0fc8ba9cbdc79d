//! Propagation and front-end impairments: AWGN, clustered multipath and the
//! ADC quantizer sitting between the channel and the digital receiver.

mod awgn;
mod multipath;
mod quantize;

pub use awgn::{add_awgn, add_awgn_in_place, noise_sigma};
pub use multipath::{apply_channel, draw_channel, load_profile, parse_profile, ChannelRealization, SvProfile, Tap};
pub use quantize::{quantize, QuantizerConfig};
