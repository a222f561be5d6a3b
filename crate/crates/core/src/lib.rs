//! Limit shapes, liquid regions, frozen boundaries, and local correlation
//! kernels for uniform random Young tableaux of dilated base shape, together
//! with exact samplers for Monte Carlo validation.
//!
//! The crate is organized in layers:
//!
//! * [`diagram`] — exact combinatorics: partitions, interlacing coordinates,
//!   profiles, dilation, and the normalized domain.
//! * [`critical`] — the critical polynomial at a point `(x, t)`, liquid/frozen
//!   classification, root localization, and the transition times `t_-`, `t_+`.
//! * [`limit_surface`] — the limiting height function, the limiting surface
//!   and its envelopes, the continuity criterion, frozen-boundary curves, and
//!   closed forms for rectangles and L-shapes.
//! * [`sampler`] — exact uniform sampling of (Poissonized) standard Young
//!   tableaux via hook walks, bead configurations, and empirical heights.
//! * [`kernels`] — numerical evaluation of the finite correlation kernel, the
//!   infinite bead kernel, and the local limit kernel.
//! * [`emit`] — CSV writers shared by the CLI and by tests.

pub mod critical;
pub mod diagram;
pub mod emit;
pub mod kernels;
pub mod limit_surface;
pub mod poly;
pub mod quad;
pub mod sampler;
