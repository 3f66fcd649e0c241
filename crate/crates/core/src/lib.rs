//! Document parsing toolchain.
//!
//! Atomic modules (loading, text detection, text recognition, layout
//! analysis, table structure recognition) and the pipelines composed from
//! them: general text reading, table parsing and document structurization.
//! Every perception task runs either on a deterministic classical backend or
//! on an external model reached through the [`bridge`] wire protocol.

pub mod bridge;
pub mod cli;
pub mod detection;
pub mod error;
pub mod font;
pub mod geometry;
pub mod layout;
pub mod loader;
pub mod model;
pub mod output;
pub mod pipeline;
pub mod raster;
pub mod recognition;
pub mod render;
pub mod synth;
pub mod table;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{Point, Quadrangle, Rect, quad_area, quad_center, quad_intersection_area, quad_iou};
pub use model::{
    Document, Element, LayoutCategory, LayoutRegion, PageImage, StructuredDocument, Table, TableCell, TextContent,
    TextInstance,
};
