//! Synthetic depth views from CAD meshes: surface sampling, a hemisphere
//! camera rig, spherical-flip visibility and z-buffered rasterization.

mod hpr;
mod hull;
mod mesh;
mod render;
mod sample;

pub use hpr::{hidden_point_removal, DEFAULT_HPR_GAMMA};
pub use hull::hull_vertices;
pub use mesh::TriangleMesh;
pub use render::{
    generate_poses, look_at, render_depth, render_rgb, render_views, resize_depth, RenderConfig, RenderedView, ViewPose,
};
pub use sample::{sample_surface, sample_surface_with_faces};
