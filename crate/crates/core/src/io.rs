//! JSON readers and writers for the shared geometry types.

use crate::error::Result;
use crate::geometry::{ManifoldPoint, Polygon};
use std::fs;
use std::path::Path;

/// Reads a polygon from a JSON file (`{"vertices": [[x, y], ...], "orientation": "ccw"}`).
pub fn load_polygon(path: &Path) -> Result<Polygon> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a polygon as pretty-printed JSON with a trailing newline.
pub fn save_polygon(poly: &Polygon, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(poly)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads a manifold point from a JSON file (`{"x": [...], "r": [...], "alpha": a}`).
pub fn load_manifold_point(path: &Path) -> Result<ManifoldPoint> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a manifold point as pretty-printed JSON with a trailing newline.
pub fn save_manifold_point(m: &ManifoldPoint, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
