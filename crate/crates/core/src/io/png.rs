//! PNG encoding for masks (8-bit 0/255), depth (16-bit mm) and RGB crops.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{DepthCrop, DepthImage, Mask};

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    Ok(())
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let img = GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |u, v| {
        Luma([if mask.get(u as usize, v as usize) { 255 } else { 0 }])
    });
    img.save(path)?;
    Ok(())
}

/// Any nonzero gray level counts as set.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let img = image::open(path.as_ref())?.to_luma8();
    let bits = img.pixels().map(|p| p.0[0] > 0).collect();
    Mask::from_bits(img.width() as usize, img.height() as usize, bits)
}

pub fn write_depth(path: impl AsRef<Path>, depth: &DepthImage) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width() as u32, depth.height() as u32, depth.data().to_vec())
            .expect("buffer size matches dimensions");
    img.save(path)?;
    Ok(())
}

pub fn read_depth(path: impl AsRef<Path>) -> Result<DepthCrop> {
    let img = image::open(path.as_ref())?.to_luma16();
    Ok(DepthCrop {
        width: img.width() as usize,
        height: img.height() as usize,
        depth_mm: img.into_raw(),
    })
}

pub fn write_depth_crop(path: impl AsRef<Path>, crop: &DepthCrop) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(crop.width as u32, crop.height as u32, crop.depth_mm.clone())
            .expect("buffer size matches dimensions");
    img.save(path)?;
    Ok(())
}

pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    img.save(path)?;
    Ok(())
}

pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(image::open(path.as_ref())?.to_rgb8())
}
