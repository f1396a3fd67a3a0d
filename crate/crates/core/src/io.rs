//! File I/O helpers: PNG/JPEG loading, atomic writes for images and JSON.

use std::fs;
use std::io;
use std::path::Path;

use image::RgbImage;
use serde::Serialize;

/// Load an image (PNG or JPEG) as RGB.
pub fn load_image(path: &Path) -> io::Result<RgbImage> {
    let img = image::open(path).map_err(|e| io::Error::other(e.to_string()))?;
    Ok(img.to_rgb8())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp.partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Write a PNG atomically (temp file + rename).
pub fn save_png(path: &Path, img: &RgbImage) -> io::Result<()> {
    let mut bytes: Vec<u8> = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )
    .map_err(|e| io::Error::other(e.to_string()))?;
    atomic_write(path, &bytes)
}

/// Serialize to pretty JSON (stable struct key order) and write atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip() {
        let dir = std::env::temp_dir().join(format!("truss-io-test-{}", std::process::id()));
        let path = dir.join("img.png");
        let img = RgbImage::from_pixel(8, 6, image::Rgb([10, 200, 30]));
        save_png(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.as_raw(), img.as_raw());
        fs::remove_dir_all(&dir).ok();
    }
}
