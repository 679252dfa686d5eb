//! Overlay rendering: fade the infographic, stroke annotation boxes in
//! distinct styles, and stamp tag labels with a built-in 5x7 font.
//!
//! Styles: ground truth solid red, proposals dashed blue, hashtags solid
//! blue, text regions filled translucent green.

use iconforge_core::geometry::BBox;
use iconforge_core::imaging::RasterImage;

const RED: [u8; 3] = [220, 30, 30];
const BLUE: [u8; 3] = [30, 60, 220];
const GREEN: [u8; 3] = [40, 160, 60];
const STROKE: i64 = 2;

#[derive(Debug, Clone)]
pub struct BoxLabel {
    pub bbox: BBox,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct OverlayLayers {
    pub ground_truth: Vec<BoxLabel>,
    pub proposals: Vec<BoxLabel>,
    pub hashtags: Vec<BoxLabel>,
    pub text_regions: Vec<BBox>,
}

/// 5-bit row masks, top to bottom; bit 4 is the left column.
fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        'A' => [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
        'B' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110],
        'C' => [0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110],
        'D' => [0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100],
        'E' => [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111],
        'F' => [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000],
        'G' => [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111],
        'H' => [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
        'I' => [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        'J' => [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100],
        'K' => [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001],
        'L' => [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111],
        'M' => [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001],
        'N' => [0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001, 0b10001],
        'O' => [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
        'P' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000],
        'Q' => [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101],
        'R' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001],
        'S' => [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110],
        'T' => [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100],
        'U' => [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
        'V' => [0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b01010, 0b00100],
        'W' => [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b11011, 0b10001],
        'X' => [0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001],
        'Y' => [0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100],
        'Z' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111],
        '0' => [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
        '1' => [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        '2' => [0b01110, 0b10001, 0b00001, 0b00110, 0b01000, 0b10000, 0b11111],
        '3' => [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
        '4' => [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
        '5' => [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
        '6' => [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
        '7' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
        '8' => [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
        '9' => [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
        ' ' => [0; 7],
        '-' => [0, 0, 0, 0b11111, 0, 0, 0],
        '_' => [0, 0, 0, 0, 0, 0, 0b11111],
        '.' => [0, 0, 0, 0, 0, 0b01100, 0b01100],
        ':' => [0, 0b01100, 0b01100, 0, 0b01100, 0b01100, 0],
        '/' => [0b00001, 0b00010, 0b00010, 0b00100, 0b01000, 0b01000, 0b10000],
        '#' => [0b01010, 0b01010, 0b11111, 0b01010, 0b11111, 0b01010, 0b01010],
        '%' => [0b11001, 0b11010, 0b00010, 0b00100, 0b01000, 0b01011, 0b10011],
        '+' => [0, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0],
        _ => [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0, 0b00100],
    }
}

/// Alpha-0.5 white wash, always producing a 3-channel canvas.
fn fade(base: &RasterImage) -> RasterImage {
    let w = base.width();
    let h = base.height();
    let ch = base.channels() as usize;
    let mut out = Vec::with_capacity((w * h * 3) as usize);
    for px in base.pixels().chunks_exact(ch) {
        let rgb: [u8; 3] = match ch {
            1 => [px[0]; 3],
            _ => [px[0], px[1], px[2]],
        };
        for v in rgb {
            out.push(((v as u16 + 255) / 2) as u8);
        }
    }
    RasterImage::new(w, h, 3, out).expect("same dimensions")
}

fn put(img: &mut RasterImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, &color);
    }
}

fn blend(img: &mut RasterImage, x: i64, y: i64, color: [u8; 3], alpha: f64) {
    if x < 0 || y < 0 || x as u32 >= img.width() || y as u32 >= img.height() {
        return;
    }
    let base = img.pixel(x as u32, y as u32);
    let mixed = [
        (alpha * color[0] as f64 + (1.0 - alpha) * base[0] as f64).round() as u8,
        (alpha * color[1] as f64 + (1.0 - alpha) * base[1] as f64).round() as u8,
        (alpha * color[2] as f64 + (1.0 - alpha) * base[2] as f64).round() as u8,
    ];
    img.put_pixel(x as u32, y as u32, &mixed);
}

/// Dash pattern: 6 px on, 4 px off, measured along the edge. Solid strokes
/// pass `dashed = false`.
fn stroke_rect(img: &mut RasterImage, b: &BBox, color: [u8; 3], dashed: bool) {
    let x0 = b.x.round() as i64;
    let y0 = b.y.round() as i64;
    let x1 = (b.x + b.w).round() as i64 - 1;
    let y1 = (b.y + b.h).round() as i64 - 1;
    let on = |d: i64| !dashed || d % 10 < 6;
    for x in x0..=x1 {
        if on(x - x0) {
            for t in 0..STROKE {
                put(img, x, y0 + t, color);
                put(img, x, y1 - t, color);
            }
        }
    }
    for y in y0..=y1 {
        if on(y - y0) {
            for t in 0..STROKE {
                put(img, x0 + t, y, color);
                put(img, x1 - t, y, color);
            }
        }
    }
}

fn fill_rect(img: &mut RasterImage, b: &BBox, color: [u8; 3], alpha: f64) {
    let x0 = b.x.round() as i64;
    let y0 = b.y.round() as i64;
    for y in y0..(b.y + b.h).round() as i64 {
        for x in x0..(b.x + b.w).round() as i64 {
            blend(img, x, y, color, alpha);
        }
    }
}

const LABEL_SCALE: i64 = 2;
const GLYPH_W: i64 = 5 * LABEL_SCALE + LABEL_SCALE;
const GLYPH_H: i64 = 7 * LABEL_SCALE;

fn draw_text(img: &mut RasterImage, text: &str, ox: i64, oy: i64, color: [u8; 3]) {
    for (i, c) in text.chars().enumerate() {
        let rows = glyph(c);
        let gx = ox + i as i64 * GLYPH_W;
        for (ry, row) in rows.iter().enumerate() {
            for cx in 0..5i64 {
                if row & (1 << (4 - cx)) != 0 {
                    for sy in 0..LABEL_SCALE {
                        for sx in 0..LABEL_SCALE {
                            put(
                                img,
                                gx + cx * LABEL_SCALE + sx,
                                oy + ry as i64 * LABEL_SCALE + sy,
                                color,
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Filled color chip above the box with the label in white.
fn draw_label(img: &mut RasterImage, b: &BBox, label: &str, color: [u8; 3]) {
    if label.is_empty() {
        return;
    }
    let pad = 2 * LABEL_SCALE;
    let w = label.chars().count() as i64 * GLYPH_W + pad;
    let h = GLYPH_H + pad;
    let x = (b.x.round() as i64).clamp(0, (img.width() as i64 - w).max(0));
    let y = (b.y.round() as i64 - h).max(0);
    fill_rect(
        img,
        &BBox::new(x as f64, y as f64, w as f64, h as f64),
        color,
        1.0,
    );
    draw_text(img, label, x + pad / 2, y + pad / 2, [255, 255, 255]);
}

fn visibility(b: &BBox, img: &RasterImage) -> Option<bool> {
    let frame = BBox::new(0.0, 0.0, img.width() as f64, img.height() as f64);
    let inter = b.intersection_area(&frame);
    if inter == 0.0 {
        None
    } else {
        Some(inter >= b.area())
    }
}

/// Render all layers over a faded copy of `base`. Boxes reaching outside the
/// image are clipped (warning); boxes fully outside are skipped (warning).
pub fn render_overlay(base: &RasterImage, layers: &OverlayLayers) -> (RasterImage, Vec<String>) {
    let mut img = fade(base);
    let mut warnings = Vec::new();
    let check = |b: &BBox, what: &str, img: &RasterImage, warnings: &mut Vec<String>| {
        match visibility(b, img) {
            None => {
                warnings.push(format!(
                    "{what} box ({}, {}, {}, {}) lies outside the image; skipped",
                    b.x, b.y, b.w, b.h
                ));
                false
            }
            Some(false) => {
                warnings.push(format!(
                    "{what} box ({}, {}, {}, {}) extends past the image; clipped",
                    b.x, b.y, b.w, b.h
                ));
                true
            }
            Some(true) => true,
        }
    };

    for region in &layers.text_regions {
        if check(region, "text", &img, &mut warnings) {
            fill_rect(&mut img, region, GREEN, 0.35);
            stroke_rect(&mut img, region, GREEN, false);
        }
    }
    for p in &layers.proposals {
        if check(&p.bbox, "proposal", &img, &mut warnings) {
            stroke_rect(&mut img, &p.bbox, BLUE, true);
        }
    }
    for g in &layers.ground_truth {
        if check(&g.bbox, "ground-truth", &img, &mut warnings) {
            stroke_rect(&mut img, &g.bbox, RED, false);
            draw_label(&mut img, &g.bbox, &g.label, RED);
        }
    }
    for h in &layers.hashtags {
        if check(&h.bbox, "hashtag", &img, &mut warnings) {
            stroke_rect(&mut img, &h.bbox, BLUE, false);
            draw_label(&mut img, &h.bbox, &h.label, BLUE);
        }
    }
    (img, warnings)
}
