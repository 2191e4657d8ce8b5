//! Built-in surveillance floor plans: three 20×30 variants with 7, 6, and
//! 10 rooms, their pixel-doubled 40×60 counterparts, and a 40-room 80×120
//! layout for scalability runs. Every plan is rooms along bands joined by
//! shared corridors, with 2-cell doorways.

use crate::env::Environment;

/// Names accepted by [`builtin_text`] and [`builtin`], in canonical order.
pub const BUILTIN_NAMES: [&str; 7] = ["e1", "e2", "e3", "e1p", "e2p", "e3p", "e4"];

struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<char>,
}

impl Canvas {
    fn walls(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            cells: vec!['#'; width * height],
        }
    }

    fn set(&mut self, row: usize, col: usize, ch: char) {
        self.cells[row * self.width + col] = ch;
    }

    fn get(&self, row: usize, col: usize) -> char {
        self.cells[row * self.width + col]
    }

    /// Fills the inclusive rectangle [r0..=r1] × [c0..=c1].
    fn fill(&mut self, r0: usize, r1: usize, c0: usize, c1: usize, ch: char) {
        for row in r0..=r1 {
            for col in c0..=c1 {
                self.set(row, col, ch);
            }
        }
    }

    /// Scales every cell to a 2×2 block.
    fn doubled(&self) -> Canvas {
        let mut big = Canvas::walls(self.width * 2, self.height * 2);
        for row in 0..self.height {
            for col in 0..self.width {
                let ch = self.get(row, col);
                big.set(2 * row, 2 * col, ch);
                big.set(2 * row, 2 * col + 1, ch);
                big.set(2 * row + 1, 2 * col, ch);
                big.set(2 * row + 1, 2 * col + 1, ch);
            }
        }
        big
    }

    fn to_text(&self) -> String {
        let mut text = String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                text.push(self.get(row, col));
            }
            text.push('\n');
        }
        text
    }
}

fn next_label(label: char) -> char {
    match label {
        'Z' => 'a',
        _ => (label as u8 + 1) as char,
    }
}

/// Carves a 2-cell doorway for the room spanning [c0..=c1] into `door_row`.
fn doorway(canvas: &mut Canvas, door_row: usize, c0: usize, c1: usize, label: char) {
    let mid = (c0 + c1) / 2;
    canvas.fill(door_row, door_row, mid, mid + 1, label);
}

/// The 20×30 family: a top room band (rows 1–7), a 2-row corridor
/// (rows 9–10), and a bottom band (rows 12–18), with every room opening
/// onto the corridor.
fn two_band(top_spans: &[(usize, usize)], bottom_spans: &[(usize, usize)]) -> Canvas {
    let mut canvas = Canvas::walls(30, 20);
    canvas.fill(9, 10, 1, 28, '.');
    let mut label = 'A';
    for &(c0, c1) in top_spans {
        canvas.fill(1, 7, c0, c1, label);
        doorway(&mut canvas, 8, c0, c1, label);
        label = next_label(label);
    }
    for &(c0, c1) in bottom_spans {
        canvas.fill(12, 18, c0, c1, label);
        doorway(&mut canvas, 11, c0, c1, label);
        label = next_label(label);
    }
    canvas
}

fn e1_canvas() -> Canvas {
    two_band(
        &[(1, 7), (9, 14), (16, 21), (23, 28)],
        &[(1, 9), (11, 19), (21, 28)],
    )
}

fn e2_canvas() -> Canvas {
    two_band(
        &[(1, 9), (11, 19), (21, 28)],
        &[(1, 9), (11, 19), (21, 28)],
    )
}

fn e3_canvas() -> Canvas {
    two_band(
        &[(1, 5), (7, 11), (13, 17), (19, 23), (25, 28)],
        &[(1, 5), (7, 11), (13, 17), (19, 23), (25, 28)],
    )
}

/// 80×120, four bands of ten rooms each joined by three full-width
/// corridors; interior bands open both up and down.
fn e4_canvas() -> Canvas {
    let mut canvas = Canvas::walls(120, 80);
    for &(r0, r1) in &[(18, 19), (39, 40), (60, 61)] {
        canvas.fill(r0, r1, 1, 118, '.');
    }
    let spans: Vec<(usize, usize)> = (0..10)
        .map(|i| (1 + 12 * i, if i == 9 { 118 } else { 11 + 12 * i }))
        .collect();
    let bands: [(usize, usize, &[usize]); 4] = [
        (1, 16, &[17]),
        (21, 37, &[20, 38]),
        (42, 58, &[41, 59]),
        (63, 78, &[62]),
    ];
    let mut label = 'A';
    for &(r0, r1, door_rows) in &bands {
        for &(c0, c1) in &spans {
            canvas.fill(r0, r1, c0, c1, label);
            for &door_row in door_rows {
                doorway(&mut canvas, door_row, c0, c1, label);
            }
            label = next_label(label);
        }
    }
    canvas
}

/// Map text for a built-in layout, or None for an unknown name.
pub fn builtin_text(name: &str) -> Option<String> {
    let canvas = match name {
        "e1" => e1_canvas(),
        "e2" => e2_canvas(),
        "e3" => e3_canvas(),
        "e1p" => e1_canvas().doubled(),
        "e2p" => e2_canvas().doubled(),
        "e3p" => e3_canvas().doubled(),
        "e4" => e4_canvas(),
        _ => return None,
    };
    Some(canvas.to_text())
}

/// Parsed built-in layout, or None for an unknown name.
pub fn builtin(name: &str) -> Option<Environment> {
    builtin_text(name).map(|text| Environment::parse(&text).expect("built-in maps are valid"))
}
