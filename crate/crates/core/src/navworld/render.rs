//! ASCII view of a map, top row first. Furniture uses its class symbol, the
//! start is `@`, and an optional path is drawn with `*`.

use super::grid::Pose;
use super::NavMap;

pub fn render(map: &NavMap, path: Option<&[Pose]>) -> String {
    let (w, h) = (map.width.max(0) as usize, map.height.max(0) as usize);
    let mut rows = vec![vec!['.'; w]; h];
    let mut put = |x: i32, y: i32, c: char| {
        if map.in_bounds(x, y) {
            rows[y as usize][x as usize] = c;
        }
    };
    for f in &map.furniture {
        for (x, y) in f.footprint.cells() {
            put(x, y, f.class.symbol());
        }
    }
    for p in path.unwrap_or(&[]) {
        put(p.x, p.y, '*');
    }
    put(map.start.x, map.start.y, '@');
    let mut out = String::with_capacity((w + 1) * h);
    for row in rows.iter().rev() {
        out.extend(row.iter());
        out.push('\n');
    }
    out
}
