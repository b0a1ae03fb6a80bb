//! Text and PGM renders of an episode state.

use std::fmt::Write as _;

use crate::config::CellCoord;
use crate::env::{AgentRecord, EnvState};
use crate::probability::ProbabilityMap;
use crate::scalar::Scalar;

/// Probability glyphs from empty to certain.
pub const GLYPHS: &[u8; 8] = b" .:-=+*#";

/// Glyph for one cell probability: blank for zero, then seven equal-width
/// bands over `(0, 1]`.
pub fn glyph_for<T: Scalar>(value: T) -> char {
    if value <= T::zero() {
        return GLYPHS[0] as char;
    }
    let band = (value * T::lit(7.0))
        .ceil()
        .to_usize()
        .unwrap_or(7)
        .clamp(1, 7);
    GLYPHS[band] as char
}

/// One character per cell, rows separated by `\n`. Drones draw as `D`, the
/// person as `X` when `show_target` is set, everything else by probability.
pub fn render_ascii<T: Scalar>(state: &EnvState<T>, show_target: bool) -> String {
    let n = state.config().grid_size;
    let target = show_target.then(|| state.target().position);
    let mut out = String::with_capacity(n * (n + 1));
    for y in 0..n {
        if y > 0 {
            out.push('\n');
        }
        for x in 0..n {
            let cell = CellCoord::new(x as i32, y as i32);
            let ch = if state.live_agents().any(|a| a.position == cell) {
                'D'
            } else if target == Some(cell) {
                'X'
            } else {
                glyph_for(state.map().values()[cell.index(n)])
            };
            out.push(ch);
        }
    }
    out
}

/// Binary PGM (P5), one pixel per cell, intensity `round(255 * value / max)`.
///
/// Drone and target markers are not drawn into the pixels; they are listed in
/// the header comments as `# drone <id> <x> <y> <alive|dead>` and
/// `# target <x> <y>` so the image stays a faithful picture of the belief.
pub fn render_pgm<T: Scalar>(
    map: &ProbabilityMap<T>,
    agents: &[AgentRecord],
    target: Option<CellCoord>,
) -> Vec<u8> {
    let n = map.grid_size();
    let mut header = String::from("P5\n");
    header.push_str("# pixel = round(255 * value / max_value)\n");
    let _ = writeln!(header, "# tick {}", map.tick());
    for a in agents {
        let _ = writeln!(
            header,
            "# drone {} {} {} {}",
            a.id.0,
            a.position.x,
            a.position.y,
            if a.alive { "alive" } else { "dead" }
        );
    }
    if let Some(t) = target {
        let _ = writeln!(header, "# target {} {}", t.x, t.y);
    }
    let _ = write!(header, "{n} {n}\n255\n");

    let max = map.max_value();
    let mut bytes = header.into_bytes();
    bytes.extend(map.values().iter().map(|&v| {
        if max > T::zero() {
            (T::lit(255.0) * v / max).round().to_u8().unwrap_or(255)
        } else {
            0
        }
    }));
    bytes
}

/// Pixel bytes of a PGM produced by [`render_pgm`].
pub fn pgm_pixels(pgm: &[u8]) -> Option<&[u8]> {
    // Header: magic, comments, dimensions, maxval; each newline-terminated.
    let mut offset = 0;
    let mut non_comment_lines = 0;
    while non_comment_lines < 3 {
        let end = offset + pgm[offset..].iter().position(|&b| b == b'\n')?;
        if pgm[offset] != b'#' {
            non_comment_lines += 1;
        }
        offset = end + 1;
    }
    Some(&pgm[offset..])
}
