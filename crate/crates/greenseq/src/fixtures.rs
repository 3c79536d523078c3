//! Shared quiver fixtures for unit tests.

use crate::quiver::Quiver;

/// 11-vertex central quiver: oriented 7-cycle with pendant triangles over
/// four of its arrows.
pub fn punctured_disk_core() -> Quiver {
    let mut arrows = vec![];
    for i in 1..7 {
        arrows.push((i, i + 1, 1));
    }
    arrows.push((7, 1, 1));
    for (b, (x, y)) in [(8, (1, 2)), (9, (2, 3)), (10, (3, 4)), (11, (6, 7))] {
        arrows.push((b, x, 1));
        arrows.push((y, b, 1));
    }
    Quiver::new(11, &arrows).unwrap()
}

/// 16-vertex affine example: non-oriented cycle on vertices 2..=9 with three
/// pendant triangles carrying components {1}, {10..=13}, and {14..=16}.
pub fn affine_sixteen() -> Quiver {
    Quiver::new(
        16,
        &[
            (2, 1, 1),
            (1, 3, 1),
            (3, 2, 1),
            (7, 2, 1),
            (3, 4, 1),
            (5, 4, 1),
            (4, 10, 1),
            (5, 6, 1),
            (10, 5, 1),
            (9, 6, 1),
            (6, 14, 1),
            (7, 8, 1),
            (8, 9, 1),
            (14, 9, 1),
            (10, 11, 1),
            (11, 12, 1),
            (13, 11, 1),
            (12, 13, 1),
            (14, 15, 1),
            (16, 14, 1),
            (15, 16, 1),
        ],
    )
    .unwrap()
}
