/** Brillouin-zone geometry derived from the reciprocal vectors in a file header. */

export type Vec2 = [number, number];

function add(a: Vec2, b: Vec2, fa: number, fb: number): Vec2 {
  return [fa * a[0] + fb * b[0], fa * a[1] + fb * b[1]];
}

/**
 * The six corners of the hexagonal first Brillouin zone spanned by b1 and b2,
 * ordered by angle around Gamma.  The corners are the K points
 * +-(2 b1 + b2)/3, +-(b1 + 2 b2)/3 and +-(b1 - b2)/3.
 */
export function hexagonCorners(b1: Vec2, b2: Vec2): Vec2[] {
  const corners: Vec2[] = [
    add(b1, b2, 2 / 3, 1 / 3),
    add(b1, b2, 1 / 3, 2 / 3),
    add(b1, b2, -1 / 3, 1 / 3),
    add(b1, b2, -2 / 3, -1 / 3),
    add(b1, b2, -1 / 3, -2 / 3),
    add(b1, b2, 1 / 3, -1 / 3),
  ];
  return corners.sort((p, q) => Math.atan2(p[1], p[0]) - Math.atan2(q[1], q[0]));
}

/** Wrap a k-point to the unit cell image closest to Gamma (minimal norm). */
export function wrapToZone(k: Vec2, b1: Vec2, b2: Vec2): Vec2 {
  let best = k;
  let bestNorm = k[0] * k[0] + k[1] * k[1];
  for (let i = -1; i <= 1; i++) {
    for (let j = -1; j <= 1; j++) {
      const cand: Vec2 = [k[0] + i * b1[0] + j * b2[0], k[1] + i * b1[1] + j * b2[1]];
      const norm = cand[0] * cand[0] + cand[1] * cand[1];
      if (norm < bestNorm - 1e-12) {
        best = cand;
        bestNorm = norm;
      }
    }
  }
  return best;
}
