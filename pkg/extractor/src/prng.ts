/** Deterministic string-seeded PRNG for the fixed projection matrices. */

export function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Fixed rows x cols matrix derived from the seed string (approx. N(0, 1/cols)). */
export function seededProjection(seedText: string, rows: number, cols: number): Float64Array {
  const rand = mulberry32(fnv1a(seedText));
  const matrix = new Float64Array(rows * cols);
  const scale = 1 / Math.sqrt(cols);
  for (let i = 0; i < matrix.length; i++) {
    // sum of 4 uniforms, centered: cheap near-Gaussian, fully deterministic
    const g = rand() + rand() + rand() + rand() - 2.0;
    matrix[i] = g * scale;
  }
  return matrix;
}
