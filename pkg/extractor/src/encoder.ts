import type { Frame } from "./ppm.js";
import type { AudioTrack } from "./wav.js";
import { seededProjection } from "./prng.js";

/**
 * An encoder turns raw media into the token grids the stream format carries.
 * Real Omni-LLM backbones plug in behind this interface (tapping hidden
 * states post-encoder, pre-decoder); the built-in `patch-stats/v1` encoder is
 * a deterministic featurizer so extraction runs without model downloads and
 * re-extraction is byte-identical.
 */
export interface Encoder {
  readonly id: string;
  readonly visualDim: number;
  readonly audioDim: number;
  readonly patchSize: number;
  /** One d-dim embedding per patch, row-major over (row, col). */
  encodeFrame(frame: Frame, gridH: number, gridW: number, scale: number): Float64Array;
  /** One d_a-dim embedding per token window. */
  encodeAudioWindow(track: AudioTrack, start: number, end: number): Float64Array;
}

const VISUAL_FEATURES = 8;
const AUDIO_FEATURES = 6;

class PatchStatsEncoder implements Encoder {
  readonly id = "patch-stats/v1";
  readonly visualDim = 64;
  readonly audioDim = 32;
  readonly patchSize = 16;
  private readonly visualProjection = seededProjection(
    `${this.id}:visual`, VISUAL_FEATURES, this.visualDim,
  );
  private readonly audioProjection = seededProjection(
    `${this.id}:audio`, AUDIO_FEATURES, this.audioDim,
  );

  encodeFrame(frame: Frame, gridH: number, gridW: number, scale: number): Float64Array {
    const out = new Float64Array(gridH * gridW * this.visualDim);
    const patchPx = this.patchSize * scale; // source pixels per patch side
    for (let gy = 0; gy < gridH; gy++) {
      for (let gx = 0; gx < gridW; gx++) {
        const features = patchFeatures(frame, gx * patchPx, gy * patchPx, patchPx);
        project(
          features, this.visualProjection, this.visualDim,
          out.subarray((gy * gridW + gx) * this.visualDim, (gy * gridW + gx + 1) * this.visualDim),
        );
      }
    }
    return out;
  }

  encodeAudioWindow(track: AudioTrack, start: number, end: number): Float64Array {
    const out = new Float64Array(this.audioDim);
    project(audioFeatures(track.samples, start, end), this.audioProjection, this.audioDim, out);
    return out;
  }
}

function patchFeatures(frame: Frame, x0: number, y0: number, size: number): Float64Array {
  const { width, height, pixels } = frame;
  const x1 = Math.min(x0 + size, width);
  const y1 = Math.min(y0 + size, height);
  let sumR = 0, sumG = 0, sumB = 0, sumLuma = 0, sumLumaSq = 0;
  let gradX = 0, gradY = 0, edgeCount = 0;
  let count = 0;
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const p = (y * width + x) * 3;
      const r = pixels[p] / 255;
      const g = pixels[p + 1] / 255;
      const b = pixels[p + 2] / 255;
      const luma = 0.299 * r + 0.587 * g + 0.114 * b;
      sumR += r; sumG += g; sumB += b;
      sumLuma += luma; sumLumaSq += luma * luma;
      if (x + 1 < x1) {
        const q = (y * width + x + 1) * 3;
        const next = 0.299 * pixels[q] + 0.587 * pixels[q + 1] + 0.114 * pixels[q + 2];
        const dx = Math.abs(next / 255 - luma);
        gradX += dx;
        if (dx > 0.1) edgeCount++;
      }
      if (y + 1 < y1) {
        const q = ((y + 1) * width + x) * 3;
        const below = 0.299 * pixels[q] + 0.587 * pixels[q + 1] + 0.114 * pixels[q + 2];
        gradY += Math.abs(below / 255 - luma);
      }
      count++;
    }
  }
  const n = Math.max(count, 1);
  const meanLuma = sumLuma / n;
  return Float64Array.from([
    sumR / n,
    sumG / n,
    sumB / n,
    Math.sqrt(Math.max(sumLumaSq / n - meanLuma * meanLuma, 0)),
    gradX / n,
    gradY / n,
    edgeCount / n,
    1.0, // bias keeps every patch embedding away from the zero vector
  ]);
}

function audioFeatures(samples: Float64Array, start: number, end: number): Float64Array {
  let energy = 0, meanAbs = 0, crossings = 0, diffEnergy = 0, peak = 0;
  const n = Math.max(end - start, 1);
  for (let i = start; i < end; i++) {
    const s = samples[i];
    energy += s * s;
    meanAbs += Math.abs(s);
    peak = Math.max(peak, Math.abs(s));
    if (i > start && samples[i - 1] * s < 0) crossings++;
    if (i > start) {
      const d = s - samples[i - 1];
      diffEnergy += d * d;
    }
  }
  return Float64Array.from([
    Math.sqrt(energy / n),
    meanAbs / n,
    crossings / n,
    Math.sqrt(diffEnergy / n),
    peak,
    1.0, // bias, as for patches
  ]);
}

function project(features: Float64Array, matrix: Float64Array, dim: number, out: Float64Array): void {
  for (let j = 0; j < dim; j++) {
    let acc = 0;
    for (let i = 0; i < features.length; i++) {
      acc += features[i] * matrix[i * dim + j];
    }
    out[j] = acc;
  }
  // unit-normalize: downstream similarity math never sees zero-norm tokens
  let norm = 0;
  for (let j = 0; j < dim; j++) norm += out[j] * out[j];
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let j = 0; j < dim; j++) out[j] /= norm;
  } else {
    out[0] = 1.0;
  }
}

const REGISTRY: Record<string, () => Encoder> = {
  "patch-stats/v1": () => new PatchStatsEncoder(),
};

export function loadEncoder(model: string): Encoder {
  const factory = REGISTRY[model];
  if (!factory) {
    throw new Error(
      `model load failure: unknown encoder ${JSON.stringify(model)}; ` +
      `available: ${Object.keys(REGISTRY).join(", ")}`,
    );
  }
  return factory();
}
