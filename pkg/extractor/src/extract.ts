import { readFileSync, readdirSync, statSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { encodeAvts, type StreamChunks } from "./avts.js";
import { loadEncoder, type Encoder } from "./encoder.js";
import type { Manifest } from "./manifest.js";
import { decodePpm, type Frame } from "./ppm.js";
import { decodeWav, type AudioTrack } from "./wav.js";

export interface ExtractionSummary {
  chunks: number;
  frames: number;
  gridH: number;
  gridW: number;
  visualDim: number;
  audioTokens: number;
  audioDim: number;
  downscale: number;
  output: string;
}

/** Lexicographically ordered .ppm frames from a directory, or one file. */
function loadFrames(path: string): Frame[] {
  let files: string[];
  if (statSync(path).isDirectory()) {
    files = readdirSync(path)
      .filter((name) => name.toLowerCase().endsWith(".ppm"))
      .sort()
      .map((name) => join(path, name));
  } else {
    files = [path];
  }
  if (files.length === 0) {
    throw new Error(`codec failure: no .ppm frames under ${path}`);
  }
  const frames = files.map((file) => {
    try {
      return decodePpm(readFileSync(file), file);
    } catch (err) {
      throw new Error(`codec failure: ${(err as Error).message}`);
    }
  });
  const { width, height } = frames[0];
  frames.forEach((frame, i) => {
    if (frame.width !== width || frame.height !== height) {
      throw new Error(
        `codec failure: frame ${files[i]} is ${frame.width}x${frame.height}, ` +
        `expected ${width}x${height}`,
      );
    }
  });
  return frames;
}

/** Smallest integer downscale factor that brings a frame under the pixel cap. */
export function downscaleFactor(width: number, height: number, pixelCap: number): number {
  let scale = 1;
  while (Math.floor(width / scale) * Math.floor(height / scale) > pixelCap) {
    scale++;
  }
  return scale;
}

function planGrid(frame: Frame, encoder: Encoder, pixelCap: number) {
  const scale = downscaleFactor(frame.width, frame.height, pixelCap);
  const gridH = Math.floor(Math.floor(frame.height / scale) / encoder.patchSize);
  const gridW = Math.floor(Math.floor(frame.width / scale) / encoder.patchSize);
  if (gridH < 1 || gridW < 1) {
    throw new Error(
      `codec failure: frames ${frame.width}x${frame.height} too small for ` +
      `${encoder.patchSize * scale}px patches after downscale x${scale}`,
    );
  }
  return { scale, gridH, gridW };
}

function sliceAudio(
  track: AudioTrack, encoder: Encoder, chunks: number, tokensPerChunk: number,
): Float64Array[] {
  const out: Float64Array[] = [];
  const total = track.samples.length;
  for (let t = 0; t < chunks; t++) {
    const chunkValues = new Float64Array(tokensPerChunk * encoder.audioDim);
    const chunkStart = Math.floor((t * total) / chunks);
    const chunkEnd = Math.floor(((t + 1) * total) / chunks);
    const span = chunkEnd - chunkStart;
    for (let token = 0; token < tokensPerChunk; token++) {
      const start = chunkStart + Math.floor((token * span) / tokensPerChunk);
      const end = chunkStart + Math.floor(((token + 1) * span) / tokensPerChunk);
      const embedding = encoder.encodeAudioWindow(track, start, Math.max(end, start + 1));
      chunkValues.set(embedding, token * encoder.audioDim);
    }
    out.push(chunkValues);
  }
  return out;
}

export function extract(manifest: Manifest): ExtractionSummary {
  const encoder = loadEncoder(manifest.model);
  const frames = loadFrames(manifest.video);
  let track: AudioTrack;
  try {
    track = decodeWav(readFileSync(manifest.audio), manifest.audio);
  } catch (err) {
    throw new Error(`codec failure: ${(err as Error).message}`);
  }

  const chunks = Math.floor(frames.length / manifest.framesPerChunk);
  if (chunks < 1) {
    throw new Error(
      `codec failure: ${frames.length} frames cannot fill a chunk of ${manifest.framesPerChunk}`,
    );
  }
  const { scale, gridH, gridW } = planGrid(frames[0], encoder, manifest.pixelCap);

  const perFrame = gridH * gridW * encoder.visualDim;
  const visual: Float64Array[] = [];
  for (let t = 0; t < chunks; t++) {
    const chunkValues = new Float64Array(manifest.framesPerChunk * perFrame);
    for (let f = 0; f < manifest.framesPerChunk; f++) {
      const frame = frames[t * manifest.framesPerChunk + f];
      chunkValues.set(encoder.encodeFrame(frame, gridH, gridW, scale), f * perFrame);
    }
    visual.push(chunkValues);
  }

  const stream: StreamChunks = {
    frames: manifest.framesPerChunk,
    gridH,
    gridW,
    visualDim: encoder.visualDim,
    audioTokens: manifest.audioTokensPerChunk,
    audioDim: encoder.audioDim,
    visual,
    audio: sliceAudio(track, encoder, chunks, manifest.audioTokensPerChunk),
  };
  writeFileSync(manifest.output, encodeAvts(stream));
  return {
    chunks,
    frames: manifest.framesPerChunk,
    gridH,
    gridW,
    visualDim: encoder.visualDim,
    audioTokens: manifest.audioTokensPerChunk,
    audioDim: encoder.audioDim,
    downscale: scale,
    output: manifest.output,
  };
}
