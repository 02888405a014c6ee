import { mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Binary P6 PPM from a per-pixel RGB painter. */
export function makePpm(
  width: number,
  height: number,
  paint: (x: number, y: number) => [number, number, number],
): Buffer {
  const header = Buffer.from(`P6\n${width} ${height}\n255\n`, "ascii");
  const pixels = Buffer.alloc(width * height * 3);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = paint(x, y);
      const p = (y * width + x) * 3;
      pixels[p] = r;
      pixels[p + 1] = g;
      pixels[p + 2] = b;
    }
  }
  return Buffer.concat([header, pixels]);
}

/** Mono 16-bit PCM WAV from float samples in [-1, 1]. */
export function makeWav(samples: number[], sampleRate = 16000, channels = 1): Buffer {
  const frames = Math.floor(samples.length / channels);
  const dataSize = frames * channels * 2;
  const buffer = Buffer.alloc(44 + dataSize);
  buffer.write("RIFF", 0, "ascii");
  buffer.writeUInt32LE(36 + dataSize, 4);
  buffer.write("WAVE", 8, "ascii");
  buffer.write("fmt ", 12, "ascii");
  buffer.writeUInt32LE(16, 16);
  buffer.writeUInt16LE(1, 20); // PCM
  buffer.writeUInt16LE(channels, 22);
  buffer.writeUInt32LE(sampleRate, 24);
  buffer.writeUInt32LE(sampleRate * channels * 2, 28);
  buffer.writeUInt16LE(channels * 2, 32);
  buffer.writeUInt16LE(16, 34);
  buffer.write("data", 36, "ascii");
  buffer.writeUInt32LE(dataSize, 40);
  samples.forEach((s, i) => {
    const clamped = Math.max(-1, Math.min(1, s));
    buffer.writeInt16LE(Math.round(clamped * 32767), 44 + i * 2);
  });
  return buffer;
}

export function sineSamples(count: number, frequency = 440, sampleRate = 16000): number[] {
  return Array.from({ length: count }, (_, i) =>
    0.6 * Math.sin((2 * Math.PI * frequency * i) / sampleRate),
  );
}

export interface MediaDir {
  root: string;
  videoDir: string;
  audioPath: string;
}

/** A ready-to-extract media directory: numbered PPM frames plus a WAV. */
export function makeMediaDir(
  frameCount: number,
  width = 64,
  height = 48,
  audioSamples = 16000,
): MediaDir {
  const root = mkdtempSync(join(tmpdir(), "avts-extract-"));
  const videoDir = join(root, "frames");
  mkdirSync(videoDir);
  for (let f = 0; f < frameCount; f++) {
    const frame = makePpm(width, height, (x, y) => [
      (x * 4 + f * 16) % 256,
      (y * 5 + f * 8) % 256,
      (x + y + f * 32) % 256,
    ]);
    writeFileSync(join(videoDir, `frame_${String(f).padStart(4, "0")}.ppm`), frame);
  }
  const audioPath = join(root, "track.wav");
  writeFileSync(audioPath, makeWav(sineSamples(audioSamples)));
  return { root, videoDir, audioPath };
}
