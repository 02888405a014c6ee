/**
 * AVTS writer (and a reader used by tests): little-endian, float32 payload.
 * Layout: magic "AVTS" | version u32 | T F H W d L d_a u32 | flags u32,
 * then per chunk the F*H*W x d visual rows followed by the L x d_a audio
 * rows. Flag bit 0 marks row-major (frame, row, col) token order.
 */

export interface StreamChunks {
  frames: number;
  gridH: number;
  gridW: number;
  visualDim: number;
  audioTokens: number;
  audioDim: number;
  /** Per chunk: F*H*W*d visual values, row-major over (frame, row, col). */
  visual: Float64Array[];
  /** Per chunk: L*d_a audio values. */
  audio: Float64Array[];
}

export const AVTS_VERSION = 1;
export const FLAG_ROW_MAJOR = 1;

export function encodeAvts(stream: StreamChunks): Buffer {
  const t = stream.visual.length;
  if (t === 0 || stream.audio.length !== t) {
    throw new Error(`chunk counts inconsistent: ${t} visual vs ${stream.audio.length} audio`);
  }
  const m = stream.frames * stream.gridH * stream.gridW;
  const perChunk = m * stream.visualDim + stream.audioTokens * stream.audioDim;
  const buffer = Buffer.alloc(40 + t * perChunk * 4);
  buffer.write("AVTS", 0, "ascii");
  const header = [
    AVTS_VERSION, t, stream.frames, stream.gridH, stream.gridW,
    stream.visualDim, stream.audioTokens, stream.audioDim, FLAG_ROW_MAJOR,
  ];
  header.forEach((value, i) => buffer.writeUInt32LE(value, 4 + i * 4));

  let offset = 40;
  for (let chunk = 0; chunk < t; chunk++) {
    const visual = stream.visual[chunk];
    const audio = stream.audio[chunk];
    if (visual.length !== m * stream.visualDim) {
      throw new Error(`chunk ${chunk}: expected ${m * stream.visualDim} visual values, got ${visual.length}`);
    }
    if (audio.length !== stream.audioTokens * stream.audioDim) {
      throw new Error(`chunk ${chunk}: expected ${stream.audioTokens * stream.audioDim} audio values, got ${audio.length}`);
    }
    for (const value of visual) {
      buffer.writeFloatLE(Math.fround(value), offset);
      offset += 4;
    }
    for (const value of audio) {
      buffer.writeFloatLE(Math.fround(value), offset);
      offset += 4;
    }
  }
  return buffer;
}

export interface DecodedAvts {
  t: number;
  frames: number;
  gridH: number;
  gridW: number;
  visualDim: number;
  audioTokens: number;
  audioDim: number;
  flags: number;
  visual: Float32Array[];
  audio: Float32Array[];
}

export function decodeAvts(data: Buffer): DecodedAvts {
  if (data.length < 40 || data.toString("ascii", 0, 4) !== "AVTS") {
    throw new Error("bad magic: not an AVTS file");
  }
  const word = (i: number) => data.readUInt32LE(4 + i * 4);
  const [version, t, frames, gridH, gridW, visualDim, audioTokens, audioDim, flags] =
    [0, 1, 2, 3, 4, 5, 6, 7, 8].map(word);
  if (version !== AVTS_VERSION) throw new Error(`unsupported AVTS version ${version}`);
  const m = frames * gridH * gridW;
  const perChunk = (m * visualDim + audioTokens * audioDim) * 4;
  if (data.length !== 40 + t * perChunk) {
    throw new Error(`AVTS payload size mismatch: ${data.length} vs ${40 + t * perChunk}`);
  }
  const visual: Float32Array[] = [];
  const audio: Float32Array[] = [];
  let offset = 40;
  const readBlock = (count: number) => {
    const block = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      block[i] = data.readFloatLE(offset);
      offset += 4;
    }
    return block;
  };
  for (let chunk = 0; chunk < t; chunk++) {
    visual.push(readBlock(m * visualDim));
    audio.push(readBlock(audioTokens * audioDim));
  }
  return { t, frames, gridH, gridW, visualDim, audioTokens, audioDim, flags, visual, audio };
}
