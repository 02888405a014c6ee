/** Minimal RIFF/WAVE decoder for 16-bit PCM; channels are averaged to mono. */

export interface AudioTrack {
  sampleRate: number;
  /** Mono samples in [-1, 1]. */
  samples: Float64Array;
}

export function decodeWav(data: Uint8Array, name = "audio"): AudioTrack {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const tag = (offset: number) => Buffer.from(data.slice(offset, offset + 4)).toString("ascii");
  if (data.length < 44 || tag(0) !== "RIFF" || tag(8) !== "WAVE") {
    throw new Error(`${name}: not a RIFF/WAVE file`);
  }

  let channels = 0;
  let sampleRate = 0;
  let bitsPerSample = 0;
  let payload: Uint8Array | null = null;
  let offset = 12;
  while (offset + 8 <= data.length) {
    const chunkId = tag(offset);
    const size = view.getUint32(offset + 4, true);
    const body = offset + 8;
    if (body + size > data.length) {
      throw new Error(`${name}: WAV chunk ${chunkId} truncated`);
    }
    if (chunkId === "fmt ") {
      const format = view.getUint16(body, true);
      if (format !== 1) throw new Error(`${name}: only PCM WAV supported, got format ${format}`);
      channels = view.getUint16(body + 2, true);
      sampleRate = view.getUint32(body + 4, true);
      bitsPerSample = view.getUint16(body + 14, true);
    } else if (chunkId === "data") {
      payload = data.slice(body, body + size);
    }
    offset = body + size + (size % 2); // chunks are word-aligned
  }
  if (!payload || channels < 1 || sampleRate < 1) {
    throw new Error(`${name}: missing fmt/data chunks`);
  }
  if (bitsPerSample !== 16) {
    throw new Error(`${name}: only 16-bit PCM supported, got ${bitsPerSample}`);
  }

  const frames = Math.floor(payload.length / (2 * channels));
  if (frames === 0) throw new Error(`${name}: empty WAV payload`);
  const pcm = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  const samples = new Float64Array(frames);
  for (let i = 0; i < frames; i++) {
    let sum = 0;
    for (let c = 0; c < channels; c++) {
      sum += pcm.getInt16((i * channels + c) * 2, true);
    }
    samples[i] = sum / channels / 32768;
  }
  return { sampleRate, samples };
}
