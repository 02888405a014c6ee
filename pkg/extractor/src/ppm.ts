/** Minimal binary PPM (P6) decoder. Frames arrive as image sequences. */

export interface Frame {
  width: number;
  height: number;
  /** Interleaved RGB, one byte per channel. */
  pixels: Uint8Array;
}

function isWhitespace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

/** Read the next whitespace-delimited token, skipping `#` comment lines. */
function nextToken(data: Uint8Array, offset: number): { token: string; next: number } {
  let i = offset;
  for (;;) {
    while (i < data.length && isWhitespace(data[i])) i++;
    if (data[i] === 0x23) {
      while (i < data.length && data[i] !== 0x0a) i++;
      continue;
    }
    break;
  }
  const start = i;
  while (i < data.length && !isWhitespace(data[i])) i++;
  if (start === i) throw new Error("truncated PPM header");
  return { token: Buffer.from(data.slice(start, i)).toString("ascii"), next: i };
}

export function decodePpm(data: Uint8Array, name = "frame"): Frame {
  let cursor = 0;
  const magic = nextToken(data, cursor);
  if (magic.token !== "P6") {
    throw new Error(`${name}: expected P6 PPM, got ${JSON.stringify(magic.token)}`);
  }
  const width = nextToken(data, magic.next);
  const height = nextToken(data, width.next);
  const maxval = nextToken(data, height.next);
  const w = Number(width.token);
  const h = Number(height.token);
  if (!Number.isInteger(w) || !Number.isInteger(h) || w < 1 || h < 1) {
    throw new Error(`${name}: bad PPM dimensions ${width.token} x ${height.token}`);
  }
  if (maxval.token !== "255") {
    throw new Error(`${name}: only maxval 255 supported, got ${maxval.token}`);
  }
  const payload = maxval.next + 1; // exactly one whitespace byte after maxval
  const expected = w * h * 3;
  if (data.length - payload < expected) {
    throw new Error(`${name}: PPM payload truncated (${data.length - payload} of ${expected} bytes)`);
  }
  return { width: w, height: h, pixels: data.slice(payload, payload + expected) };
}
