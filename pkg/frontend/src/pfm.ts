import type { FloatMap } from "./types.js";

// Grayscale portable float map, as emitted by the service: the ASCII header
// "Pf\n<width> <height>\n<scale>\n" followed by width*height IEEE floats,
// rows stored bottom-up, little-endian when scale is negative.

function isSpace(c: number): boolean {
  return c === 0x20 || c === 0x0a || c === 0x0d || c === 0x09;
}

export function decodePfm(bytes: Uint8Array): FloatMap {
  let off = 0;
  const token = (): string => {
    while (off < bytes.length && isSpace(bytes[off])) off++;
    const start = off;
    while (off < bytes.length && !isSpace(bytes[off])) off++;
    if (start === off) throw new Error("float map header is truncated");
    return String.fromCharCode(...bytes.subarray(start, off));
  };

  const magic = token();
  if (magic !== "Pf") {
    throw new Error(`expected grayscale float map magic "Pf", got "${magic}"`);
  }
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const scale = parseFloat(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error(`bad float map dimensions ${width}x${height}`);
  }
  if (!Number.isFinite(scale) || scale === 0) {
    throw new Error(`bad float map scale ${scale}`);
  }
  off += 1; // exactly one whitespace byte terminates the header

  const count = width * height;
  if (bytes.length < off + 4 * count) {
    throw new Error(`float map needs ${4 * count} sample bytes, has ${bytes.length - off}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset + off, 4 * count);
  const littleEndian = scale < 0;
  const data = new Float32Array(count);
  for (let row = 0; row < height; row++) {
    const src = height - 1 - row;
    for (let col = 0; col < width; col++) {
      data[row * width + col] = view.getFloat32((src * width + col) * 4, littleEndian);
    }
  }
  return { width, height, data };
}
