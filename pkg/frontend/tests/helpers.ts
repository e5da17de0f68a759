// Shared test utilities: hand-rolled encoders so decoder tests do not lean
// on the code under test.

/** Build float-map bytes. Rows are given top-down; the format stores bottom-up. */
export function buildPfm(
  rows: number[][],
  opts: { magic?: string; scale?: string; littleEndian?: boolean } = {},
): Uint8Array {
  const magic = opts.magic ?? "Pf";
  const scale = opts.scale ?? "-1.0";
  const littleEndian = opts.littleEndian ?? true;
  const height = rows.length;
  const width = rows[0]?.length ?? 0;
  const header = new TextEncoder().encode(`${magic}\n${width} ${height}\n${scale}\n`);
  const body = new ArrayBuffer(4 * width * height);
  const view = new DataView(body);
  for (let row = 0; row < height; row++) {
    const stored = height - 1 - row; // bottom-up
    for (let col = 0; col < width; col++) {
      view.setFloat32((stored * width + col) * 4, rows[row][col], littleEndian);
    }
  }
  const out = new Uint8Array(header.length + body.byteLength);
  out.set(header, 0);
  out.set(new Uint8Array(body), header.length);
  return out;
}

/** Parse a zip of stored (uncompressed) entries into name -> bytes. */
export function readStoredZip(bytes: Uint8Array): Map<string, Uint8Array> {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const entries = new Map<string, Uint8Array>();
  let off = 0;
  while (off + 30 <= bytes.length && view.getUint32(off, true) === 0x04034b50) {
    const method = view.getUint16(off + 8, true);
    const compressedSize = view.getUint32(off + 18, true);
    const nameLength = view.getUint16(off + 26, true);
    const extraLength = view.getUint16(off + 28, true);
    const name = new TextDecoder().decode(bytes.subarray(off + 30, off + 30 + nameLength));
    if (method !== 0) throw new Error(`zip entry ${name} is compressed, expected stored`);
    const start = off + 30 + nameLength + extraLength;
    entries.set(name, bytes.subarray(start, start + compressedSize));
    off = start + compressedSize;
  }
  if (entries.size === 0) throw new Error("no zip entries found");
  return entries;
}
