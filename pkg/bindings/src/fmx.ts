// FMX1 matrix files: 8-byte magic "FMX1\0\0\0\0", u32 rows, u32 cols
// (little-endian), u8 dtype tag (0 = LE float32), 3 pad bytes, row-major
// float32 payload.

const MAGIC = Buffer.from("FMX1\0\0\0\0", "latin1");
const HEADER_BYTES = MAGIC.length + 12;

/** Row-major float32 matrix view shared with the core's FMX1 files. */
export class ArrayView {
  constructor(
    public readonly rows: number,
    public readonly cols: number,
    public readonly data: Float32Array,
  ) {
    if (rows * cols !== data.length) {
      throw new Error(`shape ${rows}x${cols} does not match buffer length ${data.length}`);
    }
  }

  get(row: number, col: number): number {
    return this.data[row * this.cols + col];
  }

  static fromBytes(blob: Buffer): ArrayView {
    if (blob.length < HEADER_BYTES || !blob.subarray(0, MAGIC.length).equals(MAGIC)) {
      throw new Error("not an FMX1 blob");
    }
    const rows = blob.readUInt32LE(8);
    const cols = blob.readUInt32LE(12);
    const tag = blob.readUInt8(16);
    if (tag !== 0) {
      throw new Error(`unsupported FMX1 dtype tag ${tag}`);
    }
    const payload = blob.subarray(HEADER_BYTES);
    if (payload.length !== rows * cols * 4) {
      throw new Error(`FMX1 payload is ${payload.length} bytes, expected ${rows * cols * 4}`);
    }
    // copy out of the Buffer so the view owns aligned memory
    const data = new Float32Array(rows * cols);
    for (let i = 0; i < data.length; i++) {
      data[i] = payload.readFloatLE(i * 4);
    }
    return new ArrayView(rows, cols, data);
  }

  toBytes(): Buffer {
    const out = Buffer.alloc(HEADER_BYTES + this.data.length * 4);
    MAGIC.copy(out, 0);
    out.writeUInt32LE(this.rows, 8);
    out.writeUInt32LE(this.cols, 12);
    out.writeUInt8(0, 16);
    for (let i = 0; i < this.data.length; i++) {
      out.writeFloatLE(this.data[i], HEADER_BYTES + i * 4);
    }
    return out;
  }
}
