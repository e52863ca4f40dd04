/**
 * Binary tensor codec (SCIT version 1).
 *
 * Layout:
 *
 *     magic    4 bytes  "SCIT"
 *     version  u8       1
 *     dtype    u8       1 = float32, 2 = float64, 3 = uint8
 *     rank     u8       2 (frame) or 3 (video cube)
 *     reserved u8       0
 *     dims     rank x u32 LE, order (nx, ny) or (nx, ny, frames)
 *     payload  LE, frame-major then row-major
 *
 * uint8 payloads are 8-bit image data: scaled to [0, 1] on decode and
 * quantized back (round-half-to-even of 255*x after clipping) on encode,
 * matching the behaviour of the solver side.
 */

export class SciTensorError extends Error {}

export const SCIT_MAGIC = Buffer.from("SCIT", "ascii");
export const SCIT_VERSION = 1;

export type ScitDtype = "f32" | "f64" | "u8";

const DTYPE_CODES: Record<ScitDtype, number> = { f32: 1, f64: 2, u8: 3 };
const ITEM_SIZES: Record<number, number> = { 1: 4, 2: 8, 3: 1 };

// Element-count cap: keeps corrupt headers from triggering huge allocations.
const MAX_ELEMENTS = 2 ** 32;

export interface Tensor {
  rank: 2 | 3;
  nx: number;
  ny: number;
  /** Frame count; 1 for rank-2 tensors. */
  frames: number;
  /** Values in [frame][row][column] order. */
  data: Float64Array;
}

export function makeTensor(nx: number, ny: number, frames: number | null, data: Float64Array): Tensor {
  const rank = frames === null ? 2 : 3;
  const b = frames ?? 1;
  if (data.length !== nx * ny * b) {
    throw new SciTensorError(`data length ${data.length} does not match dims (${nx}, ${ny}, ${b})`);
  }
  return { rank, nx, ny, frames: b, data };
}

function roundHalfEven(x: number): number {
  const f = Math.floor(x);
  const diff = x - f;
  if (diff > 0.5) return f + 1;
  if (diff < 0.5) return f;
  return f % 2 === 0 ? f : f + 1;
}

export function encodeTensor(tensor: Tensor, dtype: ScitDtype = "f64"): Buffer {
  const { rank, nx, ny, frames, data } = tensor;
  if (nx <= 0 || ny <= 0 || frames <= 0) {
    throw new SciTensorError(`dims must be positive, got (${nx}, ${ny}, ${frames})`);
  }
  const count = nx * ny * frames;
  if (count > MAX_ELEMENTS) {
    throw new SciTensorError(`dims overflow: (${nx}, ${ny}, ${frames})`);
  }

  const head = Buffer.alloc(8 + 4 * rank);
  SCIT_MAGIC.copy(head, 0);
  head.writeUInt8(SCIT_VERSION, 4);
  head.writeUInt8(DTYPE_CODES[dtype], 5);
  head.writeUInt8(rank, 6);
  head.writeUInt8(0, 7);
  head.writeUInt32LE(nx, 8);
  head.writeUInt32LE(ny, 12);
  if (rank === 3) head.writeUInt32LE(frames, 16);

  const itemSize = ITEM_SIZES[DTYPE_CODES[dtype]];
  const payload = Buffer.alloc(count * itemSize);
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength);
  for (let i = 0; i < count; i++) {
    const v = data[i];
    if (dtype === "f64") view.setFloat64(i * 8, v, true);
    else if (dtype === "f32") view.setFloat32(i * 4, v, true);
    else view.setUint8(i, roundHalfEven(Math.min(1, Math.max(0, v)) * 255));
  }
  return Buffer.concat([head, payload]);
}

export function decodeTensor(buf: Buffer, scaleU8 = true): Tensor {
  if (buf.length < 8) throw new SciTensorError("truncated header");
  const magic = buf.subarray(0, 4);
  if (!magic.equals(SCIT_MAGIC)) {
    throw new SciTensorError(`bad magic ${JSON.stringify(magic.toString("latin1"))}`);
  }
  const version = buf.readUInt8(4);
  if (version !== SCIT_VERSION) {
    throw new SciTensorError(`version mismatch: got ${version}, support ${SCIT_VERSION}`);
  }
  const dtypeCode = buf.readUInt8(5);
  const itemSize = ITEM_SIZES[dtypeCode];
  if (itemSize === undefined) throw new SciTensorError(`unknown dtype code ${dtypeCode}`);
  const rank = buf.readUInt8(6);
  if (rank !== 2 && rank !== 3) throw new SciTensorError(`rank must be 2 or 3, got ${rank}`);
  const reserved = buf.readUInt8(7);
  if (reserved !== 0) throw new SciTensorError(`reserved byte must be 0, got ${reserved}`);
  if (buf.length < 8 + 4 * rank) throw new SciTensorError("truncated dims");

  const nx = buf.readUInt32LE(8);
  const ny = buf.readUInt32LE(12);
  const frames = rank === 3 ? buf.readUInt32LE(16) : 1;
  if (nx <= 0 || ny <= 0 || frames <= 0) {
    throw new SciTensorError(`dims must be positive, got (${nx}, ${ny}${rank === 3 ? `, ${frames}` : ""})`);
  }
  const count = nx * ny * frames;
  if (count > MAX_ELEMENTS) throw new SciTensorError(`dims overflow: (${nx}, ${ny}, ${frames})`);

  const start = 8 + 4 * rank;
  const expected = count * itemSize;
  if (buf.length - start !== expected) {
    throw new SciTensorError(`truncated payload: expected ${expected} bytes, got ${buf.length - start}`);
  }

  const view = new DataView(buf.buffer, buf.byteOffset + start, expected);
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    if (dtypeCode === 2) data[i] = view.getFloat64(i * 8, true);
    else if (dtypeCode === 1) data[i] = view.getFloat32(i * 4, true);
    else data[i] = scaleU8 ? view.getUint8(i) / 255 : view.getUint8(i);
  }
  return { rank: rank as 2 | 3, nx, ny, frames, data };
}
