/**
 * MVF: the engine's self-describing binary tensor file.
 *
 * Layout (little-endian): magic "MVF1", u8 dtype code (1 = float32),
 * u8 rank, u32[rank] dims, then the float32 payload in row-major order.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { endianness } from "node:os";

export const MVF_MAGIC = "MVF1";
export const DTYPE_F32 = 1;

export interface MvfTensor {
  dims: number[];
  data: Float32Array;
}

export function mvfWrite(path: string, dims: number[], data: Float32Array): void {
  const count = dims.reduce((a, b) => a * b, 1);
  if (count !== data.length) {
    throw new Error(`dims ${dims.join("x")} disagree with payload length ${data.length}`);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) {
      throw new Error(`refusing to write non-finite values to ${path}`);
    }
  }
  const header = Buffer.alloc(6 + 4 * dims.length);
  header.write(MVF_MAGIC, 0, "ascii");
  header.writeUInt8(DTYPE_F32, 4);
  header.writeUInt8(dims.length, 5);
  dims.forEach((d, i) => header.writeUInt32LE(d, 6 + 4 * i));
  let payload: Buffer;
  if (endianness() === "LE") {
    payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  } else {
    payload = Buffer.alloc(4 * data.length);
    data.forEach((v, i) => payload.writeFloatLE(v, 4 * i));
  }
  writeFileSync(path, Buffer.concat([header, payload]));
}

export function mvfRead(path: string): MvfTensor {
  const blob = readFileSync(path);
  if (blob.length < 6 || blob.toString("ascii", 0, 4) !== MVF_MAGIC) {
    throw new Error(`${path}: bad magic`);
  }
  if (blob.readUInt8(4) !== DTYPE_F32) {
    throw new Error(`${path}: unsupported dtype code ${blob.readUInt8(4)}`);
  }
  const rank = blob.readUInt8(5);
  if (blob.length < 6 + 4 * rank) {
    throw new Error(`${path}: truncated header`);
  }
  const dims: number[] = [];
  for (let i = 0; i < rank; i++) {
    dims.push(blob.readUInt32LE(6 + 4 * i));
  }
  const count = dims.reduce((a, b) => a * b, 1);
  const offset = 6 + 4 * rank;
  if (blob.length - offset !== count * 4) {
    throw new Error(`${path}: payload is ${blob.length - offset} bytes, expected ${count * 4}`);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = blob.readFloatLE(offset + 4 * i);
  }
  return { dims, data };
}

export function mvfDims(path: string): number[] {
  return mvfRead(path).dims;
}
