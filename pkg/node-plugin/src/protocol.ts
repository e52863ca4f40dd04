/**
 * Message framing for the denoiser subprocess protocol (PNPD version 1).
 *
 * Every message is a 12-byte header followed by a payload:
 *
 *     magic   4 bytes  "PNPD"
 *     version u16 LE   1
 *     type    u16 LE   1 = denoise request, 2 = denoise reply, 3 = error
 *     length  u32 LE   payload byte count
 *
 * A request payload is sigma as an 8-byte LE float followed by a SCIT
 * tensor; a reply payload is the denoised tensor with identical dims; an
 * error payload is a UTF-8 reason. The exchange is strictly synchronous:
 * one outstanding request, replies in request order.
 */

import { Tensor, encodeTensor } from "./scit.js";

export const MAGIC = Buffer.from("PNPD", "ascii");
export const PROTOCOL_VERSION = 1;
export const MSG_DENOISE_REQUEST = 1;
export const MSG_DENOISE_REPLY = 2;
export const MSG_ERROR = 3;
export const HEADER_SIZE = 12;

export interface MessageHeader {
  magicOk: boolean;
  version: number;
  type: number;
  length: number;
}

export function decodeHeader(buf: Buffer): MessageHeader {
  if (buf.length < HEADER_SIZE) throw new RangeError(`header needs ${HEADER_SIZE} bytes`);
  return {
    magicOk: buf.subarray(0, 4).equals(MAGIC),
    version: buf.readUInt16LE(4),
    type: buf.readUInt16LE(6),
    length: buf.readUInt32LE(8),
  };
}

export function encodeMessage(type: number, payload: Buffer): Buffer {
  const head = Buffer.alloc(HEADER_SIZE);
  MAGIC.copy(head, 0);
  head.writeUInt16LE(PROTOCOL_VERSION, 4);
  head.writeUInt16LE(type, 6);
  head.writeUInt32LE(payload.length, 8);
  return Buffer.concat([head, payload]);
}

export function encodeRequest(tensor: Tensor, sigma: number): Buffer {
  const sigmaBuf = Buffer.alloc(8);
  sigmaBuf.writeDoubleLE(sigma, 0);
  return encodeMessage(MSG_DENOISE_REQUEST, Buffer.concat([sigmaBuf, encodeTensor(tensor, "f64")]));
}

export function encodeReply(tensor: Tensor): Buffer {
  return encodeMessage(MSG_DENOISE_REPLY, encodeTensor(tensor, "f64"));
}

export function encodeError(reason: string): Buffer {
  return encodeMessage(MSG_ERROR, Buffer.from(reason, "utf-8"));
}
