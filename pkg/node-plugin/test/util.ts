import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { HEADER_SIZE, decodeHeader } from "../src/protocol.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export interface Message {
  version: number;
  type: number;
  payload: Buffer;
}

/** Split a byte stream into framed messages; throws on trailing garbage. */
export function splitMessages(stream: Buffer): Message[] {
  const out: Message[] = [];
  let at = 0;
  while (at < stream.length) {
    const header = decodeHeader(stream.subarray(at, at + HEADER_SIZE));
    if (!header.magicOk) throw new Error(`bad magic at offset ${at}`);
    const start = at + HEADER_SIZE;
    out.push({
      version: header.version,
      type: header.type,
      payload: stream.subarray(start, start + header.length),
    });
    at = start + header.length;
  }
  return out;
}

export function fixture(name: string): Buffer {
  return readFileSync(join(HERE, "fixtures", name));
}
