/**
 * Denoiser worker: answers PNPD requests on stdin with replies on stdout
 * until the stream closes.
 *
 *     node dist/server.js --filter gaussian --scale 1.0
 *     node dist/server.js --filter echo
 *
 * The loop is deliberately defensive: a malformed or truncated request
 * yields an error reply and the process keeps serving, so one bad message
 * cannot take down a long reconstruction. No state is held between
 * requests.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { DenoiseFn, echo, makeGaussian } from "./filters.js";
import {
  HEADER_SIZE,
  MAGIC,
  MSG_DENOISE_REQUEST,
  PROTOCOL_VERSION,
  decodeHeader,
  encodeError,
  encodeReply,
} from "./protocol.js";
import { Tensor, decodeTensor } from "./scit.js";

/** Byte stream with exact reads and push-back, for resynchronization. */
export class ByteReader {
  private buf: Buffer = Buffer.alloc(0);
  private source: AsyncIterator<Buffer>;

  constructor(stream: AsyncIterable<Buffer>) {
    this.source = stream[Symbol.asyncIterator]();
  }

  private async pull(): Promise<boolean> {
    const { value, done } = await this.source.next();
    if (done || value === undefined) return false;
    this.buf = this.buf.length === 0 ? Buffer.from(value) : Buffer.concat([this.buf, value]);
    return true;
  }

  /** Exactly n bytes, or fewer only at EOF. */
  async read(n: number): Promise<Buffer> {
    while (this.buf.length < n) {
      if (!(await this.pull())) break;
    }
    const out = this.buf.subarray(0, n);
    this.buf = this.buf.subarray(n);
    return out;
  }

  /** Up to `limit` bytes; empty only at EOF. */
  async readSome(limit = 4096): Promise<Buffer> {
    if (this.buf.length === 0 && !(await this.pull())) return Buffer.alloc(0);
    const out = this.buf.subarray(0, limit);
    this.buf = this.buf.subarray(out.length);
    return out;
  }

  pushBack(data: Buffer): void {
    this.buf = this.buf.length === 0 ? data : Buffer.concat([data, this.buf]);
  }
}

function writeAll(out: NodeJS.WritableStream, buf: Buffer): Promise<void> {
  return new Promise((resolve, reject) => {
    out.write(buf, (err) => (err ? reject(err) : resolve()));
  });
}

export async function serve(
  denoiseFn: DenoiseFn,
  stdin: AsyncIterable<Buffer> = process.stdin,
  stdout: NodeJS.WritableStream = process.stdout,
): Promise<void> {
  const fin = new ByteReader(stdin);
  const sendError = (reason: string) => writeAll(stdout, encodeError(reason));

  for (;;) {
    const header = await fin.read(HEADER_SIZE);
    if (header.length === 0) return; // clean EOF between messages
    if (header.length < HEADER_SIZE) {
      await sendError("truncated header");
      return;
    }

    const { magicOk, version, type, length } = decodeHeader(header);
    if (!magicOk) {
      await sendError(`bad magic ${JSON.stringify(header.subarray(0, 4).toString("latin1"))}`);
      // scan forward to the next plausible message boundary
      let window = header;
      for (;;) {
        const idx = window.indexOf(MAGIC, 1);
        if (idx >= 0) {
          fin.pushBack(window.subarray(idx));
          break;
        }
        window = window.subarray(window.length - (MAGIC.length - 1)); // keep a possible magic prefix
        const chunk = await fin.readSome();
        if (chunk.length === 0) return;
        window = Buffer.concat([window, chunk]);
      }
      continue;
    }

    if (version !== PROTOCOL_VERSION) {
      await sendError(`unsupported protocol version ${version}`);
      await fin.read(length);
      continue;
    }
    if (type !== MSG_DENOISE_REQUEST) {
      await sendError(`unexpected message type ${type}`);
      await fin.read(length);
      continue;
    }

    const payload = await fin.read(length);
    if (payload.length < length) {
      await sendError(`truncated request: expected ${length} payload bytes, got ${payload.length}`);
      continue;
    }
    if (payload.length < 8) {
      await sendError("request payload too short for sigma");
      continue;
    }

    const sigma = payload.readDoubleLE(0);
    try {
      const tensor = decodeTensor(payload.subarray(8));
      const squeeze = tensor.rank === 2;
      const cube: Tensor = squeeze ? { ...tensor, rank: 3 } : tensor;
      const out = denoiseFn(cube, sigma);
      if (out.nx !== cube.nx || out.ny !== cube.ny || out.frames !== cube.frames) {
        throw new Error(
          `denoise function changed dims (${cube.nx}, ${cube.ny}, ${cube.frames}) -> ` +
            `(${out.nx}, ${out.ny}, ${out.frames})`,
        );
      }
      await writeAll(stdout, encodeReply(squeeze ? { ...out, rank: 2 } : out));
    } catch (err) {
      await sendError(err instanceof Error ? err.message : String(err));
    }
  }
}

export function main(argv: string[]): Promise<void> {
  const { values } = parseArgs({
    args: argv,
    options: {
      filter: { type: "string", default: "gaussian" },
      scale: { type: "string", default: "1.0" },
    },
  });
  if (values.filter !== "echo" && values.filter !== "gaussian") {
    throw new Error(`--filter must be 'echo' or 'gaussian', got '${values.filter}'`);
  }
  const scale = Number(values.scale);
  if (!Number.isFinite(scale) || scale <= 0) {
    throw new Error(`--scale must be positive, got '${values.scale}'`);
  }
  const fn = values.filter === "echo" ? echo : makeGaussian(scale);
  return serve(fn);
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  main(process.argv.slice(2)).catch((err) => {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  });
}
