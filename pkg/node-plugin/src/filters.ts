/**
 * Built-in denoise functions. A denoise function maps (cube, sigma) to a
 * cube of identical dims; the solver calls it once per iteration with a
 * decaying sigma.
 */

import { Tensor } from "./scit.js";

export type DenoiseFn = (cube: Tensor, sigma: number) => Tensor;

/** Returns the request unchanged; useful for protocol testing. */
export const echo: DenoiseFn = (cube) => cube;

const TRUNCATE = 4.0;

/**
 * Reflect an out-of-range index back into [0, n): the boundary handling
 * mirrors about the edge of the last sample, (d c b a | a b c d | d c b a),
 * repeating for indices further out than one period.
 */
export function reflectIndex(i: number, n: number): number {
  if (n === 1) return 0;
  const period = 2 * n;
  const j = ((i % period) + period) % period;
  return j < n ? j : period - 1 - j;
}

/** Normalized Gaussian taps at integer offsets -radius..radius. */
export function gaussianKernel(std: number, radius: number): Float64Array {
  const w = new Float64Array(2 * radius + 1);
  let total = 0;
  for (let k = -radius; k <= radius; k++) {
    const v = Math.exp((-0.5 * k * k) / (std * std));
    w[k + radius] = v;
    total += v;
  }
  for (let i = 0; i < w.length; i++) w[i] /= total;
  return w;
}

function blurFrame(src: Float64Array, offset: number, nx: number, ny: number, std: number): Float64Array {
  const n = nx * ny;
  const out = new Float64Array(n);
  const radius = Math.trunc(TRUNCATE * std + 0.5);
  if (!(std > 0) || radius === 0) {
    // below half a sample of support the kernel is a single tap
    for (let i = 0; i < n; i++) out[i] = src[offset + i];
    return out;
  }
  const w = gaussianKernel(std, radius);

  // separable filtering: rows first, then columns, like the solver side
  const tmp = new Float64Array(n);
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      let acc = 0;
      for (let k = -radius; k <= radius; k++) {
        acc += w[k + radius] * src[offset + reflectIndex(i + k, nx) * ny + j];
      }
      tmp[i * ny + j] = acc;
    }
  }
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      let acc = 0;
      for (let k = -radius; k <= radius; k++) {
        acc += w[k + radius] * tmp[i * ny + reflectIndex(j + k, ny)];
      }
      out[i * ny + j] = acc;
    }
  }
  return out;
}

/**
 * Framewise Gaussian blur with spatial std = sigma * scale, the same rule
 * the solver's in-process Gaussian denoiser follows.
 */
export function makeGaussian(scale = 1.0): DenoiseFn {
  if (!(scale > 0)) throw new Error("scale must be positive");
  return (cube, sigma) => {
    const { nx, ny, frames } = cube;
    const data = new Float64Array(cube.data.length);
    for (let b = 0; b < frames; b++) {
      data.set(blurFrame(cube.data, b * nx * ny, nx, ny, sigma * scale), b * nx * ny);
    }
    return { ...cube, data };
  };
}

// A learned denoiser would plug in the same way; nothing else changes:
//
//     let model: Model | null = null;
//
//     const denoiseNeural: DenoiseFn = (cube, sigma) => {
//       model ??= loadWeights("model.bin");   // once per process
//       return model.infer(cube, sigma);
//     };
//
//     serve(denoiseNeural);
