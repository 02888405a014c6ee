import { readFileSync } from "node:fs";
import { z } from "zod";

/**
 * Extraction manifest: which encoder to run, where the media lives, how the
 * stream is chunked, and where the AVTS file goes.
 *
 * `framesPerChunk` / `audioTokensPerChunk` must match the target backbone's
 * interleaving; `pixelCap` mirrors its maximum per-frame pixel budget (frames
 * above the cap are integer-downscaled before patching).
 */
export const manifestSchema = z
  .object({
    model: z.string().min(1),
    video: z.string().min(1),
    audio: z.string().min(1),
    output: z.string().min(1),
    framesPerChunk: z.number().int().positive(),
    audioTokensPerChunk: z.number().int().positive(),
    pixelCap: z.number().int().positive().default(262144),
    tap: z.string().default("post-encoder"),
  })
  .strict();

export type Manifest = z.infer<typeof manifestSchema>;

export function loadManifest(path: string): Manifest {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`failed to read manifest ${path}: ${(err as Error).message}`);
  }
  const parsed = manifestSchema.safeParse(raw);
  if (!parsed.success) {
    throw new Error(`invalid manifest ${path}: ${parsed.error.message}`);
  }
  return parsed.data;
}
