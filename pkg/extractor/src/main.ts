import { extract } from "./extract.js";
import { loadManifest } from "./manifest.js";

function usage(): never {
  console.error("usage: node dist/main.js --manifest <manifest.json>");
  process.exit(2);
}

export function main(argv: string[]): number {
  const flag = argv.indexOf("--manifest");
  if (flag === -1 || flag + 1 >= argv.length) usage();
  const manifestPath = argv[flag + 1];

  let manifest;
  try {
    manifest = loadManifest(manifestPath);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  try {
    const summary = extract(manifest);
    console.log(
      `wrote ${summary.chunks} chunks (F=${summary.frames} grid ${summary.gridH}x${summary.gridW} ` +
      `d=${summary.visualDim}, L=${summary.audioTokens} d_a=${summary.audioDim}, ` +
      `downscale x${summary.downscale}) to ${summary.output}`,
    );
    return 0;
  } catch (err) {
    // failures echo the manifest so a batch log is self-describing
    console.error(`error: ${(err as Error).message}`);
    console.error(`manifest: ${JSON.stringify(manifest)}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
