#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { renderToFile } from "./render.js";

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  const parser = yargs(argv)
    .scriptName("polybandits-plot")
    .command(
      "plot",
      "render cumulative-regret curves from harness outputs",
      (y) =>
        y
          .option("summary", { type: "string", demandOption: true, describe: "summary.json path" })
          .option("raw", { type: "string", demandOption: true, describe: "raw.csv path" })
          .option("out", { type: "string", demandOption: true, describe: "output image (SVG)" })
          .option("policies", { type: "string", describe: "comma-separated subset to plot" })
          .option("logx", { type: "boolean", default: false, describe: "logarithmic t axis" })
          .option("title", { type: "string", describe: "figure title" }),
      (args) => {
        try {
          renderToFile({
            summaryPath: args.summary,
            rawPath: args.raw,
            outPath: args.out,
            policies: args.policies ? args.policies.split(",").map((s) => s.trim()) : undefined,
            logX: args.logx,
            title: args.title,
          });
          console.log(`wrote ${args.out}`);
        } catch (err) {
          console.error(`error: ${err instanceof Error ? err.message : err}`);
          failed = true;
        }
      },
    )
    .demandCommand(1)
    .strict()
    .help();
  await parser.parseAsync();
  return failed ? 1 : 0;
}

main(hideBin(process.argv)).then((code) => {
  process.exitCode = code;
});
