/**
 * Static-language worker: compiles one synthesized TypeScript function on
 * load (with diagnostics reported back), invokes it reflectively inside an
 * isolated per-load context, and speaks the newline-delimited JSON wire
 * protocol over std streams.
 *
 * The worker never times itself out; the orchestrator kills it on expiry.
 * Numeric arguments are narrowed/widened to the declared parameter types
 * taken from the canonical signature sent with the load frame.
 */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import * as readline from "node:readline";
import * as vm from "node:vm";
import ts from "typescript";

process.env.TZ = "UTC";

type Tagged = { t: string; v?: unknown };

interface Desc {
  kind: "bool" | "int" | "real" | "char" | "string" | "array" | "object" | "file" | "generic";
  width?: number;
  element?: Desc;
  members?: Array<[string, Desc]>;
}

// --- canonical signature tokens ---------------------------------------------

function splitTop(body: string): string[] {
  const parts: string[] = [];
  let depth = 0;
  let cur = "";
  for (const ch of body) {
    if (ch === "<" || ch === "{") depth++;
    if (ch === ">" || ch === "}") depth--;
    if (ch === "," && depth === 0) {
      parts.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  if (cur) parts.push(cur);
  return parts;
}

function parseToken(tok: string): Desc {
  if (tok === "b") return { kind: "bool" };
  if (/^i(8|16|32|64)$/.test(tok)) return { kind: "int", width: Number(tok.slice(1)) };
  if (/^f(32|64)$/.test(tok)) return { kind: "real", width: Number(tok.slice(1)) };
  if (tok === "c") return { kind: "char" };
  if (tok === "s") return { kind: "string" };
  if (tok === "file") return { kind: "file" };
  if (tok === "any") return { kind: "generic" };
  if (tok.startsWith("arr<") && tok.endsWith(">")) {
    return { kind: "array", element: parseToken(tok.slice(4, -1)) };
  }
  if (tok.startsWith("obj{") && tok.endsWith("}")) {
    const members = splitTop(tok.slice(4, -1)).map((part) => {
      const idx = part.indexOf(":");
      return [part.slice(0, idx), parseToken(part.slice(idx + 1))] as [string, Desc];
    });
    return { kind: "object", members };
  }
  throw new Error(`bad canonical token: ${tok}`);
}

function parseArgDescs(sig: string): Desc[] {
  const argPart = sig.split(";r:")[0];
  if (!argPart.startsWith("a:") || argPart.length <= 2) return [];
  return splitTop(argPart.slice(2)).map(parseToken);
}

// --- value marshalling --------------------------------------------------------

const SPECIAL_REALS: Record<string, number> = {
  NaN: Number.NaN,
  Infinity: Number.POSITIVE_INFINITY,
  "-Infinity": Number.NEGATIVE_INFINITY,
};

function decode(tagged: Tagged, desc: Desc | undefined, cleanup: string[],
                resources: Record<string, string>): unknown {
  switch (tagged.t) {
    case "b":
      return Boolean(tagged.v);
    case "i": {
      const n = Number(tagged.v);
      return desc?.kind === "real" ? n : Math.trunc(n);
    }
    case "f": {
      const raw = tagged.v;
      const n = typeof raw === "string" ? SPECIAL_REALS[raw] : Number(raw);
      return desc?.kind === "int" ? Math.trunc(n) : n;
    }
    case "c":
    case "s":
      return String(tagged.v);
    case "a": {
      const element = desc?.kind === "array" ? desc.element : undefined;
      return (tagged.v as Tagged[]).map((x) => decode(x, element, cleanup, resources));
    }
    case "o": {
      const out: Record<string, unknown> = {};
      const members = new Map(desc?.kind === "object" ? desc.members : []);
      for (const [name, sub] of tagged.v as Array<[string, Tagged]>) {
        out[name] = decode(sub, members.get(name), cleanup, resources);
      }
      return out;
    }
    case "file": {
      const content = resources[String(tagged.v)] ?? "";
      const file = path.join(
        fs.mkdtempSync(path.join(os.tmpdir(), "ccfile-")), "input.txt");
      fs.writeFileSync(file, content);
      cleanup.push(file);
      return file; // file arguments arrive as a temp file path
    }
    case "null":
      return null;
    default:
      throw new Error(`unknown tag ${tagged.t}`);
  }
}

function encode(value: unknown): Tagged {
  if (typeof value === "boolean") return { t: "b", v: value };
  if (typeof value === "number") {
    if (Number.isNaN(value)) return { t: "f", v: "NaN" };
    if (!Number.isFinite(value)) return { t: "f", v: value > 0 ? "Infinity" : "-Infinity" };
    if (Number.isInteger(value)) return { t: "i", v: value };
    return { t: "f", v: value };
  }
  if (typeof value === "bigint") return { t: "i", v: value.toString() };
  if (typeof value === "string") return { t: "s", v: value };
  if (value === null || value === undefined) return { t: "null" };
  if (Array.isArray(value)) return { t: "a", v: value.map(encode) };
  if (typeof value === "object") {
    const members = Object.entries(value as Record<string, unknown>).map(
      ([k, v]) => [k, encode(v)] as [string, Tagged]);
    return { t: "o", v: members };
  }
  throw new Error(`unsupported-return: ${typeof value}`);
}

// --- compilation and loading ----------------------------------------------------

const RNG_PRELUDE = `
Math.random = (function () {
  let s = 0x5eed0001 >>> 0;
  return function () {
    s = (1664525 * s + 1013904223) >>> 0;
    return s / 4294967296;
  };
})();
`;

const AMBIENT_NAME = "__worker_ambient__.d.ts";
const AMBIENT_DECLS = `
declare var console: { log(...args: any[]): void; error(...args: any[]): void; };
`;

function compileAndLoad(sourcePath: string, entry: string):
    { fn?: (...a: unknown[]) => unknown; detail?: string } {
  if (!fs.existsSync(sourcePath)) {
    return { detail: `no such source: ${sourcePath}` };
  }
  const options: ts.CompilerOptions = {
    target: ts.ScriptTarget.ES2020,
    module: ts.ModuleKind.CommonJS,
    strict: false,
    noImplicitAny: false,
    skipLibCheck: true,
    lib: ["lib.es2020.d.ts"], // no DOM: keeps per-load compiles fast
    types: [], // never auto-include @types: loads must not depend on cwd
  };
  let js = "";
  const host = ts.createCompilerHost(options);
  host.writeFile = (_name, text) => { js = text; };
  const defaultGetSourceFile = host.getSourceFile.bind(host);
  host.getSourceFile = (fileName, languageVersion, ...rest) => {
    if (fileName === AMBIENT_NAME) {
      return ts.createSourceFile(fileName, AMBIENT_DECLS, languageVersion);
    }
    return defaultGetSourceFile(fileName, languageVersion, ...rest);
  };
  const program = ts.createProgram([sourcePath, AMBIENT_NAME], options, host);
  const errors = ts.getPreEmitDiagnostics(program).filter(
    (d) => d.category === ts.DiagnosticCategory.Error);
  if (errors.length > 0) {
    const detail = errors.slice(0, 5).map((d) =>
      ts.flattenDiagnosticMessageText(d.messageText, "; ")).join(" | ");
    return { detail: `compile error: ${detail}` };
  }
  program.emit();
  if (!js) return { detail: "compiler produced no output" };

  const exportsObj: Record<string, unknown> = {};
  const sandbox = {
    exports: exportsObj,
    module: { exports: exportsObj },
    console: {
      log: (...a: unknown[]) => process.stderr.write(a.join(" ") + "\n"),
      error: (...a: unknown[]) => process.stderr.write(a.join(" ") + "\n"),
    },
  };
  const context = vm.createContext(sandbox); // fresh intrinsics per load
  new vm.Script(RNG_PRELUDE, { filename: "<rng>" }).runInContext(context);
  try {
    new vm.Script(js, { filename: sourcePath }).runInContext(context);
  } catch (err) {
    return { detail: `evaluation error: ${(err as Error).message}` };
  }
  const mod = sandbox.module.exports as Record<string, unknown>;
  const fn = (mod[entry] ?? exportsObj[entry]) as ((...a: unknown[]) => unknown) | undefined;
  if (typeof fn !== "function") {
    return { detail: `no exported function named ${entry}` };
  }
  return { fn };
}

// --- protocol loop -----------------------------------------------------------------

function reply(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

function loadResources(): Record<string, string> {
  const idx = process.argv.indexOf("--resources");
  if (idx < 0 || idx + 1 >= process.argv.length) return {};
  try {
    const doc = JSON.parse(fs.readFileSync(process.argv[idx + 1], "utf-8"));
    return doc.entries ?? {};
  } catch {
    return {};
  }
}

function main(): void {
  const resources = loadResources();
  let fn: ((...a: unknown[]) => unknown) | null = null;
  let argDescs: Desc[] = [];

  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    if (!line.trim()) return;
    let msg: Record<string, unknown>;
    try {
      msg = JSON.parse(line);
    } catch {
      reply({ error: "protocol: malformed frame" });
      return;
    }
    const op = msg.op;
    if (op === "shutdown") {
      rl.close();
      process.exit(0);
    } else if (op === "load") {
      if (fn !== null) {
        reply({ ok: false, detail: "worker already holds a function" });
        return;
      }
      const outcome = compileAndLoad(String(msg.source_path), String(msg.entry));
      if (!outcome.fn) {
        reply({ ok: false, detail: outcome.detail });
        return;
      }
      fn = outcome.fn;
      try {
        argDescs = parseArgDescs(String(msg.sig ?? ""));
      } catch {
        argDescs = [];
      }
      reply({ ok: true });
    } else if (op === "invoke") {
      const id = msg.id;
      if (fn === null) {
        reply({ id, status: "exception", detail: "LoadError: no function loaded",
                elapsed_us: 0 });
        return;
      }
      const cleanup: string[] = [];
      let args: unknown[];
      try {
        args = (msg.args as Tagged[]).map((a, i) =>
          decode(a, argDescs[i], cleanup, resources));
      } catch (err) {
        reply({ id, status: "exception",
                detail: `DecodeError: ${(err as Error).message}`, elapsed_us: 0 });
        return;
      }
      if (argDescs.length > 0 && args.length !== argDescs.length) {
        reply({ id, status: "exception",
                detail: `ArityError: expected ${argDescs.length} args, got ${args.length}`,
                elapsed_us: 0 });
        return;
      }
      const start = process.hrtime.bigint();
      try {
        const result = fn(...args);
        const elapsed = Number((process.hrtime.bigint() - start) / 1000n);
        reply({ id, status: "ok", value: encode(result), elapsed_us: elapsed });
      } catch (err) {
        const elapsed = Number((process.hrtime.bigint() - start) / 1000n);
        const e = err as Error;
        const name = e?.name ?? "Error";
        const message = e?.message ?? String(err);
        const detail = message.startsWith("unsupported-return")
          ? message
          : `${name}: ${message}`;
        reply({ id, status: "exception", detail, elapsed_us: elapsed });
      } finally {
        for (const file of cleanup) {
          try {
            fs.rmSync(path.dirname(file), { recursive: true, force: true });
          } catch {
            // best-effort cleanup
          }
        }
      }
    } else {
      reply({ error: `protocol: unknown op ${String(op)}` });
    }
  });
}

main();
