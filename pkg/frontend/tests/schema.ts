// Shared validator for the wire contract. The schema file lives at the
// repository root so the server and this panel test against the same copy.

import { readFileSync } from "node:fs";
import { resolve } from "node:path";
import Ajv from "ajv";
import type { ValidateFunction } from "ajv";

// vitest runs with the package dir as cwd; the schema sits one level up
const schema = JSON.parse(
  readFileSync(resolve(process.cwd(), "../docs/wire-schema.json"), "utf-8"),
);

const ajv = new Ajv();
export const validateWire: ValidateFunction = ajv.compile(schema);

export function assertWireValid(message: unknown): void {
  if (!validateWire(message)) {
    throw new Error(`message violates wire schema: ${JSON.stringify(validateWire.errors)}`);
  }
}
