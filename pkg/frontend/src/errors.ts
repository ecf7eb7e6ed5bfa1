/** Raised when an input file does not follow the documented CSV/k-map schema. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}
