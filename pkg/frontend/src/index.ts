export { FigureKind, FigureSpec, RATE_FLOOR, render } from "./figures";
export { SchemaMismatch, readAll, readCsv, requireColumns } from "./csv";
export { main, parseArgs } from "./cli";
