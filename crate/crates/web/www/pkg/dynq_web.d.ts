/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Edges as flat `(factor, u, symbol, v)` quadruples.
     */
    edges(): Uint32Array;
    /**
     * Runs one script line and returns what it prints, one tuple per line.
     */
    exec(line: string): string;
    factors(): number;
    /**
     * Loads `rpq`, `cfl` or `neps` on `graph`; `spec` is the DFA, grammar or
     * rule matrix. A neps graph is copied once per factor.
     */
    constructor(program: string, graph: string, spec: string);
    nodes(): number;
    /**
     * The rule matrix as rows of 0/1 characters, one per rule.
     */
    rules(): string[];
    symbols(): string[];
}

/**
 * Graph text for a preset program.
 */
export function preset_graph(program: string): string | undefined;

/**
 * Automaton, grammar or rule text for a preset program.
 */
export function preset_spec(program: string): string | undefined;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_edges: (a: number) => [number, number];
    readonly demo_exec: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_factors: (a: number) => number;
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_nodes: (a: number) => number;
    readonly demo_rules: (a: number) => [number, number];
    readonly demo_symbols: (a: number) => [number, number];
    readonly preset_graph: (a: number, b: number) => [number, number];
    readonly preset_spec: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
