/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_edges: (a: number) => [number, number];
export const demo_exec: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_factors: (a: number) => number;
export const demo_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_nodes: (a: number) => number;
export const demo_rules: (a: number) => [number, number];
export const demo_symbols: (a: number) => [number, number];
export const preset_graph: (a: number, b: number) => [number, number];
export const preset_spec: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
