/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_percolation_free: (a: number, b: number) => void;
export const conductance_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const percolation_advance: (a: number, b: number) => number;
export const percolation_changes: (a: number) => number;
export const percolation_crossing: (a: number) => number;
export const percolation_new: (a: number, b: number, c: number) => [number, number, number];
export const percolation_path: (a: number) => [number, number];
export const percolation_sites: (a: number) => [number, number];
export const percolation_size: (a: number) => number;
export const percolation_time: (a: number) => number;
export const tail_vs_bound: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
