/* tslint:disable */
/* eslint-disable */

/**
 * Critical site percolation on an `n x n` triangular rhombus, every site
 * resampled at `rate`.
 */
export class Percolation {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Runs the dynamics for `dt`; returns the number of sites that flipped.
     */
    advance(dt: number): number;
    /**
     * Times the crossing status has changed.
     */
    changes(): number;
    crossing(): boolean;
    constructor(n: number, rate: number, seed: number);
    /**
     * Sites of a left-right open path, empty when there is none.
     */
    path(): Uint32Array;
    /**
     * Site `x + n y` is open iff entry `x + n y` is 1.
     */
    sites(): Uint8Array;
    size(): number;
    time(): number;
}

/**
 * Rows `[t, correlation, survival]` for the walk with conductances
 * `|x|^beta` on `+-1..=+-n`, on `points` log-spaced times up to `t_max`.
 */
export function conductance_sweep(beta: number, n: number, t_max: number, points: number): Float64Array;

/**
 * Rows `[t, exit tail, bound]` for `t = 1..=t_max`; the bound is NaN where
 * no admissible term exists.
 */
export function tail_vs_bound(chain_text: string, event: string, t_max: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_percolation_free: (a: number, b: number) => void;
    readonly conductance_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly percolation_advance: (a: number, b: number) => number;
    readonly percolation_changes: (a: number) => number;
    readonly percolation_crossing: (a: number) => number;
    readonly percolation_new: (a: number, b: number, c: number) => [number, number, number];
    readonly percolation_path: (a: number) => [number, number];
    readonly percolation_sites: (a: number) => [number, number];
    readonly percolation_size: (a: number) => number;
    readonly percolation_time: (a: number) => number;
    readonly tail_vs_bound: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
