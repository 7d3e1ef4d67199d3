/* tslint:disable */
/* eslint-disable */

/**
 * Coordinates `-L/2 + 1, ..., L/2` along the first axis.
 */
export function axis_coordinates(size: number): Float64Array;

/**
 * Variance kernel `s_0x` along the first axis.
 */
export function profile_slice(dim: number, size: number, band: number, psi: string): Float64Array;

/**
 * `Theta°_0x` along the first axis at `z = energy + i eta`.
 */
export function propagator_slice(dim: number, size: number, band: number, psi: string, energy: number, eta: number): Float64Array;

/**
 * Eigenvalue histogram of one band matrix on `[-2.5, 2.5]` as densities,
 * followed by the semicircle density at the same bin centres: `2 * bins`
 * values in total.
 */
export function spectrum_histogram(dim: number, size: number, band: number, psi: string, seed: bigint, bins: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly axis_coordinates: (a: number) => [number, number];
    readonly profile_slice: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly propagator_slice: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly spectrum_histogram: (a: number, b: number, c: number, d: number, e: number, f: bigint, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
