/* tslint:disable */
/* eslint-disable */

export function hopMarginal(n: number, z_pi: number, seed: bigint, trials: bigint): Float64Array;

export function lensArea(delta_over_r: number): number;

export function probabilityCurves(n: number, z_pi: number, n_prime: number, points: number): Float64Array;

export function regionArea(delta_over_r: number): number;

export function regionOutline(delta_over_r: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly hopMarginal: (a: number, b: number, c: bigint, d: bigint) => [number, number, number, number];
    readonly lensArea: (a: number) => [number, number, number];
    readonly probabilityCurves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly regionArea: (a: number) => [number, number, number];
    readonly regionOutline: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
