/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const hopMarginal: (a: number, b: number, c: bigint, d: bigint) => [number, number, number, number];
export const lensArea: (a: number) => [number, number, number];
export const probabilityCurves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const regionArea: (a: number) => [number, number, number];
export const regionOutline: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
