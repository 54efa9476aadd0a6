/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_embedresult_free: (a: number, b: number) => void;
export const demo_embed: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_entropyByK: (a: number, b: number) => [number, number, number, number];
export const demo_labels: (a: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const demo_pointCount: (a: number) => number;
export const demo_trajectoryCount: (a: number) => number;
export const embedresult_capFraction: (a: number) => number;
export const embedresult_chosenK: (a: number) => [number, number];
export const embedresult_coords: (a: number) => [number, number];
export const embedresult_points: (a: number) => [number, number];
export const embedresult_residualVariance: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
