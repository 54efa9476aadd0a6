/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Embeds the data in two dimensions. `method` is one of `pca`, `mds`,
     * `isomap`, `entropy-isomap`.
     */
    embed(method: string, k: number, entropy: number, max_extra: number): EmbedResult;
    /**
     * Mean neighborhood entropy of each trajectory for `k = 1..=k_max`,
     * flattened trajectory-major (`T * k_max` values).
     */
    entropyByK(k_max: number): Float64Array;
    /**
     * Trajectory id of every point.
     */
    labels(): Uint32Array;
    constructor(family: string, trajectories: number, points: number, noise: number, seed: bigint);
    pointCount(): number;
    trajectoryCount(): number;
}

export class EmbedResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Neighborhood size of every dataset point (0 for PCA and MDS).
     */
    chosenK(): Uint32Array;
    /**
     * Row-major `points().len() x 2` coordinates.
     */
    coords(): Float64Array;
    /**
     * Dataset index of each embedded row.
     */
    points(): Uint32Array;
    readonly capFraction: number;
    readonly residualVariance: number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_embedresult_free: (a: number, b: number) => void;
    readonly demo_embed: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_entropyByK: (a: number, b: number) => [number, number, number, number];
    readonly demo_labels: (a: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly demo_pointCount: (a: number) => number;
    readonly demo_trajectoryCount: (a: number) => number;
    readonly embedresult_capFraction: (a: number) => number;
    readonly embedresult_chosenK: (a: number) => [number, number];
    readonly embedresult_coords: (a: number) => [number, number];
    readonly embedresult_points: (a: number) => [number, number];
    readonly embedresult_residualVariance: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
