/* tslint:disable */
/* eslint-disable */

/**
 * One simulated scenario, run once up front; frames are rendered on demand.
 */
export class ScenarioDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * World rectangle covered by the grid: `[x_min, y_min, x_max, y_max]`.
     */
    bounds(): Float64Array;
    frame_count(): number;
    /**
     * Everything needed to draw frame `n`, as JSON.
     */
    frame_json(n: number): string;
    /**
     * `kind` is `turning-in`, `turning-over` or `straight-crossing`.
     */
    constructor(kind: string, horizon: number, phi_u_deg: number, lag_gain: number, seed: bigint);
    prior_lane(): Float64Array;
    result_json(): string;
}

/**
 * Predicted occupied area of a box-shaped cluster, as `[x0, y0, x1, y1, ...]`
 * counter-clockwise. Empty when an argument is out of range.
 */
export function predict_hull(x: number, y: number, heading_deg: number, speed: number, length: number, width: number, horizon: number, phi_u_deg: number): Float64Array;

/**
 * Convex hulls of two point clouds and how they relate. Returns JSON with
 * `hull_a`, `hull_b`, `relation` and `status`, or `{"error": ...}`.
 */
export function relate_point_sets(a: Float64Array, b: Float64Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scenariodemo_free: (a: number, b: number) => void;
    readonly predict_hull: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly relate_point_sets: (a: number, b: number, c: number, d: number) => [number, number];
    readonly scenariodemo_bounds: (a: number) => [number, number];
    readonly scenariodemo_frame_count: (a: number) => number;
    readonly scenariodemo_frame_json: (a: number, b: number) => [number, number];
    readonly scenariodemo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
    readonly scenariodemo_prior_lane: (a: number) => [number, number];
    readonly scenariodemo_result_json: (a: number) => [number, number];
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
