/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scenariodemo_free: (a: number, b: number) => void;
export const predict_hull: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const relate_point_sets: (a: number, b: number, c: number, d: number) => [number, number];
export const scenariodemo_bounds: (a: number) => [number, number];
export const scenariodemo_frame_count: (a: number) => number;
export const scenariodemo_frame_json: (a: number, b: number) => [number, number];
export const scenariodemo_new: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const scenariodemo_prior_lane: (a: number) => [number, number];
export const scenariodemo_result_json: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
