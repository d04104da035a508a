/* tslint:disable */
/* eslint-disable */

/**
 * Bracket of two elements written in the expression syntax (`D(i;m)`,
 * `W(i;m)` or `XD(p;j)` / `XT(l;w)`).
 */
export function bracket(spec: string, a: string, b: string, trunc: number): string;

/**
 * Generator symbols offered by [`weight_action`].
 */
export function symbols(spec: string): string;

export function torus_info(spec: string): string;

/**
 * Action of one generator on the weight space at `label` of the cuspidal
 * module built from `natural` or `trivial` V with the graded regular W.
 */
export function weight_action(spec: string, vw: string, alpha: string, label: string, symbol: string): string;

/**
 * `X^n` for a comma-separated exponent, plus whether `n ∈ R`.
 */
export function x_matrix(spec: string, exponent: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bracket: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly symbols: (a: number, b: number) => [number, number];
    readonly torus_info: (a: number, b: number) => [number, number];
    readonly weight_action: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number];
    readonly x_matrix: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
