/* tslint:disable */
/* eslint-disable */

export function fluidCurves(rho: number, theta: number, nm: number, varrho: number, x1_start: number, x1_end: number, x1_step: number): string;

export function pmfCurves(rho: number, x1: number, n_start: number, n_end: number, n_step: number, jmax: number): string;

export function qoeCurve(mu: number, theta: number, gamma: number, lambda_start: number, lambda_end: number, lambda_step: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fluidCurves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly pmfCurves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly qoeCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
