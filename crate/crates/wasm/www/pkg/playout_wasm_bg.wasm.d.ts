/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const fluidCurves: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
export const pmfCurves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
export const qoeCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
