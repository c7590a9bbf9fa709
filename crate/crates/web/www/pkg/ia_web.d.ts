/* tslint:disable */
/* eslint-disable */

/**
 * Power gain in dB of beam `beam` of an `side x side` codebook with
 * `n_beams` beams, sampled at `points` azimuths over a full turn.
 */
export function beam_pattern(side: number, n_beams: number, beam: number, points: number): Float64Array;

/**
 * Discovery-delay table as CSV text: `scheme,n_slots,delay_ms`.
 */
export function delay_table(t_sig_us: number, overhead: number): string;

/**
 * Misdetection probability per 10 m bin out to `max_radius_m`, followed
 * by the matching 95 % half-widths: `[pmd.., ci95..]`.
 */
export function pmd_vs_distance(label: string, trials: number, seed: number, max_radius_m: number, tau_db: number): Float64Array;

/**
 * Labels of the four reference schemes.
 */
export function scheme_labels(): string[];

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly beam_pattern: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly delay_table: (a: number, b: number) => [number, number, number, number];
    readonly pmd_vs_distance: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scheme_labels: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
