/* tslint:disable */
/* eslint-disable */

export class PlanarArm {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Points on the constant-curvature backbone.
     */
    backbone(): Float64Array;
    /**
     * `[ΔL, θ]` per segment.
     */
    config(): Float64Array;
    /**
     * Rigid-link joints from the base.
     */
    joints(compensated: boolean): Float64Array;
    links(): number;
    /**
     * A straight arm of identical 64.4 mm segments.
     */
    constructor(segments: number, links: number);
    /**
     * Solves for the target warm-started from the current pose and adopts
     * the result. Returns the remaining tip error.
     */
    reach(x: number, z: number): number;
    /**
     * Length of the fully extended straight arm.
     */
    reach_extent(): number;
    residual(): number;
    /**
     * Changes the link count of every segment, keeping the configuration.
     */
    set_links(links: number): void;
    /**
     * Tip angle to hold while reaching, in degrees; `NaN` releases it.
     */
    set_tip_angle(degrees: number): void;
    /**
     * `converged`, `max_iter`, `infeasible_secondary` or `numerical_failure`.
     */
    status(): string;
}

/**
 * Length error of an uncompensated segment bent by `theta`, in percent, for
 * `n = 1..=max_links`.
 */
export function drift_curve(theta: number, max_links: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_planararm_free: (a: number, b: number) => void;
    readonly drift_curve: (a: number, b: number) => [number, number];
    readonly planararm_backbone: (a: number) => [number, number];
    readonly planararm_config: (a: number) => [number, number];
    readonly planararm_joints: (a: number, b: number) => [number, number];
    readonly planararm_links: (a: number) => number;
    readonly planararm_new: (a: number, b: number) => [number, number, number];
    readonly planararm_reach: (a: number, b: number, c: number) => [number, number, number];
    readonly planararm_reach_extent: (a: number) => number;
    readonly planararm_residual: (a: number) => number;
    readonly planararm_set_links: (a: number, b: number) => [number, number];
    readonly planararm_set_tip_angle: (a: number, b: number) => void;
    readonly planararm_status: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
