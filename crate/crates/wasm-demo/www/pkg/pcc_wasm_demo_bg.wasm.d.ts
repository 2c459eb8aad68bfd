/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_planararm_free: (a: number, b: number) => void;
export const drift_curve: (a: number, b: number) => [number, number];
export const planararm_backbone: (a: number) => [number, number];
export const planararm_config: (a: number) => [number, number];
export const planararm_joints: (a: number, b: number) => [number, number];
export const planararm_links: (a: number) => number;
export const planararm_new: (a: number, b: number) => [number, number, number];
export const planararm_reach: (a: number, b: number, c: number) => [number, number, number];
export const planararm_reach_extent: (a: number) => number;
export const planararm_residual: (a: number) => number;
export const planararm_set_links: (a: number, b: number) => [number, number];
export const planararm_set_tip_angle: (a: number, b: number) => void;
export const planararm_status: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
