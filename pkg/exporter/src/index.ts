export { parseSmiles, SmilesError } from "./mol.js";
export type { Atom, Bond, MolGraph, RingInfo } from "./mol.js";
export { computeDescriptors, MORDRED_COLUMNS, autocorrelation, adjacencySpectrum, basicSiteCount, valenceDelta } from "./descriptors.js";
export type { DescriptorRow } from "./descriptors.js";
export { computeKeys, KEY_COUNT, KEY_DEFINITIONS } from "./keys.js";
export { symmetricEigen } from "./eigen.js";
export { parseCsv, writeCsv } from "./csv.js";
export { exportDescriptors, ExportError, main } from "./exporter.js";
export type { ExportRequest, SkipReport } from "./exporter.js";
