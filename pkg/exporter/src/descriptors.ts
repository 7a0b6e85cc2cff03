/**
 * Molecular descriptors over the heavy-atom graph.
 *
 * The eleven formula symbols follow their published definitions:
 * - nAtom counts hydrogens; nC/nAromAtom/nAromBond/nN/nO/nHeavyAtom are
 *   plain counts; nRing is the ring-set size.
 * - ATS{k}dv is the Moreau-Broto autocorrelation of lag k weighted by the
 *   Kier-Hall valence-electron delta (valence electrons minus attached
 *   hydrogens), summed over unordered heavy-atom pairs at topological
 *   distance k.
 * - SpMax_A / SpAbs_A / SpAD_A are the largest eigenvalue, the sum of
 *   absolute eigenvalues (graph energy), and the absolute deviation of the
 *   eigenvalues around their mean, all of the heavy-atom adjacency matrix.
 * - VE3_A = ln(0.1 * n * VE1) with VE1 the coefficient |sum| of the
 *   eigenvector belonging to the largest adjacency eigenvalue.
 * - nBase counts basic sites: primary/secondary/tertiary amines on sp3
 *   carbons, positively charged atoms, and amidine-type nitrogens.
 */

import { symmetricEigen } from "./eigen.js";
import { Atom, MolGraph, bondBetween, hydrogenCount, isSp3Carbon } from "./mol.js";

export const MORDRED_COLUMNS = [
  "SpMax_A",
  "nAromAtom",
  "nAromBond",
  "nC",
  "ATS5dv",
  "ATS6dv",
  "SpAD_A",
  "SpAbs_A",
  "VE3_A",
  "nAtom",
  "nBase",
  "MW",
  "nN",
  "nO",
  "nRing",
  "nHeavyAtom",
] as const;

export type DescriptorRow = Record<(typeof MORDRED_COLUMNS)[number], number>;

const ATOMIC_MASS: Record<number, number> = {
  1: 1.008, 5: 10.811, 6: 12.011, 7: 14.007, 8: 15.999, 9: 18.998,
  14: 28.086, 15: 30.974, 16: 32.065, 17: 35.453, 35: 79.904, 53: 126.904,
};

const VALENCE_ELECTRONS: Record<number, number> = {
  1: 1, 5: 3, 6: 4, 7: 5, 8: 6, 9: 7,
  14: 4, 15: 5, 16: 6, 17: 7, 35: 7, 53: 7,
};

function atomMass(atomicNo: number): number {
  const mass = ATOMIC_MASS[atomicNo];
  if (mass === undefined) {
    throw new Error(`no atomic mass for element ${atomicNo}`);
  }
  return mass;
}

/** Kier-Hall delta-v: valence electrons minus attached hydrogens */
export function valenceDelta(atom: Atom): number {
  const zv = VALENCE_ELECTRONS[atom.atomicNo];
  if (zv === undefined) {
    throw new Error(`no valence electron count for element ${atom.atomicNo}`);
  }
  return zv - hydrogenCount(atom);
}

export function autocorrelation(g: MolGraph, lag: number): number {
  const w = g.atoms.map(valenceDelta);
  let total = 0;
  for (let i = 0; i < g.atoms.length; i++) {
    for (let j = i + 1; j < g.atoms.length; j++) {
      if (g.distances[i][j] === lag) total += w[i] * w[j];
    }
  }
  return total;
}

export interface AdjacencySpectrum {
  spMax: number;
  spAbs: number;
  spAD: number;
  ve3: number;
}

export function adjacencySpectrum(g: MolGraph): AdjacencySpectrum {
  const n = g.atoms.length;
  if (n === 1) {
    // single-atom graph: the 1x1 adjacency matrix is [0]
    return { spMax: 0, spAbs: 0, spAD: 0, ve3: Math.log(0.1) };
  }
  const adj: number[][] = Array.from({ length: n }, () =>
    new Array<number>(n).fill(0),
  );
  for (const bond of g.bonds) {
    adj[bond.a][bond.b] = 1;
    adj[bond.b][bond.a] = 1;
  }
  const { values, vectors } = symmetricEigen(adj);
  const mean = values.reduce((s, v) => s + v, 0) / n;
  const spAbs = values.reduce((s, v) => s + Math.abs(v), 0);
  const spAD = values.reduce((s, v) => s + Math.abs(v - mean), 0);
  const leading = vectors[vectors.length - 1];
  const ve1 = leading.reduce((s, c) => s + Math.abs(c), 0);
  return {
    spMax: values[values.length - 1],
    spAbs,
    spAD,
    ve3: Math.log(0.1 * n * ve1),
  };
}

function isAmineNitrogen(g: MolGraph, atom: Atom, heavyDegree: number,
                         hCount: number): boolean {
  if (atom.atomicNo !== 7 || atom.aromatic || atom.charge !== 0) return false;
  if (hydrogenCount(atom) !== hCount) return false;
  const heavy = g.neighbors[atom.index];
  if (heavy.length !== heavyDegree) return false;
  if (!heavy.every((nb) => isSp3Carbon(g, nb))) return false;
  // all bonds from the nitrogen itself must be single
  return heavy.every((nb) => bondBetween(g, atom.index, nb)?.order === 1);
}

function isAmidineNitrogen(g: MolGraph, atom: Atom): boolean {
  if (atom.atomicNo !== 7 || atom.aromatic) return false;
  for (const c of g.neighbors[atom.index]) {
    if (g.atoms[c].atomicNo !== 6) continue;
    const nc = bondBetween(g, atom.index, c);
    if (!nc) continue;
    for (const other of g.neighbors[c]) {
      if (other === atom.index || g.atoms[other].atomicNo !== 7) continue;
      const cn = bondBetween(g, c, other);
      if (!cn) continue;
      // N=C-N (this N double-bonded) or N-C=N (the far N double-bonded)
      if ((nc.order === 2 && cn.order === 1) ||
          (nc.order === 1 && cn.order === 2)) {
        return true;
      }
    }
  }
  return false;
}

export function basicSiteCount(g: MolGraph): number {
  let count = 0;
  for (const atom of g.atoms) {
    if (atom.charge > 0) {
      count += 1;
      continue;
    }
    if (
      isAmineNitrogen(g, atom, 1, 2) ||
      isAmineNitrogen(g, atom, 2, 1) ||
      isAmineNitrogen(g, atom, 3, 0) ||
      isAmidineNitrogen(g, atom)
    ) {
      count += 1;
    }
  }
  return count;
}

export function computeDescriptors(g: MolGraph): DescriptorRow {
  const totalH = g.atoms.reduce((s, a) => s + hydrogenCount(a), 0);
  const spectrum = adjacencySpectrum(g);
  const countZ = (z: number) =>
    g.atoms.filter((a) => a.atomicNo === z).length;
  const mw =
    g.atoms.reduce((s, a) => s + atomMass(a.atomicNo), 0) +
    totalH * ATOMIC_MASS[1];
  return {
    SpMax_A: spectrum.spMax,
    nAromAtom: g.atoms.filter((a) => a.aromatic).length,
    nAromBond: g.bonds.filter((b) => b.aromatic).length,
    nC: countZ(6),
    ATS5dv: autocorrelation(g, 5),
    ATS6dv: autocorrelation(g, 6),
    SpAD_A: spectrum.spAD,
    SpAbs_A: spectrum.spAbs,
    VE3_A: spectrum.ve3,
    nAtom: g.atoms.length + totalH,
    nBase: basicSiteCount(g),
    MW: mw,
    nN: countZ(7),
    nO: countZ(8),
    nRing: g.ringCount,
    nHeavyAtom: g.atoms.length,
  };
}
